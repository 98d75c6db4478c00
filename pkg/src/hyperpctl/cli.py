"""Command-line front end.

Exit codes: 0 satisfied / ok, 1 unsatisfied / violations found, 2 error.
"""

import argparse
import json
import sys
from fractions import Fraction

from . import __version__, templates
from .checker import check, label_all
from .formula import (
    Atom, Compare, FormulaError, Prob, SentenceInfo, bind_atoms, desugar, parse_path, walk,
)
from .model import (
    DEFAULT_BUDGET, BudgetExceeded, ModelError, format_rational, load_model,
    product_to_dtmc, self_compose, serialize_model, validate,
)
from .reductions import QbfError, parse_qbf, reduce
from .simulate import SimConfig, SimulationError, estimate
from .templates import TemplateError


class UsageError(Exception):
    pass


def _decimal(q):
    return f"{float(q):.6g}"


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _formula_text(args):
    if (args.formula is None) == (args.text is None):
        raise UsageError("give exactly one of --formula FILE or --text FORMULA")
    return _read(args.formula).strip() if args.formula else args.text


def _emit(args, payload, lines):
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        for line in lines:
            print(line)


def cmd_check(args):
    m = load_model(args.model)
    verdict = check(m, _formula_text(args), budget=args.budget, probes=args.probe)
    lines = ["SAT" if verdict.satisfied else "UNSAT"]
    for title, items in (("witness", verdict.witness), ("counterexample", verdict.counterexample)):
        if items:
            lines.append(f"{title}: " + ", ".join(f"{v}={s}" for v, _, s in items))
    for name, vec in verdict.probes.items():
        lines.append(f"probe {name}:")
        for tup, q in vec.items():
            lines.append(f"  {tup}: {format_rational(q)} ({_decimal(q)})")
    _emit(args, verdict.to_json(), lines)
    return 0 if verdict.satisfied else 1


def cmd_validate(args):
    m = load_model(args.model, check=False)
    problems = validate(m)
    payload = {"version": __version__, "ok": not problems, "violations": problems,
               "states": m.n_states, "propositions": list(m.atomic_props)}
    _emit(args, payload, problems or [f"ok: {m.n_states} states, {len(m.atomic_props)} propositions"])
    return 1 if problems else 0


def cmd_compose(args):
    m = load_model(args.model)
    pc = self_compose(m, args.n, args.budget)
    text = serialize_model(product_to_dtmc(pc))
    _write_or_print(args.output, text)
    return 0


def _write_or_print(path, text):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_reduce_qbf(args):
    if (args.qbf is None) == (args.text is None):
        raise UsageError("give exactly one of --qbf FILE or --text QBF")
    q = parse_qbf(_read(args.qbf) if args.qbf else args.text)
    m, sentence = reduce(q)
    _emit_model_and_formula(serialize_model(m), sentence, args.model_out, args.formula_out)
    return 0


def _emit_model_and_formula(model_text, formula, model_out=None, formula_out=None):
    if model_out:
        _write_or_print(model_out, model_text)
    else:
        sys.stdout.write(model_text)
    if formula_out:
        _write_or_print(formula_out, formula + "\n")
    else:
        if not model_out:
            print("# formula")
        print(formula)


def _parse_partition(text):
    try:
        return [[int(x) for x in block.split(",") if x.strip()] for block in text.split(";")]
    except ValueError:
        raise UsageError(f"bad partition {text!r}; use e.g. '0,1;2,3'") from None


def cmd_template(args):
    kind = args.kind
    guard = args.guard
    if guard and len(guard) == 1:
        guard = guard[0]
    elif guard:
        guard = tuple(guard)
    if kind == "bisimulation":
        if not args.model or not args.partition:
            raise UsageError("bisimulation needs --model and --partition")
        m = load_model(args.model)
        augmented, text = templates.bisimulation(m, _parse_partition(args.partition), literal=args.literal)
        _emit_model_and_formula(serialize_model(augmented), text, args.model_out)
        return 0
    if kind == "noninterference":
        text = templates.noninterference(_one(args.low, "--low"), guard)
    elif kind == "output-noninterference":
        text = templates.output_noninterference(_need(args.low, "--low"), guard)
    elif kind == "qif":
        if args.bound is None:
            raise UsageError("qif needs --bound")
        text = templates.qif(_need(args.low, "--low"), Fraction(args.bound), guard)
    elif kind == "dp":
        if args.factor is None or not args.pre or len(args.pre) != 2 or not args.out:
            raise UsageError("dp needs --factor, --pre A B and --out O [O2]")
        out = args.out[0] if len(args.out) == 1 else tuple(args.out[:2])
        text = templates.differential_privacy(Fraction(args.factor), tuple(args.pre), out)
    elif kind == "causation":
        if not args.cause or not args.effect:
            raise UsageError("causation needs --cause and --effect")
        props = load_model(args.model).atomic_props if args.model else ()
        text = templates.causation(args.cause, args.effect, args.screened, guard, props)
    else:
        raise UsageError(f"unknown template {kind!r}")
    print(text)
    return 0


def _need(values, flag):
    if not values:
        raise UsageError(f"missing {flag}")
    return values


def _one(values, flag):
    values = _need(values, flag)
    if len(values) != 1:
        raise UsageError(f"{flag} takes one proposition here")
    return values[0]


def cmd_simulate(args):
    m = load_model(args.model)
    phi = parse_path(args.path)
    variables = args.vars.split(",") if args.vars else []
    if not variables:
        for node in walk(phi):
            if isinstance(node, Atom) and node.var not in variables:
                variables.append(node.var)
    env = {v: i for i, v in enumerate(variables, start=1)}
    if len(env) != len(variables):
        raise UsageError("--vars must be distinct")
    start = [int(x) for x in args.start.split(",")] if args.start else [0] * len(variables)
    if len(start) != len(variables):
        raise UsageError(f"--start needs {len(variables)} states, one per variable {variables}")
    core = bind_atoms(desugar(Compare(Prob(phi), "=", Prob(phi))), env)
    path = core.left.path if isinstance(core.left, Prob) else None
    if path is None:
        raise UsageError("G is not supported by simulate; use F on the negation")
    n = max(len(variables), 1)
    pc = self_compose(m, n, args.budget)
    table = label_all(pc, SentenceInfo(n, ("forall",) * n, core, tuple(variables)))
    s0 = pc.encode(start if variables else [0])
    cfg = SimConfig(args.trials, args.horizon, args.seed)
    est = estimate(pc, path, s0, cfg, table.sat, workers=args.workers)
    payload = {"version": __version__, "path": args.path, "start": start, **est.to_json()}
    lines = [f"estimate {est.estimate:.6g} +- {est.std_error:.3g} (trials={est.trials}, horizon={est.horizon}, seed={est.seed})"]
    if est.lower_bound:
        lines.append("note: unbounded until truncated at the horizon; this is a lower bound")
    if args.exact:
        exact = table.prob[core.left][s0]
        payload["exact"] = format_rational(exact)
        lines.append(f"exact {format_rational(exact)} ({_decimal(exact)})")
    _emit(args, payload, lines)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="hyperpctl", description="Exact HyperPCTL model checking of DTMCs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", required=True, help="model file")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max product states")

    c = sub.add_parser("check", help="decide whether the model satisfies a sentence")
    common(c)
    c.add_argument("--formula", help="file holding the sentence")
    c.add_argument("--text", help="the sentence inline")
    c.add_argument("--probe", action="append", default=[], metavar="EXPR",
                   help='attach the exact vector of e.g. "P(F a@s)"')
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("validate", help="report violations of the DTMC definition")
    common(v)
    v.set_defaults(func=cmd_validate)

    k = sub.add_parser("compose", help="dump the n-fold self-composition as a model file")
    common(k)
    k.add_argument("-n", type=int, required=True)
    k.add_argument("--output")
    k.set_defaults(func=cmd_compose)

    r = sub.add_parser("reduce-qbf", help="emit the chain and sentence for a QBF")
    r.add_argument("--qbf", help="file with 'forall x1. exists x2. matrix'")
    r.add_argument("--text")
    r.add_argument("--model-out")
    r.add_argument("--formula-out")
    r.set_defaults(func=cmd_reduce_qbf)

    t = sub.add_parser("template", help="emit a requirement sentence")
    t.add_argument("kind", choices=("bisimulation", "noninterference", "output-noninterference",
                                    "qif", "dp", "causation"))
    t.add_argument("--model")
    t.add_argument("--model-out")
    t.add_argument("--partition", help="blocks separated by ';', states by ','")
    t.add_argument("--literal", action="store_true", help="bisimulation: wrap the block condition in P(G ...) = 1")
    t.add_argument("--low", action="append")
    t.add_argument("--guard", nargs="+", help="one proposition, or one per state variable")
    t.add_argument("--bound")
    t.add_argument("--factor")
    t.add_argument("--pre", nargs=2)
    t.add_argument("--out", nargs="+")
    t.add_argument("--cause")
    t.add_argument("--effect")
    t.add_argument("--screened", action="store_true")
    t.set_defaults(func=cmd_template)

    s = sub.add_parser("simulate", help="Monte-Carlo estimate of a path formula")
    common(s)
    s.add_argument("--path", required=True, help='path formula, e.g. "F[0,10] a@s"')
    s.add_argument("--vars", help="state variables in component order (default: order of appearance)")
    s.add_argument("--start", help="comma-separated start state per variable (default all 0)")
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--horizon", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--exact", action="store_true", help="also report the exact probability")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
    except (ModelError, FormulaError, QbfError, TemplateError, BudgetExceeded,
            SimulationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
