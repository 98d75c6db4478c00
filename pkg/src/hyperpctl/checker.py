"""Inside-out labeling of the self-composition and the final verdict."""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import engine
from .formula import (
    Add, And, Atom, BoundedUntil, Compare, Const, Exists, Forall, FormulaError,
    Mul, Neg, Next, Prob, SentenceInfo, Sub, TrueF, Until, bind_atoms, desugar,
    parse_prob_expr, prepare, prob_subterms, subformulas_inside_out, to_text,
)
from .model import DEFAULT_BUDGET, ProductChain, format_rational, self_compose

_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


@dataclass
class LabelTable:
    """Satisfaction vectors per state subformula and probability vectors per P(path)."""

    sat: dict = field(default_factory=dict)
    prob: dict = field(default_factory=dict)


@dataclass
class Verdict:
    satisfied: bool
    witness: list = field(default_factory=list)
    counterexample: list = field(default_factory=list)
    probes: dict = field(default_factory=dict)
    quantifiers: int = 0

    def to_json(self):
        from . import __version__

        return {
            "version": __version__,
            "satisfied": self.satisfied,
            "witness": [dict(variable=v, index=i, state=s) for v, i, s in self.witness],
            "counterexample": [dict(variable=v, index=i, state=s) for v, i, s in self.counterexample],
            "probes": {
                name: {_tuple_key(t): format_rational(q) for t, q in vec.items()}
                for name, vec in self.probes.items()
            },
        }


def _tuple_key(t):
    return "(" + ",".join(str(c) for c in t) + ")"


def unit_chain(m):
    """M^0: the single empty-tuple state with a self-loop."""
    probs = np.empty(1, dtype=object)
    probs[0] = Fraction(1)
    return ProductChain(m, 0, np.array([0, 1]), np.array([0]), probs)


def check(m, sentence, budget=DEFAULT_BUDGET, probes=()):
    """Decide M |= sentence; ``sentence`` is text, an AST or a SentenceInfo."""
    info = sentence if isinstance(sentence, SentenceInfo) else prepare(sentence)
    pc = self_compose(m, info.n, budget) if info.n > 0 else unit_chain(m)
    table = label_all(pc, info)
    vec = table.sat[info.formula]
    if vec.any() and not vec.all():
        raise RuntimeError("sentence label differs between product states")
    satisfied = bool(vec[0])
    witness, counter = extract_witness(table, info, pc, satisfied)
    probe_out = {text: probe(pc, table, info, text) for text in probes}
    return Verdict(satisfied, witness, counter, probe_out, info.n)


def label_all(pc, info, table=None):
    table = LabelTable() if table is None else table
    for g in subformulas_inside_out(info.formula):
        if g not in table.sat:
            table.sat[g] = _label(pc, table, g)
    return table


def _label(pc, table, g):
    n = pc.n_states
    match g:
        case TrueF():
            return np.ones(n, dtype=bool)
        case Atom(prop, _, i):
            return pc.atom(prop, i)
        case And(l, r):
            return table.sat[l] & table.sat[r]
        case Neg(body):
            return ~table.sat[body]
        case Compare(l, rel, r):
            for term in prob_subterms(l) + prob_subterms(r):
                if term not in table.prob:
                    table.prob[term] = path_probabilities(pc, table, term.path)
            lv = _expr_vector(table, l, n)
            rv = _expr_vector(table, r, n)
            return np.array([_OPS[rel](a, b) for a, b in zip(lv, rv)], dtype=bool)
        case Exists(_, body, i):
            return _aggregate(pc, table.sat[body], i, np.any)
        case Forall(_, body, i):
            return _aggregate(pc, table.sat[body], i, np.all)
    raise FormulaError(f"cannot label non-core node {to_text(g)}")


def _aggregate(pc, vec, i, reduce):
    shape = (pc.base.n_states,) * pc.arity
    cube = vec.reshape(shape)
    agg = reduce(cube, axis=i - 1, keepdims=True)
    return np.broadcast_to(agg, shape).reshape(-1).copy()


def path_probabilities(pc, table, path):
    match path:
        case Next(body):
            return engine.prob_next(pc, table.sat[body])
        case Until(l, r):
            return engine.prob_until_unbounded(pc, table.sat[l], table.sat[r])
        case BoundedUntil(l, r, k1, k2):
            return engine.prob_until_bounded(pc, table.sat[l], table.sat[r], k1, k2)
    raise FormulaError(f"not a core path formula: {path!r}")


def _expr_vector(table, e, n):
    match e:
        case Prob():
            return table.prob[e]
        case Const(v):
            return engine.constant_vector(n, v)
        case Add(l, r):
            return _expr_vector(table, l, n) + _expr_vector(table, r, n)
        case Sub(l, r):
            return _expr_vector(table, l, n) - _expr_vector(table, r, n)
        case Mul(l, r):
            return _expr_vector(table, l, n) * _expr_vector(table, r, n)
    raise FormulaError(f"not a probability expression: {e!r}")


def eval_prob_expr(table, e, s):
    """Exact value of a probability expression at product state ``s``."""
    match e:
        case Prob():
            if e not in table.prob:
                raise KeyError(f"P-subterm not labeled: {to_text(e)}")
            return table.prob[e][s]
        case Const(v):
            return Fraction(v)
        case Add(l, r):
            return eval_prob_expr(table, l, s) + eval_prob_expr(table, r, s)
        case Sub(l, r):
            return eval_prob_expr(table, l, s) - eval_prob_expr(table, r, s)
        case Mul(l, r):
            return eval_prob_expr(table, l, s) * eval_prob_expr(table, r, s)
    raise FormulaError(f"not a probability expression: {e!r}")


def extract_witness(table, info, pc, satisfied):
    """Instantiate the leading quantifier block that decides the verdict.

    A satisfied sentence yields the smallest witnesses for its leading
    existentials; a violated one yields the smallest counterexample for its
    leading universals.  Returns ``(witness, counterexample)`` as lists of
    ``(variable, index, state)``.
    """
    wanted, keep = (Exists, True) if satisfied else (Forall, False)
    chosen = []
    g = info.formula
    N = pc.base.n_states
    while isinstance(g, wanted):
        i = g.index
        body = table.sat[g.body]
        prefix = [s for _, _, s in chosen]
        for s in range(N):
            tup = prefix + [s] + [0] * (pc.arity - i)
            if bool(body[pc.encode(tup)]) == keep:
                chosen.append((info.names[i - 1], i, s))
                break
        else:
            raise RuntimeError("quantifier label inconsistent with its body")
        g = g.body
    return (chosen, []) if satisfied else ([], chosen)


def probe(pc, table, info, text):
    """Exact vector of a probability expression written with the sentence's variables."""
    expr = parse_prob_expr(text)
    env = {}
    for i, name in enumerate(info.names, start=1):
        env.setdefault(name, []).append(i)
    env = {name: idx[0] for name, idx in env.items() if len(idx) == 1}
    wrapped = bind_atoms(desugar(Compare(expr, "=", expr)), env)
    label_all(pc, SentenceInfo(info.n, info.kinds, wrapped, info.names), table)
    vec = _expr_vector(table, wrapped.left, pc.n_states)
    return {pc.decode(s) if pc.arity else (): vec[s] for s in range(pc.n_states)}
