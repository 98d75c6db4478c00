"""Ready-to-check sentences for common probabilistic hyperproperties.

Every generator returns formula text in the concrete syntax of
:mod:`hyperpctl.formula`, with state variables ``s``, ``t`` (and ``u``).
"""

from fractions import Fraction

from .model import Dtmc, format_rational


class TemplateError(ValueError):
    pass


def _conj(parts):
    parts = list(parts)
    if not parts:
        return "true"
    return " & ".join(f"({p})" for p in parts)


def _guarded(guard, body, left="s", right="t"):
    if guard is None:
        return body
    g1, g2 = (guard, guard) if isinstance(guard, str) else guard
    return f"({g1}@{left} & {g2}@{right}) => ({body})"


def check_partition(m, partition):
    blocks = [sorted(set(b)) for b in partition]
    seen = {}
    for k, block in enumerate(blocks):
        if not block:
            raise TemplateError(f"block {k} is empty")
        for s in block:
            if not 0 <= s < m.n_states:
                raise TemplateError(f"state {s} is not a state of the chain")
            if s in seen:
                raise TemplateError(f"state {s} appears in blocks {seen[s]} and {k}")
            seen[s] = k
    missing = sorted(set(range(m.n_states)) - set(seen))
    if missing:
        raise TemplateError(f"states {missing} are not covered by the partition")
    return blocks


def bisimulation(m, partition, prefix="blk", literal=False):
    """Label each block with a fresh proposition and emit the bisimulation sentence.

    Returns ``(augmented_chain, sentence_text)``.  By default the sentence
    requires equal labels and equal one-step block probabilities for every
    pair in a common block.  ``literal=True`` instead wraps the block
    condition in ``P(G ...) = 1`` over the joint run; that variant implies
    bisimulation but also constrains pairs the two runs drift into, so it can
    reject genuine bisimulations.
    """
    blocks = check_partition(m, partition)
    fresh = [f"{prefix}{k + 1}" for k in range(len(blocks))]
    clash = sorted(set(fresh) & set(m.atomic_props))
    if clash:
        raise TemplateError(f"fresh propositions {clash} already occur in the chain")
    labels = {s: set(m.labels[s]) for s in range(m.n_states)}
    for name, block in zip(fresh, blocks):
        for s in block:
            labels[s].add(name)
    augmented = Dtmc(m.n_states, list(m.transitions()), labels, set(m.atomic_props) | set(fresh))

    same_labels = _conj(f"{a}@s <=> {a}@t" for a in m.atomic_props)
    step = _conj(f"P(X {b}@s) = P(X {b}@t)" for b in fresh)
    if literal:
        step = f"P(G ({step})) = 1"
    clauses = [f"({b}@s & {b}@t) => (({same_labels}) & ({step}))" for b in fresh]
    return augmented, f"forall s. forall t. {_conj(clauses)}"


def noninterference(low, guard=None):
    """For all pairs: P(G (P(X low@s) = P(X low@t))) = 1, optionally guarded.

    Without a guard the antecedent is ``low@s & low@t``.
    """
    antecedent = f"{low}@s & {low}@t" if guard is None else _guard_text(guard)
    return f"forall s. forall t. ({antecedent}) => (P(G (P(X {low}@s) = P(X {low}@t))) = 1)"


def _guard_text(guard):
    g1, g2 = (guard, guard) if isinstance(guard, str) else guard
    return f"{g1}@s & {g2}@t"


def output_noninterference(lows, guard=None):
    """Every low output is reached with the same probability from both states."""
    if not lows:
        raise TemplateError("need at least one low proposition")
    body = _conj(f"P(F {l}@s) = P(F {l}@t)" for l in lows)
    return f"forall s. forall t. {_guarded(guard, body)}"


def qif(lows, bound, guard=None):
    """Bounded leakage: each output reached with probability <= bound, and equally from all pairs.

    ``bound`` stands in for log|L|/log|H| and must be given as a rational.
    """
    if not lows:
        raise TemplateError("need at least one low proposition")
    b = format_rational(Fraction(bound))
    capped = _conj(f"P(F {l}@s) <= {b}" for l in lows)
    equal = _conj(f"P(F {l}@s) = P(F {l}@t)" for l in lows)
    return f"forall s. forall t. {_guarded(guard, f'({capped}) & ({equal})')}"


def differential_privacy(factor, pre_atoms, out_atoms):
    """Two-direction randomized-response check with multiplicative ``factor``.

    ``pre_atoms = (p, q)`` names the two adjacent inputs; ``out_atoms`` is one
    output proposition or a pair ``(o1, o2)`` used by the (p, q) and (q, p)
    directions respectively.
    """
    factor = Fraction(factor)
    if factor <= 0:
        raise TemplateError("factor must be positive")
    p, q = pre_atoms
    o1, o2 = (out_atoms, out_atoms) if isinstance(out_atoms, str) else out_atoms
    f = format_rational(factor)
    first = f"({p}@s & {q}@t) => (P(F {o1}@s) <= {f} * P(F {o1}@t))"
    second = f"({q}@s & {p}@t) => (P(F {o2}@s) <= {f} * P(F {o2}@t))"
    return f"forall s. forall t. ({first}) & ({second})"


def causation(cause, effect, screened=False, guard=None, props=()):
    """Probabilistic causation; ``screened`` adds the screening-off condition.

    For the screened form ``props`` is the full proposition set; the
    screening conjunction ranges over ``props`` minus cause and effect.
    """
    if cause == effect:
        raise TemplateError("cause and effect must differ")
    c, e = cause, effect
    raised = f"P({c}@s U {e}@s) > P(!{c}@t U {e}@t)"
    if not screened:
        return f"forall s. forall t. {_guarded(guard, raised)}"
    others = [a for a in props if a not in (c, e)]
    screen = _conj(f"P(({a}@u & {c}@u) U {e}@u) = P({c}@s U {e}@s)" for a in others)
    body = f"forall u. !(({raised}) & ({screen}))"
    return f"forall s. forall t. {_guarded(guard, body)}"
