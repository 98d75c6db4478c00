"""Quantified Boolean formulas: parsing, brute-force evaluation, and the
reduction to HyperPCTL model checking over a fixed two-state chain."""

import re
from dataclasses import dataclass

from .model import Dtmc

DEFAULT_CAP = 20
RESERVED = {"forall", "exists", "true", "false", "P", "X", "F", "G", "U", "in"}


class QbfError(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class BAnd:
    left: object
    right: object


@dataclass(frozen=True)
class BOr:
    left: object
    right: object


@dataclass(frozen=True)
class Qbf:
    prefix: tuple   # ((quantifier, variable), ...), quantifier in {"forall", "exists"}
    matrix: object

    def __post_init__(self):
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise QbfError("prefix variables must be distinct")
        for q, v in self.prefix:
            if q not in ("forall", "exists"):
                raise QbfError(f"unknown quantifier {q!r}")
            if v in RESERVED:
                raise QbfError(f"variable name {v!r} is reserved")
        free = variables(self.matrix) - set(names)
        if free:
            raise QbfError(f"matrix variables {sorted(free)} are not quantified")


def variables(f):
    match f:
        case Var(name):
            return {name}
        case Not(body):
            return variables(body)
        case BAnd(l, r) | BOr(l, r):
            return variables(l) | variables(r)
    raise QbfError(f"not a boolean formula: {f!r}")


def connectives(f):
    match f:
        case Var():
            return 0
        case Not(body):
            return 1 + connectives(body)
        case BAnd(l, r) | BOr(l, r):
            return 1 + connectives(l) + connectives(r)
    raise QbfError(f"not a boolean formula: {f!r}")


_TOKEN = re.compile(r"\s*(?:(forall|exists)\b|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def parse_qbf(text):
    """Parse ``forall x1. exists x2. (x1 & x2) | (!x1 & !x2)``."""
    tokens = []
    for m in _TOKEN.finditer(text):
        kw, name, sym = m.groups()
        if kw:
            tokens.append(("kw", kw))
        elif name:
            tokens.append(("name", name))
        elif sym and not sym.isspace():
            tokens.append(("sym", sym))
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else (None, None)

    def take(kind=None, value=None):
        nonlocal pos
        tok = peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind or "token"
            raise QbfError(f"expected {want}, got {tok[1]!r} (token {pos + 1})")
        pos += 1
        return tok[1]

    prefix = []
    while peek()[0] == "kw":
        q = take("kw")
        v = take("name")
        take("sym", ".")
        prefix.append((q, v))

    def disj():
        left = conj()
        while peek() == ("sym", "|"):
            take()
            left = BOr(left, conj())
        return left

    def conj():
        left = unary()
        while peek() == ("sym", "&"):
            take()
            left = BAnd(left, unary())
        return left

    def unary():
        if peek() == ("sym", "!"):
            take()
            return Not(unary())
        if peek() == ("sym", "("):
            take()
            f = disj()
            take("sym", ")")
            return f
        return Var(take("name"))

    matrix = disj()
    if pos != len(tokens):
        raise QbfError(f"unexpected trailing input {peek()[1]!r}")
    return Qbf(tuple(prefix), matrix)


def to_text(q):
    def go(f):
        match f:
            case Var(name):
                return name
            case Not(body):
                return f"!{go(body)}"
            case BAnd(l, r):
                return f"({go(l)} & {go(r)})"
            case BOr(l, r):
                return f"({go(l)} | {go(r)})"

    head = "".join(f"{kind} {v}. " for kind, v in q.prefix)
    return head + go(q.matrix)


def evaluate(f, env):
    match f:
        case Var(name):
            return env[name]
        case Not(body):
            return not evaluate(body, env)
        case BAnd(l, r):
            return evaluate(l, env) and evaluate(r, env)
        case BOr(l, r):
            return evaluate(l, env) or evaluate(r, env)
    raise QbfError(f"not a boolean formula: {f!r}")


def qbf_brute_force(q, cap=DEFAULT_CAP):
    """Truth value by recursive expansion of the prefix over {True, False}."""
    if len(q.prefix) > cap:
        raise QbfError(f"prefix has {len(q.prefix)} variables, cap is {cap}")

    def go(i, env):
        if i == len(q.prefix):
            return evaluate(q.matrix, env)
        kind, v = q.prefix[i]
        branches = (go(i + 1, {**env, v: b}) for b in (True, False))
        return all(branches) if kind == "forall" else any(branches)

    return go(0, {})


def two_state_chain():
    """s0 and s1, each a probability-1 self-loop; only s0 is labeled ``a``."""
    return Dtmc(2, [(0, 0, 1), (1, 1, 1)], {0: {"a"}}, {"a"})


def reduce(q):
    """Map a QBF to ``(chain, sentence_text)`` with the same quantifier structure.

    Assigning s0 to a state variable plays the role of setting the Boolean
    variable true, s1 of setting it false.
    """
    if not isinstance(q, Qbf):
        raise QbfError("expected a Qbf")

    def go(f):
        match f:
            case Var(name):
                return f"a@{name}"
            case Not(body):
                return f"!{go(body)}"
            case BAnd(l, r):
                return f"({go(l)} & {go(r)})"
            case BOr(l, r):
                return f"({go(l)} | {go(r)})"

    head = "".join(f"{kind} {v}. " for kind, v in q.prefix)
    return two_state_chain(), head + go(q.matrix)
