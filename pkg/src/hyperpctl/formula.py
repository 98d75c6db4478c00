"""HyperPCTL formulas: AST, parser, canonical printer, desugaring, renaming.

Concrete syntax::

    forall s. exists t. (init@s & init@t) => P(F a@s) = P(F a@t)

Atoms are ``prop@var``.  Boolean operators by decreasing precedence are
``!``, ``&``, ``|``, ``=>`` (right associative) and ``<=>``; a quantifier
extends as far right as possible.  Probability expressions combine
``P(path)``, rational numerals (``3/4``, ``0.25``), ``+``, ``-`` and ``*``.
Path formulas are ``X f``, ``f U g``, ``f U[k1,k2] g``, ``f U<=k g``,
``F f``, ``F[k1,k2] f``, ``G f`` and ``G[k1,k2] f``.  Comparisons are
``< <= = >= > !=`` and ``p in [l, u]``.
"""

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .model import format_rational

RELATIONS = ("<", "<=", "=", ">=", ">")


class FormulaError(ValueError):
    def __init__(self, message, pos=None, text=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} at column {pos + 1}"
            if text is not None:
                message += f"\n  {text}\n  {' ' * pos}^"
        super().__init__(message)


def _span():
    return field(default=None, compare=False, repr=False)


# -- state formulas --------------------------------------------------------


@dataclass(frozen=True)
class Forall:
    var: str | None
    body: object
    index: int | None = None
    span: tuple | None = _span()


@dataclass(frozen=True)
class Exists:
    var: str | None
    body: object
    index: int | None = None
    span: tuple | None = _span()


@dataclass(frozen=True)
class TrueF:
    span: tuple | None = _span()


@dataclass(frozen=True)
class Atom:
    prop: str
    var: str | None
    index: int | None = None
    span: tuple | None = _span()


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    body: object


@dataclass(frozen=True)
class Compare:
    left: object
    rel: str
    right: object


# sugar, removed by desugar()


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Implies:
    left: object
    right: object


@dataclass(frozen=True)
class Iff:
    left: object
    right: object


@dataclass(frozen=True)
class InInterval:
    expr: object
    low: Fraction
    high: Fraction


# -- probability expressions ------------------------------------------------


@dataclass(frozen=True)
class Prob:
    path: object


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


# -- path formulas ----------------------------------------------------------


@dataclass(frozen=True)
class Next:
    body: object


@dataclass(frozen=True)
class Until:
    left: object
    right: object


@dataclass(frozen=True)
class BoundedUntil:
    left: object
    right: object
    k1: int
    k2: int


@dataclass(frozen=True)
class Finally:
    body: object
    bounds: tuple | None = None


@dataclass(frozen=True)
class Globally:
    body: object
    bounds: tuple | None = None


STATE_TYPES = (Forall, Exists, TrueF, Atom, And, Neg, Compare, Or, Implies, Iff, InInterval)
EXPR_TYPES = (Prob, Const, Add, Sub, Mul)
PATH_TYPES = (Next, Until, BoundedUntil, Finally, Globally)
CORE_STATE_TYPES = (Forall, Exists, TrueF, Atom, And, Neg, Compare)


def false():
    return Neg(TrueF())


# -- parser -----------------------------------------------------------------

_PROP = re.compile(r"[A-Za-z_][A-Za-z0-9_=.]*")
_VAR = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM = re.compile(r"\d+/\d+|\d+\.\d*|\.\d+|\d+")
_BAD_NUM = re.compile(r"(\d+(\.\d*)?|\.\d+)[eE]")
_INT = re.compile(r"\d+")
_KEYWORDS = {"forall", "exists", "true", "false", "P", "X", "F", "G", "U", "in"}


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.furthest = (0, "unexpected input")

    # lexical helpers

    def ws(self):
        n = len(self.text)
        while self.pos < n and self.text[self.pos].isspace():
            self.pos += 1

    def fail(self, message, pos=None, fatal=False):
        pos = self.pos if pos is None else pos
        if pos >= self.furthest[0]:
            self.furthest = (pos, message)
        err = FormulaError(message, pos, self.text)
        err.fatal = fatal
        raise err

    def at(self, literal):
        self.ws()
        return self.text.startswith(literal, self.pos)

    def eat(self, literal):
        if self.at(literal):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal):
        if not self.eat(literal):
            self.fail(f"expected {literal!r}")

    def word(self):
        """The identifier at the cursor (not consumed) or None."""
        self.ws()
        m = _VAR.match(self.text, self.pos)
        return m.group() if m else None

    def at_keyword(self, kw):
        self.ws()
        if not self.text.startswith(kw, self.pos):
            return False
        end = self.pos + len(kw)
        if end < len(self.text) and (self.text[end].isalnum() or self.text[end] == "_"):
            return False
        # a proposition spelled like a keyword is still an atom
        m = _PROP.match(self.text, self.pos)
        return not self.text[m.end():].lstrip().startswith("@")

    def eat_keyword(self, kw):
        if self.at_keyword(kw):
            self.pos += len(kw)
            return True
        return False

    def number(self):
        self.ws()
        if _BAD_NUM.match(self.text, self.pos):
            self.fail("non-rational numeric literal", fatal=True)
        m = _NUM.match(self.text, self.pos)
        if not m:
            self.fail("expected a number")
        lit = m.group()
        if "/" in lit and int(lit.split("/")[1]) == 0:
            self.fail("zero denominator", fatal=True)
        self.pos = m.end()
        return Fraction(lit)

    def integer(self):
        self.ws()
        m = _INT.match(self.text, self.pos)
        if not m:
            self.fail("expected a natural number")
        self.pos = m.end()
        return int(m.group())

    # grammar

    def parse(self):
        try:
            f = self.formula()
            self.ws()
            if self.pos != len(self.text):
                self.fail("unexpected trailing input")
            return f
        except FormulaError as exc:
            pos, message = self.furthest
            if getattr(exc, "fatal", False) or (exc.pos is not None and exc.pos >= pos):
                raise
            raise FormulaError(message, pos, self.text) from None

    def formula(self):
        left = self.implies()
        while self.eat("<=>"):
            left = Iff(left, self.implies())
        return left

    def implies(self):
        left = self.disj()
        if self.eat("=>"):
            return Implies(left, self.implies())
        return left

    def disj(self):
        left = self.conj()
        while self.at("|"):
            self.pos += 1
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.at("&"):
            self.pos += 1
            left = And(left, self.unary())
        return left

    def unary(self):
        if self.at("!") and not self.at("!="):
            self.pos += 1
            return Neg(self.unary())
        for kw, cls in (("forall", Forall), ("exists", Exists)):
            if self.at_keyword(kw):
                start = self.pos
                self.pos += len(kw)
                var = self.word()
                if var is None or var in _KEYWORDS:
                    self.fail("expected a state variable")
                self.pos += len(var)
                self.expect(".")
                return cls(var, self.formula(), span=(start, self.pos))
        return self.primary()

    def primary(self):
        self.ws()
        start = self.pos
        for kw in ("G", "F", "X"):
            if self.at_keyword(kw):
                self.fail(f"path operator {kw!r} is only allowed directly under P(...)", fatal=True)
        if self.at_keyword("true"):
            self.pos += 4
            return TrueF(span=(start, self.pos))
        if self.at_keyword("false"):
            self.pos += 5
            return false()
        m = _PROP.match(self.text, self.pos)
        if m:
            after = self.text[m.end():].lstrip()
            if after.startswith("@"):
                return self.atom()
        if self.at("(") or self.at_keyword("P") or _NUM.match(self.text, self.pos) or _BAD_NUM.match(self.text, self.pos):
            try:
                return self.comparison()
            except FormulaError as exc:
                self.pos = start
                if getattr(exc, "fatal", False) or not self.at("("):
                    raise
            self.expect("(")
            f = self.formula()
            self.expect(")")
            return f
        self.fail("expected a state formula")

    def atom(self):
        self.ws()
        start = self.pos
        m = _PROP.match(self.text, self.pos)
        self.pos = m.end()
        self.expect("@")
        self.ws()
        v = _VAR.match(self.text, self.pos)
        if not v:
            self.fail("expected a state variable after '@'")
        self.pos = v.end()
        return Atom(m.group(), v.group(), span=(start, self.pos))

    def comparison(self):
        left = self.pexpr()
        if self.at_keyword("in"):
            self.pos += 2
            bpos = self.pos
            self.expect("[")
            lo = self.number()
            self.expect(",")
            hi = self.number()
            self.expect("]")
            if not 0 <= lo <= hi <= 1:
                self.fail("interval must satisfy 0 <= l <= u <= 1", bpos, fatal=True)
            return InInterval(left, lo, hi)
        for rel in ("<=", ">=", "!=", "<", ">", "="):
            if self.at(rel) and not self.at("<=>") and not self.at("=>"):
                self.pos += len(rel)
                return Compare(left, rel, self.pexpr())
        self.fail("expected a comparison operator")

    def pexpr(self):
        left = self.term()
        while True:
            if self.at("+"):
                self.pos += 1
                left = Add(left, self.term())
            elif self.at("-"):
                self.pos += 1
                left = Sub(left, self.term())
            else:
                return left

    def term(self):
        left = self.factor()
        while self.at("*"):
            self.pos += 1
            left = Mul(left, self.factor())
        return left

    def factor(self):
        self.ws()
        if self.at_keyword("P"):
            self.pos += 1
            self.expect("(")
            path = self.path()
            self.expect(")")
            return Prob(path)
        if self.eat("("):
            e = self.pexpr()
            self.expect(")")
            return e
        return Const(self.number())

    def bounds(self):
        bpos = self.pos
        if self.eat("["):
            k1 = self.integer()
            self.expect(",")
            k2 = self.integer()
            self.expect("]")
        elif self.at("<=") and not self.at("<=>"):
            self.pos += 2
            k1, k2 = 0, self.integer()
        else:
            return None
        if k1 > k2:
            self.fail(f"malformed bounds [{k1},{k2}]: need k1 <= k2", bpos, fatal=True)
        return (k1, k2)

    def path(self):
        if self.eat_keyword("X"):
            return Next(self.formula())
        for kw, cls in (("F", Finally), ("G", Globally)):
            if self.eat_keyword(kw):
                b = self.bounds()
                return cls(self.formula(), b)
        left = self.formula()
        if not self.eat_keyword("U"):
            self.fail("expected 'U' in path formula")
        b = self.bounds()
        right = self.formula()
        if b is None:
            return Until(left, right)
        return BoundedUntil(left, right, b[0], b[1])


def parse_formula(text):
    """Parse a HyperPCTL state formula into its (sugared) AST."""
    return _Parser(text).parse()


def parse_path(text):
    """Parse a bare path formula such as ``F a@s``."""
    p = _Parser(text)
    try:
        f = p.path()
        p.ws()
        if p.pos != len(text):
            p.fail("unexpected trailing input")
    except FormulaError as exc:
        pos, message = p.furthest
        if getattr(exc, "fatal", False) or (exc.pos is not None and exc.pos >= pos):
            raise
        raise FormulaError(message, pos, text) from None
    return f


def parse_prob_expr(text):
    """Parse a probability expression such as ``P(F a@s) + 1/2``."""
    p = _Parser(text)
    try:
        e = p.pexpr()
        p.ws()
        if p.pos != len(text):
            p.fail("unexpected trailing input")
    except FormulaError as exc:
        pos, message = p.furthest
        if getattr(exc, "fatal", False) or (exc.pos is not None and exc.pos >= pos):
            raise
        raise FormulaError(message, pos, text) from None
    return e


# -- printer ----------------------------------------------------------------


def to_text(f):
    """Canonical text; parsing it yields an equal AST for unrenamed formulas."""
    match f:
        case Forall(var, body, index):
            return f"forall {var if var is not None else index}. {to_text(body)}"
        case Exists(var, body, index):
            return f"exists {var if var is not None else index}. {to_text(body)}"
        case TrueF():
            return "true"
        case Atom(prop, var, index):
            return f"{prop}@{var if var is not None else index}"
        case And(l, r):
            return f"({_wrap(l)} & {_wrap(r)})"
        case Or(l, r):
            return f"({_wrap(l)} | {_wrap(r)})"
        case Implies(l, r):
            return f"({_wrap(l)} => {_wrap(r)})"
        case Iff(l, r):
            return f"({_wrap(l)} <=> {_wrap(r)})"
        case Neg(body):
            return f"!{_wrap(body)}"
        case Compare(l, rel, r):
            return f"({to_text(l)} {rel} {to_text(r)})"
        case InInterval(e, lo, hi):
            return f"({to_text(e)} in [{format_rational(lo)}, {format_rational(hi)}])"
        case Prob(path):
            return f"P({to_text(path)})"
        case Const(v):
            return format_rational(v)
        case Add(l, r):
            return f"({to_text(l)} + {to_text(r)})"
        case Sub(l, r):
            return f"({to_text(l)} - {to_text(r)})"
        case Mul(l, r):
            return f"({to_text(l)} * {to_text(r)})"
        case Next(body):
            return f"X {_wrap(body)}"
        case Until(l, r):
            return f"{_wrap(l)} U {_wrap(r)}"
        case BoundedUntil(l, r, k1, k2):
            return f"{_wrap(l)} U[{k1},{k2}] {_wrap(r)}"
        case Finally(body, b):
            return f"F{_bounds(b)} {_wrap(body)}"
        case Globally(body, b):
            return f"G{_bounds(b)} {_wrap(body)}"
    raise TypeError(f"not a formula node: {f!r}")


def _bounds(b):
    return "" if b is None else f"[{b[0]},{b[1]}]"


def _wrap(f):
    text = to_text(f)
    if isinstance(f, (Forall, Exists)):
        return f"({text})"
    return text


# -- desugaring ---------------------------------------------------------------


def desugar(f):
    """Rewrite derived operators into the core grammar.

    ``P(G f)`` becomes ``1 - P(true U !f)`` (bounded alike); the other
    rewrites are the usual boolean and temporal abbreviations.
    """
    match f:
        case Forall() | Exists():
            return replace(f, body=desugar(f.body))
        case TrueF() | Atom():
            return f
        case And(l, r):
            return And(desugar(l), desugar(r))
        case Neg(body):
            return Neg(desugar(body))
        case Or(l, r):
            return Neg(And(Neg(desugar(l)), Neg(desugar(r))))
        case Implies(l, r):
            return Neg(And(desugar(l), Neg(desugar(r))))
        case Iff(l, r):
            dl, dr = desugar(l), desugar(r)
            return And(Neg(And(dl, Neg(dr))), Neg(And(dr, Neg(dl))))
        case Compare(l, "!=", r):
            return Neg(Compare(_desugar_expr(l), "=", _desugar_expr(r)))
        case Compare(l, rel, r):
            return Compare(_desugar_expr(l), rel, _desugar_expr(r))
        case InInterval(e, lo, hi):
            de = _desugar_expr(e)
            return And(Compare(Const(lo), "<=", de), Compare(de, "<=", Const(hi)))
    raise FormulaError(f"not a state formula: {to_text(f)}")


def _desugar_expr(e):
    match e:
        case Prob(Globally(body, None)):
            return Sub(Const(Fraction(1)), Prob(Until(TrueF(), Neg(desugar(body)))))
        case Prob(Globally(body, (k1, k2))):
            return Sub(Const(Fraction(1)), Prob(BoundedUntil(TrueF(), Neg(desugar(body)), k1, k2)))
        case Prob(path):
            return Prob(_desugar_path(path))
        case Const():
            return e
        case Add(l, r):
            return Add(_desugar_expr(l), _desugar_expr(r))
        case Sub(l, r):
            return Sub(_desugar_expr(l), _desugar_expr(r))
        case Mul(l, r):
            return Mul(_desugar_expr(l), _desugar_expr(r))
    raise FormulaError(f"not a probability expression: {e!r}")


def _desugar_path(p):
    match p:
        case Next(body):
            return Next(desugar(body))
        case Until(l, r):
            return Until(desugar(l), desugar(r))
        case BoundedUntil(l, r, k1, k2):
            return BoundedUntil(desugar(l), desugar(r), k1, k2)
        case Finally(body, None):
            return Until(TrueF(), desugar(body))
        case Finally(body, (k1, k2)):
            return BoundedUntil(TrueF(), desugar(body), k1, k2)
        case Globally():
            raise FormulaError("G is only supported directly under P(...)")
    raise FormulaError(f"not a path formula: {p!r}")


def is_core(f):
    """True if only core constructors occur."""
    return all(
        isinstance(g, CORE_STATE_TYPES + (Prob, Const, Add, Sub, Mul, Next, Until, BoundedUntil))
        and not (isinstance(g, Compare) and g.rel not in RELATIONS)
        for g in walk(f)
    )


def walk(f):
    """Pre-order traversal over every node of any sort."""
    yield f
    for child in children(f):
        yield from walk(child)


def children(f):
    match f:
        case Forall(_, body) | Exists(_, body) | Neg(body) | Next(body) | Finally(body) | Globally(body):
            return (body,)
        case Prob(path):
            return (path,)
        case InInterval(e, _, _):
            return (e,)
        case Compare(l, _, r):
            return (l, r)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r) | Add(l, r) | Sub(l, r) | Mul(l, r) | Until(l, r) | BoundedUntil(l, r, _, _):
            return (l, r)
    return ()


# -- sentences ---------------------------------------------------------------


@dataclass(frozen=True)
class SentenceInfo:
    n: int
    kinds: tuple        # "forall" / "exists" per index 1..n
    formula: object     # renamed core AST
    names: tuple        # original variable name per index 1..n


def check_sentence(f):
    """Verify that a desugared formula is a sentence and rename its variables.

    Quantifiers are numbered 1..n in pre-order (outermost first, left to
    right); each atom takes the index of its innermost binder.  Shadowing
    is allowed.
    """
    kinds, names = [], []

    def go(g, env):
        match g:
            case Forall(var, body) | Exists(var, body):
                kinds.append("forall" if isinstance(g, Forall) else "exists")
                names.append(var)
                i = len(kinds)
                return type(g)(None, go(body, {**env, var: i}), i, span=g.span)
            case Atom(prop, var):
                if var not in env:
                    where = f" at column {g.span[0] + 1}" if g.span else ""
                    raise FormulaError(f"free occurrence of {prop}@{var}: variable {var!r} is unbound{where}")
                return Atom(prop, None, env[var], span=g.span)
            case TrueF() | Const():
                return g
            case And(l, r):
                return And(go(l, env), go(r, env))
            case Neg(body):
                return Neg(go(body, env))
            case Compare(l, rel, r):
                return Compare(go(l, env), rel, go(r, env))
            case Prob(path):
                return Prob(go(path, env))
            case Add(l, r) | Sub(l, r) | Mul(l, r):
                return type(g)(go(l, env), go(r, env))
            case Next(body):
                return Next(go(body, env))
            case Until(l, r):
                return Until(go(l, env), go(r, env))
            case BoundedUntil(l, r, k1, k2):
                return BoundedUntil(go(l, env), go(r, env), k1, k2)
        raise FormulaError(f"formula is not desugared: {to_text(g)}")

    renamed = go(f, {})
    return SentenceInfo(len(kinds), tuple(kinds), renamed, tuple(names))


def bind_atoms(f, env):
    """Replace ``a@v`` by the indexed atom ``a_{env[v]}`` in a quantifier-free formula."""
    if isinstance(f, (Forall, Exists)):
        raise FormulaError("quantifiers are not allowed here")
    if isinstance(f, Atom):
        if f.var not in env:
            raise FormulaError(f"variable {f.var!r} does not name exactly one quantifier")
        return Atom(f.prop, None, env[f.var], span=f.span)
    if isinstance(f, (TrueF, Const)):
        return f
    if isinstance(f, (BoundedUntil,)):
        return BoundedUntil(bind_atoms(f.left, env), bind_atoms(f.right, env), f.k1, f.k2)
    if isinstance(f, Compare):
        return Compare(bind_atoms(f.left, env), f.rel, bind_atoms(f.right, env))
    return type(f)(*(bind_atoms(c, env) for c in children(f)))


def prepare(text_or_ast):
    """Parse (if needed), desugar and rename; returns SentenceInfo."""
    f = parse_formula(text_or_ast) if isinstance(text_or_ast, str) else text_or_ast
    return check_sentence(desugar(f))


def subformulas_inside_out(f):
    """Distinct state subformulas, every one after all of its state subformulas."""
    seen = set()
    order = []

    def visit(g):
        for c in children(g):
            visit(c)
        if isinstance(g, STATE_TYPES) and g not in seen:
            seen.add(g)
            order.append(g)

    visit(f)
    return order


def prob_subterms(e):
    """The distinct P(path) nodes of an expression, not descending into paths."""
    out = []

    def go(x):
        if isinstance(x, Prob):
            if x not in out:
                out.append(x)
        else:
            for c in children(x):
                go(c)

    go(e)
    return out
