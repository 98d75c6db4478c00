"""Discrete-time Markov chains, the model file format, and n-ary self-composition."""

import re
from fractions import Fraction

import numpy as np

DEFAULT_BUDGET = 10**6

PROP_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_=.]*\Z")
_NUMBER_RE = re.compile(r"(\d+(/\d+)?|\d+\.\d*|\.\d+)\Z")


class ModelError(ValueError):
    """Malformed model file or invalid chain."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExceeded(ValueError):
    def __init__(self, required, budget):
        self.required = required
        self.budget = budget
        super().__init__(
            f"self-composition needs {required} product states, budget is {budget}"
        )


def parse_rational(text):
    """Exact rational from ``p/q`` or a finite decimal; ``0.4`` gives ``2/5``."""
    text = text.strip()
    if not _NUMBER_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(text)


def format_rational(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class Dtmc:
    """A finite DTMC with exact rational transition probabilities.

    ``transitions`` is an iterable of ``(source, target, probability)``;
    ``labels`` maps a state index to an iterable of proposition names.
    Construction normalizes but does not validate; see :func:`validate`.
    """

    def __init__(self, n_states, transitions, labels=None, atomic_props=None):
        self.n_states = int(n_states)
        rows = [dict() for _ in range(self.n_states)]
        for src, dst, p in transitions:
            if not (0 <= src < self.n_states and 0 <= dst < self.n_states):
                raise ModelError(f"transition {src} -> {dst} outside 0..{self.n_states - 1}")
            if dst in rows[src]:
                raise ModelError(f"duplicate transition {src} -> {dst}")
            rows[src][dst] = Fraction(p)
        self.rows = tuple(tuple(sorted(r.items())) for r in rows)
        labels = labels or {}
        lab = [frozenset() for _ in range(self.n_states)]
        for s, names in labels.items():
            if not 0 <= s < self.n_states:
                raise ModelError(f"label for unknown state {s}")
            lab[s] = frozenset(names)
        self.labels = tuple(lab)
        if atomic_props is None:
            atomic_props = set().union(*self.labels) if self.labels else set()
        self.atomic_props = tuple(sorted(set(atomic_props)))

    def transitions(self):
        for s, row in enumerate(self.rows):
            for t, p in row:
                yield s, t, p

    def prob(self, s, t):
        return dict(self.rows[s]).get(t, Fraction(0))

    def label_vector(self, prop):
        return np.array([prop in lab for lab in self.labels], dtype=bool)

    def states_with(self, prop):
        return [s for s, lab in enumerate(self.labels) if prop in lab]

    def __eq__(self, other):
        return (
            isinstance(other, Dtmc)
            and self.n_states == other.n_states
            and self.rows == other.rows
            and self.labels == other.labels
            and self.atomic_props == other.atomic_props
        )

    def __hash__(self):
        return hash((self.n_states, self.rows, self.labels))

    def __repr__(self):
        return f"Dtmc(n_states={self.n_states}, props={list(self.atomic_props)})"


def validate(m):
    """Return the list of violations of the DTMC definition; empty means ok."""
    problems = []
    declared = set(m.atomic_props)
    for s, row in enumerate(m.rows):
        for t, p in row:
            if not 0 < p <= 1:
                problems.append(f"state {s}: probability {format_rational(p)} to {t} not in (0, 1]")
        total = sum((p for _, p in row), Fraction(0))
        if total != 1:
            problems.append(f"state {s}: outgoing probabilities sum to {format_rational(total)}, not 1")
    for s, lab in enumerate(m.labels):
        for name in sorted(lab - declared):
            problems.append(f"state {s}: label {name!r} is not a declared proposition")
        for name in sorted(lab):
            if not PROP_RE.match(name):
                problems.append(f"state {s}: malformed proposition name {name!r}")
    if m.n_states < 1:
        problems.append("chain has no states")
    return problems


def parse_model(text, check=True):
    """Parse the model file format into a :class:`Dtmc`.

    With ``check`` (the default) any violation reported by :func:`validate`
    is raised as a :class:`ModelError`.
    """
    n_states = None
    section = None
    transitions = []
    seen = {}
    labels = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low.startswith("states:"):
            if n_states is not None:
                raise ModelError("repeated 'states:' line", lineno)
            value = line.split(":", 1)[1].strip()
            if not value.isdigit() or int(value) < 1:
                raise ModelError(f"expected a positive state count, got {value!r}", lineno)
            n_states = int(value)
            section = None
            continue
        if n_states is None:
            raise ModelError("'states: N' must come first", lineno)
        if low in ("transitions:", "labels:"):
            section = low[:-1]
            continue
        if section == "transitions":
            parts = line.split()
            if len(parts) != 3:
                raise ModelError(f"expected 'SRC DST PROB', got {line!r}", lineno)
            src, dst = _state_index(parts[0], n_states, lineno), _state_index(parts[1], n_states, lineno)
            try:
                p = parse_rational(parts[2])
            except ValueError as exc:
                raise ModelError(str(exc), lineno) from None
            if (src, dst) in seen:
                raise ModelError(
                    f"duplicate transition {src} -> {dst} (first on line {seen[src, dst]})", lineno
                )
            seen[src, dst] = lineno
            transitions.append((src, dst, p))
        elif section == "labels":
            head, sep, rest = line.partition(":")
            if not sep:
                raise ModelError(f"expected 'STATE: name ...', got {line!r}", lineno)
            s = _state_index(head.strip(), n_states, lineno)
            names = rest.split()
            for name in names:
                if not PROP_RE.match(name):
                    raise ModelError(f"malformed proposition name {name!r}", lineno)
            labels.setdefault(s, set()).update(names)
        else:
            raise ModelError(f"unexpected line outside a section: {line!r}", lineno)
    if n_states is None:
        raise ModelError("missing 'states: N' line")
    m = Dtmc(n_states, transitions, labels)
    problems = validate(m) if check else []
    if problems:
        raise ModelError("; ".join(problems))
    return m


def _state_index(token, n_states, lineno):
    if not token.isdigit():
        raise ModelError(f"expected a state index, got {token!r}", lineno)
    s = int(token)
    if s >= n_states:
        raise ModelError(f"unknown state {s} (chain has {n_states} states)", lineno)
    return s


def serialize_model(m):
    """Canonical model file text; ``parse_model(serialize_model(m)) == m``."""
    out = [f"states: {m.n_states}", "transitions:"]
    for s, t, p in m.transitions():
        out.append(f"{s} {t} {format_rational(p)}")
    out.append("labels:")
    for s, lab in enumerate(m.labels):
        if lab:
            out.append(f"{s}: " + " ".join(sorted(lab)))
    return "\n".join(out) + "\n"


def load_model(path, check=True):
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), check)


# -- self-composition -------------------------------------------------------


def encode_index(state_tuple, n_base):
    """Mixed-radix index of a state tuple; component 1 is most significant."""
    idx = 0
    for s in state_tuple:
        if not 0 <= s < n_base:
            raise ValueError(f"component {s} out of range 0..{n_base - 1}")
        idx = idx * n_base + s
    return idx


def decode_index(idx, n, n_base):
    if not 0 <= idx < n_base**n:
        raise ValueError(f"product index {idx} out of range for {n_base}^{n} states")
    out = []
    for _ in range(n):
        idx, r = divmod(idx, n_base)
        out.append(r)
    return tuple(reversed(out))


class ProductChain:
    """The n-fold self-composition of a DTMC, materialized in CSR form.

    Row ``s`` occupies ``indices[indptr[s]:indptr[s+1]]`` with the matching
    exact probabilities in ``probs`` (an object array of ``Fraction``).
    """

    def __init__(self, base, arity, indptr, indices, probs):
        self.base = base
        self.arity = arity
        self.n_states = base.n_states**arity
        self.indptr = indptr
        self.indices = indices
        self.probs = probs
        self._coords = None

    def row(self, s):
        lo, hi = self.indptr[s], self.indptr[s + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.probs[lo:hi]))

    def successors(self, s):
        return self.indices[self.indptr[s]:self.indptr[s + 1]]

    def row_ids(self):
        """Source state of every stored entry."""
        return np.repeat(np.arange(self.n_states), np.diff(self.indptr))

    def component(self, i):
        """Vector of the i-th (1-based) base-state component of every product state."""
        if self._coords is None:
            N = self.base.n_states
            ids = np.arange(self.n_states)
            self._coords = [
                (ids // N ** (self.arity - k)) % N for k in range(1, self.arity + 1)
            ]
        return self._coords[i - 1]

    def atom(self, prop, i):
        """Satisfaction vector of the indexed proposition ``prop_i``."""
        if not 1 <= i <= self.arity:
            raise ValueError(f"component index {i} outside 1..{self.arity}")
        return self.base.label_vector(prop)[self.component(i)]

    def labels_of(self, s):
        comps = decode_index(s, self.arity, self.base.n_states)
        return frozenset(
            f"{a}_{i}" for i, c in enumerate(comps, start=1) for a in self.base.labels[c]
        )

    def decode(self, s):
        return decode_index(s, self.arity, self.base.n_states)

    def encode(self, state_tuple):
        if len(state_tuple) != self.arity:
            raise ValueError(f"expected a {self.arity}-tuple")
        return encode_index(state_tuple, self.base.n_states)

    def __repr__(self):
        return f"ProductChain(base_states={self.base.n_states}, arity={self.arity})"


def self_compose(m, n, budget=DEFAULT_BUDGET):
    """Build M^n with P^n((s_1..s_n),(t_1..t_n)) = prod_i P(s_i, t_i)."""
    if n < 1:
        raise ValueError("arity must be at least 1")
    required = m.n_states**n
    if required > budget:
        raise BudgetExceeded(required, budget)
    base_rows = m.rows
    rows = base_rows
    N = m.n_states
    for _ in range(n - 1):
        rows = [
            [(t1 * N + t2, p1 * p2) for t1, p1 in r1 for t2, p2 in r2]
            for r1 in rows
            for r2 in base_rows
        ]
    indptr = np.zeros(required + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    indices = np.fromiter((t for r in rows for t, _ in r), dtype=np.int64, count=int(indptr[-1]))
    probs = np.empty(int(indptr[-1]), dtype=object)
    probs[:] = [p for r in rows for _, p in r]
    return ProductChain(m, n, indptr, indices, probs)


def product_to_dtmc(pc):
    """The product as a plain chain whose propositions are the indexed ``a_i``."""
    transitions = [
        (s, int(t), p)
        for s in range(pc.n_states)
        for t, p in pc.row(s)
    ]
    labels = {s: pc.labels_of(s) for s in range(pc.n_states)}
    props = {f"{a}_{i}" for a in pc.base.atomic_props for i in range(1, pc.arity + 1)}
    return Dtmc(pc.n_states, transitions, labels, props)
