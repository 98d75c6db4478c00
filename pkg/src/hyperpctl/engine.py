"""Exact probabilities of path formulas over a product chain.

Satisfaction vectors are numpy boolean arrays over product states;
probability vectors are numpy object arrays of ``Fraction``.
"""

from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

ZERO = Fraction(0)
ONE = Fraction(1)


class SingularSystemError(ArithmeticError):
    pass


def constant_vector(n, value):
    v = np.empty(n, dtype=object)
    v[:] = [Fraction(value)] * n
    return v


def indicator(mask):
    v = np.empty(len(mask), dtype=object)
    v[:] = [ONE if b else ZERO for b in mask]
    return v


def mat_vec(pc, v):
    """P^n . v with exact arithmetic."""
    if len(pc.probs) == 0:
        return constant_vector(pc.n_states, 0)
    prod = pc.probs * v[pc.indices]
    return np.add.reduceat(prod, pc.indptr[:-1])


def prob_next(pc, target):
    """Probability of X target from every product state."""
    target = np.asarray(target, dtype=bool)
    vals = np.where(target[pc.indices], pc.probs, ZERO)
    out = np.add.reduceat(vals, pc.indptr[:-1])
    # reduceat keeps int 0 when every summand is the int sentinel
    return np.array([Fraction(x) for x in out], dtype=object)


def backward_reach(pc, targets, through):
    """States from which some path reaches ``targets`` moving only through ``through``."""
    targets = np.asarray(targets, dtype=bool)
    through = np.asarray(through, dtype=bool)
    n = pc.n_states
    if not targets.any():
        return targets.copy()
    src = pc.row_ids()
    dst = pc.indices
    keep = through[src] & ~targets[src]
    # reversed edges dst -> src, plus a virtual root n pointing at every target
    roots = np.flatnonzero(targets)
    rows = np.concatenate([dst[keep], np.full(len(roots), n)])
    cols = np.concatenate([src[keep], roots])
    g = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n + 1, n + 1))
    order = breadth_first_order(g, n, directed=True, return_predecessors=False)
    reached = np.zeros(n + 1, dtype=bool)
    reached[order] = True
    return reached[:n]


def prob0(pc, sat1, sat2):
    """States where P(sat1 U sat2) is exactly 0."""
    return ~backward_reach(pc, sat2, sat1)


def prob1(pc, sat1, sat2, no=None):
    """States where P(sat1 U sat2) is exactly 1."""
    sat1 = np.asarray(sat1, dtype=bool)
    sat2 = np.asarray(sat2, dtype=bool)
    if no is None:
        no = prob0(pc, sat1, sat2)
    return ~backward_reach(pc, no, sat1 & ~sat2)


def prob_until_unbounded(pc, sat1, sat2):
    sat1 = np.asarray(sat1, dtype=bool)
    sat2 = np.asarray(sat2, dtype=bool)
    no = prob0(pc, sat1, sat2)
    yes = prob1(pc, sat1, sat2, no)
    result = indicator(yes)
    maybe = np.flatnonzero(~(no | yes))
    if len(maybe) == 0:
        return result
    pos = {int(s): k for k, s in enumerate(maybe)}
    A = []
    b = []
    for s in maybe:
        row = {}
        rhs = ZERO
        for t, p in pc.row(int(s)):
            if yes[t]:
                rhs += p
            elif t in pos:
                row[pos[t]] = p
        A.append(row)
        b.append(rhs)
    x = solve_linear_exact(A, b)
    for k, s in enumerate(maybe):
        result[s] = x[k]
    return result


def prob_until_bounded(pc, sat1, sat2, k1, k2):
    """P(sat1 U[k1,k2] sat2): the window part first, then k1 guarded steps."""
    if not 0 <= k1 <= k2:
        raise ValueError(f"need 0 <= k1 <= k2, got [{k1},{k2}]")
    sat1 = np.asarray(sat1, dtype=bool)
    sat2 = np.asarray(sat2, dtype=bool)
    zero = constant_vector(pc.n_states, 0)
    one = constant_vector(pc.n_states, 1)
    x = indicator(sat2)
    for _ in range(k2 - k1):
        x = np.where(sat2, one, np.where(sat1, mat_vec(pc, x), zero))
    for _ in range(k1):
        x = np.where(sat1, mat_vec(pc, x), zero)
    return x


# -- exact linear solving ------------------------------------------------------


def solve_linear_exact(A, b):
    """Solve x = A x + b exactly.

    ``A`` is a list of sparse rows (``{column: Fraction}``), ``b`` a list.
    The system is split into strongly connected blocks which are solved
    bottom-up by sparse rational Gaussian elimination.
    """
    n = len(b)
    A = [{j: Fraction(v) for j, v in row.items() if v != 0} for row in A]
    x = [None] * n
    for block in _sccs(A):
        members = set(block)
        rows = {}
        rhs = {}
        for i in block:
            row = {}
            r = Fraction(b[i])
            for j, v in A[i].items():
                if j in members:
                    row[j] = row.get(j, ZERO) - v
                else:
                    r += v * x[j]
            row[i] = row.get(i, ZERO) + ONE
            rows[i] = {j: v for j, v in row.items() if v != 0}
            rhs[i] = r
        for i, v in _eliminate(rows, rhs, sorted(block)).items():
            x[i] = v
    return x


def _size(q):
    return q.numerator.bit_length() + q.denominator.bit_length()


def _eliminate(rows, rhs, columns):
    col_rows = {}
    for r, row in rows.items():
        for c in row:
            col_rows.setdefault(c, set()).add(r)
    pivots = []
    done = set()
    for col in columns:
        cands = [r for r in col_rows.get(col, ()) if r not in done]
        if not cands:
            raise SingularSystemError(f"no pivot for column {col}")
        p = min(cands, key=lambda r: (_size(rows[r][col]), len(rows[r]), r))
        done.add(p)
        pivots.append((col, p))
        prow = rows[p]
        piv = prow[col]
        for r in cands:
            if r == p:
                continue
            row = rows[r]
            f = row[col] / piv
            for c, v in prow.items():
                nv = row.get(c, ZERO) - f * v
                if nv == 0:
                    if c in row:
                        del row[c]
                        col_rows[c].discard(r)
                else:
                    if c not in row:
                        col_rows.setdefault(c, set()).add(r)
                    row[c] = nv
            rhs[r] -= f * rhs[p]
    x = {}
    for col, p in reversed(pivots):
        row = rows[p]
        acc = rhs[p]
        for c, v in row.items():
            if c != col:
                acc -= v * x[c]
        x[col] = acc / row[col]
    return x


def _sccs(A):
    """Tarjan's algorithm, iterative; blocks come out successors-first."""
    n = len(A)
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    out = []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, iter(A[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] is None:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(A[w])))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                block = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    block.append(w)
                    if w == v:
                        break
                out.append(block)
    return out
