"""Monte-Carlo estimates of path-formula probabilities on a product chain.

Paths are sampled with numpy's PCG64 generator.  Trials are processed in
fixed blocks of ``BLOCK`` paths; block ``k`` draws from
``PCG64(SeedSequence([seed, k]))``, so the estimate depends only on
(model, formula, start, trials, horizon, seed) and not on how many worker
threads share the blocks.

Successor selection is exact inverse-CDF sampling: a uniform 64-bit draw
``r`` selects entry ``k`` of a row iff ``r >= ceil(c_k * 2**64)`` for the
cumulative sums ``c_k`` before it, compared in integers.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .formula import BoundedUntil, Next, Until

BLOCK = 8192
_TWO64 = 1 << 64


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    trials: int = 10_000
    horizon: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise SimulationError("trials must be >= 1")
        if self.horizon < 1:
            raise SimulationError("horizon must be >= 1")


@dataclass(frozen=True)
class Estimate:
    estimate: float
    std_error: float
    trials: int
    horizon: int
    seed: int
    lower_bound: bool = False   # unbounded until cut off at the horizon

    def to_json(self):
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "trials": self.trials,
            "horizon": self.horizon,
            "seed": self.seed,
            "lower_bound": self.lower_bound,
        }


class _Sampler:
    """Padded successor and threshold tables for vectorized stepping."""

    def __init__(self, pc):
        degree = np.diff(pc.indptr)
        width = int(degree.max())
        n = pc.n_states
        self.targets = np.zeros((n, width), dtype=np.int64)
        self.cuts = np.zeros((n, max(width - 1, 1)), dtype=np.uint64)
        self.valid = np.zeros((n, max(width - 1, 1)), dtype=bool)
        for s in range(n):
            lo, hi = pc.indptr[s], pc.indptr[s + 1]
            self.targets[s, : hi - lo] = pc.indices[lo:hi]
            cum = 0
            for k in range(hi - lo - 1):
                cum += pc.probs[lo + k]
                cut = -((-cum.numerator * _TWO64) // cum.denominator)  # ceil
                if cut < _TWO64:
                    self.cuts[s, k] = cut
                    self.valid[s, k] = True

    def step(self, states, rng):
        r = rng.integers(0, np.iinfo(np.uint64).max, size=len(states), dtype=np.uint64, endpoint=True)
        k = ((r[:, None] >= self.cuts[states]) & self.valid[states]).sum(axis=1)
        return self.targets[states, k]


def _window(phi, horizon):
    match phi:
        case Next():
            return None
        case BoundedUntil(_, _, k1, k2):
            if horizon < k2:
                raise SimulationError(f"horizon {horizon} is shorter than the bound {k2}")
            return k1, k2, False
        case Until():
            return 0, horizon, True
    raise SimulationError(f"cannot simulate path formula {phi!r}")


def _run_block(sampler, start, size, seed, block, phi, sat_body, sat1, sat2, window):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))
    states = np.full(size, start, dtype=np.int64)
    if window is None:
        return int(sat_body[sampler.step(states, rng)].sum())
    k1, k2, _ = window
    alive = np.ones(size, dtype=bool)
    hits = 0
    for j in range(k2 + 1):
        if j >= k1:
            won = alive & sat2[states]
            hits += int(won.sum())
            alive &= ~won
        alive &= sat1[states]
        if j == k2 or not alive.any():
            break
        idx = np.flatnonzero(alive)
        states[idx] = sampler.step(states[idx], rng)
    return hits


def estimate(pc, phi, start, cfg, sat, workers=1):
    """Estimate P(phi) from product state ``start``.

    ``phi`` is a renamed core path formula and ``sat`` maps each of its
    state operands to a boolean vector over ``pc`` (a LabelTable's ``sat``
    works).  Unbounded until is truncated at ``cfg.horizon`` and flagged as
    a lower bound.
    """
    window = _window(phi, cfg.horizon)
    sat_body = sat1 = sat2 = None
    if isinstance(phi, Next):
        sat_body = np.asarray(sat[phi.body], dtype=bool)
    else:
        sat1 = np.asarray(sat[phi.left], dtype=bool)
        sat2 = np.asarray(sat[phi.right], dtype=bool)
    sampler = _Sampler(pc)
    sizes = [min(BLOCK, cfg.trials - b * BLOCK) for b in range(math.ceil(cfg.trials / BLOCK))]
    jobs = [
        (sampler, start, size, cfg.seed, b, phi, sat_body, sat1, sat2, window)
        for b, size in enumerate(sizes)
    ]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            hits = sum(pool.map(lambda a: _run_block(*a), jobs))
    else:
        hits = sum(_run_block(*a) for a in jobs)
    p = hits / cfg.trials
    se = math.sqrt(p * (1 - p) / cfg.trials)
    return Estimate(p, se, cfg.trials, cfg.horizon, cfg.seed, window is not None and window[2])
