"""
Poisson spike simulation, the optimal count test, and empirical error rates.

Random streams are derived from ``SeedSequence(master_seed, spawn_key=...)``
with one key per (task, hypothesis, block of trials), and each stream feeds a
counter-based ``Philox`` generator.  Blocks are fixed in size, so results do
not depend on how blocks are scheduled across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codes import Code, _on_unit_circle

BLOCK_TRIALS = 4096
CSV_HEADER = "code_id,theta1,theta2,T,trials,err12,err21,seed"


def _fmt(x: float) -> str:
    return "%.17g" % x


@dataclass(frozen=True)
class TrialBatch:
    """Error counts of the optimal test under both hypotheses."""

    code_id: str
    theta1: float
    theta2: float
    T: float
    trials: int
    err12: int  # decided s2 while s1 was true
    err21: int
    seed: int

    @property
    def p_hat(self) -> float:
        return max(self.err12, self.err21) / self.trials

    @property
    def sigma(self) -> float:
        """Binomial standard error of ``p_hat``."""
        p = self.p_hat
        return math.sqrt(p * (1 - p) / self.trials)

    def to_csv_row(self) -> str:
        return ",".join([self.code_id, _fmt(self.theta1), _fmt(self.theta2), _fmt(self.T),
                         str(self.trials), str(self.err12), str(self.err21), str(self.seed)])

    @classmethod
    def from_csv_row(cls, row: str) -> "TrialBatch":
        cid, t1, t2, T, trials, e12, e21, seed = row.strip().split(",")
        return cls(cid, float(t1), float(t2), float(T), int(trials), int(e12), int(e21), int(seed))


def make_rng(master_seed: int, key: Sequence[int] = ()) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _check_T(T: float) -> None:
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T}")


def simulate_counts(code: Code, s, T: float, rng: np.random.Generator, size: int | None = None):
    """Spike counts on ``[0, T]``: Poisson(T mu) for active neurons, Poisson(T) otherwise.

    With ``size`` the result has shape ``(size, n)``.
    """
    _check_T(T)
    lam = T * code.rates(s)
    return rng.poisson(lam, size=None if size is None else (size, code.n))


def simulate_spike_times(code: Code, s, T: float, rng: np.random.Generator) -> list[np.ndarray]:
    """Sorted spike times of each neuron, homogeneous Poisson on ``[0, T]``."""
    counts = simulate_counts(code, s, T, rng)
    return [np.sort(rng.uniform(0.0, T, size=c)) for c in counts]


@dataclass(frozen=True)
class _Oriented:
    first: int  # 0 if s1 plays the role of the hypothesis with more exclusive neurons
    mask: np.ndarray  # neurons active under `first` only
    delta: int


def _orient(code: Code, s1, s2) -> _Oriented:
    m1, m2 = code.active_mask([_on_unit_circle(s1), _on_unit_circle(s2)])
    only1, only2 = m1 & ~m2, m2 & ~m1
    c1, c2 = int(only1.sum()), int(only2.sum())
    if max(c1, c2) == 0:
        raise ValueError("indistinguishable pair: identical active sets")
    return _Oriented(0, only1, c1) if c1 >= c2 else _Oriented(1, only2, c2)


def _threshold(delta: int, T: float, mu: float) -> float:
    return delta * T * (mu + 1) / 2


def optimal_test(code: Code, s1, s2, counts, T: float):
    """Decide between ``s1`` and ``s2`` from spike counts.

    The pair is oriented so that the first stimulus has the larger exclusive
    active set ``D``; it is chosen iff ``sum_{i in D} N_i > |D| T (mu+1)/2``.
    Ties go to the other stimulus.  Returns ``s1`` or ``s2`` as given; for a
    batch of count vectors, an array of 0 (``s1``) / 1 (``s2``).
    """
    _check_T(T)
    o = _orient(code, s1, s2)
    z = np.asarray(counts)[..., o.mask].sum(axis=-1)
    pick = np.where(z > _threshold(o.delta, T, code.mu), o.first, 1 - o.first)
    if np.ndim(pick) == 0:
        return (s1, s2)[int(pick)]
    return pick


def _block_errors(code: Code, o: _Oriented, T: float, hyp: int, n_trials: int,
                  rng: np.random.Generator, full: bool, points) -> int:
    thr = _threshold(o.delta, T, code.mu)
    under_first = hyp == o.first
    if full:
        counts = simulate_counts(code, points[hyp], T, rng, size=n_trials)
        z = counts[:, o.mask].sum(axis=1)
    else:
        # sufficiency: only the total count over the exclusive set matters
        rate = code.mu if under_first else 1.0
        z = rng.poisson(T * rate * o.delta, size=n_trials)
    wrong = (z <= thr) if under_first else (z > thr)
    return int(wrong.sum())


def estimate_error(code: Code, s1, s2, T: float, trials: int, master_seed: int,
                   stream: Sequence[int] = (), workers: int = 1, full: bool = False) -> TrialBatch:
    """Run the optimal test ``trials`` times under each hypothesis.

    ``stream`` distinguishes independent tasks sharing one ``master_seed``.
    ``full=True`` simulates every neuron instead of the sufficient statistic.
    """
    _check_T(T)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    o = _orient(code, s1, s2)
    points = (_on_unit_circle(s1), _on_unit_circle(s2))
    n_blocks = -(-trials // BLOCK_TRIALS)
    jobs = [(hyp, b, min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS))
            for hyp in (0, 1) for b in range(n_blocks)]

    def run(job):
        hyp, b, size = job
        rng = make_rng(master_seed, (*stream, hyp, b))
        return hyp, _block_errors(code, o, T, hyp, size, rng, full, points)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    errs = [0, 0]
    for hyp, e in results:
        errs[hyp] += e
    return TrialBatch(code.code_id, points[0], points[1], float(T), int(trials),
                      errs[0], errs[1], int(master_seed))


def empirical_tmin(code: Code, s1, s2, alpha: float, t_grid, trials: int, master_seed: int,
                   stream: Sequence[int] = (), workers: int = 1) -> float | None:
    """Smallest ``T`` in ``t_grid`` whose empirical error is ``<= alpha``.

    Returns None when no grid time qualifies, including pairs that share
    their active set.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    try:
        _orient(code, s1, s2)
    except ValueError:
        return None
    for k, T in enumerate(t_grid):
        batch = estimate_error(code, s1, s2, float(T), trials, master_seed, (*stream, k), workers)
        if batch.p_hat <= alpha:
            return float(T)
    return None
