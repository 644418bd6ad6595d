"""
Discrimination quantities: KL divergence, error bounds for the optimal
Poisson test, Poisson tail bounds and discrimination times.

The exact worst-case time ``T(f, rho)`` is computed from the breakpoint cell
partition of a code.  For two cells ``[a, a+L1)`` and ``[b, b+L2)`` the
differences ``theta2 - theta1`` fill the open interval
``(b - a - L1, b - a + L2)``, so a cell pair can realize a distance
``>= rho`` iff that interval reaches past ``rho`` (or contains a point at
distance exactly 1/2).  Reducing over all cell pairs once gives a *reach
profile*: for every value of Delta, the largest distance it is realized at.
Every ``rho`` is then answered from the profile.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .codes import CellBudgetError, Code, DEFAULT_BREAKPOINT_CAP, cell_partition, delta
from .geometry import EPS, CirclePoint

DEFAULT_CELL_BUDGET = 2**12
# reach value used when distance 1/2 itself is attained
_ATTAINS_HALF = 1.0


def c_mu(mu: float) -> float:
    """Error-exponent constant of the upper bound."""
    _check_mu(mu)
    return (mu - 1) ** 2 / 4 * min(1 / (2 * mu), 3 / (5 + mu))


def c_tilde_mu(mu: float) -> float:
    """Error-exponent constant of the lower bound, ``(mu - 1) log mu``."""
    _check_mu(mu)
    return (mu - 1) * math.log(mu)


def _check_mu(mu: float) -> None:
    if not mu > 1:
        raise ValueError(f"mu must be > 1, got {mu}")


def _check_T(T: float) -> None:
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T}")


@dataclass(frozen=True)
class ErrorBounds:
    kl: float
    pe_lower: float
    pe_upper: float
    c_mu: float
    c_tilde_mu: float


def kl_divergence(code: Code, s1, s2, T: float, mu: float | None = None) -> float:
    """KL divergence (nats) between the count laws under ``s1`` and ``s2``."""
    mu = code.mu if mu is None else mu
    _check_T(T)
    _check_mu(mu)
    rep = delta(code, s1, s2)
    return (T * (mu - 1 - math.log(mu)) * rep.only_in_2
            + T * (mu * math.log(mu) - mu + 1) * rep.only_in_1)


def pe_bounds(code: Code, s1, s2, T: float, mu: float | None = None) -> ErrorBounds:
    """Sandwich on the minimal error of any test between ``s1`` and ``s2``.

    Examples
    --------
    >>> from placegrid.codes import make_uniform_place
    >>> b = pe_bounds(make_uniform_place(4, 4), 0.1, 0.1, T=1.0)
    >>> (b.pe_lower, b.pe_upper)
    (0.5, 1.0)
    """
    mu = code.mu if mu is None else mu
    kl = kl_divergence(code, s1, s2, T, mu)
    d = delta(code, s1, s2).delta
    ct, c = c_tilde_mu(mu), c_mu(mu)
    x = T * ct * d
    lower = max(math.exp(-x) / 4, (1 - math.sqrt(x / 2)) / 2)
    upper = math.exp(-T * c * d)
    return ErrorBounds(kl, lower, upper, c, ct)


def poisson_tail_upper(theta: float, x: float) -> float:
    """Bound on ``P(X >= theta (1 + x))`` for ``X ~ Poisson(theta)``."""
    if not theta > 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    if not x >= 0:
        raise ValueError(f"x must be >= 0, got {x}")
    return math.exp(-theta * x * x / (2 * (1 + x / 3)))


def poisson_tail_lower(theta: float, x: float) -> float:
    """Bound on ``P(X <= theta - x)`` for ``X ~ Poisson(theta)``, ``0 <= x <= theta``."""
    if not theta > 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    if not 0 <= x <= theta:
        raise ValueError(f"x must lie in [0, theta], got {x}")
    return math.exp(-x * x / (2 * theta))


def pair_in_random_arc_probability(t: float) -> float:
    """``P(s1, s2 in [A, B))`` for ``A, B`` uniform and ``d(s1, s2) = t``."""
    if not 0 <= t <= 0.5:
        raise ValueError(f"t must lie in [0, 1/2], got {t}")
    return 0.5 - t * (1 - t)


def t_min(code: Code, s1, s2) -> float:
    """Minimal discrimination time ``1 / Delta``; infinite when ``Delta == 0``."""
    d = delta(code, s1, s2).delta
    return math.inf if d == 0 else 1.0 / d


# --------------------------------------------------------------------------
# exact T(f, rho)


def _block_reach(starts: np.ndarray, lengths: np.ndarray, rows: slice, cols: slice) -> np.ndarray:
    """Largest distance realized by every cell pair in ``rows x cols``.

    Returns ``_ATTAINS_HALF`` where distance 1/2 itself is attained.
    """
    lo = starts[None, cols] - (starts[rows] + lengths[rows])[:, None]
    lo -= np.floor(lo)
    hi = lo + lengths[rows][:, None] + lengths[None, cols]
    frac_hi = hi - np.floor(hi)
    reach = np.maximum(np.minimum(lo, 1.0 - lo), np.minimum(frac_hi, 1.0 - frac_hi))
    # lo lies in [0, 1) and hi - lo in (0, 2]: only 1/2 and 3/2 can be enclosed
    half = ((lo < 0.5 - EPS) & (hi > 0.5 + EPS)) | (hi > 1.5 + EPS)
    reach[half] = _ATTAINS_HALF
    return reach


def reach_profile(code: Code, cell_budget: int = DEFAULT_CELL_BUDGET,
                  block: int = 256) -> np.ndarray:
    """``R[k]``: sup of ``d(s1, s2)`` over pairs with ``Delta == k`` (-1 if none).

    The entry 1.0 means that distance 1/2 is attained.
    """
    return _reach_profile_cached(code, int(cell_budget), int(block)).copy()


@lru_cache(maxsize=64)
def _reach_profile_cached(code: Code, cell_budget: int, block: int) -> np.ndarray:
    hint = "raise the budget or use t_of_rho_sampled (CLI: --sampled)"
    try:
        cells = cell_partition(code, cap=max(DEFAULT_BREAKPOINT_CAP, 4 * cell_budget))
    except CellBudgetError as exc:
        raise CellBudgetError(f"{exc}; {hint}") from None
    M = cells.size
    if M > cell_budget:
        raise CellBudgetError(f"cell budget exceeded: {M} cells > budget {cell_budget}; {hint}")
    bits = cells.bits
    prof = np.full(code.n + 1, -1.0)
    for i0 in range(0, M, block):
        rows, cols = slice(i0, min(M, i0 + block)), slice(i0, M)
        # the pair (j, i) mirrors (i, j), so columns start at the block;
        # mirrored duplicates inside the diagonal block are harmless
        bi = bits[rows][:, None, :]
        bj = bits[cols][None, :, :]
        d12 = np.bitwise_count(bi & ~bj).sum(axis=-1, dtype=np.int64)
        d21 = np.bitwise_count(bj & ~bi).sum(axis=-1, dtype=np.int64)
        reach = _block_reach(cells.starts, cells.lengths, rows, cols)
        np.maximum.at(prof, np.maximum(d12, d21).ravel(), reach.ravel())
    return prof


def t_of_rho_from_profile(profile: np.ndarray, rho: float) -> float:
    _check_rho(rho)
    ok = np.flatnonzero(profile > rho + EPS)
    if len(ok) == 0:
        return math.inf
    k = int(ok[0])
    return math.inf if k == 0 else 1.0 / k


def _check_rho(rho: float) -> None:
    if not 0 <= rho <= 0.5:
        raise ValueError(f"rho must lie in [0, 1/2], got {rho}")


def t_of_rho_exact(code: Code, rho: float, cell_budget: int = DEFAULT_CELL_BUDGET) -> float:
    """Worst-case discrimination time over all pairs at distance ``>= rho``.

    Exact for any code whose breakpoint partition has at most
    ``cell_budget`` cells; the cost is quadratic in the number of cells.

    Raises
    ------
    CellBudgetError
        When the partition is larger than ``cell_budget``.
    """
    _check_rho(rho)
    return t_of_rho_from_profile(_reach_profile_cached(code, int(cell_budget), 256), rho)


def default_rho_grid() -> np.ndarray:
    """Geometric grid ``2^-21 ... 2^-1`` with ratio ``sqrt(2)`` (41 points)."""
    return 2.0 ** (-np.arange(42, 1, -1) / 2.0)


def sampled_tmin_curve(code: Code, grid, anchor: float = 1 / 3) -> np.ndarray:
    """``T_min(s, s + rho')`` for every ``rho'`` in ``grid``."""
    grid = np.asarray(grid, dtype=float)
    masks = code.active_mask(np.concatenate([[anchor], anchor + grid]))
    base, rest = masks[0], masks[1:]
    d = np.maximum((base & ~rest).sum(axis=1), (rest & ~base).sum(axis=1))
    with np.errstate(divide="ignore"):
        return np.where(d > 0, 1.0 / np.maximum(d, 1), np.inf)


def t_of_rho_sampled(code: Code, rho: float, grid=None, anchor: float = 1 / 3) -> float:
    """Proxy ``max_{rho' >= rho} T_min(s, s + rho')`` over a finite grid.

    ``grid`` is either an array of distances or a step size, in which case
    the distances ``rho, rho + step, ...`` up to 1/2 are used.  Never exceeds
    the exact value since it is a max over a subset of pairs.
    """
    _check_rho(rho)
    if grid is None:
        grid = default_rho_grid()
    elif np.ndim(grid) == 0:
        step = float(grid)
        if not step > 0:
            raise ValueError("grid resolution must be > 0")
        grid = np.arange(rho, 0.5 + EPS, step)
    grid = np.asarray(grid, dtype=float)
    grid = grid[grid >= rho - EPS]
    if len(grid) == 0:
        raise ValueError(f"no grid distance >= rho={rho}")
    return float(sampled_tmin_curve(code, grid, anchor).max())
