"""
Closed-form bounds on worst-case discrimination times.

All functions return times in units where ``T_min = 1 / Delta``; an infinite
value means discrimination at distance ``rho`` is impossible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .codes import Code, _check_grid_spec

# floor/ceil snap: products such as 3 * 100 * 0.1 / 2 land a few ulps off integers
_SNAP = 1e-9


def _floor(x: float) -> int:
    return math.floor(x + _SNAP * max(1.0, abs(x)))


def _ceil(x: float) -> int:
    return math.ceil(x - _SNAP * max(1.0, abs(x)))


def _inv(k: float) -> float:
    return math.inf if k <= 0 else 1.0 / k


def _check_rho(rho: float) -> None:
    if not 0 <= rho <= 0.5:
        raise ValueError(f"rho must lie in [0, 1/2], got {rho}")


@dataclass(frozen=True)
class GridSpec:
    """Module sizes and scales ``((n_1, lambda_1), ..., (n_m, lambda_m))``."""

    pairs: tuple[tuple[int, float], ...]

    def __post_init__(self):
        pairs = tuple((int(n_i), float(lam)) for n_i, lam in self.pairs)
        _check_grid_spec(pairs)
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def from_code(cls, code: Code) -> "GridSpec":
        return cls(tuple(zip(code.module_sizes, code.module_scales)))

    @classmethod
    def balanced(cls, n: int, m: int) -> "GridSpec":
        from .codes import balanced_spec
        return cls(tuple(balanced_spec(n, m)))

    @property
    def sizes(self) -> list[int]:
        return [p[0] for p in self.pairs]

    @property
    def scales(self) -> list[float]:
        return [p[1] for p in self.pairs]

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def n(self) -> int:
        return sum(self.sizes)


def _as_spec(spec) -> GridSpec:
    return spec if isinstance(spec, GridSpec) else GridSpec(tuple(spec))


# --------------------------------------------------------------------------
# place cells


def place_lower_bound(n: int, rho: float) -> float:
    """Minimax lower bound over place cell codes, ``1 / floor(n / floor(1/(2 rho)))``.

    Examples
    --------
    >>> place_lower_bound(100, 0.1)
    0.05
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_rho(rho)
    if rho == 0:
        return math.inf
    return _inv(n // _floor(1 / (2 * rho)))


def place_minimax_sandwich(n: int, rho: float) -> tuple[float, float]:
    """``(1/floor(4 n rho), 1/floor(3 n rho / 2))`` for ``1/n < rho <= 1/2``."""
    if not 1 / n < rho <= 0.5:
        raise ValueError(f"rho must lie in (1/n, 1/2], got {rho}")
    return _inv(_floor(4 * n * rho)), _inv(_floor(3 * n * rho / 2))


def place_minimax_upper(n: int, rho: float) -> float:
    """Valid upper end ``1/floor(2 n rho / 3)`` of the uniform-code chain.

    ``d = ceil(1/rho) < 3/(2 rho)`` for ``rho <= 1/2``, hence
    ``floor(n/d) >= floor(2 n rho / 3)``.  The constant ``3/2`` returned by
    :func:`place_minimax_sandwich` is not an upper bound in general
    (``n=100, rho=0.1``: ``1/floor(n/d) = 1/10 > 1/15``).
    """
    if not 1 / n < rho <= 0.5:
        raise ValueError(f"rho must lie in (1/n, 1/2], got {rho}")
    return _inv(_floor(2 * n * rho / 3))


def uniform_place_time(n: int, rho: float) -> float:
    """Time ``1/floor(n/d)`` reached by the d-uniform code with ``d = ceil(1/rho)``."""
    if not 1 / n < rho <= 0.5:
        raise ValueError(f"rho must lie in (1/n, 1/2], got {rho}")
    return _inv(n // _ceil(1 / rho))


def adaptive_place_sandwich(n: int, rho: float) -> tuple[float, float]:
    """``(1/floor(2 n rho), 2/floor(2 n rho))`` for the adaptive place code."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_rho(rho)
    k = _floor(2 * n * rho)
    if k == 0:
        return math.inf, math.inf
    return 1 / k, 2 / k


def random_place_target(n: int, rho: float, delta: float = 0.1) -> float:
    """Rate ``1/ceil(delta n rho)`` that random place codes reach with high probability."""
    _check_rho(rho)
    return _inv(_ceil(delta * n * rho))


# --------------------------------------------------------------------------
# grid cells


def j_rho(spec, rho: float) -> int:
    """Largest module index (1-based) whose scale is still ``>= rho``."""
    spec = _as_spec(spec)
    if rho > 1:
        raise ValueError(f"rho must be <= 1, got {rho}")
    return max(k + 1 for k, lam in enumerate(spec.scales) if lam >= rho)


def _grid_terms(spec: GridSpec, rho: float, floor_each: bool) -> list[float]:
    """``sum_{i<=k} (n_i/lam_i) max(rho, lam_{k+1})`` for every k (``lam_{m+1} = 0``)."""
    sizes, scales = spec.sizes, spec.scales + [0.0]
    out = []
    for k in range(spec.m):
        cut = max(rho, scales[k + 1])
        parts = [sizes[i] / scales[i] * cut for i in range(k + 1)]
        out.append(sum(_floor(p) for p in parts) if floor_each else sum(parts))
    return out


def grid_hypothesis_holds(spec, rho: float) -> bool:
    spec = _as_spec(spec)
    if not 0 <= rho <= 0.5:
        return False
    if spec.m == 1:
        return True
    ratio = round(spec.scales[0] / spec.scales[1])
    return ratio % 2 == 0 or rho <= 0.5 - spec.scales[1] / 2 + 1e-12


def grid_lower_bound(spec, rho: float) -> float:
    """Minimax lower bound over grid codes with the given module structure.

    ``1 / floor(6 min_k sum_{i<=k} (n_i/lam_i) max(rho, lam_{k+1}))``.

    Raises
    ------
    ValueError
        "theorem hypothesis unmet" when the scale ratio ``lam_1/lam_2`` is
        odd and ``rho > 1/2 - lam_2/2``, or ``rho`` is outside ``[0, 1/2]``.
    """
    spec = _as_spec(spec)
    if not grid_hypothesis_holds(spec, rho):
        raise ValueError(f"theorem hypothesis unmet for rho={rho}")
    return _inv(_floor(6 * min(_grid_terms(spec, rho, floor_each=False))))


def grid_degeneracy(spec, rho: float) -> tuple[bool, bool]:
    """The two sufficient conditions for an infinite minimax time.

    First: some ``2 <= k <= j_rho`` has ``(k-1) lam_k < min_{i<k} lam_i/(6 n_i)``.
    Second: ``j_rho * rho < min_{i<=j_rho} lam_i/(6 n_i)``.
    """
    spec = _as_spec(spec)
    j = j_rho(spec, rho)
    ratios = [lam / (6 * n_i) for n_i, lam in spec.pairs]
    lam = spec.scales
    first = any((k - 1) * lam[k - 1] < min(ratios[:k - 1]) for k in range(2, j + 1))
    second = j * rho < min(ratios[:j])
    return first, second


def grid_adaptive_upper_bound(spec, rho: float) -> float:
    """Upper bound on ``T(g, rho)`` for the adaptive grid code on ``spec``.

    ``4 / min_k sum_{j<=k} floor((n_j/lam_j) max(lam_{k+1}, rho))``.
    """
    spec = _as_spec(spec)
    _check_rho(rho)
    denom = min(_grid_terms(spec, rho, floor_each=True))
    return math.inf if denom == 0 else 4 / denom


def grid_log_sandwich_applies(spec, rho: float) -> bool:
    """Range of ``rho`` where the adaptive grid code is optimal up to ``log2(1/rho)``."""
    spec = _as_spec(spec)
    j = j_rho(spec, rho)
    lam, sizes = spec.scales, spec.sizes
    cover = all(any(lam[k] >= lam[i] / sizes[i] for i in range(k)) for k in range(1, j))
    fine = any(rho >= lam[i] / sizes[i] for i in range(j))
    return cover and fine


def grid_log_sandwich(spec, rho: float) -> tuple[float, float]:
    """``(1/(6 S), 16 log2(1/rho) / S)`` with ``S`` the unfloored min over k."""
    spec = _as_spec(spec)
    _check_rho(rho)
    if rho == 0:
        return math.inf, math.inf
    s = min(_grid_terms(spec, rho, floor_each=False))
    if s == 0:
        return math.inf, math.inf
    return 1 / (6 * s), 16 * math.log2(1 / rho) / s


def balanced_sandwich(n: int, m: int) -> tuple[float, float]:
    """``(1/(3 floor(n/m)), 16/floor(n/m))``, valid for ``2^-m <= rho <= 1/2``, ``n >= 2m``."""
    if not (m >= 1 and n >= 2 * m):
        raise ValueError(f"need n >= 2m, got n={n}, m={m}")
    k = n // m
    return 1 / (3 * k), 16 / k


def balanced_rate(n: int, rho: float) -> tuple[float, float]:
    """Sandwich for the balanced adaptive grid code tuned to ``rho``.

    Uses ``m = floor(log2(1/rho))`` modules.

    Examples
    --------
    >>> balanced_rate(100, 2**-20)
    (0.06666666666666667, 3.2)
    """
    if not 2 ** (-n / 2) <= rho <= 0.5:
        raise ValueError(f"rho must lie in [2^(-n/2), 1/2], got {rho}")
    m = balanced_modules(rho)
    return balanced_sandwich(n, m)


def balanced_modules(rho: float) -> int:
    """Number of modules ``floor(log2(1/rho))``."""
    if not 0 < rho <= 0.5:
        raise ValueError(f"rho must lie in (0, 1/2], got {rho}")
    return _floor(-math.log2(rho))


def balanced_spec_for(n: int, rho: float) -> Sequence[tuple[int, float]]:
    from .codes import balanced_spec
    return balanced_spec(n, balanced_modules(rho))
