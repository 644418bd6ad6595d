"""
Arithmetic on circles of arbitrary radius.

A point of the circle S^u is stored through its argument theta in [0, u).
Arcs are half-open, ``[a, b)`` in the counter-clockwise direction, with the
convention that ``[a, a)`` is empty and that the complement of ``[a, b)`` is
``[b, a)``.

All comparisons that may hit an arc endpoint go through the tolerance
``EPS``.  Dyadic rationals are exact in binary floating point, so for the
grid and dyadic codes the tolerance never changes a decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS = 1e-12


def _wrap(theta: float, radius: float) -> float:
    t = theta % radius
    # Python's % can return `radius` itself for tiny negative inputs.
    if t >= radius or radius - t < EPS * radius:
        t = 0.0
    return t


@dataclass(frozen=True)
class CirclePoint:
    """A point on the circle of radius ``radius``, normalized on construction."""

    theta: float
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if not math.isfinite(self.theta):
            raise ValueError(f"theta must be finite, got {self.theta}")
        object.__setattr__(self, "theta", _wrap(float(self.theta), float(self.radius)))
        object.__setattr__(self, "radius", float(self.radius))

    def shift(self, delta: float) -> "CirclePoint":
        return CirclePoint(self.theta + delta, self.radius)


@dataclass(frozen=True)
class Arc:
    """Half-open arc ``[start, end)`` on a circle."""

    start: CirclePoint
    end: CirclePoint

    def __post_init__(self):
        if self.start.radius != self.end.radius:
            raise ValueError("scale mismatch: arc endpoints live on different circles")

    @classmethod
    def from_thetas(cls, a: float, b: float, radius: float = 1.0) -> "Arc":
        return cls(CirclePoint(a, radius), CirclePoint(b, radius))

    @property
    def radius(self) -> float:
        return self.start.radius

    @property
    def is_empty(self) -> bool:
        return self.start.theta == self.end.theta

    @property
    def length(self) -> float:
        return (self.end.theta - self.start.theta) % self.radius

    def complement(self) -> "Arc":
        return Arc(self.end, self.start)


def _check_same(u: float, v: float) -> None:
    if u != v:
        raise ValueError(f"scale mismatch: radius {u} vs {v}")


def distance(a: CirclePoint, b: CirclePoint) -> float:
    """Geodesic distance divided by 2*pi: ``min(|ta - tb|, u - |ta - tb|)``."""
    _check_same(a.radius, b.radius)
    diff = abs(a.theta - b.theta)
    return min(diff, a.radius - diff)


def mod_reduce(s: CirclePoint, u: float) -> CirclePoint:
    """Map ``s`` to the circle of radius ``u`` via ``theta - floor(theta/u)*u``."""
    if not u > 0:
        raise ValueError(f"modulus must be > 0, got {u}")
    if u > s.radius * (1 + EPS):
        raise ValueError(f"modulus {u} exceeds the radius {s.radius} of the point")
    return CirclePoint(s.theta - math.floor(s.theta / u) * u, u)


def arc_contains(arc: Arc, s: CirclePoint) -> bool:
    """Half-open membership ``s in [start, end)``, wraparound included."""
    _check_same(arc.radius, s.radius)
    a, b, t = arc.start.theta, arc.end.theta, s.theta
    if a == b:
        return False
    tol = EPS * arc.radius
    if a < b:
        return a - tol <= t < b - tol
    return t >= a - tol or t < b - tol


def dyadic_digits(x: float, n: int) -> np.ndarray:
    """First ``n`` binary digits of ``x`` in [0, 1).

    Follows ``x_j = floor(2^j (x - sum_{k<j} x_k / 2^k))``; doubling a binary
    float is exact, so the digits are exact as well.
    """
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x}")
    if n < 1:
        raise ValueError("n must be >= 1")
    digits = np.zeros(n, dtype=np.int8)
    r = float(x)
    for j in range(n):
        r *= 2.0
        d = math.floor(r)
        digits[j] = d
        r -= d
    return digits


def _point_dist(x: float, u: float) -> float:
    x = x % u
    return min(x, u - x)


def arc_pair_distance_range(c1: Arc, c2: Arc) -> tuple[float, float]:
    """Closure of ``{d(s1, s2) : s1 in c1, s2 in c2}``.

    The differences ``theta2 - theta1`` sweep the interval
    ``[start2 - end1, end2 - start1]``; the distance is then minimal at the
    nearest multiple of ``u`` and maximal at the nearest odd multiple of
    ``u/2`` (or at an endpoint when none is enclosed).
    """
    _check_same(c1.radius, c2.radius)
    if c1.is_empty or c2.is_empty:
        raise ValueError("empty arc has no distance range")
    u = c1.radius
    lo = c2.start.theta - (c1.start.theta + c1.length)
    hi = lo + c1.length + c2.length
    ends = (_point_dist(lo, u), _point_dist(hi, u))
    has_zero = math.floor(hi / u) >= math.ceil(lo / u)
    has_half = math.floor(hi / u - 0.5) >= math.ceil(lo / u - 0.5)
    d_min = 0.0 if has_zero else min(ends)
    d_max = u / 2 if has_half else max(ends)
    return d_min, d_max
