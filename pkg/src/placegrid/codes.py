"""
Binary rate codes on the unit circle.

Every neuron fires at rate ``mu`` when the stimulus, reduced modulo the
neuron's scale, falls in its receptive arc, and at rate 1 otherwise.  Place
cells are the scale-1 case; grid cells are organized in modules sharing one
scale.  Neuron indices are 0-based throughout.

Evaluation works in module-relative coordinates: a scale ``lam = 1/q`` maps
``theta`` to ``frac(q * theta)`` and the arc endpoints are stored as
fractions of the period.  For dyadic scales this is exact in floating point.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .geometry import EPS, Arc, CirclePoint

DEFAULT_MU = 30.0
DEFAULT_BREAKPOINT_CAP = 2**22


class CellBudgetError(ValueError):
    """Raised when exact enumeration would exceed the configured cell budget."""


def _periods(scale: float) -> int:
    if not 0 < scale <= 1:
        raise ValueError(f"scale must lie in (0, 1], got {scale}")
    q = round(1.0 / scale)
    if q < 1 or abs(q * scale - 1.0) > 1e-9:
        raise ValueError(f"1/scale must be a positive integer, got scale={scale}")
    return q


@dataclass(frozen=True)
class Neuron:
    """One receptive arc on the circle of radius ``scale``."""

    scale: float
    field: Arc

    def __post_init__(self):
        _periods(self.scale)
        if self.field.radius != float(self.scale):
            raise ValueError("scale mismatch: field must live on the circle of radius `scale`")

    @property
    def periods(self) -> int:
        return _periods(self.scale)


@dataclass(frozen=True)
class DeltaReport:
    delta: int
    only_in_1: int
    only_in_2: int
    per_module: tuple[int, ...]


@dataclass(frozen=True)
class Code:
    """A binary code: neurons, the shared high rate ``mu`` and module ids.

    ``alias`` maps each arc-unit in ``neurons`` to a logical neuron; it lets a
    general binary code use several arcs for one neuron.  When omitted every
    unit is its own neuron.
    """

    neurons: tuple[Neuron, ...]
    mu: float
    module_index: tuple[int, ...]
    alias: tuple[int, ...] | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "neurons", tuple(self.neurons))
        object.__setattr__(self, "module_index", tuple(int(i) for i in self.module_index))
        if self.alias is not None:
            object.__setattr__(self, "alias", tuple(int(i) for i in self.alias))
        if not self.mu > 1:
            raise ValueError(f"mu must be > 1, got {self.mu}")
        if not self.neurons:
            raise ValueError("a code needs at least one neuron")
        if len(self.module_index) != len(self.neurons):
            raise ValueError("module_index must have one entry per neuron")
        mods = self.module_index
        if mods[0] != 0 or any(b not in (a, a + 1) for a, b in zip(mods, mods[1:])):
            raise ValueError("neurons must be grouped by module, with module ids 0, 1, 2, ...")
        scales = self.module_scales
        for i, nrn in zip(mods, self.neurons):
            if nrn.scale != scales[i]:
                raise ValueError(f"module {i} mixes scales {scales[i]} and {nrn.scale}")
        if scales[0] != 1.0:
            raise ValueError(f"the first module must have scale 1, got {scales[0]}")
        for big, small in zip(scales, scales[1:]):
            ratio = big / small
            if not small < big or abs(ratio - round(ratio)) > 1e-9:
                raise ValueError(f"incoherent scales: {big} / {small} is not an integer > 1")
        if self.alias is not None:
            if len(self.alias) != len(self.neurons):
                raise ValueError("alias must have one entry per arc")
            if sorted(set(self.alias)) != list(range(max(self.alias) + 1)):
                raise ValueError("alias ids must be 0..n-1 without gaps")
            for u, owner in enumerate(self.alias):
                if self.module_index[u] != self.module_index[self.alias.index(owner)]:
                    raise ValueError("all arcs of one neuron must share a module")

    @property
    def n(self) -> int:
        return len(self.neurons) if self.alias is None else max(self.alias) + 1

    @cached_property
    def module_scales(self) -> tuple[float, ...]:
        out: list[float] = []
        for i, nrn in zip(self.module_index, self.neurons):
            if i == len(out):
                out.append(float(nrn.scale))
        return tuple(out)

    @property
    def m(self) -> int:
        return len(self.module_scales)

    @cached_property
    def neuron_module(self) -> np.ndarray:
        """Module id of each logical neuron."""
        out = np.zeros(self.n, dtype=np.int64)
        out[np.asarray(self._owner)] = np.asarray(self.module_index)
        return out

    @cached_property
    def module_sizes(self) -> tuple[int, ...]:
        return tuple(int(c) for c in np.bincount(self.neuron_module, minlength=self.m))

    @cached_property
    def _owner(self) -> np.ndarray:
        if self.alias is None:
            return np.arange(len(self.neurons))
        return np.asarray(self.alias)

    @cached_property
    def _unit_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        q = np.array([nrn.periods for nrn in self.neurons], dtype=np.int64)
        a = np.array([nrn.field.start.theta for nrn in self.neurons]) * q
        b = np.array([nrn.field.end.theta for nrn in self.neurons]) * q
        a[a > 1 - EPS] = 0.0
        b[b > 1 - EPS] = 0.0
        return q, a, b

    @cached_property
    def code_id(self) -> str:
        return hashlib.sha256(dumps(self).encode()).hexdigest()[:12]

    def active_mask(self, thetas) -> np.ndarray:
        """Boolean matrix ``(len(thetas), n)``: neuron fires at ``mu``."""
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        q, a, b = self._unit_arrays
        x = thetas[:, None] * q[None, :]
        u = x - np.floor(x)
        u[u > 1 - EPS] = 0.0
        lo, hi = a - EPS, b - EPS
        inside = np.where(a < b, (u >= lo) & (u < hi), (u >= lo) | (u < hi))
        inside &= a != b
        if self.alias is None:
            return inside
        out = np.zeros((len(thetas), self.n), dtype=bool)
        for unit, owner in enumerate(self._owner):
            out[:, owner] |= inside[:, unit]
        return out

    def rates(self, s: CirclePoint) -> np.ndarray:
        return np.where(self.active_mask([_on_unit_circle(s)])[0], self.mu, 1.0)


def _on_unit_circle(s: CirclePoint | float) -> float:
    if isinstance(s, CirclePoint):
        if s.radius != 1.0:
            raise ValueError("scale mismatch: stimuli live on the unit circle")
        return s.theta
    return CirclePoint(float(s)).theta


def active_set(code: Code, s: CirclePoint | float) -> frozenset[int]:
    """Indices of the neurons firing at rate ``mu`` for stimulus ``s``."""
    mask = code.active_mask([_on_unit_circle(s)])[0]
    return frozenset(int(i) for i in np.flatnonzero(mask))


def delta(code: Code, s1: CirclePoint | float, s2: CirclePoint | float) -> DeltaReport:
    """Size of the larger of the two set differences of the active sets."""
    m1, m2 = code.active_mask([_on_unit_circle(s1), _on_unit_circle(s2)])
    only1 = m1 & ~m2
    only2 = m2 & ~m1
    mod = code.neuron_module
    per = np.maximum(np.bincount(mod, only1, minlength=code.m),
                     np.bincount(mod, only2, minlength=code.m))
    c1, c2 = int(only1.sum()), int(only2.sum())
    return DeltaReport(max(c1, c2), c1, c2, tuple(int(v) for v in per))


# --------------------------------------------------------------------------
# breakpoints and cells


def breakpoint_array(code: Code, cap: int = DEFAULT_BREAKPOINT_CAP) -> np.ndarray:
    """Sorted, deduplicated arc endpoints on S^1 lifted by periodicity."""
    q, a, b = code._unit_arrays
    keep = a != b
    total = int(2 * q[keep].sum())
    if total > cap:
        raise CellBudgetError(
            f"cell budget exceeded: {total} raw breakpoints > cap {cap}")
    parts = []
    for qi, ai, bi in zip(q[keep], a[keep], b[keep]):
        k = np.arange(qi, dtype=float)
        parts.append((ai + k) / qi)
        parts.append((bi + k) / qi)
    if not parts:
        return np.zeros(0)
    pts = np.concatenate(parts)
    pts[pts > 1 - EPS] = 0.0
    pts.sort()
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.diff(pts) > EPS
    return pts[keep]


def breakpoints(code: Code, cap: int = DEFAULT_BREAKPOINT_CAP) -> list[CirclePoint]:
    return [CirclePoint(float(t)) for t in breakpoint_array(code, cap)]


def pack_masks(mask: np.ndarray) -> np.ndarray:
    """Pack a boolean ``(rows, n)`` matrix into ``(rows, ceil(n/64))`` uint64 words."""
    rows, n = mask.shape
    words = max(1, -(-n // 64))
    padded = np.zeros((rows, words * 64), dtype=bool)
    padded[:, :n] = mask
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(rows, words)


@dataclass(frozen=True)
class CellPartition:
    """Half-open cells ``[starts[j], starts[j] + lengths[j])`` with constant active set."""

    starts: np.ndarray
    lengths: np.ndarray
    bits: np.ndarray

    @property
    def size(self) -> int:
        return len(self.starts)


def cell_partition(code: Code, cap: int = DEFAULT_BREAKPOINT_CAP) -> CellPartition:
    pts = breakpoint_array(code, cap)
    if len(pts) == 0:
        pts = np.zeros(1)
    lengths = np.diff(np.append(pts, pts[0] + 1.0))
    mids = (pts + lengths / 2) % 1.0
    return CellPartition(pts, lengths, pack_masks(code.active_mask(mids)))


# --------------------------------------------------------------------------
# constructors


def _place_code(arcs: Sequence[tuple[float, float]], mu: float, name: str) -> Code:
    neurons = tuple(Neuron(1.0, Arc.from_thetas(a, b)) for a, b in arcs)
    return Code(neurons, mu, (0,) * len(neurons), name=name)


def make_uniform_place(n: int, d: int, mu: float = DEFAULT_MU) -> Code:
    """``d`` groups of identical place cells tiling the circle with ``[(k-1)/d, k/d)``.

    The first ``d-1`` groups hold ``n // d`` cells, the last one the rest.
    """
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got n={n}, d={d}")
    size = n // d
    arcs = []
    for k in range(1, d + 1):
        count = size if k < d else n - (d - 1) * size
        arcs += [((k - 1) / d, k / d)] * count
    return _place_code(arcs, mu, f"uniform-place(n={n},d={d})")


def make_adaptive_place(n: int, mu: float = DEFAULT_MU) -> Code:
    """Half-circle fields ``[i/2n, i/2n + 1/2)`` for ``i = 1..n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    arcs = [(i / (2 * n), i / (2 * n) + 0.5) for i in range(1, n + 1)]
    return _place_code(arcs, mu, f"adaptive-place(n={n})")


def make_random_place(n: int, mu: float = DEFAULT_MU, seed: int = 0) -> Code:
    """Arcs ``[A_i, B_i)`` with all ``2n`` endpoints i.i.d. uniform on S^1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    u = np.random.Generator(np.random.Philox(seed)).random(2 * n)
    arcs = list(zip(u[:n].tolist(), u[n:].tolist()))
    return _place_code(arcs, mu, f"random-place(n={n},seed={seed})")


def _check_grid_spec(spec: Sequence[tuple[int, float]]) -> None:
    if not spec:
        raise ValueError("grid spec needs at least one module")
    for n_i, lam in spec:
        if int(n_i) < 1:
            raise ValueError(f"module sizes must be >= 1, got {n_i}")
        _periods(lam)
    if spec[0][1] != 1.0:
        raise ValueError("the first module must have scale 1")
    for (_, big), (_, small) in zip(spec, spec[1:]):
        ratio = big / small
        if not small < big or abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(f"incoherent scales: {big} / {small} is not an integer > 1")


def make_grid(spec: Sequence[tuple[int, float]], inner="adaptive", mu: float = DEFAULT_MU,
              seed: int = 0, name: str = "") -> Code:
    """Grid cells code with modules ``(n_i, lambda_i)``.

    ``inner`` picks the arcs inside each module: ``"adaptive"`` (rotating
    half-period fields ``[j lam/2n_i, (j+n_i) lam/2n_i)``), ``"random"``
    (endpoints uniform on S^lam), or an explicit list of arcs.  A list of
    such choices, one per module, is also accepted.
    """
    spec = [(int(n_i), float(lam)) for n_i, lam in spec]
    _check_grid_spec(spec)
    if isinstance(inner, str) or (inner and isinstance(inner[0], tuple)):
        inners = [inner] * len(spec)
    else:
        inners = list(inner)
    if len(inners) != len(spec):
        raise ValueError("need one inner generator per module")
    rng = np.random.Generator(np.random.Philox(seed))
    neurons, mods = [], []
    for i, ((n_i, lam), how) in enumerate(zip(spec, inners)):
        if how == "adaptive":
            rel = [(j / (2 * n_i), (j + n_i) / (2 * n_i)) for j in range(1, n_i + 1)]
        elif how == "random":
            u = rng.random(2 * n_i)
            rel = list(zip(u[:n_i].tolist(), u[n_i:].tolist()))
        elif isinstance(how, str):
            raise ValueError(f"unknown inner generator {how!r}")
        else:
            if len(how) != n_i:
                raise ValueError(f"module {i}: {len(how)} arcs given for {n_i} neurons")
            rel = [(a / lam, b / lam) for a, b in how]
        for ra, rb in rel:
            neurons.append(Neuron(lam, Arc.from_thetas(lam * ra, lam * rb, lam)))
            mods.append(i)
    return Code(tuple(neurons), mu, tuple(mods), name=name or f"grid(m={len(spec)})")


def balanced_spec(n: int, m: int) -> list[tuple[int, float]]:
    """Dyadic scales ``2^-(i-1)``, ``n // m`` cells per module, remainder in the last."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    sizes = [n // m] * m
    sizes[-1] += n % m
    return [(s, 2.0 ** -i) for i, s in enumerate(sizes)]


def make_balanced_grid(n: int, m: int, inner="adaptive", mu: float = DEFAULT_MU,
                       seed: int = 0) -> Code:
    return make_grid(balanced_spec(n, m), inner, mu, seed,
                     name=f"balanced-grid(n={n},m={m},{inner})")


def make_extreme_dyadic(n: int, mu: float = DEFAULT_MU) -> Code:
    """``n`` one-cell modules; module ``i`` has scale ``2^-(i-1)`` and field ``[0, 2^-i)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > 52:
        raise ValueError("precision exhausted: extreme dyadic code limited to n <= 52")
    neurons = tuple(Neuron(2.0 ** -i, Arc.from_thetas(0.0, 2.0 ** -(i + 1), 2.0 ** -i))
                    for i in range(n))
    return Code(neurons, mu, tuple(range(n)), name=f"extreme-dyadic(n={n})")


def make_general(fields: Sequence[Iterable[tuple[float, float]]], mu: float = DEFAULT_MU) -> Code:
    """Scale-1 code whose neuron ``i`` responds on the union of ``fields[i]``."""
    neurons, alias = [], []
    for i, arcs in enumerate(fields):
        arcs = list(arcs)
        if not arcs:
            arcs = [(0.0, 0.0)]
        for a, b in arcs:
            neurons.append(Neuron(1.0, Arc.from_thetas(a, b)))
            alias.append(i)
    return Code(tuple(neurons), mu, (0,) * len(neurons), tuple(alias), name="general")


# --------------------------------------------------------------------------
# serialization


def to_json(code: Code) -> dict:
    """Canonical JSON form; angles are stored at each module's own scale.

    A neuron with several arcs (general codes) is written as a list of arcs
    instead of a single ``[theta_a, theta_b]`` pair.
    """
    modules = [{"lambda": lam, "fields": []} for lam in code.module_scales]
    fields_by_owner: dict[int, list] = {}
    for unit, (nrn, mod) in enumerate(zip(code.neurons, code.module_index)):
        owner = int(code._owner[unit])
        arc = [nrn.field.start.theta, nrn.field.end.theta]
        if owner not in fields_by_owner:
            fields_by_owner[owner] = [mod, []]
        fields_by_owner[owner][1].append(arc)
    for owner in sorted(fields_by_owner):
        mod, arcs = fields_by_owner[owner]
        modules[mod]["fields"].append(arcs[0] if code.alias is None else arcs)
    return {"mu": code.mu, "modules": modules}


def from_json(obj: dict, name: str = "") -> Code:
    try:
        mu = float(obj["mu"])
        modules = obj["modules"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"code JSON needs 'mu' and 'modules': {exc}") from None
    neurons, mods, alias = [], [], []
    multi = False
    owner = 0
    for i, mod in enumerate(modules):
        lam = float(mod["lambda"])
        for fld in mod["fields"]:
            arcs = fld if fld and isinstance(fld[0], (list, tuple)) else [fld]
            multi |= fld is not None and len(fld) > 0 and isinstance(fld[0], (list, tuple))
            for a, b in arcs:
                neurons.append(Neuron(lam, Arc.from_thetas(float(a), float(b), lam)))
                mods.append(i)
                alias.append(owner)
            owner += 1
    return Code(tuple(neurons), mu, tuple(mods), tuple(alias) if multi else None, name=name)


def dumps(code: Code) -> str:
    return json.dumps(to_json(code), sort_keys=True, separators=(",", ":"))


def loads(text: str, name: str = "") -> Code:
    return from_json(json.loads(text), name=name)
