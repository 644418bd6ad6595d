"""
Experiment runner: named code presets, JSON configs, the discrimination-time
figure data, and a sweep that checks every closed-form bound numerically.

Figure data come in two tables.  The left one has, for each preset and each
distance ``rho'``, the statistic ``Delta`` between the anchor ``s`` and
``s + rho'`` together with the smallest time on the grid at which the optimal
test errs with probability at most ``alpha``.  The right one turns those
times into the proxy ``max_{rho' >= rho} T_min(s, s + rho')``.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache

import numpy as np

from . import analysis, codes, montecarlo, theory
from .codes import Code

DECREASING_SIZES = (15, 13, 11, 10, 8, 7, 6, 5, 4, 4, 3, 3, 2, 2, 2, 1, 1, 1, 1, 1)
FIGURE_PRESETS = ("place-adaptive", "place-random", "grid-adaptive-balanced",
                  "grid-adaptive-decreasing", "grid-random-balanced")
FAST_TRIALS = 500


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending line."""


def _dyadic(sizes) -> list[tuple[int, float]]:
    return [(n_i, 2.0 ** -i) for i, n_i in enumerate(sizes)]


def build_preset(name: str, mu: float = codes.DEFAULT_MU, seed: int = 0) -> Code:
    """The five codes of the figure, all with ``n = 100`` neurons."""
    if name == "place-adaptive":
        code = codes.make_adaptive_place(100, mu)
    elif name == "place-random":
        code = codes.make_random_place(100, mu, seed)
    elif name == "grid-adaptive-balanced":
        code = codes.make_grid(_dyadic([5] * 20), "adaptive", mu)
    elif name == "grid-adaptive-decreasing":
        code = codes.make_grid(_dyadic(DECREASING_SIZES), "adaptive", mu)
    elif name == "grid-random-balanced":
        code = codes.make_grid(_dyadic([5] * 20), "random", mu, seed)
    else:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(FIGURE_PRESETS)}")
    return replace(code, name=name)


def build_code(spec: dict, mu: float = codes.DEFAULT_MU, seed: int = 0) -> Code:
    """Code from a config entry.

    Accepted forms: ``{"preset": NAME}``, ``{"family": ..., params}`` and an
    explicit code document ``{"mu": ..., "modules": [...]}``.
    """
    if not isinstance(spec, dict):
        raise ConfigError("code spec must be a JSON object")
    if "modules" in spec:
        return codes.from_json(spec)
    if "preset" in spec:
        return build_preset(spec["preset"], spec.get("mu", mu), spec.get("seed", seed))
    fam = spec.get("family")
    mu = spec.get("mu", mu)
    seed = spec.get("seed", seed)
    try:
        if fam == "uniform-place":
            return codes.make_uniform_place(spec["n"], spec["d"], mu)
        if fam == "adaptive-place":
            return codes.make_adaptive_place(spec["n"], mu)
        if fam == "random-place":
            return codes.make_random_place(spec["n"], mu, seed)
        if fam == "balanced-grid":
            return codes.make_balanced_grid(spec["n"], spec["m"], spec.get("inner", "adaptive"),
                                            mu, seed)
        if fam == "grid":
            return codes.make_grid([tuple(p) for p in spec["modules_spec"]],
                                   spec.get("inner", "adaptive"), mu, seed)
        if fam == "extreme-dyadic":
            return codes.make_extreme_dyadic(spec["n"], mu)
    except KeyError as exc:
        raise ConfigError(f"code family {fam!r} needs parameter {exc}") from None
    raise ConfigError(f"unknown code family {fam!r}")


# --------------------------------------------------------------------------
# configuration


def default_t_grid() -> list[float]:
    return np.geomspace(0.001, 20, 200).tolist()


@dataclass
class ExperimentConfig:
    presets: list = field(default_factory=lambda: list(FIGURE_PRESETS))
    code: dict | None = None
    mu: float = codes.DEFAULT_MU
    alpha: float = 0.05
    anchor: float = 1 / 3
    rho_grid: list = field(default_factory=lambda: analysis.default_rho_grid().tolist())
    t_grid: list = field(default_factory=default_t_grid)
    trials: int = 5000
    master_seed: int = 0
    code_seed: int = 0
    output: str = "out"

    def validate(self, where=lambda key: "") -> "ExperimentConfig":
        def fail(key, msg):
            raise ConfigError(f"{where(key)}{key}: {msg}")

        if not 0 < self.alpha < 1:
            fail("alpha", f"must lie in (0, 1), got {self.alpha}")
        if not self.mu > 1:
            fail("mu", f"must be > 1, got {self.mu}")
        if int(self.trials) != self.trials or self.trials < 1:
            fail("trials", f"must be a positive integer, got {self.trials}")
        for key in ("rho_grid", "t_grid"):
            g = getattr(self, key)
            if not g or any(b <= a for a, b in zip(g, g[1:])):
                fail(key, "must be a non-empty strictly increasing list")
        if not all(0 < r <= 0.5 for r in self.rho_grid):
            fail("rho_grid", "distances must lie in (0, 1/2]")
        if not all(t > 0 for t in self.t_grid):
            fail("t_grid", "times must be > 0")
        for name in self.presets:
            if name not in FIGURE_PRESETS:
                fail("presets", f"unknown preset {name!r}")
        return self

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        """Parse a JSON config; errors carry the line of the offending key."""
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ConfigError("line 1: config must be a JSON object")

        def where(key):
            for i, line in enumerate(text.splitlines(), 1):
                if f'"{key}"' in line:
                    return f"line {i}: "
            return ""

        known = {f.name for f in fields(cls)}
        for key in obj:
            if key not in known:
                raise ConfigError(f"{where(key)}unknown key {key!r}")
        for key in ("rho_grid", "t_grid"):
            if isinstance(obj.get(key), dict):
                g = obj[key]
                try:
                    obj[key] = np.geomspace(g["start"], g["stop"], int(g["num"])).tolist()
                except (KeyError, TypeError, ValueError) as exc:
                    raise ConfigError(f"{where(key)}{key}: geometric grid needs "
                                      f"start, stop, num ({exc})") from None
        cfg = cls(**obj)
        cfg.validate(where)
        if cfg.code is not None:
            try:
                build_code(cfg.code, cfg.mu, cfg.code_seed)
            except ValueError as exc:
                raise ConfigError(f"{where('code')}code: {exc}") from None
        return cfg

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# figure data


def _fmt(x) -> str:
    if x is None or x == math.inf:
        return "inf"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


@lru_cache(maxsize=8)
def _cached_preset(name: str, mu: float, seed: int) -> Code:
    return build_preset(name, mu, seed)


def _left_task(args) -> tuple[int, float | None]:
    name, mu, code_seed, anchor, rho, alpha, t_grid, trials, master_seed, stream = args
    code = _cached_preset(name, mu, code_seed)
    d = codes.delta(code, anchor, anchor + rho).delta
    tmin = montecarlo.empirical_tmin(code, anchor, anchor + rho, alpha, t_grid, trials,
                                     master_seed, stream)
    return d, tmin


@dataclass
class FigureData:
    left: list[tuple[str, float, int, float, float | None]]
    right: list[tuple[str, float, float]]

    def left_csv(self) -> str:
        lines = ["code,rho_prime,delta,inv_delta,empirical_tmin"]
        for name, rho, d, inv, tmin in self.left:
            lines.append(",".join([name, _fmt(rho), str(d), _fmt(inv), _fmt(tmin)]))
        return "\n".join(lines) + "\n"

    def right_csv(self) -> str:
        lines = ["code,rho,proxy_T"]
        for name, rho, proxy in self.right:
            lines.append(",".join([name, _fmt(rho), _fmt(proxy)]))
        return "\n".join(lines) + "\n"


def figure_data(cfg: ExperimentConfig, workers: int = 1) -> FigureData:
    """Compute both tables; rows come out in preset then distance order."""
    tasks = []
    for p, name in enumerate(cfg.presets):
        pidx = FIGURE_PRESETS.index(name)
        for r, rho in enumerate(cfg.rho_grid):
            tasks.append((name, cfg.mu, cfg.code_seed, cfg.anchor, rho, cfg.alpha,
                          tuple(cfg.t_grid), cfg.trials, cfg.master_seed, (pidx, r)))
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_left_task, tasks, chunksize=4))
    else:
        results = [_left_task(t) for t in tasks]
    left = []
    for task, (d, tmin) in zip(tasks, results):
        left.append((task[0], task[4], d, math.inf if d == 0 else 1 / d, tmin))
    right = []
    for name in cfg.presets:
        rows = [row for row in left if row[0] == name]
        times = [math.inf if row[4] is None else row[4] for row in rows]
        for k, row in enumerate(rows):
            right.append((name, row[1], max(times[k:])))
    return FigureData(left, right)


@dataclass(frozen=True)
class Tolerances:
    r2: float = 0.95
    slope_rel: float = 0.15
    inverse_factor: float = 4.0
    flat_ratio: float = 4.0

    @classmethod
    def widened(cls, factor: float = 3.0) -> "Tolerances":
        base = cls()
        return cls(1 - factor * (1 - base.r2), factor * base.slope_rel,
                   factor * base.inverse_factor, factor * base.flat_ratio)


def _through_origin(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and R^2 of the least-squares line ``y = k x``.

    R^2 is measured against the mean of ``y`` (centered), which is stricter
    than the uncentered value usually quoted for fits through the origin.
    """
    k = float(x @ y / (x @ x))
    ss_res = float(((y - k * x) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return k, 1 - ss_res / ss_tot if ss_tot > 0 else 1.0


def figure_checks(data: FigureData, tol: Tolerances = Tolerances()) -> list[dict]:
    """Shape properties of the figure: shared 1/Delta slope, 1/rho decay, flatness."""
    checks = []
    pts = [(row[0], row[3], row[4]) for row in data.left
           if row[2] > 0 and row[4] is not None]
    names = sorted({p[0] for p in pts}, key=FIGURE_PRESETS.index)
    if pts:
        x = np.array([p[1] for p in pts])
        y = np.array([p[2] for p in pts])
        k, r2 = _through_origin(x, y)
        checks.append(dict(name="left: pooled fit tmin = k / delta", value=r2,
                           bound=tol.r2, slope=k, points=len(pts), passed=r2 > tol.r2))
        if len(names) > 1:
            for name in names:
                sel = np.array([p[0] == name for p in pts])
                kp, _ = _through_origin(x[sel], y[sel])
                rel = abs(kp - k) / k
                checks.append(dict(name=f"left: slope of {name} vs pooled", value=rel,
                                   bound=tol.slope_rel, slope=kp, passed=rel <= tol.slope_rel))
    by_name: dict[str, list] = {}
    for name, rho, proxy in data.right:
        by_name.setdefault(name, []).append((rho, proxy))
    if "place-adaptive" in by_name:
        rr = np.array([(r, p) for r, p in by_name["place-adaptive"] if 0.01 <= r <= 0.5])
        ok = len(rr) > 0 and np.all(np.isfinite(rr[:, 1]))
        worst = math.inf
        if ok:
            c = math.exp(float(np.mean(np.log(rr[:, 1] * rr[:, 0]))))
            ratio = rr[:, 1] / (c / rr[:, 0])
            worst = float(max(ratio.max(), 1 / ratio.min()))
        checks.append(dict(name="right: place-adaptive within factor of c/rho on [0.01, 0.5]",
                           value=worst, bound=tol.inverse_factor,
                           passed=bool(ok and worst <= tol.inverse_factor)))
    for name in ("grid-adaptive-balanced", "grid-random-balanced"):
        if name not in by_name:
            continue
        vals = np.array([p for r, p in by_name[name] if 2.0 ** -19 <= r <= 0.5])
        ratio = float(vals.max() / vals.min()) if len(vals) and np.all(np.isfinite(vals)) \
            else math.inf
        checks.append(dict(name=f"right: {name} max/min on [2^-19, 0.5]",
                           value=ratio, bound=tol.flat_ratio, passed=ratio <= tol.flat_ratio))
    return checks


def run_figure(cfg: ExperimentConfig, out_dir: str, fast: bool = False, svg: bool = False,
               workers: int = 1) -> dict:
    """Write ``left.csv``, ``right.csv`` and ``checks.json`` (plus SVGs) to ``out_dir``."""
    if fast:
        cfg = ExperimentConfig(**{**asdict(cfg), "trials": FAST_TRIALS})
    data = figure_data(cfg, workers)
    checks = figure_checks(data, Tolerances.widened() if fast else Tolerances())
    os.makedirs(out_dir, exist_ok=True)
    paths = {"left": os.path.join(out_dir, "left.csv"), "right": os.path.join(out_dir, "right.csv"),
             "checks": os.path.join(out_dir, "checks.json")}
    with open(paths["left"], "w") as fh:
        fh.write(data.left_csv())
    with open(paths["right"], "w") as fh:
        fh.write(data.right_csv())
    with open(paths["checks"], "w") as fh:
        fh.write(dumps_report(checks))
    if svg:
        paths["left_svg"] = os.path.join(out_dir, "left.svg")
        paths["right_svg"] = os.path.join(out_dir, "right.svg")
        left_series: dict[str, list] = {}
        for name, _, d, inv, tmin in data.left:
            if d > 0 and tmin is not None:
                left_series.setdefault(name, []).append((inv, tmin))
        right_series: dict[str, list] = {}
        for name, rho, proxy in data.right:
            if math.isfinite(proxy):
                right_series.setdefault(name, []).append((rho, proxy))
        with open(paths["left_svg"], "w") as fh:
            fh.write(svg_chart(left_series, "1/Delta", "empirical T_min", logx=False, logy=False,
                               markers=True))
        with open(paths["right_svg"], "w") as fh:
            fh.write(svg_chart(right_series, "rho", "proxy T(f, rho)", logx=True, logy=True))
    return {"paths": paths, "checks": checks, "data": data}


# --------------------------------------------------------------------------
# bound verification sweep


def _check(name: str, passed: bool, **info) -> dict:
    return dict(name=name, passed=bool(passed), **info)


def verify_bounds(seed: int = 0, trials: int = 10_000, mu: float = codes.DEFAULT_MU) -> list[dict]:
    """Evaluate every closed-form inequality against exact or simulated values."""
    out = []
    rng = montecarlo.make_rng(seed, (999,))

    # place cells: lower bound, minimax chain and the adaptive sandwich
    for n in (10, 40, 100):
        for rho in np.linspace(1 / n + 1e-3, 0.5, 12):
            d = math.ceil(1 / rho - 1e-9)
            t = analysis.t_of_rho_exact(codes.make_uniform_place(n, d, mu), rho)
            lo, _ = theory.place_minimax_sandwich(n, rho)
            hi = theory.place_minimax_upper(n, rho)
            mid = theory.uniform_place_time(n, rho)
            out.append(_check("minimax place chain", lo <= t <= mid <= hi and
                              theory.place_lower_bound(n, rho) <= t,
                              n=n, rho=rho, value=t, lower=lo, upper=hi))
        g = codes.make_adaptive_place(n, mu)
        for rho in np.linspace(1 / (2 * n), 0.5, 15):
            t = analysis.t_of_rho_exact(g, rho)
            lo, hi = theory.adaptive_place_sandwich(n, rho)
            out.append(_check("adaptive place sandwich", lo <= t <= hi,
                              n=n, rho=rho, value=t, lower=lo, upper=hi))
            out.append(_check("place lower bound (adaptive code)",
                              theory.place_lower_bound(n, rho) <= t, n=n, rho=rho, value=t))

    # grid cells: class lower bound, adaptive upper bound, balanced sandwich
    for n, m in ((8, 2), (12, 3), (16, 4), (20, 5), (24, 4), (30, 5)):
        code = codes.make_balanced_grid(n, m, "adaptive", mu)
        spec = theory.GridSpec.from_code(code)
        blo, bhi = theory.balanced_sandwich(n, m)
        for rho in np.geomspace(2.0 ** -m, 0.5, 10):
            t = analysis.t_of_rho_exact(code, rho)
            lo = theory.grid_lower_bound(spec, rho)
            hi = theory.grid_adaptive_upper_bound(spec, rho)
            out.append(_check("grid lower <= exact <= adaptive upper", lo <= t <= hi,
                              n=n, m=m, rho=rho, value=t, lower=lo, upper=hi))
            out.append(_check("balanced sandwich", blo <= lo and t <= hi <= bhi and blo <= t <= bhi,
                              n=n, m=m, rho=rho, value=t, lower=blo, upper=bhi))
        for rho in np.geomspace(2.0 ** -(m + 3), 0.5, 8):
            first, second = theory.grid_degeneracy(spec, rho)
            if first or second:
                out.append(_check("degenerate structure gives infinite lower bound",
                                  theory.grid_lower_bound(spec, rho) == math.inf, n=n, m=m, rho=rho))

    # no code separates pairs closer than 2^-n; the dyadic code reaches it
    for n in (4, 6, 8, 10):
        dy = codes.make_extreme_dyadic(n, mu)
        rnd = codes.make_random_place(n, mu, seed)
        out.append(_check("impossibility below 2^-n", analysis.t_of_rho_exact(dy, 2.0 ** -(n + 1))
                          == math.inf and analysis.t_of_rho_exact(rnd, 2.0 ** -(n + 1)) == math.inf,
                          n=n))
        vals = [analysis.t_of_rho_exact(dy, r) for r in (2.0 ** -n, 0.1, 0.25, 0.5)]
        out.append(_check("dyadic code time is 1", all(v == 1 for v in vals), n=n, value=vals))

    # per-module decomposition of Delta
    for name in ("grid-adaptive-balanced", "grid-random-balanced", "grid-adaptive-decreasing"):
        code = build_preset(name, mu, seed)
        th = rng.random((200, 2))
        ok = True
        for a, b in th:
            rep = codes.delta(code, a, b)
            s = sum(rep.per_module)
            ok &= s / 2 <= rep.delta <= s
        out.append(_check("module decomposition of Delta", ok, code=name, pairs=len(th)))

    # error sandwich of the optimal test
    code = codes.make_random_place(30, mu, seed)
    for k in range(8):
        a, b = rng.random(2)
        rep = codes.delta(code, a, b)
        if rep.delta == 0:
            continue
        T = float(rng.choice([0.5, 1.0, 2.0, 4.0])) / (rep.delta * analysis.c_mu(mu))
        bounds = analysis.pe_bounds(code, a, b, T)
        batch = montecarlo.estimate_error(code, a, b, T, trials, seed, (k,))
        # binomial noise at the bound values, so a zero count never shrinks the band
        hi_slack = 3 * math.sqrt(max(bounds.pe_upper * (1 - bounds.pe_upper), 1e-12) / trials)
        lo_slack = 3 * math.sqrt(bounds.pe_lower * (1 - bounds.pe_lower) / trials)
        out.append(_check("error sandwich", bounds.pe_lower - lo_slack <= batch.p_hat
                          <= bounds.pe_upper + hi_slack, T=T, delta=rep.delta, value=batch.p_hat,
                          lower=bounds.pe_lower, upper=bounds.pe_upper))

    # Poisson tail bounds against exact tails
    for theta in (0.5, 1.0, 5.0, 10.0, 50.0):
        ok = True
        for x in np.linspace(0, 3, 13):
            ok &= poisson_sf(theta, theta * (1 + x)) <= analysis.poisson_tail_upper(theta, x) + 1e-15
        for x in np.linspace(0, theta, 13):
            ok &= poisson_cdf(theta, theta - x) <= analysis.poisson_tail_lower(theta, x) + 1e-15
        out.append(_check("Poisson tail bounds", ok, theta=theta))

    # probability that a random arc covers both points of a pair
    for t in (0.1, 0.25, 0.5):
        draws = 100_000
        ab = rng.random((draws, 2))
        s1, s2 = 0.2, 0.2 + t
        inside = _in_arcs(ab[:, 0], ab[:, 1], s1) & _in_arcs(ab[:, 0], ab[:, 1], s2 % 1)
        p = inside.mean()
        exact = analysis.pair_in_random_arc_probability(t)
        sd = math.sqrt(exact * (1 - exact) / draws)
        out.append(_check("random arc covers a pair", abs(p - exact) <= 3 * sd, t=t, value=p,
                          exact=exact))
    return out


def _in_arcs(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    return np.where(a < b, (a <= s) & (s < b), (s >= a) | (s < b))


def poisson_cdf(theta: float, k: float) -> float:
    """``P(X <= k)`` for ``X ~ Poisson(theta)``, by direct summation of the pmf."""
    if k < 0:
        return 0.0
    top = math.floor(k)
    term = math.exp(-theta)
    total = term
    for j in range(1, top + 1):
        term *= theta / j
        total += term
    return min(total, 1.0)


def poisson_sf(theta: float, k: float) -> float:
    """``P(X >= k)``, summing the upper tail directly so tiny values keep precision."""
    start = max(0, math.ceil(k))
    log_term = -theta + start * math.log(theta) - math.lgamma(start + 1)
    term = math.exp(log_term)
    total = 0.0
    j = start
    while term > 0 and (term > total * 1e-18 or j < theta):
        total += term
        j += 1
        term *= theta / j
    return min(total, 1.0)


def dumps_report(items) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return "inf" if v > 0 else "-inf" if v < 0 else "nan"
        if isinstance(v, (np.floating, np.integer, np.bool_)):
            return clean(v.item())
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v
    return json.dumps(clean(items), indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# minimal SVG line charts

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_chart(series: dict[str, list[tuple[float, float]]], xlabel: str, ylabel: str,
              logx: bool = False, logy: bool = False, markers: bool = False,
              width: int = 640, height: int = 420) -> str:
    """Static chart with one polyline (or marker set) per series."""
    fx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    fy = (lambda v: math.log10(v)) if logy else (lambda v: v)
    pts = [(fx(x), fy(y)) for s in series.values() for x, y in s]
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if not logy:
        y0 = min(y0, 0.0)
    if not logx:
        x0 = min(x0, 0.0)
    x1, y1 = (x1 if x1 > x0 else x0 + 1), (y1 if y1 > y0 else y0 + 1)
    ml, mr, mt, mb = 70, 170, 20, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'font-family="sans-serif" font-size="12">',
             f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    for i in range(5):
        tx = x0 + (x1 - x0) * i / 4
        ty = y0 + (y1 - y0) * i / 4
        lx = f"1e{tx:.1f}" if logx else f"{tx:.3g}"
        ly = f"1e{ty:.1f}" if logy else f"{ty:.3g}"
        parts.append(f'<text x="{sx(tx):.1f}" y="{mt + ph + 16}" text-anchor="middle">{lx}</text>')
        parts.append(f'<text x="{ml - 6}" y="{sy(ty) + 4:.1f}" text-anchor="end">{ly}</text>')
    parts.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="14" y="{mt + ph / 2}" transform="rotate(-90 14 {mt + ph / 2})" '
                 f'text-anchor="middle">{ylabel}</text>')
    for k, (name, s) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        xy = [(sx(fx(x)), sy(fy(y))) for x, y in s]
        if markers:
            parts += [f'<circle cx="{a:.1f}" cy="{b:.1f}" r="2.5" fill="{color}"/>' for a, b in xy]
        else:
            path = " ".join(f"{a:.1f},{b:.1f}" for a, b in xy)
            parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                         f'stroke-width="1.5"/>')
        ly = mt + 14 + 18 * k
        parts.append(f'<rect x="{ml + pw + 12}" y="{ly - 9}" width="10" height="10" '
                     f'fill="{color}"/>')
        parts.append(f'<text x="{ml + pw + 28}" y="{ly}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
