import json
import math

import numpy as np
import pytest

from placegrid import codes
from placegrid.experiments import (
    DECREASING_SIZES,
    FIGURE_PRESETS,
    ConfigError,
    ExperimentConfig,
    FigureData,
    Tolerances,
    build_code,
    build_preset,
    default_t_grid,
    dumps_report,
    figure_checks,
    figure_data,
    run_figure,
    svg_chart,
    verify_bounds,
)


def test_decreasing_sizes_sum_to_100():
    assert sum(DECREASING_SIZES) == 100 and len(DECREASING_SIZES) == 20


@pytest.mark.parametrize("name", FIGURE_PRESETS)
def test_presets_have_100_neurons(name):
    code = build_preset(name)
    assert code.n == 100 and code.mu == 30 and code.name == name


def test_preset_module_structure():
    bal = build_preset("grid-adaptive-balanced")
    assert list(bal.module_sizes) == [5] * 20
    assert list(bal.module_scales) == [2.0 ** -i for i in range(20)]
    assert tuple(build_preset("grid-adaptive-decreasing").module_sizes) == tuple(DECREASING_SIZES)
    assert build_preset("place-adaptive").m == 1


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        build_preset("nope")


@pytest.mark.parametrize("spec, n", [
    ({"family": "uniform-place", "n": 10, "d": 3}, 10),
    ({"family": "adaptive-place", "n": 7}, 7),
    ({"family": "random-place", "n": 9, "seed": 4}, 9),
    ({"family": "balanced-grid", "n": 12, "m": 3, "inner": "random"}, 12),
    ({"family": "grid", "modules_spec": [[3, 1.0], [2, 0.5]]}, 5),
    ({"family": "extreme-dyadic", "n": 6}, 6),
    ({"preset": "place-random"}, 100),
])
def test_build_code(spec, n):
    assert build_code(spec).n == n


def test_build_code_from_document():
    code = codes.make_random_place(5, seed=1)
    assert build_code(json.loads(codes.dumps(code))) == code


@pytest.mark.parametrize("spec, msg", [
    ({"family": "adaptive-place"}, "needs parameter"),
    ({"family": "weird"}, "unknown code family"),
    ([1, 2], "JSON object"),
])
def test_build_code_errors(spec, msg):
    with pytest.raises(ConfigError, match=msg):
        build_code(spec)


def test_default_grids():
    cfg = ExperimentConfig()
    assert len(cfg.t_grid) == 200
    assert cfg.t_grid[0] == pytest.approx(0.001) and cfg.t_grid[-1] == pytest.approx(20)
    assert cfg.rho_grid[0] == 2.0 ** -21 and cfg.rho_grid[-1] == 0.5
    np.testing.assert_allclose(np.diff(np.log2(cfg.rho_grid)), 0.5)
    assert cfg.anchor == 1 / 3 and cfg.trials == 5000 and cfg.alpha == 0.05


def test_config_round_trip():
    cfg = ExperimentConfig(presets=["place-random"], trials=12, master_seed=5)
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg


def test_config_geometric_grid():
    cfg = ExperimentConfig.from_json('{"t_grid": {"start": 0.01, "stop": 1, "num": 3}}')
    np.testing.assert_allclose(cfg.t_grid, [0.01, 0.1, 1])


@pytest.mark.parametrize("text, line, msg", [
    ('{\n  "trials": 10,\n  "alpha": 1.5\n}', 3, "alpha"),
    ('{\n  "mu": 0.5\n}', 2, "mu"),
    ('{\n  "trials": 5,\n\n  "bogus": 1\n}', 4, "unknown key"),
    ('{\n  "rho_grid": [0.2, 0.1]\n}', 2, "increasing"),
    ('{\n  "presets": ["x"]\n}', 2, "unknown preset"),
    ('{\n  "trials": 0\n}', 2, "positive integer"),
    ('{\n  "trials": 5,\n  "code": {"family": "adaptive-place"}\n}', 3, "needs parameter"),
    ('{\n  "trials": 5,\n  "t_grid": {"start": 1}\n}', 3, "geometric grid"),
    ('{\n  "trials": 5,,\n}', 2, "invalid JSON"),
])
def test_config_errors_name_the_line(text, line, msg):
    with pytest.raises(ConfigError, match=msg) as info:
        ExperimentConfig.from_json(text)
    assert str(info.value).startswith(f"line {line}:")


def test_code_validation_rejects_low_mu():
    with pytest.raises(ValueError):
        build_code({"family": "adaptive-place", "n": 4, "mu": 0.9})


SMALL = dict(presets=["place-adaptive", "grid-adaptive-balanced"],
             rho_grid=[0.01, 0.05, 0.1, 0.25, 0.5], t_grid=np.geomspace(0.001, 20, 60).tolist(),
             trials=300, master_seed=3)


def test_figure_data_layout():
    data = figure_data(ExperimentConfig(**SMALL))
    assert len(data.left) == 10 and len(data.right) == 10
    assert [r[0] for r in data.left[:5]] == ["place-adaptive"] * 5
    for name, rho, d, inv, tmin in data.left:
        assert d >= 1 and inv == pytest.approx(1 / d)
    # the proxy is a running max from the right: non-increasing in rho
    prox = [r[2] for r in data.right[:5]]
    assert all(b <= a for a, b in zip(prox, prox[1:]))
    assert data.left_csv().splitlines()[0] == "code,rho_prime,delta,inv_delta,empirical_tmin"
    assert data.right_csv().splitlines()[0] == "code,rho,proxy_T"


def test_figure_data_worker_invariance():
    cfg = ExperimentConfig(**SMALL)
    a, b = figure_data(cfg, workers=1), figure_data(cfg, workers=3)
    assert a.left_csv() == b.left_csv() and a.right_csv() == b.right_csv()


def test_unreached_alpha_is_inf():
    data = FigureData([("place-adaptive", 0.1, 2, 0.5, None), ("place-adaptive", 0.2, 4, 0.25, 0.5)],
                      [])
    assert data.left_csv().splitlines()[1].endswith(",inf")


def _synthetic(k=0.6, place_c=0.05, flat=0.1):
    left, right = [], []
    for name in FIGURE_PRESETS:
        for d in (1, 2, 5, 10, 20, 50):
            left.append((name, 0.1, d, 1 / d, k / d))
    for rho in np.geomspace(2.0 ** -21, 0.5, 41):
        right.append(("place-adaptive", float(rho), place_c / rho))
        right.append(("grid-adaptive-balanced", float(rho), flat))
        right.append(("grid-random-balanced", float(rho), flat * (1 + rho)))
    return FigureData(left, right)


def test_figure_checks_pass_on_ideal_shapes():
    checks = figure_checks(_synthetic())
    assert all(c["passed"] for c in checks)
    names = [c["name"] for c in checks]
    assert names[0].startswith("left: pooled")
    assert sum("slope of" in n for n in names) == 5
    assert any("place-adaptive within" in n for n in names)
    assert sum("max/min" in n for n in names) == 2


def test_figure_checks_catch_wrong_shapes():
    data = _synthetic()
    data.left[:6] = [("place-adaptive", 0.1, d, 1 / d, 0.2) for d in (1, 2, 5, 10, 20, 50)]
    data.right[:] = [(n, r, 1 / r if n != "place-adaptive" else p) for n, r, p in data.right]
    failed = {c["name"] for c in figure_checks(data) if not c["passed"]}
    assert "left: slope of place-adaptive vs pooled" in failed
    assert "right: grid-adaptive-balanced max/min on [2^-19, 0.5]" in failed


def test_widened_tolerances():
    t = Tolerances.widened(3)
    assert t.r2 == pytest.approx(0.85) and t.slope_rel == pytest.approx(0.45)
    assert t.inverse_factor == 12 and t.flat_ratio == 12


def test_run_figure_writes_files(tmp_path):
    res = run_figure(ExperimentConfig(**SMALL), str(tmp_path), svg=True)
    for key in ("left", "right", "checks", "left_svg", "right_svg"):
        assert (tmp_path / res["paths"][key].split("/")[-1]).exists()
    checks = json.loads((tmp_path / "checks.json").read_text())
    assert {c["name"] for c in checks} == {c["name"] for c in res["checks"]}
    assert (tmp_path / "left.svg").read_text().startswith("<svg")


def test_verify_bounds_all_pass():
    report = verify_bounds(seed=0, trials=2000)
    assert len(report) > 100
    assert [c for c in report if not c["passed"]] == []
    kinds = {c["name"] for c in report}
    assert {"dyadic code time is 1", "impossibility below 2^-n", "error sandwich",
            "Poisson tail bounds", "random arc covers a pair"} <= kinds


def test_dumps_report_handles_inf():
    text = dumps_report({"a": math.inf, "b": [np.float64(1.5), np.int64(2)], "c": np.bool_(True)})
    assert json.loads(text) == {"a": "inf", "b": [1.5, 2], "c": True}


def test_svg_chart_log_axes():
    svg = svg_chart({"a": [(0.1, 1.0), (0.5, 0.2)]}, "x", "y", logx=True, logy=True)
    assert svg.count("<polyline") == 1 and svg.rstrip().endswith("</svg>")


def test_default_t_grid_is_log_spaced():
    g = np.array(default_t_grid())
    np.testing.assert_allclose(np.diff(np.log(g)), np.log(20 / 0.001) / 199)
