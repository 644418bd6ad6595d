import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from placegrid.codes import (
    CellBudgetError,
    active_set,
    balanced_spec,
    breakpoint_array,
    breakpoints,
    cell_partition,
    delta,
    dumps,
    loads,
    make_adaptive_place,
    make_balanced_grid,
    make_extreme_dyadic,
    make_general,
    make_grid,
    make_random_place,
    make_uniform_place,
)
from placegrid.geometry import CirclePoint, dyadic_digits

unit = st.floats(0, 1, exclude_max=True, allow_nan=False)


def test_uniform_place_group_sizes():
    code = make_uniform_place(10, 3)
    starts = [nrn.field.start.theta for nrn in code.neurons]
    assert starts.count(0.0) == 3 and starts.count(1 / 3) == 3 and starts.count(2 / 3) == 4
    assert code.n == 10 and code.m == 1


def test_uniform_place_rejects_too_many_groups():
    with pytest.raises(ValueError):
        make_uniform_place(3, 4)


def test_one_uniform_code_breakpoints():
    assert_allclose(breakpoint_array(make_uniform_place(4, 4)), [0, 0.25, 0.5, 0.75])


def test_adaptive_place_fields():
    code = make_adaptive_place(4)
    f = code.neurons[1].field
    assert (f.start.theta, f.end.theta) == (0.25, 0.75)
    one = make_adaptive_place(1).neurons[0].field
    assert (one.start.theta, one.end.theta) == (0.5, 0.0)
    assert_allclose(breakpoint_array(code), np.arange(8) / 8)


@pytest.mark.parametrize("code, s, expected", [
    (make_adaptive_place(4), 0.3, {0, 1}),
    (make_extreme_dyadic(3), 0.625, {1}),
    (make_extreme_dyadic(6), 0.0, set(range(6))),
    (make_uniform_place(4, 2), 0.0, {0, 1}),
])
def test_active_set_examples(code, s, expected):
    assert active_set(code, CirclePoint(s)) == expected


def test_active_set_can_be_empty():
    code = make_general([[(0.1, 0.2)], [(0.3, 0.35)]])
    assert active_set(code, 0.5) == frozenset()


def test_adaptive_place_prefix_structure():
    # neurons 1..k fire (1-based) when k/2n <= theta < (k+1)/2n, the rest of the half-circle wraps
    n = 6
    code = make_adaptive_place(n)
    for k in range(1, n):
        s = (k + 0.5) / (2 * n)
        assert active_set(code, s) == set(range(k))


@pytest.mark.parametrize("code, s1, s2, expected", [
    (make_uniform_place(100, 10), 0.0, 0.5, 10),
    (make_uniform_place(100, 10), 0.37, 0.37, 0),
    (make_extreme_dyadic(3), 0.0, 0.5, 1),
])
def test_delta_examples(code, s1, s2, expected):
    assert delta(code, s1, s2).delta == expected


def test_adaptive_place_near_and_antipodal_pairs():
    n = 8
    code = make_adaptive_place(n)
    near = delta(code, 0.5 / (2 * n), 1.5 / (2 * n)).delta
    far = delta(code, 0.5 / (2 * n), 0.5 / (2 * n) + 0.5).delta
    assert near == 1
    assert far == n


@settings(max_examples=200, deadline=None)
@given(unit, unit, st.sampled_from(["adaptive", "random"]), st.integers(0, 5))
def test_delta_report_invariants(s1, s2, inner, seed):
    code = make_grid([(3, 1.0), (4, 0.5), (2, 0.125), (5, 1 / 16)], inner, seed=seed)
    r = delta(code, s1, s2)
    assert r.delta == max(r.only_in_1, r.only_in_2)
    assert sum(r.per_module) / 2 <= r.delta <= sum(r.per_module)
    assert delta(code, s2, s1).delta == r.delta
    same = active_set(code, s1) == active_set(code, s2)
    assert (r.delta == 0) == same


def test_per_module_sandwich_on_many_pairs():
    code = make_balanced_grid(100, 20, "random", seed=3)
    rng = np.random.default_rng(0)
    for a, b in rng.random((2000, 2)):
        r = delta(code, a, b)
        s = sum(r.per_module)
        assert s / 2 <= r.delta <= s


def test_grid_adaptive_inner_field():
    code = make_grid([(2, 1.0), (5, 0.5)])
    f = code.neurons[2].field
    assert f.radius == 0.5
    assert_allclose((f.start.theta, f.end.theta), (0.05, 0.3))


def test_single_module_grid_is_place_code():
    g = make_grid([(7, 1.0)])
    p = make_adaptive_place(7)
    th = np.linspace(0, 1, 997, endpoint=False)
    assert np.array_equal(g.active_mask(th), p.active_mask(th))


@pytest.mark.parametrize("spec", [
    [(2, 1.0), (2, 0.4)],
    [(2, 1.0), (2, 1 / 3), (2, 0.25)],
    [(2, 1.0), (2, 0.25), (2, 0.5)],
])
def test_incoherent_scales_rejected(spec):
    with pytest.raises(ValueError, match="incoherent scales|integer"):
        make_grid(spec)


@pytest.mark.parametrize("spec", [[(2, 0.5)], [(0, 1.0)], [(2, 1.0), (2, 0.3)]])
def test_bad_grid_specs_rejected(spec):
    with pytest.raises(ValueError):
        make_grid(spec)


def test_mu_must_exceed_one():
    with pytest.raises(ValueError):
        make_adaptive_place(3, mu=1.0)
    with pytest.raises(ValueError):
        make_adaptive_place(3, mu=0.5)


def test_balanced_spec_sizes():
    spec = balanced_spec(100, 7)
    assert [n for n, _ in spec] == [14] * 6 + [16]
    assert [lam for _, lam in spec] == [2.0 ** -i for i in range(7)]


def test_extreme_dyadic_precision_cap():
    make_extreme_dyadic(52)
    with pytest.raises(ValueError, match="precision exhausted"):
        make_extreme_dyadic(53)


@pytest.mark.parametrize("n", [1, 3, 8, 20])
def test_extreme_dyadic_fires_on_zero_digits(n):
    code = make_extreme_dyadic(n)
    for x in np.random.default_rng(n).random(300).tolist() + [0.0, 0.5, 0.75]:
        expected = {i for i, d in enumerate(dyadic_digits(x, n)) if d == 0}
        assert active_set(code, x) == expected


@pytest.mark.parametrize("n", [1, 4, 8, 12])
def test_extreme_dyadic_has_2_to_n_cells(n):
    part = cell_partition(make_extreme_dyadic(n))
    assert part.size == 2**n
    assert_allclose(part.lengths, 2.0 ** -n)


def test_random_place_reproducible():
    a = make_random_place(20, seed=11)
    b = make_random_place(20, seed=11)
    c = make_random_place(20, seed=12)
    assert dumps(a) == dumps(b)
    assert dumps(a) != dumps(c)


@pytest.mark.parametrize("code", [
    make_uniform_place(10, 3),
    make_adaptive_place(9),
    make_random_place(12, seed=1),
    make_balanced_grid(12, 3, "random", seed=2),
    make_grid([(3, 1.0), (2, 1 / 3), (4, 1 / 15)]),
    make_general([[(0.1, 0.2), (0.5, 0.9)], [(0.3, 0.6)], []]),
])
def test_active_set_constant_on_cells(code):
    part = cell_partition(code)
    rel = np.array([0.05, 0.3, 0.5, 0.7, 0.95])
    pts = (part.starts[:, None] + part.lengths[:, None] * rel[None, :]) % 1.0
    masks = code.active_mask(pts.ravel()).reshape(part.size, len(rel), code.n)
    assert (masks == masks[:, :1, :]).all()
    # distinct active sets are bounded by the cell count and by 2^n
    distinct = {m.tobytes() for m in masks[:, 0, :]}
    assert len(distinct) <= min(part.size, 2**code.n)


@pytest.mark.parametrize("code", [
    make_uniform_place(10, 3),
    make_balanced_grid(12, 3),
    make_extreme_dyadic(10),
    make_random_place(30, seed=4),
    make_general([[(0.1, 0.2), (0.5, 0.9)], [(0.3, 0.6)]]),
])
def test_json_round_trip(code):
    text = dumps(code)
    back = loads(text)
    assert back == code
    assert dumps(back) == text
    doc = json.loads(text)
    assert set(doc) == {"mu", "modules"}


def test_json_angles_are_module_scale():
    doc = json.loads(dumps(make_grid([(1, 1.0), (1, 0.25)])))
    assert doc["modules"][1]["lambda"] == 0.25
    assert doc["modules"][1]["fields"] == [[0.125, 0.0]]


def test_breakpoint_cap():
    code = make_balanced_grid(100, 20)
    with pytest.raises(CellBudgetError, match="cell budget exceeded"):
        breakpoints(code)
    assert len(breakpoints(make_balanced_grid(20, 4))) > 0


def test_general_code_union_of_arcs():
    code = make_general([[(0.1, 0.2), (0.5, 0.6)]])
    assert code.n == 1
    assert [active_set(code, s) for s in (0.15, 0.3, 0.55)] == [{0}, set(), {0}]
