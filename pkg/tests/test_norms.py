import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz.norms import (
    DUAL_GRID_MAX_SUPPORT,
    gauge_norm,
    indicator_norm,
    log_indicator_norm,
    modular,
    modular_convergence_check,
    norm_report,
    orlicz_norm_amemiya,
    orlicz_norm_dual_grid,
)
from orlicz.optimize import bracket_minimum, golden_section
from orlicz.space import AtomicMeasureSpace, SimpleFunction
from orlicz.young import YoungFunction

X2 = YoungFunction.power(2)
FAMILIES = [YoungFunction.power(1.5), X2, YoungFunction.power_over_p(3), YoungFunction.exp_minus_one(),
            YoungFunction.p_log(1.5), YoungFunction.table([1.0, 2.0, 4.0], [1.0, 3.0, 9.0])]
IDS = ["x^1.5", "x^2", "x^3/3", "exp-1", "xlog", "table"]


def weighted(weights):
    return AtomicMeasureSpace("table", weights=weights)


SPACE = weighted({0: 1.0, 1: 3.0, 2: 4.0, 3: 0.5, 4: 2.0, 5: 1.0, 6: 7.0, 7: 0.25})

coeffs = st.floats(-100.0, 100.0, allow_nan=False).filter(lambda v: abs(v) > 1e-3)
functions = st.dictionaries(st.integers(0, 7), coeffs, min_size=1, max_size=6).map(SimpleFunction)


def test_modular_examples(backend):
    sp = weighted({0: 1.0, 1: 3.0})
    assert modular(sp, X2, SimpleFunction({0: 2.0, 1: 1.0})) == 7.0
    assert modular(sp, X2, SimpleFunction.zero()) == 0.0
    assert modular(weighted({0: 4.0}), X2, SimpleFunction({0: 3.0})) == 36.0


def test_gauge_examples(backend):
    sp = weighted({0: 4.0, 1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0})
    assert gauge_norm(sp, X2, SimpleFunction({0: 3.0})) == pytest.approx(6.0, rel=1e-12)
    assert gauge_norm(sp, X2, SimpleFunction.zero()) == 0.0
    # mu(F) = 4, so N(chi_F) = 1 / Phi^{-1}(1/4) = 2
    assert gauge_norm(sp, X2, SimpleFunction.indicator([1, 2, 3, 4])) == pytest.approx(2.0, rel=1e-12)


def test_gauge_residual(backend):
    rep = norm_report(SPACE, X2, SimpleFunction({0: 3.0, 4: -1.5}))
    assert 1 - 1e-10 <= rep.residual <= 1.0 + 1e-12
    assert rep.iterations > 0


def test_indicator_examples():
    sp = weighted({0: 4.0, 1: 1.0, 2: 8.0})
    assert indicator_norm(sp, X2, [0]) == pytest.approx(2.0)
    assert indicator_norm(sp, X2, [1]) == 1.0
    assert indicator_norm(sp, YoungFunction.power(3), [2]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        indicator_norm(sp, X2, [])


@pytest.mark.parametrize("phi", FAMILIES, ids=IDS)
def test_indicator_matches_gauge(phi, backend):
    for F in ([0], [1, 2], [3, 5, 7], list(range(8))):
        g = gauge_norm(SPACE, phi, SimpleFunction.indicator(F))
        assert indicator_norm(SPACE, phi, F) == pytest.approx(g, rel=1e-10)


@pytest.mark.parametrize("phi", FAMILIES, ids=IDS)
def test_log_indicator_norm(phi):
    for mu in (1e-6, 0.3, 1.0, 17.0, 1e6):
        assert math.exp(log_indicator_norm(phi, math.log(mu))) == pytest.approx(1 / phi.inverse(1 / mu),
                                                                                 rel=1e-9)


def test_amemiya_examples(backend):
    sp = weighted({0: 1.0, 1: 4.0})
    assert orlicz_norm_amemiya(sp, X2, SimpleFunction.indicator([0])) == pytest.approx(2.0, rel=1e-12)
    assert orlicz_norm_amemiya(sp, X2, SimpleFunction.zero()) == 0.0
    assert orlicz_norm_amemiya(sp, X2, SimpleFunction.indicator([1])) == pytest.approx(4.0, rel=1e-12)


def test_dual_grid_examples():
    sp = weighted({0: 1.0})
    assert orlicz_norm_dual_grid(sp, X2, SimpleFunction.indicator([0])) == pytest.approx(2.0, rel=1e-9)
    assert orlicz_norm_dual_grid(sp, X2, SimpleFunction.zero()) == 0.0


def test_dual_grid_refuses_large_support():
    f = SimpleFunction({i: 1.0 for i in range(DUAL_GRID_MAX_SUPPORT + 1)})
    with pytest.raises(ValueError):
        orlicz_norm_dual_grid(SPACE, X2, f)


def test_dual_grid_support_three(rng):
    for _ in range(10):
        atoms = rng.choice(8, size=3, replace=False)
        f = SimpleFunction(dict(zip(atoms.tolist(), rng.uniform(-5, 5, 3).tolist())))
        am = orlicz_norm_amemiya(SPACE, X2, f)
        dg = orlicz_norm_dual_grid(SPACE, X2, f)
        assert am * 0.98 <= dg <= am * (1 + 1e-9)


@pytest.mark.parametrize("phi", FAMILIES, ids=IDS)
@given(f=functions)
@settings(max_examples=40, deadline=None)
def test_sandwich(phi, f):
    g = gauge_norm(SPACE, phi, f)
    a = orlicz_norm_amemiya(SPACE, phi, f)
    assert g <= a * (1 + 1e-12) and a <= 2 * g + 1e-9


@given(f=functions, alpha=st.floats(-1e3, 1e3).filter(lambda v: abs(v) > 1e-6))
@settings(max_examples=100, deadline=None)
def test_homogeneity(f, alpha):
    for phi in (X2, YoungFunction.p_log(2)):
        assert gauge_norm(SPACE, phi, alpha * f) == pytest.approx(abs(alpha) * gauge_norm(SPACE, phi, f), rel=1e-10)


@given(f=functions, g=functions)
@settings(max_examples=100, deadline=None)
def test_triangle(f, g):
    for phi in (X2, YoungFunction.exp_minus_one()):
        assert gauge_norm(SPACE, phi, f + g) <= gauge_norm(SPACE, phi, f) + gauge_norm(SPACE, phi, g) + 1e-9


@given(f=functions, p=st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.5]))
@settings(max_examples=100, deadline=None)
def test_lp_consistency(f, p):
    w = SPACE.weights(f.atoms)
    lp = float(np.sum(w * np.abs(f.values) ** p) ** (1 / p))
    assert gauge_norm(SPACE, YoungFunction.power(p), f) == pytest.approx(lp, rel=1e-10)


@given(d=st.dictionaries(st.integers(0, 7), coeffs, min_size=2, max_size=6))
@settings(max_examples=60, deadline=None)
def test_disjoint_superadditivity(d):
    items = sorted(d.items())
    half = len(items) // 2
    f, g = SimpleFunction(dict(items[:half])), SimpleFunction(dict(items[half:]))
    af, ag = orlicz_norm_amemiya(SPACE, X2, f), orlicz_norm_amemiya(SPACE, X2, g)
    total = orlicz_norm_amemiya(SPACE, X2, f + g)
    assert total >= max(af, ag) * (1 - 1e-12) >= 0.5 * (af + ag) * (1 - 1e-12)


def test_convergence_check_examples():
    sp = AtomicMeasureSpace("constant", c=1.0)
    f = SimpleFunction.indicator([0])
    seq = [SimpleFunction({0: 1 + 1 / n}) for n in range(1, 200)]
    rep = modular_convergence_check(sp, X2, seq, f)
    assert rep.norm_to_zero and rep.modular_converges and rep.consistent
    assert rep.norm_deviation[-1] < 1e-2 and rep.modular_deviation[-1] < 1e-1

    rep = modular_convergence_check(sp, X2, [f] * 5, f)
    assert max(rep.norm_deviation) == 0.0 and max(rep.modular_deviation) == 0.0 and rep.consistent

    moving = [SimpleFunction.indicator([n]) for n in range(1, 30)]
    rep = modular_convergence_check(sp, X2, moving, SimpleFunction.zero())
    assert not rep.norm_to_zero and not rep.modular_converges
    assert all(v == pytest.approx(1.0) for v in rep.norm_deviation)
    assert rep.consistent


def test_golden_section_quadratic():
    a, b, c, fb, _ = bracket_minimum(lambda x: (x - 3.3) ** 2, 0.0)
    assert a < b < c
    x, fx, _ = golden_section(lambda x: (x - 3.3) ** 2, a, c)
    assert x == pytest.approx(3.3, abs=1e-6)


def test_bracket_monotone_objective_stops_at_last_point():
    a, b, c, fb, evals = bracket_minimum(lambda x: -x, 0.0, max_steps=20)
    assert b == max(x for x, _ in evals[:-1]) and fb == -b
    assert len(evals) == 3 + 20
