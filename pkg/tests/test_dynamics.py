import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import geometric, make_system, two_sided
from orlicz.dynamics import (
    BOUNDED,
    BOUND_UNDETERMINED,
    UNBOUNDED,
    boundedness_check,
    compose_power,
    expansivity_probe,
    normalized_indicator_orbit,
    orbit_gauge_norms,
)
from orlicz.norms import gauge_norm, indicator_norm, modular
from orlicz.space import AtomicMeasureSpace, SimpleFunction
from orlicz.transform import AtomTransformation
from orlicz.verdict import PreconditionError, WindowEscape
from orlicz.young import YoungFunction


def test_boundedness_examples():
    cert = geometric(0.5).boundedness
    assert cert.status == BOUNDED and cert.c == 2.0
    sysm = make_system(AtomicMeasureSpace("geometric", r=0.5), transform=AtomTransformation.identity())
    assert sysm.boundedness.status == BOUNDED and sysm.boundedness.c == 1.0
    cert = two_sided().boundedness
    assert cert.status == BOUNDED and cert.c == 2.0 and cert.c_inverse == 2.0


def test_unbounded_block_weights():
    sp = AtomicMeasureSpace("block_geometric", ratios=[2.0, 0.5])
    assert boundedness_check(sp, AtomTransformation.shift(1)).status == UNBOUNDED
    assert boundedness_check(sp, AtomTransformation.shift(2)).status == BOUNDED
    sysm = make_system(sp, step=1)
    with pytest.raises(PreconditionError):
        sysm.require_bounded()


def test_table_without_tail_is_undetermined():
    sp = AtomicMeasureSpace("table", weights={k: 2.0 ** -k for k in range(-10, 11)})
    assert boundedness_check(sp, AtomTransformation.shift(1)).status == BOUND_UNDETERMINED


def test_reject_transform_is_undetermined():
    tr = AtomTransformation("table", table={0: 1, 1: 0})
    cert = boundedness_check(AtomicMeasureSpace("constant"), tr)
    assert cert.status == BOUND_UNDETERMINED


def test_certificate_bounds_every_window_atom():
    sysm = make_system(AtomicMeasureSpace("block_geometric", ratios=[0.5, 0.5], scales=[1.0, 3.0]), step=1)
    cert = sysm.boundedness
    for a in range(-50, 51):
        assert sysm.space.weight(a - 1) <= cert.c * sysm.space.weight(a) * (1 + 1e-12)


def test_compose_power_examples():
    sysm = geometric(0.5)
    f = SimpleFunction.indicator([0])
    assert compose_power(sysm, f, 2).as_dict() == {-2: 1.0}
    assert compose_power(sysm, f, 0) is f
    assert compose_power(sysm, f, -1).as_dict() == {1: 1.0}


def test_compose_power_window_escape():
    sysm = geometric(0.5, window=(-5, 5))
    with pytest.raises(WindowEscape) as exc:
        compose_power(sysm, SimpleFunction.indicator([0]), 6)
    assert exc.value.atom == -6


@given(st.integers(-20, 20), st.integers(-20, 20))
@settings(max_examples=100)
def test_compose_power_composes(a, b):
    sysm = make_system(AtomicMeasureSpace("geometric", r=0.5),
                       transform=AtomTransformation("table", step=1, table={-1: 2, 0: 0, 1: 1},
                                                    off_window="extend_by_shift"))
    f = SimpleFunction({0: 2.0, 3: -1.0})
    assert compose_power(sysm, compose_power(sysm, f, a), b) == compose_power(sysm, f, a + b)


def test_orbit_norms_closed_form(backend):
    sysm = geometric(0.5)
    out = orbit_gauge_norms(sysm, SimpleFunction.indicator([0]), range(0, 20))
    for n, v in out:
        assert v == pytest.approx(2 ** (n / 2), rel=1e-12)
    sysm = geometric(2.0)
    for n, v in orbit_gauge_norms(sysm, SimpleFunction.indicator([0]), range(0, 20)):
        assert v == pytest.approx(2 ** (-n / 2), rel=1e-12)
    ident = make_system(AtomicMeasureSpace("geometric", r=0.5), transform=AtomTransformation.identity())
    vals = [v for _, v in orbit_gauge_norms(ident, SimpleFunction({0: 1.0, 3: 2.0}), range(10))]
    assert max(vals) == min(vals)


def test_orbit_norms_match_indicator_norm():
    sysm = two_sided(p=3)
    F = [0, 2, 5]
    for n, v in orbit_gauge_norms(sysm, SimpleFunction.indicator(F), range(-10, 11)):
        moved = sysm.transform.image(F, -n).tolist()
        assert v == pytest.approx(indicator_norm(sysm.space, sysm.phi, moved), rel=1e-10)


def test_modular_transfer_identity(rng):
    sysm = make_system(AtomicMeasureSpace("two_sided_exp", base=1.5), YoungFunction.p_log(2))
    for _ in range(20):
        atoms = rng.choice(np.arange(-30, 31), size=4, replace=False)
        f = SimpleFunction(dict(zip(atoms.tolist(), rng.normal(size=4).tolist())))
        n = int(rng.integers(-10, 11))
        direct = modular(sysm.space, sysm.phi, compose_power(sysm, f, n))
        moved = sysm.transform.power(f.atoms, -n)
        transfer = float(np.sum(sysm.space.weights(moved) * sysm.phi(np.abs(f.values))))
        assert direct == pytest.approx(transfer, rel=1e-13)


@pytest.mark.parametrize("phi", [YoungFunction.power(2), YoungFunction.exp_minus_one(), YoungFunction.p_log(1.5)])
def test_norm_bound_from_certificate(phi, rng):
    sysm = make_system(AtomicMeasureSpace("two_sided_exp", base=2.0), phi)
    c = max(1.0, sysm.boundedness.c)
    for _ in range(30):
        atoms = rng.choice(np.arange(-20, 21), size=3, replace=False)
        f = SimpleFunction(dict(zip(atoms.tolist(), rng.uniform(-3, 3, 3).tolist())))
        assert gauge_norm(sysm.space, phi, compose_power(sysm, f, 1)) <= c * gauge_norm(sysm.space, phi, f) + 1e-9


def test_probe_examples(backend):
    rep = expansivity_probe(geometric(0.5), samples=16, horizon=20, threshold=100.0)
    assert rep.all_forward_exceed
    ident = make_system(AtomicMeasureSpace("geometric", r=0.5), transform=AtomTransformation.identity())
    rep = expansivity_probe(ident, samples=16, horizon=20, threshold=1.5)
    assert rep.forward_exceeded == 0 and rep.two_sided_exceeded == 0
    const = make_system(AtomicMeasureSpace("constant"))
    rep = expansivity_probe(const, samples=16, horizon=20, threshold=1.5)
    np.testing.assert_allclose(rep.forward_max, 1.0, rtol=1e-12)
    np.testing.assert_allclose(rep.backward_max, 1.0, rtol=1e-12)


def test_probe_is_reproducible():
    a = expansivity_probe(geometric(2.0), samples=8, seed=11, horizon=10)
    b = expansivity_probe(geometric(2.0), samples=8, seed=11, horizon=10)
    assert a.to_dict() == b.to_dict()


def test_normalized_indicator_orbit():
    vals = normalized_indicator_orbit(geometric(0.5), 3, 10)
    np.testing.assert_allclose(vals, 2 ** (np.arange(1, 11) / 2), rtol=1e-12)
