import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abmomentum.core_math import NATURAL, CirclePath, QuadratureSpec, curl_fd, divergence_fd, gradient_fd, line_integral, norm
from abmomentum.errors import OnSurface, SamePoint, TooCloseToFilament, TooCloseToWire, ZeroSeparation
from abmomentum.fields import (
    B_numeric,
    FieldSample,
    analytic_A_field,
    biot_savart,
    coulomb_E,
    coulomb_phi,
    dipole_A,
    dipole_B,
    sample,
    solenoid_A_analytic,
    solenoid_B_analytic,
    vector_potential_numeric,
    wire_A_analytic,
    wire_B_analytic,
)
from abmomentum.sources import CircularLoop, PointCharge, Solenoid, StraightWire, dipole_moment, discretize, discretize_solenoid

UNIT = Solenoid([0, 0, 0], 1.0, 1.0, 100.0, 1.0)


def test_solenoid_B_inside_and_outside():
    np.testing.assert_allclose(solenoid_B_analytic(UNIT, [0.5, 0, 0], NATURAL), [0, 0, 4 * np.pi], rtol=1e-15)
    assert np.all(solenoid_B_analytic(UNIT, [2.0, 0, 0], NATURAL) == 0)
    off = Solenoid([0, 0, 0], 1.0, 1.0, 100.0, 0.0)
    assert np.all(solenoid_B_analytic(off, [[0.5, 0, 0], [3, 0, 0]], NATURAL) == 0)
    with pytest.raises(OnSurface):
        solenoid_B_analytic(UNIT, [1.0, 0, 0], NATURAL)


def test_solenoid_A_branches():
    inside = solenoid_A_analytic(UNIT, [1.0 - 1e-15, 0, 0], NATURAL)
    outside = solenoid_A_analytic(UNIT, [1.0, 0, 0], NATURAL)
    assert norm(inside) == pytest.approx(2 * np.pi, rel=1e-14)
    assert norm(outside) == pytest.approx(2 * np.pi, rel=1e-14)
    np.testing.assert_allclose(solenoid_A_analytic(UNIT, [2.0, 0, 0], NATURAL), [0, np.pi, 0], rtol=1e-15)
    assert np.all(solenoid_A_analytic(UNIT, [0, 0, 3.0], NATURAL) == 0)
    small = [norm(solenoid_A_analytic(UNIT, [R, 0, 0], NATURAL)) / R for R in (1e-3, 1e-6)]
    assert small[0] == pytest.approx(small[1], rel=1e-12)


@pytest.mark.parametrize("R", [0.5, 2.0])
def test_stokes_for_analytic_solenoid(R):
    circulation = line_integral(analytic_A_field(UNIT, NATURAL), CirclePath([0, 0, 0], R), QuadratureSpec(rel_tol=1e-14))
    flux = np.pi * min(R, 1.0) ** 2 * UNIT.interior_field(NATURAL)
    assert circulation == pytest.approx(flux, rel=1e-9)


def test_wire_fields():
    wire = StraightWire([0, 0, 0], [0, 0, 1], 1.0)
    assert norm(wire_B_analytic(wire, [2, 0, 0], NATURAL)) == pytest.approx(1.0)
    pts = np.random.default_rng(0).normal(size=(50, 3))
    assert np.all(wire_B_analytic(wire, pts, NATURAL)[:, 2] == 0)
    b1, b2 = norm(wire_B_analytic(wire, [[1, 1, 0], [2, 2, 0]], NATURAL))
    assert b2 == pytest.approx(b1 / 2, rel=1e-15)
    with pytest.raises(TooCloseToWire):
        wire_B_analytic(wire, [0, 0, 5], NATURAL)
    np.testing.assert_allclose(wire_A_analytic(wire, [1, 0, 0], NATURAL), 0.0)
    # B = curl A for the wire pair
    np.testing.assert_allclose(curl_fd(lambda p: wire_A_analytic(wire, p, NATURAL), [1.5, 0.5, 0], 1e-5),
                               wire_B_analytic(wire, [1.5, 0.5, 0], NATURAL), rtol=1e-8)


def test_coulomb_examples():
    q = PointCharge(1.0, [0, 0, 0])
    np.testing.assert_array_equal(coulomb_E(q, [1, 0, 0]), [1, 0, 0])
    np.testing.assert_array_equal(coulomb_E(q, [2, 0, 0]), [0.25, 0, 0])
    assert coulomb_phi(q, [0, 1, 0]) == 1.0
    assert coulomb_phi(PointCharge(2.0, [0, 0, 0]), [0, 0, 4]) == 0.5
    with pytest.raises(SamePoint):
        coulomb_E(q, [0, 0, 0])


@given(st.tuples(*[st.floats(-5, 5)] * 3), st.tuples(*[st.floats(-5, 5)] * 3))
def test_coulomb_sign_convention(pos, x):
    pos, x = np.array(pos), np.array(x)
    d = norm(pos - x)
    if d < 1e-3:
        return
    Q = 1.7
    R_hat = (pos - x) / d
    np.testing.assert_allclose(coulomb_E(PointCharge(Q, pos), x), -Q * R_hat / d**2, rtol=1e-12)


def test_coulomb_E_is_minus_grad_phi():
    q = PointCharge(1.3, [0.1, -0.2, 0.3])
    x = np.array([1.0, 0.5, -0.4])
    grad = gradient_fd(lambda p: coulomb_phi(q, p), x, 1e-5)
    np.testing.assert_allclose(-grad, coulomb_E(q, x), rtol=1e-8)


def test_dipole_examples():
    m = np.array([0.0, 0.0, 1.0])
    assert np.all(dipole_A(m, [0, 0, 3.0]) == 0)
    np.testing.assert_allclose(dipole_A(m, [2.0, 0, 0]), [0, 0.25, 0])
    a1, a2 = norm(dipole_A(m, [[1.0, 1.0, 0], [2.0, 2.0, 0]]))
    assert a2 == pytest.approx(a1 / 4)
    with pytest.raises(ZeroSeparation):
        dipole_B(m, [0, 0, 0])


def test_numeric_A_antisymmetric_across_loop_axis():
    elements = discretize(CircularLoop([0, 0, 0], 1.0, 1.0), 64)
    a1, a2 = vector_potential_numeric(elements, [[3.0, 0.5, 0.2], [-3.0, -0.5, 0.2]], NATURAL)
    np.testing.assert_allclose(a1, -a2, rtol=1e-12, atol=1e-12 * norm(a1))


def test_numeric_A_matches_dipole_far_away():
    loop = CircularLoop([0, 0, 0], 0.01, 1.0)
    x0 = np.array([6.0, 8.0, 0.0])
    got = vector_potential_numeric(discretize(loop, 720), x0, NATURAL)
    want = dipole_A(dipole_moment(loop, NATURAL), x0)
    assert norm(got - want) / norm(want) < 1e-4


def test_numeric_A_error_is_second_order_in_element_count():
    loop = CircularLoop([0, 0, 0], 1e-3, 1.0)
    x0 = np.array([1.0, 0, 0])
    want = dipole_A(dipole_moment(loop, NATURAL), x0)
    ns = np.array([16, 32, 64, 128])
    errs = [norm(vector_potential_numeric(discretize(loop, n), x0, NATURAL) - want) / norm(want) for n in ns]
    assert np.all(np.diff(errs) < 0)
    slope = np.polyfit(np.log(1 / ns), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.3)


def test_stacked_solenoid_A_matches_infinite_solenoid():
    s = Solenoid([0, 0, 0], 0.5, 200.0, 200.0, 1.0)
    got = vector_potential_numeric(discretize_solenoid(s, 128), [1.0, 0, 0], NATURAL)
    want = solenoid_A_analytic(s, [1.0, 0, 0], NATURAL)
    assert norm(got - want) / norm(want) < 1e-3


def test_loop_center_field_matches_textbook():
    a, I = 0.7, 2.0
    elements = discretize(CircularLoop([0, 0, 0], a, I), 1440)
    B = B_numeric(elements, [0, 0, 0], NATURAL)
    assert norm(B) == pytest.approx(2 * np.pi * I / a, rel=1e-4)
    assert relative_difference_ok(B, biot_savart(elements, [0, 0, 0], NATURAL), 1e-4)


def relative_difference_ok(a, b, tol):
    return norm(a - b) <= tol * max(norm(a), norm(b))


@settings(max_examples=15, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_curl_of_numeric_A_agrees_with_biot_savart(x, y, z):
    elements = discretize(CircularLoop([0, 0, 0], 1.0, 1.0, normal=[0, 1, 1]), 64)
    p = np.array([x, y, z])
    if np.min(norm(elements.positions - p)) < 10 * elements.min_dl:
        return
    assert relative_difference_ok(B_numeric(elements, p, NATURAL), biot_savart(elements, p, NATURAL), 1e-4)


def test_numeric_B_is_divergence_free():
    elements = discretize(CircularLoop([0, 0, 0], 1.0, 1.0), 64)
    for p in ([0.3, 0.2, 0.4], [1.5, 0.0, 0.5], [0, 0, 2.0]):
        div = divergence_fd(lambda q: biot_savart(elements, q, NATURAL), p, 1e-4)
        assert abs(div) <= 1e-6 * norm(biot_savart(elements, p, NATURAL))


def test_guard_band_on_filament():
    elements = discretize(CircularLoop([0, 0, 0], 1.0, 1.0), 16)
    with pytest.raises(TooCloseToFilament):
        vector_potential_numeric(elements, elements.positions[3], NATURAL)
    with pytest.raises(TooCloseToFilament):
        B_numeric(elements, elements.positions[3] + 1e-9, NATURAL)


def test_field_sample():
    s = sample([2, 0, 0], [PointCharge(1.0, [0, 0, 0])], analytic_A_field(UNIT, NATURAL),
               lambda p: solenoid_B_analytic(UNIT, p, NATURAL))
    assert isinstance(s, FieldSample)
    np.testing.assert_allclose(s.E, [0.25, 0, 0])
    np.testing.assert_allclose(s.A, [0, np.pi, 0])
    with pytest.raises(ValueError):
        FieldSample([0, 0, 0], [np.inf, 0, 0], [0, 0, 0], [0, 0, 0])
