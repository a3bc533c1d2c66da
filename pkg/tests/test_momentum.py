import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abmomentum.core_math import GAUSSIAN, NATURAL, norm, relative_difference
from abmomentum.errors import AsymmetricScene, ChargeInsideSolenoid, GeometryMismatch, UnpairableDiscretization
from abmomentum.fields import coulomb_E, solenoid_A_analytic, vector_potential_numeric
from abmomentum.momentum import (
    FORMULATIONS,
    MomentumReport,
    mass_equivalents,
    momentum_dipole,
    momentum_drift_sum,
    momentum_energy_flux,
    momentum_field_integral,
    momentum_qa,
    momentum_report,
    momentum_two_arm_rect,
    neutral_loop_check,
    symmetric_pair_report,
    symmetric_partners,
)
from abmomentum.sources import CircularLoop, DriftParams, ElementArray, PointCharge, RectangularLoop, Solenoid, discretize

# Two-arm fixture: arms of length 1 separated by 0.02, charge 1 cm from the center
FIG2 = RectangularLoop([0, 0, 0], 1.0, 0.01, 1.0)
Q_FIG2 = PointCharge(1.0, [0, -1.0, 0])


def test_momentum_qa_examples():
    q = PointCharge(1.0, [0, 0, 0])
    assert np.all(momentum_qa(q, [0, 0, 0]) == 0)
    np.testing.assert_array_equal(momentum_qa(q, [0, np.pi, 0], NATURAL), [0, np.pi, 0])
    A1 = np.array([0.2, -0.1, 0.0])
    np.testing.assert_array_equal(momentum_qa(q, -A1, NATURAL), -momentum_qa(q, A1, NATURAL))


def test_drift_sum_falls_off_far_from_the_loop():
    elements = discretize(CircularLoop([0, 0, 0], 1.0, 1.0), 64)
    ref = norm(momentum_drift_sum(elements, PointCharge(1.0, [10.0, 0, 0]), NATURAL))
    far = norm(momentum_drift_sum(elements, PointCharge(1.0, [1e6, 0, 0]), NATURAL))
    assert far <= 1e-10 * ref


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_drift_sum_is_qa_with_numeric_potential(seed):
    rng = np.random.default_rng(seed)
    loop = CircularLoop(rng.normal(size=3), rng.uniform(0.1, 2), rng.normal(),
                        normal=rng.normal(size=3) + 0.1)
    elements = discretize(loop, int(rng.integers(8, 200)))
    charge = PointCharge(rng.normal(), loop.center + rng.normal(size=3) * 3 + 5)
    for const in (NATURAL, GAUSSIAN):
        a = momentum_drift_sum(elements, charge, const)
        b = momentum_qa(charge, vector_potential_numeric(elements, charge.position, const), const)
        assert relative_difference(a, b) <= 1e-12


def test_mass_equivalents_sign_and_drift():
    elements = discretize(FIG2, 4)
    masses = mass_equivalents(elements, Q_FIG2, NATURAL)
    assert all(m.delta_m > 0 for m in masses)
    opposite = mass_equivalents(elements, PointCharge(-1.0, Q_FIG2.position), NATURAL)
    assert all(m.delta_m < 0 for m in opposite)
    p = sum(m.delta_m * m.velocity for m in masses)
    assert relative_difference(p, momentum_drift_sum(elements, Q_FIG2, NATURAL)) <= 1e-12


def test_two_arm_hand_value():
    p = momentum_two_arm_rect(FIG2, Q_FIG2, NATURAL)
    np.testing.assert_allclose(p, [1 / 0.99 - 1 / 1.01, 0, 0], rtol=1e-14)
    assert p[0] == pytest.approx(0.020002000200020002, rel=1e-12)


def test_two_arm_vanishes_for_thin_loop():
    widths = [1e-2, 1e-4, 1e-6]
    ps = [norm(momentum_two_arm_rect(RectangularLoop([0, 0, 0], 1.0, r, 1.0), Q_FIG2, NATURAL)) for r in widths]
    assert ps[2] < ps[1] < ps[0] and ps[2] < 1e-5


def test_two_arm_geometry_checks():
    with pytest.raises(GeometryMismatch):
        momentum_two_arm_rect(FIG2, PointCharge(1.0, [0.5, -1.0, 0]), NATURAL)
    with pytest.raises(GeometryMismatch):
        momentum_two_arm_rect(FIG2, PointCharge(1.0, [0, -0.005, 0]), NATURAL)
    mirrored = momentum_two_arm_rect(FIG2, PointCharge(1.0, [0, 1.0, 0]), NATURAL)
    np.testing.assert_allclose(mirrored, -momentum_two_arm_rect(FIG2, Q_FIG2, NATURAL), rtol=1e-15)


def _segment_inverse_distance(s, D):
    # closed form of the integral of dl / |x - x0| along a straight segment of
    # length s, seen from a point a distance D from its midpoint, on its bisector
    return 2.0 * np.arcsinh(s / (2.0 * D))


def test_drift_sum_matches_exact_filament_integral():
    # short arms cancel by symmetry; long arms integrate in closed form
    s, r, R1 = FIG2.arm_length, FIG2.half_width, 1.0
    exact = _segment_inverse_distance(s, R1 - r) - _segment_inverse_distance(s, R1 + r)
    brute = momentum_drift_sum(discretize(FIG2, 2000), Q_FIG2, NATURAL)
    assert abs(brute[0] - exact) <= 1e-6 * abs(exact)
    assert abs(brute[1]) <= 1e-12 * abs(exact)


def test_dipole_formulation_examples():
    p = momentum_dipole(coulomb_E(Q_FIG2, FIG2.center), FIG2, NATURAL)
    np.testing.assert_allclose(p, [0.02, 0, 0], rtol=1e-14)
    assert np.all(momentum_dipole([0, 0, 3.0], FIG2, NATURAL) == 0)


@given(st.floats(0, 2 * np.pi))
def test_dipole_rotates_with_the_field(theta):
    E = np.array([1.0, 0, 0])
    rot = np.array([[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]])
    np.testing.assert_allclose(momentum_dipole(rot @ E, FIG2, NATURAL), rot @ momentum_dipole(E, FIG2, NATURAL),
                               atol=1e-15)


def test_energy_flux_of_circular_loop():
    a, I = 0.3, 2.0
    loop = CircularLoop([0, 0, 0], a, I)
    elements = discretize(loop, 720)
    E = np.array([0.0, 1.5, 0.0])
    p = momentum_energy_flux(elements, E, NATURAL)
    assert norm(p) == pytest.approx(norm(E) * np.pi * a**2 * I, rel=1e-4)
    np.testing.assert_allclose(p / norm(p), np.cross(E, [0, 0, 1]) / norm(E), atol=1e-12)
    assert np.all(momentum_energy_flux(elements, [0, 0, 0], NATURAL) == 0)
    flipped = discretize(CircularLoop([0, 0, 0], a, -I), 720)
    np.testing.assert_array_equal(momentum_energy_flux(flipped, E, NATURAL), -p)


def test_energy_flux_needs_symmetric_pairs():
    with pytest.raises(UnpairableDiscretization):
        symmetric_partners(discretize(CircularLoop([0, 0, 0], 1.0, 1.0), 9))
    elements = discretize(FIG2, 5)
    idx = symmetric_partners(elements)
    np.testing.assert_array_equal(idx[idx], np.arange(len(elements)))


SOLENOID = Solenoid([0, 0, 0], 1.0, 1.0, 400.0, 1.0)


def test_field_integral_matches_qa():
    charge = PointCharge(1.0, [4.0, 0, 0])
    p = momentum_field_integral(SOLENOID, charge, NATURAL)
    want = momentum_qa(charge, solenoid_A_analytic(SOLENOID, charge.position, NATURAL), NATURAL)
    assert relative_difference(p, want) < 1e-2


def test_field_integral_symmetries():
    charge = PointCharge(1.0, [4.0, 0, 0])
    p = momentum_field_integral(SOLENOID, charge, NATURAL)
    np.testing.assert_array_equal(momentum_field_integral(SOLENOID, PointCharge(-1.0, [4.0, 0, 0]), NATURAL), -p)
    mirror = momentum_field_integral(SOLENOID, PointCharge(1.0, [-4.0, 0, 0]), NATURAL)
    np.testing.assert_allclose(mirror, -p, rtol=1e-12, atol=1e-12 * norm(p))
    with pytest.raises(ChargeInsideSolenoid):
        momentum_field_integral(SOLENOID, PointCharge(1.0, [0.5, 0, 0]), NATURAL)


def test_field_integral_error_falls_with_length():
    charge = PointCharge(1.0, [4.0, 0, 0])
    errors = []
    for ratio in (50, 100, 200, 400, 800):
        s = Solenoid([0, 0, 0], 1.0, 1.0, ratio * 4.0, 1.0)
        want = momentum_qa(charge, solenoid_A_analytic(s, charge.position, NATURAL), NATURAL)
        errors.append(relative_difference(momentum_field_integral(s, charge, NATURAL), want))
    assert np.all(np.diff(errors) < 0)


def test_dipole_regime_formulations_agree():
    loop = RectangularLoop([0, 0, 0], 0.02, 0.01, 1.0)
    report = momentum_report(loop, Q_FIG2, 400, NATURAL)
    assert report.p_two_arm is not None and report.p_field_integral is None
    assert report.max_pairwise_rel_diff <= 5e-3
    assert relative_difference(report.p_qa, report.p_drift_sum) <= 1e-12


@pytest.mark.parametrize("ratio", [1e-1, 1e-2, 1e-3])
def test_first_order_gap_is_quadratic(ratio):
    loop = RectangularLoop([0, 0, 0], 2 * ratio, ratio, 1.0)
    two_arm = momentum_two_arm_rect(loop, Q_FIG2, NATURAL)
    dipole = momentum_dipole(coulomb_E(Q_FIG2, loop.center), loop, NATURAL)
    gap = norm(two_arm - dipole) / norm(dipole)
    assert 0.5 <= gap / ratio**2 <= 2.0


@pytest.mark.parametrize("scale", [-2.0, 3.0])
def test_formulations_are_linear_in_charge_and_current(scale):
    loop = RectangularLoop([0, 0, 0], 0.02, 0.01, 1.0)
    base = momentum_report(loop, Q_FIG2, 40, NATURAL)
    by_q = momentum_report(loop, PointCharge(scale, Q_FIG2.position), 40, NATURAL)
    by_i = momentum_report(RectangularLoop([0, 0, 0], 0.02, 0.01, scale), Q_FIG2, 40, NATURAL)
    for name, p in base.populated().items():
        np.testing.assert_allclose(by_q.populated()[name], scale * p, rtol=1e-12, atol=1e-12 * norm(p))
        np.testing.assert_allclose(by_i.populated()[name], scale * p, rtol=1e-12, atol=1e-12 * norm(p))


@pytest.mark.parametrize("source, n", [
    (RectangularLoop([0, 0, 0], 0.02, 0.01, 1.0), 400),
    (CircularLoop([0.5, 0.2, 0], 0.05, 1.0, normal=[0, 0.3, 1]), 360),
    (Solenoid([0, 0, 0], 1.0, 1.0, 50.0, 1.0), 32),
])
def test_mirror_pair_cancels(source, n):
    center = source.axis_point if isinstance(source, Solenoid) else source.center
    q1 = PointCharge(1.0, center + np.array([0.3, -4.0, 0.0]))
    q2 = q1.reflected(center)
    report = symmetric_pair_report(source, q1, q2, n, NATURAL)
    assert max(report.sum_residuals.values()) <= 1e-12
    assert report.max_power_residual <= 1e-12
    r1, r2 = report
    assert set(r1.populated()) == set(r2.populated())


def test_mirror_pair_rejects_asymmetric_scene():
    with pytest.raises(AsymmetricScene):
        symmetric_pair_report(FIG2, Q_FIG2, PointCharge(1.0, [0, 1.1, 0]), 10, NATURAL)
    with pytest.raises(AsymmetricScene):
        symmetric_pair_report(FIG2, Q_FIG2, PointCharge(2.0, [0, 1.0, 0]), 10, NATURAL)


def test_neutral_loop():
    elements = discretize(RectangularLoop([0, 0, 0], 0.02, 0.01, 1.0,
                                          drift=DriftParams.for_current(1.0, n=5.0, sigma=0.2)), 50)
    result = neutral_loop_check(elements, Q_FIG2, NATURAL)
    assert abs(result.potential_energy_total) <= 1e-12 * abs(result.potential_energy_carriers)
    np.testing.assert_array_equal(result.momentum_with_ions, result.momentum_carriers)
    ions = ElementArray(elements.positions, elements.tangents, elements.dl, 0.0, 1.0, 1.0, 1.0, 0.0)
    assert np.all(momentum_drift_sum(ions, Q_FIG2, NATURAL) == 0)


def test_electron_carriers_give_the_same_momentum():
    d = DriftParams.for_current(1.0, n=3.0)
    positive = discretize(RectangularLoop([0, 0, 0], 0.02, 0.01, 1.0, drift=d), 50)
    electrons = discretize(RectangularLoop([0, 0, 0], 0.02, 0.01, 1.0, drift=d.as_electrons()), 50)
    np.testing.assert_allclose(momentum_drift_sum(electrons, Q_FIG2, NATURAL),
                               momentum_drift_sum(positive, Q_FIG2, NATURAL), rtol=1e-15)


def test_report_serializes():
    report = momentum_report(FIG2, Q_FIG2, 10, NATURAL)
    d = report.to_dict()
    assert set(FORMULATIONS) <= set(d)
    assert d["p_field_integral"] is None
    assert d["diagnostics"]["conventions"] == ["bare_filament"]
    with pytest.raises(ValueError):
        MomentumReport(*[np.array([np.nan, 0, 0])] * 4)
