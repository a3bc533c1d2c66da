"""Electromagnetic momentum of a charge plus current-source system.

Five routes to the same quantity are provided:

* ``momentum_qa``: charge times vector potential over c.
* ``momentum_drift_sum``: carrier drift velocities weighted by the mass
  equivalent of each carrier's potential energy in the charge's field.
* ``momentum_energy_flux``: pairwise energy transport across a loop in a
  uniform electric field.
* ``momentum_dipole``: ``E x m / c`` for a small loop.
* ``momentum_field_integral``: volume integral of ``E x B / 4 pi c`` over an
  ideal solenoid.

plus the closed-form two-arm expression for a rectangular loop.
All computations treat conductors as bare filaments: no induced surface
charge is modelled.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Union

import numpy as np
from scipy.spatial import cKDTree

from .core_math import GAUSSIAN, PhysicalConstants, Vec3, cross, norm, relative_difference, vec3
from .errors import (
    AsymmetricScene,
    ChargeInsideSolenoid,
    GeometryMismatch,
    TooCloseToFilament,
    UnpairableDiscretization,
)
from .fields import (
    FILAMENT_GUARD,
    coulomb_E,
    inverse_distance_sum,
    solenoid_A_analytic,
    vector_potential_numeric,
)
from .sources import (
    CircularLoop,
    ElementArray,
    Loop,
    PointCharge,
    RectangularLoop,
    Solenoid,
    discretize,
    discretize_solenoid,
    loop_center,
    solenoid_to_loops,
)

BARE_FILAMENT = "bare_filament"
FORMULATIONS = ("p_qa", "p_drift_sum", "p_energy_flux", "p_field_integral", "p_two_arm", "p_dipole")


@dataclass(frozen=True)
class MassEquivalentElement:
    delta_m: float
    velocity: Vec3


@dataclass
class MomentumReport:
    p_qa: Vec3
    p_drift_sum: Vec3
    p_energy_flux: Vec3
    p_dipole: Vec3
    p_field_integral: Optional[Vec3] = None
    p_two_arm: Optional[Vec3] = None
    p_qa_analytic: Optional[Vec3] = None
    element_count: int = 0
    conventions: tuple = (BARE_FILAMENT,)
    max_pairwise_rel_diff: float = field(init=False)

    def __post_init__(self):
        pops = self.populated()
        diffs = [relative_difference(a, b) for a, b in combinations(pops.values(), 2)]
        self.max_pairwise_rel_diff = max(diffs, default=0.0)
        if not np.isfinite(self.max_pairwise_rel_diff):
            raise ValueError("momentum report contains non-finite values")

    def populated(self) -> dict[str, Vec3]:
        """Formulation name to value for every entry that was computed."""
        return {k: getattr(self, k) for k in FORMULATIONS if getattr(self, k) is not None}

    def to_dict(self) -> dict:
        out = {k: (None if getattr(self, k) is None else [float(c) for c in getattr(self, k)])
               for k in FORMULATIONS + ("p_qa_analytic",)}
        out["diagnostics"] = {
            "element_count": int(self.element_count),
            "max_pairwise_rel_diff": float(self.max_pairwise_rel_diff),
            "conventions": list(self.conventions),
        }
        return out


# -------------------------------------------------------- formulations


def momentum_qa(charge: PointCharge, A_at_charge, const: PhysicalConstants = GAUSSIAN) -> Vec3:
    """``q A / c``; the charge's mass and velocity play no part."""
    return charge.q * vec3(A_at_charge) / const.c


def mass_equivalents(elements: ElementArray, charge: PointCharge, const: PhysicalConstants = GAUSSIAN,
                     guard: float = FILAMENT_GUARD) -> list[MassEquivalentElement]:
    """Per-element ``q phi_j / c^2`` for the carriers in ``n e sigma dl``, with their drift velocity."""
    carrier_charge = elements.n * elements.e_carrier * elements.sigma * elements.dl
    d = norm(elements.positions - charge.position)
    if len(elements) and d.min() < guard * elements.min_dl:
        raise TooCloseToFilament("charge sits on the filament")
    inv_d = 1.0 / d
    dm = charge.q * carrier_charge * inv_d / const.c**2
    vel = elements.v_d[:, None] * elements.tangents
    return [MassEquivalentElement(float(m), v) for m, v in zip(dm, vel)]


def momentum_drift_sum(elements: ElementArray, charge: PointCharge, const: PhysicalConstants = GAUSSIAN,
                       guard: float = FILAMENT_GUARD) -> Vec3:
    """``sum_j dm_j v_j`` with ``dm_j = q (n e sigma dl)_j / (c^2 |x_j - x0|)``."""
    # dm_j v_j = [q n e sigma v_d dl / c^2]_j t_j / |x_j - x0|
    weights = (charge.q * elements.n * elements.e_carrier * elements.sigma * elements.v_d * elements.dl
               / const.c**2)[:, None] * elements.tangents
    return inverse_distance_sum(elements, charge.position, weights, guard)


def momentum_two_arm_rect(loop: RectangularLoop, charge: PointCharge,
                          const: PhysicalConstants = GAUSSIAN) -> Vec3:
    """Two-arm estimate for a charge on the loop's in-plane symmetry axis.

    Each long arm is lumped at its perpendicular distance from the charge;
    the short arms cancel. The result points along ``in_plane_axis``.
    """
    rel = charge.position - loop.center
    w = loop.width_axis
    y = float(rel @ w)
    R1 = abs(y)
    off_axis = norm(rel - y * w)
    if R1 == 0.0 or off_axis > 1e-9 * R1:
        raise GeometryMismatch("charge must lie on the loop's symmetry axis perpendicular to the arms")
    r = loop.half_width
    if not r < R1:
        raise GeometryMismatch(f"charge distance {R1} must exceed the half width {r}")
    d = loop.drift
    k = charge.q * d.n * d.e_carrier * d.sigma * loop.arm_length * d.v_d / const.c**2
    # arm at -r w carries +u, arm at +r w carries -u
    return k * (1.0 / abs(y + r) - 1.0 / abs(y - r)) * loop.in_plane_axis


def momentum_dipole(E_at_loop, loop: Loop, const: PhysicalConstants = GAUSSIAN) -> Vec3:
    """``(E x a) I / c^2``, i.e. ``E x m / c``."""
    return cross(vec3(E_at_loop), loop.area_vector) * loop.current / const.c**2


def element_powers(elements: ElementArray, E_uniform) -> np.ndarray:
    """Rate of work ``I E . dl`` done by a uniform field on each element."""
    return elements.current * elements.dl * (elements.tangents @ vec3(E_uniform))


def symmetric_partners(elements: ElementArray, rtol: float = 1e-9) -> np.ndarray:
    """Index of each element's point reflection through the loop center.

    Raises :class:`UnpairableDiscretization` unless every element has a
    partner at the reflected position with reversed tangent and equal length.
    """
    count = len(elements)
    if count == 0 or count % 2:
        raise UnpairableDiscretization(f"central pairing needs an even, nonzero element count, got {count}")
    center = loop_center(elements)
    rel = elements.positions - center
    scale = float(norm(rel).max())
    dist, idx = cKDTree(rel).query(-rel)
    tol = rtol * max(scale, elements.min_dl)
    ok = (
        (dist <= tol)
        & (idx != np.arange(count))
        & np.all(np.abs(elements.tangents[idx] + elements.tangents) <= 1e-9, axis=1)
        & (np.abs(elements.dl[idx] - elements.dl) <= rtol * elements.dl)
        & (idx[idx] == np.arange(count))
    )
    if not np.all(ok):
        raise UnpairableDiscretization(f"{int(np.sum(~ok))} elements have no centrally symmetric partner")
    return idx


def momentum_energy_flux(elements: ElementArray, E_uniform, const: PhysicalConstants = GAUSSIAN) -> Vec3:
    """Momentum of the energy carried across a loop by a uniform field.

    For every centrally symmetric pair the field feeds power ``I E . dl``
    into one element and drains the same from its partner; that power moves
    along the separation ``s`` from the draining to the fed element, giving
    ``dP = I (E . dl) s / c^2``. Summed once per pair.
    """
    idx = symmetric_partners(elements)
    power = element_powers(elements, E_uniform)
    first = np.arange(len(elements)) < idx
    i, j = np.nonzero(first)[0], idx[first]
    # orient each pair from the element losing energy to the one gaining it
    fed = np.where(power[i] >= 0, i, j)
    drained = np.where(power[i] >= 0, j, i)
    s = elements.positions[fed] - elements.positions[drained]
    return np.sum(power[fed][:, None] * s, axis=0) / const.c**2


def _gauss(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def momentum_field_integral(solenoid: Solenoid, charge: PointCharge, const: PhysicalConstants = GAUSSIAN,
                            n_radial: int = 16, n_azimuthal: int = 32, n_axial: int = 128) -> Vec3:
    """Volume integral of ``E x B / (4 pi c)`` over the solenoid interior.

    ``B`` is the ideal interior field, so the exterior contributes nothing.
    Tensor-product Gauss-Legendre in (R, phi, z). The axial coordinate is
    mapped through ``z = z_q + d sinh(t)`` (``d`` the charge's distance from
    the axis, ``z_q`` its axial position) so the Coulomb peak stays resolved
    at any solenoid length with a fixed node count.
    """
    a = solenoid.axis_dir
    rel = charge.position - solenoid.axis_point
    zq = float(rel @ a)
    perp = rel - zq * a
    d = float(norm(perp))
    if d <= solenoid.radius:
        raise ChargeInsideSolenoid(f"charge at distance {d} from the axis, solenoid radius {solenoid.radius}")
    e1 = perp / d
    e2 = cross(a, e1)

    half = solenoid.length / 2.0
    R, wR = _gauss(n_radial, 0.0, solenoid.radius)
    phi, wphi = _gauss(n_azimuthal, 0.0, 2.0 * np.pi)
    t, wt = _gauss(n_axial, np.arcsinh((-half - zq) / d), np.arcsinh((half - zq) / d))
    z = zq + d * np.sinh(t)
    wz = wt * d * np.cosh(t)

    RR, PP, ZZ = np.meshgrid(R, phi, z, indexing="ij")
    W = (wR[:, None, None] * R[:, None, None]) * wphi[None, :, None] * wz[None, None, :]
    pts = (solenoid.axis_point
           + (RR * np.cos(PP))[..., None] * e1
           + (RR * np.sin(PP))[..., None] * e2
           + ZZ[..., None] * a)
    E_int = np.einsum("ijk,ijkl->l", W, coulomb_E(charge, pts))
    B = solenoid.interior_field(const) * a
    return cross(E_int, B) / (4.0 * np.pi * const.c)


# ------------------------------------------------------------- reports


def _loop_report(loop: Loop, charge: PointCharge, n: int, const: PhysicalConstants) -> MomentumReport:
    elements = discretize(loop, n)
    A = vector_potential_numeric(elements, charge.position, const)
    E_center = coulomb_E(charge, loop.center)
    two_arm = None
    if isinstance(loop, RectangularLoop):
        try:
            two_arm = momentum_two_arm_rect(loop, charge, const)
        except GeometryMismatch:
            pass
    return MomentumReport(
        p_qa=momentum_qa(charge, A, const),
        p_drift_sum=momentum_drift_sum(elements, charge, const),
        p_energy_flux=momentum_energy_flux(elements, E_center, const),
        p_dipole=momentum_dipole(E_center, loop, const),
        p_two_arm=two_arm,
        element_count=len(elements),
    )


def _solenoid_report(s: Solenoid, charge: PointCharge, n: int, const: PhysicalConstants) -> MomentumReport:
    loops, _ = solenoid_to_loops(s)
    elements = discretize_solenoid(s, n)
    A = vector_potential_numeric(elements, charge.position, const)
    # the loop stack differs only by translation, so per-loop energy flux
    # and dipole terms share one template discretization
    template = discretize(loops[0], n)
    centers = np.array([loop.center for loop in loops])
    E_centers = coulomb_E(charge, centers)
    p_flux = sum(momentum_energy_flux(template, E, const) for E in E_centers)
    p_dip = np.sum(cross(E_centers, loops[0].area_vector), axis=0) * s.current / const.c**2
    return MomentumReport(
        p_qa=momentum_qa(charge, A, const),
        p_drift_sum=momentum_drift_sum(elements, charge, const),
        p_energy_flux=p_flux,
        p_dipole=p_dip,
        p_field_integral=momentum_field_integral(s, charge, const),
        p_qa_analytic=momentum_qa(charge, solenoid_A_analytic(s, charge.position, const), const),
        element_count=len(elements),
    )


Source = Union[RectangularLoop, CircularLoop, Solenoid]


def momentum_report(source: Source, charge: PointCharge, n: int,
                    const: PhysicalConstants = GAUSSIAN) -> MomentumReport:
    """Every applicable formulation for one charge and one source.

    ``n`` is elements per side (rectangular), per loop (circular), or per
    solenoid loop.
    """
    if isinstance(source, Solenoid):
        return _solenoid_report(source, charge, n, const)
    return _loop_report(source, charge, n, const)


def source_center(source: Source) -> Vec3:
    return source.axis_point if isinstance(source, Solenoid) else source.center


@dataclass
class SymmetricPairReport:
    report1: MomentumReport
    report2: MomentumReport
    sum_residuals: dict
    max_power_residual: float

    def __iter__(self):
        return iter((self.report1, self.report2))


def symmetric_pair_report(source: Source, q1: PointCharge, q2: PointCharge, n: int,
                          const: PhysicalConstants = GAUSSIAN) -> SymmetricPairReport:
    """Reports for a mirror pair of equal charges and their cancellation residuals.

    ``sum_residuals[name]`` is ``|p1 + p2| / |p1|`` per formulation;
    ``max_power_residual`` is the largest per-element ``|P1 + P2| / |P1|``
    for the uniform loop-center fields of the two charges.
    """
    center = source_center(source)
    expected = 2.0 * center - q1.position
    scale = float(norm(q1.position - center))
    if q1.q != q2.q or norm(q2.position - expected) > 1e-9 * scale:
        raise AsymmetricScene("second charge must equal the first and sit at its point reflection")
    r1 = momentum_report(source, q1, n, const)
    r2 = momentum_report(source, q2, n, const)
    residuals = {}
    for name, p1 in r1.populated().items():
        p2 = r2.populated()[name]
        size = float(norm(p1))
        residuals[name] = float(norm(p1 + p2)) / size if size else float(norm(p2))

    if isinstance(source, Solenoid):
        loops, _ = solenoid_to_loops(source)
        elements = discretize(loops[len(loops) // 2], n)
        E1, E2 = coulomb_E(q1, loops[len(loops) // 2].center), coulomb_E(q2, loops[len(loops) // 2].center)
    else:
        elements = discretize(source, n)
        E1, E2 = coulomb_E(q1, center), coulomb_E(q2, center)
    P1, P2 = element_powers(elements, E1), element_powers(elements, E2)
    scale = np.abs(P1)
    nonzero = scale > 0
    power_residual = float(np.max(np.abs(P1 + P2)[nonzero] / scale[nonzero], initial=0.0))
    return SymmetricPairReport(r1, r2, residuals, power_residual)


@dataclass(frozen=True)
class NeutralLoopResult:
    momentum_carriers: Vec3
    momentum_with_ions: Vec3
    potential_energy_carriers: float
    potential_energy_ions: float

    @property
    def potential_energy_total(self) -> float:
        return self.potential_energy_carriers + self.potential_energy_ions


def neutral_loop_check(elements: ElementArray, charge: PointCharge,
                       const: PhysicalConstants = GAUSSIAN) -> NeutralLoopResult:
    """Add a static ion lattice cancelling the carrier charge of every element.

    The ions carry charge ``-n e sigma dl`` at each element and do not drift,
    so the potential energy in the charge's field cancels while the drift-sum
    momentum is untouched.
    """
    carrier_q = elements.n * elements.e_carrier * elements.sigma * elements.dl
    u_carriers = float(charge.q * inverse_distance_sum(elements, charge.position, carrier_q))
    u_ions = float(charge.q * inverse_distance_sum(elements, charge.position, -carrier_q))
    ions = ElementArray(elements.positions, elements.tangents, elements.dl, elements.current,
                        elements.n, -elements.e_carrier, elements.sigma, 0.0)
    p_carriers = momentum_drift_sum(elements, charge, const)
    p_total = p_carriers + momentum_drift_sum(ions, charge, const)
    return NeutralLoopResult(p_carriers, p_total, u_carriers, u_ions)
