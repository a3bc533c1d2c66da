"""Electric and magnetic fields and vector potentials.

Analytic evaluators cover the ideal (infinitely long) solenoid, the infinite
straight wire, point charges and point dipoles. Numeric evaluators sum over a
discretized filament, ``A = (1/c) sum I dl t / |x_j - x0|``, and take ``B``
as the finite-difference curl of that sum; a direct Biot-Savart sum is kept
as an independent cross-check.

All evaluators accept a single point of shape ``(3,)`` or a batch of shape
``(..., 3)`` and return the same shape.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core_math import GAUSSIAN, PhysicalConstants, Vec3, cross, curl_fd, norm, vec3
from .errors import OnSurface, SamePoint, TooCloseToFilament, TooCloseToWire, ZeroSeparation
from .sources import ElementArray, PointCharge, Solenoid, StraightWire

FILAMENT_GUARD = 1e-6
SURFACE_GUARD = 1e-9
WIRE_GUARD = 1e-12
CURL_STEP = 1e-4
_PAIR_BUDGET = 2_000_000


@dataclass(frozen=True)
class FieldSample:
    position: Vec3
    E: Vec3
    B: Vec3
    A: Vec3

    def __post_init__(self):
        for name in ("position", "E", "B", "A"):
            value = vec3(getattr(self, name))
            if not np.all(np.isfinite(value)):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class ScalarPotentialSample:
    position: Vec3
    phi: float


def _points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ValueError(f"points must have a trailing dimension of 3, got shape {x.shape}")
    return x


def _axial_frame(point, direction, x):
    """Perpendicular offset from an axis, its length, and the azimuthal unit vector."""
    rel = x - point
    axial = rel @ direction
    perp = rel - axial[..., None] * direction
    R = norm(perp)
    with np.errstate(invalid="ignore", divide="ignore"):
        phi_hat = cross(direction, perp) / R[..., None]
    return perp, R, phi_hat


# ------------------------------------------------------------- analytic


def solenoid_B_analytic(s: Solenoid, x, const: PhysicalConstants = GAUSSIAN) -> np.ndarray:
    """Field of the ideal solenoid: ``4 pi I M / c`` along the axis inside, zero outside."""
    x = _points(x)
    _, R, _ = _axial_frame(s.axis_point, s.axis_dir, x)
    if np.any(np.abs(R - s.radius) <= SURFACE_GUARD * s.radius):
        raise OnSurface(f"field point lies on the solenoid surface R = {s.radius}")
    inside = (R < s.radius)[..., None]
    return np.where(inside, s.interior_field(const) * s.axis_dir, 0.0)


def solenoid_A_analytic(s: Solenoid, x, const: PhysicalConstants = GAUSSIAN) -> np.ndarray:
    """Azimuthal vector potential of the ideal solenoid.

    ``2 pi R I M / c`` inside and ``2 pi r^2 I M / (c R)`` outside; zero on
    the axis.
    """
    x = _points(x)
    _, R, phi_hat = _axial_frame(s.axis_point, s.axis_dir, x)
    k = 2.0 * np.pi * s.current * s.loops_per_length / const.c
    r = s.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        magnitude = np.where(R < r, k * R, k * r * r / R)
    out = magnitude[..., None] * phi_hat
    return np.where((R == 0.0)[..., None], 0.0, out)


def wire_B_analytic(wire: StraightWire, x, const: PhysicalConstants = GAUSSIAN) -> np.ndarray:
    """Azimuthal field ``2 I / (c R)`` of an infinite straight wire."""
    x = _points(x)
    _, R, phi_hat = _axial_frame(wire.point, wire.direction, x)
    if np.any(R <= WIRE_GUARD):
        raise TooCloseToWire("field point lies on the wire")
    return (2.0 * wire.current / (const.c * R))[..., None] * phi_hat


def wire_A_analytic(wire: StraightWire, x, const: PhysicalConstants = GAUSSIAN,
                    reference_radius: float = 1.0) -> np.ndarray:
    """Axial potential ``-(2 I / c) ln(R / R_ref)`` of an infinite straight wire."""
    x = _points(x)
    _, R, _ = _axial_frame(wire.point, wire.direction, x)
    if np.any(R <= WIRE_GUARD):
        raise TooCloseToWire("field point lies on the wire")
    return (-2.0 * wire.current / const.c * np.log(R / reference_radius))[..., None] * wire.direction


def coulomb_E(charge: PointCharge, x) -> np.ndarray:
    x = _points(x)
    rel = x - charge.position
    d = norm(rel)
    if np.any(d == 0.0):
        raise SamePoint("electric field requested at the charge position")
    return charge.q * rel / (d**3)[..., None]


def coulomb_phi(charge: PointCharge, x) -> np.ndarray | float:
    x = _points(x)
    d = norm(x - charge.position)
    if np.any(d == 0.0):
        raise SamePoint("potential requested at the charge position")
    phi = charge.q / d
    return float(phi) if np.ndim(phi) == 0 else phi


def dipole_A(m, R_vec) -> np.ndarray:
    """Point-dipole vector potential ``m x R_hat / R^2``."""
    R_vec = _points(R_vec)
    R = norm(R_vec)
    if np.any(R == 0.0):
        raise ZeroSeparation("dipole potential at zero separation")
    return cross(vec3(m), R_vec) / (R**3)[..., None]


def dipole_B(m, R_vec) -> np.ndarray:
    """Point-dipole field ``(3 (m . R_hat) R_hat - m) / R^3``."""
    m = vec3(m)
    R_vec = _points(R_vec)
    R = norm(R_vec)
    if np.any(R == 0.0):
        raise ZeroSeparation("dipole field at zero separation")
    n = R_vec / R[..., None]
    return (3.0 * (n @ m)[..., None] * n - m) / (R**3)[..., None]


# -------------------------------------------------------------- numeric


def _chunks(n_points: int, n_elements: int) -> Iterable[tuple[slice, slice]]:
    pstep = max(1, min(n_points, _PAIR_BUDGET // max(n_elements, 1)))
    estep = max(1, min(n_elements, _PAIR_BUDGET // pstep))
    for p0 in range(0, n_points, pstep):
        for e0 in range(0, n_elements, estep):
            yield slice(p0, p0 + pstep), slice(e0, e0 + estep)


def _distances(pts: np.ndarray, pos: np.ndarray) -> np.ndarray:
    # (P, N) distances; explicit differences keep the result free of the
    # cancellation that |a|^2 + |b|^2 - 2ab suffers near a filament
    d = pts[:, None, :] - pos[None, :, :]
    return np.sqrt(np.einsum("pnk,pnk->pn", d, d))


def _check_clearance(dmin: float, elements: ElementArray, guard: float):
    if dmin < guard * elements.min_dl:
        raise TooCloseToFilament(
            f"evaluation point is {dmin:.3g} from an element midpoint (guard {guard * elements.min_dl:.3g})"
        )


def inverse_distance_sum(elements: ElementArray, x0, weights: np.ndarray,
                         guard: float = FILAMENT_GUARD) -> np.ndarray:
    """``sum_j weights_j / |x_j - x0|`` for every point in ``x0``.

    ``weights`` has shape ``(N,)`` or ``(N, k)``; the result has shape
    ``x0.shape[:-1] + weights.shape[1:]``.
    """
    x0 = _points(x0)
    lead = x0.shape[:-1]
    pts = x0.reshape(-1, 3)
    w = np.asarray(weights, dtype=float)
    w2 = w.reshape(len(elements), -1)
    out = np.zeros((len(pts), w2.shape[1]))
    if len(elements) == 0:
        return out.reshape(lead + w.shape[1:])
    dmin = np.inf
    for ps, es in _chunks(len(pts), len(elements)):
        d = _distances(pts[ps], elements.positions[es])
        dmin = min(dmin, float(d.min()))
        with np.errstate(divide="ignore", invalid="ignore"):
            out[ps] += (1.0 / d) @ w2[es]
    _check_clearance(dmin, elements, guard)
    return out.reshape(lead + w.shape[1:])


def vector_potential_numeric(elements: ElementArray, x0, const: PhysicalConstants = GAUSSIAN,
                             guard: float = FILAMENT_GUARD) -> np.ndarray:
    """``A(x0) = (1/c) sum_j I dl_j t_j / |x_j - x0|`` over filament elements."""
    return inverse_distance_sum(elements, x0, elements.current_moments(), guard) / const.c


def min_distance(elements: ElementArray, x0) -> float:
    pts = _points(x0).reshape(-1, 3)
    return min(float(_distances(pts[ps], elements.positions[es]).min())
               for ps, es in _chunks(len(pts), len(elements)))


def biot_savart(elements: ElementArray, x0, const: PhysicalConstants = GAUSSIAN,
                guard: float = FILAMENT_GUARD) -> np.ndarray:
    """Direct sum ``B = (1/c) sum I dl t x (x0 - x_j) / |x0 - x_j|^3``."""
    x0 = _points(x0)
    lead = x0.shape[:-1]
    pts = x0.reshape(-1, 3)
    w = elements.current_moments()
    out = np.zeros((len(pts), 3))
    dmin = np.inf
    for ps, es in _chunks(len(pts), len(elements)):
        rel = pts[ps][:, None, :] - elements.positions[es][None, :, :]
        d = np.sqrt(np.einsum("pnk,pnk->pn", rel, rel))
        dmin = min(dmin, float(d.min()))
        out[ps] += np.sum(cross(w[es][None, :, :], rel) / (d**3)[..., None], axis=1)
    _check_clearance(dmin, elements, guard)
    return (out / const.c).reshape(lead + (3,))


def B_numeric(elements: ElementArray, x0, const: PhysicalConstants = GAUSSIAN, h: float | None = None,
              method: str = "curl", guard: float = FILAMENT_GUARD) -> Vec3:
    """Magnetic field at a single point from a discretized filament.

    ``method="curl"`` differentiates :func:`vector_potential_numeric` with a
    central-difference stencil of half-width ``h`` (default ``1e-4`` times
    the distance to the nearest element); ``method="biot_savart"`` uses the
    direct sum.
    """
    x0 = vec3(x0)
    if method == "biot_savart":
        return biot_savart(elements, x0, const, guard)
    if method != "curl":
        raise ValueError(f"unknown method {method!r}")
    clearance = min_distance(elements, x0)
    _check_clearance(clearance, elements, guard)
    if h is None:
        h = CURL_STEP * clearance
    if h >= clearance:
        raise TooCloseToFilament(f"curl stencil h={h:.3g} reaches the filament (clearance {clearance:.3g})")
    return curl_fd(lambda p: vector_potential_numeric(elements, p, const, guard), x0, h)


# --------------------------------------------------------- field callables


def analytic_A_field(solenoid: Solenoid, const: PhysicalConstants = GAUSSIAN,
                     include_axial_wire: bool | None = None, reference_radius: float = 1.0):
    """Vector field of the ideal solenoid, optionally plus its axial wire."""
    wire = solenoid.include_axial_wire if include_axial_wire is None else include_axial_wire

    def field(points):
        A = solenoid_A_analytic(solenoid, points, const)
        if wire:
            A = A + wire_A_analytic(solenoid.axial_wire(), points, const, reference_radius)
        return A

    return field


def numeric_A_field(elements: ElementArray, const: PhysicalConstants = GAUSSIAN):
    return lambda points: vector_potential_numeric(elements, points, const)


def sample(position, charges: Iterable[PointCharge], A_field, B_field) -> FieldSample:
    position = vec3(position)
    E = np.zeros(3)
    for q in charges:
        E = E + coulomb_E(q, position)
    return FieldSample(position=position, E=E, B=np.asarray(B_field(position)), A=np.asarray(A_field(position)))
