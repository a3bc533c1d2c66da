"""Aharonov-Bohm phase shifts and the resulting two-beam fringe pattern."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_math import (
    GAUSSIAN,
    CirclePath,
    PhysicalConstants,
    Polyline,
    QuadratureSpec,
    VectorField,
    gradient_field_fd,
    line_integral,
    norm,
    orthonormal_pair,
)
from .errors import DomainError, EndpointMismatch, InvalidGauge
from .fields import analytic_A_field, wire_A_analytic, wire_B_analytic
from .sources import Solenoid

BeamPath = Polyline

PHASE_QUAD = QuadratureSpec(rule="gauss_legendre", n_points=16, rel_tol=1e-14, max_refinements=12)


@dataclass(frozen=True)
class PhaseResult:
    phi_path1: float
    phi_path2: float
    delta_phi: float
    enclosed_flux: float

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in ("phi_path1", "phi_path2", "delta_phi", "enclosed_flux")}


def phase_along_path(q: float, path, A_field: VectorField, quad: QuadratureSpec = PHASE_QUAD,
                     const: PhysicalConstants = GAUSSIAN) -> float:
    """``(q / (c hbar)) * integral of A . dx`` along ``path``."""
    if q == 0:
        return 0.0
    return q / (const.c * const.hbar) * line_integral(A_field, path, quad)


def _check_endpoints(path1: Polyline, path2: Polyline):
    scale = max(float(np.max(np.abs(path1.vertices))), float(np.max(np.abs(path2.vertices))), 1e-300)
    for a, b, which in ((path1.start, path2.start, "start"), (path1.end, path2.end, "end")):
        if norm(a - b) > 1e-12 * scale:
            raise EndpointMismatch(f"paths do not share their {which} point: {a.tolist()} vs {b.tolist()}")


def closed_loop(path1: Polyline, path2: Polyline) -> Polyline:
    """``path1`` followed by ``path2`` reversed."""
    _check_endpoints(path1, path2)
    loop = path1.then(path2.reversed())
    if not loop.closed:
        loop = Polyline(np.vstack([loop.vertices, loop.vertices[:1]]))
    return loop


def _circle_overlap_area(R: float, r: float, d: float) -> float:
    """Area shared by disks of radii ``R`` and ``r`` whose centers are ``d`` apart."""
    if d >= R + r:
        return 0.0
    if d <= abs(R - r):
        return np.pi * min(R, r) ** 2
    a = np.arccos((d * d + R * R - r * r) / (2 * d * R))
    b = np.arccos((d * d + r * r - R * R) / (2 * d * r))
    return R * R * a + r * r * b - 0.5 * np.sqrt((-d + R + r) * (d + R - r) * (d - R + r) * (d + R + r))


def enclosed_flux_analytic(solenoid: Solenoid, loop, const: PhysicalConstants = GAUSSIAN) -> float:
    """Flux of the ideal solenoid's field through a closed path.

    Polylines must stay outside the solenoid; the flux is then the winding
    number about the axis times the full flux. Circles perpendicular to the
    axis may cut the solenoid; the flux is the interior field times the
    overlap area.
    """
    axis, origin = solenoid.axis_dir, solenoid.axis_point
    if isinstance(loop, CirclePath):
        cos = float(loop.normal @ axis)
        if abs(abs(cos) - 1.0) > 1e-12:
            raise DomainError("circular paths must be perpendicular to the solenoid axis")
        rel = loop.center - origin
        d = float(norm(rel - (rel @ axis) * axis))
        return np.sign(cos) * solenoid.interior_field(const) * _circle_overlap_area(loop.radius, solenoid.radius, d)

    if not loop.closed:
        raise DomainError("flux needs a closed path")
    e1, e2 = orthonormal_pair(axis)
    rel = loop.vertices - origin
    xy = np.column_stack([rel @ e1, rel @ e2])
    a, b = xy[:-1], xy[1:]
    seg = b - a
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip(np.where(seg_len2 > 0, -np.einsum("ij,ij->i", a, seg) / seg_len2, 0.0), 0.0, 1.0)
    closest = norm(a + t[:, None] * seg)
    if np.any(closest <= solenoid.radius):
        raise DomainError("path enters the solenoid; flux through a partial cross-section is not supported")
    ang = np.arctan2(xy[:, 1], xy[:, 0])
    turns = np.sum(np.angle(np.exp(1j * np.diff(ang)))) / (2.0 * np.pi)
    return float(np.rint(turns)) * solenoid.flux(const)


def phase_difference(q: float, path1: Polyline, path2: Polyline, A_field: VectorField,
                     quad: QuadratureSpec = PHASE_QUAD, const: PhysicalConstants = GAUSSIAN,
                     flux_source: Solenoid | None = None) -> PhaseResult:
    """Phase difference between two beams with shared endpoints.

    The enclosed flux comes from the solenoid's analytic field when
    ``flux_source`` is given, and otherwise from the circulation of
    ``A_field`` around the closed loop.
    """
    loop = closed_loop(path1, path2)
    phi1 = phase_along_path(q, path1, A_field, quad, const)
    phi2 = phase_along_path(q, path2, A_field, quad, const)
    if flux_source is not None:
        flux = enclosed_flux_analytic(flux_source, loop, const)
    else:
        flux = line_integral(A_field, loop, quad)
    return PhaseResult(phi1, phi2, phi1 - phi2, flux)


def gauge_invariance_check(q: float, path1: Polyline, path2: Polyline, A_field: VectorField, chi,
                           quad: QuadratureSpec = PHASE_QUAD, const: PhysicalConstants = GAUSSIAN,
                           grad_chi: VectorField | None = None, h: float = 1e-5) -> float:
    """``|delta_phi(A + grad chi) - delta_phi(A)|`` for a single-valued gauge function.

    ``chi`` maps points ``(..., 3)`` to scalars. Its gradient is taken by
    central differences unless ``grad_chi`` is supplied. A gauge function
    whose gradient circulates around the beam loop (an angle-like,
    multivalued ``chi``) raises :class:`InvalidGauge`.
    """
    grad = grad_chi if grad_chi is not None else gradient_field_fd(chi, h)
    loop = closed_loop(path1, path2)
    circulation = line_integral(grad, loop, quad)
    span = float(np.max(np.abs(np.asarray(chi(loop.vertices), dtype=float)))) + 1.0
    if abs(circulation) > 1e-6 * span:
        raise InvalidGauge(f"gauge function is not single-valued: its gradient circulates {circulation:.6g}")
    base = phase_difference(q, path1, path2, A_field, quad, const).delta_phi
    shifted = phase_difference(q, path1, path2, lambda p: A_field(p) + grad(p), quad, const).delta_phi
    return abs(shifted - base)


@dataclass(frozen=True)
class WireCheck:
    delta_phi_without: float
    delta_phi_with: float
    wire_flux: float
    max_normal_B: float

    @property
    def relative_change(self) -> float:
        scale = max(abs(self.delta_phi_without), abs(self.delta_phi_with))
        return abs(self.delta_phi_with - self.delta_phi_without) / scale if scale else 0.0


def axial_wire_flux_check(solenoid: Solenoid, path1: Polyline, path2: Polyline, q: float,
                          quad: QuadratureSpec = PHASE_QUAD, const: PhysicalConstants = GAUSSIAN,
                          loops_on: bool = True) -> WireCheck:
    """Compare the phase difference with and without the solenoid's axial wire.

    The beams are assumed to lie in a plane perpendicular to the axis. The
    wire's flux through the enclosed surface is evaluated both as the
    circulation of its (axial) vector potential and by sampling the normal
    component of its field at the loop vertices.
    """
    wire = solenoid.axial_wire()
    loops_field = analytic_A_field(solenoid, const, include_axial_wire=False)
    if not loops_on:
        loops_field = lambda p: np.zeros_like(np.asarray(p, dtype=float))  # noqa: E731
    wire_field = lambda p: wire_A_analytic(wire, p, const)  # noqa: E731
    without = phase_difference(q, path1, path2, loops_field, quad, const).delta_phi
    with_wire = phase_difference(q, path1, path2, lambda p: loops_field(p) + wire_field(p), quad, const).delta_phi
    loop = closed_loop(path1, path2)
    wire_flux = line_integral(wire_field, loop, quad)
    normal_B = float(np.max(np.abs(wire_B_analytic(wire, loop.vertices, const) @ solenoid.axis_dir)))
    return WireCheck(without, with_wire, wire_flux, normal_B)


@dataclass(frozen=True)
class FringeSpec:
    wavelength: float
    slit_separation: float
    screen_distance: float
    screen_samples: int = 1001

    def __post_init__(self):
        for name in ("wavelength", "slit_separation", "screen_distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if int(self.screen_samples) != self.screen_samples or self.screen_samples < 1:
            raise ValueError(f"screen_samples must be a positive integer, got {self.screen_samples!r}")
        if self.screen_distance < 100 * self.slit_separation:
            raise ValueError("far-field model needs screen_distance >= 100 * slit_separation")

    @property
    def fringe_spacing(self) -> float:
        return self.wavelength * self.screen_distance / self.slit_separation


DEFAULT_FRINGES = FringeSpec(wavelength=5e-10, slit_separation=1e-4, screen_distance=100.0)


@dataclass(frozen=True)
class FringePattern:
    y: np.ndarray
    intensity: np.ndarray
    displacement: float
    delta_phi: float


def fringe_pattern(spec: FringeSpec, delta_phi: float) -> FringePattern:
    """Equal-amplitude two-beam intensity ``cos^2(pi d y / (lambda D) + delta_phi / 2)``.

    Sampled at ``screen_samples`` points across five fringes either side of
    the center. ``delta_phi`` is reduced modulo ``2 pi`` first so that
    patterns for phases differing by whole turns are identical.
    """
    spacing = spec.fringe_spacing
    y = np.linspace(-5.0 * spacing, 5.0 * spacing, spec.screen_samples)
    if spec.screen_samples % 2:
        y[spec.screen_samples // 2] = 0.0
    reduced = float(np.remainder(delta_phi, 2.0 * np.pi))
    intensity = np.cos(np.pi * y / spacing + reduced / 2.0) ** 2
    return FringePattern(y=y, intensity=intensity, displacement=delta_phi / (2.0 * np.pi) * spacing,
                         delta_phi=delta_phi)
