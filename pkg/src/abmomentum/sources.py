"""Charges, current loops, solenoids and their filament discretization."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

import numpy as np

from .core_math import GAUSSIAN, PhysicalConstants, Vec3, cross, orthonormal_pair, unit, vec3
from .errors import DegenerateGeometry

_ZHAT = np.array([0.0, 0.0, 1.0])
_XHAT = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class PointCharge:
    q: float
    position: Vec3
    mass: Optional[float] = None
    velocity: Vec3 = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        object.__setattr__(self, "velocity", vec3(self.velocity))
        if self.mass is not None and not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass!r}")

    def reflected(self, center) -> "PointCharge":
        """The same charge point-reflected through ``center``."""
        return replace(self, position=2.0 * vec3(center) - self.position, velocity=-self.velocity)


@dataclass(frozen=True)
class DriftParams:
    """Carrier bookkeeping for a filament: current = n * e_carrier * sigma * v_d."""

    n: float
    e_carrier: float
    sigma: float
    v_d: float

    @property
    def current(self) -> float:
        return self.n * self.e_carrier * self.sigma * self.v_d

    @classmethod
    def for_current(cls, current: float, n: float = 1.0, e_carrier: float = 1.0, sigma: float = 1.0):
        """Choose the drift speed that carries ``current`` for the given carriers."""
        if n <= 0 or sigma <= 0 or e_carrier == 0:
            raise ValueError("carrier density and cross-section must be positive, carrier charge nonzero")
        return cls(n=n, e_carrier=e_carrier, sigma=sigma, v_d=current / (n * e_carrier * sigma))

    def as_electrons(self) -> "DriftParams":
        """Equivalent negative carriers drifting the opposite way."""
        return replace(self, e_carrier=-self.e_carrier, v_d=-self.v_d)


def _check_drift(drift: Optional[DriftParams], current: float) -> DriftParams:
    if drift is None:
        return DriftParams.for_current(current)
    if abs(drift.current - current) > 1e-12 * max(abs(current), abs(drift.current)):
        raise ValueError(f"drift parameters carry current {drift.current!r}, loop current is {current!r}")
    return drift


@dataclass(frozen=True)
class RectangularLoop:
    """Rectangular loop with two arms of length ``arm_length`` separated by ``2 * half_width``.

    The arm nearer ``center - half_width * w`` (``w = normal x in_plane_axis``)
    carries current along ``+in_plane_axis``; the opposite arm carries it back,
    so the current circulates counter-clockwise about ``normal``.
    """

    center: Vec3
    arm_length: float
    half_width: float
    current: float
    normal: Vec3 = field(default_factory=lambda: _ZHAT.copy())
    in_plane_axis: Vec3 = field(default_factory=lambda: _XHAT.copy())
    drift: Optional[DriftParams] = None

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        n = unit(self.normal)
        u = unit(self.in_plane_axis)
        if abs(np.dot(n, u)) > 1e-12:
            raise ValueError("in_plane_axis must be perpendicular to normal")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "in_plane_axis", u)
        if self.arm_length < 0 or self.half_width < 0:
            raise ValueError("loop dimensions must be non-negative")
        object.__setattr__(self, "drift", _check_drift(self.drift, self.current))

    @property
    def width_axis(self) -> Vec3:
        return cross(self.normal, self.in_plane_axis)

    @property
    def area_vector(self) -> Vec3:
        return 2.0 * self.arm_length * self.half_width * self.normal

    @property
    def perimeter(self) -> float:
        return 2.0 * self.arm_length + 4.0 * self.half_width


@dataclass(frozen=True)
class CircularLoop:
    center: Vec3
    radius: float
    current: float
    normal: Vec3 = field(default_factory=lambda: _ZHAT.copy())
    drift: Optional[DriftParams] = None

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "normal", unit(self.normal))
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "drift", _check_drift(self.drift, self.current))

    @property
    def area_vector(self) -> Vec3:
        return np.pi * self.radius**2 * self.normal

    @property
    def perimeter(self) -> float:
        return 2.0 * np.pi * self.radius


Loop = Union[RectangularLoop, CircularLoop]


@dataclass(frozen=True)
class StraightWire:
    """Infinite straight filament through ``point`` along ``direction``."""

    point: Vec3
    direction: Vec3
    current: float

    def __post_init__(self):
        object.__setattr__(self, "point", vec3(self.point))
        object.__setattr__(self, "direction", unit(self.direction))


@dataclass(frozen=True)
class Solenoid:
    """Stack of ``round(M * L)`` coaxial circular loops of radius ``radius``.

    ``loops_per_length`` is M and ``length`` is L. The analytic evaluators
    treat the solenoid as infinitely long; the loop stack is its finite
    counterpart.
    """

    axis_point: Vec3
    radius: float
    loops_per_length: float
    length: float
    current: float
    axis_dir: Vec3 = field(default_factory=lambda: _ZHAT.copy())
    include_axial_wire: bool = False

    def __post_init__(self):
        object.__setattr__(self, "axis_point", vec3(self.axis_point))
        object.__setattr__(self, "axis_dir", unit(self.axis_dir))
        for name in ("radius", "loops_per_length", "length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.n_loops < 1:
            raise ValueError("loops_per_length * length must round to at least one loop")

    @property
    def n_loops(self) -> int:
        return int(round(self.loops_per_length * self.length))

    def interior_field(self, const: PhysicalConstants = GAUSSIAN) -> float:
        """Axial field strength 4 pi I M / c inside the ideal solenoid."""
        return 4.0 * np.pi * self.current * self.loops_per_length / const.c

    def flux(self, const: PhysicalConstants = GAUSSIAN) -> float:
        return np.pi * self.radius**2 * self.interior_field(const)

    def axial_wire(self) -> StraightWire:
        return StraightWire(self.axis_point, self.axis_dir, self.current)


@dataclass(frozen=True)
class CircuitElement:
    position: Vec3
    tangent: Vec3
    dl: float
    current: float
    drift: DriftParams


class ElementArray:
    """A discretized filament stored column-wise.

    Iterating or indexing yields :class:`CircuitElement` values; the numeric
    kernels use the arrays directly.
    """

    def __init__(self, positions, tangents, dl, current, n, e_carrier, sigma, v_d):
        self.positions = np.ascontiguousarray(positions, dtype=float).reshape(-1, 3)
        count = len(self.positions)
        self.tangents = np.ascontiguousarray(tangents, dtype=float).reshape(count, 3)
        cols = [np.broadcast_to(np.asarray(a, dtype=float), (count,)).copy()
                for a in (dl, current, n, e_carrier, sigma, v_d)]
        self.dl, self.current, self.n, self.e_carrier, self.sigma, self.v_d = cols
        if count and np.any(self.dl <= 0):
            raise DegenerateGeometry("element lengths must be positive")
        for a in (self.positions, self.tangents, *cols):
            a.flags.writeable = False

    @classmethod
    def from_elements(cls, elements) -> "ElementArray":
        elements = list(elements)
        if not elements:
            return cls(np.zeros((0, 3)), np.zeros((0, 3)), [], [], [], [], [], [])
        return cls(
            [e.position for e in elements],
            [e.tangent for e in elements],
            [e.dl for e in elements],
            [e.current for e in elements],
            [e.drift.n for e in elements],
            [e.drift.e_carrier for e in elements],
            [e.drift.sigma for e in elements],
            [e.drift.v_d for e in elements],
        )

    @classmethod
    def concatenate(cls, parts) -> "ElementArray":
        parts = list(parts)
        if not parts:
            return cls.from_elements([])
        return cls(*[np.concatenate([getattr(p, name) for p in parts])
                     for name in ("positions", "tangents", "dl", "current", "n", "e_carrier", "sigma", "v_d")])

    def __len__(self) -> int:
        return len(self.positions)

    def __getitem__(self, i: int) -> CircuitElement:
        return CircuitElement(
            position=self.positions[i].copy(),
            tangent=self.tangents[i].copy(),
            dl=float(self.dl[i]),
            current=float(self.current[i]),
            drift=DriftParams(float(self.n[i]), float(self.e_carrier[i]), float(self.sigma[i]), float(self.v_d[i])),
        )

    def __iter__(self) -> Iterator[CircuitElement]:
        return (self[i] for i in range(len(self)))

    def current_moments(self) -> np.ndarray:
        """``I dl t`` for every element, shape ``(N, 3)``."""
        return (self.current * self.dl)[:, None] * self.tangents

    @property
    def total_length(self) -> float:
        return float(np.sum(self.dl))

    @property
    def min_dl(self) -> float:
        return float(np.min(self.dl))

    def with_drift(self, drift: DriftParams) -> "ElementArray":
        return ElementArray(self.positions, self.tangents, self.dl, self.current,
                            drift.n, drift.e_carrier, drift.sigma, drift.v_d)


def _from_local(loop, local_pos, local_tan, e1, e2, dl) -> ElementArray:
    pos = loop.center + local_pos[:, :1] * e1 + local_pos[:, 1:] * e2
    tan = local_tan[:, :1] * e1 + local_tan[:, 1:] * e2
    d = loop.drift
    return ElementArray(pos, tan, dl, loop.current, d.n, d.e_carrier, d.sigma, d.v_d)


def discretize(loop: Loop, n: int) -> ElementArray:
    """Split a loop into straight elements, ordered along the current.

    Rectangular loops get ``n`` equal elements per side, starting with the
    ``+in_plane_axis`` arm. Circular loops become an inscribed ``n``-gon with
    one element per chord, located at the chord midpoint. Both layouts are
    centrally symmetric when ``n`` is even (circular) or always (rectangular),
    with mirrored elements stored as exact negatives about the center.
    """
    n = int(n)
    if isinstance(loop, RectangularLoop):
        if n < 1:
            raise ValueError("need at least one element per side")
        s, r = loop.arm_length, loop.half_width
        if s == 0 or r == 0:
            raise DegenerateGeometry(f"rectangular loop has a zero-length side (arm={s}, half_width={r})")
        frac = (np.arange(n) + 0.5) / n
        along = -s / 2 + frac * s
        across = -r + frac * (2 * r)
        da = np.column_stack([along, np.full(n, -r)])
        ab = np.column_stack([np.full(n, s / 2), across])
        local = np.vstack([da, ab, -da, -ab])
        ones, zeros = np.ones(n), np.zeros(n)
        t_da = np.column_stack([ones, zeros])
        t_ab = np.column_stack([zeros, ones])
        tangent = np.vstack([t_da, t_ab, -t_da, -t_ab])
        dl = np.concatenate([np.full(n, s / n), np.full(n, 2 * r / n)] * 2)
        return _from_local(loop, local, tangent, loop.in_plane_axis, loop.width_axis, dl)

    if isinstance(loop, CircularLoop):
        if n < 8:
            raise ValueError("a circular loop needs at least 8 elements")
        count = n // 2 if n % 2 == 0 else n
        theta = 2.0 * np.pi * (np.arange(count) + 0.5) / n
        apothem = loop.radius * np.cos(np.pi / n)
        local = np.column_stack([np.cos(theta), np.sin(theta)])
        tangent = np.column_stack([-np.sin(theta), np.cos(theta)])
        if n % 2 == 0:
            local = np.vstack([local, -local])
            tangent = np.vstack([tangent, -tangent])
        e1, e2 = orthonormal_pair(loop.normal)
        dl = 2.0 * loop.radius * np.sin(np.pi / n)
        return _from_local(loop, apothem * local, tangent, e1, e2, np.full(n, dl))

    raise TypeError(f"cannot discretize {type(loop).__name__}")


def solenoid_to_loops(s: Solenoid) -> tuple[list[CircularLoop], Optional[StraightWire]]:
    """Planar loops spaced ``L / round(M L)`` apart, the middle one on the axis midpoint."""
    count = s.n_loops
    spacing = s.length / count
    offsets = (np.arange(count) - count // 2) * spacing
    loops = [CircularLoop(s.axis_point + z * s.axis_dir, s.radius, s.current, s.axis_dir) for z in offsets]
    wire = s.axial_wire() if s.include_axial_wire else None
    return loops, wire


def discretize_solenoid(s: Solenoid, n_per_loop: int) -> ElementArray:
    loops, _ = solenoid_to_loops(s)
    template = discretize(loops[0], n_per_loop)
    count = len(loops)
    shifts = np.array([loop.center - loops[0].center for loop in loops])
    positions = (template.positions[None, :, :] + shifts[:, None, :]).reshape(-1, 3)
    reps = lambda a: np.tile(a, count)  # noqa: E731
    tangents = np.tile(template.tangents, (count, 1))
    return ElementArray(positions, tangents, reps(template.dl), reps(template.current), reps(template.n),
                        reps(template.e_carrier), reps(template.sigma), reps(template.v_d))


def dipole_moment(loop: Loop, const: PhysicalConstants = GAUSSIAN) -> Vec3:
    """Magnetic moment I a / c."""
    return loop.current * loop.area_vector / const.c


def element_dipole_moment(elements: ElementArray, const: PhysicalConstants = GAUSSIAN) -> Vec3:
    """Moment reconstructed from the elements: (1 / 2c) sum I x cross dl."""
    centroid = np.sum(elements.positions * elements.dl[:, None], axis=0) / elements.total_length
    return 0.5 * np.sum(cross(elements.positions - centroid, elements.current_moments()), axis=0) / const.c


def kinetic_momentum(elements: ElementArray, carrier_mass: float) -> Vec3:
    """Total mechanical momentum of the carriers, m n sigma v_d dl summed along the loop."""
    w = carrier_mass * elements.n * elements.sigma * elements.v_d * elements.dl
    return np.sum(w[:, None] * elements.tangents, axis=0)


def loop_center(elements: ElementArray) -> Vec3:
    return np.sum(elements.positions * elements.dl[:, None], axis=0) / elements.total_length


__all__ = [
    "PointCharge", "DriftParams", "RectangularLoop", "CircularLoop", "StraightWire", "Solenoid",
    "CircuitElement", "ElementArray", "discretize", "solenoid_to_loops", "discretize_solenoid",
    "dipole_moment", "element_dipole_moment", "kinetic_momentum", "loop_center",
]
