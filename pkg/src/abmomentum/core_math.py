"""Vector algebra, unit systems, path quadrature and finite-difference operators.

Vectors are plain ``numpy`` arrays of shape ``(3,)``. Vector fields are
callables mapping an array of points of shape ``(..., 3)`` to an array of
the same shape; every evaluator in :mod:`abmomentum.fields` follows that
convention, so quadrature nodes and finite-difference stencils are evaluated
in one call.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import DegenerateGeometry, NonFiniteField

Vec3 = np.ndarray
VectorField = Callable[[np.ndarray], np.ndarray]
ScalarField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PhysicalConstants:
    """Speed of light and reduced Planck constant for one unit system."""

    c: float
    hbar: float
    unit_mode: str


GAUSSIAN = PhysicalConstants(c=2.99792458e10, hbar=1.054571817e-27, unit_mode="gaussian")
NATURAL = PhysicalConstants(c=1.0, hbar=1.0, unit_mode="natural")


def constants_for(unit_mode: str) -> PhysicalConstants:
    try:
        return {"gaussian": GAUSSIAN, "natural": NATURAL}[unit_mode]
    except KeyError:
        raise ValueError(f"unknown unit_mode {unit_mode!r}; expected 'gaussian' or 'natural'") from None


@dataclass(frozen=True)
class QuadratureSpec:
    """Path quadrature settings.

    ``n_points`` is the number of Gauss-Legendre nodes per sub-segment, or
    the initial number of midpoint sub-segments per segment. The rule is
    applied at successively doubled resolution until two estimates agree to
    ``rel_tol`` (relative to the larger of the result and the integral of
    ``|f . dx|``), or ``max_refinements`` doublings have been made.
    """

    rule: str = "midpoint"
    n_points: int = 16
    rel_tol: float = 1e-10
    max_refinements: int = 14

    def __post_init__(self):
        if self.rule not in ("midpoint", "gauss_legendre"):
            raise ValueError(f"quadrature rule must be 'midpoint' or 'gauss_legendre', got {self.rule!r}")
        if int(self.n_points) != self.n_points or self.n_points < 1:
            raise ValueError(f"n_points must be a positive integer, got {self.n_points!r}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol!r}")


def vec3(v) -> Vec3:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    return arr


def cross(u, v) -> Vec3:
    """Right-handed cross product, broadcasting over leading axes."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.stack(
        [
            u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1],
            u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2],
            u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0],
        ],
        axis=-1,
    )


def norm(v) -> float | np.ndarray:
    # hypot avoids the underflow of squaring tiny components
    return np.hypot.reduce(np.asarray(v, dtype=float), axis=-1)


def unit(v) -> Vec3:
    v = vec3(v)
    n = norm(v)
    if n == 0.0:
        raise DegenerateGeometry("cannot normalize the zero vector")
    return v / n


def orthonormal_pair(normal) -> tuple[Vec3, Vec3]:
    """Two unit vectors spanning the plane perpendicular to ``normal``.

    ``(e1, e2, normal)`` is right-handed.
    """
    n = unit(normal)
    trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = unit(trial - np.dot(trial, n) * n)
    e2 = cross(n, e1)
    return e1, e2


def relative_difference(a, b) -> float:
    """``|a - b| / max(|a|, |b|)``, zero when both vanish."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(float(norm(a)) if a.ndim else abs(float(a)), float(norm(b)) if b.ndim else abs(float(b)))
    diff = float(norm(a - b)) if a.ndim else abs(float(a - b))
    if scale == 0.0:
        return 0.0
    return diff / scale


# ---------------------------------------------------------------- paths


@dataclass(frozen=True)
class Polyline:
    """Piecewise-linear path through ``vertices`` (shape ``(N, 3)``)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must have shape (N, 3), got {v.shape}")
        if len(v) < 2:
            raise DegenerateGeometry("a path needs at least 2 vertices")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    @property
    def start(self) -> Vec3:
        return self.vertices[0]

    @property
    def end(self) -> Vec3:
        return self.vertices[-1]

    @property
    def closed(self) -> bool:
        return bool(np.array_equal(self.vertices[0], self.vertices[-1]))

    @property
    def length(self) -> float:
        return float(np.sum(norm(np.diff(self.vertices, axis=0))))

    def reversed(self) -> "Polyline":
        return Polyline(self.vertices[::-1])

    def then(self, other: "Polyline") -> "Polyline":
        """Concatenate, dropping ``other``'s first vertex if it repeats our last."""
        tail = other.vertices
        if np.array_equal(tail[0], self.vertices[-1]):
            tail = tail[1:]
        return Polyline(np.vstack([self.vertices, tail]))

    def _nodes(self, rule: str, n_points: int, level: int):
        a = self.vertices[:-1]
        d = np.diff(self.vertices, axis=0)
        if rule == "gauss_legendre":
            subdiv = 2**level
            x, w = _gauss_legendre_unit(n_points)
        else:
            subdiv = n_points * 2**level
            x, w = np.array([0.5]), np.array([1.0])
        # parameter of each node along its segment, and its weight
        starts = np.arange(subdiv)[:, None] / subdiv
        t = (starts + x[None, :] / subdiv).ravel()
        wt = np.tile(w, subdiv) / subdiv
        pts = a[:, None, :] + t[None, :, None] * d[:, None, :]
        dx = wt[None, :, None] * d[:, None, :]
        return pts.reshape(-1, 3), dx.reshape(-1, 3)


@dataclass(frozen=True)
class CirclePath:
    """Circle of ``radius`` about ``center``, traversed counter-clockwise about ``normal``."""

    center: np.ndarray
    radius: float
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "normal", unit(self.normal))
        if not self.radius > 0:
            raise DegenerateGeometry(f"circle radius must be positive, got {self.radius!r}")

    closed = True

    @property
    def length(self) -> float:
        return 2.0 * np.pi * self.radius

    def _nodes(self, rule: str, n_points: int, level: int):
        # periodic midpoint rule in angle; spectrally accurate for smooth fields
        m = max(n_points, 4) * 2**level
        theta = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        e1, e2 = orthonormal_pair(self.normal)
        c, s = np.cos(theta)[:, None], np.sin(theta)[:, None]
        pts = self.center + self.radius * (c * e1 + s * e2)
        dx = (2.0 * np.pi * self.radius / m) * (-s * e1 + c * e2)
        return pts, dx


Path = Union[Polyline, CirclePath]


@lru_cache(maxsize=64)
def _gauss_legendre_unit(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def _evaluate(f: VectorField, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(pts), dtype=float)
    if vals.shape != pts.shape:
        raise ValueError(f"field returned shape {vals.shape} for points of shape {pts.shape}")
    if not np.all(np.isfinite(vals)):
        bad = pts[~np.all(np.isfinite(vals), axis=-1)][0]
        raise NonFiniteField(f"field is not finite at {bad.tolist()}")
    return vals


def line_integral(f: VectorField, path: Path, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Integral of ``f . dx`` along ``path``.

    Raises :class:`NonFiniteField` if ``f`` is NaN or infinite at a node.
    """
    previous = None
    for level in range(quad.max_refinements + 1):
        pts, dx = path._nodes(quad.rule, quad.n_points, level)
        proj = np.einsum("ij,ij->i", _evaluate(f, pts), dx)
        total = float(np.sum(proj))
        if previous is not None:
            scale = max(abs(total), float(np.sum(np.abs(proj))))
            if abs(total - previous) <= quad.rel_tol * scale:
                return total
        previous = total
    return previous


# ----------------------------------------------------- finite differences


def _stencil(x, h: float) -> np.ndarray:
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h!r}")
    x = vec3(x)
    offsets = np.vstack([np.eye(3) * h, -np.eye(3) * h])
    return x + offsets


def jacobian_fd(f: VectorField, x, h: float) -> np.ndarray:
    """Central-difference Jacobian ``J[i, j] = d f_i / d x_j``."""
    vals = _evaluate(f, _stencil(x, h))
    return ((vals[:3] - vals[3:]) / (2.0 * h)).T


def curl_fd(f: VectorField, x, h: float) -> Vec3:
    """Central-difference curl, second-order accurate in ``h``."""
    j = jacobian_fd(f, x, h)
    return np.array([j[2, 1] - j[1, 2], j[0, 2] - j[2, 0], j[1, 0] - j[0, 1]])


def divergence_fd(f: VectorField, x, h: float) -> float:
    return float(np.trace(jacobian_fd(f, x, h)))


def gradient_fd(phi: ScalarField, x, h: float) -> Vec3:
    """Central-difference gradient of a scalar field (vectorized over points)."""
    pts = _stencil(x, h)
    vals = np.asarray(phi(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteField(f"scalar field is not finite near {vec3(x).tolist()}")
    return (vals[:3] - vals[3:]) / (2.0 * h)


def gradient_field_fd(phi: ScalarField, h: float) -> VectorField:
    """Vectorized central-difference gradient ``grad phi`` as a vector field."""

    def grad(points):
        points = np.asarray(points, dtype=float)
        out = np.empty_like(points)
        for k in range(3):
            step = np.zeros(3)
            step[k] = h
            out[..., k] = (np.asarray(phi(points + step)) - np.asarray(phi(points - step))) / (2.0 * h)
        return out

    return grad


def fitted_order(steps, errors) -> float:
    """Slope of ``log(error)`` against ``log(step)`` by least squares."""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > 0
    if keep.sum() < 2:
        raise ValueError("need at least two nonzero errors to fit an order")
    return float(np.polyfit(np.log(steps[keep]), np.log(errors[keep]), 1)[0])
