"""Electromagnetic momentum, vector potentials and Aharonov-Bohm phases of charge plus current-loop systems."""
from .core_math import (
    GAUSSIAN,
    NATURAL,
    CirclePath,
    PhysicalConstants,
    Polyline,
    QuadratureSpec,
    cross,
    curl_fd,
    divergence_fd,
    line_integral,
)
from .errors import ABMError, DomainError, SceneError
from .sources import (
    CircuitElement,
    CircularLoop,
    DriftParams,
    ElementArray,
    PointCharge,
    RectangularLoop,
    Solenoid,
    StraightWire,
    dipole_moment,
    discretize,
    discretize_solenoid,
    solenoid_to_loops,
)

__version__ = "0.1.0"

__all__ = [
    "GAUSSIAN", "NATURAL", "CirclePath", "PhysicalConstants", "Polyline", "QuadratureSpec",
    "cross", "curl_fd", "divergence_fd", "line_integral", "ABMError", "DomainError", "SceneError",
    "CircuitElement", "CircularLoop", "DriftParams", "ElementArray", "PointCharge", "RectangularLoop",
    "Solenoid", "StraightWire", "dipole_moment", "discretize", "discretize_solenoid", "solenoid_to_loops",
    "__version__",
]
