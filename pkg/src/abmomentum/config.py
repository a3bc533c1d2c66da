"""Scene configuration: a single JSON document with unit-suffixed keys.

Example::

    {
      "units": "natural",
      "sources": [{"type": "solenoid", "radius_cm": 1.0, "loops_per_cm": 1.0,
                   "length_cm": 100.0, "current_statA": 1.0}],
      "charges": [{"charge_esu": 1.0, "position_cm": [4.0, 0.0, 0.0]}]
    }

Unknown keys are rejected and every physical quantity is validated on load.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .ab_phase import FringeSpec
from .core_math import PhysicalConstants, Polyline, QuadratureSpec, constants_for
from .dynamics import RampProfile
from .sources import CircularLoop, DriftParams, PointCharge, RectangularLoop, Solenoid, StraightWire

Vector = Annotated[List[float], Field(min_length=3, max_length=3)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DriftConfig(_Strict):
    density_per_cm3: float = Field(1.0, gt=0)
    carrier_charge_esu: float = 1.0
    cross_section_cm2: float = Field(1.0, gt=0)

    @field_validator("carrier_charge_esu")
    @classmethod
    def _nonzero(cls, v):
        if v == 0:
            raise ValueError("carrier charge must be nonzero")
        return v

    def build(self, current: float) -> DriftParams:
        return DriftParams.for_current(current, self.density_per_cm3, self.carrier_charge_esu,
                                       self.cross_section_cm2)


class SolenoidConfig(_Strict):
    type: Literal["solenoid"]
    axis_point_cm: Vector = [0.0, 0.0, 0.0]
    axis_dir: Vector = [0.0, 0.0, 1.0]
    radius_cm: float = Field(gt=0)
    loops_per_cm: float = Field(gt=0)
    length_cm: float = Field(gt=0)
    current_statA: float
    include_axial_wire: bool = False
    elements_per_loop: int = Field(64, ge=8)

    def build(self) -> Solenoid:
        return Solenoid(self.axis_point_cm, self.radius_cm, self.loops_per_cm, self.length_cm,
                        self.current_statA, self.axis_dir, self.include_axial_wire)


class RectLoopConfig(_Strict):
    type: Literal["rect_loop"]
    center_cm: Vector = [0.0, 0.0, 0.0]
    arm_length_cm: float = Field(gt=0)
    half_width_cm: float = Field(gt=0)
    normal: Vector = [0.0, 0.0, 1.0]
    in_plane_axis: Vector = [1.0, 0.0, 0.0]
    current_statA: float
    drift: DriftConfig = DriftConfig()
    elements_per_side: int = Field(400, ge=1)

    def build(self) -> RectangularLoop:
        return RectangularLoop(self.center_cm, self.arm_length_cm, self.half_width_cm, self.current_statA,
                               self.normal, self.in_plane_axis, self.drift.build(self.current_statA))


class CircLoopConfig(_Strict):
    type: Literal["circ_loop"]
    center_cm: Vector = [0.0, 0.0, 0.0]
    radius_cm: float = Field(gt=0)
    normal: Vector = [0.0, 0.0, 1.0]
    current_statA: float
    drift: DriftConfig = DriftConfig()
    elements: int = Field(720, ge=8)

    def build(self) -> CircularLoop:
        return CircularLoop(self.center_cm, self.radius_cm, self.current_statA, self.normal,
                            self.drift.build(self.current_statA))


class WireConfig(_Strict):
    type: Literal["wire"]
    point_cm: Vector = [0.0, 0.0, 0.0]
    direction: Vector = [0.0, 0.0, 1.0]
    current_statA: float

    def build(self) -> StraightWire:
        return StraightWire(self.point_cm, self.direction, self.current_statA)


SourceConfig = Annotated[Union[SolenoidConfig, RectLoopConfig, CircLoopConfig, WireConfig],
                         Field(discriminator="type")]


class ChargeConfig(_Strict):
    charge_esu: float
    position_cm: Vector
    mass_g: Optional[float] = Field(None, gt=0)
    velocity_cm_per_s: Vector = [0.0, 0.0, 0.0]

    def build(self) -> PointCharge:
        return PointCharge(self.charge_esu, self.position_cm, self.mass_g, self.velocity_cm_per_s)


class QuadratureConfig(_Strict):
    rule: Literal["midpoint", "gauss_legendre"] = "gauss_legendre"
    n_points: int = Field(16, ge=1)
    rel_tol: float = Field(1e-14, gt=0)

    def build(self) -> QuadratureSpec:
        return QuadratureSpec(self.rule, self.n_points, self.rel_tol)


class PathsConfig(_Strict):
    path1_cm: List[Vector] = Field(min_length=2)
    path2_cm: List[Vector] = Field(min_length=2)


class FringeConfig(_Strict):
    wavelength_cm: float = Field(5e-10, gt=0)
    slit_separation_cm: float = Field(1e-4, gt=0)
    screen_distance_cm: float = Field(100.0, gt=0)
    screen_samples: int = Field(1001, ge=1)

    def build(self) -> FringeSpec:
        return FringeSpec(self.wavelength_cm, self.slit_separation_cm, self.screen_distance_cm,
                          self.screen_samples)


class RampConfig(_Strict):
    duration_s: float = Field(gt=0)
    dt_s: float = Field(gt=0)
    shape: Literal["linear", "constant"] = "linear"
    mode: Literal["frozen", "free"] = "frozen"
    t_end_s: Optional[float] = Field(None, gt=0)


class SceneConfig(_Strict):
    units: Literal["gaussian", "natural"] = "gaussian"
    sources: List[SourceConfig] = Field(min_length=1)
    charges: List[ChargeConfig] = []
    quadrature: QuadratureConfig = QuadratureConfig()
    paths: Optional[PathsConfig] = None
    fringes: Optional[FringeConfig] = None
    ramp: Optional[RampConfig] = None

    @property
    def constants(self) -> PhysicalConstants:
        return constants_for(self.units)

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


@dataclass
class Scene:
    """Physics objects built from a validated :class:`SceneConfig`."""

    config: SceneConfig
    const: PhysicalConstants
    sources: list
    element_counts: list
    charges: list
    quad: QuadratureSpec

    @property
    def current_sources(self):
        return [(s, n) for s, n in zip(self.sources, self.element_counts) if not isinstance(s, StraightWire)]

    @property
    def solenoids(self):
        return [s for s in self.sources if isinstance(s, Solenoid)]

    def paths(self) -> tuple[Polyline, Polyline]:
        if self.config.paths is None:
            raise ValueError("paths: scene has no beam paths")
        return Polyline(self.config.paths.path1_cm), Polyline(self.config.paths.path2_cm)

    def ramp(self, I0: float) -> RampProfile:
        if self.config.ramp is None:
            raise ValueError("ramp: scene has no ramp settings")
        r = self.config.ramp
        return RampProfile(I0, r.duration_s, r.shape)


def _element_count(cfg) -> Optional[int]:
    return getattr(cfg, "elements_per_side", None) or getattr(cfg, "elements_per_loop", None) \
        or getattr(cfg, "elements", None)


def build_scene(config: SceneConfig) -> Scene:
    sources = [s.build() for s in config.sources]
    return Scene(
        config=config,
        const=config.constants,
        sources=sources,
        element_counts=[_element_count(s) for s in config.sources],
        charges=[c.build() for c in config.charges],
        quad=config.quadrature.build(),
    )


def load_config(path) -> SceneConfig:
    return SceneConfig.model_validate_json(Path(path).read_text())
