"""Quasi-static current ramp of an ideal solenoid acting on a nearby charge.

As the current falls the vector potential outside the solenoid falls with
it, inducing ``E = -(1/c) dA/dt``. For a charge held in place, integrating
the force shows its mechanical momentum growing by exactly the ``q A / c``
that is lost, so ``p_m + q A / c`` stays constant. A charge free to move
also picks up ``(q/c) (v . grad) A``, so only the frozen case conserves it.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Iterable, TextIO

import numpy as np

from .core_math import GAUSSIAN, PhysicalConstants, Vec3, fitted_order, norm
from .errors import AsymmetricScene, InsideSolenoid, StepTooLarge
from .fields import _axial_frame, solenoid_A_analytic
from .sources import PointCharge, Solenoid

RAMP_SHAPES = ("linear", "constant")


@dataclass(frozen=True)
class RampProfile:
    """``I(t) = I0 (1 - t/T)`` clamped at zero; ``shape="constant"`` holds ``I0``."""

    I0: float
    T: float
    shape: str = "linear"

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"ramp duration must be positive, got {self.T!r}")
        if self.shape not in RAMP_SHAPES:
            raise ValueError(f"unknown ramp shape {self.shape!r}")

    def current(self, t: float) -> float:
        if self.shape == "constant":
            return self.I0
        return self.I0 * max(0.0, 1.0 - t / self.T)

    def dI_dt(self, t: float) -> float:
        if self.shape == "constant" or t > self.T:
            return 0.0
        return -self.I0 / self.T


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    p_m: Vec3
    p_e: Vec3
    p_gen: Vec3
    current: float
    position: Vec3


def induced_E(source: Solenoid, dI_dt: float, x, const: PhysicalConstants = GAUSSIAN,
              allow_interior: bool = False) -> np.ndarray:
    """Electric field ``-(1/c) (dA/dI) dI/dt`` of an ideal solenoid whose current changes.

    Outside: ``-(2 pi r^2 M / (c^2 R)) dI/dt`` along the azimuth. Points
    inside raise :class:`InsideSolenoid` unless ``allow_interior`` is set,
    in which case the interior potential is differentiated the same way.
    """
    x = np.asarray(x, dtype=float)
    _, R, _ = _axial_frame(source.axis_point, source.axis_dir, x)
    if not allow_interior and np.any(R <= source.radius):
        raise InsideSolenoid("induced-field exterior branch evaluated inside the solenoid")
    unit_current = replace(source, current=1.0)
    return -solenoid_A_analytic(unit_current, x, const) * dI_dt / const.c


def _rk4_step(f, t, y, dt):
    k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def ramp_simulation(charge: PointCharge, solenoid: Solenoid, ramp: RampProfile, dt: float,
                    const: PhysicalConstants = GAUSSIAN, mode: str = "frozen",
                    t_end: float | None = None) -> list[TrajectoryRecord]:
    """Integrate the induced-field force on a charge with fixed-step RK4.

    ``mode="frozen"`` holds the charge in place and accumulates the impulse
    on it; ``mode="free"`` also moves it (``dx/dt = p / mass``). The solenoid
    current follows ``ramp``; ``solenoid.current`` is ignored. Runs from 0
    to ``t_end`` (default ``ramp.T``), recording every step.
    """
    if dt > ramp.T / 1000 * (1 + 1e-12):
        raise StepTooLarge(f"dt={dt} exceeds T/1000={ramp.T / 1000}")
    if mode not in ("frozen", "free"):
        raise ValueError(f"mode must be 'frozen' or 'free', got {mode!r}")
    if mode == "free" and charge.mass is None:
        raise ValueError("free mode needs a charge mass")
    t_end = ramp.T if t_end is None else t_end
    n_steps = max(1, int(np.ceil(t_end / dt - 1e-9)))
    grid = [min(k * dt, t_end) for k in range(n_steps)] + [t_end]
    if 0.0 < ramp.T < t_end and ramp.T not in grid:
        # keep RK4 stages off the kink in I(t) at the end of the ramp
        grid = sorted(grid + [ramp.T])
    unit_current = replace(solenoid, current=1.0)
    q = charge.q

    def p_e(x, t):
        return q * solenoid_A_analytic(unit_current, x, const) * ramp.current(t) / const.c

    def force(x, t):
        # exterior branch only: the induced field is -(1/c) dA/dI dI/dt
        if mode == "free" and np.any(_axial_frame(solenoid.axis_point, solenoid.axis_dir, x)[1] <= solenoid.radius):
            raise InsideSolenoid(f"charge entered the solenoid at {np.asarray(x).tolist()}")
        return -q * solenoid_A_analytic(unit_current, x, const) * ramp.dI_dt(t) / const.c

    p0 = charge.mass * charge.velocity if charge.mass is not None else np.zeros(3)
    if mode == "frozen":
        induced_E(solenoid, 0.0, charge.position, const)  # rejects interior placements
        x0 = charge.position
        y = p0.copy()
        rhs = lambda t, p: force(x0, t)  # noqa: E731
        unpack = lambda y: (x0, y)  # noqa: E731
    else:
        y = np.concatenate([charge.position, p0])
        m = charge.mass
        rhs = lambda t, s: np.concatenate([s[3:] / m, force(s[:3], t)])  # noqa: E731
        unpack = lambda s: (s[:3], s[3:])  # noqa: E731

    def record(t, y):
        x, pm = unpack(y)
        pe = p_e(x, t)
        return TrajectoryRecord(t, pm.copy(), pe, pm + pe, ramp.current(t), np.array(x, dtype=float))

    out = [record(0.0, y)]
    for t0, t1 in zip(grid[:-1], grid[1:]):
        y = _rk4_step(rhs, t0, y, t1 - t0)
        out.append(record(t1, y))
    return out


def conservation_violation(records: list[TrajectoryRecord]) -> float:
    """``max_t |p_gen(t) - p_gen(0)| / |p_e(0)|``."""
    ref = records[0].p_gen
    scale = float(norm(records[0].p_e)) or 1.0
    return max(float(norm(r.p_gen - ref)) for r in records) / scale


def rk4_order_study(charge: PointCharge, solenoid: Solenoid, ramp: RampProfile, dts: Iterable[float],
                    const: PhysicalConstants = GAUSSIAN, mode: str = "free") -> tuple[np.ndarray, np.ndarray, float]:
    """Successive-halving error estimates and the fitted convergence order.

    ``dts`` should be a halving sequence. The error at ``dts[i]`` is the
    final-state difference to the run at ``dts[i+1]``. In frozen mode the
    force is constant in time and RK4 is exact, so the order is only
    measurable in free mode, where the charge's motion makes the force vary.
    """
    dts = np.asarray(list(dts), dtype=float)
    finals = []
    for dt in dts:
        last = ramp_simulation(charge, solenoid, ramp, float(dt), const, mode)[-1]
        finals.append(np.concatenate([last.position, last.p_m]) if mode == "free" else last.p_m)
    finals = np.array(finals)
    errors = norm(finals[:-1] - finals[1:])
    return dts[:-1], errors, fitted_order(dts[:-1], errors)


@dataclass(frozen=True)
class SymmetricRampReport:
    delta_p_m1: Vec3
    delta_p_e1: Vec3
    delta_p_m2: Vec3
    delta_p_e2: Vec3

    @property
    def residual1(self) -> float:
        """``|dp_m1 + dp_e1| / |dp_e1|``."""
        return float(norm(self.delta_p_m1 + self.delta_p_e1) / norm(self.delta_p_e1))

    @property
    def residual2(self) -> float:
        return float(norm(self.delta_p_m2 + self.delta_p_e2) / norm(self.delta_p_e2))

    @property
    def pair_residual(self) -> float:
        """``|dp_m1 + dp_m2| / |dp_m1|``; zero when the pair's impulses cancel."""
        return float(norm(self.delta_p_m1 + self.delta_p_m2) / norm(self.delta_p_m1))


def symmetric_ramp_check(q1: PointCharge, q2: PointCharge, solenoid: Solenoid, ramp: RampProfile,
                         dt: float, const: PhysicalConstants = GAUSSIAN,
                         t_end: float | None = None) -> SymmetricRampReport:
    """Ramp a mirror pair of frozen charges and compare momentum exchanges."""
    center = solenoid.axis_point
    scale = float(norm(q1.position - center))
    if q1.q != q2.q or norm(q2.position - (2 * center - q1.position)) > 1e-9 * scale:
        raise AsymmetricScene("second charge must equal the first and sit at its point reflection")
    deltas = []
    for q in (q1, q2):
        rec = ramp_simulation(q, solenoid, ramp, dt, const, "frozen", t_end)
        deltas += [rec[-1].p_m - rec[0].p_m, rec[-1].p_e - rec[0].p_e]
    return SymmetricRampReport(*deltas)


TRAJECTORY_COLUMNS = ["t", "p_m_x", "p_m_y", "p_m_z", "p_e_x", "p_e_y", "p_e_z",
                      "p_gen_x", "p_gen_y", "p_gen_z", "I"]


def trajectory_rows(records: list[TrajectoryRecord]) -> list[list[float]]:
    return [[r.t, *r.p_m, *r.p_e, *r.p_gen, r.current] for r in records]


def write_trajectory_csv(records: list[TrajectoryRecord], fh: TextIO, fmt: str = "{:.17g}"):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for row in trajectory_rows(records):
        writer.writerow([fmt.format(float(v)) for v in row])


__all__ = [
    "RampProfile", "TrajectoryRecord", "induced_E", "ramp_simulation", "conservation_violation",
    "rk4_order_study", "SymmetricRampReport", "symmetric_ramp_check", "write_trajectory_csv",
    "TRAJECTORY_COLUMNS",
]
