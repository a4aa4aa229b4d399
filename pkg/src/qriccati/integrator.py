"""Initial value problems for the quaternionic Riccati equation.

The equation ``q' = -(q a(t) q + b(t) q + q c(t) + d(t))`` is integrated with
an adaptive Dormand-Prince 5(4) pair. Finite-time blow-up is reported as an
escape once ``|q|`` exceeds ``escape_norm``.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from ._tableau import STATUS_COMPLETED, STATUS_ESCAPED
from .coefficients import RiccatiSystem
from .quaternion import Quaternion, qmul, to_signed

SAMPLES_PER_PERIOD = 256


class Status(enum.Enum):
    COMPLETED = "Completed"
    ESCAPED = "Escaped"
    STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class IntegrationSettings:
    """Tolerances and limits; ``max_step=None`` means ``T/64``."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float | None = None
    escape_norm: float = 1e8
    max_steps: int = 10_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "escape_norm", "max_steps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_step is not None and not self.max_step > 0:
            raise ValueError("max_step must be positive")

    def step_cap(self, T: float) -> float:
        return self.max_step if self.max_step is not None else T / 64.0

    def tightened(self, factor: float = 10.0) -> IntegrationSettings:
        return replace(self, rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)


@dataclass(eq=False)
class Trajectory:
    """Sampled IVP solution.

    ``t``/``q`` are the dense samples (uniform points plus step endpoints);
    ``step_t``/``step_q``/``step_f`` keep the accepted steps for Hermite
    interpolation via :meth:`at`.
    """

    t: np.ndarray
    q: np.ndarray
    status: Status
    t_escape: float | None
    step_t: np.ndarray
    step_q: np.ndarray
    step_f: np.ndarray
    nfev: int = 0

    @property
    def completed(self) -> bool:
        return self.status is Status.COMPLETED

    @property
    def final(self) -> np.ndarray:
        return self.step_q[-1]

    @property
    def signed(self) -> np.ndarray:
        return to_signed(self.q)

    def at(self, times) -> np.ndarray:
        """Cubic Hermite dense output at ``times`` inside the integrated span."""
        times = np.asarray(times, dtype=float)
        ts = self.step_t
        if ts.size == 1:
            return np.broadcast_to(self.step_q[0], times.shape + (4,)).copy()
        if np.any(times < ts[0]) or np.any(times > ts[-1]):
            raise ValueError("requested time outside the integrated span")
        i = np.clip(np.searchsorted(ts, times, side="right") - 1, 0, ts.size - 2)
        h = (ts[i + 1] - ts[i])[..., None]
        s = ((times - ts[i]) / (ts[i + 1] - ts[i]))[..., None]
        y0, y1 = self.step_q[i], self.step_q[i + 1]
        f0, f1 = self.step_f[i], self.step_f[i + 1]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        out = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
        # exact values at step endpoints
        exact = times == ts[i + 1]
        out[exact] = y1[exact]
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_trajectory_csv(self, buf)
        return buf.getvalue()


def riccati_rhs(sys: RiccatiSystem, t: float, q: Quaternion) -> Quaternion:
    """Quaternion right-hand side ``-(q a q + b q + q c + d)`` at ``t``."""
    a, b, c, d = (f.at(t) for f in sys.coefficients)
    return -(q * a * q + b * q + q * c + d)


def riccati_rhs_array(sys: RiccatiSystem, t, q):
    """Vectorized right-hand side on ``(..., 4)`` arrays."""
    a, b, c, d = sys.evaluate(t)
    return -(qmul(qmul(q, a), q) + qmul(b, q) + qmul(q, c) + d)


def _as_array(q0) -> np.ndarray:
    if isinstance(q0, Quaternion):
        return q0.as_array()
    return np.asarray(q0, dtype=float).reshape(4).copy()


def integrate_ivp(
    sys: RiccatiSystem,
    q0,
    t0: float,
    t1: float,
    settings: IntegrationSettings | None = None,
    *,
    samples_per_period: int = SAMPLES_PER_PERIOD,
) -> Trajectory:
    """Integrate from ``q(t0) = q0`` to ``t1`` with dense sampling.

    Dense samples sit on ``t0 + k T / samples_per_period`` plus every accepted
    step endpoint. A ``StepLimit`` status means the step budget ran out (or
    the step size underflowed), which is distinct from blow-up.
    """
    if t1 < t0:
        raise ValueError("integrate_ivp requires t0 <= t1")
    settings = settings or IntegrationSettings()
    consts, cos, sin = sys.packed
    T = sys.T
    ts, qs, fs, status, nfev = kernels.integrate(
        consts, cos, sin, T, _as_array(q0), float(t0), float(t1),
        settings.rel_tol, settings.abs_tol, settings.step_cap(T),
        settings.escape_norm, settings.max_steps, True,
    )
    traj = Trajectory(
        t=ts, q=qs, status=_status(status),
        t_escape=float(ts[-1]) if status == STATUS_ESCAPED else None,
        step_t=ts, step_q=qs, step_f=fs, nfev=int(nfev),
    )
    dt = T / samples_per_period
    n_uniform = int(np.floor((ts[-1] - t0) / dt + 1e-9)) + 1
    uniform = t0 + dt * np.arange(n_uniform)
    uniform = uniform[uniform <= ts[-1]]
    grid = np.union1d(uniform, ts)
    traj.t = grid
    traj.q = traj.at(grid)
    return traj


def _status(code: int) -> Status:
    if code == STATUS_COMPLETED:
        return Status.COMPLETED
    if code == STATUS_ESCAPED:
        return Status.ESCAPED
    return Status.STEP_LIMIT


@dataclass(frozen=True)
class Escaped:
    """Poincare map result when the solution leaves every bounded set first."""

    t_escape: float
    status: Status = Status.ESCAPED


def flow(sys: RiccatiSystem, q0, t0: float, t1: float, settings: IntegrationSettings | None = None):
    """Endpoint ``q(t1)`` as an array, or :class:`Escaped`; no dense storage."""
    settings = settings or IntegrationSettings()
    consts, cos, sin = sys.packed
    ts, qs, _, status, _ = kernels.integrate(
        consts, cos, sin, sys.T, _as_array(q0), float(t0), float(t1),
        settings.rel_tol, settings.abs_tol, settings.step_cap(sys.T),
        settings.escape_norm, settings.max_steps, False,
    )
    if status == STATUS_COMPLETED:
        return qs[-1].copy()
    if status == STATUS_ESCAPED:
        return Escaped(float(ts[-1]))
    return Escaped(float(ts[-1]), Status.STEP_LIMIT)


def poincare_map(sys: RiccatiSystem, q0, m0: int = 1, settings: IntegrationSettings | None = None):
    """Value at ``t = m0 T`` of the solution with ``q(0) = q0``.

    Returns a :class:`Quaternion`, or :class:`Escaped` when the solution
    blows up (or exhausts the step budget) before ``m0 T``.
    """
    if m0 < 1:
        raise ValueError("m0 must be >= 1")
    out = flow(sys, q0, 0.0, m0 * sys.T, settings)
    if isinstance(out, Escaped):
        return out
    return Quaternion.from_array(out)


def integrate_fixed_step(sys: RiccatiSystem, q0, t0: float, t1: float, n_steps: int, order: int = 4) -> np.ndarray:
    """Fixed-step Dormand-Prince; ``order=4`` propagates the embedded solution."""
    if order not in (4, 5):
        raise ValueError("order must be 4 or 5")
    consts, cos, sin = sys.packed
    return kernels.integrate_fixed(consts, cos, sin, sys.T, _as_array(q0), float(t0), float(t1), int(n_steps), int(order))


CSV_HEADER = ("t", "w", "x", "y", "z", "c0", "c1", "c2", "c3")


def write_trajectory_csv(traj: Trajectory, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    signed = to_signed(traj.q)
    for t, q, c in zip(traj.t, traj.q, signed):
        writer.writerow([_fmt(t), *(_fmt(v) for v in q), *(_fmt(v) for v in c)])


def _fmt(x: float) -> str:
    # adding 0.0 turns -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")
