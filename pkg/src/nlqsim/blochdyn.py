"""Bloch-sphere dynamics of qubit pairs under a reduced nonlinearity.

The nonlinear term alone rotates a Bloch vector (x, y, z) around its line
of latitude at rate kbar(z):

    d/dt (x, y, z) = kbar(z) (-y, x, 0).

An optional linear drive omega(t) about a fixed axis adds the usual rigid
rotation, omega(t) * (axis x v).  Pairs of states with fixed Bloch-sphere
separation alpha are parameterized by the midpoint polar angle phi and the
rotation theta about the midpoint (midpoint gauged into the xz plane):

    x_pm = cos(a/2) sin(phi) +- sin(a/2) cos(phi) cos(theta)
    y_pm = +- sin(a/2) sin(theta)
    z_pm = cos(a/2) cos(phi) -+ sin(a/2) sin(phi) cos(theta)
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import _ode
from .nonlinearity import ReducedNonlinearity

UNIT_TOL = 1e-9


def _as_unit(v, tol=UNIT_TOL) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("Bloch vector must be a real 3-vector")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > tol:
        raise ValueError(f"Bloch vector must be unit length, |v| = {n}")
    return v / n


@dataclass(frozen=True)
class PairOrientation:
    """Two Bloch vectors at separation ``alpha``, midpoint in the xz plane.

    alpha : separation angle on the Bloch sphere, in [0, pi]
    phi   : polar angle of the midpoint from the +z axis, in [0, pi]
    theta : rotation about the midpoint, in [0, 2*pi)
    """

    alpha: float
    phi: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= math.pi + 1e-12:
            raise ValueError(f"alpha must be in [0, pi], got {self.alpha}")
        if not 0.0 <= self.phi <= math.pi + 1e-12:
            raise ValueError(f"phi must be in [0, pi], got {self.phi}")

    def vectors(self):
        return pair_to_bloch(self)

    def z_pair(self):
        """Latitudes (z_plus, z_minus) of the two states."""
        ca, sa = math.cos(self.alpha / 2), math.sin(self.alpha / 2)
        zp = ca * math.cos(self.phi) - sa * math.sin(self.phi) * math.cos(self.theta)
        zm = ca * math.cos(self.phi) + sa * math.sin(self.phi) * math.cos(self.theta)
        return zp, zm


@dataclass(frozen=True)
class DriveSchedule:
    """Rotation about a fixed unit axis at (possibly time-dependent) rate omega."""

    axis: np.ndarray
    omega: Union[float, Callable[[float], float]]

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if axis.shape != (3,):
            raise ValueError("drive axis must be a 3-vector")
        n = np.linalg.norm(axis)
        if n < 1e-12:
            raise ValueError("drive axis must be nonzero")
        object.__setattr__(self, "axis", axis / n)

    def rate(self, t: float) -> float:
        return self.omega(t) if callable(self.omega) else float(self.omega)


def x_drive(omega) -> DriveSchedule:
    return DriveSchedule(np.array([1.0, 0.0, 0.0]), omega)


@dataclass
class SimTrace:
    """Time-stamped integrator output.

    ``states`` has shape (T, k, 3) for k co-evolved Bloch vectors, (T, d)
    complex for state-vector runs, or (T,) for scalar overlap traces.
    ``overlaps`` carries cos(alpha) for Bloch pairs / |<psi|phi>| where the
    producer records it.
    """

    times: np.ndarray
    states: np.ndarray
    step_stats: _ode.StepStats
    overlaps: Optional[np.ndarray] = None
    failed: bool = False
    failure_reason: str = ""
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        """CSV export: header t,x,y,z[,x2,y2,z2,cos_alpha] for Bloch traces,
        t,overlap for scalar overlap traces, and t,re_k,im_k columns for
        complex amplitude traces; one row per sample."""
        buf = io.StringIO()
        if self.states.ndim == 3:
            pair = self.states.shape[1] == 2
            buf.write("t,x,y,z,x2,y2,z2,cos_alpha\n" if pair else "t,x,y,z\n")
            for i, t in enumerate(self.times):
                row = [t, *self.states[i, 0]]
                if pair:
                    row.extend(self.states[i, 1])
                    row.append(float(np.dot(self.states[i, 0], self.states[i, 1])))
                buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        elif self.states.ndim == 2:
            dim = self.states.shape[1]
            buf.write("t," + ",".join(f"re_{k},im_{k}" for k in range(dim)) + "\n")
            for i, t in enumerate(self.times):
                row = [t]
                for amp in self.states[i]:
                    row.extend((amp.real, amp.imag))
                buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        else:
            buf.write("t,overlap\n")
            for t, c in zip(self.times, np.atleast_1d(self.states)):
                buf.write(f"{t:.17g},{float(c):.17g}\n")
        return buf.getvalue()


def pair_to_bloch(p: PairOrientation):
    """Closed-form Bloch vectors of the oriented pair."""
    ca, sa = math.cos(p.alpha / 2), math.sin(p.alpha / 2)
    sp, cp = math.sin(p.phi), math.cos(p.phi)
    st, ct = math.sin(p.theta), math.cos(p.theta)
    vp = np.array([ca * sp + sa * cp * ct, sa * st, ca * cp - sa * sp * ct])
    vm = np.array([ca * sp - sa * cp * ct, -sa * st, ca * cp + sa * sp * ct])
    return vp, vm


def optimal_pair(alpha: float) -> PairOrientation:
    """Orientation maximizing the quadratic-nonlinearity separation rate."""
    return PairOrientation(alpha, math.pi / 2, 3 * math.pi / 4)


def nonlinear_flow_rate(kbar: ReducedNonlinearity, v) -> np.ndarray:
    """Instantaneous velocity of a Bloch vector under the nonlinearity alone."""
    v = _as_unit(v)
    k = kbar(v[2])
    return np.array([-k * v[1], k * v[0], 0.0])


def ip_rate_vectors(kbar: ReducedNonlinearity, v1, v2) -> float:
    """Rate of change of v1 . v2 under the nonlinear flow, from raw vectors."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    cross_z = v1[0] * v2[1] - v1[1] * v2[0]
    return float(cross_z * (kbar(v1[2]) - kbar(v2[2])))


def ip_rate(kbar: ReducedNonlinearity, p: PairOrientation) -> float:
    """Rate of change of cos(alpha) for an oriented pair:

    d/dt cos(alpha) = sin(alpha) sin(phi) sin(theta) (kbar(z_minus) - kbar(z_plus)).
    """
    zp, zm = p.z_pair()
    return float(
        math.sin(p.alpha) * math.sin(p.phi) * math.sin(p.theta) * (kbar(zm) - kbar(zp))
    )


def _flow(kbar, drive):
    def f(t, y):
        v = y.reshape(-1, 3)
        k = kbar(v[:, 2])
        dv = np.empty_like(v)
        dv[:, 0] = -k * v[:, 1]
        dv[:, 1] = k * v[:, 0]
        dv[:, 2] = 0.0
        if drive is not None:
            w = drive.rate(t)
            dv += w * np.cross(np.broadcast_to(drive.axis, v.shape), v)
        return dv.reshape(-1)

    return f


def _renorm_rows(y):
    v = y.reshape(-1, 3)
    return (v / np.linalg.norm(v, axis=1, keepdims=True)).reshape(-1)


def _drift_rows(y):
    v = y.reshape(-1, 3)
    return float(np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0)))


def integrate(
    kbar: ReducedNonlinearity,
    drive: Optional[DriveSchedule],
    initial,
    duration: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    t_eval: Optional[np.ndarray] = None,
) -> SimTrace:
    """Integrate one or two Bloch vectors under nonlinearity plus drive.

    The flow is d/dt v = kbar(z) (-y, x, 0) + omega(t) (axis x v).  States
    are projected back to the unit sphere after each accepted step; the
    worst pre-projection drift is recorded in the step stats.  Step-size
    underflow returns a trace with ``failed`` set and the partial history.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    vs = np.atleast_2d(np.asarray(initial, dtype=float))
    if vs.shape[1] != 3 or vs.shape[0] not in (1, 2):
        raise ValueError("initial must be one or two Bloch 3-vectors")
    vs = np.stack([_as_unit(v) for v in vs])

    if duration == 0.0:
        states = vs[np.newaxis]
        overlaps = None
        if vs.shape[0] == 2:
            overlaps = np.array([float(np.dot(vs[0], vs[1]))])
        return SimTrace(np.array([0.0]), states, _ode.StepStats(), overlaps=overlaps)

    res = _ode.solve(
        _flow(kbar, drive), 0.0, float(duration), vs.reshape(-1),
        rtol=rtol, atol=atol, t_eval=t_eval,
        renorm=_renorm_rows, norm_drift=_drift_rows,
    )
    states = res.ys.reshape(len(res.ts), -1, 3)
    overlaps = None
    if states.shape[1] == 2:
        overlaps = np.einsum("ij,ij->i", states[:, 0], states[:, 1])
    return SimTrace(res.ts, states, res.stats, overlaps=overlaps,
                    failed=res.failed, failure_reason=res.failure_reason)
