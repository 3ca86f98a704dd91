"""Exact-discretization simulation of generator-driven systems.

The cascade ``w' = S w, x' = A x + B L w`` is linear and autonomous in the
augmented state ``z = [w; x]``, so one step of length ``dt`` is the matrix
exponential of ``[[S, 0], [B L, A]] dt``.  No integrator tolerance enters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .lti import LoopSet, Realization
from .momentmatch import moments_of
from .siggen import BlockGenerator

DEFAULT_DT = 0.01
HORIZON_CAP = 500.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    theta: np.ndarray
    y: np.ndarray
    eps: np.ndarray
    state_dim: int
    convention: str = "y-theta"

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.theta) == len(self.y) == len(self.eps) == n):
            raise ValueError("trajectory columns differ in length")

    @property
    def horizon(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class TrackingVerdict:
    tracks: bool
    tail_error: float
    decay_fit: float
    threshold: float


def auto_horizon(A, cap=HORIZON_CAP) -> float:
    """Fifty time constants of the slowest mode, capped."""
    a = la.spectral_abscissa(A)
    if not np.isfinite(a) or a >= 0:
        return cap
    return min(50.0 / abs(a), cap)


def _grid(horizon, dt):
    if dt <= 0:
        raise ValueError("dt must be positive")
    if horizon < dt:
        raise ValueError("horizon must be at least dt")
    steps = int(math.floor(horizon / dt + 1e-9))
    return dt * np.arange(steps + 1), steps


def _propagate(Abar, z0, dt, steps):
    Phi = la.expm(Abar, dt)
    Z = np.empty((steps + 1, z0.size))
    Z[0] = z0
    for k in range(steps):
        Z[k + 1] = Phi @ Z[k]
    return Z


def _driven(A, B, C, D, g, x0, horizon, dt):
    gen = g.as_generator() if isinstance(g, BlockGenerator) else g
    S, L, w0 = gen.S, gen.L, gen.omega0
    n, nu = A.shape[0], gen.nu
    Abar = np.block([[S, np.zeros((nu, n))], [B @ L, A]])
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).ravel()
    if x0.size != n:
        raise ValueError(f"x0 has {x0.size} entries, system order is {n}")
    if horizon is None:
        horizon = auto_horizon(A)
    times, steps = _grid(horizon, dt)
    Z = _propagate(Abar, np.concatenate([w0, x0]), dt, steps)
    W, X = Z[:, :nu], Z[:, nu:]
    theta = W @ L.ravel()
    y = X @ C.ravel() + float(D[0, 0]) * theta
    return times, theta, y, n + nu


def simulate_cascade(sys: Realization, g, x0=None, horizon=None, dt=DEFAULT_DT) -> Trajectory:
    """Drive ``sys`` by the generator output; ``eps = y - theta``."""
    times, theta, y, dim = _driven(sys.A, sys.B, sys.C, sys.D, g, x0, horizon, dt)
    return Trajectory(times, theta, y, y - theta, dim, convention="y-theta")


def simulate_closed_loop(loop: LoopSet, g, x0=None, horizon=None, dt=DEFAULT_DT) -> Trajectory:
    """Feed ``r = theta`` into a closed loop; ``eps = r - y``."""
    p = loop.p_cl
    times, theta, y, dim = _driven(p.A, p.B, p.C, p.D, g, x0, horizon, dt)
    return Trajectory(times, theta, y, theta - y, dim, convention="r-y")


def simulate_tracking_loop(p_cl: Realization, g, x0=None, horizon=None, dt=DEFAULT_DT) -> Trajectory:
    """Closed-loop simulation from a bare ``r -> y`` realization."""
    loop = LoopSet(p_cl=p_cl, t_dy=p_cl, e_re=p_cl)
    return simulate_closed_loop(loop, g, x0, horizon, dt)


def steady_state_output(sys: Realization, g, times) -> np.ndarray:
    """``(C Pi + D L) expm(S t) w0``, the response on the centre manifold."""
    ms = moments_of(sys, g, require_observable=False)
    gen = ms.generator
    out = np.empty(len(times))
    for i, t in enumerate(np.asarray(times, dtype=float)):
        out[i] = (ms.values @ la.expm(gen.S, t) @ gen.omega0).real.item()
    return out


def decay_rate(times, eps, floor_rel=1e-12) -> float:
    """Exponential rate of the suffix-maximum envelope of ``|eps|``.

    Log-linear least squares over samples above ``floor_rel * max|eps|``;
    returns 0 when the envelope does not decay.
    """
    e = np.abs(np.asarray(eps, dtype=float))
    if e.size < 3 or e.max() == 0:
        return 0.0
    env = np.maximum.accumulate(e[::-1])[::-1]
    keep = env > floor_rel * env.max()
    if keep.sum() < 3:
        keep[:3] = True
    t = np.asarray(times)[keep]
    slope = np.polyfit(t, np.log(env[keep]), 1)[0]
    return float(max(-slope, 0.0))


def verdict(traj: Trajectory, threshold=None, rel=1e-4) -> TrackingVerdict:
    """Threshold the largest ``|eps|`` over the final tenth of the horizon."""
    if threshold is None:
        threshold = rel * max(float(np.max(np.abs(traj.theta))), np.finfo(float).tiny)
    T = traj.horizon
    tail = traj.times >= 0.9 * T - 1e-12
    tail_error = float(np.max(np.abs(traj.eps[tail])))
    return TrackingVerdict(tail_error < threshold, tail_error, decay_rate(traj.times, traj.eps), float(threshold))


def write_csv(traj: Trajectory, path) -> None:
    data = np.column_stack([traj.times, traj.theta, traj.y, traj.eps])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="t,theta,y,eps", comments="")


def read_csv(path) -> Trajectory:
    with open(path) as fh:
        header = fh.readline().strip()
    if header != "t,theta,y,eps":
        raise ValueError(f"unexpected trajectory header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t, th, y, e = data.T
    return Trajectory(t, th, y, e, state_dim=0, convention="unknown")
