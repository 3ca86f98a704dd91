"""SISO state-space realizations and the operations on them.

A :class:`Realization` stores ``(A, B, C, D)`` with transfer function
``P(s) = C (sI - A)^{-1} B + D``.  Plants are strictly proper in practice;
controllers may carry feedthrough.  Order-zero realizations (static gains)
are allowed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from . import linalg as la
from .errors import IllPosed, PoleHit


@dataclass(frozen=True, eq=False)
class Realization:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray = field(default_factory=lambda: np.zeros((1, 1)))
    name: str = ""

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            if A.size == 0:
                A = np.zeros((0, 0))
            else:
                raise ValueError(f"A must be square, got shape {A.shape}")
        n = A.shape[0]
        D = np.asarray(self.D, dtype=float).reshape(1, 1)
        if n == 0:
            B, C = np.zeros((0, 1)), np.zeros((1, 0))
        else:
            B = np.asarray(self.B, dtype=float).reshape(n, -1)
            C = np.asarray(self.C, dtype=float).reshape(-1, n)
        if B.shape != (n, 1) or C.shape != (1, n):
            raise ValueError(f"SISO shapes required: B {B.shape}, C {C.shape} for n={n}")
        for name, m in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} has non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> float:
        return float(self.D[0, 0])

    def poles(self):
        return la.eigenvalues(self.A)

    def __call__(self, s):
        return eval_transfer(self, s)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Realization{label} n={self.n}>"


def static_gain(k: float, name="") -> Realization:
    return Realization(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[k]], name=name)


@dataclass(frozen=True, eq=False)
class LoopSet:
    """The three transfers of a unity negative-feedback loop.

    ``p_cl``: r -> y, ``t_dy``: input disturbance d -> y, ``e_re``: r -> eps.
    """

    p_cl: Realization
    t_dy: Realization
    e_re: Realization


def _pole_guard(sys, s):
    if sys.n == 0:
        return
    w = np.linalg.eigvals(sys.A)
    tau = la.EIG_RTOL * max(float(np.max(np.abs(w))), abs(s), 1.0)
    if np.min(np.abs(w - s)) <= tau:
        raise PoleHit(f"s={s} is within {tau:.2e} of a pole")


def eval_transfer(sys: Realization, s) -> complex:
    """``C (sI - A)^{-1} B + D`` by a linear solve."""
    s = complex(s)
    if sys.n == 0:
        return complex(sys.d)
    _pole_guard(sys, s)
    x = np.linalg.solve(s * np.eye(sys.n) - sys.A, sys.B.astype(complex))
    return complex((sys.C @ x)[0, 0] + sys.d)


def moment_resolvent(sys: Realization, s1, k: int) -> complex:
    """k-moment at ``s1``: ``C (s1 I - A)^{-(k+1)} B`` (+ D when k = 0).

    Equals ``(-1)^k / k! * P^{(k)}(s1)``.
    """
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    s1 = complex(s1)
    if sys.n == 0:
        return complex(sys.d) if k == 0 else 0j
    _pole_guard(sys, s1)
    R = s1 * np.eye(sys.n) - sys.A
    x = sys.B.astype(complex)
    for _ in range(k + 1):
        x = np.linalg.solve(R, x)
    val = complex((sys.C @ x)[0, 0])
    return val + sys.d if k == 0 else val


def negative_feedback(P: Realization, K: Realization) -> LoopSet:
    """Close ``K`` around ``P`` with unity negative feedback, eps = r - y.

    The disturbance ``d`` enters at the plant input.  States are ordered
    ``[x_plant; x_controller]``.
    """
    dp, dk = P.d, K.d
    delta = 1.0 + dp * dk
    if abs(delta) < 1e-12:
        raise IllPosed("1 + D_P D_K = 0")
    # y = cy_x x + cy_k xk + dyr r + dyd d
    cy_x = P.C / delta
    cy_k = dp * K.C / delta
    dyr = dp * dk / delta
    dyd = dp / delta

    A = np.block([
        [P.A - dk * P.B @ cy_x, P.B @ K.C - dk * P.B @ cy_k],
        [-K.B @ cy_x, K.A - K.B @ cy_k],
    ])
    b_r = np.vstack([dk * (1 - dyr) * P.B, (1 - dyr) * K.B])
    b_d = np.vstack([P.B - dk * dyd * P.B, -dyd * K.B])
    c_y = np.hstack([cy_x, cy_k])

    base = P.name or "P"
    p_cl = Realization(A, b_r, c_y, [[dyr]], name=f"{base}_cl")
    t_dy = Realization(A, b_d, c_y, [[dyd]], name=f"{base}_dy")
    e_re = Realization(A, b_r, -c_y, [[1.0 - dyr]], name=f"{base}_err")
    return LoopSet(p_cl=p_cl, t_dy=t_dy, e_re=e_re)


def error_transfer(p_cl: Realization) -> Realization:
    """r -> eps realization ``1 - P_CL`` sharing the state of ``p_cl``."""
    return Realization(p_cl.A, p_cl.B, -p_cl.C, [[1.0 - p_cl.d]], name=f"{p_cl.name}_err")


def controllability_matrix(A, B) -> np.ndarray:
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    cols = [B]
    for _ in range(A.shape[0] - 1):
        cols.append(A @ cols[-1])
    return np.hstack(cols)


def observability_matrix(C, A) -> np.ndarray:
    A, C = np.atleast_2d(A), np.atleast_2d(C)
    rows = [C]
    for _ in range(A.shape[0] - 1):
        rows.append(rows[-1] @ A)
    return np.vstack(rows)


def controllability_rank(A, B) -> int:
    return la.rank(controllability_matrix(A, B), equilibrate=True)


def observability_rank(C, A) -> int:
    return la.rank(observability_matrix(C, A).T, equilibrate=True)


def is_stable(sys, margin: float = 0.0) -> bool:
    """True iff every eigenvalue has real part < -margin.

    Accepts a :class:`Realization` or a square matrix.
    """
    A = sys.A if isinstance(sys, Realization) else np.asarray(sys, dtype=float)
    return la.spectral_abscissa(A) < -margin


def is_minimal(sys: Realization) -> bool:
    n = sys.n
    return controllability_rank(sys.A, sys.B) == n and observability_rank(sys.C, sys.A) == n


def to_fraction(sys: Realization):
    """Numerator and denominator coefficients (highest power first)."""
    if sys.n == 0:
        return np.array([sys.d]), np.array([1.0])
    num, den = scipy.signal.ss2tf(sys.A, sys.B, sys.C, sys.D)
    num = np.trim_zeros(np.atleast_1d(num[0]), "f")
    if num.size == 0:
        num = np.zeros(1)
    return num, np.asarray(den, dtype=float)


def fd_weights(k: int, half_width: int) -> np.ndarray:
    """Central finite-difference weights for the k-th derivative on the
    offsets ``-half_width..half_width`` (unit spacing)."""
    offs = np.arange(-half_width, half_width + 1, dtype=float)
    if k >= offs.size:
        raise ValueError("stencil too narrow for this derivative order")
    V = np.vander(offs, increasing=True).T
    rhs = np.zeros(offs.size)
    rhs[k] = math.factorial(k)
    return np.linalg.solve(V, rhs)


def fd_moment(sys: Realization, s1, k: int, h=None, half_width=6) -> complex:
    """Finite-difference estimate of the k-moment from transfer samples on a
    real-axis stencil around ``s1``; a diagnostic cross-check of the
    resolvent form, accurate to O(h^(2 half_width)).

    By default ``h`` is a fixed fraction of the distance to the nearest pole.
    """
    s1 = complex(s1)
    if h is None:
        poles = np.linalg.eigvals(sys.A) if sys.n else np.array([])
        dist = np.min(np.abs(poles - s1)) if poles.size else 1.0
        h = min(0.02, dist / (6.0 * half_width))
    w = fd_weights(k, half_width)
    offs = np.arange(-half_width, half_width + 1)
    d = sum(wi * eval_transfer(sys, s1 + o * h) for o, wi in zip(offs, w)) / h**k
    return (-1) ** k / math.factorial(k) * d
