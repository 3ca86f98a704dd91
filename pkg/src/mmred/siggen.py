"""Exogenous signal generators ``w' = S w, theta = L w``.

Jordan chains use superdiagonal ones with ``L = e_1``, so that
``theta(t) = sum_j w0[j] t^j / j!`` for a nilpotent block.  With this
convention the Sylvester solution of a chain at ``s1`` has columns
``(-1)^k (s1 I - A)^{-(k+1)} B``; see :func:`mmred.momentmatch.chain_moments`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import NotObservable
from .lti import observability_rank, controllability_rank


@dataclass(frozen=True, eq=False)
class SignalGenerator:
    S: np.ndarray
    L: np.ndarray
    omega0: np.ndarray
    name: str = ""

    def __post_init__(self):
        S = la.as_matrix(self.S, "S")
        nu = S.shape[0]
        if S.shape != (nu, nu):
            raise ValueError(f"S must be square, got {S.shape}")
        L = np.asarray(self.L, dtype=float).reshape(1, nu)
        w0 = np.asarray(self.omega0, dtype=float).reshape(nu)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "omega0", w0)

    @property
    def nu(self) -> int:
        return self.S.shape[0]

    def eigenvalues(self):
        return la.eigenvalues(self.S)

    def is_observable(self) -> bool:
        return observability_rank(self.L, self.S) == self.nu

    def is_minimal(self) -> bool:
        """(L, S) observable and (S, omega0) controllable."""
        return self.is_observable() and controllability_rank(self.S, self.omega0.reshape(-1, 1)) == self.nu

    def is_persistent(self, tol=1e-9) -> bool:
        """Minimal triplet with every mode on the imaginary axis."""
        w = self.eigenvalues()
        return bool(np.all(np.abs(w.real) <= tol * max(1.0, np.max(np.abs(w))))) and self.is_minimal()

    def __call__(self, times):
        return trajectory(self, times)


@dataclass(frozen=True, eq=False)
class BlockGenerator:
    """Upper block-triangular composition ``S = [[S1, S3], [0, S2]]``."""

    blocks: tuple
    S3: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if len(self.blocks) != 2:
            raise ValueError("BlockGenerator holds exactly two blocks")
        g1, g2 = self.blocks
        s3 = np.zeros((g1.nu, g2.nu)) if self.S3 is None else np.asarray(self.S3, dtype=float)
        if s3.shape != (g1.nu, g2.nu):
            raise ValueError(f"S3 must be {g1.nu}x{g2.nu}, got {s3.shape}")
        object.__setattr__(self, "S3", s3)

    @property
    def dims(self):
        return tuple(b.nu for b in self.blocks)

    @property
    def nu(self) -> int:
        return sum(self.dims)

    @property
    def S(self):
        g1, g2 = self.blocks
        return np.block([[g1.S, self.S3], [np.zeros((g2.nu, g1.nu)), g2.S]])

    @property
    def L(self):
        return np.hstack([b.L for b in self.blocks])

    @property
    def omega0(self):
        return np.concatenate([b.omega0 for b in self.blocks])

    def as_generator(self) -> SignalGenerator:
        return SignalGenerator(self.S, self.L, self.omega0, name=self.name)

    def is_observable(self) -> bool:
        return observability_rank(self.L, self.S) == self.nu

    def blocks_observable(self) -> bool:
        return all(b.is_observable() for b in self.blocks)

    def eigenvalues(self):
        return la.eigenvalues(self.S)


def jordan_block(s1: float, m: int) -> np.ndarray:
    return s1 * np.eye(m) + np.eye(m, k=1)


def _unit(m, i):
    e = np.zeros(m)
    e[i] = 1.0
    return e


def make_polynomial(k: int) -> SignalGenerator:
    """Generator of ``theta(t) = t^k``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    m = k + 1
    return SignalGenerator(jordan_block(0.0, m), _unit(m, 0), math.factorial(k) * _unit(m, k),
                           name="step" if k == 0 else ("ramp" if k == 1 else f"t^{k}"))


def make_step() -> SignalGenerator:
    return make_polynomial(0)


def make_sinusoid(w: float, omega0=(1.0, 0.0)) -> SignalGenerator:
    """``theta(t) = cos(w t)`` for the default initial condition."""
    if w <= 0:
        raise ValueError("frequency must be positive")
    S = np.array([[0.0, w], [-w, 0.0]])
    return SignalGenerator(S, [1.0, 0.0], omega0, name=f"sin{w:g}")


def make_jordan(s1, m: int, omega0=None) -> SignalGenerator:
    """m x m Jordan chain at ``s1`` with ``L = e_1``.

    A non-real ``s1 = a + jb`` yields the real Jordan form of the pair
    ``a +/- jb`` (dimension 2m), with 2x2 rotation blocks on the diagonal
    and identity blocks above it.  The default ``omega0`` is the last unit
    vector, which makes the triplet minimal.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    s1 = complex(s1)
    if s1.imag == 0:
        S = jordan_block(s1.real, m)
    else:
        a, b = s1.real, abs(s1.imag)
        rot = np.array([[a, b], [-b, a]])
        S = np.kron(np.eye(m), rot) + np.kron(np.eye(m, k=1), np.eye(2))
    nu = S.shape[0]
    w0 = _unit(nu, nu - 1) if omega0 is None else omega0
    return SignalGenerator(S, _unit(nu, 0), w0, name=f"jordan({s1.real:g}{'' if s1.imag == 0 else f'{s1.imag:+g}j'},{m})")


def compose(g1: SignalGenerator, g2: SignalGenerator, S3=None, check=True) -> BlockGenerator:
    """Stack two generators block upper-triangularly.

    With ``check`` the combined pair must pass the observability rank test.
    Two blocks sharing an eigenvalue can never form an observable
    single-output pair; pass ``check=False`` to build such structures for
    block-wise use.
    """
    bg = BlockGenerator((g1, g2), S3)
    if check and not bg.is_observable():
        raise NotObservable(
            f"composed pair ({g1.name or 'g1'} + {g2.name or 'g2'}) fails the observability rank test")
    return bg


def merge(g1: SignalGenerator, g2: SignalGenerator, check=True) -> SignalGenerator:
    """Block-diagonal composition flattened into a single generator."""
    return compose(g1, g2, check=check).as_generator()


def trajectory(g, times) -> np.ndarray:
    """``theta(t_i) = L expm(S t_i) omega0``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be nonnegative and ascending")
    S, L, w0 = g.S, g.L, g.omega0
    out = np.empty(times.size)
    for i, t in enumerate(times):
        out[i] = (L @ la.expm(S, t) @ w0).real.item()
    return out
