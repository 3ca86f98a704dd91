"""Dense linear-algebra kernel.

Sylvester solves of the form ``A Pi + B L = Pi S`` (the moment equation),
their homogeneous counterpart ``M Pi = Pi S``, and the small helpers the
rest of the package leans on.  Everything here is a pure function of its
array arguments.

Vectorization uses column stacking, so that

    vec(A X - X S) = (I_nu kron A - S^T kron I_n) vec(X).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import Singular, SpectraOverlap

EIG_RTOL = 1e-8
RES_TOL = 1e-9
RANK_RTOL = 1e-10

__all__ = [
    "SylvesterSolution",
    "solve_sylvester",
    "sylvester_kron",
    "homogeneous_sylvester_basis",
    "kron",
    "eigenvalues",
    "spectral_abscissa",
    "spectral_radius",
    "spectral_gap",
    "eig_tolerance",
    "rank",
    "null_space",
    "expm",
    "vec",
    "unvec",
]


@dataclass(frozen=True)
class SylvesterSolution:
    """Solution ``pi`` of ``A pi + B L = pi S`` with its certificates."""

    pi: np.ndarray
    residual_norm: float
    rank: int


def as_matrix(a, name="matrix") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.iscomplexobj(a):
        a = a.astype(float)
    return a


def _square(a, name):
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def vec(x) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, rows, cols) -> np.ndarray:
    return np.asarray(v).reshape(rows, cols, order="F")


def eigenvalues(a) -> np.ndarray:
    """Eigenvalues sorted by (real, imag).

    For real input, complex eigenvalues are returned as exact conjugate
    pairs (the member with negative imaginary part is rebuilt from its
    partner).
    """
    a = _square(a, "A")
    if a.size == 0:
        return np.zeros(0, dtype=complex)
    w = np.linalg.eigvals(a).astype(complex)
    if not np.iscomplexobj(a):
        scale = max(1.0, float(np.max(np.abs(w))))
        real = np.abs(w.imag) <= 1e-14 * scale
        upper = w[(~real) & (w.imag > 0)]
        w = np.concatenate([w[real].real.astype(complex), upper, upper.conj()])
        if w.size != a.shape[0]:
            # unpaired roundoff; fall back to raw values
            w = np.linalg.eigvals(a).astype(complex)
    return w[np.lexsort((w.imag, w.real))]


def spectral_abscissa(a) -> float:
    a = _square(a, "A")
    if a.size == 0:
        return -np.inf
    return float(np.max(np.linalg.eigvals(a).real))


def spectral_radius(a) -> float:
    a = _square(a, "A")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def spectral_gap(wa, wb) -> float:
    """Smallest distance between two eigenvalue sets (inf if either is empty)."""
    wa = np.asarray(wa, dtype=complex).ravel()
    wb = np.asarray(wb, dtype=complex).ravel()
    if wa.size == 0 or wb.size == 0:
        return np.inf
    return float(np.min(np.abs(wa[:, None] - wb[None, :])))


def eig_tolerance(*mats) -> float:
    """Spectral-overlap tolerance: 1e-8 times the largest spectral radius."""
    rho = max((spectral_radius(m) for m in mats), default=0.0)
    return EIG_RTOL * rho


def rank(a, tol=None, equilibrate=False) -> int:
    """Numerical rank from the singular values.

    ``tol`` defaults to ``1e-10 * sigma_max``.  With ``equilibrate`` the
    columns are scaled to unit norm first, which is the appropriate notion
    for matrices whose columns differ by many orders of magnitude (e.g.
    Sylvester solutions with Jordan-chain generators).
    """
    a = as_matrix(a, "A")
    if a.size == 0:
        return 0
    if equilibrate:
        norms = np.linalg.norm(a, axis=0)
        keep = norms > 0
        a = a[:, keep] / norms[keep]
        if a.size == 0:
            return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if tol is None:
        tol = RANK_RTOL * sv[0]
    return int(np.sum(sv > tol))


def null_space(a, tol=None) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space."""
    a = as_matrix(a, "A")
    u, sv, vh = np.linalg.svd(a)
    if tol is None:
        tol = RANK_RTOL * (sv[0] if sv.size else 0.0)
    r = int(np.sum(sv > tol))
    return vh[r:].conj().T


def expm(a, t=1.0) -> np.ndarray:
    a = _square(a, "A")
    return sla.expm(a * t)


def _check_sylvester_shapes(A, B, L, S):
    A = _square(A, "A")
    S = _square(S, "S")
    B = as_matrix(B, "B")
    L = as_matrix(L, "L")
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"B has {B.shape[0]} rows, A is {A.shape[0]}x{A.shape[0]}")
    if L.shape[1] != S.shape[0]:
        raise ValueError(f"L has {L.shape[1]} columns, S is {S.shape[0]}x{S.shape[0]}")
    if B.shape[1] != L.shape[0]:
        raise ValueError(f"B is {B.shape}, L is {L.shape}: inner sizes differ")
    return A, B, L, S


def _residual(A, B, L, S, pi):
    return float(np.linalg.norm(A @ pi + B @ L - pi @ S, "fro"))


def _residual_scale(A, B, L, S, pi):
    fro = lambda m: np.linalg.norm(m, "fro")
    return fro(A) * fro(pi) + fro(B) * fro(L) + fro(pi) * fro(S)


def sylvester_kron(A, B, L, S) -> np.ndarray:
    """Brute-force solve of ``A X + B L = X S`` through the Kronecker form."""
    A, B, L, S = _check_sylvester_shapes(A, B, L, S)
    n, nu = A.shape[0], S.shape[0]
    op = np.kron(np.eye(nu), A) - np.kron(S.T, np.eye(n))
    x = np.linalg.solve(op, -vec(B @ L))
    return unvec(x, n, nu)


def solve_sylvester(A, B, L, S) -> SylvesterSolution:
    """Solve ``A Pi + B L = Pi S`` for ``Pi`` (n x nu).

    Bartels-Stewart on complex Schur forms of ``A`` and ``S``: with
    ``A = Q T Q^H`` and ``S = U R U^H`` the transformed unknown
    ``Y = Q^H Pi U`` is found one column at a time from triangular solves.

    Raises
    ------
    SpectraOverlap
        if some eigenvalue of ``A`` lies within ``1e-8 * rho`` of one of ``S``.
    Singular
        if the triangular recursion breaks down or the residual check fails.
    """
    A, B, L, S = _check_sylvester_shapes(A, B, L, S)
    n, nu = A.shape[0], S.shape[0]
    real_input = not any(np.iscomplexobj(m) for m in (A, B, L, S))
    if n == 0 or nu == 0:
        return SylvesterSolution(pi=np.zeros((n, nu)), residual_norm=0.0, rank=0)

    wa, wb = np.linalg.eigvals(A), np.linalg.eigvals(S)
    tau = eig_tolerance(A, S)
    gap = spectral_gap(wa, wb)
    if gap <= tau:
        raise SpectraOverlap(
            f"sigma(A) and sigma(S) overlap: min distance {gap:.3e} <= {tau:.3e}")

    T, Q = sla.schur(A.astype(complex), output="complex")
    R, U = sla.schur(S.astype(complex), output="complex")
    F = -(Q.conj().T @ (B @ L) @ U)
    Y = np.zeros((n, nu), dtype=complex)
    eye = np.eye(n)
    floor = np.finfo(float).eps * max(1.0, np.linalg.norm(T, 1), np.linalg.norm(R, 1))
    for k in range(nu):
        rhs = F[:, k] + Y[:, :k] @ R[:k, k]
        diag = np.diag(T) - R[k, k]
        if np.min(np.abs(diag)) <= floor:
            raise Singular("vectorized Sylvester operator is numerically singular")
        Y[:, k] = sla.solve_triangular(T - R[k, k] * eye, rhs)
    pi = Q @ Y @ U.conj().T
    if real_input:
        pi = pi.real.copy()

    res = _residual(A, B, L, S, pi)
    scale = _residual_scale(A, B, L, S, pi)
    if res > RES_TOL * scale:
        raise Singular(f"Sylvester residual {res:.3e} exceeds {RES_TOL:g} * {scale:.3e}")
    return SylvesterSolution(pi=pi, residual_norm=res, rank=rank(pi, equilibrate=True))


def homogeneous_sylvester_basis(M, S, tol=None) -> list[np.ndarray]:
    """Basis of ``{Pi : M Pi = Pi S}``.

    Computed as the null space of ``I_nu kron M - S^T kron I_n``; the list is
    empty exactly when the spectra of ``M`` and ``S`` are disjoint.
    """
    M = _square(M, "M")
    S = _square(S, "S")
    n, nu = M.shape[0], S.shape[0]
    op = np.kron(np.eye(nu), M) - np.kron(S.T, np.eye(n))
    if tol is None:
        tol = RANK_RTOL * (np.linalg.norm(op, 2) if op.size else 0.0)
    basis = null_space(op, tol=tol)
    out = []
    for j in range(basis.shape[1]):
        b = basis[:, j]
        pivot = b[np.argmax(np.abs(b))]
        out.append(unvec(b * (abs(pivot) / pivot), n, nu))
    return out
