"""Moments through Sylvester solves and the reduced families built on them.

For a realization ``(A, B, C, D)`` and a generator ``(L, S)`` with disjoint
spectra, ``A Pi + B L = Pi S`` has a unique solution and the row
``C Pi + D L`` carries the moments of the system at ``sigma(S)``.  The
``nu``-th order models ``(S - G L, G, H)`` with ``H = C Pi + D L`` match
those moments for every admissible ``G``; choosing ``H = L`` instead gives
models that asymptotically track the generator output.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize

from . import linalg as la
from .errors import (BudgetExhausted, NotObservable, PlacementFailed, SpectraOverlap,
                     Unstable, UnstableSystem)
from .lti import Realization, is_minimal, moment_resolvent, observability_matrix
from .siggen import BlockGenerator, SignalGenerator

PLACEMENT_COND_MAX = 1e12


def _as_generator(g):
    return g.as_generator() if isinstance(g, BlockGenerator) else g


# ---------------------------------------------------------------------------
# moments

@dataclass(frozen=True, eq=False)
class MomentSet:
    generator: SignalGenerator
    values: np.ndarray
    pi: la.SylvesterSolution

    def chain_moments(self) -> np.ndarray:
        """Derivative-form moments eta_0..eta_{nu-1} for a single real chain."""
        return chain_moments(self.values)


def chain_moments(values) -> np.ndarray:
    """Convert ``C Pi`` of a Jordan chain (superdiagonal ones, L = e_1) to
    the derivative-form moments: ``eta_k = (-1)^k (C Pi)_k``."""
    v = np.asarray(values).ravel()
    return v * (-1.0) ** np.arange(v.size)


def moments_of(sys: Realization, g, require_observable=True, check_minimal=False) -> MomentSet:
    """Solve the moment Sylvester equation and return ``C Pi + D L``."""
    gen = _as_generator(g)
    if require_observable and not gen.is_observable():
        raise NotObservable(f"(L, S) of {gen.name or 'generator'} is not observable")
    if check_minimal and not is_minimal(sys):
        warnings.warn(f"{sys!r} is not minimal; moments may not determine it", stacklevel=2)
    sol = la.solve_sylvester(sys.A, sys.B, gen.L, gen.S)
    values = sys.C @ sol.pi + sys.D @ gen.L
    return MomentSet(generator=gen, values=values, pi=sol)


def interpolation_points(S, rtol=1e-3):
    """Distinct eigenvalues of ``S`` with algebraic multiplicities.

    Multiple eigenvalues of Jordan blocks come back from ``eig`` spread by
    roughly ``eps^(1/m)``; clusters are merged and represented by their mean.
    """
    w = la.eigenvalues(S)
    pts: list[list[complex]] = []
    for lam in w:
        for c in pts:
            if abs(np.mean(c) - lam) <= rtol * max(1.0, abs(lam)):
                c.append(lam)
                break
        else:
            pts.append([lam])
    out = []
    for c in pts:
        centre = complex(np.mean(c))
        if abs(centre.imag) <= 1e-12 * max(1.0, abs(centre)):
            centre = complex(centre.real, 0.0)
        out.append((centre, len(c)))
    return out


def moment_mismatch(sys_a: Realization, sys_b: Realization, S) -> list[tuple[complex, int, float]]:
    """Relative disagreement of eta_0..eta_{m-1} at every point of sigma(S)."""
    rows = []
    for s, m in interpolation_points(S):
        for k in range(m):
            a = moment_resolvent(sys_a, s, k)
            b = moment_resolvent(sys_b, s, k)
            rows.append((s, k, abs(a - b) / max(1.0, abs(a))))
    return rows


# ---------------------------------------------------------------------------
# reduced family

@dataclass(frozen=True, eq=False)
class ReducedModel:
    """``(F, G, H) = (S - G L, G, H)``."""

    S: np.ndarray
    L: np.ndarray
    G: np.ndarray
    H: np.ndarray

    @property
    def F(self) -> np.ndarray:
        return self.S - self.G @ self.L

    @property
    def nu(self) -> int:
        return self.S.shape[0]

    def realization(self, name="reduced") -> Realization:
        return Realization(self.F, self.G, self.H, [[0.0]], name=name)

    def abscissa(self) -> float:
        return la.spectral_abscissa(self.F)

    def is_stable(self, margin=0.0) -> bool:
        return self.abscissa() < -margin


def _column(G, nu):
    G = np.asarray(G, dtype=float).reshape(-1, 1)
    if G.shape[0] != nu:
        raise ValueError(f"G must have {nu} entries, got {G.shape[0]}")
    return G


def _check_disjoint(F, S):
    tau = la.eig_tolerance(F, S)
    gap = la.spectral_gap(np.linalg.eigvals(F), np.linalg.eigvals(S))
    if gap <= tau:
        raise SpectraOverlap(f"sigma(S - G L) meets sigma(S): gap {gap:.3e}")


def reduce(sys: Realization, g, G) -> ReducedModel:
    ms = moments_of(sys, g)
    gen = ms.generator
    G = _column(G, gen.nu)
    _check_disjoint(gen.S - G @ gen.L, gen.S)
    return ReducedModel(S=gen.S.copy(), L=gen.L.copy(), G=G, H=ms.values.real.copy())


def tracking_family(g, G) -> ReducedModel:
    """Member of the stable family with ``H = L``; it tracks ``theta``."""
    gen = _as_generator(g)
    G = _column(G, gen.nu)
    model = ReducedModel(S=gen.S.copy(), L=gen.L.copy(), G=G, H=gen.L.copy())
    a = model.abscissa()
    if a >= 0:
        raise Unstable(f"sigma(S - G L) not in the open left half-plane (abscissa {a:.3e})")
    return model


def matches_moments(model: ReducedModel, sys: Realization, rtol=1e-8) -> bool:
    """Whether a reduced model reproduces the moments of ``sys`` at sigma(S).

    Compared through resolvent powers, independently of any particular
    Sylvester basis.
    """
    rows = moment_mismatch(model.realization(), sys, model.S)
    return all(err <= rtol for _, _, err in rows)


# ---------------------------------------------------------------------------
# tracking conditions

@dataclass(frozen=True)
class TrackingReport:
    residual: float
    residual_vector: np.ndarray
    tracks: bool
    tol: float
    block_residuals: tuple = ()
    block_tracks: tuple = ()


def check_tracking_condition(sys: Realization, g, tol=1e-8) -> TrackingReport:
    """Algebraic tracking test ``L = C Pi (+ D L)`` for a stable system.

    For a :class:`BlockGenerator` the solution is split column-wise into the
    blocks and each block residual is reported as well.
    """
    if la.spectral_abscissa(sys.A) >= 0:
        raise UnstableSystem("tracking condition requires sigma(A) in the open left half-plane")
    gen = _as_generator(g)
    ms = moments_of(sys, gen, require_observable=False)
    r = (gen.L - ms.values).ravel()
    res = float(np.max(np.abs(r))) if r.size else 0.0
    blocks, verdicts = (), ()
    if isinstance(g, BlockGenerator):
        d1 = g.dims[0]
        parts = (r[:d1], r[d1:])
        blocks = tuple(float(np.max(np.abs(p))) for p in parts)
        verdicts = tuple(b < tol for b in blocks)
    return TrackingReport(res, r, res < tol, tol, blocks, verdicts)


# ---------------------------------------------------------------------------
# choosing G

def _match_error(got, want):
    got, want = np.asarray(got, complex), np.asarray(want, complex)
    cost = np.abs(got[:, None] - want[None, :])
    i, j = linear_sum_assignment(cost)
    return cost[i, j]


def _multiplicity(p, poles, rtol=1e-9):
    return int(np.sum(np.abs(np.asarray(poles) - p) <= rtol * max(1.0, abs(p))))


def design_G(S, L, desired_poles, atol=1e-6) -> np.ndarray:
    """Output-injection gain with ``sigma(S - G L) = desired_poles``.

    Ackermann's formula on the dual pair: ``G = phi(S) W_o^{-1} e_nu`` where
    ``W_o`` is the observability matrix and ``phi`` the desired polynomial.
    """
    S = la.as_matrix(S, "S")
    nu = S.shape[0]
    L = np.asarray(L, dtype=float).reshape(1, nu)
    poles = np.asarray(desired_poles, dtype=complex).ravel()
    if poles.size != nu:
        raise ValueError(f"need {nu} poles, got {poles.size}")
    coeffs = np.poly(poles)
    if np.max(np.abs(coeffs.imag)) > 1e-9 * max(1.0, np.max(np.abs(coeffs))):
        raise ValueError("desired poles must be closed under conjugation")
    coeffs = coeffs.real

    Wo = observability_matrix(L, S)
    if la.rank(Wo.T, equilibrate=True) < nu:
        raise NotObservable("(L, S) is not observable")
    cond = np.linalg.cond(Wo)
    if cond > PLACEMENT_COND_MAX:
        raise PlacementFailed(f"observability matrix condition {cond:.2e} too large")

    phi = np.zeros_like(S)
    Sk = np.eye(nu)
    for c in coeffs[::-1]:
        phi += c * Sk
        Sk = Sk @ S
    e = np.zeros((nu, 1))
    e[-1, 0] = 1.0
    G = phi @ np.linalg.solve(Wo, e)

    got = np.linalg.eigvals(S - G @ L)
    err = _match_error(got, poles)
    eps_s = np.finfo(float).eps * max(1.0, np.linalg.norm(S, 2) + np.linalg.norm(G, 2))
    allowed = np.array([max(atol, 10 * eps_s ** (1.0 / _multiplicity(p, poles))) * max(1.0, abs(p))
                        for p in poles])
    if np.any(err > allowed.max()):
        raise PlacementFailed(f"placed spectrum misses target by {err.max():.3e}")
    return G


@dataclass(frozen=True)
class StabilizationResult:
    G: np.ndarray
    abscissa: float
    evaluations: int
    trace: tuple
    method: str


class _Reached(Exception):
    pass


def design_G_stabilize(
    template: Callable[[np.ndarray], np.ndarray],
    n_params: int,
    margin: float = 0.0,
    budget: int = 20000,
    seed: int = 0,
    starts: int = 64,
    scale: float = 1.0,
    warm_starts: Sequence = (),
    pair=None,
    n_refine: int = 4,
) -> StabilizationResult:
    """Search a parameter vector ``G`` with ``abscissa(template(G)) < -margin``.

    Multi-start Gaussian sampling (deterministic under ``seed``) followed by
    Nelder-Mead refinement of the spectral abscissa from the best
    candidates.  When ``pair = (S, L)`` is given and the template is
    ``S - G L`` the gain is placed directly instead.

    Raises
    ------
    BudgetExhausted
        with the best vector, its abscissa and the best-so-far trace.
    """
    target = -margin
    evals = 0
    best = [None, np.inf]
    trace: list[float] = []

    def f(g):
        nonlocal evals
        if evals >= budget:
            raise StopIteration
        evals += 1
        a = la.spectral_abscissa(template(np.asarray(g, dtype=float).reshape(-1, 1)))
        if a < best[1]:
            best[0], best[1] = np.array(g, dtype=float).copy(), a
            trace.append(a)
        if a < target:
            raise _Reached
        return a

    def done(method):
        return StabilizationResult(best[0].reshape(-1, 1), float(best[1]), evals, tuple(trace), method)

    if pair is not None:
        S, L = pair
        nu = np.asarray(S).shape[0]
        poles = -(margin + 1.0) - 0.25 * np.arange(nu)
        try:
            G = design_G(S, L, poles)
            f(G.ravel())
        except _Reached:
            return done("placement")
        except (NotObservable, PlacementFailed, StopIteration):
            pass

    rng = np.random.default_rng(seed)
    warm = [np.asarray(w, dtype=float).ravel() for w in warm_starts]
    scored = []
    try:
        for c in warm:
            f(c)
        for _ in range(starts):
            c = scale * rng.standard_normal(n_params)
            scored.append((f(c), len(scored), c))
        scored.sort(key=lambda t: (t[0], t[1]))
        queue = warm + [c for _, _, c in scored[:n_refine]]
        for i, x0 in enumerate(queue):
            share = evals + (budget - evals) // (len(queue) - i)
            # restarts re-inflate the simplex after Nelder-Mead stalls
            while evals < share:
                res = minimize(f, x0, method="Nelder-Mead",
                               options={"maxfev": share - evals, "xatol": 1e-10, "fatol": 1e-12})
                if np.allclose(res.x, x0):
                    break
                x0 = res.x
    except _Reached:
        return done("search")
    except StopIteration:
        pass
    raise BudgetExhausted(
        f"no G with abscissa < {target:.3g} within {budget} evaluations "
        f"(best {best[1]:.4g})", best=None if best[0] is None else best[0].reshape(-1, 1),
        abscissa=float(best[1]), trace=trace)
