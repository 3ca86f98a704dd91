"""Closed-loop reduction: from a plant and a high-order controller to a
low-order loop that tracks the reference by construction.

The reference modes ``(L1, S1)`` (dimension n, the plant order) and the
controller interpolation block ``(L2, S2)`` (dimension nu_C) form the
generator.  The structured reduced loop is

    A_hat = [[S1 - G1 L1, G1 C_K Pi2], [S3 - G2 h1, S2 - G2 L2]]
    B_hat = [G1; G2],  C_hat = [h1, 0],  D_hat = D

with ``A_K Pi2 + B_K L2 = Pi2 S2`` and ``h1 = L1`` when tracking is
enforced.  Then ``Pi_hat = [I; 0]`` solves the reduced Sylvester equation at
``S1`` and ``C_hat Pi_hat = L1`` holds for every ``G``: any stabilizing ``G``
gives a loop that tracks the reference.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg as la
from .errors import (BudgetExhausted, CancellationUnsafe, Improper, MomentMatchingError,
                     NotObservable, PlacementFailed, PoleHit, Unstable)
from .lti import (LoopSet, Realization, error_transfer, eval_transfer, negative_feedback,
                  to_fraction)
from .momentmatch import (ReducedModel, StabilizationResult, design_G, design_G_stabilize,
                          moments_of)
from .siggen import BlockGenerator, SignalGenerator, compose, make_jordan
from .sim import simulate_tracking_loop, verdict

__all__ = [
    "ReductionConfig", "VerificationReport", "ClosedLoopDesign", "TransferFraction",
    "build_compensator", "separated_spectrum", "reference_generator", "controller_block",
    "structured_loop", "normative_loop", "reduce_closed_loop", "certify", "certify_loop",
    "extract_controller",
]


@dataclass(frozen=True)
class ReductionConfig:
    path: str = "structured"          # or "normative"
    enforce_tracking: bool = True     # h1 = L1
    paper_literal: bool = False       # Pi1 from the homogeneous relation, G1 = B only
    try_g1_plant_input: bool = True   # attempt G1 = B before freeing G1
    g1_budget: int = 4000
    margin: float = 0.1
    budget: int = 60000
    starts: int = 64
    seed: int = 0
    tol: float = 1e-6
    sim_rel: float = 1e-4
    reference_horizon: float = 200.0
    reference_abs: float = 1e-3
    dt: float = 0.01
    cancel_tol: float = 1e-6

    def __post_init__(self):
        if self.path not in ("structured", "normative"):
            raise ValueError(f"unknown reduction path {self.path!r}")


# ---------------------------------------------------------------------------
# baseline compensator

def build_compensator(plant: Realization, desired_poles, atol=1e-4) -> Realization:
    """Observer-based compensator; first n poles to the regulator, last n to
    the observer.

    Realization ``(A - B K - Lo C, Lo, K, 0)`` driven by ``eps = r - y``; its
    state estimates ``-x``.
    """
    n = plant.n
    poles = np.asarray(desired_poles, dtype=complex).ravel()
    if poles.size != 2 * n:
        raise ValueError(f"need {2 * n} poles for an order-{n} plant, got {poles.size}")
    A, B, C = plant.A, plant.B, plant.C
    try:
        K = design_G(A.T, B.T, poles[:n]).T
        Lo = design_G(A, C, poles[n:])
    except NotObservable as exc:
        raise PlacementFailed(f"plant is not stabilizable by output feedback: {exc}") from exc
    comp = Realization(A - B @ K - Lo @ C, Lo, K, [[0.0]], name=f"{plant.name or 'plant'}_comp")
    loop = negative_feedback(plant, comp)
    got, coupling = separated_spectrum(loop.p_cl.A, n)
    err = _spectrum_error(got, poles)
    if coupling > 1e-8 or err > atol:
        raise PlacementFailed(f"closed-loop spectrum misses the request by {err:.2e}")
    return comp


def separated_spectrum(A_cl, n):
    """Spectrum of an observer-based loop through its separation structure.

    In coordinates ``[x; x + x_K]`` the loop matrix is block upper
    triangular with diagonal blocks ``A - B K`` and ``A - Lo C``.  Returns
    the union of their eigenvalues and the relative size of the (2,1) block,
    which must be at rounding level for the split to be valid.
    """
    A_cl = np.asarray(A_cl, dtype=float)
    I = np.eye(n)
    Z = np.zeros((n, n))
    T = np.block([[I, Z], [-I, I]])
    Tinv = np.block([[I, Z], [I, I]])
    At = Tinv @ A_cl @ T
    coupling = np.linalg.norm(At[n:, :n]) / max(1.0, np.linalg.norm(A_cl))
    w = np.concatenate([la.eigenvalues(At[:n, :n]), la.eigenvalues(At[n:, n:])])
    return w[np.lexsort((w.imag, w.real))], float(coupling)


def _spectrum_error(got, want):
    from scipy.optimize import linear_sum_assignment
    cost = np.abs(np.asarray(got)[:, None] - np.asarray(want)[None, :])
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max())


# ---------------------------------------------------------------------------
# generators

def reference_generator(kind: str, n: int, param=None) -> SignalGenerator:
    """Reference-mode block of dimension ``n``.

    ``step``/``ramp``/``poly`` give the nilpotent chain ``J_n(0)`` (the
    reference and its first ``n - 1`` moments at 0) with ``omega0`` set to
    produce 1, t or t^k.  ``sin`` gives the real Jordan form at ``+/- j w``,
    padded with a mode at 0 when ``n`` is odd.
    """
    kind = kind.lower()
    if kind in ("step", "ramp", "poly"):
        k = {"step": 0, "ramp": 1}.get(kind, int(param if param is not None else 0))
        if k >= n:
            raise ValueError(f"t^{k} needs a chain longer than {n}")
        w0 = np.zeros(n)
        w0[k] = float(np.prod(np.arange(1, k + 1)))
        g = make_jordan(0.0, n, omega0=w0)
        return SignalGenerator(g.S, g.L, g.omega0, name=kind if kind != "poly" else f"t^{k}")
    if kind == "sin":
        w = float(param)
        if n < 2:
            raise ValueError("a sinusoid needs at least two reference modes")
        g = make_jordan(1j * w, n // 2)
        w0 = np.zeros(g.nu)
        w0[0] = 1.0
        g = SignalGenerator(g.S, g.L, w0, name=f"sin{w:g}")
        if n % 2:
            z = SignalGenerator([[0.0]], [1.0], [0.0])
            bg = compose(g, z, check=False).as_generator()
            return SignalGenerator(bg.S, bg.L, bg.omega0, name=g.name)
        return g
    raise ValueError(f"unknown reference kind {kind!r}")


def controller_block(nuc: int, point=0.0) -> SignalGenerator:
    """Controller interpolation block: a chain of length ``nuc`` at ``point``."""
    return make_jordan(point, nuc)


def cyclic(g: SignalGenerator) -> SignalGenerator:
    """Same pair with an initial condition exciting every mode."""
    w0 = np.zeros(g.nu)
    w0[-1] = 1.0
    if not (la.rank(np.column_stack([np.linalg.matrix_power(g.S, k) @ w0 for k in range(g.nu)])) == g.nu):
        w0 = np.ones(g.nu)
    return SignalGenerator(g.S, g.L, w0, name=g.name)


# ---------------------------------------------------------------------------
# reduced loops

def _plant_pi1(plant: Realization, controller: Realization, g1: SignalGenerator, paper_literal: bool):
    n = plant.n
    if paper_literal:
        M = plant.A - controller.d * plant.B @ plant.C
        basis = la.homogeneous_sylvester_basis(M, g1.S)
        return sum(basis) if basis else np.zeros((n, g1.nu))
    loop = negative_feedback(plant, controller)
    ms = moments_of(loop.p_cl, g1, require_observable=False)
    return ms.pi.pi[:n]


def structured_loop(plant, controller, gen: BlockGenerator, G, h1, c) -> Realization:
    g1, g2 = gen.blocks
    n1, n2 = gen.dims
    G = np.asarray(G, dtype=float).reshape(-1, 1)
    G1, G2 = G[:n1], G[n1:]
    h1 = np.asarray(h1, dtype=float).reshape(1, n1)
    c = np.asarray(c, dtype=float).reshape(1, n2)
    if np.any(gen.S3):
        raise ValueError("the structured loop is defined for block-diagonal generators (S3 = 0)")
    A = np.block([[g1.S - G1 @ g1.L, G1 @ c], [-G2 @ h1, g2.S - G2 @ g2.L]])
    C = np.hstack([h1, np.zeros((1, n2))])
    return Realization(A, G, C, plant.D, name="reduced_loop")


def normative_loop(full: LoopSet, gen: BlockGenerator, G, enforce_tracking=True) -> ReducedModel:
    """Moment-matching family on the full loop at ``sigma(S)`` with the
    reference block of the output map pinned to ``L1``."""
    g = gen.as_generator()
    ms = moments_of(full.p_cl, g, require_observable=False)
    H = ms.values.real.copy()
    if enforce_tracking:
        H[:, : gen.dims[0]] = gen.blocks[0].L
    return ReducedModel(S=g.S, L=g.L, G=np.asarray(G, dtype=float).reshape(-1, 1), H=H)


# ---------------------------------------------------------------------------
# certification

@dataclass(frozen=True)
class VerificationReport:
    stability_abscissa: float
    moment_residual_pcl: float
    moment_residual_e: float
    tracking_sim_error: float
    sim_horizon: float
    reference_tail_error: float
    reference_horizon: float
    interpolation_residuals: list
    tol: float
    pcl_ok: bool
    e_ok: bool
    sim_ok: bool
    reference_ok: bool

    @property
    def consistent(self) -> bool:
        return self.pcl_ok == self.e_ok == self.sim_ok

    @property
    def stable(self) -> bool:
        return self.stability_abscissa < 0

    @property
    def verdict(self) -> bool:
        return self.stable and self.pcl_ok and self.e_ok and self.sim_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(consistent=self.consistent, stable=self.stable, verdict=self.verdict)
        return d


def certify_loop(p_cl: Realization, g_ref: SignalGenerator, config: ReductionConfig = ReductionConfig(),
                 interpolation_residuals=()) -> VerificationReport:
    """The three tracking checks on a closed loop ``r -> y``.

    (1) moments of ``p_cl`` at ``sigma(S1)`` against ``L1``; (2) moments of
    the error transfer ``1 - p_cl`` against 0; (3) simulated error under a
    reference exciting every mode of ``S1``.  Always returns a report.
    """
    tol = config.tol
    a = la.spectral_abscissa(p_cl.A)

    def residual(sys, target):
        try:
            ms = moments_of(sys, g_ref, require_observable=False)
        except MomentMatchingError:
            return float("inf")
        return float(np.max(np.abs(ms.values - target)))

    r_pcl = residual(p_cl, g_ref.L)
    r_e = residual(error_transfer(p_cl), np.zeros_like(g_ref.L))

    horizon = 500.0 if a >= 0 else min(50.0 / abs(a), 500.0)
    with np.errstate(all="ignore"):
        tr = simulate_tracking_loop(p_cl, cyclic(g_ref), horizon=horizon, dt=config.dt)
        v = verdict(tr, rel=config.sim_rel)
        rel_err = v.tail_error / max(float(np.max(np.abs(tr.theta))), 1e-300)
        tr_ref = simulate_tracking_loop(p_cl, g_ref, horizon=config.reference_horizon, dt=config.dt)
        ref = verdict(tr_ref, threshold=config.reference_abs)
    rel_err = rel_err if np.isfinite(rel_err) else float("inf")
    ref_err = ref.tail_error if np.isfinite(ref.tail_error) else float("inf")

    return VerificationReport(
        stability_abscissa=float(a),
        moment_residual_pcl=r_pcl,
        moment_residual_e=r_e,
        tracking_sim_error=float(rel_err),
        sim_horizon=float(tr.horizon),
        reference_tail_error=float(ref_err),
        reference_horizon=float(tr_ref.horizon),
        interpolation_residuals=list(interpolation_residuals),
        tol=tol,
        pcl_ok=r_pcl < tol,
        e_ok=r_e < tol,
        sim_ok=bool(rel_err < config.sim_rel),
        reference_ok=bool(ref_err < config.reference_abs),
    )


# ---------------------------------------------------------------------------
# controller extraction

@dataclass(frozen=True, eq=False)
class TransferFraction:
    num: np.ndarray
    den: np.ndarray
    cancelled: tuple = ()
    reclosure_error: float = float("nan")

    @property
    def order(self) -> int:
        return self.den.size - 1

    @property
    def proper(self) -> bool:
        return self.num.size <= self.den.size

    def poles(self):
        return np.roots(self.den)

    def zeros(self):
        return np.roots(self.num)

    def __call__(self, s):
        return complex(np.polyval(self.num, s) / np.polyval(self.den, s))

    def to_realization(self, name="K_hat") -> Realization:
        import scipy.signal
        if not self.proper:
            raise Improper("cannot realize an improper fraction", fraction=self)
        if self.order == 0:
            return Realization(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)),
                               [[self.num[-1] / self.den[-1]]], name=name)
        A, B, C, D = scipy.signal.tf2ss(self.num, self.den)
        return Realization(A, B, C, D, name=name)

    def to_dict(self) -> dict:
        return {"num": [float(v) for v in self.num], "den": [float(v) for v in self.den],
                "order": self.order, "proper": self.proper,
                "cancelled": [[float(z.real), float(z.imag)] for z in self.cancelled],
                "reclosure_error": float(self.reclosure_error)}


def _trim_leading(p, rtol=1e-10):
    p = np.atleast_1d(np.asarray(p, dtype=float))
    scale = np.max(np.abs(p)) if p.size else 0.0
    k = 0
    while k < p.size - 1 and abs(p[k]) <= rtol * scale:
        k += 1
    return p[k:]


def _zero_multiplicity(p, rtol):
    scale = np.max(np.abs(p))
    k = 0
    while k < p.size - 1 and abs(p[-1 - k]) <= rtol * scale:
        k += 1
    return k


def _cancel(num, den, tol, zero_rtol):
    """Remove common roots; roots at the origin are deflated through the
    trailing coefficients, the rest are paired by distance."""
    zn, zd = _zero_multiplicity(num, zero_rtol), _zero_multiplicity(den, zero_rtol)
    z = min(zn, zd)
    cancelled = [0j] * z
    num = num[: num.size - zn]
    den = den[: den.size - zd]
    zn, zd = zn - z, zd - z

    rn = list(np.roots(num)) if num.size > 1 else []
    rd = list(np.roots(den)) if den.size > 1 else []
    kn, kd = num[0], den[0]
    keep_n = []
    for r in rn:
        if not rd:
            keep_n.append(r)
            continue
        dist = np.abs(np.asarray(rd) - r)
        j = int(np.argmin(dist))
        rel = dist[j] / max(1.0, abs(r))
        if rel <= tol:
            cancelled.append(complex(r))
            rd.pop(j)
        elif rel <= 10 * tol:
            raise CancellationUnsafe(
                f"near-common factor at {r:.6g}: separation {rel:.2e} in ({tol:g}, {10 * tol:g}]")
        else:
            keep_n.append(r)
    num = kn * np.real_if_close(np.poly(keep_n), tol=1e6) if keep_n else np.array([kn])
    den = kd * np.real_if_close(np.poly(rd), tol=1e6) if rd else np.array([kd])
    num = np.concatenate([np.real(num), np.zeros(zn)])
    den = np.concatenate([np.real(den), np.zeros(zd)])
    norm = den[0]
    return num / norm, den / norm, tuple(cancelled)


def extract_controller(plant: Realization, reduced_loop: Realization, tol=1e-6, zero_rtol=1e-9,
                       samples=20, seed=0) -> TransferFraction:
    """``K_hat = P_hat / (P (1 - P_hat))`` as a cancelled polynomial fraction.

    With ``P = Np/Dp`` and ``P_hat = Nh/Dh`` this is
    ``Nh Dp / (Np (Dh - Nh))``.  The re-closure error is the largest relative
    deviation of ``P K_hat / (1 + P K_hat)`` from ``P_hat`` over random
    sample points.

    Raises
    ------
    Improper
        if the cancelled numerator degree exceeds the denominator degree;
        the fraction is attached to the exception.
    CancellationUnsafe
        if a numerator/denominator root pair sits just outside ``tol``.
    """
    Np, Dp = to_fraction(plant)
    Nh, Dh = to_fraction(reduced_loop)
    Np, Nh = _trim_leading(Np), _trim_leading(Nh)
    if not np.any(Np):
        raise ValueError("plant transfer function is identically zero")
    diff = _trim_leading(np.polysub(Dh, Nh))
    if not np.any(diff):
        raise ValueError("1 - P_hat vanishes identically")
    num = _trim_leading(np.polymul(Nh, Dp))
    den = _trim_leading(np.polymul(Np, diff))
    num, den, cancelled = _cancel(num, den, tol, zero_rtol)

    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.1, 2.0, samples) * np.exp(1j * rng.uniform(-np.pi / 2, np.pi / 2, samples))
    worst = 0.0
    for s in pts:
        try:
            p, ph = eval_transfer(plant, s), eval_transfer(reduced_loop, s)
        except PoleHit:
            continue
        k = np.polyval(num, s) / np.polyval(den, s)
        worst = max(worst, abs(p * k / (1 + p * k) - ph) / max(1.0, abs(ph)))
    frac = TransferFraction(num, den, cancelled, float(worst))
    if not frac.proper:
        raise Improper(f"extracted controller is improper: numerator degree {num.size - 1} "
                       f"> denominator degree {den.size - 1}", fraction=frac)
    return frac


# ---------------------------------------------------------------------------
# pipeline

@dataclass(frozen=True, eq=False)
class ClosedLoopDesign:
    plant: Realization
    controller: Realization
    full_loop: LoopSet
    generator: BlockGenerator
    pi1: np.ndarray
    pi2: np.ndarray
    G: np.ndarray
    reduced_loop: Realization
    extracted_controller: object
    report: VerificationReport
    search: StabilizationResult | None
    config: ReductionConfig
    notes: tuple = ()
    normative: ReducedModel | None = None

    @property
    def nu_c(self) -> int:
        return self.generator.dims[1]

    def to_dict(self) -> dict:
        from .files import generator_to_dict, system_to_dict
        ext = self.extracted_controller
        if isinstance(ext, TransferFraction):
            ext_d = {"status": "ok", **ext.to_dict()}
        else:
            ext_d = dict(ext)
        s = self.search
        return {
            "config": asdict(self.config),
            "plant": system_to_dict(self.plant),
            "controller": system_to_dict(self.controller),
            "generator": {"reference": generator_to_dict(self.generator.blocks[0]),
                          "controller_block": generator_to_dict(self.generator.blocks[1])},
            "G": [float(v) for v in self.G.ravel()],
            "reduced_loop": system_to_dict(self.reduced_loop),
            "extracted_controller": ext_d,
            "report": self.report.to_dict(),
            "search": None if s is None else {"abscissa": s.abscissa, "evaluations": s.evaluations,
                                              "method": s.method},
            "notes": list(self.notes),
        }


def _search(template, n_params, cfg, warm, pair=None, budget=None):
    return design_G_stabilize(template, n_params, margin=cfg.margin,
                              budget=cfg.budget if budget is None else budget,
                              seed=cfg.seed, starts=cfg.starts, scale=1.0,
                              warm_starts=warm, pair=pair)


def _blockwise_warm(gen: BlockGenerator):
    out = []
    g1, g2 = gen.blocks
    for lo, hi in ((0.5, 1.5), (1.0, 3.0)):
        try:
            a = design_G(g1.S, g1.L, -np.linspace(lo, hi, g1.nu))
            b = design_G(g2.S, g2.L, -np.linspace(lo + 0.1, hi - 0.3, g2.nu))
            out.append(np.concatenate([a.ravel(), b.ravel()]))
        except (NotObservable, PlacementFailed, ValueError):
            pass
    return out


def reduce_closed_loop(plant: Realization, controller: Realization, gen: BlockGenerator,
                       config: ReductionConfig = ReductionConfig()) -> ClosedLoopDesign:
    """Reduce the loop ``(plant, controller)`` to order ``n + nu_C``.

    Raises
    ------
    Unstable
        if the full loop is unstable, or no stabilizing ``G`` is found
        (unless ``paper_literal``, which records the failure instead).
    """
    n = plant.n
    n1, nuc = gen.dims
    if n1 != n:
        raise ValueError(f"reference block must have dimension n = {n}, got {n1}")
    notes = []
    if nuc > controller.n:
        notes.append(f"nu_C = {nuc} exceeds the controller order {controller.n}")
    full = negative_feedback(plant, controller)
    a_full = la.spectral_abscissa(full.p_cl.A)
    if a_full >= 0:
        raise Unstable(f"full loop is unstable (abscissa {a_full:.3e})")
    g1, g2 = gen.blocks
    if not g1.is_observable() or not g2.is_observable():
        raise NotObservable("generator blocks must be observable")

    pi2 = la.solve_sylvester(controller.A, controller.B, g2.L, g2.S).pi
    c = controller.C @ pi2 if controller.n else np.zeros((1, nuc))
    pi1 = _plant_pi1(plant, controller, g1, config.paper_literal)
    cpi1 = plant.C @ pi1 if n else np.zeros((1, n1))
    if config.paper_literal:
        h1 = cpi1
        notes.append(f"paper-literal: Pi1 from the homogeneous relation; "
                     f"|C Pi1 - L1| = {float(np.max(np.abs(cpi1 - g1.L))):.3e}")
    elif config.enforce_tracking:
        h1 = g1.L.copy()
    else:
        h1 = cpi1

    search = None
    G = None
    if config.path == "structured":
        build = lambda Gv: structured_loop(plant, controller, gen, Gv, h1, c).A
        if config.try_g1_plant_input or config.paper_literal:
            B = plant.B.ravel()
            tmpl = lambda g2v: build(np.concatenate([B, np.asarray(g2v).ravel()]))
            warm = [w[n1:] for w in _blockwise_warm(gen)]
            try:
                res = _search(tmpl, nuc, config, warm, budget=config.g1_budget)
                G = np.concatenate([B, res.G.ravel()]).reshape(-1, 1)
                search = StabilizationResult(G, res.abscissa, res.evaluations, res.trace, "G1=B/" + res.method)
                notes.append("G1 = B stabilizes the structured loop")
            except BudgetExhausted as exc:
                notes.append(f"G1 = B: no stabilizing G2 within {config.g1_budget} evaluations "
                             f"(best abscissa {exc.abscissa:.3e})")
                if config.paper_literal:
                    G = np.concatenate([B, exc.best.ravel()]).reshape(-1, 1)
                    search = StabilizationResult(G, exc.abscissa, config.g1_budget, tuple(exc.trace), "G1=B/failed")
        if G is None:
            try:
                res = _search(lambda Gv: build(Gv), n1 + nuc, config, _blockwise_warm(gen))
            except BudgetExhausted as exc:
                raise Unstable(f"no stabilizing G found (best abscissa {exc.abscissa:.3e})") from exc
            G, search = res.G, res
            notes.append("G1 free: the plant-input choice did not stabilize")
        reduced = structured_loop(plant, controller, gen, G, h1, c)
        normative = normative_loop(full, gen, G, config.enforce_tracking)
    else:
        model0 = normative_loop(full, gen, np.zeros(n1 + nuc), config.enforce_tracking)
        S, L = model0.S, model0.L
        try:
            res = _search(lambda Gv: S - Gv @ L, n1 + nuc, config, [], pair=(S, L))
        except BudgetExhausted as exc:
            raise Unstable(f"normative family not stabilizable (best abscissa {exc.abscissa:.3e})") from exc
        G, search = res.G, res
        normative = normative_loop(full, gen, G, config.enforce_tracking)
        reduced = normative.realization(name="reduced_loop")

    interp = _interpolation_table(full.p_cl, reduced, normative, gen)
    report = certify_loop(reduced, g1, config, interp)
    try:
        ext = extract_controller(plant, reduced, tol=config.cancel_tol)
    except Improper as exc:
        ext = {"status": "improper", **exc.fraction.to_dict()}
    except (CancellationUnsafe, ValueError) as exc:
        ext = {"status": "failed", "reason": str(exc)}
    return ClosedLoopDesign(plant, controller, full, gen, pi1, pi2, G, reduced, ext, report,
                            search, config, tuple(notes), normative)


def _interpolation_table(p_full, reduced, normative, gen):
    """Transfer values of the full loop, the reduced loop and the normative
    model at every interpolation point (None where a pole is hit)."""
    from .momentmatch import interpolation_points

    def val(sys, s, k):
        from .lti import moment_resolvent
        try:
            v = moment_resolvent(sys, s, k)
        except PoleHit:
            return None
        return [float(v.real), float(v.imag)]

    rows = []
    norm_sys = normative.realization() if normative is not None else None
    for block, g in zip(("reference", "controller"), gen.blocks):
        for s, m in interpolation_points(g.S):
            for k in range(m):
                rows.append({"block": block, "point": [float(s.real), float(s.imag)], "order": k,
                             "full": val(p_full, s, k), "reduced": val(reduced, s, k),
                             "normative": None if norm_sys is None else val(norm_sys, s, k)})
    return rows


def certify(design: ClosedLoopDesign, tol=None) -> VerificationReport:
    cfg = design.config if tol is None else _replace(design.config, tol=tol)
    return certify_loop(design.reduced_loop, design.generator.blocks[0], cfg,
                        design.report.interpolation_residuals)


def _replace(cfg, **kw):
    from dataclasses import replace
    return replace(cfg, **kw)
