import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from mmred import linalg as la
from mmred.clred import (ClosedLoopDesign, ReductionConfig, TransferFraction, build_compensator,
                         certify, certify_loop, controller_block, cyclic, extract_controller,
                         reduce_closed_loop, reference_generator, separated_spectrum,
                         structured_loop)
from mmred.errors import CancellationUnsafe, Improper, PlacementFailed, Unstable
from mmred.lti import Realization, eval_transfer, negative_feedback, static_gain
from mmred.momentmatch import moments_of
from mmred.siggen import compose, make_jordan, make_step

from conftest import random_stable

LAG = Realization([[-1.0]], [[1.0]], [[1.0]])
INTEGRATOR = Realization([[0.0]], [[1.0]], [[1.0]])


def _stable_pair(seed):
    """Random plant/controller pair whose loop is stable, plant without a pole at 0."""
    rng = np.random.default_rng(seed)
    while True:
        P = random_stable(rng, 2, margin=0.5)
        K = random_stable(rng, 2, margin=0.5)
        try:
            loop = negative_feedback(P, K)
        except Exception:
            continue
        if la.spectral_abscissa(loop.p_cl.A) < -1e-3:
            return P, K


# ---------------------------------------------------------------------------
# baseline compensator

def test_compensator_integrator():
    comp = build_compensator(INTEGRATOR, [-1.0, -2.0])
    loop = negative_feedback(INTEGRATOR, comp)
    assert_allclose(np.sort(la.eigenvalues(loop.p_cl.A).real), [-2.0, -1.0], atol=1e-12)
    assert comp.n == 1


def test_compensator_fourdisk(fourdisk, kalman, baseline_loop):
    w, coupling = separated_spectrum(baseline_loop.p_cl.A, 8)
    assert coupling < 1e-12
    want = fourdisk.poles
    for z in want:
        assert np.min(np.abs(w - z)) < 1e-4
    assert kalman.n == 8


def test_compensator_wrong_count():
    with pytest.raises(ValueError):
        build_compensator(INTEGRATOR, [-1.0])


def test_compensator_uncontrollable():
    plant = Realization(np.diag([-1.0, 1.0]), [[1.0], [0.0]], [[1.0, 1.0]])
    with pytest.raises(PlacementFailed):
        build_compensator(plant, [-1.0, -2.0, -3.0, -4.0])


# ---------------------------------------------------------------------------
# generators

def test_reference_generators():
    g = reference_generator("ramp", 3)
    assert_allclose(g.omega0, [0.0, 1.0, 0.0])
    g = reference_generator("poly", 4, 2)
    assert_allclose(g.omega0, [0.0, 0.0, 2.0, 0.0])
    g = reference_generator("sin", 3, 2.0)
    assert g.nu == 3
    assert_allclose(np.sort(np.abs(la.eigenvalues(g.S))), [0.0, 2.0, 2.0], atol=1e-12)
    with pytest.raises(ValueError):
        reference_generator("ramp", 1)
    with pytest.raises(ValueError):
        reference_generator("chirp", 2)


def test_cyclic_excites_every_mode():
    g = cyclic(make_jordan(0.0, 4))
    K = np.column_stack([np.linalg.matrix_power(g.S, k) @ g.omega0 for k in range(4)])
    assert la.rank(K) == 4


# ---------------------------------------------------------------------------
# controller extraction

def test_extract_static_unity():
    # 1/s closed by K = 1 gives 1/(s+1): K_hat = 1 after the pole at 0 cancels
    frac = extract_controller(INTEGRATOR, LAG)
    assert_allclose(frac.num, [1.0])
    assert_allclose(frac.den, [1.0])
    assert frac.cancelled == (0j,)
    assert frac.proper


def test_extract_integral_controller():
    target = Realization([[-2.0]], [[1.0]], [[2.0]])
    frac = extract_controller(LAG, target)
    # K_hat = 2 (s + 1) / s
    assert_allclose(frac.num, [2.0, 2.0], atol=1e-12)
    assert_allclose(frac.den, [1.0, 0.0], atol=1e-12)
    assert frac.reclosure_error < 1e-12
    assert frac(1.0) == pytest.approx(4.0)
    K = frac.to_realization()
    assert eval_transfer(K, 1.0) == pytest.approx(4.0)


def test_extract_improper():
    # a first-order loop around a second-order plant needs an improper controller
    plant = Realization([[-1.0, 0.0], [1.0, -2.0]], [[1.0], [0.0]], [[0.0, 1.0]])
    with pytest.raises(Improper) as info:
        extract_controller(plant, Realization([[-3.0]], [[1.0]], [[3.0]]))
    assert not info.value.fraction.proper


def test_extract_near_cancellation_unsafe():
    # plant and target zeros 5e-6 apart: neither cancel nor keep
    plant = Realization(np.diag([-1.0, -3.0]), [[1.0], [1.0]], [[1.0, 1.0]])  # zero at -2
    target = Realization(np.diag([-1.0 - 1e-5, -3.0]), [[1.0], [1.0]], [[1.0, 1.0]])  # zero at -2 - 5e-6
    with pytest.raises(CancellationUnsafe):
        extract_controller(plant, target, tol=1e-6)


@given(st.integers(0, 2000), st.floats(0.2, 5.0))
@settings(max_examples=30, deadline=None)
def test_static_controller_reclosure(seed, k):
    # closing a random plant with K = k and extracting gives back k
    rng = np.random.default_rng(seed)
    plant = random_stable(rng, 2, margin=0.5)
    loop = negative_feedback(plant, static_gain(k))
    if la.spectral_abscissa(loop.p_cl.A) >= 0:
        return
    try:
        frac = extract_controller(plant, loop.p_cl, tol=1e-6)
    except CancellationUnsafe:
        return
    assert frac.reclosure_error < 1e-8
    s0 = 0.37 + 0.2j
    assert frac(s0) == pytest.approx(k, rel=1e-6)


# ---------------------------------------------------------------------------
# pipeline

def test_toy_design(toy_design):
    d = toy_design
    assert isinstance(d, ClosedLoopDesign)
    assert d.report.verdict
    assert d.reduced_loop.n == 2
    assert any("exceeds the controller order" in n for n in d.notes)
    frac = d.extracted_controller
    assert isinstance(frac, TransferFraction)
    # the extracted controller integrates
    assert np.min(np.abs(frac.poles())) < 1e-6


def test_fourdisk_design(fourdisk_design):
    d = fourdisk_design
    rep = d.report
    assert d.reduced_loop.n == 12
    assert rep.stable and rep.verdict and rep.consistent
    assert rep.moment_residual_pcl < 1e-8
    assert rep.reference_tail_error < 1e-3
    assert any("G1 = B: no stabilizing" in n for n in d.notes)
    # with the pure plant-input choice the last reference row of A_hat is zero
    ext = d.extracted_controller
    assert isinstance(ext, dict) and ext["status"] == "improper"
    assert ext["reclosure_error"] < 1e-8


def test_plant_input_choice_is_not_stabilizing(fourdisk, kalman):
    # G1 = B leaves a zero row in the reference block of A_hat: abscissa stays at 0
    gen = compose(reference_generator("step", 8), controller_block(4), check=False)
    rng = np.random.default_rng(0)
    pi2 = la.solve_sylvester(kalman.A, kalman.B, gen.blocks[1].L, gen.blocks[1].S).pi
    c = kalman.C @ pi2
    for _ in range(20):
        G = np.concatenate([fourdisk.plant.B.ravel(), rng.standard_normal(4)])
        A = structured_loop(fourdisk.plant, kalman, gen, G, gen.blocks[0].L, c).A
        assert la.spectral_abscissa(A) >= -1e-12


def test_reduced_loop_tracks_by_construction(fourdisk_design):
    d = fourdisk_design
    g1 = d.generator.blocks[0]
    ms = moments_of(d.reduced_loop, g1, require_observable=False)
    assert_allclose(ms.values.real, g1.L, atol=1e-8)
    # Pi_hat = [I; 0]
    n1 = g1.nu
    assert_allclose(ms.pi.pi[:n1].real, np.eye(n1), atol=1e-8)
    assert_allclose(ms.pi.pi[n1:].real, 0.0, atol=1e-8)


def test_structured_and_normative_agree_on_reference_points():
    P, K = _stable_pair(1)
    gen = compose(reference_generator("step", 2), controller_block(1, -3.0))
    s = reduce_closed_loop(P, K, gen, ReductionConfig(seed=1))
    nrm = reduce_closed_loop(P, K, gen, ReductionConfig(seed=1, path="normative"))
    assert s.report.verdict and nrm.report.verdict
    for a, b in zip(s.report.interpolation_residuals, nrm.report.interpolation_residuals):
        if a["block"] == "reference":
            assert_allclose(a["reduced"], b["reduced"], atol=1e-8)
        else:
            # only the normative loop interpolates the full loop at the controller point
            assert_allclose(b["reduced"], b["full"], rtol=1e-8)


def test_paper_literal_records_failure():
    P, K = _stable_pair(1)
    gen = compose(reference_generator("step", 2), controller_block(1, -3.0))
    d = reduce_closed_loop(P, K, gen, ReductionConfig(seed=1, paper_literal=True))
    assert not d.report.verdict
    assert d.report.consistent
    assert any("paper-literal" in n for n in d.notes)


def test_unstable_full_loop():
    with pytest.raises(Unstable):
        reduce_closed_loop(INTEGRATOR, static_gain(-1.0),
                           compose(reference_generator("step", 1), make_jordan(-2.0, 1)))


def test_reference_dimension_checked():
    with pytest.raises(ValueError):
        reduce_closed_loop(LAG, static_gain(1.0), compose(reference_generator("step", 2), make_jordan(-2.0, 1)))


def test_nu_c_equal_to_controller_order():
    P, K = _stable_pair(3)
    gen = compose(reference_generator("step", 2), controller_block(K.n, -3.0))
    d = reduce_closed_loop(P, K, gen, ReductionConfig(seed=3))
    assert d.nu_c == K.n
    assert d.reduced_loop.n == P.n + K.n
    assert d.report.verdict


@pytest.mark.parametrize("seed", range(1, 7))
def test_internal_model_witness(seed):
    # plants without an integrator: the extracted step controller must carry one
    P, K = _stable_pair(seed)
    assert np.min(np.abs(P.poles())) > 1e-3
    gen = compose(reference_generator("step", 2), controller_block(1, -3.0))
    d = reduce_closed_loop(P, K, gen, ReductionConfig(seed=seed))
    assert d.report.verdict
    frac = d.extracted_controller
    assert isinstance(frac, TransferFraction)
    assert np.min(np.abs(frac.poles())) < 1e-6
    assert frac.reclosure_error < 1e-8


def test_certify_perturbed_loop_fails(fourdisk_design):
    d = fourdisk_design
    assert certify(d).verdict
    r = d.reduced_loop
    # a 0.1% gain error in the output map breaks the step moment
    bumped = Realization(r.A, r.B, 1.001 * r.C, r.D)
    rep = certify_loop(bumped, d.generator.blocks[0], d.config)
    assert not rep.pcl_ok and not rep.e_ok and not rep.sim_ok
    assert rep.consistent
    assert not rep.verdict


def test_certify_insensitive_to_reference_output_map(fourdisk_design):
    # the loop's reference moments are (1, 0, ..., 0), so C Pi = L for any L
    d = fourdisk_design
    from mmred.siggen import SignalGenerator
    g1 = d.generator.blocks[0]
    other = SignalGenerator(g1.S, g1.L + 1e-3 * np.eye(1, g1.nu, 3), g1.omega0)
    assert certify_loop(d.reduced_loop, other, d.config).pcl_ok


def test_certify_tolerance_override(fourdisk_design):
    rep = certify(fourdisk_design, tol=1e-30)
    assert not rep.pcl_ok
    assert rep.tol == 1e-30


def test_baseline_certification_is_consistent(fourdisk, baseline_loop):
    g1 = reference_generator("step", 8)
    rep = certify_loop(baseline_loop.p_cl, g1)
    assert rep.stable
    assert not rep.verdict
    assert rep.consistent


def test_design_to_dict_is_json_ready(fourdisk_design):
    import json
    d = fourdisk_design.to_dict()
    text = json.dumps(d, sort_keys=True)
    assert json.loads(text)["report"]["verdict"] is True


def test_config_validation():
    with pytest.raises(ValueError):
        ReductionConfig(path="other")
