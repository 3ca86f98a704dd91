import numpy as np
import pytest

from mmred.clred import ReductionConfig, build_compensator, controller_block, reduce_closed_loop, reference_generator
from mmred.files import load_fourdisk
from mmred.lti import Realization, negative_feedback
from mmred.siggen import compose

# well-spread pole set for the four-disk plant; its loop matrix has
# condition ~3e6 instead of ~3e14 for the listed compensator poles
SPREAD_POLES = np.concatenate([np.linspace(-0.8, -1.6, 8), np.linspace(-0.6, -1.4, 8)])


def random_stable(rng, n, margin=0.2, d=False):
    """Random real realization with spectral abscissa -margin."""
    M = rng.standard_normal((n, n))
    A = M - (np.max(np.linalg.eigvals(M).real) + margin) * np.eye(n)
    B = rng.standard_normal((n, 1))
    C = rng.standard_normal((1, n))
    D = [[rng.standard_normal()]] if d else [[0.0]]
    return Realization(A, B, C, D)


@pytest.fixture(scope="session")
def fourdisk():
    return load_fourdisk()


@pytest.fixture(scope="session")
def kalman(fourdisk):
    return build_compensator(fourdisk.plant, fourdisk.poles)


@pytest.fixture(scope="session")
def baseline_loop(fourdisk, kalman):
    return negative_feedback(fourdisk.plant, kalman)


@pytest.fixture(scope="session")
def spread_loop(fourdisk):
    comp = build_compensator(fourdisk.plant, SPREAD_POLES)
    return negative_feedback(fourdisk.plant, comp)


@pytest.fixture(scope="session")
def fourdisk_design(fourdisk, kalman):
    gen = compose(reference_generator("step", 8), controller_block(4), check=False)
    return reduce_closed_loop(fourdisk.plant, kalman, gen, ReductionConfig(seed=7))


@pytest.fixture(scope="session")
def toy_design():
    from mmred.lti import static_gain
    from mmred.siggen import make_jordan
    plant = Realization([[-1.0]], [[1.0]], [[1.0]], name="lag")
    gen = compose(reference_generator("step", 1), make_jordan(-10.0, 1))
    return reduce_closed_loop(plant, static_gain(1.0), gen)


# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
_CRITERIA = []


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
