"""Algebraic tracking verdict against simulation on random (system, generator) pairs."""
import argparse

import numpy as np

from mmred import linalg as la
from mmred.lti import Realization
from mmred.momentmatch import check_tracking_condition, design_G, tracking_family
from mmred.siggen import compose, make_polynomial, make_sinusoid, make_step
from mmred.sim import simulate_cascade, verdict


def random_stable(rng, n, margin=0.2):
    M = rng.standard_normal((n, n))
    A = M - (np.max(np.linalg.eigvals(M).real) + margin) * np.eye(n)
    return Realization(A, rng.standard_normal((n, 1)), rng.standard_normal((1, n)))


def generator(rng):
    w = float(rng.uniform(0.2, 3.0))
    return [make_step(), make_polynomial(1), make_sinusoid(w),
            compose(make_step(), make_sinusoid(w)).as_generator()][rng.integers(0, 4)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    agree = 0
    for i in range(args.pairs):
        g = generator(rng)
        if i % 2 == 0:
            sys = tracking_family(g, design_G(g.S, g.L, -np.sort(rng.uniform(0.5, 3.0, g.nu)))).realization()
        else:
            sys = random_stable(rng, int(rng.integers(1, 6)))
        alg = check_tracking_condition(sys, g).tracks
        tau = 1.0 / abs(la.spectral_abscissa(sys.A))
        tr = simulate_cascade(sys, g, horizon=50 * tau, dt=min(0.02, tau / 20))
        sim = verdict(tr, threshold=1e-4 * float(np.max(np.abs(tr.theta)))).tracks
        agree += alg == sim
        if alg != sim:
            print(f"pair {i}: algebraic {alg}, simulated {sim}")
    print(f"{agree}/{args.pairs} verdicts agree")


if __name__ == "__main__":
    main()
