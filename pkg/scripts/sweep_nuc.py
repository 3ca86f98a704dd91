"""Reduced four-disk loops for a range of controller-block sizes nu_C."""
import argparse
import time

import numpy as np

from mmred.clred import (ReductionConfig, build_compensator, controller_block, reduce_closed_loop,
                         reference_generator)
from mmred.errors import Unstable
from mmred.files import load_fourdisk
from mmred.siggen import compose


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nuc", type=int, nargs="+", default=[1, 2, 3, 4, 6, 8])
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    fd = load_fourdisk()
    comp = build_compensator(fd.plant, fd.poles)
    print(f"{'nu_C':>4} {'order':>5} {'abscissa':>10} {'moment res':>10} {'tail':>9} {'evals':>6} {'sec':>5}  controller")
    for nuc in args.nuc:
        gen = compose(reference_generator("step", fd.plant.n), controller_block(nuc), check=False)
        t0 = time.perf_counter()
        try:
            d = reduce_closed_loop(fd.plant, comp, gen, ReductionConfig(seed=args.seed))
        except Unstable as exc:
            print(f"{nuc:>4} {'-':>5}  no stabilizing G: {exc}")
            continue
        rep = d.report
        ext = d.extracted_controller
        status = ext["status"] if isinstance(ext, dict) else f"ok order {ext.order}"
        print(f"{nuc:>4} {d.reduced_loop.n:>5} {rep.stability_abscissa:>10.4f} {rep.moment_residual_pcl:>10.1e} "
              f"{rep.reference_tail_error:>9.1e} {d.search.evaluations:>6} {time.perf_counter() - t0:>5.1f}  {status}")


if __name__ == "__main__":
    main()
