"""Command-line interface.

Exit codes: 0 success, 1 unreadable or malformed input, 2 a mathematical
precondition failed, 3 numerical failure or a failed certification.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys
from pathlib import Path

import numpy as np

from . import linalg as la
from .clred import (ReductionConfig, build_compensator, certify_loop, controller_block,
                    reduce_closed_loop, reference_generator, separated_spectrum)
from .errors import (BudgetExhausted, FileFormatError, IllPosed, MomentMatchingError, NotObservable,
                     PlacementFailed, PoleHit, SpectraOverlap, Unstable)
from .files import (generator_from_dict, load_fourdisk, load_generator, load_system, read_json,
                    save_system, system_from_dict, write_json)
from .lti import moment_resolvent, negative_feedback
from .momentmatch import interpolation_points, moments_of
from .siggen import compose, make_jordan, make_polynomial, make_sinusoid, make_step
from .sim import simulate_tracking_loop, verdict, write_csv

EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_NUMERIC = 0, 1, 2, 3
PRECONDITION_ERRORS = (NotObservable, SpectraOverlap, PoleHit, IllPosed, Unstable, PlacementFailed,
                       ValueError)


def _seed(value):
    if value is not None:
        return value
    env = os.environ.get("MMRED_SEED")
    return int(env) if env else 0


def _ref_args(ref, default="step"):
    ref = ref or [default]
    kind = ref[0].lower()
    param = ref[1] if len(ref) > 1 else None
    if kind in ("poly", "sin") and param is None:
        raise argparse.ArgumentTypeError(f"--ref {kind} needs a parameter")
    if kind not in ("step", "ramp", "poly", "sin"):
        raise argparse.ArgumentTypeError(f"unknown reference {kind!r}")
    return kind, (None if param is None else float(param))


def _signal(kind, param):
    """Stand-alone reference generator for simulations."""
    if kind == "step":
        return make_step()
    if kind == "ramp":
        return make_polynomial(1)
    if kind == "poly":
        return make_polynomial(int(param))
    return make_sinusoid(param)


def _fmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.10g}" if z.imag == 0 else f"{z.real:.10g}{z.imag:+.10g}j"


# ---------------------------------------------------------------------------
# subcommands

def cmd_moments(args):
    sys_ = load_system(args.system)
    if args.generator:
        g = load_generator(args.generator)
    elif args.jordan:
        g = make_jordan(complex(args.jordan[0]), int(args.jordan[1]))
    elif args.sin is not None:
        g = make_sinusoid(args.sin)
    elif args.poly is not None:
        g = make_polynomial(args.poly)
    elif args.ramp:
        g = make_polynomial(1)
    else:
        g = make_step()
    ms = moments_of(sys_, g)
    rows = []
    print(f"{'point':>22}  {'k':>2}  {'eta_k':>22}")
    for s, m in interpolation_points(g.S):
        for k in range(m):
            eta = moment_resolvent(sys_, s, k)
            rows.append({"point": [s.real, s.imag], "k": k, "eta": [eta.real, eta.imag]})
            print(f"{_fmt(s):>22}  {k:>2}  {_fmt(eta):>22}")
    print("C Pi + D L =", " ".join(f"{v:.10g}" for v in ms.values.real.ravel()))
    if args.json:
        write_json(args.json, {"generator": g.name, "moments": rows,
                               "CPi": [float(v) for v in ms.values.real.ravel()],
                               "residual": ms.pi.residual_norm})
    return EXIT_OK


def _design_dir_outputs(out: Path, design, tag=""):
    out.mkdir(parents=True, exist_ok=True)
    save_system(out / "reduced_loop.json", design.reduced_loop)
    write_json(out / "controller.json", design.to_dict()["extracted_controller"])
    write_json(out / "report.json", design.report.to_dict())
    write_json(out / "design.json", design.to_dict())
    cfg = design.config
    g1 = design.generator.blocks[0]
    tr = simulate_tracking_loop(design.reduced_loop, g1, horizon=cfg.reference_horizon, dt=cfg.dt)
    write_csv(tr, out / "trajectory_reference.csv")
    return tr


def _reduce(plant, controller, nuc, ref, seed, args):
    kind, param = ref
    g1 = reference_generator(kind, plant.n, param)
    g2 = controller_block(nuc, getattr(args, "point", 0.0) or 0.0)
    gen = compose(g1, g2, check=False)
    cfg = ReductionConfig(seed=seed, path=getattr(args, "path", "structured"),
                          paper_literal=getattr(args, "paper_literal", False))
    return reduce_closed_loop(plant, controller, gen, cfg)


def cmd_reduce(args):
    plant = load_system(args.plant)
    controller = load_system(args.controller)
    design = _reduce(plant, controller, args.nuc, _ref_args(args.ref), _seed(args.seed), args)
    if args.out:
        _design_dir_outputs(Path(args.out), design)
    rep = design.report
    print(f"reduced loop order {design.reduced_loop.n}, abscissa {rep.stability_abscissa:.6g}")
    print(f"moment residual {rep.moment_residual_pcl:.3e}, error moments {rep.moment_residual_e:.3e}, "
          f"tail error {rep.reference_tail_error:.3e}")
    for note in design.notes:
        print("note:", note)
    print("certified" if rep.verdict else "NOT certified")
    return EXIT_OK if rep.verdict else EXIT_NUMERIC


def cmd_design(args):
    if args.fourdisk:
        fd = load_fourdisk()
        plant, poles = fd.plant, fd.poles
    else:
        if not args.plant or not args.poles:
            raise argparse.ArgumentTypeError("design needs --plant and --poles, or --fourdisk")
        plant, poles = load_system(args.plant), [complex(p) for p in args.poles]
    comp = build_compensator(plant, poles)
    save_system(args.out, comp)
    if args.loop_out:
        save_system(args.loop_out, negative_feedback(plant, comp).p_cl)
    w, _ = separated_spectrum(negative_feedback(plant, comp).p_cl.A, plant.n)
    print("closed-loop spectrum:", ", ".join(_fmt(z) for z in w))
    return EXIT_OK


def cmd_simulate(args):
    loop = load_system(args.loop)
    kind, param = _ref_args(args.ref)
    g = _signal(kind, param)
    tr = simulate_tracking_loop(loop, g, horizon=args.horizon, dt=args.dt)
    v = verdict(tr, threshold=args.threshold)
    if args.csv:
        write_csv(tr, args.csv)
    print(f"tail error {v.tail_error:.6g} (threshold {v.threshold:.3g}): "
          f"{'tracks' if v.tracks else 'does not track'}")
    return EXIT_OK


def cmd_certify(args):
    d = read_json(Path(args.design) / "design.json")
    try:
        loop = system_from_dict(d["reduced_loop"], where="design.json")
        g1 = generator_from_dict(d["generator"]["reference"], where="design.json")
        cfg = ReductionConfig(**{**d["config"], "tol": args.tol})
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"design.json: missing or malformed field {exc}") from exc
    rep = certify_loop(loop, g1, cfg)
    write_json(Path(args.design) / "certify.json", rep.to_dict())
    print(f"abscissa {rep.stability_abscissa:.6g}, moment residual {rep.moment_residual_pcl:.3e}, "
          f"error moments {rep.moment_residual_e:.3e}, sim {rep.tracking_sim_error:.3e}, "
          f"consistent {rep.consistent}")
    print("PASS" if rep.verdict else "FAIL")
    return EXIT_OK if rep.verdict else EXIT_NUMERIC


def cmd_bundle(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fd = load_fourdisk()
    comp = build_compensator(fd.plant, fd.poles)
    save_system(out / "fourdisk.json", fd.plant)
    save_system(out / "kalman16.json", comp)
    save_system(out / "fourdisk_full.json", negative_feedback(fd.plant, comp).p_cl)
    print(f"wrote fourdisk.json, kalman16.json, fourdisk_full.json to {out}")
    return EXIT_OK


def run_fourdisk(nuc=4, seed=7, out="fourdisk_demo", paper_literal=False, timestamp=None):
    """Baseline compensator, reduction, certification and simulations."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    fd = load_fourdisk()
    plant = fd.plant
    comp = build_compensator(plant, fd.poles)
    full = negative_feedback(plant, comp)
    base_w, coupling = separated_spectrum(full.p_cl.A, plant.n)

    g1 = reference_generator("step", plant.n)
    gen = compose(g1, controller_block(nuc), check=False)
    cfg = ReductionConfig(seed=seed, paper_literal=paper_literal)
    design = reduce_closed_loop(plant, comp, gen, cfg)
    base_rep = certify_loop(full.p_cl, g1, cfg)

    save_system(out / "fourdisk.json", plant)
    save_system(out / "kalman16.json", comp)
    save_system(out / "fourdisk_full.json", full.p_cl)
    tr_red = _design_dir_outputs(out, design)
    tr_base = simulate_tracking_loop(full.p_cl, g1, horizon=cfg.reference_horizon, dt=cfg.dt)
    write_csv(tr_base, out / "trajectory_baseline.csv")
    v_base = verdict(tr_base, threshold=0.05)
    v_red = verdict(tr_red, threshold=cfg.reference_abs)

    summary = {
        "baseline": {"spectrum": [[float(z.real), float(z.imag)] for z in base_w],
                     "separation_coupling": coupling, "tail_error": v_base.tail_error,
                     "tracks": v_base.tracks, "report": base_rep.to_dict()},
        "reduced": {"order": design.reduced_loop.n,
                    "spectrum": [[float(z.real), float(z.imag)] for z in la.eigenvalues(design.reduced_loop.A)],
                    "tail_error": v_red.tail_error, "tracks": v_red.tracks,
                    "report": design.report.to_dict()},
        "nu_c": nuc, "seed": seed, "paper_literal": paper_literal, "notes": list(design.notes),
    }
    write_json(out / "summary.json", summary)
    stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%d %H:%M:%S UTC")
    (out / "report.md").write_text(_markdown(summary, design, stamp))
    return design, summary


def _markdown(summary, design, stamp):
    b, r = summary["baseline"], summary["reduced"]
    spectrum_text = lambda rows: ", ".join(_fmt(complex(a, c)) for a, c in rows)
    lines = [
        f"# Four-disk drive: closed-loop reduction (generated {stamp})",
        "",
        f"nu_C = {summary['nu_c']}, seed = {summary['seed']}, paper-literal = {summary['paper_literal']}",
        "",
        "## Baseline observer-based compensator (order 16 loop)",
        f"- spectrum: {spectrum_text(b['spectrum'])}",
        f"- step tail error over the last 10% of 200 s: {b['tail_error']:.4g}",
        f"- {'tracks' if b['tracks'] else 'does not track'} the step reference",
        "",
        f"## Reduced loop (order {r['order']})",
        f"- spectrum: {spectrum_text(r['spectrum'])}",
        f"- abscissa: {r['report']['stability_abscissa']:.6g}",
        f"- closed-loop moment residual: {r['report']['moment_residual_pcl']:.3e}",
        f"- error-transfer moment residual: {r['report']['moment_residual_e']:.3e}",
        f"- relative simulated error (all reference modes): {r['report']['tracking_sim_error']:.3e}",
        f"- step tail error over the last 10% of 200 s: {r['tail_error']:.4g}",
        f"- certified: {r['report']['verdict']}",
        "",
        "## Comparison",
        f"baseline {'tracks' if b['tracks'] else 'does not track'}; "
        f"reduced design {'tracks' if r['tracks'] else 'does not track'}.",
        "",
        "## Notes",
    ]
    lines += [f"- {n}" for n in summary["notes"]] or ["- none"]
    ext = design.to_dict()["extracted_controller"]
    lines += ["", "## Extracted controller",
              f"status: {ext.get('status')}, order {ext.get('order', 'n/a')}, "
              f"re-closure error {ext.get('reclosure_error', float('nan')):.3g}", "",
              "Trajectories: trajectory_baseline.csv, trajectory_reference.csv (columns t,theta,y,eps).", ""]
    return "\n".join(lines)


def cmd_demo(args):
    if args.which != "fourdisk":
        raise argparse.ArgumentTypeError(f"unknown demo {args.which!r}")
    design, summary = run_fourdisk(args.nuc, _seed(args.seed), args.out, args.paper_literal)
    for note in summary["notes"]:
        print("note:", note)
    print(f"baseline tail error {summary['baseline']['tail_error']:.4g} "
          f"({'tracks' if summary['baseline']['tracks'] else 'does not track'})")
    print(f"reduced order {summary['reduced']['order']} tail error {summary['reduced']['tail_error']:.4g} "
          f"({'tracks' if summary['reduced']['tracks'] else 'does not track'})")
    print(f"report written to {Path(args.out) / 'report.md'}")
    return EXIT_OK if design.report.verdict else EXIT_NUMERIC


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmred", description="moment-matching closed-loop reduction")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("moments", help="moments of a system at a generator's spectrum")
    m.add_argument("system")
    grp = m.add_mutually_exclusive_group()
    grp.add_argument("--step", action="store_true")
    grp.add_argument("--ramp", action="store_true")
    grp.add_argument("--poly", type=int)
    grp.add_argument("--sin", type=float)
    grp.add_argument("--jordan", nargs=2, metavar=("S1", "M"))
    grp.add_argument("--generator", help="generator JSON file")
    m.add_argument("--json")
    m.set_defaults(func=cmd_moments)

    r = sub.add_parser("reduce", help="closed-loop reduction")
    r.add_argument("--plant", required=True)
    r.add_argument("--controller", required=True)
    r.add_argument("--nuc", type=int, required=True)
    r.add_argument("--ref", nargs="+", metavar="KIND [PARAM]")
    r.add_argument("--point", type=float, default=0.0, help="controller interpolation point")
    r.add_argument("--path", choices=("structured", "normative"), default="structured")
    r.add_argument("--paper-literal", action="store_true")
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reduce)

    d = sub.add_parser("design", help="observer-based baseline compensator")
    d.add_argument("--plant")
    d.add_argument("--poles", nargs="+")
    d.add_argument("--fourdisk", action="store_true")
    d.add_argument("--out", required=True)
    d.add_argument("--loop-out")
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", help="closed-loop reference response")
    s.add_argument("--loop", required=True)
    s.add_argument("--ref", nargs="+", metavar="KIND [PARAM]")
    s.add_argument("--horizon", type=float, default=200.0)
    s.add_argument("--dt", type=float, default=0.01)
    s.add_argument("--threshold", type=float)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("certify", help="re-run the tracking checks on a design directory")
    c.add_argument("--design", required=True)
    c.add_argument("--tol", type=float, default=1e-6)
    c.set_defaults(func=cmd_certify)

    dm = sub.add_parser("demo", help="bundled end-to-end examples")
    dm.add_argument("which", choices=("fourdisk",))
    dm.add_argument("--nuc", type=int, default=4)
    dm.add_argument("--seed", type=int)
    dm.add_argument("--out", default="fourdisk_demo")
    dm.add_argument("--paper-literal", action="store_true")
    dm.set_defaults(func=cmd_demo)

    b = sub.add_parser("bundle", help="write the bundled benchmark systems")
    b.add_argument("--out", default=".")
    b.set_defaults(func=cmd_bundle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (FileFormatError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PRECONDITION_ERRORS as exc:
        if isinstance(exc.__cause__, BudgetExhausted):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"precondition failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (MomentMatchingError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
