"""``ncrl`` command line.

Every subcommand prints a JSON report to stdout (or ``--report PATH``).
Exit status: 0 all checks passed, 1 a check failed, 2 usage error,
3 numeric or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bloch, tomography
from .belt import (
    BeltParameters,
    belt_full_content_falsifier,
    belt_g,
    belt_image_gap,
    belt_map,
    covariant_state_map,
    verify_belt_born,
)
from .lemmas import (
    InconsistentInputError,
    conjugation_map,
    lemma1_verify,
    lemma2_verify,
    orthogonal_map,
    random_rotation,
    transpose_map,
)
from .operators import bloch_operator, check_seed, eigenvalues, is_psd, min_eigenvalue, random_unitary, subseed
from .reports import (
    RepresentationReport,
    SchemaError,
    dump_json,
    frame_to_json,
    load_frame,
    load_table,
    matrix_to_json,
    serialize_report,
)
from .selftest import run_selftest

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# per-command tolerances that --set-tol may override
TOLERANCES = {
    "bloch-solve": {"born": 1e-10, "agreement": 1e-12},
    "bloch-scan": {},
    "tomo-reconstruct": {"residual": 1e-9, "psd": 1e-10},
    "tomo-counterexample": {"slack": 1e-10},
    "belt-verify": {"born": 1e-12},
    "belt-falsify": {"discrepancy": 1e-6},
    "lemma1-verify": {},
    "lemma2-verify": {},
    "selftest": {},
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self):
        self.seed = check_seed(self.seed)
        known = TOLERANCES[self.command]
        unknown = set(self.tolerances) - set(known)
        if unknown:
            raise UsageError(f"unknown tolerance(s) for {self.command}: {', '.join(sorted(unknown))}")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, TOLERANCES[self.command][name]))


def _vector(text: str) -> np.ndarray:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return np.array(parts)


def _tol_pair(text: str):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} is not a number") from None


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --- subcommands ---------------------------------------------------------------


def cmd_bloch_solve(args, cfg: RunConfig) -> RepresentationReport:
    setup = bloch.ThreeMeasurementSetup(args.a, args.b, args.c)
    probs = bloch.ConditionalProbTriple(args.pa, args.pb, args.pc)
    s = bloch.solve_state_vector(setup, probs)
    fit = bloch.fit_general_operator(setup, probs)
    W = bloch.state_operator(s)
    verdict = bloch.classify_solution(s)
    rep = RepresentationReport(
        "bloch-solve",
        verdict.value,
        seed=cfg.seed,
        params={"a": setup.a, "b": setup.b, "c": setup.c, "pa": probs.pa, "pb": probs.pb, "pc": probs.pc},
    )
    rep.add("born_residual", bloch.born_residual(W, setup, probs) <= cfg.tol("born"), bloch.born_residual(W, setup, probs))
    agree = float(np.max(np.abs(fit.s - s)))
    rep.add("closed_form_vs_general_fit", agree <= cfg.tol("agreement") * max(1.0, np.linalg.norm(s)), agree)
    imag = max(abs(fit.s0p), float(np.max(np.abs(fit.sp))), abs(fit.s0 - 0.5))
    rep.add("imaginary_part_eliminated", imag <= cfg.tol("born"), imag)
    rep.payload = {
        "s": s,
        "s_norm": float(np.linalg.norm(s)),
        "bloch_vector": 2 * s,
        "state_operator": W,
        "eigenvalues": eigenvalues(W),
        "is_psd": is_psd(W),
    }
    return rep


def cmd_bloch_scan(args, cfg: RunConfig) -> RepresentationReport:
    res = bloch.scan_region((args.phi_min, args.phi_max), (args.p_min, args.p_max), args.steps)
    params = {k: getattr(args, k) for k in ("phi_min", "phi_max", "p_min", "p_max", "steps")}
    rep = RepresentationReport("bloch-scan", "", seed=cfg.seed, params=params)
    csv_text = res.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text)
    # second pass over the stored grid, independent of the scan loop
    worst = 0.0
    for pt in res.points:
        s = bloch.solve_state_vector(bloch.tilted_setup(pt.phi), bloch.ConditionalProbTriple(pt.p, pt.p, pt.p))
        worst = max(worst, abs(float(np.linalg.norm(s)) - pt.s_norm))
    rep.add("norm_recomputed", worst <= 1e-12, worst)
    n_density = res.density_count
    rep.verdict = "all NoncommutativeOnly" if n_density == 0 else f"{n_density} density points"
    rep.payload = {
        "points": len(res.points),
        "density_points": n_density,
        "min_s_norm": res.min_norm,
        "csv_sha256": hashlib.sha256(csv_text.encode()).hexdigest(),
        "out": args.out,
    }
    return rep


def cmd_tomo_reconstruct(args, cfg: RunConfig) -> RepresentationReport:
    frame = load_frame(args.frame)
    table = load_table(args.table)
    W = tomography.reconstruct_state(frame, table)
    resid = tomography.reconstruction_residual(W, frame, table)
    lam = min_eigenvalue(W)
    psd = lam >= -cfg.tol("psd")
    rep = RepresentationReport(
        "tomo-reconstruct",
        "QuantumDensity" if psd else "NoncommutativeOnly",
        seed=cfg.seed,
        params={"frame_sha256": _sha256(args.frame), "table_sha256": _sha256(args.table), "n": frame.n, "k": frame.k},
    )
    rep.add("born_residual", resid <= cfg.tol("residual"), resid)
    tr = abs(np.trace(W).real - 1.0)
    rep.add("unit_trace", tr <= cfg.tol("residual"), tr)
    rep.payload = {
        "state_operator": W,
        "min_eigenvalue": lam,
        "is_psd": psd,
        "in_dual_cone": tomography.in_dual_cone(W, frame),
        "frame_rank": tomography.frame_rank(frame),
    }
    return rep


def cmd_tomo_counterexample(args, cfg: RunConfig) -> RepresentationReport:
    frame = tomography.random_frame(cfg.seed, args.n, args.n + 1)
    w = tomography.find_nonpsd_witness(frame, seed=cfg.seed, max_rays=args.max_rays)
    v = tomography.validate_witness(w.W, frame)
    rep = RepresentationReport(
        "tomo-counterexample",
        "NoncommutativeOnly",
        seed=cfg.seed,
        params={"n": args.n, "max_rays": args.max_rays},
    )
    rep.add("negative_eigenvalue", v["min_eigenvalue"] < tomography.WITNESS_MIN_EIG, v["min_eigenvalue"])
    rep.add("in_dual_cone", v["in_dual_cone"] and v["min_entry"] >= -cfg.tol("slack"), v["min_entry"])
    rep.add("rows_sum_to_one", v["row_sum_error"] <= cfg.tol("slack"), v["row_sum_error"])
    rep.add("unit_trace", v["trace_error"] <= cfg.tol("slack"), v["trace_error"])
    rep.payload = {"witness": w.W, "min_eigenvalue": w.min_eigenvalue, "ray_index": w.ray_index, "born_table": w.constraint_slacks}
    if args.out:
        doc = {
            "seed": cfg.seed,
            "frame": frame_to_json(frame),
            "witness": matrix_to_json(w.W),
            "min_eigenvalue": w.min_eigenvalue,
            "constraint_slacks": w.constraint_slacks.tolist(),
            "direction_seed": w.direction_seed,
            "ray_index": w.ray_index,
        }
        Path(args.out).write_bytes(dump_json(doc))
        rep.payload["out"] = args.out
    return rep


def cmd_belt_verify(args, cfg: RunConfig) -> RepresentationReport:
    params = BeltParameters(args.r)
    err = verify_belt_born(params, args.samples, cfg.seed)
    gap = belt_image_gap(params, args.samples, cfg.seed)
    g = belt_g(params)
    W = bloch_operator(g)
    rep = RepresentationReport(
        "belt-verify",
        "NoncommutativeOnly" if not is_psd(W) else "QuantumDensity",
        seed=cfg.seed,
        params={"r": params.r, "samples": args.samples},
    )
    rep.add("born_preserved", err <= cfg.tol("born"), err)
    rep.add("state_not_psd", not is_psd(W), min_eigenvalue(W))
    rep.payload = {"g": g, "cap_half_angle": gap, "state_eigenvalues": eigenvalues(W)}
    return rep


def cmd_belt_falsify(args, cfg: RunConfig) -> RepresentationReport:
    params = BeltParameters(args.r)
    pair = belt_full_content_falsifier(params, cfg.seed, max_samples=args.max_samples, threshold=cfg.tol("discrepancy"))
    rep = RepresentationReport(
        "belt-falsify",
        "inner product broken" if pair else "no violation found",
        seed=cfg.seed,
        params={"r": params.r, "max_samples": args.max_samples},
    )
    disc = pair.discrepancy if pair else 0.0
    rep.add("violation_found", pair is not None, disc)
    if pair:
        rep.payload = {"a": pair.a, "s": pair.s, "discrepancy": pair.discrepancy, "sample_index": pair.sample_index}
    return rep


def _lemma_report(command, run, cfg, params) -> RepresentationReport:
    rep = RepresentationReport(command, "", seed=cfg.seed, params=params)
    try:
        result = run()
    except InconsistentInputError as e:
        rep.add("precondition", False, e.residual)
        rep.verdict = f"inconsistent input: {e.what}"
        return rep
    rep.add("precondition", True, 0.0)
    rep.checks.extend(result.checks)
    rep.verdict = "unique linear extension" if result.passed else "no admissible extension"
    return rep


def cmd_lemma1(args, cfg: RunConfig) -> RepresentationReport:
    if args.map == "rotation":
        f = g = orthogonal_map(random_rotation(cfg.seed))
    else:
        params = BeltParameters(args.r)
        f, g = belt_map(params), covariant_state_map(params)
    params = {"map": args.map, "tol": args.tol, "r": args.r if args.map == "belt" else None}
    return _lemma_report("lemma1-verify", lambda: lemma1_verify(f, g, tol=args.tol, seed=cfg.seed), cfg, params)


def cmd_lemma2(args, cfg: RunConfig) -> RepresentationReport:
    n = args.n
    if args.map == "unitary":
        f = g = conjugation_map(random_unitary(cfg.seed, n))
    elif args.map == "mismatched":
        f = conjugation_map(random_unitary(cfg.seed, n))
        g = conjugation_map(random_unitary(subseed(cfg.seed, 1), n))
    else:
        f = g = transpose_map
    params = {"map": args.map, "n": n, "tol": args.tol}
    return _lemma_report("lemma2-verify", lambda: lemma2_verify(f, g, n=n, tol=args.tol, seed=cfg.seed), cfg, params)


def cmd_selftest(args, cfg: RunConfig) -> RepresentationReport:
    return run_selftest(cfg.seed)


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    default_seed = os.environ.get("NCRL_SEED", "0")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"64-bit unsigned seed (default $NCRL_SEED or 0, now {default_seed})")
    common.add_argument("--set-tol", type=_tol_pair, action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--report", help="write the JSON report here instead of stdout")

    parser = argparse.ArgumentParser(prog="ncrl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bloch-solve", parents=[common], help="fit the state for three yes-no measurements")
    for name in "abc":
        p.add_argument(f"--{name}", type=_vector, required=True, metavar="X,Y,Z")
    for name in ("pa", "pb", "pc"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.set_defaults(run=cmd_bloch_solve)

    p = sub.add_parser("bloch-scan", parents=[common], help="scan |s| over (p, phi)")
    p.add_argument("--phi-min", type=float, default=math.pi / 3)
    p.add_argument("--phi-max", type=float, default=math.pi / 2 - 0.01)
    p.add_argument("--p-min", type=float, default=0.76)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(run=cmd_bloch_scan)

    p = sub.add_parser("tomo-reconstruct", parents=[common], help="reconstruct W from a frame and a table")
    p.add_argument("--frame", required=True)
    p.add_argument("--table", required=True)
    p.set_defaults(run=cmd_tomo_reconstruct)

    p = sub.add_parser("tomo-counterexample", parents=[common], help="find a non-PSD state in D*")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--max-rays", type=int, default=10_000)
    p.add_argument("--out", help="witness JSON output path")
    p.set_defaults(run=cmd_tomo_counterexample)

    p = sub.add_parser("belt-verify", parents=[common], help="check Born preservation of the belt map")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(run=cmd_belt_verify)

    p = sub.add_parser("belt-falsify", parents=[common], help="break the belt map for varying states")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--max-samples", type=int, default=100_000)
    p.set_defaults(run=cmd_belt_falsify)

    p = sub.add_parser("lemma1-verify", parents=[common], help="orthogonality certifier on R^3")
    p.add_argument("--map", choices=["rotation", "belt"], default="rotation")
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(run=cmd_lemma1)

    p = sub.add_parser("lemma2-verify", parents=[common], help="Hilbert-Schmidt unitarity certifier on M_n(C)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--map", choices=["unitary", "transpose", "mismatched"], default="unitary")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(run=cmd_lemma2)

    p = sub.add_parser("selftest", parents=[common], help="run the seeded property suite")
    p.set_defaults(run=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed = args.seed if args.seed is not None else int(os.environ.get("NCRL_SEED", "0"))
        cfg = RunConfig(args.command, seed=seed, tolerances=dict(args.set_tol), out=getattr(args, "out", None))
    except (UsageError, ValueError) as e:
        parser.error(str(e))
    try:
        report = args.run(args, cfg)
    except (SchemaError, ValueError, ArithmeticError, RuntimeError, OSError) as e:
        print(f"ncrl {args.command}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    data = serialize_report(report)
    if args.report:
        Path(args.report).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return EXIT_OK if report.all_passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
