"""Command-line interface: ``boson-entropy <subcommand> --out DIR ...``.

Exit codes: 0 success, 1 failed check, 2 usage error, 3 truncation diagnostic.
Every subcommand writes ``manifest.json`` next to its outputs.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .annealing import AnnealConfig, anneal_majorization_track, anneal_restarts
from .bounds import classical_curve, region_grid, thermal_curve
from .channels import (
    Amplifier,
    ClassicalNoise,
    PureLoss,
    ThermalNoise,
    TruncationError,
    apply_channel,
    fock_output_eigenvalues,
)
from .checks import CHECKS, run_checks
from .fock import BITS, DomainError, ValidationError, density_matrix, spectrum, von_neumann_entropy
from .majorization import random_majorization_sweep, majorizes, staircase, thermal_fock_output
from .serialization import RunManifest, StateSpecError, parse_state, state_to_json, write_csv, write_json

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_TRUNCATION = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _channel_from_args(args):
    kind = args.channel
    try:
        if kind == "classical":
            return ClassicalNoise(_required(args.n, "--n"))
        if kind == "thermal":
            return ThermalNoise(_required(args.eta, "--eta"), _required(args.N, "--N"))
        if kind == "loss":
            return PureLoss(_required(args.eta, "--eta"))
        if kind == "amplifier":
            return Amplifier(_required(args.kappa, "--kappa"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown channel {kind!r}")


def _required(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required for this channel")
    return value


def _entropies(rho):
    s = von_neumann_entropy(rho)
    return {"entropy_nats": s, "entropy_bits": s / math.log(BITS)}


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, output files, seeds, dims)


def cmd_channel_apply(args, out: Path):
    spec = _channel_from_args(args)
    try:
        state = parse_state(args.state, args.dim)
    except StateSpecError as exc:
        raise UsageError(str(exc)) from exc
    rho = density_matrix(state) if state.ndim == 1 else state
    kwargs = {"dim_out": args.dim_out or args.dim, "max_deficit": args.max_deficit, "full_output": True}
    if args.method:
        kwargs["method"] = args.method
    rho_out, deficit = apply_channel(spec, rho, **kwargs)
    files = [
        write_json(out / "output_state.json", state_to_json(rho_out)),
        write_csv(out / "spectrum.csv", ["index", "eigenvalue"], enumerate(spectrum(rho_out))),
        write_json(out / "result.json", {**_entropies(rho_out), "trace_deficit": deficit}),
    ]
    res = _entropies(rho_out)
    print(f"entropy {res['entropy_nats']:.6f} nats = {res['entropy_bits']:.6f} bits; trace deficit {deficit:.3e}")
    return EXIT_OK, files, [], {"dim": args.dim, "dim_out": args.dim_out or args.dim}


def _bound_rows(curve, keys):
    for i, x in enumerate(curve.grid):
        yield [x] + [curve.values[k][i] for k in keys] + [curve.upper[i], curve.envelope[i]]


def cmd_bounds_table(args, out: Path):
    files = []
    if args.channel == "classical":
        ns = np.logspace(math.log10(args.n_min), math.log10(args.n_max), args.points)
        curve = classical_curve(ns)
        files.append(write_csv(out / "bounds_classical.csv", ["n", "a", "b", "c", "d", "upper", "envelope"],
                               _bound_rows(curve, "abcd")))
    else:
        for N in args.N:
            curve = thermal_curve(N, np.linspace(0, 1, args.points), args.k_max)
            name = f"bounds_thermal_N{N:g}.csv"
            files.append(write_csv(out / name, ["eta", "A", "B", "C", "D", "E", "F", "upper", "envelope"],
                                   _bound_rows(curve, "ABCDEF")))
    print("\n".join(str(f) for f in files))
    return EXIT_OK, files, [], {}


def cmd_region_map(args, out: Path):
    grid = region_grid(args.eta1, args.N1, args.grid, args.grid, args.N_max, args.k_max)
    rows = []
    for i, N in enumerate(grid.Ns):
        for j, eta in enumerate(grid.etas):
            rows.append([eta, N, grid.labels[i, j], "+".join(grid.provenance[i][j])])
    summary = {"labels": grid.label_counts(), "provenance": grid.counts(), "contradictions": grid.contradictions()}
    files = [
        write_csv(out / "region_map.csv", ["eta", "N", "label", "provenance"], rows),
        write_json(out / "region_summary.json", summary),
    ]
    print(summary["labels"])
    return EXIT_OK, files, [], {"grid": args.grid}


def cmd_majorize(args, out: Path):
    files = []
    if args.mode == "fock":
        dim = args.dim
        if args.eta is not None:
            N = args.N if args.N is not None else 0.0
            ref = np.real(np.diag(thermal_fock_output(0, args.eta, N, dim)))
            outs = {k: np.real(np.diag(thermal_fock_output(k, args.eta, N, dim))) for k in args.k}
        else:
            ref = fock_output_eigenvalues(0, args.n, dim)
            outs = {k: fock_output_eigenvalues(k, args.n, dim) for k in args.k}
        stair_ref = staircase(ref)
        stairs = {k: staircase(v) for k, v in outs.items()}
        header = ["q", "vacuum"] + [f"fock_{k}" for k in args.k]
        rows = [[q, stair_ref[q]] + [stairs[k][q] for k in args.k] for q in range(dim)]
        files.append(write_csv(out / "staircase.csv", header, rows))
        verdicts = []
        for k in args.k:
            res = majorizes(ref, outs[k])
            verdicts.append([k, res.majorized, res.first_violation, res.tie])
        files.append(write_csv(out / "verdicts.csv", ["k", "majorized", "first_violation_q", "tie"], verdicts))
        ok = all(v[1] for v in verdicts)
        print(f"{sum(v[1] for v in verdicts)}/{len(verdicts)} majorized by the vacuum output")
        seeds = []
    else:
        sweep = random_majorization_sweep(args.trials, args.max_photons, args.n, args.seed, args.dim)
        header = ["trial", "seed", "mean_amp_re", "mean_amp_im", "mean_photons", "majorized", "first_violation_q"]
        rows = [[r.trial, r.seed, r.mean_amp_re, r.mean_amp_im, r.mean_photons, r.majorized, r.first_violation_q]
                for r in sweep.rows]
        files.append(write_csv(out / "trials.csv", header, rows))
        summary = {"trials": len(sweep.rows), "majorized": sweep.n_majorized, "n": args.n}
        files.append(write_json(out / "summary.json", summary))
        ok = sweep.n_majorized == len(sweep.rows)
        print(f"{sweep.n_majorized}/{len(sweep.rows)} trials majorized by the vacuum output")
        seeds = [args.seed] + [r.seed for r in sweep.rows]
    return (EXIT_OK if ok or not args.strict else EXIT_CHECK), files, seeds, {"dim": args.dim}


def cmd_anneal(args, out: Path):
    cfg = AnnealConfig(
        n=args.n,
        input_dim=args.input_dim,
        output_dim=args.output_dim,
        iterations=args.iters,
        initial_temperature=args.t0,
        cooling_rate=args.cooling,
        step_scale=args.step,
        seed=args.seed,
        checkpoints=tuple(sorted({0, *args.checkpoints, args.iters} & set(range(args.iters + 1)))),
    )
    try:
        init = parse_state(args.init, cfg.input_dim)
    except StateSpecError as exc:
        raise UsageError(str(exc)) from exc
    if init.ndim != 1:
        raise UsageError("annealing needs a pure initial state")
    best, traces = anneal_restarts(cfg, init, args.restarts)
    bits = math.log(BITS)
    files = [
        write_csv(out / "trace.csv", ["iteration", "entropy", "temperature", "accepted"],
                  [[0, best.initial_entropy, cfg.initial_temperature, True]]
                  + [[r.iteration, r.entropy, r.temperature, r.accepted] for r in best.records]),
    ]
    table = anneal_majorization_track(best)
    keys = [k for k in table if k != "thermal"]
    files.append(write_csv(out / "staircase.csv", ["q"] + [f"iter_{k}" for k in keys] + ["thermal"],
                           [[q] + [table[k][q] for k in keys] + [table["thermal"][q]] for q in range(cfg.output_dim)]))
    report = {
        "final_state": state_to_json(best.final_state),
        "initial_entropy_nats": best.initial_entropy,
        "initial_entropy_bits": best.initial_entropy / bits,
        "final_entropy_nats": best.final_entropy,
        "final_entropy_bits": best.final_entropy / bits,
        "fit_alpha": [best.fit_alpha.real, best.fit_alpha.imag],
        "fit_overlap": best.fit_overlap,
        "mean_photons": best.fit_mean_photons,
        "restarts": [
            {"seed": t.config.seed, "final_entropy_nats": t.final_entropy, "fit_overlap": t.fit_overlap}
            for t in traces
        ],
        "max_crosscheck_error": max(t.max_crosscheck_error() for t in traces),
    }
    files.append(write_json(out / "final_state.json", report))
    print(f"entropy {best.initial_entropy / bits:.4f} -> {best.final_entropy / bits:.4f} bits; "
          f"alpha {best.fit_alpha:.3f}, overlap {best.fit_overlap:.4f}")
    return EXIT_OK, files, [args.seed] + [t.config.seed for t in traces], {
        "input_dim": cfg.input_dim, "output_dim": cfg.output_dim}


def cmd_verify(args, out: Path):
    names = args.check or None
    results = run_checks(quick=args.quick, names=names)
    report = [
        {"name": r.name, "passed": r.passed, "worst": r.worst, "tolerance": r.tolerance, "detail": r.detail,
         "duration_s": r.duration_s}
        for r in results
    ]
    files = [write_json(out / "verify_report.json", report)]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: worst {r.worst:.3e} (tol {r.tolerance:.0e}) "
              f"[{r.duration_s:.1f}s]")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
    return (EXIT_CHECK if failed else EXIT_OK), files, [], {}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boson-entropy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    p = sub.add_parser("channel-apply", help="push a state through a channel")
    common(p)
    p.add_argument("--state", required=True, help='fock:K, coherent:A (e.g. "1.0+0.5i"), thermal:M, or a JSON file')
    p.add_argument("--channel", required=True, choices=["classical", "thermal", "loss", "amplifier"])
    p.add_argument("--n", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--N", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--dim-out", type=int)
    p.add_argument("--method", choices=["fock_analytic", "quadrature", "dilation", "decomposition"])
    p.add_argument("--max-deficit", type=float, default=1e-4)
    p.set_defaults(func=cmd_channel_apply)

    p = sub.add_parser("bounds-table", help="lower-bound curves on a parameter grid")
    common(p)
    p.add_argument("--channel", choices=["classical", "thermal"], default="classical")
    p.add_argument("--N", type=float, nargs="+", default=[0.5])
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--n-min", type=float, default=1e-3)
    p.add_argument("--n-max", type=float, default=1e3)
    p.add_argument("--k-max", type=int, default=64)
    p.set_defaults(func=cmd_bounds_table)

    p = sub.add_parser("region-map", help="label the (eta, N) plane relative to a reference channel")
    common(p)
    p.add_argument("--eta1", type=float, default=0.7)
    p.add_argument("--N1", type=float, default=0.6)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--N-max", type=float)
    p.add_argument("--k-max", type=int, default=64)
    p.set_defaults(func=cmd_region_map)

    p = sub.add_parser("majorize", help="majorization of channel outputs by the vacuum output")
    common(p)
    p.add_argument("--mode", choices=["fock", "random"], default="fock")
    p.add_argument("--k", type=int, nargs="+", default=[1])
    p.add_argument("--n", type=float, default=0.85)
    p.add_argument("--eta", type=float, help="use thermal noise (with --N) instead of classical noise")
    p.add_argument("--N", type=float)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-photons", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=41)
    p.add_argument("--strict", action="store_true", help="exit 1 if any output is not majorized")
    p.set_defaults(func=cmd_majorize)

    p = sub.add_parser("anneal", help="simulated-annealing search for the minimum output entropy")
    common(p)
    defaults = AnnealConfig()
    p.add_argument("--init", default="fock:6")
    p.add_argument("--n", type=float, default=defaults.n)
    p.add_argument("--iters", type=int, default=defaults.iterations)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--t0", type=float, default=defaults.initial_temperature)
    p.add_argument("--cooling", type=float, default=defaults.cooling_rate)
    p.add_argument("--step", type=float, default=defaults.step_scale)
    p.add_argument("--input-dim", type=int, default=defaults.input_dim)
    p.add_argument("--output-dim", type=int, default=defaults.output_dim)
    p.add_argument("--checkpoints", type=int, nargs="*", default=[100, 200])
    p.set_defaults(func=cmd_anneal)

    p = sub.add_parser("verify", help="run the invariant checks")
    common(p)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--check", action="append", choices=sorted(CHECKS), help="run only the named check(s)")
    p.set_defaults(func=cmd_verify)
    return parser


def _jsonable_params(args) -> dict:
    out = {}
    for key, val in vars(args).items():
        if key == "func":
            continue
        out[key] = str(val) if isinstance(val, Path) else val
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        code, files, seeds, dims = args.func(args, out)
    except (UsageError, DomainError, ValidationError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TruncationError as exc:
        print(f"truncation diagnostic: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    manifest = RunManifest(
        subcommand=args.command,
        params=_jsonable_params(args),
        seeds=[int(s) for s in seeds],
        version=__version__,
        dims=dims,
        outputs=[str(Path(f).name) for f in files],
        duration_s=time.perf_counter() - start,
    )
    manifest.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
