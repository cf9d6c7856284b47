"""C-DEIM toolkit CLI: bounded field reconstruction from sparse sensors."""

import argparse
import json
import logging
import sys
from pathlib import Path

from config.settings import get_settings
from config.logging_config import setup_logging
from utils.console import fail, header, ok, separator, table
from utils.errors import IO_EXIT_CODE, CDeimError, ValidationError
from utils.helpers import stopwatch

logger = logging.getLogger("cdeim.main")

USAGE_EXIT_CODE = 2


def _solver_overrides(args) -> dict:
    return {
        "lambda_init": args.lambda_init,
        "gamma": args.gamma,
        "delta": args.delta,
        "tau": args.tau,
        "tau_lambda": args.tau_lambda,
        "max_newton_iters": args.max_newton_iters,
        "lambda_cap": args.lambda_cap,
    }


def _resolve(args, **sections):
    from config.experiment import resolve_config
    return resolve_config(
        args.command,
        config_path=getattr(args, "config", None),
        run={"seed": getattr(args, "seed", None), "threads": getattr(args, "threads", None),
             "output_dir": args.out},
        solver=_solver_overrides(args) if hasattr(args, "delta") else None,
        default_threads=get_settings().threads,
        default_output=get_settings().output_dir / args.command,
        **sections,
    )


def _finish(args, config, outputs: list[str], timer: dict) -> Path:
    from storage.manifest import write_manifest
    out = config.output_dir
    path = write_manifest(out, args.command, args.argv, config.seed, config.to_dict(),
                          timer["seconds"], outputs)
    print(ok(f"Outputs written to {out}"))
    return path


# =========================================================================
# Basis and sensor placement
# =========================================================================
def cmd_pod(args):
    """POD basis from a snapshot matrix."""
    from reconstruction.basis import SnapshotMatrix, compute_pod_basis, snapshot_singular_values
    from storage.matrix_file import read_matrix, write_matrix

    config = _resolve(args, inputs={"snapshots": args.snapshots})
    with stopwatch() as timer:
        snapshots = SnapshotMatrix(read_matrix(args.snapshots))
        phi = compute_pod_basis(snapshots, args.m)
        out = config.output_dir
        write_matrix(phi, out / "phi.cdmx")
        write_matrix(snapshot_singular_values(snapshots), out / "singular_values.cdmx")
    print(header("POD basis"))
    print(f"  Snapshots: {snapshots.grid_size} x {snapshots.n_snapshots}   modes: {args.m}")
    _finish(args, config, ["phi.cdmx", "singular_values.cdmx"], timer)


def cmd_sensors(args):
    """Sensor placement by (restricted) column-pivoted QR."""
    import numpy as np
    from reconstruction.basis import AccessMask, assemble_bundle, cpqr_select, restricted_cpqr_select
    from storage.matrix_file import read_matrix, write_sensor_indices

    config = _resolve(args, inputs={"phi": args.phi, "mask": args.mask})
    with stopwatch() as timer:
        phi = read_matrix(args.phi)
        if args.mask:
            mask = AccessMask(read_matrix(args.mask).reshape(-1) != 0)
            sensors = restricted_cpqr_select(phi, mask, args.r)
        else:
            sensors = cpqr_select(phi, args.r)
        bundle = assemble_bundle(phi, sensors)
        write_sensor_indices(sensors, config.output_dir / "sensors.txt")
    print(header("Sensor placement"))
    print(f"  Sensors: {args.r}   sigma_min(Theta): {bundle.sigma_min:.4e}   full rank: {bundle.full_rank}")
    print(f"  Indices: {np.array2string(sensors, max_line_width=72)}")
    _finish(args, config, ["sensors.txt"], timer)


# =========================================================================
# Reconstruction
# =========================================================================
def cmd_reconstruct(args):
    """C-DEIM reconstruction of every column of y."""
    import numpy as np
    import pandas as pd
    from reconstruction.basis import assemble_bundle
    from reconstruction.metrics import relative_l2
    from reconstruction.penalty import BoundsSpec
    from reconstruction.solver import cdeim_solve
    from storage.manifest import write_frame
    from storage.matrix_file import read_matrix, read_sensor_indices, write_matrix

    config = _resolve(args, inputs={"phi": args.phi, "sensors": args.sensors, "y": args.y,
                                    "truth": args.truth})
    bounds = BoundsSpec(*args.bounds)
    with stopwatch() as timer:
        phi = read_matrix(args.phi)
        bundle = assemble_bundle(phi, read_sensor_indices(args.sensors, phi.shape[0]))
        y = read_matrix(args.y)
        truth = read_matrix(args.truth) if args.truth else None
        if y.shape[0] != bundle.n_sensors:
            raise ValidationError(f"y has {y.shape[0]} rows but {bundle.n_sensors} sensors were given")

        rows, recons, alphas = [], [], []
        for j in range(y.shape[1]):
            outcome = cdeim_solve(bundle, y[:, j], bounds, config.solver)
            record = {"column": j, **outcome.to_record()}
            if truth is not None:
                record["relative_error"] = relative_l2(truth[:, j], outcome.reconstruction)
            rows.append(record)
            recons.append(outcome.reconstruction)
            alphas.append(outcome.alpha)

        out = config.output_dir
        frame = pd.DataFrame(rows)
        write_frame(frame, out / "outcome.csv")
        write_matrix(np.column_stack(recons), out / "reconstruction.cdmx")
        write_matrix(np.column_stack(alphas), out / "alpha.cdmx")

    print(header("C-DEIM reconstruction"))
    print(table(frame))
    _finish(args, config, ["outcome.csv", "reconstruction.cdmx", "alpha.cdmx"], timer)


# =========================================================================
# Benchmarks
# =========================================================================
def cmd_harmonics(args):
    """Random-harmonics benchmark."""
    from benchmarks.harmonics import generate_harmonics, run_harmonics_experiment, run_lambda_sweep
    from storage.manifest import write_frame, write_report
    from storage.matrix_file import write_matrix
    from utils.helpers import parse_float_list, parse_int_list

    overrides = {
        "n_functions": args.n_functions,
        "n_train": args.n_train,
        "grid_points": args.grid_points,
        "n_terms": args.n_terms,
        "eta": args.eta,
        "amplitude_variance": False if args.std_amplitudes else None,
        "restricted": False if args.unrestricted else None,
    }
    config = _resolve(args, harmonics=overrides)
    counts = parse_int_list(args.r)
    out = config.output_dir
    outputs = []
    with stopwatch() as timer:
        data = generate_harmonics(config.harmonics)
        if args.save_data:
            write_matrix(data[0].data, out / "train.cdmx")
            write_matrix(data[1].data, out / "test.cdmx")
            outputs += ["train.cdmx", "test.cdmx"]
        if args.lambda_sweep:
            lambdas = parse_float_list(args.lambda_sweep)
            for r in counts:
                sweep = run_lambda_sweep(config.harmonics, r, lambdas, config.solver, config.threads, data)
                name = f"lambda_sweep_r{r}.csv"
                write_frame(sweep, out / name)
                outputs.append(name)
                print(header(f"Lambda sweep, r={r}"))
                print(table(sweep))
        else:
            report = run_harmonics_experiment(config.harmonics, counts, config.solver, config.threads, data)
            outputs += write_report(report, out)
            print(header("Random harmonics"))
            print(table(report.summary_frame()))
    _finish(args, config, outputs, timer)


def _fire_overrides(args) -> dict:
    from utils.helpers import parse_float_list
    return {
        "n_simulations": args.n_sims,
        "n_train": args.n_train,
        "sim_time": args.sim_time,
        "forecast_time": args.forecast_time,
        "cell_length": args.cell_length,
        "sensor_lines": tuple(parse_float_list(args.lines)) if getattr(args, "lines", None) else None,
        "restricted": False if getattr(args, "unrestricted", False) else None,
    }


def _fire_resolve(args):
    from wildfire.experiment import FIRE_SOLVER_DEFAULTS
    from config.experiment import resolve_config
    return resolve_config(
        args.command,
        config_path=args.config,
        run={"seed": args.seed, "threads": args.threads, "output_dir": args.out},
        solver=_solver_overrides(args) if hasattr(args, "delta") else None,
        fire=_fire_overrides(args),
        solver_base=FIRE_SOLVER_DEFAULTS,
        default_threads=get_settings().threads,
        default_output=get_settings().output_dir / args.command,
    )


def cmd_fire_sim(args):
    """Wildfire ensemble: one-hour snapshots and two-hour test truths."""
    from storage.manifest import write_frame
    from storage.matrix_file import write_matrix
    from wildfire.experiment import generate_ensemble

    config = _fire_resolve(args)
    out = config.output_dir
    with stopwatch() as timer:
        ensemble = generate_ensemble(config.fire, config.threads)
        write_matrix(ensemble.snapshots(), out / "snapshots_1h.cdmx")
        write_matrix(ensemble.snapshots(two_hour=True), out / "snapshots_2h.cdmx")
        runs = ensemble.metadata_frame()
        write_frame(runs, out / "runs.csv")
    print(header("Wildfire ensemble"))
    print(f"  Members: {len(runs)}   grid: {config.fire.nx} x {config.fire.ny}")
    print(f"  Mean burned cells at {config.fire.sim_time:.0f} s: {runs['burned_area'].mean():.1f}")
    _finish(args, config, ["snapshots_1h.cdmx", "snapshots_2h.cdmx", "runs.csv"], timer)


def _fire_reconstruct(args, forecast: bool):
    from storage.manifest import write_report
    from utils.helpers import parse_int_list
    from wildfire.experiment import run_fire_experiment

    config = _fire_resolve(args)
    with stopwatch() as timer:
        report = run_fire_experiment(config.fire, args.scenario, parse_int_list(args.r),
                                     config.solver, config.threads, forecast=forecast)
        outputs = write_report(report, config.output_dir)
    title = "Wildfire forecast" if forecast else "Wildfire reconstruction"
    print(header(f"{title} ({args.scenario})"))
    print(table(report.summary_frame()))
    _finish(args, config, outputs, timer)


def cmd_fire_recon(args):
    """Reconstruct one-hour fire states from sparse sensors."""
    _fire_reconstruct(args, forecast=False)


def cmd_fire_forecast(args):
    """Reconstruct one-hour states and forecast to two hours."""
    _fire_reconstruct(args, forecast=True)


def cmd_report(args):
    """Print the metric tables of one or more run directories."""
    import pandas as pd
    from storage.manifest import read_manifest, read_summary, write_frame

    frames = []
    for run_dir in args.runs:
        manifest = read_manifest(run_dir)
        summary = read_summary(run_dir)
        summary.insert(0, "run", Path(run_dir).name)
        summary.insert(1, "command", manifest.get("command"))
        summary.insert(2, "seed", manifest.get("seed"))
        frames.append(summary)
    combined = pd.concat(frames, ignore_index=True)
    print(header("Run report"))
    print(table(combined))
    print(separator())
    if args.out:
        write_frame(combined, Path(args.out) / "report.csv")
        print(ok(f"Combined table written to {Path(args.out) / 'report.csv'}"))


# =========================================================================
# Argument parsing
# =========================================================================
def _add_run_flags(p, seed: bool = True):
    p.add_argument("--config", default=None, help="Config file with [run]/[solver]/... sections")
    p.add_argument("--out", default=None, help="Output directory")
    p.add_argument("--threads", type=int, default=None, help="Parallel workers")
    if seed:
        p.add_argument("--seed", type=int, default=None, help="Global random seed")


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--lambda-init", type=float, default=None)
    g.add_argument("--gamma", type=float, default=None)
    g.add_argument("--delta", type=float, default=None, help="Penalty tolerance")
    g.add_argument("--tau", type=float, default=None, help="Newton step tolerance")
    g.add_argument("--tau-lambda", type=float, default=None, help="Bisection interval tolerance")
    g.add_argument("--max-newton-iters", type=int, default=None)
    g.add_argument("--lambda-cap", type=float, default=None)


def _add_fire_flags(p):
    p.add_argument("--n-sims", type=int, default=None, help="Ensemble size")
    p.add_argument("--n-train", type=int, default=None, help="Training members")
    p.add_argument("--sim-time", type=float, default=None, help="Snapshot time in seconds")
    p.add_argument("--forecast-time", type=float, default=None, help="Forecast time in seconds")
    p.add_argument("--cell-length", type=float, default=None, help="Cell side in meters")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdeim",
        description="Constrained DEIM - bounded field reconstruction from sparse sensors",
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # pod
    p_pod = subparsers.add_parser("pod", help="POD basis from a snapshot matrix")
    p_pod.add_argument("--snapshots", required=True, help="Snapshot matrix (.cdmx or .csv)")
    p_pod.add_argument("--m", type=int, required=True, help="Number of modes")
    _add_run_flags(p_pod, seed=False)
    p_pod.set_defaults(func=cmd_pod)

    # sensors
    p_sen = subparsers.add_parser("sensors", help="Sensor placement by column-pivoted QR")
    p_sen.add_argument("--phi", required=True, help="Basis matrix")
    p_sen.add_argument("--r", type=int, required=True, help="Number of sensors")
    p_sen.add_argument("--mask", default=None, help="N x 1 matrix, nonzero = accessible")
    _add_run_flags(p_sen, seed=False)
    p_sen.set_defaults(func=cmd_sensors)

    # reconstruct
    p_rec = subparsers.add_parser("reconstruct", help="C-DEIM reconstruction from sensor data")
    p_rec.add_argument("--phi", required=True, help="Basis matrix")
    p_rec.add_argument("--sensors", required=True, help="Sensor index file")
    p_rec.add_argument("--y", required=True, help="Observations, one column per case")
    p_rec.add_argument("--bounds", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    p_rec.add_argument("--truth", default=None, help="Optional true fields for error reporting")
    _add_run_flags(p_rec, seed=False)
    _add_solver_flags(p_rec)
    p_rec.set_defaults(func=cmd_reconstruct)

    # harmonics
    p_har = subparsers.add_parser("harmonics", help="Random-harmonics benchmark")
    p_har.add_argument("--r", default="5-35:5", help='Sensor counts, "5,10" or "5-35:5"')
    p_har.add_argument("--n-functions", type=int, default=None)
    p_har.add_argument("--n-train", type=int, default=None)
    p_har.add_argument("--grid-points", type=int, default=None)
    p_har.add_argument("--n-terms", type=int, default=None)
    p_har.add_argument("--eta", type=float, default=None, help="Inaccessible margin at each end")
    p_har.add_argument("--std-amplitudes", action="store_true", help="Read N(0, 1/k) as a standard deviation")
    p_har.add_argument("--unrestricted", action="store_true", help="Allow sensors anywhere")
    p_har.add_argument("--lambda-sweep", default=None, help="Comma-separated fixed lambdas")
    p_har.add_argument("--save-data", action="store_true", help="Write train/test matrices")
    _add_run_flags(p_har)
    _add_solver_flags(p_har)
    p_har.set_defaults(func=cmd_harmonics)

    # fire-sim
    p_fs = subparsers.add_parser("fire-sim", help="Generate a wildfire ensemble")
    _add_fire_flags(p_fs)
    _add_run_flags(p_fs)
    p_fs.set_defaults(func=cmd_fire_sim)

    # fire-recon / fire-forecast
    for name, func, text in (("fire-recon", cmd_fire_recon, "Reconstruct fire states"),
                             ("fire-forecast", cmd_fire_forecast, "Reconstruct and forecast fire states")):
        p = subparsers.add_parser(name, help=text)
        p.add_argument("--scenario", default="restricted_cpqr_lines",
                       choices=["restricted_cpqr_lines", "random_burning"])
        p.add_argument("--r", default="70", help="Sensor counts")
        p.add_argument("--lines", default=None, help="Sensor line y-coordinates, comma-separated")
        p.add_argument("--unrestricted", action="store_true", help="Plain CPQR instead of sensor lines")
        _add_fire_flags(p)
        _add_run_flags(p)
        _add_solver_flags(p)
        p.set_defaults(func=func)

    # report
    p_rep = subparsers.add_parser("report", help="Combine metric tables of run directories")
    p_rep.add_argument("runs", nargs="+", help="Run directories")
    p_rep.add_argument("--out", default=None, help="Write the combined table here")
    p_rep.set_defaults(func=cmd_report)

    return parser


def _emit_error(category: str, message: str):
    print(json.dumps({"error": category, "message": message}), file=sys.stderr)


def run_cli(argv: list[str]) -> int:
    """Parse argv, run the subcommand and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT_CODE if exc.code else 0
    if args.command is None:
        parser.print_help()
        return USAGE_EXIT_CODE
    args.argv = list(argv)

    settings = get_settings()
    setup_logging(settings.log_dir, settings.log_level)

    try:
        args.func(args)
    except KeyboardInterrupt:
        print(fail("Aborted."), file=sys.stderr)
        return 1
    except CDeimError as e:
        logger.error("Command failed: %s", e, exc_info=True)
        _emit_error(e.category, str(e))
        return e.exit_code
    except OSError as e:
        logger.error("I/O failure: %s", e, exc_info=True)
        _emit_error("io", str(e))
        return IO_EXIT_CODE
    except Exception as e:
        logger.error("Command failed: %s", e, exc_info=True)
        _emit_error("internal", str(e))
        return 1
    return 0


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
