"""Command line interface: ``python -m mlnetreg <subcommand> ...``.

Exit status: 0 on success, 1 for usage errors, 2 for unreadable or invalid
input, 3 when a numerical routine fails or an assumption is violated.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from mlnetreg import __version__
from mlnetreg.centrality import assumption_diagnostics, community_centrality, eigenvector_centrality
from mlnetreg.exceptions import DataError, DimensionMismatch, NumericalError
from mlnetreg.ingest import (
    DatasetBundle,
    NetworkFormat,
    dumps_report,
    load_communities,
    load_covariates,
    load_dense_grid,
    load_network,
    load_response,
    write_csv_table,
    write_report_json,
)
from mlnetreg.monitoring import log_run, log_system_error, setup_logging
from mlnetreg.network import NoiseStructure
from mlnetreg.regression import fit_ccmnetr, fit_cmnetr, fit_rcfe, vif
from mlnetreg.settings import get_log_level
from mlnetreg.simulation import (
    FULL_N_REPS,
    FULL_N_VALUES,
    REPORT_SCHEMA_VERSION,
    ANRule,
    ExperimentConfig,
    ExperimentKind,
    mse_curves,
    perturbation_bound_study,
    qq_rows,
    run_experiment,
    sigma_min_study,
)
from mlnetreg.wiod import DEFAULT_VIF_THRESHOLD, ScaleMode, wiod_pipeline

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

DESK_N_VALUES = (100, 200, 500)
DESK_N_REPS = 500


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("at least one value is required")
    return values


def _emit(payload: Dict[str, Any], out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(dumps_report(payload))
    else:
        write_report_json(out, payload)
        logger.info("Report written to %s", out)


def _network_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--network", type=Path, required=True, help="Edge list or dense supra grid.")
    parser.add_argument(
        "--format",
        choices=[fmt.value for fmt in NetworkFormat],
        default=NetworkFormat.EDGE_LIST.value,
        help="Network file format (default: edgelist).",
    )
    parser.add_argument("--n", type=int, required=True, help="Number of nodes N.")
    parser.add_argument("--layers", type=int, required=True, help="Number of layers L.")
    parser.add_argument("--a-n", default="sqrt", help="a_N rule: sqrt, pow:<e>, linear, sqrt-nl or fixed:<v>.")


def _parse_rule(text: str) -> ANRule:
    try:
        return ANRule.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_centrality(args: argparse.Namespace):
    supra, n_nodes, n_layers = load_network(args.network, NetworkFormat(args.format), args.n, args.layers)
    a_n = _parse_rule(args.a_n).evaluate(n_nodes, n_layers)
    return supra, eigenvector_centrality(supra, n_nodes, n_layers, a_n)


def _spectrum_summary(bundle) -> Dict[str, float]:
    return {"lambda1": bundle.lambda1, "lambda2": bundle.lambda2, "spectral_gap": bundle.gap, "a_n": bundle.a_n}


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.full_scale:
        n_values, n_reps = FULL_N_VALUES, FULL_N_REPS
    else:
        n_values, n_reps = DESK_N_VALUES, DESK_N_REPS
    rules = tuple(_parse_rule(text) for text in (args.a_n or ["sqrt"]))
    try:
        return ExperimentConfig(
            experiment=ExperimentKind(args.experiment),
            n_values=tuple(args.n_list) if args.n_list else n_values,
            a_n_rules=rules,
            n_reps=args.reps if args.reps is not None else n_reps,
            sigma_b=args.sigma_b,
            sigma_y=args.sigma_y,
            master_seed=args.seed,
            noise_structure=NoiseStructure(args.noise),
            threads=args.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_simulate(args: argparse.Namespace) -> Dict[str, Any]:
    config = _build_config(args)
    if config.experiment is ExperimentKind.SIGMA_MIN_STUDY:
        rows = sigma_min_study(config)
        payload: Dict[str, Any] = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "config": config.as_dict(),
            "sigma_min": [row.as_dict() for row in rows],
        }
        wall_time_s = None
    else:
        report = run_experiment(config)
        payload = report.as_dict()
        wall_time_s = report.wall_time_s
        if args.qq_out:
            write_csv_table(args.qq_out, qq_rows(report), ["a_n", "n_nodes", "coefficient", "theoretical", "sample"])
        if args.mse_out:
            write_csv_table(args.mse_out, mse_curves(report), ["a_n", "n_nodes", "coefficient", "mean", "sd", "mse"])

    if args.bound_trials:
        records = perturbation_bound_study(config, args.bound_trials)
        payload["perturbation_bound"] = {
            "n_nodes": config.n_values[0],
            "trials": [record.as_dict() for record in records],
            "within_bound": sum(record.eigvec_error <= record.bound for record in records),
        }
    _emit(payload, args.out)
    return {"experiment": config.experiment.value, "master_seed": config.master_seed, "wall_time_s": wall_time_s}


def _cmd_centrality(args: argparse.Namespace) -> Dict[str, Any]:
    _, bundle = _load_centrality(args)
    columns = ["node"] + [f"c{layer + 1}" for layer in range(bundle.n_layers)]
    rows = [{"node": node + 1, **dict(zip(columns[1:], bundle.C[node].tolist()))} for node in range(bundle.n_nodes)]
    if args.communities:
        _, Z = community_centrality(bundle.C, load_communities(args.communities))
        columns.append("z")
        for row, value in zip(rows, Z.tolist()):
            row["z"] = value
    if args.out:
        write_csv_table(args.out, rows, columns)
    sys.stdout.write(dumps_report(_spectrum_summary(bundle)))
    return {"n_nodes": bundle.n_nodes, "n_layers": bundle.n_layers}


def _cmd_fit(args: argparse.Namespace) -> Dict[str, Any]:
    _, bundle = _load_centrality(args)
    X, names = load_covariates(args.covariates)
    y, response_name = load_response(args.response)
    if args.intercept:
        X = np.hstack([np.ones((X.shape[0], 1)), X])
        names = ("const", *names)
    if args.model == "cmnetr":
        fit = fit_cmnetr(X, bundle.C, y)
    else:
        if not args.communities:
            raise UsageError(f"--communities is required for --model {args.model}")
        comm = load_communities(args.communities)
        if args.model == "ccmnetr":
            _, Z = community_centrality(bundle.C, comm)
            fit = fit_ccmnetr(X, Z, y)
        else:
            fit = fit_rcfe(X, bundle.C, comm.S, y)
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "response": response_name,
        "covariates": dict(zip((f"x{index + 1}" for index in range(len(names))), names)),
        "centrality": _spectrum_summary(bundle),
        "fit": fit.as_dict(),
    }
    _emit(payload, args.out)
    return {"model": args.model, "n_obs": fit.n_obs}


def _cmd_vif(args: argparse.Namespace) -> Dict[str, Any]:
    X, names = load_covariates(args.covariates)
    factors = vif(X)
    if args.out:
        write_report_json(args.out, {"vif": dict(zip(names, factors.tolist()))})
    for name, value in zip(names, factors):
        print(f"{name}\t{value:.6g}")
    return {"n_covariates": len(names)}


def _cmd_diagnose(args: argparse.Namespace) -> Dict[str, Any]:
    supra, bundle = _load_centrality(args)
    X, _ = load_covariates(args.covariates)
    comm = load_communities(args.communities) if args.communities else None
    diagnostics = assumption_diagnostics(supra, X, bundle.V, comm, bundle.a_n)
    _emit({"schema_version": REPORT_SCHEMA_VERSION, "diagnostics": diagnostics.as_dict()}, args.out)
    return {"n_nodes": bundle.n_nodes}


def _cmd_wiod(args: argparse.Namespace) -> Dict[str, Any]:
    flows = load_dense_grid(args.flows)
    communities = load_communities(args.communities)
    n_nodes = communities.n_nodes
    if flows.shape[0] != flows.shape[1] or flows.shape[0] % n_nodes:
        raise DimensionMismatch(f"flow grid {flows.shape} is not NL x NL for N={n_nodes}")
    n_layers = flows.shape[0] // n_nodes
    if args.layers is not None and args.layers != n_layers:
        raise DimensionMismatch(f"flow grid implies L={n_layers}, --layers says {args.layers}")

    table, names = load_covariates(args.covariates, average_by=args.average_by)
    if args.response_column not in names:
        raise DataError(f"response column {args.response_column!r} not found in {list(names)}")
    column = names.index(args.response_column)
    bundle = DatasetBundle(
        supra=flows,
        n_nodes=n_nodes,
        n_layers=n_layers,
        covariates=np.delete(table, column, axis=1),
        covariate_names=tuple(name for name in names if name != args.response_column),
        response=table[:, column],
        response_name=args.response_column,
        communities=communities,
        provenance={
            "flows": str(args.flows),
            "covariates": str(args.covariates),
            "communities": str(args.communities),
            "average_by": args.average_by,
        },
    )
    result = wiod_pipeline(bundle, args.vif_threshold, scale=ScaleMode(args.scale))
    payload = {"schema_version": REPORT_SCHEMA_VERSION, "provenance": dict(bundle.provenance), **result.as_dict()}
    if args.ranking_out:
        write_csv_table(
            args.ranking_out,
            [{"rank": rank + 1, "sector": sector, "centrality": score} for rank, (sector, score) in enumerate(result.sector_ranking)],
            ["rank", "sector", "centrality"],
        )
    _emit(payload, args.out)
    return {"n_nodes": n_nodes, "n_layers": n_layers, "surviving": list(result.surviving)}


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="mlnetreg", description="Multilayer network regression toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="<command>")

    simulate = commands.add_parser("simulate", help="Run a seeded Monte Carlo experiment.")
    simulate.add_argument("--experiment", required=True, choices=[kind.value for kind in ExperimentKind])
    simulate.add_argument("--n-list", type=_int_list, help="Comma-separated N grid (default 100,200,500).")
    simulate.add_argument("--reps", type=int, help="Replications per N (default 500).")
    simulate.add_argument("--seed", type=int, default=0, help="Master seed.")
    simulate.add_argument("--a-n", action="append", help="a_N rule; repeat for several (default sqrt).")
    simulate.add_argument("--sigma-b", type=float, default=0.25, help="Noise sd on the supra matrix.")
    simulate.add_argument("--sigma-y", type=float, default=1.0, help="Response noise sd.")
    simulate.add_argument("--noise", choices=[mode.value for mode in NoiseStructure], default=NoiseStructure.FULL_SYMMETRIC.value)
    simulate.add_argument("--threads", type=int, help="Parallel replications (default MLNETREG_THREADS).")
    simulate.add_argument("--full-scale", action="store_true", help="N up to 1000 with 1000 replications.")
    simulate.add_argument("--bound-trials", type=int, default=0, help="Also run this many perturbation-bound trials.")
    simulate.add_argument("--qq-out", type=Path, help="CSV file for QQ data.")
    simulate.add_argument("--mse-out", type=Path, help="CSV file for MSE curves.")
    simulate.add_argument("--out", type=Path, help="JSON report path (default stdout).")
    simulate.set_defaults(handler=_cmd_simulate)

    centrality = commands.add_parser("centrality", help="Centrality of a multilayer network.")
    _network_arguments(centrality)
    centrality.add_argument("--communities", type=Path, help="Community labels; adds the z column.")
    centrality.add_argument("--out", type=Path, help="CSV file for the scaled centrality.")
    centrality.set_defaults(handler=_cmd_centrality)

    fit = commands.add_parser("fit", help="Fit C-MNetR, CC-MNetR or RCFE.")
    fit.add_argument("--model", choices=["cmnetr", "ccmnetr", "rcfe"], required=True)
    _network_arguments(fit)
    fit.add_argument("--covariates", type=Path, required=True)
    fit.add_argument("--response", type=Path, required=True)
    fit.add_argument("--communities", type=Path)
    fit.add_argument("--intercept", action="store_true", help="Prepend a column of ones to X.")
    fit.add_argument("--out", type=Path, help="JSON report path (default stdout).")
    fit.set_defaults(handler=_cmd_fit)

    vif_cmd = commands.add_parser("vif", help="Variance inflation factors of a covariate table.")
    vif_cmd.add_argument("--covariates", type=Path, required=True)
    vif_cmd.add_argument("--out", type=Path, help="Optional JSON output.")
    vif_cmd.set_defaults(handler=_cmd_vif)

    diagnose = commands.add_parser("diagnose", help="Identifiability and spectral-gap diagnostics.")
    _network_arguments(diagnose)
    diagnose.add_argument("--covariates", type=Path, required=True)
    diagnose.add_argument("--communities", type=Path, help="Community labels; omit to skip the community-share check.")
    diagnose.add_argument("--out", type=Path, help="JSON report path (default stdout).")
    diagnose.set_defaults(handler=_cmd_diagnose)

    wiod = commands.add_parser("wiod", help="Input-output table pipeline with VIF screening.")
    wiod.add_argument("--flows", type=Path, required=True, help="Dense NL x NL flow grid (not symmetrised).")
    wiod.add_argument("--covariates", type=Path, required=True, help="Covariate table including the response.")
    wiod.add_argument("--communities", type=Path, required=True)
    wiod.add_argument("--layers", type=int, help="Expected L; checked against the flow grid.")
    wiod.add_argument("--response-column", default="GO")
    wiod.add_argument("--vif-threshold", type=float, default=DEFAULT_VIF_THRESHOLD)
    wiod.add_argument("--scale", choices=[mode.value for mode in ScaleMode], default=ScaleMode.GLOBAL.value)
    wiod.add_argument("--average-by", choices=["sector"], help="Average long-format covariates per sector.")
    wiod.add_argument("--ranking-out", type=Path, help="CSV file for the sector centrality ranking.")
    wiod.add_argument("--out", type=Path, help="JSON report path (default stdout).")
    wiod.set_defaults(handler=_cmd_wiod)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    arguments = list(argv) if argv is not None else sys.argv[1:]
    try:
        args = parser.parse_args(arguments)
    except UsageError as exc:
        print(parser.format_usage(), end="", file=sys.stderr)
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)

    setup_logging(get_log_level())
    started = time.perf_counter()
    status = EXIT_OK
    metadata: Dict[str, Any] = {"argv": arguments}
    try:
        metadata.update(args.handler(args) or {})
    except UsageError as exc:
        print(parser.format_usage(), end="", file=sys.stderr)
        print(f"Error: {exc}", file=sys.stderr)
        status = EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        log_system_error(f"{args.command} rejected its input", exc)
        status = EXIT_DATA
    except NumericalError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        log_system_error(f"{args.command} failed numerically", exc)
        status = EXIT_NUMERICAL
    finally:
        log_run(
            args.command,
            duration_ms=(time.perf_counter() - started) * 1000.0,
            exit_status=status,
            metadata=metadata,
        )
    return status
