"""Seeded Monte Carlo experiments for the centrality regressions.

A replication is keyed by ``(master_seed, N, rep_index)``; every random
draw inside it comes from a sub-stream of that key, so results do not depend
on scheduling.  The network eigenvectors do not depend on ``a_N``, so one
replication serves every configured ``a_N`` rule with common random numbers.
"""

from __future__ import annotations

import logging
import math
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from tqdm import tqdm

from mlnetreg.centrality import CommunityStructure, community_centrality, eigenvector_centrality
from mlnetreg.exceptions import (
    AllReplicationsFailed,
    DegenerateRange,
    InsufficientData,
    NumericalError,
)
from mlnetreg.linalg import leading_eigenpair, second_eigenvalue, smallest_singular_value_residual, spectral_norm
from mlnetreg.network import NoiseSpec, NoiseStructure, assemble_supra, make_multiplex, perturb
from mlnetreg.regression import fit_ccmnetr, fit_cmnetr, fit_rcfe
from mlnetreg.rng import stream
from mlnetreg.settings import get_thread_count, progress_enabled
from mlnetreg.synth import (
    ALT_CONN_PROB,
    BASE_CONN_PROB,
    WeightDist,
    balanced_labels,
    build_multiplex_layers,
    sample_covariates,
    sample_response,
)

logger = logging.getLogger("simulation")

REPORT_SCHEMA_VERSION = 1
FULL_N_VALUES = (100, 200, 500, 1000)
FULL_N_REPS = 1000
DAVIS_KAHAN_CONSTANT = 8.0

# sub-stream ids inside one replication
_LAYERS, _NOISE, _COVARIATES, _RESPONSE = 0, 1, 2, 3


class ExperimentKind(Enum):
    CMNETR_NOISELESS = "cmnetr-noiseless"
    CCMNETR_NOISELESS = "ccmnetr-noiseless"
    CMNETR_NOISY = "cmnetr-noisy"
    CCMNETR_NOISY = "ccmnetr-noisy"
    RCFE_COMPARISON = "rcfe-comparison"
    SIGMA_MIN_STUDY = "sigma-min-study"

    @property
    def noisy(self) -> bool:
        return self in (ExperimentKind.CMNETR_NOISY, ExperimentKind.CCMNETR_NOISY)


@dataclass(frozen=True)
class ANRule:
    """Scaling rule for ``a_N``: ``sqrt``, ``pow:<e>``, ``linear``, ``sqrt-nl`` or ``fixed:<v>``."""

    kind: str
    value: float = 0.0

    _KINDS = ("sqrt", "pow", "linear", "sqrt-nl", "fixed")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown a_N rule {self.kind!r}; expected one of {', '.join(self._KINDS)}")
        if self.kind == "fixed" and self.value <= 0:
            raise ValueError("a fixed a_N must be positive")

    @classmethod
    def parse(cls, text: str) -> "ANRule":
        name, _, raw = text.strip().lower().partition(":")
        if name in ("pow", "fixed"):
            if not raw:
                raise ValueError(f"a_N rule {name!r} needs a value, e.g. {name}:0.8")
            try:
                return cls(name, float(raw))
            except ValueError as exc:
                raise ValueError(f"invalid a_N value in {text!r}") from exc
        if raw:
            raise ValueError(f"a_N rule {name!r} takes no value")
        return cls(name)

    def evaluate(self, n_nodes: int, n_layers: int) -> float:
        if self.kind == "sqrt":
            return math.sqrt(n_nodes)
        if self.kind == "pow":
            return float(n_nodes) ** self.value
        if self.kind == "linear":
            return float(n_nodes)
        if self.kind == "sqrt-nl":
            return math.sqrt(n_nodes * n_layers)
        return self.value

    @property
    def label(self) -> str:
        if self.kind == "sqrt":
            return "N^0.5"
        if self.kind == "pow":
            return f"N^{self.value:g}"
        if self.kind == "linear":
            return "N"
        if self.kind == "sqrt-nl":
            return "(NL)^0.5"
        return f"{self.value:g}"


@dataclass(frozen=True)
class TrueCoefficients:
    beta_x: Tuple[float, ...] = (1.0, 2.0)
    beta_c: Tuple[float, ...] = (1.0, 2.0)
    beta_z: float = 2.0
    beta_s: Tuple[float, ...] = (0.0, 0.0, 0.0)

    def as_dict(self) -> dict:
        return {
            "beta_x": list(self.beta_x),
            "beta_c": list(self.beta_c),
            "beta_z": self.beta_z,
            "beta_s": list(self.beta_s),
        }


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentKind
    n_values: Tuple[int, ...] = (100, 200, 500)
    a_n_rules: Tuple[ANRule, ...] = (ANRule("sqrt"),)
    n_reps: int = 500
    sigma_b: float = 0.25
    sigma_y: float = 1.0
    true_beta: TrueCoefficients = field(default_factory=TrueCoefficients)
    master_seed: int = 0
    n_covariates: int = 2
    n_layers: int = 2
    n_communities: int = 3
    noise_structure: NoiseStructure = NoiseStructure.FULL_SYMMETRIC
    threads: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_reps < 1:
            raise ValueError("n_reps must be at least 1")
        if not self.n_values:
            raise ValueError("at least one N is required")
        if not self.a_n_rules:
            raise ValueError("at least one a_N rule is required")
        if self.sigma_b < 0:
            raise ValueError(f"sigma_b must be nonnegative, got {self.sigma_b}")
        if self.sigma_y < 0:
            raise ValueError(f"sigma_y must be nonnegative, got {self.sigma_y}")
        if self.n_layers != len(self.true_beta.beta_c):
            raise ValueError("beta_c needs one coefficient per layer")
        if self.n_covariates != len(self.true_beta.beta_x):
            raise ValueError("beta_x needs one coefficient per covariate")
        if self.experiment is ExperimentKind.RCFE_COMPARISON and len(self.true_beta.beta_s) != self.n_communities:
            raise ValueError("beta_s needs one coefficient per community")
        extra = self.n_communities if self.experiment is ExperimentKind.RCFE_COMPARISON else 0
        for n in self.n_values:
            if n <= self.n_covariates + self.n_layers + extra or n < self.n_communities:
                raise ValueError(f"N={n} is too small for P={self.n_covariates}, L={self.n_layers}")

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment.value,
            "n_values": list(self.n_values),
            "a_n_rules": [rule.label for rule in self.a_n_rules],
            "n_reps": self.n_reps,
            "sigma_b": self.sigma_b,
            "sigma_y": self.sigma_y,
            "true_beta": self.true_beta.as_dict(),
            "master_seed": self.master_seed,
            "n_covariates": self.n_covariates,
            "n_layers": self.n_layers,
            "n_communities": self.n_communities,
            "noise_structure": self.noise_structure.value,
        }


def full_scale(config: ExperimentConfig) -> ExperimentConfig:
    """The full grid: N up to 1000 and 1000 replications per cell."""

    return replace(config, n_values=FULL_N_VALUES, n_reps=FULL_N_REPS)


@dataclass
class ReplicationRecord:
    n_nodes: int
    rep_index: int
    gap: Optional[float] = None
    estimates: Dict[str, Dict[str, float]] = field(default_factory=dict)
    a_n_over_gap: Dict[str, float] = field(default_factory=dict)
    z_stats: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def key(self) -> Tuple[int, int]:
        return self.n_nodes, self.rep_index


@dataclass(frozen=True)
class QQData:
    sample: np.ndarray
    theoretical: np.ndarray

    def correlation(self) -> float:
        return float(np.corrcoef(self.sample, self.theoretical)[0, 1])


@dataclass(frozen=True)
class CoefficientSummary:
    name: str
    true_value: float
    mean: float
    sd: float
    mse: float
    count: int
    single_replication: bool = False

    @property
    def bias(self) -> float:
        return self.mean - self.true_value

    def as_dict(self) -> dict:
        return {
            "true": self.true_value,
            "mean": self.mean,
            "sd": self.sd,
            "mse": self.mse,
            "count": self.count,
            "single_replication": self.single_replication,
        }


@dataclass
class CellSummary:
    a_n: str
    n_nodes: int
    n_success: int
    n_failed: int
    failures: Dict[str, int]
    a_n_over_gap: Optional[float]
    coefficients: Dict[str, CoefficientSummary] = field(default_factory=dict)
    qq: Dict[str, QQData] = field(default_factory=dict)
    z_stat_summary: Optional[dict] = None

    def as_dict(self) -> dict:
        return {
            "a_n": self.a_n,
            "n_nodes": self.n_nodes,
            "n_success": self.n_success,
            "n_failed": self.n_failed,
            "failures": dict(sorted(self.failures.items())),
            "a_n_over_gap": self.a_n_over_gap,
            "coefficients": {name: summary.as_dict() for name, summary in sorted(self.coefficients.items())},
            "qq_correlation": {name: qq.correlation() for name, qq in sorted(self.qq.items())},
            "z_stat": self.z_stat_summary,
        }


@dataclass
class SimulationReport:
    config: ExperimentConfig
    cells: List[CellSummary]
    wall_time_s: float = 0.0

    def cell(self, a_n: str, n_nodes: int) -> CellSummary:
        for cell in self.cells:
            if cell.a_n == a_n and cell.n_nodes == n_nodes:
                return cell
        raise KeyError((a_n, n_nodes))

    def as_dict(self) -> dict:
        # wall time is logged, not serialised, so equal seeds give equal bytes
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "config": self.config.as_dict(),
            "cells": [cell.as_dict() for cell in self.cells],
        }


@dataclass(frozen=True)
class SigmaMinRow:
    n_nodes: int
    variant: str
    sigma_min: float

    @property
    def scaled(self) -> float:
        return self.sigma_min * math.sqrt(self.n_nodes)

    def as_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "variant": self.variant,
            "sigma_min": self.sigma_min,
            "sigma_min_sqrt_n": self.scaled,
        }


@dataclass(frozen=True)
class PerturbationRecord:
    trial: int
    eigvec_error: float
    noise_norm: float
    gap: float

    @property
    def bound(self) -> float:
        return DAVIS_KAHAN_CONSTANT * self.noise_norm / self.gap

    def as_dict(self) -> dict:
        return {
            "trial": self.trial,
            "eigvec_error": self.eigvec_error,
            "noise_norm": self.noise_norm,
            "gap": self.gap,
            "bound": self.bound,
        }


def _layer_design(experiment: ExperimentKind, n_layers: int):
    if experiment.noisy:
        # layers must differ so that B0 has a usable spectral gap
        dists = [WeightDist.UNIFORM_1_2] + [WeightDist.EXP_RESCALED] * (n_layers - 1)
    else:
        dists = [WeightDist.UNIFORM_1_2] * n_layers
    return [BASE_CONN_PROB] * n_layers, dists


def true_values(config: ExperimentConfig) -> Dict[str, float]:
    beta = config.true_beta
    xs = {f"x{index + 1}": value for index, value in enumerate(beta.beta_x)}
    cs = {f"c{index + 1}": value for index, value in enumerate(beta.beta_c)}
    ss = {f"s{index + 1}": value for index, value in enumerate(beta.beta_s)}
    experiment = config.experiment
    if experiment in (ExperimentKind.CMNETR_NOISELESS, ExperimentKind.CMNETR_NOISY):
        return {**xs, **cs}
    if experiment in (ExperimentKind.CCMNETR_NOISELESS, ExperimentKind.CCMNETR_NOISY):
        return {**xs, "z": beta.beta_z}
    truth: Dict[str, float] = {}
    for name, value in {**xs, **cs, **ss}.items():
        truth[f"rcfe:{name}"] = value
    for name, value in {**xs, **cs}.items():
        truth[f"cmnetr:{name}"] = value
    for name, value in {**xs, "z": beta.beta_z}.items():
        truth[f"ccmnetr:{name}"] = value
    return truth


def _prefixed(prefix: str, names: Sequence[str], values: np.ndarray) -> Dict[str, float]:
    return {f"{prefix}{name}": float(value) for name, value in zip(names, values)}


def run_replication(config: ExperimentConfig, n_nodes: int, rep_index: int) -> ReplicationRecord:
    """One pass: layers, supra, optional noise, centrality, response, fits.

    The response always follows the noiseless centrality; the fit uses the
    centrality of the observed (possibly perturbed) matrix.
    """

    record = ReplicationRecord(n_nodes=n_nodes, rep_index=rep_index)
    seed = (config.master_seed, n_nodes, rep_index)
    L = config.n_layers
    try:
        labels = balanced_labels(n_nodes, config.n_communities)
        probs, dists = _layer_design(config.experiment, L)
        layers = build_multiplex_layers(labels, probs, dists, stream(seed, _LAYERS))
        B0 = assemble_supra(make_multiplex(layers))
        truth = eigenvector_centrality(B0, n_nodes, L, 1.0)
        observed = truth
        if config.experiment.noisy:
            noise = NoiseSpec(config.sigma_b, config.noise_structure, stream(seed, _NOISE))
            B, _ = perturb(B0, noise, n_nodes=n_nodes)
            observed = eigenvector_centrality(B, n_nodes, L, 1.0, check_nonnegative=False)
        record.gap = truth.gap

        X = sample_covariates(n_nodes, config.n_covariates, stream(seed, _COVARIATES))
        response_seed = stream(seed, _RESPONSE)
        for rule in config.a_n_rules:
            a_n = rule.evaluate(n_nodes, L)
            C = a_n * truth.V
            C_hat = a_n * observed.V
            record.a_n_over_gap[rule.label] = a_n / truth.gap
            record.estimates[rule.label] = _fit_rule(
                config, record, rule.label, labels, X, C, C_hat, response_seed
            )
    except (NumericalError, DegenerateRange) as exc:
        record.error = f"{type(exc).__name__}: {exc}"
        logger.debug("replication N=%s rep=%s failed: %s", n_nodes, rep_index, record.error)
    return record


def _fit_rule(
    config: ExperimentConfig,
    record: ReplicationRecord,
    label: str,
    labels: CommunityStructure,
    X: np.ndarray,
    C: np.ndarray,
    C_hat: np.ndarray,
    response_seed,
) -> Dict[str, float]:
    beta = config.true_beta
    experiment = config.experiment
    if experiment in (ExperimentKind.CCMNETR_NOISELESS, ExperimentKind.CCMNETR_NOISY):
        _, Z = community_centrality(C, labels)
        _, Z_hat = community_centrality(C_hat, labels)
        y = sample_response(X, Z, beta.beta_x, [beta.beta_z], config.sigma_y, response_seed)
        fit = fit_ccmnetr(X, Z_hat, y, beta_z_null=beta.beta_z)
        if fit.z_stat_z is not None:
            record.z_stats[label] = fit.z_stat_z
        return _prefixed("", fit.column_names, fit.coefficients)

    if experiment in (ExperimentKind.CMNETR_NOISELESS, ExperimentKind.CMNETR_NOISY):
        y = sample_response(X, C, beta.beta_x, beta.beta_c, config.sigma_y, response_seed)
        fit = fit_cmnetr(X, C_hat, y)
        return _prefixed("", fit.column_names, fit.coefficients)

    # RCFE comparison: all three models on the same draw, noiseless network
    S = labels.S
    net = np.hstack([C, S])
    y_c = sample_response(X, net, beta.beta_x, [*beta.beta_c, *beta.beta_s], config.sigma_y, response_seed)
    _, Z = community_centrality(C, labels)
    y_z = sample_response(X, Z, beta.beta_x, [beta.beta_z], config.sigma_y, response_seed)
    rcfe = fit_rcfe(X, C, S, y_c)
    cmnetr = fit_cmnetr(X, C, y_c)
    ccmnetr = fit_ccmnetr(X, Z, y_z, beta_z_null=beta.beta_z)
    if ccmnetr.z_stat_z is not None:
        record.z_stats[label] = ccmnetr.z_stat_z
    return {
        **_prefixed("rcfe:", rcfe.column_names, rcfe.coefficients),
        **_prefixed("cmnetr:", cmnetr.column_names, cmnetr.coefficients),
        **_prefixed("ccmnetr:", ccmnetr.column_names, ccmnetr.coefficients),
    }


def qq_data(estimates: Sequence[float], center: float, scale: float) -> QQData:
    """Sorted standardised estimates against normal quantiles at ``(i - 0.5)/n``."""

    values = np.asarray(estimates, dtype=np.float64).reshape(-1)
    if values.shape[0] < 10:
        raise InsufficientData(f"QQ data needs at least 10 estimates, got {values.shape[0]}")
    if not scale > 0 or not math.isfinite(scale):
        raise InsufficientData(f"QQ data needs a positive scale, got {scale}")
    n = values.shape[0]
    sample = np.sort((values - center) / scale)
    theoretical = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    return QQData(sample=sample, theoretical=theoretical)


def _summarise(name: str, truth: float, values: np.ndarray) -> CoefficientSummary:
    count = values.shape[0]
    mean = float(values.mean())
    sd = float(values.std(ddof=1)) if count > 1 else 0.0
    mse = float(np.mean((values - truth) ** 2))
    return CoefficientSummary(
        name=name,
        true_value=truth,
        mean=mean,
        sd=sd,
        mse=mse,
        count=count,
        single_replication=count == 1,
    )


def _run_all(config: ExperimentConfig, tasks: List[Tuple[int, int]]) -> List[ReplicationRecord]:
    threads = config.threads or get_thread_count()
    progress = tqdm(
        total=len(tasks),
        desc=config.experiment.value,
        disable=not progress_enabled(),
        file=sys.stderr,
    )
    records: List[ReplicationRecord] = []
    with progress:
        if threads <= 1:
            for n_nodes, rep_index in tasks:
                records.append(run_replication(config, n_nodes, rep_index))
                progress.update(1)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = [pool.submit(run_replication, config, n, rep) for n, rep in tasks]
                for future in futures:
                    records.append(future.result())
                    progress.update(1)
    records.sort(key=lambda record: record.key)
    return records


def run_experiment(config: ExperimentConfig) -> SimulationReport:
    """Run every ``(N, rep)`` replication and aggregate per ``(a_N, N)`` cell."""

    if config.experiment is ExperimentKind.SIGMA_MIN_STUDY:
        raise ValueError("use sigma_min_study for the singular-value experiment")

    started = time.perf_counter()
    tasks = [(n, rep) for n in config.n_values for rep in range(config.n_reps)]
    logger.info(
        "Running %s: N=%s reps=%s a_N=%s",
        config.experiment.value,
        list(config.n_values),
        config.n_reps,
        [rule.label for rule in config.a_n_rules],
    )
    records = _run_all(config, tasks)
    if all(record.error is not None for record in records):
        raise AllReplicationsFailed(f"all {len(records)} replications failed; first error: {records[0].error}")

    truth = true_values(config)
    cells: List[CellSummary] = []
    for rule in config.a_n_rules:
        for n_nodes in config.n_values:
            cells.append(_aggregate_cell(rule.label, n_nodes, truth, records))

    report = SimulationReport(config=config, cells=cells, wall_time_s=time.perf_counter() - started)
    failed = sum(1 for record in records if record.error is not None)
    if failed:
        logger.warning("%s of %s replications failed and were excluded", failed, len(records))
    logger.info("Finished %s in %.1fs", config.experiment.value, report.wall_time_s)
    return report


def _aggregate_cell(
    label: str,
    n_nodes: int,
    truth: Dict[str, float],
    records: Sequence[ReplicationRecord],
) -> CellSummary:
    in_cell = [record for record in records if record.n_nodes == n_nodes]
    succeeded = [record for record in in_cell if record.error is None]
    failures = Counter(record.error.split(":", 1)[0] for record in in_cell if record.error is not None)
    cell = CellSummary(
        a_n=label,
        n_nodes=n_nodes,
        n_success=len(succeeded),
        n_failed=len(in_cell) - len(succeeded),
        failures=dict(failures),
        a_n_over_gap=None,
    )
    if not succeeded:
        return cell

    cell.a_n_over_gap = float(np.mean([record.a_n_over_gap[label] for record in succeeded]))
    for name, true_value in truth.items():
        values = np.array([record.estimates[label][name] for record in succeeded])
        summary = _summarise(name, true_value, values)
        cell.coefficients[name] = summary
        if summary.count >= 10 and summary.sd > 0:
            cell.qq[name] = qq_data(values, summary.mean, summary.sd)

    z_values = np.array([record.z_stats[label] for record in succeeded if label in record.z_stats])
    if z_values.shape[0] >= 10:
        z_qq = qq_data(z_values, 0.0, 1.0)
        cell.qq["z_stat"] = z_qq
        cell.z_stat_summary = {
            "count": int(z_values.shape[0]),
            "mean": float(z_values.mean()),
            "sd": float(z_values.std(ddof=1)),
            "ks_p_value": float(stats.kstest(z_values, "norm").pvalue),
            "qq_correlation": z_qq.correlation(),
        }
    return cell


def mse_curves(report: SimulationReport) -> List[dict]:
    """Rows for the MSE-versus-N plots, one per ``(a_N, N, coefficient)``."""

    rows = []
    for cell in report.cells:
        for name, summary in sorted(cell.coefficients.items()):
            rows.append(
                {
                    "a_n": cell.a_n,
                    "n_nodes": cell.n_nodes,
                    "coefficient": name,
                    "mean": summary.mean,
                    "sd": summary.sd,
                    "mse": summary.mse,
                }
            )
    return rows


def qq_rows(report: SimulationReport) -> List[dict]:
    rows = []
    for cell in report.cells:
        for name, qq in sorted(cell.qq.items()):
            for sample, theoretical in zip(qq.sample.tolist(), qq.theoretical.tolist()):
                rows.append(
                    {
                        "a_n": cell.a_n,
                        "n_nodes": cell.n_nodes,
                        "coefficient": name,
                        "theoretical": theoretical,
                        "sample": sample,
                    }
                )
    return rows


def sigma_min_study(config: ExperimentConfig) -> List[SigmaMinRow]:
    """``sigma_min((I - P_X) V)`` per N for identical and differing layer probabilities."""

    variants = {
        "identical": [BASE_CONN_PROB] * config.n_layers,
        "different": [BASE_CONN_PROB] + [ALT_CONN_PROB] * (config.n_layers - 1),
    }
    dists = [WeightDist.UNIFORM_1_2] * config.n_layers
    rows: List[SigmaMinRow] = []
    for n_nodes in config.n_values:
        labels = balanced_labels(n_nodes, config.n_communities)
        X = sample_covariates(n_nodes, config.n_covariates, (config.master_seed, n_nodes, 0, _COVARIATES))
        for variant_index, (variant, probs) in enumerate(variants.items()):
            layers = build_multiplex_layers(
                labels, probs, dists, (config.master_seed, n_nodes, 0, _LAYERS, variant_index)
            )
            bundle = eigenvector_centrality(assemble_supra(make_multiplex(layers)), n_nodes, config.n_layers, 1.0)
            rows.append(SigmaMinRow(n_nodes, variant, smallest_singular_value_residual(X, bundle.V)))
            logger.info("sigma_min N=%s variant=%s value=%.4g", n_nodes, variant, rows[-1].sigma_min)
    return rows


def perturbation_bound_study(
    config: ExperimentConfig,
    n_trials: int = 100,
    n_nodes: Optional[int] = None,
) -> List[PerturbationRecord]:
    """Eigenvector error against ``||E0||_2 / delta`` over seeded perturbations."""

    n_nodes = n_nodes or config.n_values[0]
    labels = balanced_labels(n_nodes, config.n_communities)
    probs, dists = _layer_design(config.experiment, config.n_layers)
    records: List[PerturbationRecord] = []
    for trial in range(n_trials):
        seed = (config.master_seed, n_nodes, trial)
        layers = build_multiplex_layers(labels, probs, dists, stream(seed, _LAYERS))
        B0 = assemble_supra(make_multiplex(layers))
        lead = leading_eigenpair(B0)
        gap = lead.value - second_eigenvalue(B0, lead)
        B, E0 = perturb(B0, NoiseSpec(config.sigma_b, config.noise_structure, stream(seed, _NOISE)), n_nodes=n_nodes)
        observed = leading_eigenpair(B)
        records.append(
            PerturbationRecord(
                trial=trial,
                eigvec_error=float(np.linalg.norm(observed.vector - lead.vector)),
                noise_norm=spectral_norm(E0),
                gap=gap,
            )
        )
    return records
