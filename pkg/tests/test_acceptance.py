"""Monte Carlo reproduction checks.

These take minutes and are skipped unless ``MLNETREG_SLOW_TESTS=1``.
"""

from __future__ import annotations

import os
import unittest

import numpy as np

from mlnetreg.fixtures import COLLINEAR_NAMES, build_synthetic_io_bundle
from mlnetreg.ingest import dumps_report
from mlnetreg.simulation import (
    ANRule,
    ExperimentConfig,
    ExperimentKind,
    perturbation_bound_study,
    run_experiment,
    sigma_min_study,
)
from mlnetreg.wiod import wiod_pipeline

SLOW = os.getenv("MLNETREG_SLOW_TESTS") == "1"


@unittest.skipUnless(SLOW, "set MLNETREG_SLOW_TESTS=1 to run Monte Carlo checks")
class MonteCarloAcceptanceTests(unittest.TestCase):
    def test_noiseless_community_centrality(self) -> None:
        config = ExperimentConfig(ExperimentKind.CCMNETR_NOISELESS, n_values=(200,), n_reps=500, threads=4)
        cell = run_experiment(config).cell("N^0.5", 200)
        z = cell.coefficients["z"]
        self.assertAlmostEqual(z.mean, 2.0, delta=0.03)
        self.assertTrue(0.05 <= z.sd <= 0.15, z.sd)
        self.assertAlmostEqual(cell.coefficients["x1"].mean, 1.0, delta=0.02)
        self.assertAlmostEqual(cell.coefficients["x2"].mean, 2.0, delta=0.02)

        # z statistic against the standard normal
        self.assertGreater(cell.z_stat_summary["ks_p_value"], 0.01)
        self.assertGreater(cell.z_stat_summary["qq_correlation"], 0.99)

    def test_centrality_scaling_contrast(self) -> None:
        config = ExperimentConfig(
            ExperimentKind.CMNETR_NOISELESS,
            n_values=(100, 500),
            a_n_rules=(ANRule("sqrt"), ANRule("linear")),
            n_reps=300,
            threads=4,
        )
        report = run_experiment(config)
        for name in ("c1", "c2"):
            small = report.cell("N^0.5", 100).coefficients[name].sd
            large = report.cell("N^0.5", 500).coefficients[name].sd
            self.assertGreaterEqual(large, 0.8 * small)
            self.assertLessEqual(report.cell("N", 500).coefficients[name].sd, 0.07)

    def test_noisy_centrality_bias_persists(self) -> None:
        config = ExperimentConfig(ExperimentKind.CMNETR_NOISY, n_values=(500,), n_reps=300, threads=4)
        cell = run_experiment(config).cell("N^0.5", 500)
        self.assertGreater(cell.coefficients["c2"].mean, 3.0)
        self.assertAlmostEqual(cell.coefficients["x1"].mean, 1.0, delta=0.03)
        self.assertAlmostEqual(cell.coefficients["x2"].mean, 2.0, delta=0.03)
        # order of magnitude only
        self.assertTrue(0.033 < cell.a_n_over_gap < 3.3, cell.a_n_over_gap)

    def test_noisy_community_centrality(self) -> None:
        config = ExperimentConfig(ExperimentKind.CCMNETR_NOISY, n_values=(500,), n_reps=300, threads=4)
        z = run_experiment(config).cell("N^0.5", 500).coefficients["z"]
        self.assertAlmostEqual(z.mean, 2.0, delta=0.05)
        self.assertLessEqual(z.sd, 0.15)

    def test_community_fixed_effects_do_not_concentrate(self) -> None:
        config = ExperimentConfig(
            ExperimentKind.RCFE_COMPARISON,
            n_values=(100, 500),
            a_n_rules=(ANRule("linear"),),
            n_reps=200,
            threads=4,
        )
        report = run_experiment(config)
        for name in ("rcfe:s1", "rcfe:s2", "rcfe:s3"):
            small = report.cell("N", 100).coefficients[name].sd
            large = report.cell("N", 500).coefficients[name].sd
            self.assertGreaterEqual(large, 0.7 * small, name)
        z_small = report.cell("N", 100).coefficients["ccmnetr:z"].sd
        z_large = report.cell("N", 500).coefficients["ccmnetr:z"].sd
        self.assertLess(z_large, z_small)

    def test_sigma_min_order(self) -> None:
        config = ExperimentConfig(ExperimentKind.SIGMA_MIN_STUDY, n_values=(100, 200, 500), n_reps=1)
        scaled = [row.scaled for row in sigma_min_study(config) if row.variant == "identical"]
        self.assertLess(max(scaled) / min(scaled), 2.0)

    def test_perturbation_bound(self) -> None:
        config = ExperimentConfig(ExperimentKind.CMNETR_NOISY, n_values=(50,), n_reps=1)
        records = perturbation_bound_study(config, n_trials=100, n_nodes=50)
        self.assertTrue(all(record.eigvec_error <= record.bound for record in records))

    def test_full_size_io_fixture(self) -> None:
        bundle = build_synthetic_io_bundle()
        self.assertEqual((bundle.n_nodes, bundle.n_layers), (56, 43))
        result = wiod_pipeline(bundle)
        self.assertEqual(set(result.dropped), set(COLLINEAR_NAMES))
        self.assertGreater(result.f_test.f_stat, 0.0)

    def test_parallel_reports_are_identical(self) -> None:
        config = dict(n_values=(100, 200), n_reps=50, master_seed=99)
        serial = run_experiment(ExperimentConfig(ExperimentKind.RCFE_COMPARISON, threads=1, **config))
        parallel = run_experiment(ExperimentConfig(ExperimentKind.RCFE_COMPARISON, threads=8, **config))
        self.assertEqual(dumps_report(serial.as_dict()), dumps_report(parallel.as_dict()))


if __name__ == "__main__":
    unittest.main()
