from __future__ import annotations

import math
import unittest
from unittest import mock

import numpy as np

from mlnetreg import simulation
from mlnetreg.centrality import eigenvector_centrality
from mlnetreg.exceptions import AllReplicationsFailed, InsufficientData, SpectralGapTooSmall
from mlnetreg.simulation import (
    ANRule,
    ExperimentConfig,
    ExperimentKind,
    TrueCoefficients,
    full_scale,
    mse_curves,
    perturbation_bound_study,
    qq_data,
    qq_rows,
    run_experiment,
    run_replication,
    sigma_min_study,
    true_values,
)


class ANRuleTests(unittest.TestCase):
    def test_parse_and_evaluate(self) -> None:
        self.assertEqual(ANRule.parse("sqrt").evaluate(100, 2), 10.0)
        self.assertAlmostEqual(ANRule.parse("pow:0.8").evaluate(100, 2), 100 ** 0.8)
        self.assertEqual(ANRule.parse("linear").evaluate(100, 2), 100.0)
        self.assertAlmostEqual(ANRule.parse("sqrt-nl").evaluate(50, 2), 10.0)
        self.assertEqual(ANRule.parse(" FIXED:3 ").evaluate(100, 2), 3.0)

    def test_labels(self) -> None:
        labels = [ANRule.parse(text).label for text in ("sqrt", "pow:0.8", "linear", "sqrt-nl", "fixed:2.5")]
        self.assertEqual(labels, ["N^0.5", "N^0.8", "N", "(NL)^0.5", "2.5"])

    def test_rejects_bad_rules(self) -> None:
        for text in ("cube", "pow", "pow:abc", "sqrt:2", "fixed:0", "fixed:-1"):
            with self.subTest(text=text), self.assertRaises(ValueError):
                ANRule.parse(text)


class ConfigTests(unittest.TestCase):
    def test_validation(self) -> None:
        with self.assertRaises(ValueError):
            ExperimentConfig(ExperimentKind.CMNETR_NOISELESS, n_values=(4,))
        with self.assertRaises(ValueError):
            ExperimentConfig(ExperimentKind.CMNETR_NOISELESS, n_reps=0)
        with self.assertRaises(ValueError):
            ExperimentConfig(ExperimentKind.CMNETR_NOISELESS, n_layers=3)
        with self.assertRaises(ValueError):
            ExperimentConfig(ExperimentKind.CMNETR_NOISY, sigma_b=-1.0)
        with self.assertRaises(ValueError):
            ExperimentConfig(ExperimentKind.CMNETR_NOISELESS, sigma_y=-0.5)
        with self.assertRaises(ValueError):
            ExperimentConfig(ExperimentKind.RCFE_COMPARISON, n_values=(7,))
        with self.assertRaises(ValueError):
            ExperimentConfig(
                ExperimentKind.RCFE_COMPARISON,
                true_beta=TrueCoefficients(beta_s=(0.0, 0.0)),
            )

    def test_full_scale_and_dict(self) -> None:
        config = full_scale(ExperimentConfig(ExperimentKind.CCMNETR_NOISY, threads=4))
        self.assertEqual(config.n_values, (100, 200, 500, 1000))
        self.assertEqual(config.n_reps, 1000)
        payload = config.as_dict()
        self.assertEqual(payload["experiment"], "ccmnetr-noisy")
        self.assertEqual(payload["a_n_rules"], ["N^0.5"])
        self.assertEqual(payload["noise_structure"], "full")
        self.assertNotIn("threads", payload)

    def test_true_values(self) -> None:
        self.assertEqual(
            true_values(ExperimentConfig(ExperimentKind.CMNETR_NOISY)),
            {"x1": 1.0, "x2": 2.0, "c1": 1.0, "c2": 2.0},
        )
        self.assertEqual(
            true_values(ExperimentConfig(ExperimentKind.CCMNETR_NOISELESS)),
            {"x1": 1.0, "x2": 2.0, "z": 2.0},
        )
        rcfe = true_values(ExperimentConfig(ExperimentKind.RCFE_COMPARISON))
        self.assertEqual(rcfe["rcfe:s3"], 0.0)
        self.assertEqual(rcfe["ccmnetr:z"], 2.0)
        self.assertEqual(len(rcfe), 7 + 4 + 3)


class ReplicationTests(unittest.TestCase):
    def test_deterministic(self) -> None:
        config = ExperimentConfig(ExperimentKind.CMNETR_NOISY, n_values=(30,), n_reps=1, master_seed=3)
        first = run_replication(config, 30, 0)
        second = run_replication(config, 30, 0)
        self.assertIsNone(first.error)
        self.assertEqual(first.estimates, second.estimates)
        self.assertNotEqual(first.estimates, run_replication(config, 30, 1).estimates)

    def test_exact_recovery_without_response_noise(self) -> None:
        cases = [
            (ExperimentKind.CCMNETR_NOISELESS, 0.25, {"x1": 1.0, "x2": 2.0, "z": 2.0}),
            (ExperimentKind.CMNETR_NOISELESS, 0.25, {"x1": 1.0, "x2": 2.0, "c1": 1.0, "c2": 2.0}),
            (ExperimentKind.CMNETR_NOISY, 0.0, {"x1": 1.0, "x2": 2.0, "c1": 1.0, "c2": 2.0}),
        ]
        for kind, sigma_b, expected in cases:
            with self.subTest(kind=kind):
                config = ExperimentConfig(kind, n_values=(60,), n_reps=1, sigma_b=sigma_b, sigma_y=0.0)
                record = run_replication(config, 60, 0)
                self.assertIsNone(record.error)
                estimates = record.estimates["N^0.5"]
                self.assertEqual(set(estimates), set(expected))
                for name, value in expected.items():
                    self.assertAlmostEqual(estimates[name], value, delta=1e-6)

    def test_rcfe_estimates_cover_every_model(self) -> None:
        config = ExperimentConfig(ExperimentKind.RCFE_COMPARISON, n_values=(30,), n_reps=1)
        record = run_replication(config, 30, 0)
        self.assertIsNone(record.error)
        self.assertEqual(set(record.estimates["N^0.5"]), set(true_values(config)))
        self.assertIn("N^0.5", record.z_stats)

    def test_every_rule_shares_the_draw(self) -> None:
        config = ExperimentConfig(
            ExperimentKind.CMNETR_NOISELESS,
            n_values=(30,),
            a_n_rules=(ANRule("sqrt"), ANRule("linear")),
            n_reps=1,
            sigma_y=0.0,
        )
        record = run_replication(config, 30, 0)
        self.assertEqual(set(record.estimates), {"N^0.5", "N"})
        self.assertAlmostEqual(record.a_n_over_gap["N"] / record.a_n_over_gap["N^0.5"], math.sqrt(30))
        self.assertAlmostEqual(record.estimates["N"]["x1"], record.estimates["N^0.5"]["x1"], delta=1e-6)

    def test_noisy_replications_at_realistic_size(self) -> None:
        for kind in (ExperimentKind.CMNETR_NOISY, ExperimentKind.CCMNETR_NOISY):
            config = ExperimentConfig(kind, n_values=(150,), n_reps=2, master_seed=11)
            for rep_index in range(2):
                with self.subTest(kind=kind, rep=rep_index):
                    record = run_replication(config, 150, rep_index)
                    self.assertIsNone(record.error)
                    self.assertEqual(set(record.estimates["N^0.5"]), set(true_values(config)))
                    self.assertGreater(record.gap, 0.0)

    def test_numerical_failure_is_recorded(self) -> None:
        config = ExperimentConfig(ExperimentKind.CMNETR_NOISELESS, n_values=(30,), n_reps=1)
        with mock.patch.object(simulation, "eigenvector_centrality", side_effect=SpectralGapTooSmall("gap 0")):
            record = run_replication(config, 30, 0)
        self.assertEqual(record.error, "SpectralGapTooSmall: gap 0")
        self.assertEqual(record.estimates, {})


class ExperimentTests(unittest.TestCase):
    def _config(self, **overrides) -> ExperimentConfig:
        settings = dict(n_values=(24, 30), n_reps=12, master_seed=5, threads=1)
        settings.update(overrides)
        return ExperimentConfig(ExperimentKind.CCMNETR_NOISELESS, **settings)

    def test_report_structure_and_mse_identity(self) -> None:
        report = run_experiment(self._config())
        self.assertEqual([(cell.a_n, cell.n_nodes) for cell in report.cells], [("N^0.5", 24), ("N^0.5", 30)])
        cell = report.cell("N^0.5", 30)
        self.assertEqual((cell.n_success, cell.n_failed), (12, 0))
        self.assertGreater(cell.a_n_over_gap, 0.0)
        for summary in cell.coefficients.values():
            n = summary.count
            expected = summary.sd ** 2 * (n - 1) / n + summary.bias ** 2
            self.assertAlmostEqual(summary.mse, expected, delta=1e-9 * max(1.0, expected))
        self.assertIn("x1", cell.qq)
        self.assertEqual(cell.z_stat_summary["count"], 12)
        self.assertEqual(report.as_dict()["schema_version"], 1)
        self.assertNotIn("wall_time_s", report.as_dict())
        self.assertEqual(len(mse_curves(report)), 2 * 3)
        self.assertEqual(len(qq_rows(report)), sum(12 * len(cell.qq) for cell in report.cells))
        with self.assertRaises(KeyError):
            report.cell("N", 30)

    def test_covariate_estimates_look_normal(self) -> None:
        config = ExperimentConfig(ExperimentKind.CMNETR_NOISELESS, n_values=(60,), n_reps=80, master_seed=2)
        cell = run_experiment(config).cell("N^0.5", 60)
        self.assertGreaterEqual(cell.n_success, 70)
        for name, truth in (("x1", 1.0), ("x2", 2.0)):
            self.assertGreater(cell.qq[name].correlation(), 0.95)
            self.assertAlmostEqual(cell.coefficients[name].mean, truth, delta=0.1)

    def test_thread_count_does_not_change_results(self) -> None:
        serial = run_experiment(self._config(threads=1))
        parallel = run_experiment(self._config(threads=3))
        self.assertEqual(mse_curves(serial), mse_curves(parallel))
        self.assertEqual(serial.as_dict(), parallel.as_dict())

    def test_single_replication_is_flagged(self) -> None:
        report = run_experiment(self._config(n_values=(24,), n_reps=1))
        summary = report.cells[0].coefficients["z"]
        self.assertTrue(summary.single_replication)
        self.assertEqual(summary.sd, 0.0)
        self.assertEqual(report.cells[0].qq, {})
        self.assertIsNone(report.cells[0].z_stat_summary)

    def test_all_failures_raise(self) -> None:
        with mock.patch.object(simulation, "eigenvector_centrality", side_effect=SpectralGapTooSmall("gap 0")):
            with self.assertRaises(AllReplicationsFailed):
                run_experiment(self._config(n_reps=3))

    def test_partial_failures_are_counted(self) -> None:
        calls = {"count": 0}

        def flaky(*args, **kwargs):
            calls["count"] += 1
            if calls["count"] % 3 == 1:
                raise SpectralGapTooSmall("gap 0")
            return eigenvector_centrality(*args, **kwargs)

        with mock.patch.object(simulation, "eigenvector_centrality", side_effect=flaky):
            report = run_experiment(self._config(n_values=(24,), n_reps=12))
        cell = report.cells[0]
        self.assertEqual((cell.n_success, cell.n_failed), (8, 4))
        self.assertEqual(cell.failures, {"SpectralGapTooSmall": 4})
        self.assertEqual(cell.coefficients["x1"].count, 8)

    def test_sigma_min_kind_is_not_a_replication_experiment(self) -> None:
        with self.assertRaises(ValueError):
            run_experiment(ExperimentConfig(ExperimentKind.SIGMA_MIN_STUDY, n_values=(24,), n_reps=1))


class QQTests(unittest.TestCase):
    def test_quantiles(self) -> None:
        qq = qq_data(np.arange(10.0), 4.5, 1.0)
        np.testing.assert_allclose(qq.sample, np.arange(10.0) - 4.5)
        self.assertAlmostEqual(qq.theoretical.sum(), 0.0, places=12)
        self.assertAlmostEqual(qq.theoretical[0], -qq.theoretical[-1], places=12)
        self.assertGreater(qq.correlation(), 0.95)

    def test_insufficient_data(self) -> None:
        with self.assertRaises(InsufficientData):
            qq_data(np.arange(9.0), 0.0, 1.0)
        with self.assertRaises(InsufficientData):
            qq_data(np.arange(10.0), 0.0, 0.0)


class StudyTests(unittest.TestCase):
    def test_sigma_min_rows(self) -> None:
        config = ExperimentConfig(ExperimentKind.SIGMA_MIN_STUDY, n_values=(30, 60), n_reps=1)
        rows = sigma_min_study(config)
        self.assertEqual([(row.n_nodes, row.variant) for row in rows], [
            (30, "identical"), (30, "different"), (60, "identical"), (60, "different"),
        ])
        for row in rows:
            self.assertGreater(row.sigma_min, 0.0)
            self.assertAlmostEqual(row.scaled, row.sigma_min * math.sqrt(row.n_nodes))
        self.assertEqual([row.sigma_min for row in rows], [row.sigma_min for row in sigma_min_study(config)])

    def test_perturbation_stays_within_bound(self) -> None:
        config = ExperimentConfig(ExperimentKind.CMNETR_NOISY, n_values=(30,), n_reps=1)
        records = perturbation_bound_study(config, n_trials=5)
        self.assertEqual([record.trial for record in records], list(range(5)))
        for record in records:
            self.assertGreater(record.gap, 0.0)
            self.assertGreater(record.noise_norm, 0.0)
            self.assertLessEqual(record.eigvec_error, record.bound)
            self.assertEqual(record.as_dict()["bound"], record.bound)


if __name__ == "__main__":
    unittest.main()
