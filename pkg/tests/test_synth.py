from __future__ import annotations

import unittest

import numpy as np

from mlnetreg.exceptions import DataError, DegenerateRange, DimensionMismatch
from mlnetreg.rng import make_rng, stream
from mlnetreg.synth import (
    BASE_CONN_PROB,
    SbmSpec,
    WeightDist,
    balanced_labels,
    build_multiplex_layers,
    rescale_to_unit_band,
    sample_covariates,
    sample_response,
    sample_sbm_layer,
)


class RngTests(unittest.TestCase):
    def test_streams_are_reproducible_and_distinct(self) -> None:
        first = make_rng((7, 100, 3)).random(5)
        np.testing.assert_array_equal(first, make_rng((7, 100, 3)).random(5))
        self.assertFalse(np.array_equal(first, make_rng((7, 100, 4)).random(5)))
        self.assertEqual(stream(7, 1, 2), (7, 1, 2))
        self.assertEqual(stream((7, 1), 2), (7, 1, 2))
        generator = make_rng(3)
        self.assertIs(make_rng(generator), generator)
        with self.assertRaises(TypeError):
            stream(generator, 1)


class LabelTests(unittest.TestCase):
    def test_balanced_sizes(self) -> None:
        np.testing.assert_array_equal(balanced_labels(9, 3).sizes, [3, 3, 3])
        np.testing.assert_array_equal(balanced_labels(10, 3).sizes, [4, 3, 3])
        labels = balanced_labels(100, 3)
        np.testing.assert_array_equal(labels.sizes, [34, 33, 33])
        self.assertAlmostEqual(labels.min_share(), 0.33)
        np.testing.assert_array_equal(labels.labels[:5], [1, 1, 1, 1, 1])
        with self.assertRaises(ValueError):
            balanced_labels(2, 3)


class SbmTests(unittest.TestCase):
    def _spec(self, n: int, probs, dist=WeightDist.UNIFORM_1_2, seed=0) -> SbmSpec:
        return SbmSpec(n_nodes=n, labels=balanced_labels(n, 3), conn_prob=np.asarray(probs, dtype=float), weight_dist=dist, seed=seed)

    def test_complete_uniform_layer(self) -> None:
        layer = sample_sbm_layer(self._spec(12, np.ones((3, 3))))
        off_diagonal = layer[~np.eye(12, dtype=bool)]
        self.assertTrue(((off_diagonal >= 1.0) & (off_diagonal <= 2.0)).all())
        self.assertFalse(np.diag(layer).any())
        np.testing.assert_array_equal(layer, layer.T)

    def test_empty_layer(self) -> None:
        layer = sample_sbm_layer(self._spec(12, np.zeros((3, 3))))
        self.assertFalse(layer.any())

    def test_block_densities(self) -> None:
        n = 300
        spec = self._spec(n, BASE_CONN_PROB, seed=(5, 0))
        layer = sample_sbm_layer(spec)
        labels = spec.labels.labels
        edges = layer > 0
        same = np.equal.outer(labels, labels) & ~np.eye(n, dtype=bool)
        different = ~np.equal.outer(labels, labels)
        self.assertAlmostEqual(edges[same].mean(), 0.8, delta=0.02)
        self.assertAlmostEqual(edges[different].mean(), 0.1, delta=0.02)

    def test_exponential_weights_are_rescaled(self) -> None:
        layer = sample_sbm_layer(self._spec(40, BASE_CONN_PROB, WeightDist.EXP_RESCALED, seed=9))
        weights = layer[layer > 0]
        self.assertEqual(weights.min(), 1.0)
        self.assertEqual(weights.max(), 2.0)
        np.testing.assert_array_equal(layer, layer.T)

    def test_deterministic_per_seed(self) -> None:
        first = sample_sbm_layer(self._spec(30, BASE_CONN_PROB, seed=(1, 2)))
        np.testing.assert_array_equal(first, sample_sbm_layer(self._spec(30, BASE_CONN_PROB, seed=(1, 2))))
        self.assertFalse(np.array_equal(first, sample_sbm_layer(self._spec(30, BASE_CONN_PROB, seed=(1, 3)))))

    def test_spec_validation(self) -> None:
        with self.assertRaises(DataError):
            self._spec(12, np.full((3, 3), 1.5))
        with self.assertRaises(DataError):
            self._spec(12, [[0.5, 0.1, 0.1], [0.2, 0.5, 0.1], [0.1, 0.1, 0.5]])
        with self.assertRaises(DimensionMismatch):
            self._spec(12, np.ones((2, 2)))

    def test_multiplex_layers_use_separate_streams(self) -> None:
        labels = balanced_labels(30, 3)
        layers = build_multiplex_layers(
            labels,
            [BASE_CONN_PROB, BASE_CONN_PROB],
            [WeightDist.UNIFORM_1_2, WeightDist.EXP_RESCALED],
            (4, 30, 0),
        )
        self.assertEqual(len(layers), 2)
        self.assertFalse(np.array_equal(layers[0] > 0, layers[1] > 0))
        with self.assertRaises(DimensionMismatch):
            build_multiplex_layers(labels, [BASE_CONN_PROB], [WeightDist.UNIFORM_1_2, WeightDist.UNIFORM_1_2], 0)


class RescaleTests(unittest.TestCase):
    def test_endpoints_and_zeros(self) -> None:
        A = np.array([[0.0, 3.0, 5.0], [3.0, 0.0, 4.0], [5.0, 4.0, 0.0]])
        rescaled = rescale_to_unit_band(A)
        np.testing.assert_allclose(rescaled, [[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]])

    def test_monotone_on_exponential_sample(self) -> None:
        values = make_rng(11).exponential(1.0, 50)
        rescaled = rescale_to_unit_band(values.reshape(5, 10)).reshape(-1)
        self.assertTrue(((rescaled >= 1.0) & (rescaled <= 2.0)).all())
        np.testing.assert_array_equal(np.argsort(rescaled, kind="stable"), np.argsort(values, kind="stable"))

    def test_degenerate_ranges(self) -> None:
        with self.assertRaises(DegenerateRange):
            rescale_to_unit_band(np.zeros((3, 3)))
        with self.assertRaises(DegenerateRange):
            rescale_to_unit_band(np.ones((3, 3)) - np.eye(3))


class CovariateAndResponseTests(unittest.TestCase):
    def test_covariate_moments(self) -> None:
        X = sample_covariates(5000, 2, (1, 2))
        self.assertEqual(X.shape, (5000, 2))
        self.assertAlmostEqual(X.mean(), 0.0, delta=0.05)
        self.assertAlmostEqual(X.var(), 1.0, delta=0.05)
        np.testing.assert_array_equal(X, sample_covariates(5000, 2, (1, 2)))
        self.assertFalse(np.array_equal(X, sample_covariates(5000, 2, (1, 3))))

    def test_noiseless_response(self) -> None:
        X = sample_covariates(20, 2, 0)
        net = np.linspace(0.0, 1.0, 20).reshape(-1, 1)
        y = sample_response(X, net, [1.0, 2.0], [2.0], 0.0, 1)
        np.testing.assert_allclose(y, X @ [1.0, 2.0] + 2.0 * net[:, 0])

    def test_pure_noise_response(self) -> None:
        y = sample_response(np.zeros((4000, 0)), np.zeros((4000, 1)), [], [0.0], 1.5, 3)
        self.assertAlmostEqual(y.var(ddof=1), 2.25, delta=0.15)
        np.testing.assert_array_equal(y, sample_response(np.zeros((4000, 0)), np.zeros((4000, 1)), [], [0.0], 1.5, 3))

    def test_dimension_mismatch(self) -> None:
        with self.assertRaises(DimensionMismatch):
            sample_response(np.zeros((5, 2)), np.zeros((5, 1)), [1.0], [1.0], 1.0, 0)


if __name__ == "__main__":
    unittest.main()
