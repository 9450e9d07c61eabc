from __future__ import annotations

import unittest

import numpy as np

from mlnetreg.exceptions import AsymmetricInput, DataError, DimensionMismatch
from mlnetreg.network import (
    MultilayerNetwork,
    NoiseSpec,
    NoiseStructure,
    assemble_supra,
    block_diagonal_permutation,
    extract_block,
    make_multiplex,
    perturb,
)


def _random_layer(rng: np.random.Generator, n: int) -> np.ndarray:
    upper = np.triu(rng.random((n, n)), 1)
    return upper + upper.T


class SupraAssemblyTests(unittest.TestCase):
    def test_multiplex_supra_layout(self) -> None:
        A1 = np.array([[0.0, 1.0], [1.0, 0.0]])
        A2 = np.array([[0.0, 2.0], [2.0, 0.0]])
        supra = assemble_supra(make_multiplex([A1, A2]))
        expected = np.array(
            [
                [0.0, 1.0, 1.0, 0.0],
                [1.0, 0.0, 0.0, 1.0],
                [1.0, 0.0, 0.0, 2.0],
                [0.0, 1.0, 2.0, 0.0],
            ]
        )
        np.testing.assert_array_equal(supra, expected)

    def test_interlayer_block_is_mirrored(self) -> None:
        coupling = np.array([[0.5, 0.2], [0.0, 0.5]])
        net = MultilayerNetwork.from_arrays([np.zeros((2, 2)), np.zeros((2, 2))], {(0, 1): coupling})
        supra = assemble_supra(net)
        np.testing.assert_array_equal(extract_block(supra, 2, 0, 1), coupling)
        np.testing.assert_array_equal(extract_block(supra, 2, 1, 0), coupling.T)
        self.assertEqual(net.size, 4)

    def test_validation(self) -> None:
        with self.assertRaises(AsymmetricInput):
            MultilayerNetwork.from_arrays([np.array([[0.0, 1.0], [0.0, 0.0]])])
        with self.assertRaises(DataError):
            MultilayerNetwork.from_arrays([np.array([[0.0, -1.0], [-1.0, 0.0]])])
        with self.assertRaises(DimensionMismatch):
            MultilayerNetwork.from_arrays([np.zeros((2, 2)), np.zeros((2, 2))], {(1, 0): np.eye(2)})
        with self.assertRaises(DimensionMismatch):
            make_multiplex([np.zeros((2, 2)), np.zeros((3, 3))])

    def test_permutation_within_layers(self) -> None:
        rng = np.random.default_rng(4)
        layers = [_random_layer(rng, 5) for _ in range(3)]
        perm = rng.permutation(5)
        supra = assemble_supra(make_multiplex(layers))
        index = block_diagonal_permutation(perm, 3)
        permuted = assemble_supra(make_multiplex([layer[np.ix_(perm, perm)] for layer in layers]))
        np.testing.assert_array_equal(supra[np.ix_(index, index)], permuted)


class PerturbationTests(unittest.TestCase):
    def setUp(self) -> None:
        rng = np.random.default_rng(8)
        self.B0 = assemble_supra(make_multiplex([_random_layer(rng, 4), _random_layer(rng, 4)]))

    def test_zero_noise_is_identity(self) -> None:
        B, E0 = perturb(self.B0, NoiseSpec(0.0, seed=1))
        np.testing.assert_array_equal(B, self.B0)
        self.assertFalse(E0.any())

    def test_full_noise_is_symmetric_and_seeded(self) -> None:
        B, E0 = perturb(self.B0, NoiseSpec(0.25, seed=(3, 1)))
        np.testing.assert_array_equal(E0, E0.T)
        np.testing.assert_allclose(B - self.B0, E0)
        self.assertTrue((E0[:4, 4:] != 0).all())
        again, _ = perturb(self.B0, NoiseSpec(0.25, seed=(3, 1)))
        np.testing.assert_array_equal(B, again)
        other, _ = perturb(self.B0, NoiseSpec(0.25, seed=(3, 2)))
        self.assertFalse(np.array_equal(B, other))

    def test_block_noise_leaves_coupling_untouched(self) -> None:
        _, E0 = perturb(self.B0, NoiseSpec(0.25, NoiseStructure.BLOCK_DIAGONAL, seed=5), n_nodes=4)
        np.testing.assert_array_equal(E0, E0.T)
        self.assertFalse(E0[:4, 4:].any())
        self.assertTrue(E0[:4, :4].any())
        with self.assertRaises(DimensionMismatch):
            perturb(self.B0, NoiseSpec(0.25, NoiseStructure.BLOCK_DIAGONAL, seed=5))

    def test_negative_sigma_rejected(self) -> None:
        with self.assertRaises(ValueError):
            NoiseSpec(-0.1)


if __name__ == "__main__":
    unittest.main()
