"""Spectral decomposition, rank decisions, and pseudo-inverse behavior."""

import numpy as np
import pytest

from gmls import (
    DimensionMismatchError,
    IndefiniteInputError,
    NonFiniteError,
    NonSymmetricError,
    default_tolerance,
    null_space_basis,
    numeric_rank,
    pseudo_inverse,
    spectral_decompose,
)
from gmls.spectral import as_matrix

from conftest import random_nnd
from oracles import fraction_rank, matrix_rank_svd, penrose_defects


def test_hand_diagonal_decomposition():
    spec = spectral_decompose(np.diag([2.0, 1.0, 0.0]))
    assert spec.rank == 2
    np.testing.assert_allclose(spec.eigenvalues_pos, [2.0, 1.0])
    # null direction is the third axis up to sign
    np.testing.assert_allclose(np.abs(spec.eigenvectors_null.ravel()), [0, 0, 1],
                               atol=1e-14)
    np.testing.assert_allclose(spec.reconstruct(), np.diag([2.0, 1.0, 0.0]),
                               atol=1e-14)
    np.testing.assert_allclose(spec.pinv(), np.diag([0.5, 1.0, 0.0]), atol=1e-14)


def test_eigenvalues_sorted_descending():
    rng = np.random.default_rng(0)
    spec = spectral_decompose(random_nnd(rng, 8, rank=5))
    assert np.all(np.diff(spec.eigenvalues_pos) <= 0)
    assert spec.eigenvalues_pos.shape == (5,)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("dim,rank", [(4, 4), (6, 3), (9, 7), (5, 1)])
def test_partition_properties(seed, dim, rank):
    """The two eigenvector blocks are orthonormal and complementary."""
    rng = np.random.default_rng(100 + seed)
    omega = random_nnd(rng, dim, rank=rank)
    spec = spectral_decompose(omega)
    assert spec.rank == rank
    f_mat, a_mat = spec.eigenvectors_pos, spec.eigenvectors_null
    np.testing.assert_allclose(f_mat.T @ f_mat, np.eye(rank), atol=1e-12)
    np.testing.assert_allclose(a_mat.T @ a_mat, np.eye(dim - rank), atol=1e-12)
    np.testing.assert_allclose(a_mat.T @ f_mat, np.zeros((dim - rank, rank)),
                               atol=1e-12)
    np.testing.assert_allclose(spec.reconstruct(), omega, atol=1e-10)
    # null block really annihilates the matrix
    np.testing.assert_allclose(omega @ a_mat, 0.0, atol=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_pinv_satisfies_penrose(seed):
    rng = np.random.default_rng(200 + seed)
    dim = int(rng.integers(2, 12))
    rank = int(rng.integers(1, dim + 1))
    omega = random_nnd(rng, dim, rank=rank)
    defects = penrose_defects(omega, pseudo_inverse(omega))
    assert max(defects) < 1e-10


def test_rank_against_exact_arithmetic():
    # integer matrices rank exactly over the rationals
    cases = [
        np.array([[1, 2], [2, 4]], dtype=float),
        np.array([[1, 0, 1], [0, 1, 1], [1, 1, 2]], dtype=float),
        np.array([[3, 1], [1, 3]], dtype=float),
    ]
    for mat in cases:
        assert numeric_rank(mat).numeric_rank == fraction_rank(mat)


@pytest.mark.parametrize("seed", range(6))
def test_rank_matches_numpy_on_random_input(seed):
    rng = np.random.default_rng(300 + seed)
    rows, cols = int(rng.integers(2, 10)), int(rng.integers(2, 10))
    mat = rng.normal(size=(rows, cols))
    assert numeric_rank(mat).numeric_rank == matrix_rank_svd(mat)


def test_tolerance_tie_counts_as_zero():
    # an eigenvalue exactly at the cutoff is excluded
    spec = spectral_decompose(np.diag([1.0, 1e-6]), tol=1e-6)
    assert spec.rank == 1


def test_tolerance_scale_invariance():
    rng = np.random.default_rng(4)
    omega = random_nnd(rng, 7, rank=4)
    for scale in (1e-8, 1.0, 1e8):
        assert spectral_decompose(scale * omega).rank == 4


def test_default_tolerance_formula():
    eps = np.finfo(float).eps
    assert default_tolerance(10, 4, 3.0) == 10 * eps * 3.0
    assert default_tolerance(2, 20, 0.5) == 20 * eps * 0.5


def test_eigenvector_sign_convention():
    rng = np.random.default_rng(9)
    spec = spectral_decompose(random_nnd(rng, 6, rank=4))
    for block in (spec.eigenvectors_pos, spec.eigenvectors_null):
        for j in range(block.shape[1]):
            col = block[:, j]
            assert col[np.argmax(np.abs(col))] > 0


def test_rejects_nonsquare():
    with pytest.raises(DimensionMismatchError):
        spectral_decompose(np.ones((3, 2)))


def test_rejects_asymmetric():
    mat = np.array([[1.0, 0.5], [0.1, 1.0]])
    with pytest.raises(NonSymmetricError):
        spectral_decompose(mat)


def test_rejects_indefinite():
    with pytest.raises(IndefiniteInputError):
        spectral_decompose(np.diag([1.0, -0.5]))


def test_rejects_nonfinite():
    with pytest.raises(NonFiniteError):
        spectral_decompose(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_as_matrix_promotes_vectors():
    out = as_matrix(np.array([1.0, 2.0]), "v")
    assert out.shape == (2, 1)


def test_null_space_basis_properties():
    rng = np.random.default_rng(12)
    for _ in range(6):
        rows, cols = int(rng.integers(1, 6)), int(rng.integers(2, 8))
        mat = rng.normal(size=(rows, cols))
        basis = null_space_basis(mat)
        assert basis.shape == (cols, cols - matrix_rank_svd(mat))
        if basis.size:
            np.testing.assert_allclose(mat @ basis, 0.0, atol=1e-12)
            np.testing.assert_allclose(basis.T @ basis, np.eye(basis.shape[1]),
                                       atol=1e-12)


def test_null_space_of_empty_row_set():
    basis = null_space_basis(np.zeros((0, 4)))
    np.testing.assert_allclose(basis, np.eye(4))


def test_pinv_of_rank_one_ones():
    # ones(2,2) has pseudo-inverse ones(2,2)/4
    np.testing.assert_allclose(pseudo_inverse(np.ones((2, 2))),
                               np.ones((2, 2)) / 4.0, atol=1e-14)
