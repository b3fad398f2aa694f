"""Symmetric spectral decompositions, pseudo-inverses, and numeric rank.

Rank is a tolerance decision, not an exact property.  Unless a caller
overrides it, every routine in this module uses the same rule:

    tol = max(rows, cols) * machine_epsilon * largest_[eigen|singular]_value

Values at or below the threshold count as zero, so ties resolve toward
the smaller (conservative) rank.  All outputs are deterministic for
identical inputs within a single build of the underlying LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    IndefiniteInputError,
    NonFiniteError,
    NonSymmetricError,
)

# Relative asymmetry beyond this is treated as a hard input error rather
# than noise to be symmetrized away.
SYMMETRY_RTOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce input to a 2-d float array, rejecting non-finite entries.

    1-d input is reshaped to a single column.
    """
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return arr


def default_tolerance(rows: int, cols: int, scale: float) -> float:
    """Default rank cutoff: max(rows, cols) * eps * scale."""
    return max(rows, cols) * np.finfo(float).eps * float(scale)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so the first entry of largest magnitude is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        if col.size and col[np.argmax(np.abs(col))] < 0:
            out[:, j] = -col
    return out


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition of a symmetric nonnegative definite matrix.

    The eigenvector matrix splits into an orthonormal basis of the null
    space (``eigenvectors_null``, one column per zero eigenvalue) and the
    eigenvectors of the strictly positive eigenvalues
    (``eigenvectors_pos``), whose eigenvalues are stored descending in
    ``eigenvalues_pos``.  Stacked side by side the two blocks form a
    complete orthonormal basis of R^source_dim.
    """

    source_dim: int
    eigenvectors_null: np.ndarray
    eigenvectors_pos: np.ndarray
    eigenvalues_pos: np.ndarray
    rank: int
    tolerance_used: float

    def pinv(self) -> np.ndarray:
        """Moore-Penrose inverse reassembled from the positive part."""
        f = self.eigenvectors_pos
        if self.rank == 0:
            return np.zeros((self.source_dim, self.source_dim))
        return (f / self.eigenvalues_pos) @ f.T

    def reconstruct(self) -> np.ndarray:
        """Reassemble the original matrix from the positive part."""
        f = self.eigenvectors_pos
        if self.rank == 0:
            return np.zeros((self.source_dim, self.source_dim))
        return (f * self.eigenvalues_pos) @ f.T


@dataclass(frozen=True)
class RankReport:
    """Outcome of a numeric rank decision.

    ``values`` holds the singular (or eigen) values in descending order;
    ``deficient`` is True when the numeric rank falls short of the
    maximum possible rank min(rows, cols).
    """

    numeric_rank: int
    values: np.ndarray
    tolerance: float
    deficient: bool


def spectral_decompose(s, tol: float | None = None) -> SpectralDecomposition:
    """Decompose a symmetric nonnegative definite matrix.

    Parameters
    ----------
    s : array_like
        Square symmetric matrix, nonnegative definite up to tolerance.
    tol : float, optional
        Rank cutoff.  Defaults to the module tolerance rule evaluated at
        the largest absolute eigenvalue.

    Returns
    -------
    SpectralDecomposition

    Raises
    ------
    NonSymmetricError
        If the relative asymmetry exceeds 1e-12.
    IndefiniteInputError
        If any eigenvalue falls below -tol.
    NonFiniteError
        If the input contains NaN or Inf.
    """
    mat = as_matrix(s, "s")
    t_dim = mat.shape[0]
    if mat.shape[0] != mat.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {mat.shape}")
    scale = float(np.max(np.abs(mat))) if mat.size else 0.0
    if t_dim and float(np.max(np.abs(mat - mat.T))) > SYMMETRY_RTOL * (1.0 + scale):
        raise NonSymmetricError("matrix is not symmetric within 1e-12 relative asymmetry")
    sym = 0.5 * (mat + mat.T)
    if t_dim == 0:
        return SpectralDecomposition(0, np.zeros((0, 0)), np.zeros((0, 0)),
                                     np.zeros(0), 0, 0.0)
    vals, vecs = np.linalg.eigh(sym)
    lam_max = float(np.max(np.abs(vals)))
    cutoff = default_tolerance(t_dim, t_dim, lam_max) if tol is None else float(tol)
    if cutoff < 0:
        raise ValueError("tolerance must be nonnegative")
    if float(vals[0]) < -cutoff:
        raise IndefiniteInputError(
            f"matrix has eigenvalue {vals[0]:.6g} below -tol={-cutoff:.6g}")
    positive = vals > cutoff
    # eigh returns ascending order; positive eigenvalues are re-listed descending
    idx_pos = np.nonzero(positive)[0][::-1]
    idx_null = np.nonzero(~positive)[0]
    f = _fix_signs(vecs[:, idx_pos])
    a = _fix_signs(vecs[:, idx_null])
    return SpectralDecomposition(
        source_dim=t_dim,
        eigenvectors_null=a,
        eigenvectors_pos=f,
        eigenvalues_pos=vals[idx_pos].copy(),
        rank=int(idx_pos.size),
        tolerance_used=cutoff,
    )


def pseudo_inverse(s, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric nonnegative definite matrix.

    Computed as F diag(1/lambda) F' from the spectral decomposition, so
    the null space of the input is exactly the null space of the output.
    """
    return spectral_decompose(s, tol=tol).pinv()


def numeric_rank(b, tol: float | None = None) -> RankReport:
    """Numeric rank of a general matrix via its singular values."""
    mat = as_matrix(b, "b")
    rows, cols = mat.shape
    if mat.size == 0:
        return RankReport(0, np.zeros(0), 0.0, deficient=False)
    values = np.linalg.svd(mat, compute_uv=False)
    cutoff = default_tolerance(rows, cols, values[0]) if tol is None else float(tol)
    rank = int(np.count_nonzero(values > cutoff))
    return RankReport(rank, values, cutoff, deficient=rank < min(rows, cols))


def null_space_basis(b, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the null space of a general matrix.

    Returns a cols x (cols - rank) matrix N with B N = 0 and N'N = I.
    An empty restriction matrix (zero rows) yields the identity basis.
    """
    mat = as_matrix(b, "b")
    rows, cols = mat.shape
    if cols == 0:
        return np.zeros((0, 0))
    if rows == 0:
        return np.eye(cols)
    _, values, vt = np.linalg.svd(mat, full_matrices=True)
    cutoff = default_tolerance(rows, cols, values[0] if values.size else 0.0) \
        if tol is None else float(tol)
    rank = int(np.count_nonzero(values > cutoff))
    return _fix_signs(vt[rank:, :].T)
