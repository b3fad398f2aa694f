"""Model containers: the general Gauss-Markoff model, SUR stacking, restrictions.

A model is the triple {y, X, dispersion} with E(u) = 0 and
D(u) = sigma^2 * dispersion.  The dispersion matrix may be singular; the
only admissibility requirement on the data is that the response lies in
the column space of (X : dispersion), which build_model verifies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatchError,
    DispersionNotNNDError,
    IndefiniteInputError,
    InconsistentRestrictionsError,
    NonSymmetricError,
    ResponseOutsideRangeError,
    TooFewObservationsError,
)
from .spectral import as_matrix, null_space_basis, numeric_rank, spectral_decompose

# Relative tolerance for the column-space membership test on y.
MEMBERSHIP_RTOL = 1e-8

PERIOD_MAJOR = "period"
EQUATION_MAJOR = "equation"


class EstimatorTag(enum.Enum):
    OLS = "ols"
    GLS = "gls"
    ROLS = "rols"
    RGLS = "rgls"
    RIDGE = "ridge"
    MLS = "mls"
    TKN = "tkn"
    CONSTRAINED_SINGULAR = "constrained"
    STOCHASTIC_RESTRICTED = "mixed"
    PANEL_GLS = "fe-gls"
    PANEL_MLS = "fe-mls"


@dataclass(frozen=True)
class GaussMarkoffModel:
    """Immutable model triple with optional error-variance scale.

    ``ordering`` records the stacking convention when the model was
    produced from per-equation SUR blocks ("period" or "equation"),
    None otherwise.
    """

    y: np.ndarray
    X: np.ndarray
    dispersion: np.ndarray
    sigma2: float | None = None
    ordering: str | None = None

    @property
    def num_obs(self) -> int:
        return self.X.shape[0]

    @property
    def num_params(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class LinearRestrictions:
    """Exact linear restrictions R beta = r."""

    R: np.ndarray
    r: np.ndarray

    @property
    def count(self) -> int:
        return self.R.shape[0]

    @property
    def num_params(self) -> int:
        return self.R.shape[1]

    @classmethod
    def build(cls, R, r) -> "LinearRestrictions":
        R = as_matrix(R, "R")
        r = as_matrix(r, "r")
        if r.shape != (R.shape[0], 1):
            raise DimensionMismatchError(
                f"r must be {R.shape[0]} x 1 to conform with R, got {r.shape}")
        return cls(R=R, r=r)

    @classmethod
    def empty(cls, num_params: int) -> "LinearRestrictions":
        return cls(R=np.zeros((0, num_params)), r=np.zeros((0, 1)))


@dataclass(frozen=True)
class CombinedRestrictions:
    """Explicit restrictions stacked on top of the implicit ones.

    H = [R; A'X] and h = [r; A'y], where A spans the null space of the
    dispersion matrix.  ``explicit_rows`` and ``implicit_rows`` index the
    two groups inside H; ``consistent`` records whether
    rank(H) = rank(H, h) held at construction time.
    """

    H: np.ndarray
    h: np.ndarray
    explicit_rows: range
    implicit_rows: range
    consistent: bool

    @property
    def count(self) -> int:
        return self.H.shape[0]

    @property
    def num_params(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True)
class EstimateResult:
    """A point estimate with its covariance factor and residuals.

    ``covariance_factor`` is the matrix V such that D(beta_hat) =
    sigma^2 V under the estimator's own assumptions.  ``diagnostics``
    collects the identification checks that were consulted on the way.
    """

    beta_hat: np.ndarray
    covariance_factor: np.ndarray
    residuals: np.ndarray
    estimator_tag: EstimatorTag
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SURLayout:
    """Per-equation designs of a seemingly-unrelated-regressions system.

    ``block_design[i]`` is the m x K_i design of equation i.  All
    equations share the same number of periods m; the stacked parameter
    vector concatenates the per-equation coefficient blocks in equation
    order.
    """

    block_design: tuple

    @classmethod
    def build(cls, designs) -> "SURLayout":
        blocks = tuple(as_matrix(d, f"design block {i}") for i, d in enumerate(designs))
        if not blocks:
            raise DimensionMismatchError("need at least one equation")
        m = blocks[0].shape[0]
        for i, b in enumerate(blocks):
            if b.shape[0] != m:
                raise DimensionMismatchError(
                    f"equation {i} has {b.shape[0]} periods, expected {m}")
        return cls(block_design=blocks)

    @property
    def n(self) -> int:
        return len(self.block_design)

    @property
    def m(self) -> int:
        return self.block_design[0].shape[0]

    @property
    def block_widths(self) -> tuple:
        return tuple(b.shape[1] for b in self.block_design)

    @property
    def num_params(self) -> int:
        return sum(self.block_widths)

    def column_slices(self) -> list:
        """Column ranges of each equation's coefficients in the stacked beta."""
        out, start = [], 0
        for w in self.block_widths:
            out.append(slice(start, start + w))
            start += w
        return out

    def period_row(self, t: int) -> np.ndarray:
        """The n x K design block of period t in period-major stacking."""
        row = np.zeros((self.n, self.num_params))
        for i, (block, cols) in enumerate(zip(self.block_design, self.column_slices())):
            row[i, cols] = block[t, :]
        return row


def build_model(y, X, dispersion, sigma2: float | None = None,
                tol: float | None = None,
                ordering: str | None = None) -> GaussMarkoffModel:
    """Validate and assemble a general Gauss-Markoff model.

    Checks, in order: dimensional conformity, T > K, the dispersion is
    symmetric nonnegative definite, and the response lies in the column
    space of (X : dispersion) within 1e-8 relative.
    """
    y = as_matrix(y, "y")
    X = as_matrix(X, "X")
    omega = as_matrix(dispersion, "dispersion")
    t_dim, k_dim = X.shape
    if y.shape != (t_dim, 1):
        raise DimensionMismatchError(f"y must be {t_dim} x 1, got {y.shape}")
    if omega.shape != (t_dim, t_dim):
        raise DimensionMismatchError(
            f"dispersion must be {t_dim} x {t_dim}, got {omega.shape}")
    if t_dim <= k_dim:
        raise TooFewObservationsError(
            f"need more observations than parameters, got T={t_dim}, K={k_dim}")
    try:
        spectral_decompose(omega, tol=tol)
    except (NonSymmetricError, IndefiniteInputError) as exc:
        raise DispersionNotNNDError(
            f"dispersion is not symmetric nonnegative definite: {exc}") from exc
    # y must lie in the column space of (X : dispersion) for the model to
    # be internally consistent with probability one.
    stacked = np.hstack([X, omega])
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    cutoff = max(stacked.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    basis = u[:, : int(np.count_nonzero(s > cutoff))]
    resid = y - basis @ (basis.T @ y)
    if float(np.linalg.norm(resid)) > MEMBERSHIP_RTOL * (1.0 + float(np.linalg.norm(y))):
        raise ResponseOutsideRangeError(
            "response is outside the column space of (design : dispersion)")
    return GaussMarkoffModel(y=y, X=X, dispersion=omega, sigma2=sigma2,
                             ordering=ordering)


def normalize_dispersion(model: GaussMarkoffModel) -> GaussMarkoffModel:
    """Rescale the dispersion so its trace equals the observation count.

    Optional convenience; no estimator requires it.
    """
    tr = float(np.trace(model.dispersion))
    if tr <= 0:
        raise DispersionNotNNDError("cannot normalize a dispersion with trace <= 0")
    return GaussMarkoffModel(y=model.y, X=model.X,
                             dispersion=model.dispersion * (model.num_obs / tr),
                             sigma2=model.sigma2, ordering=model.ordering)


def stacking_permutation(n: int, m: int, src: str, dst: str) -> np.ndarray:
    """Row permutation taking src-major stacked arrays to dst-major order.

    Returns an index array p with A_dst = A_src[p].  Equation-major rows
    are ordered (i, t) -> i*m + t, period-major rows (i, t) -> t*n + i.
    """
    for name in (src, dst):
        if name not in (PERIOD_MAJOR, EQUATION_MAJOR):
            raise ValueError(f"unknown ordering {name!r}")
    if src == dst:
        return np.arange(n * m)
    perm = np.empty(n * m, dtype=int)
    if dst == PERIOD_MAJOR:  # src is equation-major
        for i in range(n):
            for t in range(m):
                perm[t * n + i] = i * m + t
    else:  # dst equation-major, src period-major
        for i in range(n):
            for t in range(m):
                perm[i * m + t] = t * n + i
    return perm


def stack_sur(layout: SURLayout, responses, dispersion_blocks,
              order: str = PERIOD_MAJOR, sigma2: float | None = None,
              tol: float | None = None) -> GaussMarkoffModel:
    """Stack a SUR system into a single Gauss-Markoff model.

    Parameters
    ----------
    layout : SURLayout
        Per-equation designs.
    responses : sequence
        n response vectors of length m, one per equation.
    dispersion_blocks : sequence
        Period-major order expects the m per-period n x n blocks
        Sigma_t; equation-major order expects the n per-equation m x m
        blocks.  Each block must be symmetric nonnegative definite.
    order : str
        "period" or "equation"; recorded on the resulting model.
    """
    n, m = layout.n, layout.m
    ys = [as_matrix(r, f"response {i}") for i, r in enumerate(responses)]
    if len(ys) != n or any(v.shape != (m, 1) for v in ys):
        raise DimensionMismatchError(f"expected {n} response vectors of length {m}")
    blocks = [as_matrix(b, f"dispersion block {t}") for t, b in enumerate(dispersion_blocks)]
    if order == PERIOD_MAJOR:
        if len(blocks) != m or any(b.shape != (n, n) for b in blocks):
            raise DimensionMismatchError(
                f"period-major stacking needs {m} blocks of shape {n} x {n}")
        design = np.vstack([layout.period_row(t) for t in range(m)])
        y = np.vstack([np.array([[ys[i][t, 0]] for i in range(n)]) for t in range(m)])
    elif order == EQUATION_MAJOR:
        if len(blocks) != n or any(b.shape != (m, m) for b in blocks):
            raise DimensionMismatchError(
                f"equation-major stacking needs {n} blocks of shape {m} x {m}")
        design = scipy.linalg.block_diag(*layout.block_design)
        y = np.vstack(ys)
    else:
        raise ValueError(f"unknown ordering {order!r}")
    for t, b in enumerate(blocks):
        try:
            spectral_decompose(b, tol=tol)
        except (NonSymmetricError, IndefiniteInputError) as exc:
            raise DispersionNotNNDError(f"dispersion block {t}: {exc}") from exc
    omega = scipy.linalg.block_diag(*blocks)
    return build_model(y, design, omega, sigma2=sigma2, tol=tol, ordering=order)


def extract_sur_blocks(model: GaussMarkoffModel, layout: SURLayout):
    """Recover the per-equation (design, response) pairs from a stacked model.

    Inverse of stack_sur up to exact equality; the model must carry the
    ordering tag stack_sur recorded.
    """
    if model.ordering not in (PERIOD_MAJOR, EQUATION_MAJOR):
        raise ValueError("model does not record a SUR stacking order")
    n, m = layout.n, layout.m
    if model.num_obs != n * m:
        raise DimensionMismatchError("model size does not match layout")
    perm = stacking_permutation(n, m, src=model.ordering, dst=EQUATION_MAJOR)
    design_eq = model.X[perm]
    y_eq = model.y[perm]
    out = []
    for i, cols in enumerate(layout.column_slices()):
        rows = slice(i * m, (i + 1) * m)
        out.append((design_eq[rows, cols], y_eq[rows]))
    return out


def invert_restrictions(res: LinearRestrictions, tol: float | None = None):
    """Particular solution and null-space basis of R beta = r.

    Returns (particular, null_basis) with particular the minimum-norm
    solution and null_basis orthonormal.  Raises
    InconsistentRestrictionsError when rank(R) < rank(R, r).
    """
    rank_r = numeric_rank(res.R, tol=tol).numeric_rank
    rank_aug = numeric_rank(np.hstack([res.R, res.r]), tol=tol).numeric_rank
    if rank_aug > rank_r:
        raise InconsistentRestrictionsError(
            f"restrictions are inconsistent: rank(R)={rank_r} < rank(R,r)={rank_aug}")
    if res.count == 0:
        particular = np.zeros((res.num_params, 1))
    else:
        particular = np.linalg.lstsq(res.R, res.r, rcond=None)[0]
    return particular, null_space_basis(res.R, tol=tol)
