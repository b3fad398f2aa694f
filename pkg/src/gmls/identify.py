"""Identification diagnostics: rank conditions, implicit restrictions, witnesses.

A singular dispersion matrix turns some error directions off exactly, so
the data satisfy A'y = A'X beta with probability one, where A spans the
null space of the dispersion.  These rows are restrictions the sample
imposes for free; identification is then a property of the explicit and
implicit restrictions jointly with the design.

For SUR systems whose per-period dispersion blocks share a single null
eigenvector, rank failure of the whitened design F'X has exactly two
sources, and check_theil_condition names the one at hand and produces a
certificate vector d with F_t' X_t d = 0 for every period.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NullVectorMismatchError
from .model import CombinedRestrictions, GaussMarkoffModel, LinearRestrictions, SURLayout
from .spectral import (
    RankReport,
    SpectralDecomposition,
    as_matrix,
    default_tolerance,
    null_space_basis,
    numeric_rank,
    spectral_decompose,
)


@dataclass(frozen=True)
class ImplicitRestrictions:
    """Restrictions implied by the null space of the dispersion matrix.

    G = A'X and g = A'y; the model data satisfy G beta = g exactly for
    the true beta (with probability one).
    """

    G: np.ndarray
    g: np.ndarray
    A: np.ndarray

    @property
    def count(self) -> int:
        return self.G.shape[0]


class WitnessKind(enum.Enum):
    NONE = "none"
    WITHIN_EQUATION_COLLINEARITY = "within-equation-collinearity"
    CROSS_EQUATION_COMBINATION = "cross-equation-combination"


@dataclass(frozen=True)
class TheilWitness:
    """Certificate for (or against) rank failure of the whitened design.

    When ``kind`` is not NONE, ``d`` is a nonzero coefficient direction
    with F_t' X_t d = 0 in every period t.  For a cross-equation
    combination, ``s`` is the common column vector the relevant
    equations' designs reproduce, and d is assembled from the
    per-equation solves X_i h_i = s weighted by the null-vector entries
    a_i.  For within-equation collinearity, ``violating_equation`` names
    the offending block and s is zero.  ``note`` flags degenerate
    configurations (a single nonzero null-vector weight).
    """

    kind: WitnessKind
    d: np.ndarray
    s: np.ndarray
    a: np.ndarray
    violating_equation: int | None = None
    note: str = ""


def check_restriction_consistency(res: LinearRestrictions,
                                  tol: float | None = None):
    """Solvability of R beta = r: rank(R) must equal rank(R, r).

    Returns (consistent, report) where the report describes the
    augmented matrix (R, r).
    """
    rank_r = numeric_rank(res.R, tol=tol).numeric_rank
    report = numeric_rank(np.hstack([res.R, res.r]), tol=tol)
    return report.numeric_rank == rank_r, report


def check_joint_identification(X, res: LinearRestrictions,
                               tol: float | None = None):
    """Full column rank of the stacked matrix (R; X).

    This is the condition under which restricted estimation determines a
    unique coefficient vector even when the design alone is collinear.
    """
    X = as_matrix(X, "X")
    if res.num_params != X.shape[1]:
        raise DimensionMismatchError(
            f"restrictions have {res.num_params} columns, design has {X.shape[1]}")
    report = numeric_rank(np.vstack([res.R, X]), tol=tol)
    return report.numeric_rank == X.shape[1], report


def extract_implicit_restrictions(model: GaussMarkoffModel,
                                  tol: float | None = None,
                                  omega_spec: SpectralDecomposition | None = None,
                                  ) -> ImplicitRestrictions:
    """Implicit restrictions G = A'X, g = A'y from a singular dispersion.

    A positive definite dispersion yields an empty restriction set.  A
    precomputed spectral decomposition of the dispersion may be passed
    to avoid repeating it.
    """
    spec = omega_spec if omega_spec is not None \
        else spectral_decompose(model.dispersion, tol=tol)
    if spec.source_dim != model.num_obs:
        raise DimensionMismatchError("decomposition does not match the model dimension")
    a = spec.eigenvectors_null
    return ImplicitRestrictions(G=a.T @ model.X, g=a.T @ model.y, A=a)


def combine_restrictions(explicit: LinearRestrictions,
                         implicit: ImplicitRestrictions,
                         tol: float | None = None) -> CombinedRestrictions:
    """Stack explicit restrictions on top of the implicit ones.

    The result records which rows came from where and whether the joint
    system H beta = h is solvable (rank(H) = rank(H, h)).
    """
    if implicit.G.shape[1] != explicit.num_params:
        raise DimensionMismatchError(
            f"explicit restrictions have {explicit.num_params} columns, "
            f"implicit have {implicit.G.shape[1]}")
    h_mat = np.vstack([explicit.R, implicit.G])
    h_vec = np.vstack([explicit.r, implicit.g])
    rank_h = numeric_rank(h_mat, tol=tol).numeric_rank
    rank_aug = numeric_rank(np.hstack([h_mat, h_vec]), tol=tol).numeric_rank
    return CombinedRestrictions(
        H=h_mat,
        h=h_vec,
        explicit_rows=range(0, explicit.count),
        implicit_rows=range(explicit.count, explicit.count + implicit.count),
        consistent=rank_h == rank_aug,
    )


def check_mls_invertibility(X, omega_spec: SpectralDecomposition,
                            tol: float | None = None):
    """Full column rank of F'X, F the positive-eigenvalue eigenvectors.

    This is the exact condition for X' Omega^+ X to be invertible, i.e.
    for the pseudo-inverse estimator to exist.
    """
    X = as_matrix(X, "X")
    if omega_spec.source_dim != X.shape[0]:
        raise DimensionMismatchError("decomposition does not match the design rows")
    report = numeric_rank(omega_spec.eigenvectors_pos.T @ X, tol=tol)
    return report.numeric_rank == X.shape[1], report


def _column_space_projector(block: np.ndarray) -> np.ndarray:
    u, s, _ = np.linalg.svd(block, full_matrices=False)
    cutoff = default_tolerance(*block.shape, s[0] if s.size else 0.0)
    basis = u[:, : int(np.count_nonzero(s > cutoff))]
    return basis @ basis.T


def _unit(v: np.ndarray) -> np.ndarray:
    nrm = float(np.linalg.norm(v))
    out = v / nrm
    j = int(np.argmax(np.abs(out)))
    return -out if out[j, 0] < 0 else out


def check_theil_condition(layout: SURLayout, dispersion_blocks,
                          tol: float | None = None) -> TheilWitness:
    """Decide rank failure of F'X for a SUR system and certify the cause.

    Parameters
    ----------
    layout : SURLayout
        Per-equation designs.
    dispersion_blocks : sequence or array_like
        The m per-period n x n dispersion blocks, or a single block used
        for every period (homoskedastic case).  Each block must have
        exactly one zero eigenvalue, with the same null eigenvector
        across periods.

    Returns
    -------
    TheilWitness
        kind NONE when F'X has full column rank; otherwise a certificate
        d (unit norm) with F_t' X_t d = 0 for all t, classified as
        within-equation collinearity or a cross-equation combination.

    Raises
    ------
    NullVectorMismatchError
        If some block has a different null space than the first, or a
        zero eigenvalue of multiplicity other than one.
    """
    n, m, k_total = layout.n, layout.m, layout.num_params
    if isinstance(dispersion_blocks, np.ndarray) and dispersion_blocks.ndim == 2:
        blocks = [dispersion_blocks] * m
    else:
        blocks = list(dispersion_blocks)
        if len(blocks) == 1:
            blocks = blocks * m
    if len(blocks) != m:
        raise DimensionMismatchError(f"expected {m} dispersion blocks, got {len(blocks)}")
    specs = [spectral_decompose(b, tol=tol) for b in blocks]
    for t, spec in enumerate(specs):
        if spec.source_dim != n:
            raise DimensionMismatchError(f"dispersion block {t} is not {n} x {n}")
        if spec.rank != n - 1:
            raise NullVectorMismatchError(
                f"dispersion block {t} has {n - spec.rank} zero eigenvalues, expected 1")
    a = specs[0].eigenvectors_null
    scale = max(float(np.max(np.abs(b))) for b in blocks)
    null_tol = 1e-8 * (1.0 + scale)
    for t, b in enumerate(blocks):
        if float(np.max(np.abs(b @ a))) > null_tol:
            raise NullVectorMismatchError(
                f"dispersion block {t} does not annihilate the common null vector")

    whitened = np.vstack([specs[t].eigenvectors_pos.T @ layout.period_row(t)
                          for t in range(m)])
    report = numeric_rank(whitened, tol=tol)
    if report.numeric_rank == k_total:
        return TheilWitness(kind=WitnessKind.NONE, d=np.zeros((k_total, 1)),
                            s=np.zeros((m, 1)), a=a)

    slices = layout.column_slices()
    # source one: some equation's own design is collinear
    for i, block in enumerate(layout.block_design):
        rep = numeric_rank(block, tol=tol)
        if rep.deficient:
            f = null_space_basis(block, tol=tol)[:, :1]
            d = np.zeros((k_total, 1))
            d[slices[i]] = f
            return TheilWitness(kind=WitnessKind.WITHIN_EQUATION_COLLINEARITY,
                                d=_unit(d), s=np.zeros((m, 1)), a=a,
                                violating_equation=i)

    # source two: the designs of the equations with nonzero null-vector
    # weight share a common column-space vector s
    weight_tol = default_tolerance(n, 1, float(np.max(np.abs(a))))
    relevant = [i for i in range(n) if abs(a[i, 0]) > weight_tol]
    note = "single nonzero null-vector weight" if len(relevant) == 1 else ""
    d = None
    if relevant:
        eye_m = np.eye(m)
        gaps = np.vstack([eye_m - _column_space_projector(layout.block_design[i])
                          for i in relevant])
        inter = null_space_basis(gaps, tol=tol)
        if inter.shape[1] > 0:
            s = inter[:, :1]
            d = np.zeros((k_total, 1))
            for i in relevant:
                h_i = np.linalg.lstsq(layout.block_design[i], s, rcond=None)[0]
                d[slices[i]] = a[i, 0] * h_i
    if d is None or float(np.linalg.norm(d)) == 0.0 \
            or float(np.max(np.abs(whitened @ d))) > 1e-8 * (1.0 + float(np.max(np.abs(whitened)))):
        # boundary case: fall back to a direct null vector of F'X
        d = null_space_basis(whitened, tol=tol)[:, :1]
    d = _unit(d)
    s_rec = np.vstack([(a.T @ layout.period_row(t) @ d) for t in range(m)])
    return TheilWitness(kind=WitnessKind.CROSS_EQUATION_COMBINATION, d=d,
                        s=s_rec, a=a, note=note)
