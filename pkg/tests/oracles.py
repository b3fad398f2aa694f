"""Independent reference computations used by the test suite.

Everything here is deliberately written against a different code path
than the package: exact rational arithmetic for ranks and small solves,
scipy's null_space and numpy's pinv where the package uses its own
spectral machinery, and brute-force reparametrizations for constrained
problems.  Tests compare package output against these, never against
the package itself.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.linalg import cholesky, null_space


def _to_fractions(matrix):
    # Fraction(float) is exact, so this loses nothing
    arr = np.asarray(matrix, dtype=float)
    return [[Fraction(v) for v in row] for row in arr.tolist()]


def fraction_rank(matrix) -> int:
    """Exact rank over the rationals by Gaussian elimination."""
    rows = _to_fractions(matrix)
    if not rows or not rows[0]:
        return 0
    n_rows, n_cols = len(rows), len(rows[0])
    rank = 0
    col = 0
    for col in range(n_cols):
        pivot = None
        for i in range(rank, n_rows):
            if rows[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][col]
        for i in range(rank + 1, n_rows):
            if rows[i][col] != 0:
                factor = rows[i][col] / lead
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank


def fraction_solve(a_mat, b_vec) -> np.ndarray:
    """Exact solution of a square nonsingular system, returned as floats."""
    a_rows = _to_fractions(a_mat)
    b_rows = [row[:] for row in _to_fractions(np.asarray(b_vec).reshape(len(a_rows), -1))]
    n = len(a_rows)
    for k in range(n):
        pivot = next(i for i in range(k, n) if a_rows[i][k] != 0)
        a_rows[k], a_rows[pivot] = a_rows[pivot], a_rows[k]
        b_rows[k], b_rows[pivot] = b_rows[pivot], b_rows[k]
        for i in range(k + 1, n):
            if a_rows[i][k] != 0:
                f = a_rows[i][k] / a_rows[k][k]
                a_rows[i] = [x - f * y for x, y in zip(a_rows[i], a_rows[k])]
                b_rows[i] = [x - f * y for x, y in zip(b_rows[i], b_rows[k])]
    width = len(b_rows[0])
    sol = [[Fraction(0)] * width for _ in range(n)]
    for i in range(n - 1, -1, -1):
        for j in range(width):
            acc = b_rows[i][j]
            for k in range(i + 1, n):
                acc -= a_rows[i][k] * sol[k][j]
            sol[i][j] = acc / a_rows[i][i]
    return np.array([[float(v) for v in row] for row in sol])


def penrose_defects(b_mat, b_pinv):
    """Sup-norm residuals of the four defining pseudo-inverse identities."""
    b = np.asarray(b_mat, dtype=float)
    g = np.asarray(b_pinv, dtype=float)
    return (
        float(np.max(np.abs(b @ g @ b - b), initial=0.0)),
        float(np.max(np.abs(g @ b @ g - g), initial=0.0)),
        float(np.max(np.abs((b @ g).T - b @ g), initial=0.0)),
        float(np.max(np.abs((g @ b).T - g @ b), initial=0.0)),
    )


def whitened_gls(y_vec, x_mat, omega) -> np.ndarray:
    """GLS by Cholesky whitening followed by a plain least-squares solve."""
    chol = cholesky(np.asarray(omega, dtype=float), lower=True)
    xw = np.linalg.solve(chol, x_mat)
    yw = np.linalg.solve(chol, np.asarray(y_vec, dtype=float).reshape(-1, 1))
    beta, *_ = np.linalg.lstsq(xw, yw, rcond=None)
    return beta


def constrained_wls(y_vec, x_mat, weight, h_mat, h_rhs) -> np.ndarray:
    """Minimize (y - Xb)' W (y - Xb) subject to H b = h.

    Solved by brute-force reparametrization over scipy's null space.
    Covers restricted OLS (W = I), restricted GLS (W = inverse
    dispersion), and the singular-dispersion constrained estimator
    (W = pseudo-inverse dispersion).
    """
    y = np.asarray(y_vec, dtype=float).reshape(-1, 1)
    x = np.asarray(x_mat, dtype=float)
    w = np.asarray(weight, dtype=float)
    k = x.shape[1]
    h = np.asarray(h_mat, dtype=float).reshape(-1, k)
    if h.shape[0]:
        rhs = np.asarray(h_rhs, dtype=float).reshape(-1, 1)
        beta_p, *_ = np.linalg.lstsq(h, rhs, rcond=None)
        basis = null_space(h)
    else:
        beta_p = np.zeros((k, 1))
        basis = np.eye(k)
    if basis.size == 0:
        return beta_p
    xn = x @ basis
    gram = xn.T @ w @ xn
    coef = np.linalg.solve(gram, xn.T @ w @ (y - x @ beta_p))
    return beta_p + basis @ coef


def ridge_direct(y_vec, x_mat, shift_matrix) -> np.ndarray:
    x = np.asarray(x_mat, dtype=float)
    y = np.asarray(y_vec, dtype=float).reshape(-1, 1)
    return np.linalg.solve(x.T @ x + np.asarray(shift_matrix, dtype=float), x.T @ y)


def mixed_direct(y_vec, x_mat, omega, r_mat, r_rhs, theta, s2) -> np.ndarray:
    """Textbook augmented-system weighted solve for stochastic restrictions."""
    x = np.asarray(x_mat, dtype=float)
    y = np.asarray(y_vec, dtype=float).reshape(-1, 1)
    omega_inv = np.linalg.inv(np.asarray(omega, dtype=float))
    theta_inv = np.linalg.inv(np.asarray(theta, dtype=float))
    r = np.asarray(r_mat, dtype=float)
    rhs = np.asarray(r_rhs, dtype=float).reshape(-1, 1)
    lhs = x.T @ omega_inv @ x / s2 + r.T @ theta_inv @ r
    return np.linalg.solve(lhs, x.T @ omega_inv @ y / s2 + r.T @ theta_inv @ rhs)


def pinv_mls(y_vec, x_mat, omega) -> np.ndarray:
    """Unrestricted singular-dispersion estimator via numpy's own pinv."""
    x = np.asarray(x_mat, dtype=float)
    y = np.asarray(y_vec, dtype=float).reshape(-1, 1)
    om_pinv = np.linalg.pinv(np.asarray(omega, dtype=float), hermitian=True)
    return np.linalg.solve(x.T @ om_pinv @ x, x.T @ om_pinv @ y)


def fe_joint_gls(designs, responses, sigma_blocks):
    """Fixed-effects slopes by GLS on the design augmented with dummies.

    Stacks all equations, appends one intercept dummy per equation, runs
    whitened GLS on the full system, and returns the slope subvector and
    its covariance block.  Independent of every projector identity the
    package relies on.
    """
    n = len(designs)
    m = designs[0].shape[0]
    x = np.vstack(designs)
    dummies = np.kron(np.eye(n), np.ones((m, 1)))
    full = np.hstack([x, dummies])
    y = np.vstack([np.asarray(r, dtype=float).reshape(m, 1) for r in responses])
    omega = np.zeros((n * m, n * m))
    for i in range(n):
        omega[i * m:(i + 1) * m, i * m:(i + 1) * m] = sigma_blocks[i]
    chol = cholesky(omega, lower=True)
    fw = np.linalg.solve(chol, full)
    yw = np.linalg.solve(chol, y)
    gram = fw.T @ fw
    beta_full = np.linalg.solve(gram, fw.T @ yw)
    k = x.shape[1]
    cov_full = np.linalg.inv(gram)
    return beta_full[:k], cov_full[:k, :k]


def matrix_rank_svd(matrix) -> int:
    """numpy's own rank, as an independent cross-check of rank decisions."""
    arr = np.asarray(matrix, dtype=float)
    if arr.size == 0:
        return 0
    return int(np.linalg.matrix_rank(arr))
