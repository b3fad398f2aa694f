"""Fixed-effects panel estimation and the projector algebra behind it."""

import numpy as np
import pytest

from gmls import (
    DimensionMismatchError,
    DispersionNotPDError,
    IdentificationError,
    ProjectorSet,
    build_fe_model,
    build_projectors,
    centering_matrix,
    dummy_matrix,
    fe_drop_period,
    fe_gls,
    fe_mls,
    verify_theorem5,
    within_transform,
)

from conftest import random_spd
from oracles import fe_joint_gls, matrix_rank_svd


def _panel(rng, n=3, m=5, k=2, kron=True):
    designs = [rng.normal(size=(m, k)) for _ in range(n)]
    beta = rng.normal(size=(k, 1))
    effects = rng.uniform(-1.0, 1.0, size=n)
    if kron:
        sigma = random_spd(rng, m)
        blocks = [sigma] * n
    else:
        blocks = [random_spd(rng, m) for _ in range(n)]
        sigma = None
    responses = []
    for i in range(n):
        chol = np.linalg.cholesky(blocks[i])
        responses.append(designs[i] @ beta + effects[i]
                         + chol @ rng.normal(size=(m, 1)))
    if kron:
        model = build_fe_model(designs, responses, sigma=sigma)
    else:
        model = build_fe_model(designs, responses, sigma_blocks=blocks)
    return model, blocks


def test_centering_and_dummy_shapes():
    cm = centering_matrix(4)
    np.testing.assert_allclose(cm @ np.ones((4, 1)), 0.0, atol=1e-14)
    np.testing.assert_allclose(cm @ cm, cm, atol=1e-14)
    z = dummy_matrix(3, 4)
    assert z.shape == (12, 3)
    np.testing.assert_allclose(z.sum(axis=1), 1.0)


def test_build_fe_model_validation():
    rng = np.random.default_rng(100)
    designs = [rng.normal(size=(4, 2)) for _ in range(3)]
    responses = [rng.normal(size=(4, 1)) for _ in range(3)]
    with pytest.raises(DimensionMismatchError):
        build_fe_model(designs, responses)  # needs exactly one dispersion form
    with pytest.raises(DimensionMismatchError):
        build_fe_model(designs, responses, sigma=np.eye(4),
                       sigma_blocks=[np.eye(4)] * 3)
    with pytest.raises(DispersionNotPDError):
        build_fe_model(designs, responses, sigma=np.diag([1.0, 1.0, 1.0, 0.0]))
    with pytest.raises(DimensionMismatchError):
        build_fe_model(designs, responses[:-1], sigma=np.eye(4))


@pytest.mark.parametrize("kron", [True, False])
def test_projector_identities(kron):
    """Q reproduces the dummies, P annihilates them, and P is the
    dispersion-weighted within projector."""
    rng = np.random.default_rng(101)
    model, blocks = _panel(rng, kron=kron)
    ps = build_projectors(model)
    n, m = model.n, model.m
    z = dummy_matrix(n, m)
    np.testing.assert_allclose(ps.Q @ z, z, atol=1e-10)
    np.testing.assert_allclose(ps.P @ z, 0.0, atol=1e-10)
    np.testing.assert_allclose(ps.P @ ps.M, ps.P, atol=1e-10)
    np.testing.assert_allclose(ps.M @ ps.P @ ps.M, ps.P, atol=1e-10)
    full = np.zeros((n * m, n * m))
    for i in range(n):
        rows = model.equation_rows(i)
        full[rows, rows] = blocks[i]
    np.testing.assert_allclose(ps.P @ full @ ps.P, ps.P, atol=1e-10)


def test_projector_cap_refuses_large_models():
    rng = np.random.default_rng(102)
    model, _ = _panel(rng)
    with pytest.raises(ValueError):
        build_projectors(model, dense_cap=5)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("kron", [True, False])
def test_fe_gls_matches_dummy_regression_oracle(seed, kron):
    """Sweeping the effects must equal GLS on the dummy-augmented system."""
    rng = np.random.default_rng(900 + seed)
    model, blocks = _panel(rng, kron=kron)
    result = fe_gls(model)
    oracle_beta, oracle_cov = fe_joint_gls(
        [model.X[model.equation_rows(i)] for i in range(model.n)],
        [model.y[model.equation_rows(i)] for i in range(model.n)],
        blocks)
    np.testing.assert_allclose(result.beta_hat, oracle_beta, atol=1e-8)
    np.testing.assert_allclose(result.covariance_factor, oracle_cov, atol=1e-8)


def test_fe_gls_rejects_time_invariant_regressor():
    rng = np.random.default_rng(103)
    n, m = 3, 5
    designs = [np.hstack([np.ones((m, 1)), rng.normal(size=(m, 1))])
               for _ in range(n)]
    responses = [rng.normal(size=(m, 1)) for _ in range(n)]
    model = build_fe_model(designs, responses, sigma=random_spd(rng, m))
    with pytest.raises(IdentificationError):
        fe_gls(model)


def test_within_transform_model_rank():
    rng = np.random.default_rng(104)
    model, _ = _panel(rng)
    within = within_transform(model)
    n, m = model.n, model.m
    assert within.num_obs == n * m
    # centering wipes one direction per equation
    assert matrix_rank_svd(within.dispersion) == n * (m - 1)
    # the within response is the centered response
    cm = centering_matrix(m)
    big = np.kron(np.eye(n), cm)
    np.testing.assert_allclose(within.y, big @ model.y, atol=1e-12)


@pytest.mark.parametrize("kron", [True, False])
def test_fe_mls_equals_fe_gls(kron):
    rng = np.random.default_rng(105)
    model, _ = _panel(rng, kron=kron)
    a = fe_gls(model)
    b = fe_mls(model)
    scale = 1.0 + float(np.max(np.abs(a.beta_hat)))
    assert float(np.max(np.abs(a.beta_hat - b.beta_hat))) <= 1e-8 * scale
    np.testing.assert_allclose(a.covariance_factor, b.covariance_factor,
                               atol=1e-8)


@pytest.mark.parametrize("kron", [True, False])
def test_drop_period_invariance(kron):
    """Removing any single period after centering changes nothing."""
    rng = np.random.default_rng(106)
    model, _ = _panel(rng, kron=kron)
    reference = fe_mls(model)
    for t0 in range(1, model.m + 1):
        dropped = fe_drop_period(model, t0)
        scale = 1.0 + float(np.max(np.abs(reference.beta_hat)))
        assert float(np.max(np.abs(dropped.beta_hat - reference.beta_hat))) \
            <= 1e-8 * scale
        assert dropped.diagnostics["dropped_period"] == t0


def test_drop_period_range_check():
    rng = np.random.default_rng(107)
    model, _ = _panel(rng)
    with pytest.raises(ValueError):
        fe_drop_period(model, 0)
    with pytest.raises(ValueError):
        fe_drop_period(model, model.m + 1)


def test_equivalence_report_on_random_instance():
    rng = np.random.default_rng(108)
    model, _ = _panel(rng)
    report = verify_theorem5(model)
    assert report.passed
    assert report.beta_gap <= report.tolerance
    assert report.projector_gap <= report.tolerance


def test_equivalence_check_detects_corrupted_projector():
    # negative control: a perturbed P must fail the projector comparison
    rng = np.random.default_rng(109)
    model, _ = _panel(rng)
    ps = build_projectors(model)
    bad = ProjectorSet(M=ps.M, Q=ps.Q, P=ps.P + 1e-3, centering=ps.centering)
    report = verify_theorem5(model, projectors=bad)
    assert not report.projector_equal
    assert not report.passed


def test_fe_two_periods_smallest_case():
    rng = np.random.default_rng(110)
    model, blocks = _panel(rng, n=4, m=2, k=1)
    result = fe_gls(model)
    oracle_beta, _ = fe_joint_gls(
        [model.X[model.equation_rows(i)] for i in range(model.n)],
        [model.y[model.equation_rows(i)] for i in range(model.n)],
        blocks)
    np.testing.assert_allclose(result.beta_hat, oracle_beta, atol=1e-8)
    # with m = 2 dropping either period leaves the same estimate
    for t0 in (1, 2):
        np.testing.assert_allclose(fe_drop_period(model, t0).beta_hat,
                                   fe_mls(model).beta_hat, atol=1e-8)
