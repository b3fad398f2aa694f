"""Monte Carlo verification of the estimator theory.

Replications use counter-based Philox (4x64, 10 rounds) streams: the
design of a scenario is drawn once from the stream keyed (seed, 0) and
held fixed across replications, and replication j draws its errors from
the stream keyed (seed, 1 + j).  Identical (scenario, seed, replication)
triples therefore reproduce identical data in any execution order, and
aggregation fills a preallocated array indexed by replication, so
results do not depend on completion order.

Errors are always generated as F sqrt(Lambda) z with z standard normal,
F and Lambda from the spectral decomposition of the scenario dispersion.
Singular directions receive exactly zero variance, so data generated
under a singular dispersion satisfy its implicit restrictions to
machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GMLSError, InvalidConfigError
from .estimators import (
    constrained_singular_gls,
    gls,
    mls,
    ols,
    rgls,
    rols,
    tkn,
)
from .identify import combine_restrictions, extract_implicit_restrictions
from .model import (
    GaussMarkoffModel,
    LinearRestrictions,
    SURLayout,
    stack_sur,
)
from .panel import FEPanelModel, build_fe_model, fe_gls, fe_mls
from .spectral import SpectralDecomposition, spectral_decompose

REGULAR_GLS = "regular-gls"
SINGULAR_ADDING_UP = "singular-adding-up"
COLLINEAR_RESTRICTED = "collinear-restricted"
FE_KRONECKER = "fe-kronecker"
FE_BLOCKDIAG = "fe-blockdiag"

SCENARIOS = (REGULAR_GLS, SINGULAR_ADDING_UP, COLLINEAR_RESTRICTED,
             FE_KRONECKER, FE_BLOCKDIAG)

MODEL_ESTIMATORS = ("ols", "gls", "mls", "rols", "rgls", "tkn", "constrained")
PANEL_ESTIMATORS = ("fe-gls", "fe-mls")

DEFAULT_ESTIMATOR = {
    REGULAR_GLS: "gls",
    SINGULAR_ADDING_UP: "constrained",
    COLLINEAR_RESTRICTED: "constrained",
    FE_KRONECKER: "fe-gls",
    FE_BLOCKDIAG: "fe-gls",
}

# Threshold, in Monte Carlo standard errors, for the bias and covariance
# checks.  Four keeps the false-alarm rate per scalar check around 6e-5.
SE_MULTIPLE = 4.0


@dataclass(frozen=True)
class SimulationConfig:
    """Scenario description.

    ``coeff_count`` is per equation for the SUR scenario
    (singular-adding-up) and the total otherwise.  ``true_beta``
    overrides the default deterministic coefficient pattern; the
    collinear scenario adjusts the pattern so its restriction holds in
    truth.
    """

    scenario: str
    replications: int
    seed: int
    n: int = 3
    m: int = 4
    coeff_count: int = 3
    sigma2: float = 1.0
    true_beta: tuple | None = None

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise InvalidConfigError(f"unknown scenario {self.scenario!r}; "
                                     f"choose from {', '.join(SCENARIOS)}")
        if self.replications < 1:
            raise InvalidConfigError("replications must be positive")
        if self.n < 2 or self.m < 2 or self.coeff_count < 1:
            raise InvalidConfigError("dimensions must satisfy n >= 2, m >= 2, K >= 1")
        if self.sigma2 <= 0:
            raise InvalidConfigError("sigma2 must be positive")
        if self.scenario == COLLINEAR_RESTRICTED and self.coeff_count < 2:
            raise InvalidConfigError("collinear scenario needs at least 2 coefficients")
        if self.scenario == SINGULAR_ADDING_UP and self.n * self.coeff_count <= self.m:
            # with m implicit adding-up rows and K <= m parameters the
            # restrictions determine the estimate completely; the study
            # would measure nothing but rounding noise
            raise InvalidConfigError(
                "adding-up scenario needs n*coeff_count > m so some "
                "coefficient directions remain free")


@dataclass(frozen=True)
class Instance:
    """One replication's data set."""

    replication: int
    true_beta: np.ndarray
    model: GaussMarkoffModel | None = None
    panel: FEPanelModel | None = None
    restrictions: LinearRestrictions | None = None
    layout: SURLayout | None = None


@dataclass(frozen=True)
class MCReport:
    """Aggregated Monte Carlo results for one estimator.

    ``mc_se`` are the standard errors of the estimated means;
    ``covariance_se`` the delete-one jackknife standard errors of the
    sample covariance entries.  ``covariance_ok`` is None when the
    estimator's theoretical covariance is not checked.
    """

    scenario: str
    estimator: str
    replications: int
    seed: int
    true_beta: np.ndarray
    mean_beta: np.ndarray
    bias: np.ndarray
    mc_se: np.ndarray
    sample_covariance: np.ndarray
    theoretical_covariance: np.ndarray | None
    covariance_se: np.ndarray | None
    unbiased: bool
    covariance_ok: bool | None

    @property
    def passed(self) -> bool:
        return self.unbiased and self.covariance_ok is not False


def _rng(seed: int, stream: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _default_beta(k_total: int) -> np.ndarray:
    return 1.0 + 0.25 * np.arange(k_total, dtype=float)


def _random_spd(rng: np.random.Generator, dim: int,
                lo: float = 0.5, hi: float = 2.0) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    lam = rng.uniform(lo, hi, size=dim)
    return (q * lam) @ q.T


@dataclass(frozen=True)
class _Structure:
    """Replication-invariant part of a scenario."""

    kind: str
    true_beta: np.ndarray
    sigma2: float
    design: np.ndarray | None = None
    omega: np.ndarray | None = None
    omega_spec: SpectralDecomposition | None = None
    restrictions: LinearRestrictions | None = None
    layout: SURLayout | None = None
    ordering: str | None = None
    fe_designs: tuple | None = None
    fe_effects: np.ndarray | None = None
    fe_sigma: np.ndarray | None = None
    fe_sigma_blocks: tuple | None = None
    fe_sigma_specs: tuple | None = None


def _build_structure(config: SimulationConfig) -> _Structure:
    config.validate()
    rng = _rng(config.seed, 0)
    n, m, kw = config.n, config.m, config.coeff_count
    t_dim = n * m
    if config.scenario == SINGULAR_ADDING_UP:
        k_total = n * kw
    else:
        k_total = kw
    beta0 = np.asarray(config.true_beta, dtype=float) if config.true_beta is not None \
        else _default_beta(k_total)
    if beta0.shape != (k_total,):
        raise InvalidConfigError(f"true_beta must have {k_total} entries")

    if config.scenario == REGULAR_GLS:
        if t_dim <= k_total:
            raise InvalidConfigError("need n*m > coefficient count")
        design = rng.normal(size=(t_dim, k_total))
        omega = _random_spd(rng, t_dim)
        return _Structure(kind=config.scenario, true_beta=beta0,
                          sigma2=config.sigma2, design=design, omega=omega,
                          omega_spec=spectral_decompose(omega))

    if config.scenario == COLLINEAR_RESTRICTED:
        if t_dim <= k_total:
            raise InvalidConfigError("need n*m > coefficient count")
        design = rng.normal(size=(t_dim, k_total))
        design[:, -1] = design[:, 0]  # exact collinearity
        beta0 = beta0.copy()
        beta0[-1] = beta0[0]  # the repairing restriction holds in truth
        restr = np.zeros((1, k_total))
        restr[0, 0], restr[0, -1] = 1.0, -1.0
        res = LinearRestrictions.build(restr, np.zeros((1, 1)))
        omega = _random_spd(rng, t_dim)
        return _Structure(kind=config.scenario, true_beta=beta0,
                          sigma2=config.sigma2, design=design, omega=omega,
                          omega_spec=spectral_decompose(omega), restrictions=res)

    if config.scenario == SINGULAR_ADDING_UP:
        layout = SURLayout.build([rng.normal(size=(m, kw)) for _ in range(n)])
        a = np.full((n, 1), 1.0 / np.sqrt(n))
        proj = np.eye(n) - a @ a.T
        blocks = [proj @ np.diag(rng.uniform(0.5, 1.5, size=n)) @ proj
                  for _ in range(m)]
        design = np.vstack([layout.period_row(t) for t in range(m)])
        omega = np.zeros((t_dim, t_dim))
        for t, b in enumerate(blocks):
            omega[t * n:(t + 1) * n, t * n:(t + 1) * n] = b
        return _Structure(kind=config.scenario, true_beta=beta0,
                          sigma2=config.sigma2, design=design, omega=omega,
                          omega_spec=spectral_decompose(omega), layout=layout,
                          ordering="period")

    # fixed-effects scenarios
    if m <= 1 or n * (m - 1) <= k_total:
        raise InvalidConfigError("need n*(m-1) > coefficient count for FE scenarios")
    designs = tuple(rng.normal(size=(m, k_total)) for _ in range(n))
    effects = rng.uniform(-1.0, 1.0, size=(n, 1))
    if config.scenario == FE_KRONECKER:
        sigma = _random_spd(rng, m)
        return _Structure(kind=config.scenario, true_beta=beta0,
                          sigma2=config.sigma2, fe_designs=designs,
                          fe_effects=effects, fe_sigma=sigma,
                          fe_sigma_specs=(spectral_decompose(sigma),) * n)
    blocks = tuple(_random_spd(rng, m) for _ in range(n))
    return _Structure(kind=config.scenario, true_beta=beta0, sigma2=config.sigma2,
                      fe_designs=designs, fe_effects=effects,
                      fe_sigma_blocks=blocks,
                      fe_sigma_specs=tuple(spectral_decompose(b) for b in blocks))


def _draw_errors(spec: SpectralDecomposition, sigma2: float,
                 rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(size=(spec.rank, 1))
    return np.sqrt(sigma2) * (spec.eigenvectors_pos @
                              (np.sqrt(spec.eigenvalues_pos)[:, None] * z))


def _instance_from(structure: _Structure, config: SimulationConfig,
                   rep: int) -> Instance:
    rng = _rng(config.seed, 1 + rep)
    beta0 = structure.true_beta.reshape(-1, 1)
    if structure.kind in (REGULAR_GLS, COLLINEAR_RESTRICTED, SINGULAR_ADDING_UP):
        u = _draw_errors(structure.omega_spec, structure.sigma2, rng)
        y = structure.design @ beta0 + u
        model = GaussMarkoffModel(y=y, X=structure.design,
                                  dispersion=structure.omega,
                                  sigma2=structure.sigma2,
                                  ordering=structure.ordering)
        return Instance(replication=rep, true_beta=structure.true_beta,
                        model=model, restrictions=structure.restrictions,
                        layout=structure.layout)
    # fixed-effects kinds
    n = config.n
    responses = []
    for i in range(n):
        u_i = _draw_errors(structure.fe_sigma_specs[i], structure.sigma2, rng)
        responses.append(structure.fe_designs[i] @ beta0
                         + structure.fe_effects[i, 0] + u_i)
    panel = build_fe_model(structure.fe_designs, responses,
                           sigma=structure.fe_sigma,
                           sigma_blocks=structure.fe_sigma_blocks)
    return Instance(replication=rep, true_beta=structure.true_beta, panel=panel)


def generate_instance(config: SimulationConfig, replication: int) -> Instance:
    """Data for one replication; the design parts never vary with it."""
    if replication < 0:
        raise InvalidConfigError("replication index must be nonnegative")
    return _instance_from(_build_structure(config), config, replication)


def _estimate_once(name: str, inst: Instance, structure: _Structure):
    if name in PANEL_ESTIMATORS:
        if inst.panel is None:
            raise InvalidConfigError(f"estimator {name!r} needs a panel scenario")
        return fe_gls(inst.panel) if name == "fe-gls" else fe_mls(inst.panel)
    if inst.model is None:
        raise InvalidConfigError(f"estimator {name!r} needs a model scenario")
    model, spec = inst.model, structure.omega_spec
    res = inst.restrictions
    if name == "ols":
        return ols(model)
    if name == "gls":
        return gls(model)
    if name == "mls":
        return mls(model, omega_spec=spec)
    if name in ("rols", "rgls", "tkn"):
        if res is None:
            raise InvalidConfigError(f"estimator {name!r} needs explicit restrictions")
        if name == "rols":
            return rols(model, res)
        if name == "rgls":
            return rgls(model, res)
        return tkn(model, res, omega_spec=spec)
    if name == "constrained":
        explicit = res if res is not None \
            else LinearRestrictions.empty(model.num_params)
        implicit = extract_implicit_restrictions(model, omega_spec=spec)
        combined = combine_restrictions(explicit, implicit)
        return constrained_singular_gls(model, combined, omega_spec=spec)
    raise InvalidConfigError(f"unknown estimator {name!r}")


def _jackknife_covariance_se(estimates: np.ndarray) -> np.ndarray:
    """Delete-one jackknife SEs for each sample covariance entry."""
    reps, k_dim = estimates.shape
    total = estimates.sum(axis=0)
    cross = estimates.T @ estimates
    outer = estimates[:, :, None] * estimates[:, None, :]
    mean_wo = (total[None, :] - estimates) / (reps - 1)
    cross_wo = cross[None, :, :] - outer
    cov_wo = (cross_wo - (reps - 1) * mean_wo[:, :, None] * mean_wo[:, None, :]) \
        / (reps - 2)
    center = cov_wo.mean(axis=0)
    return np.sqrt((reps - 1) / reps * ((cov_wo - center) ** 2).sum(axis=0))


def run_study(config: SimulationConfig, estimator: str | None = None,
              bias_shift: float = 0.0) -> MCReport:
    """Run the full replication loop for one estimator.

    ``bias_shift`` adds a constant to every estimate and exists as a
    negative control: any nonzero shift beyond the Monte Carlo noise
    must make the bias check fail.
    """
    structure = _build_structure(config)
    name = estimator if estimator is not None else DEFAULT_ESTIMATOR[structure.kind]
    reps = config.replications
    k_dim = structure.true_beta.size
    estimates = np.empty((reps, k_dim))
    theoretical = None
    for rep in range(reps):
        inst = _instance_from(structure, config, rep)
        try:
            result = _estimate_once(name, inst, structure)
        except GMLSError as exc:
            raise type(exc)(f"replication {rep}: {exc}") from exc
        estimates[rep] = result.beta_hat.ravel() + bias_shift
        if rep == 0:
            theoretical = config.sigma2 * result.covariance_factor
    mean_beta = estimates.mean(axis=0)
    bias = mean_beta - structure.true_beta
    mc_se = estimates.std(axis=0, ddof=1) / np.sqrt(reps)
    sample_cov = np.cov(estimates.T, ddof=1).reshape(k_dim, k_dim)
    cov_se = None
    cov_ok = None
    if theoretical is not None and reps > 2:
        cov_se = _jackknife_covariance_se(estimates)
        cov_ok = bool(np.all(np.abs(sample_cov - theoretical)
                             <= SE_MULTIPLE * cov_se))
    unbiased = bool(np.all(np.abs(bias) <= SE_MULTIPLE * mc_se))
    return MCReport(scenario=structure.kind, estimator=name, replications=reps,
                    seed=config.seed, true_beta=structure.true_beta,
                    mean_beta=mean_beta, bias=bias, mc_se=mc_se,
                    sample_covariance=sample_cov,
                    theoretical_covariance=theoretical, covariance_se=cov_se,
                    unbiased=unbiased, covariance_ok=cov_ok)
