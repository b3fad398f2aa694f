"""Command line frontend.

Four commands: estimate, diagnose, panel, simulate.  Matrix inputs are
headerless CSV; panel data is long-format CSV with the header
``equation,period,response,x1,...,xK``; restriction files carry one row
per restriction with the coefficient columns first and the right-hand
side last.

Exit codes: 0 success, 1 input or usage problems, 2 identification or
model precondition failures, 3 numerical failures past the rank checks,
4 a simulation's statistical checks failed.  Refusals name the violated
condition by its catalogue label (e.g. "Eq. (4) identification failed");
the README lists the catalogue.

Machine output (--output machine) is canonical JSON with sorted keys and
shortest round-trip floats, byte-identical across runs on the same
inputs.  Human output renders the same content at 6 significant digits.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import (
    DesignRankDeficientError,
    DimensionMismatchError,
    DispersionNotNNDError,
    DispersionNotPDError,
    DispersionSingularError,
    GMLSError,
    IdentificationError,
    InconsistentRestrictionsError,
    IndefiniteInputError,
    InfeasibleParticularError,
    InvalidConfigError,
    NonFiniteError,
    NonSymmetricError,
    NullVectorMismatchError,
    ReducedGramSingularError,
    ResponseOutsideRangeError,
    RestrictionGramSingularError,
    ShiftInsufficientError,
    TheilRankConditionError,
    TooFewObservationsError,
)
from .estimators import (
    RidgeSpec,
    StochasticRestrictions,
    constrained_singular_gls,
    gls,
    mls,
    ols,
    rgls,
    ridge,
    rols,
    stochastic_restricted_gls,
    tkn,
)
from .identify import (
    check_joint_identification,
    check_mls_invertibility,
    check_restriction_consistency,
    check_theil_condition,
    combine_restrictions,
    extract_implicit_restrictions,
)
from .model import LinearRestrictions, SURLayout, build_model, stack_sur
from .montecarlo import DEFAULT_ESTIMATOR, SCENARIOS, SimulationConfig, run_study
from .panel import build_fe_model, fe_drop_period, fe_gls, fe_mls, verify_theorem5
from .spectral import RankReport, numeric_rank, spectral_decompose

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PRECONDITION = 2
EXIT_NUMERICAL = 3
EXIT_STATISTICAL = 4

# Labels of the checkable conditions, used verbatim in refusal messages.
COND_CONSISTENCY = "Eq. (3) restriction consistency"
COND_IDENTIFICATION = "Eq. (4) identification"
COND_WHITENED_RANK = "Eq. (14) whitened-design rank"
COND_COMBINED = "Eq. (20) combined-restriction consistency"

TOL_ENV_VAR = "GMLS_TOL"

_INPUT_ERRORS = (DimensionMismatchError, NonFiniteError, NonSymmetricError,
                 InvalidConfigError)
_PRECONDITION_ERRORS = (DispersionNotNNDError, DispersionNotPDError,
                        DispersionSingularError, ResponseOutsideRangeError,
                        TooFewObservationsError, InconsistentRestrictionsError,
                        DesignRankDeficientError, IdentificationError,
                        TheilRankConditionError, NullVectorMismatchError,
                        InfeasibleParticularError, IndefiniteInputError)
_NUMERICAL_ERRORS = (ReducedGramSingularError, RestrictionGramSingularError,
                     ShiftInsufficientError)


class CommandFailure(Exception):
    """Abort the current command with a message and exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# input parsing

def _read_lines(path: str) -> list:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read().splitlines()
    except OSError as exc:
        raise CommandFailure(EXIT_INPUT, f"cannot read {path}: {exc}") from exc


def _parse_row(path: str, lineno: int, line: str) -> list:
    cells = [c.strip() for c in line.split(",")]
    try:
        return [float(c) for c in cells]
    except ValueError:
        raise CommandFailure(
            EXIT_INPUT, f"{path}: line {lineno}: malformed numeric row") from None


def read_matrix(path: str) -> np.ndarray:
    """Headerless CSV matrix; ragged or non-numeric rows are input errors."""
    rows = []
    width = None
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        row = _parse_row(path, lineno, line)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CommandFailure(
                EXIT_INPUT,
                f"{path}: line {lineno}: expected {width} columns, got {len(row)}")
        rows.append(row)
    if not rows:
        raise CommandFailure(EXIT_INPUT, f"{path}: no data rows")
    return np.array(rows, dtype=float)


def read_restrictions(path: str) -> LinearRestrictions:
    """Rows of coefficients with the right-hand side in the final column.

    An optional non-numeric header row is skipped.
    """
    lines = _read_lines(path)
    start = 0
    if lines:
        try:
            [float(c) for c in lines[0].split(",")]
        except ValueError:
            start = 1
    rows = []
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        row = _parse_row(path, lineno, line)
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CommandFailure(
                EXIT_INPUT,
                f"{path}: line {lineno}: expected {width} columns, got {len(row)}")
        rows.append(row)
    if not rows:
        raise CommandFailure(EXIT_INPUT, f"{path}: no restriction rows")
    if width < 2:
        raise CommandFailure(
            EXIT_INPUT, f"{path}: need coefficient columns plus a final rhs column")
    data = np.array(rows, dtype=float)
    return LinearRestrictions.build(data[:, :-1], data[:, -1:])


def read_panel(path: str):
    """Long-format panel CSV: header equation,period,response,x1,...,xK.

    Returns (designs, responses, equations, periods) with per-equation
    blocks ordered by the sorted period labels.
    """
    lines = _read_lines(path)
    if not lines:
        raise CommandFailure(EXIT_INPUT, f"{path}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    if len(header) < 4 or header[:3] != ["equation", "period", "response"] \
            or any(h != f"x{j + 1}" for j, h in enumerate(header[3:])):
        raise CommandFailure(
            EXIT_INPUT,
            f"{path}: line 1: header must be equation,period,response,x1,...,xK")
    k_dim = len(header) - 3
    cells = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [c.strip() for c in line.split(",")]
        if len(parts) != len(header):
            raise CommandFailure(
                EXIT_INPUT,
                f"{path}: line {lineno}: expected {len(header)} columns, "
                f"got {len(parts)}")
        try:
            eq, per = int(parts[0]), int(parts[1])
            values = [float(c) for c in parts[2:]]
        except ValueError:
            raise CommandFailure(
                EXIT_INPUT, f"{path}: line {lineno}: malformed numeric row") from None
        if (eq, per) in cells:
            raise CommandFailure(
                EXIT_INPUT,
                f"{path}: line {lineno}: duplicate (equation, period) = ({eq}, {per})")
        cells[(eq, per)] = values
    equations = sorted({eq for eq, _ in cells})
    periods = sorted({per for _, per in cells})
    missing = [(eq, per) for eq in equations for per in periods
               if (eq, per) not in cells]
    if missing:
        raise CommandFailure(
            EXIT_INPUT,
            f"{path}: incomplete grid, first missing (equation, period) = "
            f"{missing[0]}")
    designs, responses = [], []
    for eq in equations:
        block = np.array([cells[(eq, per)][1:] for per in periods], dtype=float)
        resp = np.array([[cells[(eq, per)][0]] for per in periods], dtype=float)
        designs.append(block.reshape(len(periods), k_dim))
        responses.append(resp)
    return designs, responses, equations, periods


# ---------------------------------------------------------------------------
# rendering

def _clean(obj):
    """Recursively convert to JSON-serializable built-ins."""
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, RankReport):
        return {"rank": obj.numeric_rank, "values": _clean(obj.values),
                "tolerance": float(obj.tolerance), "deficient": bool(obj.deficient)}
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _fmt_number(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _human_lines(obj, lines, indent=0):
    pad = "  " * indent
    if isinstance(obj, dict):
        for key, value in obj.items():
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}:")
                _human_lines(value, lines, indent + 1)
            else:
                lines.append(f"{pad}{key}: {_fmt_number(value)}")
    elif isinstance(obj, list):
        if obj and all(isinstance(v, list) for v in obj):
            for row in obj:
                lines.append(pad + "  ".join(format(v, "12.6g") if isinstance(v, float)
                                             else str(v) for v in row))
        elif all(not isinstance(v, (dict, list)) for v in obj):
            lines.append(pad + "[" + ", ".join(_fmt_number(v) for v in obj) + "]")
        else:
            for item in obj:
                _human_lines(item, lines, indent)
    else:
        lines.append(pad + _fmt_number(obj))


def emit(doc: dict, output: str) -> None:
    doc = _clean(doc)
    if output == "machine":
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        lines = []
        _human_lines(doc, lines)
        sys.stdout.write("\n".join(lines) + "\n")


def _rank_entry(report: RankReport) -> dict:
    return {"rank": report.numeric_rank, "tolerance": float(report.tolerance),
            "deficient": bool(report.deficient)}


def _witness_entry(witness) -> dict:
    entry = {
        "kind": witness.kind.value,
        "certificate_d": witness.d.ravel().tolist(),
        "common_vector_s": witness.s.ravel().tolist(),
        "null_weights_a": witness.a.ravel().tolist(),
    }
    if witness.violating_equation is not None:
        entry["violating_equation"] = int(witness.violating_equation)
    if witness.note:
        entry["note"] = witness.note
    return entry


def _result_entry(result) -> dict:
    return {
        "coefficients": result.beta_hat.ravel().tolist(),
        "covariance_factor": result.covariance_factor.tolist(),
        "residuals": result.residuals.ravel().tolist(),
        "diagnostics": {k: v for k, v in sorted(result.diagnostics.items())
                        if not isinstance(v, np.ndarray)},
    }


# ---------------------------------------------------------------------------
# model assembly shared by estimate and diagnose

def _load_model(args, tol):
    """Build the working model from either matrix files or a SUR file."""
    layout = None
    sigma_block = None
    if getattr(args, "sur", None):
        if not getattr(args, "sigma", None):
            raise CommandFailure(EXIT_INPUT, "--sur requires --sigma")
        designs, responses, _, periods = read_panel(args.sur)
        layout = SURLayout.build(designs)
        sigma_block = read_matrix(args.sigma)
        if sigma_block.shape != (layout.n, layout.n):
            raise CommandFailure(
                EXIT_INPUT,
                f"--sigma must be {layout.n} x {layout.n} for {layout.n} equations, "
                f"got {sigma_block.shape}")
        model = stack_sur(layout, responses, [sigma_block] * len(periods),
                          order="period", tol=tol)
        return model, layout, sigma_block
    if not args.design or not args.response:
        raise CommandFailure(EXIT_INPUT,
                             "need --design and --response (or --sur with --sigma)")
    design = read_matrix(args.design)
    response = read_matrix(args.response)
    if response.shape[1] != 1:
        response = response.reshape(-1, 1)
    if args.dispersion:
        omega = read_matrix(args.dispersion)
    else:
        omega = np.eye(design.shape[0])
    model = build_model(response, design, omega, tol=tol)
    return model, None, None


def _maybe_witness(model, layout, sigma_block, tol):
    if layout is None or sigma_block is None:
        return None
    try:
        return check_theil_condition(layout, sigma_block, tol=tol)
    except GMLSError:
        return None


# ---------------------------------------------------------------------------
# commands

_METHODS = ("ols", "gls", "rols", "rgls", "ridge", "mixed", "mls", "tkn",
            "constrained")


def cmd_estimate(args) -> int:
    tol = args.tol
    model, layout, sigma_block = _load_model(args, tol)
    restrictions = read_restrictions(args.restrictions) if args.restrictions else None
    if restrictions is not None and restrictions.num_params != model.num_params:
        raise CommandFailure(
            EXIT_INPUT,
            f"restrictions have {restrictions.num_params} coefficient columns, "
            f"design has {model.num_params}")
    method = args.method
    needs_restrictions = method in ("rols", "rgls", "tkn", "mixed")
    if needs_restrictions and restrictions is None:
        raise CommandFailure(EXIT_INPUT, f"method {method} requires --restrictions")
    explicit = restrictions if restrictions is not None \
        else LinearRestrictions.empty(model.num_params)

    checks = {}
    # identification pass before any solving
    if method in ("rols", "rgls", "tkn", "constrained") and explicit.count:
        ok, report = check_restriction_consistency(explicit, tol=tol)
        checks["restriction_consistency"] = {"condition": COND_CONSISTENCY,
                                             "holds": ok, **_rank_entry(report)}
        if not ok:
            raise CommandFailure(EXIT_PRECONDITION, f"{COND_CONSISTENCY} failed")
    if method in ("rols", "rgls", "constrained"):
        ok, report = check_joint_identification(model.X, explicit, tol=tol)
        checks["identification"] = {"condition": COND_IDENTIFICATION,
                                    "holds": ok, **_rank_entry(report)}
        if not ok:
            raise CommandFailure(EXIT_PRECONDITION, f"{COND_IDENTIFICATION} failed")
    omega_spec = None
    if method in ("mls", "tkn"):
        omega_spec = spectral_decompose(model.dispersion, tol=tol)
        ok, report = check_mls_invertibility(model.X, omega_spec, tol=tol)
        checks["whitened_rank"] = {"condition": COND_WHITENED_RANK,
                                   "holds": ok, **_rank_entry(report)}
        if not ok:
            witness = _maybe_witness(model, layout, sigma_block, tol)
            detail = f"{COND_WHITENED_RANK} failed"
            if witness is not None:
                detail += (f"; witness kind {witness.kind.value}, "
                           f"certificate d = {witness.d.ravel().tolist()}")
            raise CommandFailure(EXIT_PRECONDITION, detail)
    combined = None
    if method == "constrained":
        omega_spec = spectral_decompose(model.dispersion, tol=tol)
        implicit = extract_implicit_restrictions(model, tol=tol,
                                                 omega_spec=omega_spec)
        combined = combine_restrictions(explicit, implicit, tol=tol)
        checks["combined_consistency"] = {"condition": COND_COMBINED,
                                          "holds": combined.consistent}
        if not combined.consistent:
            raise CommandFailure(EXIT_PRECONDITION, f"{COND_COMBINED} failed")

    if method == "ols":
        result = ols(model, tol=tol)
    elif method == "gls":
        result = gls(model, tol=tol)
    elif method == "rols":
        result = rols(model, explicit, tol=tol)
    elif method == "rgls":
        result = rgls(model, explicit, tol=tol)
    elif method == "ridge":
        if args.ridge_psi is None:
            raise CommandFailure(EXIT_INPUT, "method ridge requires --ridge-psi")
        result = ridge(model, RidgeSpec.scalar(args.ridge_psi), tol=tol)
    elif method == "mixed":
        if not args.theta:
            raise CommandFailure(EXIT_INPUT, "method mixed requires --theta")
        theta = read_matrix(args.theta)
        sres = StochasticRestrictions.build(explicit.R, explicit.r, theta)
        result = stochastic_restricted_gls(model, sres, tol=tol)
    elif method == "mls":
        result = mls(model, tol=tol, omega_spec=omega_spec)
    elif method == "tkn":
        result = tkn(model, explicit, tol=tol, omega_spec=omega_spec)
    else:  # constrained
        result = constrained_singular_gls(model, combined, tol=tol,
                                          omega_spec=omega_spec)

    doc = {
        "command": "estimate",
        "inputs": {
            "observations": model.num_obs,
            "parameters": model.num_params,
            "design_rank": _rank_entry(numeric_rank(model.X, tol=tol)),
            "restriction_rows": explicit.count,
            "tolerance": "default" if tol is None else float(tol),
        },
        "checks": checks,
        "results": {"method": method, **_result_entry(result)},
        "warnings": [],
        "exit_status": EXIT_OK,
    }
    emit(doc, args.output)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    tol = args.tol
    model, layout, sigma_block = _load_model(args, tol)
    restrictions = read_restrictions(args.restrictions) if args.restrictions else None
    if restrictions is not None and restrictions.num_params != model.num_params:
        raise CommandFailure(
            EXIT_INPUT,
            f"restrictions have {restrictions.num_params} coefficient columns, "
            f"design has {model.num_params}")
    explicit = restrictions if restrictions is not None \
        else LinearRestrictions.empty(model.num_params)
    checks = {}
    if explicit.count:
        ok, report = check_restriction_consistency(explicit, tol=tol)
        checks["restriction_consistency"] = {"condition": COND_CONSISTENCY,
                                             "holds": ok, **_rank_entry(report)}
    ok, report = check_joint_identification(model.X, explicit, tol=tol)
    checks["identification"] = {"condition": COND_IDENTIFICATION, "holds": ok,
                                **_rank_entry(report)}
    omega_spec = spectral_decompose(model.dispersion, tol=tol)
    ok, report = check_mls_invertibility(model.X, omega_spec, tol=tol)
    checks["whitened_rank"] = {"condition": COND_WHITENED_RANK, "holds": ok,
                               **_rank_entry(report)}
    implicit = extract_implicit_restrictions(model, tol=tol, omega_spec=omega_spec)
    combined = combine_restrictions(explicit, implicit, tol=tol)
    checks["combined_consistency"] = {"condition": COND_COMBINED,
                                      "holds": combined.consistent,
                                      "explicit_rows": explicit.count,
                                      "implicit_rows": implicit.count}
    doc = {
        "command": "diagnose",
        "inputs": {
            "observations": model.num_obs,
            "parameters": model.num_params,
            "dispersion_rank": omega_spec.rank,
            "tolerance": "default" if tol is None else float(tol),
        },
        "checks": checks,
        "warnings": [],
        "exit_status": EXIT_OK,
    }
    if layout is not None and sigma_block is not None:
        try:
            witness = check_theil_condition(layout, sigma_block, tol=tol)
            doc["witness"] = _witness_entry(witness)
        except NullVectorMismatchError as exc:
            doc["witness"] = {"kind": "not-applicable", "reason": str(exc)}
    emit(doc, args.output)
    return EXIT_OK


def cmd_panel(args) -> int:
    designs, responses, _, periods = read_panel(args.panel)
    sigma = read_matrix(args.sigma)
    m = len(periods)
    if sigma.shape != (m, m):
        raise CommandFailure(
            EXIT_INPUT, f"--sigma must be {m} x {m} for {m} periods, got {sigma.shape}")
    model = build_fe_model(designs, responses, sigma=sigma)
    if args.drop_period is not None and not 1 <= args.drop_period <= model.m:
        raise CommandFailure(
            EXIT_INPUT,
            f"--drop-period must be in 1..{model.m}, got {args.drop_period}")
    res_gls = fe_gls(model)
    res_mls = fe_mls(model)
    drops = [args.drop_period] if args.drop_period is not None \
        else list(range(1, model.m + 1))
    drop_entries = {}
    max_gap = 0.0
    for t0 in drops:
        res_drop = fe_drop_period(model, t0)
        gap = float(np.max(np.abs(res_drop.beta_hat - res_mls.beta_hat)))
        max_gap = max(max_gap, gap)
        drop_entries[f"period_{t0}"] = {
            "coefficients": res_drop.beta_hat.ravel().tolist(),
            "gap_to_mls": gap,
        }
    report = verify_theorem5(model)
    doc = {
        "command": "panel",
        "inputs": {"equations": model.n, "periods": model.m,
                   "parameters": model.num_params},
        "results": {
            "fe_gls": _result_entry(res_gls),
            "fe_mls": _result_entry(res_mls),
            "drop_period": drop_entries,
            "max_drop_gap": max_gap,
            "equivalence": {
                "beta_gap": report.beta_gap,
                "projector_gap": report.projector_gap,
                "tolerance": report.tolerance,
                "passed": report.passed,
            },
        },
        "warnings": [],
        "exit_status": EXIT_OK,
    }
    emit(doc, args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.reps < 100:
        raise CommandFailure(EXIT_INPUT,
                             f"--reps must be at least 100, got {args.reps}")
    if args.scenario == "singular-adding-up":
        # per-equation count; total must exceed the m implicit rows
        default_k = 2
    else:
        default_k = 3
    config = SimulationConfig(
        scenario=args.scenario,
        replications=args.reps,
        seed=args.seed,
        n=args.equations,
        m=args.periods,
        coeff_count=args.coefficients if args.coefficients is not None else default_k,
        sigma2=args.sigma2,
    )
    estimator = args.estimator if args.estimator else DEFAULT_ESTIMATOR[args.scenario]
    report = run_study(config, estimator, bias_shift=args.inject_bias)
    status = EXIT_OK if report.passed else EXIT_STATISTICAL
    doc = {
        "command": "simulate",
        "inputs": {"scenario": report.scenario, "estimator": report.estimator,
                   "replications": report.replications, "seed": report.seed,
                   "injected_bias": args.inject_bias},
        "results": {
            "true_beta": report.true_beta.tolist(),
            "mean_beta": report.mean_beta.tolist(),
            "bias": report.bias.tolist(),
            "mc_se": report.mc_se.tolist(),
            "sample_covariance": report.sample_covariance.tolist(),
            "theoretical_covariance":
                None if report.theoretical_covariance is None
                else report.theoretical_covariance.tolist(),
            "unbiased": report.unbiased,
            "covariance_ok": report.covariance_ok,
            "passed": report.passed,
        },
        "warnings": [] if report.passed else ["statistical checks failed"],
        "exit_status": status,
    }
    emit(doc, args.output)
    return status


# ---------------------------------------------------------------------------
# argument parsing and dispatch

def _tol_default():
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise CommandFailure(EXIT_INPUT,
                             f"{TOL_ENV_VAR} must be a number, got {raw!r}") from None


def _add_shared(parser, with_model=True):
    parser.add_argument("--tol", type=float, default=None,
                        help="rank tolerance override (default: adaptive; "
                             f"env {TOL_ENV_VAR})")
    parser.add_argument("--output", choices=("human", "machine"), default="human")
    if with_model:
        parser.add_argument("--design", help="design matrix CSV")
        parser.add_argument("--response", help="response vector CSV")
        parser.add_argument("--dispersion",
                            help="dispersion matrix CSV (default: identity)")
        parser.add_argument("--restrictions",
                            help="restriction rows CSV, rhs in final column")
        parser.add_argument("--sur", help="SUR system as long-format panel CSV")
        parser.add_argument("--sigma",
                            help="per-period dispersion block CSV (with --sur)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmls",
        description="Estimation and diagnostics for general Gauss-Markoff models")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    est = sub.add_parser("estimate", help="fit one estimator")
    _add_shared(est)
    est.add_argument("--method", choices=_METHODS, required=True)
    est.add_argument("--ridge-psi", type=float, default=None,
                     help="scalar ridge shift (method ridge)")
    est.add_argument("--theta", help="stochastic restriction dispersion CSV "
                                     "(method mixed)")

    diag = sub.add_parser("diagnose", help="run the identification checks")
    _add_shared(diag)

    pan = sub.add_parser("panel", help="fixed-effects panel estimation")
    pan.add_argument("--panel", required=True, help="long-format panel CSV")
    pan.add_argument("--sigma", required=True, help="intertemporal dispersion CSV")
    pan.add_argument("--drop-period", type=int, default=None,
                     help="1-based period to drop (default: all, one at a time)")
    _add_shared(pan, with_model=False)

    sim = sub.add_parser("simulate", help="Monte Carlo verification")
    sim.add_argument("--scenario", choices=SCENARIOS, required=True)
    sim.add_argument("--reps", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=20240801)
    sim.add_argument("--estimator", default=None)
    sim.add_argument("--equations", type=int, default=3,
                     help="equations n (default 3)")
    sim.add_argument("--periods", type=int, default=4, help="periods m (default 4)")
    sim.add_argument("--coefficients", type=int, default=None,
                     help="coefficient count (per equation for singular-adding-up)")
    sim.add_argument("--sigma2", type=float, default=1.0)
    sim.add_argument("--inject-bias", type=float, default=0.0,
                     help="negative control: shift every estimate by this amount")
    _add_shared(sim, with_model=False)

    return parser


_DISPATCH = {
    "estimate": cmd_estimate,
    "diagnose": cmd_diagnose,
    "panel": cmd_panel,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold into the input-error code
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        if args.tol is None:
            args.tol = _tol_default()
        return _DISPATCH[args.subcommand](args)
    except CommandFailure as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except _INPUT_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except _NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERICAL
    except _PRECONDITION_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PRECONDITION
    except GMLSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PRECONDITION
    except np.linalg.LinAlgError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
