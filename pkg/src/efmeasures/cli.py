"""Command-line frontend.

Subcommands::

    entropy     closed-form entropies from explicit parameters
    divergence  closed-form divergences between two parameter sets
    estimate    closed-form MLE from CSV observations, optional plug-in measure
    verify      closed form vs numerical oracle over a built-in grid
    families    list the implemented families and their decompositions

Reports are JSON (default) or CSV on stdout. Numbers are serialized as the
shortest decimal that round-trips binary64, so identical invocations with
identical seeds produce byte-identical reports.

Exit codes: 0 success, 1 verification failed, 2 usage error, 3 domain error
(out-of-domain parameters, bad observations, degenerate samples), 4 oracle
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .errors import ConvergenceError, DomainError
from .families import Family, family_names, get_family
from .measures import (
    MEASURE_NAMES,
    MeasureResult,
    evaluate_measure,
    measure_needs_alpha,
    measure_needs_pair,
)
from .estimation import MeasureRequest, SampleSet, mle, plugin_measure
from .oracle import DISCRETE_SUM, MONTE_CARLO, QUADRATURE, OracleConfig, oracle_measure

ENTROPY_MEASURES = ("renyi", "tsallis", "shannon")
DIVERGENCE_MEASURES = tuple(m for m in MEASURE_NAMES if measure_needs_pair(m))

VERIFY_ALPHAS = (0.5, 0.9, 1.0 - 1e-4, 1.0 + 1e-4, 2.0)

# Closed form vs oracle agreement floors per oracle method; Monte Carlo
# relies purely on its reported 3-sigma bound.
VERIFY_BASE_TOL = {QUADRATURE: 1e-7, DISCRETE_SUM: 1e-9, MONTE_CARLO: 0.0}

# Built-in parameter pairs for `verify`, chosen so that every grid alpha
# (including 2) keeps the mixed parameter inside the natural domain.
VERIFY_PAIRS: dict[str, tuple[dict, dict]] = {
    "exponential": ({"rate": 1.0}, {"rate": 1.5}),
    "poisson": ({"rate": 1.0}, {"rate": 2.5}),
    "bernoulli": ({"p": 0.3}, {"p": 0.6}),
    "gaussian": ({"mu": 0.0, "var": 1.0}, {"mu": 0.5, "var": 1.2}),
    "mvn": (
        {"mu": [0.0, 0.0], "sigma": [[1.0, 0.2], [0.2, 0.8]]},
        {"mu": [0.4, -0.3], "sigma": [[1.1, -0.1], [-0.1, 0.9]]},
    ),
    "laplacian": ({"scale": 1.0}, {"scale": 1.4}),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="efmeasures",
        description="Closed-form information measures for exponential families.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p: argparse.ArgumentParser, *, params2: bool = False) -> None:
        p.add_argument("--family", required=True, help="family name")
        p.add_argument("--params", required=True, help="source parameters as JSON")
        if params2:
            p.add_argument("--params2", required=True, help="second parameter set as JSON")
        p.add_argument("--measure", required=True, help="measure name")
        p.add_argument(
            "--alpha",
            action="append",
            type=float,
            default=None,
            help="order alpha (> 0); repeatable",
        )
        p.add_argument("--output", choices=("json", "csv"), default="json")

    p_ent = sub.add_parser("entropy", help="entropies from explicit parameters")
    add_common(p_ent)

    p_div = sub.add_parser("divergence", help="divergences between two parameter sets")
    add_common(p_div, params2=True)

    p_est = sub.add_parser("estimate", help="closed-form MLE from CSV observations")
    p_est.add_argument("--family", required=True)
    p_est.add_argument("--data", required=True, help="CSV file, one observation per row")
    p_est.add_argument("--data2", default=None, help="second CSV file (divergence measures)")
    p_est.add_argument("--measure", default=None, help="optional plug-in measure")
    p_est.add_argument("--alpha", action="append", type=float, default=None)
    p_est.add_argument("--dim", type=int, default=None, help="dimension for the mvn family")
    p_est.add_argument("--output", choices=("json", "csv"), default="json")

    p_ver = sub.add_parser("verify", help="closed form vs oracle over the built-in grid")
    p_ver.add_argument("--family", default=None, help="restrict the grid to one family")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--mc-samples", dest="mc_samples", type=int, default=1_000_000)
    p_ver.add_argument("--abs-tol", dest="abs_tol", type=float, default=1e-10)
    p_ver.add_argument("--output", choices=("json", "csv"), default="json")

    sub.add_parser("families", help="list families and their decompositions")
    return parser


# --------------------------------------------------------------------------
# Input parsing helpers.
# --------------------------------------------------------------------------


def _parse_params(parser, family_name: str, text: str, flag: str):
    """Parse a source-parameter JSON object; schema problems are usage errors."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        parser.error(f"{flag}: invalid JSON ({exc})")
    if not isinstance(obj, dict):
        parser.error(f"{flag}: expected a JSON object")
    key = family_name.strip().lower().replace("_", "-")
    if key in ("mvn", "gaussian-multivariate", "multivariate-gaussian"):
        expected = {"mu", "sigma"}
    else:
        try:
            expected = set(get_family(key).source_keys)
        except ValueError as exc:
            parser.error(str(exc))
    if set(obj) != expected:
        parser.error(
            f"{flag}: expected keys {sorted(expected)} for family {family_name!r}, "
            f"got {sorted(obj)}"
        )
    return obj


def _family_from_params(parser, family_name: str, params_obj: dict) -> Family:
    key = family_name.strip().lower().replace("_", "-")
    if key in ("mvn", "gaussian-multivariate", "multivariate-gaussian"):
        mu = params_obj.get("mu")
        if not isinstance(mu, list) or not mu:
            raise DomainError("mu: expected a non-empty list of numbers")
        return get_family("mvn", dim=len(mu))
    return get_family(key)


def _natural_from_obj(fam: Family, obj: dict):
    if fam.name == "mvn":
        return fam.to_natural({"mu": obj["mu"], "sigma": obj["sigma"]})
    return fam.to_natural(dict(obj))


def _check_alphas(parser, alphas) -> None:
    for a in alphas or ():
        if not (math.isfinite(a) and a > 0):
            parser.error(f"--alpha: values must be positive reals, got {a}")


def _read_observations(fam: Family, path: str) -> np.ndarray:
    """Read headerless CSV observations; width and integrality are enforced."""
    width = fam.support.dim if fam.support.kind == "real-vector" else 1
    rows = []
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise DomainError(f"data: cannot read {path!r} ({exc})") from exc
    with handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if len(row) != width:
                raise DomainError(
                    f"data: row {lineno} has {len(row)} fields, expected {width}"
                )
            try:
                values = [float(field) for field in row]
            except ValueError:
                raise DomainError(f"data: row {lineno} is not numeric: {row}") from None
            if fam.support.is_discrete and any(not v.is_integer() for v in values):
                raise DomainError(
                    f"data: row {lineno} must be an integer for family {fam.name}"
                )
            rows.append(values if width > 1 else values[0])
    if not rows:
        raise DomainError(f"data: {path!r} contains no observations")
    return np.asarray(rows)


# --------------------------------------------------------------------------
# Report rendering.
# --------------------------------------------------------------------------


def _result_row(measure: str, alpha, res: MeasureResult, oracle=None, passed=None) -> dict:
    return {
        "measure": measure,
        "alpha": alpha,
        "value": res.value,
        "branch": res.branch,
        "oracle": oracle,
        "pass": passed,
    }


def _render(report: dict, output: str) -> str:
    if output == "json":
        return json.dumps(report, indent=2)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["measure", "alpha", "value", "branch", "oracle_value", "oracle_error_bound",
         "oracle_method", "pass"]
    )
    for row in report.get("results", ()):
        oracle = row.get("oracle") or {}
        writer.writerow(
            [
                row.get("measure", ""),
                _csv_num(row.get("alpha")),
                _csv_num(row.get("value")),
                row.get("branch", ""),
                _csv_num(oracle.get("value")),
                _csv_num(oracle.get("error_bound")),
                oracle.get("method", ""),
                "" if row.get("pass") is None else str(row["pass"]).lower(),
            ]
        )
    return buf.getvalue().rstrip("\n")


def _csv_num(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


# --------------------------------------------------------------------------
# Subcommand implementations.
# --------------------------------------------------------------------------


def _run_measures(parser, args, *, pair: bool) -> dict:
    valid = DIVERGENCE_MEASURES if pair else ENTROPY_MEASURES
    if args.measure not in valid:
        parser.error(
            f"--measure: {args.measure!r} is not valid for this subcommand; "
            f"choose from {', '.join(valid)}"
        )
    _check_alphas(parser, args.alpha)
    needs_alpha = measure_needs_alpha(args.measure)
    if needs_alpha and not args.alpha:
        parser.error(f"--measure {args.measure} requires at least one --alpha")

    params_obj = _parse_params(parser, args.family, args.params, "--params")
    fam = _family_from_params(parser, args.family, params_obj)
    theta = _natural_from_obj(fam, params_obj)
    theta2 = None
    params2_obj = None
    if pair:
        params2_obj = _parse_params(parser, args.family, args.params2, "--params2")
        fam2 = _family_from_params(parser, args.family, params2_obj)
        if fam2 != fam:
            raise DomainError("params2: dimension differs from params")
        theta2 = _natural_from_obj(fam, params2_obj)

    alphas = args.alpha if needs_alpha else [None]
    results = []
    for alpha in alphas:
        res = evaluate_measure(fam, args.measure, theta, theta2, alpha)
        results.append(_result_row(args.measure, alpha, res))

    request = {
        "subcommand": args.subcommand,
        "family": fam.name,
        "params": params_obj,
        "params2": params2_obj,
        "measure": args.measure,
        "alpha": args.alpha,
    }
    return {"request": request, "results": results}


def _estimate_block(fam: Family, est) -> dict:
    params = fam.from_natural(est.theta)
    if fam.name == "mvn":
        source = {"mu": params.mu.tolist(), "sigma": params.cov.tolist()}
    else:
        source = {k: getattr(params, k) for k in fam.source_keys}
    theta = {"vector": est.theta.vector.tolist()}
    if est.theta.matrix is not None:
        theta["matrix"] = est.theta.matrix.tolist()
    return {
        "n": est.n,
        "natural": theta,
        "params": source,
        "mean_sufficient_stat": est.mean_sufficient_stat.flat().tolist(),
    }


def _run_estimate(parser, args) -> dict:
    if args.measure is not None and args.measure not in MEASURE_NAMES:
        parser.error(f"--measure: unknown measure {args.measure!r}")
    _check_alphas(parser, args.alpha)
    key = args.family.strip().lower().replace("_", "-")
    if key in ("mvn", "gaussian-multivariate", "multivariate-gaussian"):
        if args.dim is None:
            parser.error("--dim is required for the mvn family")
        fam = get_family("mvn", dim=args.dim)
    else:
        try:
            fam = get_family(key)
        except ValueError as exc:
            parser.error(str(exc))

    sample_p = SampleSet(fam, _read_observations(fam, args.data))
    sample_q = None
    if args.data2 is not None:
        sample_q = SampleSet(fam, _read_observations(fam, args.data2))

    est_p = mle(sample_p)
    estimates = {"data": _estimate_block(fam, est_p)}
    if sample_q is not None:
        estimates["data2"] = _estimate_block(fam, mle(sample_q))

    results = []
    if args.measure is not None:
        if measure_needs_pair(args.measure) and sample_q is None:
            parser.error(f"--measure {args.measure} requires --data2")
        if measure_needs_alpha(args.measure) and not args.alpha:
            parser.error(f"--measure {args.measure} requires at least one --alpha")
        alphas = args.alpha if measure_needs_alpha(args.measure) else [None]
        for alpha in alphas:
            res = plugin_measure(MeasureRequest(args.measure, alpha), sample_p, sample_q)
            results.append(_result_row(args.measure, alpha, res))

    request = {
        "subcommand": "estimate",
        "family": fam.name,
        "data": args.data,
        "data2": args.data2,
        "measure": args.measure,
        "alpha": args.alpha,
    }
    return {"request": request, "estimates": estimates, "results": results}


def _verify_cells(fam_name: str):
    """Yield (measure, alpha) cells of the verification grid for one family."""
    for measure in ("renyi", "tsallis"):
        for alpha in VERIFY_ALPHAS:
            yield measure, alpha
    yield "shannon", None
    yield "cross-entropy", None
    yield "kl", None
    yield "bregman", None
    yield "bhattacharyya", None
    yield "hellinger", None
    for measure in ("renyi-div", "tsallis-div", "jensen"):
        for alpha in VERIFY_ALPHAS:
            yield measure, alpha


def _run_verify(parser, args) -> tuple[dict, bool]:
    if args.family is not None and args.family not in VERIFY_PAIRS:
        parser.error(
            f"--family: unknown family {args.family!r}; known: {', '.join(VERIFY_PAIRS)}"
        )
    cfg = OracleConfig(abs_tol=args.abs_tol, seed=args.seed, mc_samples=args.mc_samples)
    names = [args.family] if args.family else list(VERIFY_PAIRS)

    results = []
    all_pass = True
    for name in names:
        obj_p, obj_q = VERIFY_PAIRS[name]
        fam = get_family(name, dim=len(obj_p["mu"])) if name == "mvn" else get_family(name)
        theta = _natural_from_obj(fam, obj_p)
        theta2 = _natural_from_obj(fam, obj_q)
        for measure, alpha in _verify_cells(name):
            second = theta2 if measure_needs_pair(measure) else None
            closed = evaluate_measure(fam, measure, theta, second, alpha)
            est = oracle_measure(fam, measure, theta, second, alpha, cfg)
            tol = max(
                VERIFY_BASE_TOL[est.method],
                est.error_bound + 1e-12 * (1.0 + abs(closed.value)),
            )
            ok = abs(closed.value - est.value) <= tol
            all_pass = all_pass and ok
            row = _result_row(
                measure,
                alpha,
                closed,
                oracle={
                    "value": est.value,
                    "error_bound": est.error_bound,
                    "method": est.method,
                },
                passed=ok,
            )
            row["family"] = fam.name
            results.append(row)

    request = {
        "subcommand": "verify",
        "family": args.family,
        "alpha": list(VERIFY_ALPHAS),
        "seed": args.seed,
        "mc_samples": args.mc_samples,
        "abs_tol": args.abs_tol,
    }
    return {"request": request, "results": results, "all_pass": all_pass}, all_pass


def _run_families() -> dict:
    entries = []
    for name in family_names():
        fam = get_family(name, dim=2) if name == "mvn" else get_family(name)
        entries.append(
            {
                "name": fam.name,
                "order": fam.order if name != "mvn" else "d + d^2",
                "source_keys": list(fam.source_keys),
                **fam.decomposition,
            }
        )
    return {"request": {"subcommand": "families"}, "families": entries}


def run(argv=None) -> int:
    """Parse argv, execute, print the report; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "entropy":
            report = _run_measures(parser, args, pair=False)
            ok = True
        elif args.subcommand == "divergence":
            report = _run_measures(parser, args, pair=True)
            ok = True
        elif args.subcommand == "estimate":
            report = _run_estimate(parser, args)
            ok = True
        elif args.subcommand == "verify":
            report, ok = _run_verify(parser, args)
        else:
            report = _run_families()
            ok = True
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    print(_render(report, getattr(args, "output", "json")))
    return 0 if ok else 1


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
