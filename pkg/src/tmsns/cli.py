"""Command-line front end.

Usage::

    tmsns schmidt --na 1 --nb 1 --lambda 0.3 --count 5
    tmsns majorize --pair 1,0:1,1 --lambda 0.5
    tmsns majorize --chain 2,3 --lambda 0.8
    tmsns witness --family a-prime --lambda 0.6 --size 40
    tmsns deconvolve --pair 1,0:1,1 --lambda 0.4
    tmsns scan --family a10-11 --tol 1e-6
    tmsns scan --pair 0,0:1,1 --lambda-max 0.9
    tmsns oracle-check --na 2 --nb 1 --lambda 0.4 --cutoff 80

Output is CSV (header, data rows, ``#`` footer) or JSON, schema version 1.
Exit codes: 0 majorizes / true, 1 does not / false, 2 usage error,
3 numerical failure, 4 undecided.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .errors import NoSignChange, TmsnsError
from .fock import DEFAULT_DEFICIT_BOUND, band_amplitudes, expectation, off_band_max, oracle_state
from .majorization import Outcome, chain_check, majorizes, sort_descending
from .scan import FAMILIES, empirical_boundary, witness_threshold
from .schmidt import (
    DEFAULT_MAX_TERMS,
    StateLabel,
    check_lambda,
    distribution,
    negative_binomial_check,
    schmidt_coefficient,
    schmidt_spectrum,
)
from .witness import (
    COLSUM_TOL,
    NONNEG_TOL,
    ToeplitzWitness,
    build_D,
    is_column_stochastic,
    toeplitz_deconvolve,
    verify_witness,
)

SCHEMA_VERSION = "1"
CONFIG_ENV = "TMSNS_CONFIG"

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_NUMERIC, EXIT_UNDECIDED = 0, 1, 2, 3, 4

BUILTIN_DEFAULTS: dict[str, Any] = {
    "eps_tail": 1e-12,
    "max_terms": DEFAULT_MAX_TERMS,
    "nonneg_tol": NONNEG_TOL,
    "colsum_tol": COLSUM_TOL,
    "oracle_tol": 1e-9,
    "band_tol": 1e-12,
    "deficit_bound": DEFAULT_DEFICIT_BOUND,
    "lambda_max": 0.95,
    "grid": 64,
    "tol": 1e-6,
    "size": 64,
    "cutoff": 80,
    "format": "csv",
}


class UsageError(Exception):
    pass


def load_config(path: str | None = None) -> dict[str, Any]:
    """Built-in defaults overridden by a ``key = value`` file (``TMSNS_CONFIG``)."""
    values = dict(BUILTIN_DEFAULTS)
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return values
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_string("[defaults]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for key, raw in parser["defaults"].items():
        key = key.replace("-", "_")
        if key not in values:
            raise UsageError(f"unknown config key {key!r} in {path}")
        kind = type(BUILTIN_DEFAULTS[key])
        try:
            values[key] = kind(float(raw)) if kind is int else kind(raw)
        except ValueError as exc:
            raise UsageError(f"bad value for {key} in {path}: {raw!r}") from exc
    return values


# -- output ---------------------------------------------------------------


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (Outcome,)):
        return value.value
    return value


def emit(stream, fmt: str, command: str, parameters: dict, columns: Sequence[str], rows, summary: dict) -> None:
    """Write one output record; field order is exactly the insertion order."""
    if fmt == "json":
        record = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "parameters": parameters,
            "columns": list(columns),
            "rows": [list(r) for r in rows],
            "summary": summary,
        }
        json.dump(_jsonable(record), stream, indent=2)
        stream.write("\n")
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    stream.write(f"# schema_version={SCHEMA_VERSION}\n")
    stream.write(f"# command={command}\n")
    for key, value in parameters.items():
        stream.write(f"# param.{key}={_fmt(value)}\n")
    for key, value in summary.items():
        stream.write(f"# {key}={_fmt(value)}\n")


# -- argument helpers -----------------------------------------------------


def parse_pair(text: str) -> tuple[tuple[int, int], tuple[int, int]]:
    try:
        left, right = text.split(":")
        p = tuple(int(v) for v in left.split(","))
        q = tuple(int(v) for v in right.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NA1,NB1:NA2,NB2, got {text!r}") from None
    if len(p) != 2 or len(q) != 2 or min(p + q) < 0:
        raise argparse.ArgumentTypeError(f"expected NA1,NB1:NA2,NB2 with nonnegative entries, got {text!r}")
    return p, q


def parse_int_pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,M, got {text!r}") from None
    if a < 0 or b < 0:
        raise argparse.ArgumentTypeError("entries must be nonnegative")
    return a, b


def squeezing(text: str) -> float:
    try:
        return check_lambda(float(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return value


def _label_str(pair: tuple[int, int]) -> str:
    return f"{pair[0]},{pair[1]}"


# -- subcommands ----------------------------------------------------------


def cmd_schmidt(args, out) -> int:
    label = StateLabel.of(args.na, args.nb)
    params = {"na": args.na, "nb": args.nb, "lambda": args.lam}
    summary: dict[str, Any] = {}
    if args.count is not None:
        params["count"] = args.count
        spectrum = schmidt_spectrum(label, args.lam, args.count)
        amps = spectrum.amplitudes
        summary["tail_mass"] = spectrum.tail_mass
    else:
        params["eps_tail"] = args.eps_tail
        dist = distribution(label, args.lam, args.eps_tail, args.max_terms)
        amps = np.array([schmidt_coefficient(label, m, args.lam) for m in range(len(dist))])
        summary["tail_mass"] = dist.tail_mass
        summary["tail_certified"] = dist.tail_certified
    summary["terms"] = len(amps)
    if args.nbinom_check:
        if min(args.na, args.nb) != 0:
            raise UsageError("--nbinom-check needs one of --na/--nb to be zero")
        summary["nbinom_max_deviation"] = negative_binomial_check(label.n_a, args.lam, max(len(amps), 1))
    rows = [(m, float(c), float(c * c)) for m, c in enumerate(amps)]
    emit(out, args.format, "schmidt", params, ("m", "C_m", "C_m_squared"), rows, summary)
    return EXIT_OK


def cmd_majorize(args, out) -> int:
    params: dict[str, Any] = {}
    if args.chain is not None:
        n, m = args.chain
        params.update({"chain": f"{n},{m}", "lambda": args.lam, "eps_tail": args.eps_tail})
        p_pair, q_pair = (n, 0), (n + m, 0)
        lam_q = args.lam
        verdict = chain_check(n, m, args.lam, args.eps_tail)
    else:
        p_pair, q_pair = args.pair
        lam_q = args.lam if args.lambda_q is None else args.lambda_q
        params.update(
            {"pair": f"{_label_str(p_pair)}:{_label_str(q_pair)}", "lambda": args.lam, "lambda_q": lam_q, "eps_tail": args.eps_tail}
        )
        verdict = None
    p = distribution(StateLabel.of(*p_pair), args.lam, args.eps_tail, args.max_terms)
    q = distribution(StateLabel.of(*q_pair), lam_q, args.eps_tail, args.max_terms)
    if verdict is None:
        verdict = majorizes(p, q)
    ps, qs = sort_descending(p).probs, sort_descending(q).probs
    size = max(len(ps), len(qs))
    cum_p = np.cumsum(np.pad(ps, (0, size - len(ps))))
    cum_q = np.cumsum(np.pad(qs, (0, size - len(qs))))
    rows = [(m + 1, cum_p[m], cum_q[m], cum_p[m] - cum_q[m]) for m in range(size)]
    summary = {
        "outcome": verdict.outcome.value,
        "witness_index": verdict.witness_index,
        "margin": verdict.margin,
        "slack": verdict.slack,
    }
    emit(out, args.format, "majorize", params, ("m", "partial_sum_p", "partial_sum_q", "gap"), rows, summary)
    return {
        Outcome.MAJORIZES: EXIT_OK,
        Outcome.DOES_NOT_MAJORIZE: EXIT_FALSE,
        Outcome.UNDECIDED: EXIT_UNDECIDED,
    }[verdict.outcome]


def _stochasticity_summary(report) -> dict[str, Any]:
    neg = report.first_negative
    return {
        "is_column_stochastic": report.is_column_stochastic,
        "first_negative_row": None if neg is None else neg[0],
        "first_negative_column": None if neg is None else neg[1],
        "first_negative_value": None if neg is None else neg[2],
        "max_row_sum": report.max_row_sum,
        "max_column_error": report.max_column_error,
    }


def cmd_witness(args, out) -> int:
    builder, (p_pair, q_pair) = FAMILIES[args.family]
    params: dict[str, Any] = {"family": args.family, "lambda": args.lam, "size": args.size}
    if args.family == "d":
        params.update({"n": args.n, "power": args.power})
        w = build_D(args.lam, args.size).power(args.power)
        p_pair, q_pair = (args.n, 0), (args.n + args.power, 0)
    else:
        w = builder(args.lam, args.size)
    report = is_column_stochastic(w, args.nonneg_tol, args.colsum_tol)
    p = distribution(StateLabel.of(*p_pair), args.lam, args.eps_tail, args.max_terms)
    q = distribution(StateLabel.of(*q_pair), args.lam, args.eps_tail, args.max_terms)
    summary = _stochasticity_summary(report)
    summary["maps"] = f"{_label_str(p_pair)}->{_label_str(q_pair)}"
    summary["max_deviation"] = verify_witness(w, p, q)
    if isinstance(w, ToeplitzWitness):
        columns = ("n", "a_n")
        rows = list(enumerate(w.coeffs.tolist()))
        summary["coefficient_tail"] = w.tail
    else:
        columns = ("row", "column", "value")
        rows = [(int(i), int(j), float(w.entries[i, j])) for i, j in zip(*np.nonzero(w.entries))]
    emit(out, args.format, "witness", params, columns, rows, summary)
    return EXIT_OK if report.is_column_stochastic else EXIT_FALSE


def cmd_deconvolve(args, out) -> int:
    p_pair, q_pair = args.pair
    params = {"pair": f"{_label_str(p_pair)}:{_label_str(q_pair)}", "lambda": args.lam, "size": args.size, "eps_tail": args.eps_tail}
    p = distribution(StateLabel.of(*p_pair), args.lam, args.eps_tail, args.max_terms)
    q = distribution(StateLabel.of(*q_pair), args.lam, args.eps_tail, args.max_terms)
    w = toeplitz_deconvolve(p, q, args.size)
    report = is_column_stochastic(w, args.nonneg_tol, args.colsum_tol)
    summary = _stochasticity_summary(report)
    summary["coefficient_tail"] = w.tail
    summary["max_deviation"] = verify_witness(w, p, q)
    emit(out, args.format, "deconvolve", params, ("n", "a_n"), list(enumerate(w.coeffs.tolist())), summary)
    return EXIT_OK if report.is_column_stochastic else EXIT_FALSE


def cmd_scan(args, out) -> int:
    params: dict[str, Any] = {"lambda_max": args.lambda_max, "tol": args.tol, "grid": args.grid}
    if args.family is not None:
        params.update({"family": args.family, "size": args.size})
        try:
            result = witness_threshold(args.family, args.lambda_max, args.tol, args.size, args.grid)
        except NoSignChange as exc:
            emit(out, args.format, "scan", params, ("lambda", "verdict"), [], {"method": "WitnessNonnegativity", "boundary_found": False, "message": str(exc)})
            return EXIT_FALSE
        rows = [(lam, "stochastic" if ok else "not_stochastic") for lam, ok in result.samples]
    else:
        p_pair, q_pair = args.pair
        params.update({"pair": f"{_label_str(p_pair)}:{_label_str(q_pair)}", "eps_tail": args.eps_tail})
        result = empirical_boundary(args.pair, args.lambda_max, args.grid, args.eps_tail, args.tol)
        rows = [(lam, outcome.value) for lam, outcome in result.samples]
    found = not math.isinf(result.boundary_high)
    summary = {
        "method": result.method.value,
        "boundary_found": found,
        "boundary_low": result.boundary_low,
        "boundary_high": result.boundary_high if found else None,
        "boundary": result.boundary,
        "monotone": result.monotone,
    }
    emit(out, args.format, "scan", params, ("lambda", "verdict"), rows, summary)
    return EXIT_OK if found else EXIT_FALSE


def cmd_oracle_check(args, out) -> int:
    params = {"na": args.na, "nb": args.nb, "lambda": args.lam, "cutoff": args.cutoff}
    state = oracle_state((args.na, args.nb), args.lam, args.cutoff, args.deficit_bound)
    label = StateLabel.of(args.na, args.nb)
    offset = args.na - args.nb
    band = band_amplitudes(state, offset)
    rows = []
    for m, amp in enumerate(band):
        c2 = schmidt_coefficient(label, m, args.lam) ** 2
        rows.append((m, c2, float(amp * amp), abs(c2 - amp * amp)))
    max_dev = max(r[3] for r in rows)
    off_band = off_band_max(state, offset)
    summary = {
        "max_deviation": max_dev,
        "off_band_max": off_band,
        "norm_deficit": state.norm_deficit,
        "measured_deficit": state.measured_deficit,
        "mean_N_A": expectation(state, "A", args.lam),
        "mean_N_B": expectation(state, "B", args.lam),
    }
    emit(out, args.format, "oracle-check", params, ("m", "C_m_squared", "oracle_squared", "abs_diff"), rows, summary)
    return EXIT_OK if max_dev < args.oracle_tol and off_band < args.band_tol else EXIT_FALSE


# -- parser ---------------------------------------------------------------


def build_parser(config: dict[str, Any]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tmsns", description="Majorization toolkit for two-mode squeezed number states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps=True):
        p.add_argument("--format", choices=("csv", "json"), default=config["format"])
        if eps:
            p.add_argument("--eps-tail", type=positive_float, default=config["eps_tail"])
            p.add_argument("--max-terms", type=nonneg_int, default=config["max_terms"])

    p = sub.add_parser("schmidt", help="Schmidt coefficients C_m and probabilities")
    p.add_argument("--na", type=nonneg_int, required=True)
    p.add_argument("--nb", type=nonneg_int, required=True)
    p.add_argument("--lambda", dest="lam", type=squeezing, required=True)
    p.add_argument("--count", type=nonneg_int)
    p.add_argument("--nbinom-check", action="store_true", help="compare against the negative binomial law (N_B = 0)")
    common(p)
    p.set_defaults(func=cmd_schmidt)

    p = sub.add_parser("majorize", help="decide majorization between two states")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pair", type=parse_pair, help="NA1,NB1:NA2,NB2 (is the first majorizing the second?)")
    group.add_argument("--chain", type=parse_int_pair, help="N,M: check psi_N,0 > psi_N+M,0")
    p.add_argument("--lambda", dest="lam", type=squeezing, required=True)
    p.add_argument("--lambda-q", type=squeezing, help="squeezing of the second state (defaults to --lambda)")
    common(p)
    p.set_defaults(func=cmd_majorize)

    p = sub.add_parser("witness", help="build and verify a witness matrix")
    p.add_argument("--family", choices=sorted(FAMILIES), required=True)
    p.add_argument("--lambda", dest="lam", type=squeezing, required=True)
    p.add_argument("--size", type=nonneg_int, default=config["size"])
    p.add_argument("--n", type=nonneg_int, default=0, help="chain start n for family d")
    p.add_argument("--power", type=nonneg_int, default=1, help="matrix power m for family d")
    p.add_argument("--nonneg-tol", type=positive_float, default=config["nonneg_tol"])
    p.add_argument("--colsum-tol", type=positive_float, default=config["colsum_tol"])
    common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("deconvolve", help="recover a Toeplitz witness q = W p")
    p.add_argument("--pair", type=parse_pair, required=True)
    p.add_argument("--lambda", dest="lam", type=squeezing, required=True)
    p.add_argument("--size", type=nonneg_int)
    p.add_argument("--nonneg-tol", type=positive_float, default=config["nonneg_tol"])
    p.add_argument("--colsum-tol", type=positive_float, default=config["colsum_tol"])
    common(p)
    p.set_defaults(func=cmd_deconvolve)

    p = sub.add_parser("scan", help="locate lambda thresholds")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--family", choices=sorted(FAMILIES))
    group.add_argument("--pair", type=parse_pair)
    p.add_argument("--lambda-max", type=squeezing, default=config["lambda_max"])
    p.add_argument("--grid", type=nonneg_int, default=config["grid"])
    p.add_argument("--tol", type=positive_float, default=config["tol"])
    p.add_argument("--size", type=nonneg_int, default=config["size"])
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("oracle-check", help="compare C_m with a brute-force Fock construction")
    p.add_argument("--na", type=nonneg_int, required=True)
    p.add_argument("--nb", type=nonneg_int, required=True)
    p.add_argument("--lambda", dest="lam", type=squeezing, required=True)
    p.add_argument("--cutoff", type=nonneg_int, default=config["cutoff"])
    p.add_argument("--oracle-tol", type=positive_float, default=config["oracle_tol"])
    p.add_argument("--band-tol", type=positive_float, default=config["band_tol"])
    p.add_argument("--deficit-bound", type=positive_float, default=config["deficit_bound"])
    common(p, eps=False)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        config = load_config()
    except UsageError as exc:
        print(f"tmsns: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(config)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"tmsns: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TmsnsError as exc:
        print(f"tmsns: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"tmsns: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
