"""Command line front end: ``scorekit {score,estimate,compat,portfolio}``.

Exit codes
    0  success (compat: compatible)
    1  compat: incompatible
    2  malformed input or invalid configuration
    3  domain error (score)
    4  numerical failure (estimate, portfolio)
    5  compat: degenerate outcome count (m = 2)
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .compat import check_compatibility
from .errors import ConfigError, DomainError, NumericError
from .estimation import OptimizerSettings, optimize_score
from .portfolio import simulate
from .reports import (
    COMPAT_SCHEMA,
    ESTIMATE_SCHEMA,
    PORTFOLIO_SCHEMA,
    SCORE_SCHEMA,
    write_report,
)
from .rules import is_rejected, normalize_point
from .simplex import empirical, model_by_name
from .specs import family_from_spec, rule_from_spec

EXIT_OK = 0
EXIT_INCOMPATIBLE = 1
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4
EXIT_DEGENERATE = 5

SEED_ENV = "SCOREKIT_SEED"
FAMILY_TYPES = {"weighted_power", "weighted_pseudospherical", "quasi_bregman", "bregman", "trivial"}


class InputError(Exception):
    """Malformed user input; carries the message shown before exiting with code 2."""


def _load_json(text: str, what: str):
    """Inline JSON, or a path to a JSON file."""
    source = text
    if not text.lstrip().startswith(("{", "[")):
        try:
            with open(text, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {what} file {text!r}: {exc}") from exc
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} is not valid JSON: {exc}") from exc


def _parse_vector(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise InputError(f"{what} must be comma-separated numbers, got {text!r}") from exc


def _env_seed() -> int | None:
    env = os.environ.get(SEED_ENV, "")
    if not env:
        return None
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from exc


def _seed(cli_seed: int) -> int:
    env = _env_seed()
    return cli_seed if env is None else env


def read_outcomes(path: str, m: int, counts: bool = False) -> list[int]:
    """1-based outcomes from a one-per-line file, or from a single row of counts."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read input {path!r}: {exc}") from exc
    rows = [(i, line.strip()) for i, line in enumerate(lines, start=1) if line.strip()]
    if not rows:
        raise InputError(f"{path}: no data")
    if counts:
        if len(rows) != 1:
            raise InputError(f"{path}:{rows[1][0]}: counts input must be a single row")
        lineno, row = rows[0]
        try:
            values = [int(x) for x in row.split(",")]
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: counts must be integers, got {row!r}") from exc
        if len(values) != m or any(v < 0 for v in values):
            raise InputError(f"{path}:{lineno}: need {m} nonnegative counts, got {row!r}")
        if sum(values) == 0:
            raise InputError(f"{path}:{lineno}: counts are all zero")
        return [i for i, c in enumerate(values, start=1) for _ in range(c)]
    outcomes = []
    for lineno, row in rows:
        try:
            y = int(row)
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: not an integer outcome: {row!r}") from exc
        if not 1 <= y <= m:
            raise InputError(f"{path}:{lineno}: outcome {y} outside 1..{m}")
        outcomes.append(y)
    return outcomes


# --- commands -----------------------------------------------------------------


def cmd_score(args) -> int:
    spec = _load_json(args.rule, "rule")
    p = _parse_vector(args.pred, "--pred")
    m = p.size
    if isinstance(spec, dict) and spec.get("type") in FAMILY_TYPES:
        if args.baseline is None:
            raise ConfigError(f"{spec['type']} is a weighted family and needs --baseline")
        q = _parse_vector(args.baseline, "--baseline")
        if q.size != m:
            raise InputError("--baseline and --pred differ in length")
        rule = family_from_spec(spec).member(q)
    else:
        if args.baseline is not None:
            raise ConfigError("--baseline only applies to weighted family specs")
        rule = rule_from_spec(spec)
    outcomes = read_outcomes(args.input, m, args.counts)
    p = normalize_point(p)
    r = empirical(outcomes, m).weights
    mean = rule.score(p, r)
    if is_rejected(mean):
        raise DomainError(f"{rule.name} is unbounded below at p={p.tolist()} on the observed outcomes")
    per_outcome = rule.scores(p)
    report = {
        "total_score": len(outcomes) * mean,
        "mean_score": mean,
        "per_outcome_scores": per_outcome,
    }
    write_report(report, SCORE_SCHEMA, args.out)
    print(f"mean score {mean!r} over {len(outcomes)} outcomes")
    return EXIT_OK


def cmd_estimate(args) -> int:
    rule = rule_from_spec(_load_json(args.rule, "rule"))
    try:
        model = model_by_name(args.model, args.m)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    outcomes = read_outcomes(args.input, model.m, args.counts)
    r = empirical(outcomes, model.m).weights
    seed = _seed(args.seed)
    opts = OptimizerSettings(n_starts=args.starts, seed=seed)
    try:
        est = optimize_score(rule, model, r, opts)
    except NumericError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report = {
        "rule": rule.to_spec(),
        "model": {"name": args.model, "m": model.m},
        "r": r,
        "seed": seed,
        **est.to_dict(),
    }
    write_report(report, ESTIMATE_SCHEMA, args.out)
    print(f"theta_hat {est.theta_hat.tolist()} well_behaved={est.well_behaved}")
    return EXIT_OK


def probe_points(m: int, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """n baselines and n outcome distributions, shrunk toward the center."""
    rng = np.random.default_rng(seed)
    qs = 0.8 * rng.dirichlet(np.ones(m), size=n) + 0.2 / m
    rs = 0.8 * rng.dirichlet(np.ones(m), size=n) + 0.2 / m
    return qs, rs


def cmd_compat(args) -> int:
    family = family_from_spec(_load_json(args.family, "family"))
    rule = rule_from_spec(_load_json(args.rule, "rule"))
    if args.m < 2:
        raise ConfigError(f"--m must be at least 2, got {args.m}")
    if args.probes < 1:
        raise ConfigError("--probes must be positive")
    seed = _seed(args.seed)
    qs, rs = probe_points(args.m, args.probes, seed)
    rep = check_compatibility(family, rule, qs, rs, tol=args.tol)
    report = {"family": family.to_spec(), "rule": rule.to_spec(), "m": args.m, "seed": seed}
    report.update(rep.to_dict())
    write_report(report, COMPAT_SCHEMA, args.out)
    print(f"{rep.verdict}: parallel deviation {rep.parallel_deviation:.3g}")
    return {
        "compatible": EXIT_OK,
        "incompatible": EXIT_INCOMPATIBLE,
        "degenerate": EXIT_DEGENERATE,
    }[rep.verdict]


def cmd_portfolio(args) -> int:
    config = _load_json(args.config, "config")
    try:
        report = simulate(config, seed=_env_seed())
    except NumericError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    write_report(report, PORTFOLIO_SCHEMA, args.out)
    print(f"cumulative payoff {report['cumulative_payoff']!r} over {report['rounds']} rounds")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scorekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score forecasts against observed outcomes")
    p.add_argument("--rule", required=True, help="rule or family spec (JSON text or file)")
    p.add_argument("--pred", required=True, help="prediction, comma-separated")
    p.add_argument("--baseline", help="baseline for weighted family members, comma-separated")
    p.add_argument("--input", required=True, help="outcomes, one 1-based integer per line")
    p.add_argument("--counts", action="store_true", help="input is a single row of counts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("estimate", help="optimal score estimate of a parametric model")
    p.add_argument("--rule", required=True)
    p.add_argument("--model", required=True, choices=["softmax", "binomial_squares"])
    p.add_argument("--m", type=int, help="outcome count (softmax)")
    p.add_argument("--input", required=True)
    p.add_argument("--counts", action="store_true")
    p.add_argument("--starts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compat", help="check a family against a rule")
    p.add_argument("--family", required=True)
    p.add_argument("--rule", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--probes", type=int, default=5, help="number of baselines and of outcome draws")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compat)

    p = sub.add_parser("portfolio", help="run the market simulation")
    p.add_argument("--config", required=True, help="simulation config (JSON text or file)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_portfolio)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the input-error code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InputError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
