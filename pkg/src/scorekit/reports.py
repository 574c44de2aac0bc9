"""JSON report schemas and deterministic, atomic report writing."""

from __future__ import annotations

import json
import math
import os
import tempfile

import jsonschema
import numpy as np

_NUM = {"type": ["number", "null"]}
_VEC = {"type": "array", "items": _NUM}
_MAT = {"type": "array", "items": _VEC}
_SPEC = {"type": "object"}


def _obj(props: dict, optional: tuple[str, ...] = ()) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": [k for k in props if k not in optional],
        "additionalProperties": False,
    }


SCORE_SCHEMA = _obj({"total_score": _NUM, "mean_score": _NUM, "per_outcome_scores": _VEC})

ESTIMATE_SCHEMA = _obj(
    {
        "rule": _SPEC,
        "model": _SPEC,
        "r": _VEC,
        "seed": {"type": "integer"},
        "theta_hat": _VEC,
        "p_hat": _VEC,
        "score_at_opt": _NUM,
        "grad_norm": _NUM,
        "well_behaved": {"enum": ["yes", "no", "unknown"]},
        "restarts_agree": {"type": "boolean"},
        "iterations": {"type": "integer"},
        "converged": {"type": "boolean"},
        "at_boundary": {"type": "boolean"},
    }
)

COMPAT_SCHEMA = _obj(
    {
        "family": _SPEC,
        "rule": _SPEC,
        "m": {"type": "integer"},
        "seed": {"type": "integer"},
        "parallel_deviation": _NUM,
        "factor_estimates": _MAT,
        "factor_spread": _NUM,
        "a_of_q": _VEC,
        "degenerate_dimension": {"type": "boolean"},
        "verdict": {"enum": ["compatible", "incompatible", "degenerate"]},
        "tol": _NUM,
        "qs": _MAT,
        "rs": _MAT,
        "ratios": _MAT,
    }
)

_ROUND = _obj(
    {
        "prices": _VEC,
        "allocation": _VEC,
        "outcome": {"type": "integer"},
        "payoff": _NUM,
        "risk": _NUM,
        "allocation_equals_prices": {"type": "boolean"},
    }
)

PORTFOLIO_SCHEMA = _obj(
    {
        "seed": {"type": "integer"},
        "rounds": {"type": "integer"},
        "initial_history_size": {"type": "integer"},
        "records": {"type": "array", "items": _ROUND},
        "cumulative_payoff": _NUM,
        "control": {"type": ["array", "null"], "items": _ROUND},
        "control_cumulative_payoff": _NUM,
    }
)


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(report, schema: dict) -> str:
    """Validate and serialize; floats use the shortest repr that round-trips exactly."""
    data = to_jsonable(report)
    jsonschema.validate(data, schema)
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def write_report(report, schema: dict, path: str) -> str:
    text = dumps(report, schema)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".scorekit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return text
