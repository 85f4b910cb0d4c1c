"""Numerical laboratory for stochastic variational inequalities."""

import json as _json

from ._svilab import (
    InputError,
    NumericalError,
    Operator,
    UnsupportedError,
    bridge_survival,
    check_operator_laws,
    evaluate,
    generate_driver,
    minimal_section,
    resolvent,
    run_cli,
    schema_version,
    skorokhod_oracle,
    yosida,
)
from ._svilab import run_study as _run_study
from ._svilab import solve_svi as _solve_svi


def _text(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def operator(spec):
    """Operator from its JSON form, given as a dict or a string."""
    return Operator.from_json(_text(spec))


def solve_svi(problem, level=12, seed=0):
    """Reference solution of a problem dict on a fresh dyadic driver."""
    return _solve_svi(_text(problem), level, seed)


def run_study(name, config, seed=0, workers=1):
    """Runs a study and returns its report as a dict."""
    return _json.loads(_run_study(name, _text(config), seed, workers))


__all__ = [
    "InputError",
    "NumericalError",
    "Operator",
    "UnsupportedError",
    "bridge_survival",
    "check_operator_laws",
    "evaluate",
    "generate_driver",
    "minimal_section",
    "operator",
    "resolvent",
    "run_cli",
    "run_study",
    "schema_version",
    "skorokhod_oracle",
    "solve_svi",
    "yosida",
]
