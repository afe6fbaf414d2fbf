"""Portfolio file ingestion and results serialization.

The portfolio input is a single self-describing JSON document (see
docs/file-formats.md for the frozen field names):

    {
      "schema_version": "1",
      "gamma": 0.5,
      "alpha_inf": "auto",          # or a positive number; auto = 6 / gamma^2
      "day_count": 252,
      "bonds": [
        {"id": "...", "price": 1.0, "position": 27, "adv": 3.0,
         "vol_annual": 0.07, "min_spread": 0.002},
        ...
      ],
      "correlation": "identity"     # or a scalar c, or a d x d matrix
    }

A scalar correlation ``c`` expands to the uniform matrix (1 on the
diagonal, ``c`` off it), which is positive semidefinite exactly when
``-1/(d-1) <= c <= 1``.  Load failures distinguish syntax errors (with
line/column), schema violations (missing field, wrong type, duplicate
id), and semantic violations (non-PSD matrix, negative ADV, ...), each
carrying the offending field.
"""

from __future__ import annotations

import json
from typing import Any, BinaryIO, TextIO

import numpy as np

from .costmodel import BondSpec, PortfolioSpec
from .optimizer import StrategyResult

__all__ = [
    "PortfolioError",
    "PortfolioSyntaxError",
    "SchemaError",
    "SemanticError",
    "load_portfolio",
    "load_portfolio_path",
    "resolve_alpha_inf",
    "uniform_correlation",
    "write_results",
    "read_results",
    "results_document",
]

SCHEMA_VERSION = "1"

_BOND_FIELDS = ("id", "price", "position", "adv", "vol_annual", "min_spread")


class PortfolioError(Exception):
    """Base class for portfolio file problems."""


class PortfolioSyntaxError(PortfolioError):
    """The document is not well-formed JSON."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"syntax error at line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SchemaError(PortfolioError):
    """A field is missing, duplicated, or has the wrong type."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class SemanticError(PortfolioError):
    """The document parses but describes an invalid portfolio."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def resolve_alpha_inf(alpha_inf: float | str, gamma: float) -> float:
    """Resolve the "auto" calibration: alpha_inf = 6 / gamma^2."""
    if alpha_inf == "auto":
        return 6.0 / (gamma * gamma)
    if isinstance(alpha_inf, bool) or not isinstance(alpha_inf, (int, float)):
        raise SchemaError("alpha_inf", f'expected a number or "auto", got {alpha_inf!r}')
    return float(alpha_inf)


def uniform_correlation(d: int, c: float) -> np.ndarray:
    """Uniform off-diagonal correlation matrix, PSD iff c >= -1/(d-1)."""
    if abs(c) > 1.0:
        raise SemanticError("correlation", f"correlation {c} lies outside [-1, 1]")
    if d > 1 and c < -1.0 / (d - 1):
        raise SemanticError(
            "correlation",
            f"uniform correlation {c} below the positive-semidefinite "
            f"bound -1/(d-1) = {-1.0 / (d - 1):.6g} for {d} assets",
        )
    return np.full((d, d), float(c)) + (1.0 - float(c)) * np.eye(d)


def _require(doc: dict, field: str, types: tuple, desc: str) -> Any:
    if field not in doc:
        raise SchemaError(field, "missing required field")
    value = doc[field]
    if isinstance(value, bool) or not isinstance(value, types):
        raise SchemaError(field, f"expected {desc}, got {type(value).__name__}")
    return value


def _parse_bond(entry: Any, index: int, day_count: int) -> BondSpec:
    where = f"bonds[{index}]"
    if not isinstance(entry, dict):
        raise SchemaError(where, f"expected an object, got {type(entry).__name__}")
    unknown = set(entry) - set(_BOND_FIELDS)
    if unknown:
        raise SchemaError(where, f"unknown fields {sorted(unknown)}")
    ident = _require(entry, "id", (str,), "a string")
    numbers = {}
    for fld in ("price", "position", "adv", "vol_annual", "min_spread"):
        numbers[fld] = float(_require(entry, fld, (int, float), "a number"))
    try:
        return BondSpec(id=ident, day_count=day_count, **numbers)
    except ValueError as exc:
        raise SemanticError(where, str(exc)) from exc


def _parse_correlation(value: Any, d: int) -> np.ndarray:
    if isinstance(value, str):
        if value == "identity":
            return np.eye(d)
        raise SchemaError(
            "correlation", f'expected "identity", a number, or a matrix, got {value!r}'
        )
    if isinstance(value, bool):
        raise SchemaError("correlation", "expected a number or matrix, got a boolean")
    if isinstance(value, (int, float)):
        return uniform_correlation(d, float(value))
    if isinstance(value, list):
        flat_ok = all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
        if flat_ok and len(value) == d * d:
            return np.array(value, dtype=float).reshape(d, d)
        if len(value) == d and all(isinstance(row, list) for row in value):
            rows = []
            for i, row in enumerate(value):
                if len(row) != d or not all(
                    isinstance(x, (int, float)) and not isinstance(x, bool) for x in row
                ):
                    raise SchemaError(
                        f"correlation[{i}]", f"expected a row of {d} numbers"
                    )
                rows.append([float(x) for x in row])
            return np.array(rows, dtype=float)
        raise SchemaError(
            "correlation",
            f"expected {d} rows of {d} numbers (or a flat list of {d * d})",
        )
    raise SchemaError(
        "correlation",
        f'expected "identity", a number, or a matrix, got {type(value).__name__}',
    )


def load_portfolio(
    source: BinaryIO | TextIO | bytes | str,
    *,
    gamma: float | None = None,
    alpha_inf: float | str | None = None,
    day_count: int | None = None,
) -> PortfolioSpec:
    """Parse and validate a portfolio document into a PortfolioSpec.

    The keyword arguments override the corresponding document fields
    before validation (the CLI's --gamma / --alpha-inf / --day-count);
    an overridden gamma feeds the "auto" alpha_inf resolution.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PortfolioSyntaxError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise SchemaError("$", "top-level value must be an object")
    if gamma is not None:
        doc["gamma"] = gamma
    if alpha_inf is not None:
        doc["alpha_inf"] = alpha_inf
    if day_count is not None:
        doc["day_count"] = day_count

    version = _require(doc, "schema_version", (str,), "a string")
    if version != SCHEMA_VERSION:
        raise SchemaError("schema_version", f"unsupported version {version!r}")
    gamma = float(_require(doc, "gamma", (int, float), "a number"))
    if not (gamma > 0):
        raise SemanticError("gamma", f"must be positive, got {gamma}")
    day_count = doc.get("day_count", 252)
    if isinstance(day_count, bool) or not isinstance(day_count, int):
        raise SchemaError("day_count", "expected an integer")
    if day_count <= 0:
        raise SemanticError("day_count", f"must be positive, got {day_count}")
    alpha_raw = doc.get("alpha_inf", "auto")
    alpha_inf = resolve_alpha_inf(alpha_raw, gamma)
    if not (alpha_inf > 0):
        raise SemanticError("alpha_inf", f"must be positive, got {alpha_inf}")

    bond_list = _require(doc, "bonds", (list,), "a list")
    if not bond_list:
        raise SemanticError("bonds", "portfolio must contain at least one bond")
    bonds = [_parse_bond(entry, i, day_count) for i, entry in enumerate(bond_list)]
    seen: dict[str, int] = {}
    for i, bond in enumerate(bonds):
        if bond.id in seen:
            raise SchemaError(
                f"bonds[{i}].id", f"duplicate bond id {bond.id!r} (first at bonds[{seen[bond.id]}])"
            )
        seen[bond.id] = i

    if "correlation" not in doc:
        raise SchemaError("correlation", "missing required field")
    corr = _parse_correlation(doc["correlation"], len(bonds))

    unknown = set(doc) - {
        "schema_version",
        "gamma",
        "alpha_inf",
        "day_count",
        "bonds",
        "correlation",
    }
    if unknown:
        raise SchemaError("$", f"unknown fields {sorted(unknown)}")

    try:
        return PortfolioSpec(bonds=tuple(bonds), correlation=corr, gamma=gamma, alpha_inf=alpha_inf)
    except ValueError as exc:
        raise SemanticError("correlation", str(exc)) from exc


def load_portfolio_path(path: str, **overrides) -> PortfolioSpec:
    with open(path, "rb") as handle:
        return load_portfolio(handle, **overrides)


def _float(x: float) -> float:
    # json serializes floats with repr, which round-trips exactly.
    return float(x)


def results_document(
    results: list[StrategyResult],
    spec: PortfolioSpec,
    config_echo: dict[str, Any],
) -> dict[str, Any]:
    """Build the results document with a stable key order."""
    if not results:
        raise ValueError("results must be nonempty")
    strategies = []
    for res in results:
        assets = []
        for bond, t, dc in zip(
            spec.bonds, res.schedule.times, res.cost.per_asset_direct
        ):
            assets.append(
                {
                    "id": bond.id,
                    "time_days": _float(t),
                    "direct_cost": _float(dc),
                }
            )
        strategies.append(
            {
                "strategy": res.strategy,
                "total_cost": _float(res.cost.total),
                "direct_cost": _float(res.cost.direct),
                "penalty": _float(res.cost.penalty),
                "t_median": _float(res.t_median),
                "t_max": _float(res.t_max),
                "converged": bool(res.converged),
                "iterations": int(res.iterations),
                "assets": assets,
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config_echo,
        "strategies": strategies,
    }


def write_results(
    results: list[StrategyResult],
    sink: BinaryIO | TextIO,
    *,
    spec: PortfolioSpec,
    config_echo: dict[str, Any] | None = None,
) -> None:
    """Serialize strategy results deterministically to an open stream."""
    doc = results_document(results, spec, config_echo or {})
    payload = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    try:
        try:
            sink.write(payload)
        except TypeError:
            sink.write(payload.encode("utf-8"))
    except OSError as exc:
        raise IOError(f"failed to write results: {exc}") from exc


def read_results(source: BinaryIO | TextIO | bytes | str) -> dict[str, Any]:
    """Read back a results document (for round-trip checks and tooling)."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    return json.loads(text)
