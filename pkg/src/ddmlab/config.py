"""Run configuration: a single JSON document with rationals kept as strings.

Exact-arithmetic inputs (transition rows, laws, eps ladders) ride through
parsing as strings like "1/2" so no float contamination happens before the
Fraction constructor sees them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .engine import Horizon
from .errors import ConfigError
from .markov import MarkovModel
from .symbolic import CylinderUnion, parse_literal

HARD_CAP_DEPTH = 4
HARD_CAP_LENGTH = 4
HARD_CAP_ALPHABET = 4

MODES = ("phi", "entropy", "hellinger-scan", "derivative", "certify", "selftest")


def _rational(value, path: str) -> Fraction:
    try:
        if isinstance(value, bool):
            raise ValueError
        if isinstance(value, (int, str)):
            return Fraction(value)
    except (ValueError, ZeroDivisionError):
        pass
    raise ConfigError(path, f"expected a rational (int or 'p/q' string), got {value!r}")


@dataclass
class RunConfig:
    model: MarkovModel
    queries: list[CylinderUnion]
    horizon: Horizon
    eps_ladder: list[Fraction]
    alpha_grid: list[float]
    mode: str | None = None
    seed: int = 0
    output: str = "out/ddm"
    raw: dict = field(default_factory=dict)


def parse_config(doc: dict, unsafe_large: bool = False) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("$", "top level must be an object")
    block = doc.get("model")
    if not isinstance(block, dict):
        raise ConfigError("model", "missing or not an object")
    n = block.get("N")
    if not isinstance(n, int) or n < 1:
        raise ConfigError("model.N", f"expected a positive integer, got {n!r}")
    if n > HARD_CAP_ALPHABET and not unsafe_large:
        raise ConfigError(
            "model.N",
            f"alphabet size {n} above the hard cap {HARD_CAP_ALPHABET}; "
            "exact mode is exponential (pass --unsafe-large to override)",
        )
    rows = block.get("P")
    if not isinstance(rows, list) or len(rows) != n:
        raise ConfigError("model.P", f"expected {n} rows")
    P = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ConfigError(f"model.P[{i}]", f"expected {n} entries")
        P.append([_rational(x, f"model.P[{i}][{j}]") for j, x in enumerate(row)])
        if sum(P[-1]) != 1:
            raise ConfigError(f"model.P[{i}]", f"row sums to {sum(P[-1])}, expected 1")
    pi_raw = block.get("pi")
    if not isinstance(pi_raw, list) or len(pi_raw) != n:
        raise ConfigError("model.pi", f"expected {n} entries")
    pi = [_rational(x, f"model.pi[{i}]") for i, x in enumerate(pi_raw)]
    pi_star = None
    if "pi_star" in block:
        ps_raw = block["pi_star"]
        if not isinstance(ps_raw, list) or len(ps_raw) != n:
            raise ConfigError("model.pi_star", f"expected {n} entries")
        pi_star = [_rational(x, f"model.pi_star[{i}]") for i, x in enumerate(ps_raw)]
    precision = block.get("precision", "rational")
    if precision not in ("rational", "float64"):
        raise ConfigError("model.precision", f"expected rational|float64, got {precision!r}")
    try:
        model = MarkovModel(P, pi, pi_star, precision)
    except Exception as exc:  # surfacing validation with a field path
        raise ConfigError("model", str(exc)) from exc

    hz = doc.get("horizon")
    if not isinstance(hz, dict):
        raise ConfigError("horizon", "missing or not an object")
    D = hz.get("D")
    L = hz.get("L")
    if not isinstance(D, int) or D < 0:
        raise ConfigError("horizon.D", f"expected an integer >= 0, got {D!r}")
    if not isinstance(L, int) or L < 1:
        raise ConfigError("horizon.L", f"expected an integer >= 1, got {L!r}")
    if (D > HARD_CAP_DEPTH or L > HARD_CAP_LENGTH) and not unsafe_large:
        raise ConfigError(
            "horizon",
            f"D={D}, L={L} above the hard caps D,L <= {HARD_CAP_DEPTH}; exact "
            "mode is exponential (pass --unsafe-large to override)",
        )
    horizon = Horizon(D, L)

    queries_raw = doc.get("queries", ["X"])
    if not isinstance(queries_raw, list) or not queries_raw:
        raise ConfigError("queries", "expected a nonempty list of cylinder literals")
    queries = []
    for i, lit in enumerate(queries_raw):
        if not isinstance(lit, str):
            raise ConfigError(f"queries[{i}]", f"expected a string literal, got {lit!r}")
        try:
            queries.append(parse_literal(lit, n))
        except Exception as exc:
            raise ConfigError(f"queries[{i}]", str(exc)) from exc

    ladder_raw = doc.get("eps_ladder")
    if ladder_raw is None:
        eps_ladder: list[Fraction] = []
    else:
        if not isinstance(ladder_raw, list):
            raise ConfigError("eps_ladder", "expected a list of rationals")
        eps_ladder = [_rational(x, f"eps_ladder[{i}]") for i, x in enumerate(ladder_raw)]
        if any(e <= 0 for e in eps_ladder):
            raise ConfigError("eps_ladder", "entries must be > 0")
        if any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
            raise ConfigError("eps_ladder", "must be strictly decreasing")

    grid_raw = doc.get("alpha_grid", [k / 10 for k in range(1, 10)])
    if not isinstance(grid_raw, list):
        raise ConfigError("alpha_grid", "expected a list of reals in [0,1]")
    grid = []
    for i, a in enumerate(grid_raw):
        if not isinstance(a, (int, float)) or isinstance(a, bool) or not 0 <= a <= 1:
            raise ConfigError(f"alpha_grid[{i}]", f"expected a real in [0,1], got {a!r}")
        grid.append(float(a))
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("alpha_grid", "must be strictly increasing")

    mode = doc.get("mode")
    if mode is not None and mode not in MODES:
        raise ConfigError("mode", f"expected one of {MODES}, got {mode!r}")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed", f"expected an integer, got {seed!r}")
    output = doc.get("output", "out/ddm")
    if not isinstance(output, str):
        raise ConfigError("output", f"expected a string, got {output!r}")

    return RunConfig(model, queries, horizon, eps_ladder, grid, mode, seed, output, doc)


def load_config(path: str, unsafe_large: bool = False) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("$", f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    return parse_config(doc, unsafe_large)


def stationary_selftest_config() -> RunConfig:
    """Built-in trivial-density model for the selftest mode."""
    doc = {
        "model": {
            "N": 2,
            "P": [["1/2", "1/2"], ["1/2", "1/2"]],
            "pi": ["1/2", "1/2"],
            "pi_star": ["1/2", "1/2"],
            "precision": "rational",
        },
        "horizon": {"D": 2, "L": 2},
        "queries": ["X", "0[2]"],
        "alpha_grid": [k / 10 for k in range(1, 10)],
        "output": "out/selftest",
    }
    return parse_config(doc)
