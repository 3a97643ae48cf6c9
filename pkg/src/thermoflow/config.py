"""Line-based ``key = value`` configuration and the initial-data grammar.

Initial fields are sums of terms, each ``coeff * trig(k pi x) * trig(...)``
with one factor per axis at most, plus constants. Coordinates are
normalized by the box lengths, so ``sin(1πx)`` vanishes on both x-faces of
any box and ``cos(1πx)`` has zero normal derivative there. Both ``π`` and
``pi`` are accepted.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import HeatForm, SimConfig, State, check_galerkin_bound
from .elliptic import SolverSpec
from .errors import ConfigError, InvalidInputError
from .grid import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField, boundary_mask

_AXIS_LETTERS = "xyz"

_KNOWN_KEYS = frozenset({
    "dim", "n_points", "lengths", "mu", "dt", "t_end", "heat_form",
    "galerkin_modes", "record_every", "solver_tol", "preset",
    "u0", "v0", "theta0", "seed", "snapshot_every",
})

PRESETS: dict[str, dict[str, str]] = {
    # 1D reference scenario: the workhorse of the verification suites.
    "reference1d": {
        "dim": "1", "n_points": "257", "lengths": "1.0",
        "mu": "1.0", "dt": "0.001", "t_end": "200.0",
        "heat_form": "theta", "record_every": "100",
        "u0": "0", "v0": "0.2*sin(1πx)", "theta0": "1 + 0.3*cos(1πx)",
    },
    # Same data with the coupling switched off: wave and heat evolve
    # independently, the negative control for the decay checks.
    "decoupled": {
        "dim": "1", "n_points": "257", "lengths": "1.0",
        "mu": "0.0", "dt": "0.001", "t_end": "200.0",
        "heat_form": "theta", "record_every": "100",
        "u0": "0", "v0": "0.2*sin(1πx)", "theta0": "1 + 0.3*cos(1πx)",
    },
    # Exact rest state; every step must be a fixed point.
    "equilibrium": {
        "dim": "1", "n_points": "65", "lengths": "1.0",
        "mu": "1.0", "dt": "0.001", "t_end": "1.0",
        "heat_form": "theta", "record_every": "10",
        "u0": "0", "v0": "0", "theta0": "1",
    },
}

_DEFAULTS: dict[str, str] = {
    "dim": "1", "n_points": "65", "lengths": "1.0",
    "mu": "1.0", "dt": "0.001", "t_end": "1.0",
    "heat_form": "theta", "record_every": "1",
    "u0": "0", "v0": "0", "theta0": "1",
    "solver_tol": "1e-10", "snapshot_every": "0",
}


@dataclass
class ParsedConfig:
    grid: Grid
    initial: State
    sim: SimConfig
    seed: Optional[int]
    snapshot_every: int
    raw: dict[str, str]


# ---------------------------------------------------------------------------
# Expression grammar


_FACTOR_RE = re.compile(r"^(sin|cos)\((\d*)(?:π|pi)([xyz])\)$")


@dataclass(frozen=True)
class _Term:
    coeff: float
    factors: tuple[tuple[str, int, int], ...]  # (func, k, axis)


def _split_terms(text: str, line: Optional[int]) -> list[tuple[float, str]]:
    s = text.replace(" ", "").replace("\t", "")
    if not s:
        raise ConfigError("empty expression", line)
    pieces: list[tuple[float, str]] = []
    sign, start = 1.0, 0
    if s[0] in "+-":
        sign = -1.0 if s[0] == "-" else 1.0
        start = 1
    cur = start
    for i in range(start, len(s)):
        if s[i] in "+-" and s[i - 1] not in "eE(":
            pieces.append((sign, s[cur:i]))
            sign = -1.0 if s[i] == "-" else 1.0
            cur = i + 1
    pieces.append((sign, s[cur:]))
    if any(not chunk for _, chunk in pieces):
        raise ConfigError(f"malformed expression {text!r}", line)
    return pieces


def _parse_term(sign: float, chunk: str, dim: int, line: Optional[int]) -> _Term:
    coeff = sign
    factors = []
    for factor in chunk.split("*"):
        m = _FACTOR_RE.match(factor)
        if m:
            func, k_text, letter = m.groups()
            k = int(k_text) if k_text else 1
            if k < 1:
                raise ConfigError(f"mode number must be >= 1 in {factor!r}", line)
            axis = _AXIS_LETTERS.index(letter)
            if axis >= dim:
                raise ConfigError(
                    f"coordinate {letter!r} needs dim >= {axis + 1}, got dim = {dim}", line)
            factors.append((func, k, axis))
            continue
        try:
            coeff *= float(factor)
        except ValueError:
            raise ConfigError(f"cannot parse factor {factor!r} "
                              "(expected a number or sin/cos(k*pi*axis))", line) from None
    return _Term(coeff, tuple(factors))


def parse_expression(text: str, dim: int, line: Optional[int] = None) -> list[_Term]:
    return [_parse_term(sign, chunk, dim, line) for sign, chunk in _split_terms(text, line)]


def sample_expression(terms: list[_Term], grid: Grid) -> np.ndarray:
    """Evaluate a parsed expression at every grid point."""
    coords = [grid.axis_coords(ax) / grid.lengths[ax] for ax in range(grid.dim)]
    out = np.zeros(grid.shape)
    for term in terms:
        if term.coeff == 0.0:
            continue
        vals = np.full(grid.shape, term.coeff)
        for func, k, axis in term.factors:
            shape = [1] * grid.dim
            shape[axis] = -1
            trig = np.sin if func == "sin" else np.cos
            vals = vals * trig(k * np.pi * coords[axis]).reshape(shape)
        out += vals
    return out


def _require_dirichlet_terms(terms: list[_Term], dim: int, key: str, line: Optional[int]) -> None:
    for term in terms:
        if term.coeff == 0.0:
            continue
        sin_axes = {axis for func, _, axis in term.factors if func == "sin"}
        if sin_axes != set(range(dim)):
            raise ConfigError(
                f"{key} must vanish on the boundary: every term needs a sin factor "
                f"on every axis (offending term has sin on axes {sorted(sin_axes)})", line)


# ---------------------------------------------------------------------------
# File parsing


def _read_pairs(text: str) -> dict[str, tuple[str, int]]:
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        stripped = raw_line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno)
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in pairs:
            raise ConfigError(f"duplicate key {key!r} (first set on line {pairs[key][1]})", lineno)
        if not value:
            raise ConfigError(f"key {key!r} has no value", lineno)
        pairs[key] = (value, lineno)
    return pairs


def _get(resolved, key, caster, caster_name):
    value, line = resolved[key]
    try:
        return caster(value)
    except (ValueError, TypeError):
        raise ConfigError(f"key {key!r} expects {caster_name}, got {value!r}", line) from None


def _int_list(value: str) -> tuple[int, ...]:
    return tuple(int(v.strip()) for v in value.split(","))


def _float_list(value: str) -> tuple[float, ...]:
    return tuple(float(v.strip()) for v in value.split(","))


def parse_config(text: str) -> ParsedConfig:
    """Parse config text into (grid, initial state, run parameters).

    Preset values are applied first; explicit keys override them
    regardless of their position in the file.
    """
    pairs = _read_pairs(text)

    resolved: dict[str, tuple[str, Optional[int]]] = {
        k: (v, None) for k, v in _DEFAULTS.items()
    }
    if "preset" in pairs:
        name, line = pairs["preset"]
        if name not in PRESETS:
            raise ConfigError(
                f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}", line)
        for k, v in PRESETS[name].items():
            resolved[k] = (v, line)
    for k, (v, line) in pairs.items():
        if k != "preset":
            resolved[k] = (v, line)

    dim = _get(resolved, "dim", int, "an integer")
    if not 1 <= dim <= 3:
        raise ConfigError(f"dim must be 1, 2, or 3, got {dim}", resolved["dim"][1])

    n_points = _get(resolved, "n_points", _int_list, "an integer or comma list")
    lengths = _get(resolved, "lengths", _float_list, "a number or comma list")
    if len(n_points) == 1:
        n_points = n_points * dim
    if len(lengths) == 1:
        lengths = lengths * dim
    if len(n_points) != dim:
        raise ConfigError(f"n_points has {len(n_points)} entries for dim = {dim}",
                          resolved["n_points"][1])
    if len(lengths) != dim:
        raise ConfigError(f"lengths has {len(lengths)} entries for dim = {dim}",
                          resolved["lengths"][1])
    try:
        grid = Grid(n_points, lengths)
    except InvalidInputError as e:
        raise ConfigError(str(e), resolved["n_points"][1]) from None

    heat_text, heat_line = resolved["heat_form"]
    try:
        heat_form = HeatForm(heat_text.lower())
    except ValueError:
        raise ConfigError(f"heat_form must be 'theta' or 'tau', got {heat_text!r}",
                          heat_line) from None

    galerkin: Optional[int] = None
    if "galerkin_modes" in resolved:
        text_value, line = resolved["galerkin_modes"]
        if text_value.lower() not in ("none", ""):
            galerkin = _get(resolved, "galerkin_modes", int, "an integer")

    solver = SolverSpec(
        rel_tolerance=_get(resolved, "solver_tol", float, "a number"),
        method="spectral",
    )
    try:
        sim = SimConfig(
            mu=_get(resolved, "mu", float, "a number"),
            dt=_get(resolved, "dt", float, "a number"),
            t_end=_get(resolved, "t_end", float, "a number"),
            heat_form=heat_form,
            galerkin_modes=galerkin,
            solver=solver,
            record_every=_get(resolved, "record_every", int, "an integer"),
        )
        check_galerkin_bound(grid, sim)
    except InvalidInputError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None

    initial = _build_initial(grid, resolved)

    seed = _get(resolved, "seed", int, "an integer") if "seed" in pairs else None
    snapshot_every = _get(resolved, "snapshot_every", int, "an integer")
    if snapshot_every < 0:
        raise ConfigError("snapshot_every must be >= 0", resolved["snapshot_every"][1])

    raw = {k: v for k, (v, _) in sorted(resolved.items())}
    if "preset" in pairs:
        raw["preset"] = pairs["preset"][0]
    return ParsedConfig(grid=grid, initial=initial, sim=sim, seed=seed,
                        snapshot_every=snapshot_every, raw=raw)


def _vector_from_key(grid: Grid, resolved, key: str) -> VectorField:
    text, line = resolved[key]
    parts = [p for p in text.split(",")]
    if len(parts) == 1 and len(parts) != grid.dim:
        parts = parts * grid.dim  # a single scalar expression broadcasts
    if len(parts) != grid.dim:
        raise ConfigError(f"{key} needs {grid.dim} comma-separated components", line)
    comps = []
    mask = boundary_mask(grid)
    for part in parts:
        terms = parse_expression(part, grid.dim, line)
        _require_dirichlet_terms(terms, grid.dim, key, line)
        values = sample_expression(terms, grid)
        values[mask] = 0.0  # pin the sampled sines to exact zeros
        comps.append(ScalarField(grid, values, DIRICHLET))
    return VectorField(tuple(comps))


def _build_initial(grid: Grid, resolved) -> State:
    u0 = _vector_from_key(grid, resolved, "u0")
    v0 = _vector_from_key(grid, resolved, "v0")
    theta_text, theta_line = resolved["theta0"]
    terms = parse_expression(theta_text, grid.dim, theta_line)
    theta_values = sample_expression(terms, grid)
    if np.min(theta_values) <= 0.0:
        raise ConfigError(
            f"theta0 must be strictly positive everywhere; sampled minimum "
            f"{np.min(theta_values):.6g}", theta_line)
    theta = ScalarField(grid, theta_values, NEUMANN)
    return State(0.0, u0, v0, theta)
