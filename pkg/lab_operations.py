"""Parameter-mapping front end shared by the CLI and the JSON service.

Each ``run_*`` function takes a resolved :class:`~lab_config.LabConfig` and a
plain mapping of parameters (an argparse namespace turned into a dict, or a
request body) and returns a JSON-ready result dictionary. Missing or
malformed parameters raise :class:`~lab_errors.ParameterError`.

Example:
    >>> from lab_config import LabConfig
    >>> from lab_operations import run_operation
    >>> config = LabConfig().merged({"resolution": 6})
    >>> record = run_operation("bmo", config, {"b": "const:3"})
    >>> record["results"]["constant"]
    0.0
"""

from __future__ import annotations

import inspect
import logging
import math
import subprocess
import time
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from cube_families import CubeFamily, cube_record
from dyadic_grid import DyadicGrid, SampledFunction
from function_families import evaluate_parameter, sample_function
from integral_operators import CommutatorSpec, HaarShift, operator_norm_estimate, parse_operator
from lab_config import LabConfig
from lab_errors import LabError, ParameterError
from orlicz import luxemburg_norm, orlicz_maximal, parse_young
from oscillation import cz_cubes, cz_decompose, lerner_decompose
from sharpness_lab import SWEEPS, SweepResult
from weight_constants import WeightPair, apq_constant, bmo_constant, bump_constant

logger = logging.getLogger(__name__)

LAB_VERSION = "1.0.0"

FAMILY_KINDS = ("dyadic", "dyadic+domain", "all-cubes")


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and non-finite floats for JSON output."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Path):
        return str(value)
    return value


def provenance(config: LabConfig) -> dict[str, Any]:
    """Version, git description, tolerances and resolution of a run."""
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).parent, capture_output=True, text=True, timeout=5,
        )
        git = described.stdout.strip() if described.returncode == 0 else None
    except (OSError, subprocess.SubprocessError):
        git = None
    return {
        "version": LAB_VERSION,
        "git": git or "unknown",
        "resolution": config.resolution,
        "tolerance": config.tolerance,
        "quad_tolerance": config.quad_tolerance,
        "seed": config.seed,
    }


def _require(params: Mapping[str, Any], key: str) -> Any:
    value = params.get(key)
    if value is None or value == "":
        raise ParameterError(f"missing parameter '{key}'", field=key, value=None)
    return value


def _number(params: Mapping[str, Any], key: str, default: float | None = None,
            variables: dict[str, float] | None = None) -> float | None:
    value = params.get(key, default)
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return evaluate_parameter(str(value), variables)
    except (ValueError, SyntaxError, KeyError, ZeroDivisionError) as exc:
        raise ParameterError(f"cannot read '{key}' as a number", field=key, value=value) from exc


def _number_list(params: Mapping[str, Any], key: str) -> list[float] | None:
    value = params.get(key)
    if value is None:
        return None
    items = value.split(",") if isinstance(value, str) else list(value)
    try:
        return [float(evaluate_parameter(str(v))) if not isinstance(v, (int, float)) else float(v)
                for v in items if str(v).strip()]
    except (ValueError, SyntaxError, KeyError, ZeroDivisionError) as exc:
        raise ParameterError(f"cannot read '{key}' as a number list", field=key, value=value) from exc


def parse_variables(raw: Any) -> dict[str, float]:
    """``{"delta": 0.5}`` or ``["delta=0.5", ...]`` into a variables mapping."""
    if not raw:
        return {}
    if isinstance(raw, Mapping):
        return {str(k): float(v) for k, v in raw.items()}
    out: dict[str, float] = {}
    for item in raw:
        name, sep, text = str(item).partition("=")
        if not sep or not name.strip():
            raise ParameterError("variables take the form name=value", field="var", value=item)
        try:
            out[name.strip()] = evaluate_parameter(text, out)
        except (ValueError, SyntaxError, KeyError, ZeroDivisionError) as exc:
            raise ParameterError("cannot evaluate variable", field="var", value=item) from exc
    return out


def command_variables(config: LabConfig, params: Mapping[str, Any]) -> dict[str, float]:
    """Names usable in ids and numeric parameters of one command.

    ``n`` is the dimension; ``delta`` (also ``δ``), ``p``, ``q`` and ``alpha``
    are read from the parameters of the same name, and ``p'``, ``q'`` are the
    conjugates of ``p`` and ``q`` when those exceed 1. ``var`` entries win.
    """
    user = parse_variables(params.get("var"))
    variables = {"n": float(config.dimension), **user}
    for key in ("delta", "p", "q", "alpha"):
        if key in user:
            continue
        value = _number(params, key, variables=variables)
        if value is not None:
            variables[key] = value
    for key in ("p", "q"):
        value = variables.get(key)
        if value is not None and value > 1 and f"{key}'" not in user:
            variables[f"{key}'"] = value / (value - 1.0)
    return variables


def parse_domain(raw: Any, dimension: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """``"a:b"`` (every axis) or ``[[lo...], [hi...]]`` into box corners."""
    if raw is None:
        return (0.0,) * dimension, (1.0,) * dimension
    if isinstance(raw, str):
        lo_text, sep, hi_text = raw.partition(":")
        if not sep:
            raise ParameterError("domain takes the form lo:hi", field="domain", value=raw)
        try:
            lo = [evaluate_parameter(t) for t in lo_text.split(",")]
            hi = [evaluate_parameter(t) for t in hi_text.split(",")]
        except (ValueError, SyntaxError, KeyError, ZeroDivisionError) as exc:
            raise ParameterError("cannot read domain corners", field="domain", value=raw) from exc
    else:
        lo, hi = (list(map(float, corner)) for corner in raw)
    if len(lo) == 1:
        lo = lo * dimension
    if len(hi) == 1:
        hi = hi * dimension
    if len(lo) != dimension or len(hi) != dimension:
        raise ParameterError("domain corners must match the dimension", field="domain", value=raw)
    return tuple(lo), tuple(hi)


def build_function(function_id: str, config: LabConfig, params: Mapping[str, Any]) -> SampledFunction:
    """Sample a function id on the configured domain, or read ``csv:<path>``."""
    grid = DyadicGrid(config.dimension)
    if function_id.startswith("csv:"):
        return SampledFunction.from_csv(function_id[4:], grid)
    lo, hi = parse_domain(params.get("domain"), config.dimension)
    variables = command_variables(config, params)
    return sample_function(function_id, grid, config.resolution, lo, hi, variables)


def build_family(config: LabConfig, params: Mapping[str, Any], f: SampledFunction) -> CubeFamily:
    kind = params.get("family") or "dyadic+domain"
    if kind == "dyadic":
        return CubeFamily.dyadic_only(config.levels)
    if kind == "dyadic+domain":
        return CubeFamily(levels=config.levels)
    if kind == "all-cubes":
        return CubeFamily.all_cubes(f)
    raise ParameterError(f"family must be one of {', '.join(FAMILY_KINDS)}", field="family", value=kind)


def _field_summary(g: SampledFunction) -> dict[str, float]:
    values = g.samples
    return {
        "max": float(np.max(values)),
        "min": float(np.min(values)),
        "integral": g.integral(),
        "l2_norm": float(np.sqrt(np.sum(values ** 2) * g.cell_volume)),
    }


def _write_samples(g: SampledFunction, params: Mapping[str, Any]) -> str | None:
    path = params.get("output_path")
    if path:
        g.to_csv(path)
    return path


def run_luxemburg(config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    """Luxemburg norm of ``f`` on the domain cube."""
    f = build_function(_require(params, "f"), config, params)
    phi = parse_young(_require(params, "young"), command_variables(config, params))
    cube = f.domain_cube()
    value = luxemburg_norm(f, cube, phi, config.tolerance)
    return {"norm": value, "young": phi.describe(), "cube": cube_record(cube), "resolution": config.resolution}


def run_maximal(config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    """Orlicz maximal function summary; ``output_path`` receives the samples."""
    f = build_function(_require(params, "f"), config, params)
    variables = command_variables(config, params)
    phi = parse_young(params.get("young") or "power:1", variables)
    alpha = _number(params, "alpha", 0.0, variables)
    flavor = params.get("flavor") or "dyadic"
    g = orlicz_maximal(f, phi, alpha, flavor=flavor, rtol=config.tolerance)
    return {"young": phi.describe(), "alpha": alpha, "flavor": flavor, **_field_summary(g),
            "samples_path": _write_samples(g, params), "resolution": config.resolution}


def run_apq(config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    w = build_function(_require(params, "w"), config, params)
    variables = command_variables(config, params)
    p = _number(params, "p", 2.0, variables)
    q = _number(params, "q", p, variables)
    result = apq_constant(w, p, q, build_family(config, params, w))
    return {"p": p, "q": q, **result.to_dict()}


def run_bump(config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    """Two-weight bump constant with Young functions A and B."""
    u = build_function(_require(params, "u"), config, params)
    v = build_function(_require(params, "v"), config, params)
    variables = command_variables(config, params)
    p = _number(params, "p", 2.0, variables)
    pair = WeightPair(u, v, p, _number(params, "q", None, variables), _number(params, "alpha", 0.0, variables))
    A = parse_young(_require(params, "A"), variables)
    B = parse_young(_require(params, "B"), variables)
    result = bump_constant(pair, A, B, build_family(config, params, u))
    return {"A": A.describe(), "B": B.describe(), "p": pair.p, "q": pair.q, "alpha": pair.alpha,
            **result.to_dict()}


def run_bmo(config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    b = build_function(_require(params, "b"), config, params)
    return bmo_constant(b, build_family(config, params, b)).to_dict()


def run_transform(config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    """Apply an operator (or its commutator with a symbol) and summarize."""
    f = build_function(_require(params, "f"), config, params)
    operator = parse_operator(_require(params, "op"))
    if isinstance(operator, HaarShift) and config.levels is not None:
        operator = operator.with_window(config.levels)
    symbol_id = params.get("commutator_symbol")
    if symbol_id:
        g = CommutatorSpec(build_function(symbol_id, config, params), operator).apply(f)
    else:
        g = operator.apply(f)
    out = {"operator": operator.describe(), "commutator_symbol": symbol_id,
           "input_l2_norm": _field_summary(f)["l2_norm"], **_field_summary(g),
           "samples_path": _write_samples(g, params), "resolution": config.resolution}
    if params.get("estimate_norm") and not symbol_id:
        estimate = operator_norm_estimate(operator, f, seed=config.seed)
        out["norm_estimate"] = {"value": estimate.value, "rayleigh": estimate.rayleigh,
                                "power_iteration": estimate.power_iteration,
                                "dictionary_size": estimate.dictionary_size}
    return out


def run_decompose(config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    """CZ cubes at one height, the CZ tree, or the Lerner tree of ``f``."""
    mode = _require(params, "mode")
    f = build_function(_require(params, "f"), config, params)
    if mode == "cz" and params.get("height") is not None:
        found = cz_cubes(f, _number(params, "height"))
        return {
            "mode": "cz",
            "height": found.height,
            "root_selected": found.root_selected,
            "cubes": [{"level": c.level, "index": i, "average": c.statistic, "children": [],
                       **cube_record(c.cube)} for i, c in enumerate(found.cubes)],
        }
    if mode == "cz":
        tree = cz_decompose(f, _number(params, "base"))
    elif mode == "lerner":
        tree = lerner_decompose(f)
    else:
        raise ParameterError("mode must be cz or lerner", field="mode", value=mode)
    return {"mode": mode, "tree": tree.to_record(), "invariants": tree.check_invariants()}


def sweep_arguments(name: str, config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    """Keyword arguments for the named sweep, keeping only those it accepts."""
    try:
        sweep = SWEEPS[name]
    except KeyError:
        raise ParameterError("unknown sweep", field="sweep", value=name) from None
    variables = command_variables(config, params)
    candidates = {
        "n": config.dimension,
        "p": _number(params, "p", None, variables),
        "q": _number(params, "q", None, variables),
        "alpha": _number(params, "alpha", None, variables),
        "k": None if params.get("k") is None else int(_number(params, "k")),
        "deltas": _number_list(params, "deltas"),
        "radii": _number_list(params, "radii"),
        "resolution": params.get("sweep_resolution"),
        "with_constant": params.get("with_constant"),
        "cross_check": params.get("cross_check"),
        "tail_fraction": _number(params, "tail_fraction"),
        "rtol": config.quad_tolerance,
    }
    accepted = inspect.signature(sweep).parameters
    return {k: v for k, v in candidates.items() if k in accepted and v is not None}


def run_sweep(config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    """Run a named sweep; ``output_path`` receives its CSV table."""
    name = _require(params, "name")
    kwargs = sweep_arguments(name, config, params)
    result: SweepResult = SWEEPS[name](**kwargs)
    path = params.get("output_path")
    if path:
        result.to_csv(path)
    return {**result.to_dict(), "csv_path": path}


OPERATIONS: dict[str, Callable[[LabConfig, Mapping[str, Any]], dict[str, Any]]] = {
    "luxemburg": run_luxemburg,
    "maximal": run_maximal,
    "apq": run_apq,
    "bump": run_bump,
    "bmo": run_bmo,
    "transform": run_transform,
    "decompose": run_decompose,
    "sweep": run_sweep,
}


def run_operation(name: str, config: LabConfig, params: Mapping[str, Any]) -> dict[str, Any]:
    """Dispatch ``name`` and wrap the result as ``{inputs, results, provenance}``.

    Raises:
        ParameterError: For an unknown operation.
        LabError: Whatever the operation raises; it is logged first.
    """
    try:
        operation = OPERATIONS[name]
    except KeyError:
        raise ParameterError("unknown operation", field="command", value=name) from None
    started = time.perf_counter()
    try:
        results = operation(config, params)
    except LabError as err:
        logger.error("Operation failed", extra={"operation": name, "code": err.code, "error": err.message})
        raise
    elapsed = time.perf_counter() - started
    logger.info("Operation finished", extra={"operation": name, "elapsed": elapsed})
    inputs = {k: v for k, v in params.items() if v is not None}
    return to_jsonable({
        "inputs": {"command": name, "dimension": config.dimension, **inputs},
        "results": {**results, "runtime": elapsed},
        "provenance": provenance(config),
    })
