"""INI-style key=value run configuration.

One flat namespace shared by all subcommands: a small schema maps each
key to a parser, a default, and a help line. Unknown keys are rejected
with the offending line number; '#' and ';' start comments. Environment
variables override file values ("ANISOFAST_" + upper-cased key).
"""

from __future__ import annotations

import os
from typing import Any, Callable

from .exponents import ModelParams
from .grids import Grid, as_tuple
from .solver import SolverConfig

__all__ = [
    "ENV_PREFIX",
    "SCHEMA",
    "ConfigError",
    "parse_config",
    "load_config",
    "describe_schema",
    "model_params",
    "grid",
    "solver_config",
]

ENV_PREFIX = "ANISOFAST_"


class ConfigError(ValueError):
    pass


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_float_list(s: str) -> tuple[float, ...]:
    return tuple(float(part) for part in s.split(","))


def _parse_int_list(s: str) -> tuple[int, ...]:
    return tuple(int(part) for part in s.split(","))


def _optional(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def inner(s: str):
        if s.lower() in ("", "none"):
            return None
        return parse(s)

    return inner


def _choice(*allowed: str) -> Callable[[str], str]:
    def inner(s: str) -> str:
        if s not in allowed:
            raise ValueError(f"must be one of {allowed}, got {s!r}")
        return s

    return inner


# key -> (parser, default, help)
SCHEMA: dict[str, tuple[Callable[[str], Any], Any, str]] = {
    "N": (int, 2, "space dimension (2 or 3)"),
    "m": (_parse_float_list, (0.75, 0.75), "per-axis exponents, comma separated"),
    "allow_linear": (_parse_bool, False, "accept m_i = 1 axes"),
    "extent": (_parse_float_list, (10.0,), "box half-widths (one value broadcasts)"),
    "npts": (_parse_int_list, (129,), "nodes per axis (one value broadcasts)"),
    "kind": (_choice("bump", "box", "barenblatt"), "bump", "initial data shape"),
    "mass": (float, 1.0, "total mass of the initial data"),
    "center": (_parse_float_list, (0.0,), "data center (one value broadcasts)"),
    "radius": (_parse_float_list, (1.0,), "data radius (one value broadcasts)"),
    "t_start": (float, 1.0, "initial time stamp of the data"),
    "t_end": (float, 2.0, "final time of an evolve run"),
    "record_every": (_optional(float), None, "diagnostic record spacing"),
    "eps": (_optional(float), None, "absolute regularization floor"),
    "eps_factor": (float, 1e-8, "floor as a fraction of max(u0) when eps unset"),
    "dt_policy": (_choice("cfl", "fixed"), "cfl", "time step policy"),
    "dt": (_optional(float), None, "fixed time step (dt_policy = fixed)"),
    "safety": (float, 0.4, "CFL safety factor in (0, 1]"),
    "boundary": (_choice("zero", "eps"), "zero", "Dirichlet boundary value"),
    "tol_rel": (float, 1e-5, "relaxation stall threshold per unit tau"),
    "check_every": (float, 0.25, "relaxation convergence check spacing in tau"),
    "tau_max": (float, 40.0, "relaxation budget in tau"),
    "stages": (_parse_int_list, (4, 2, 1), "coarsening factors for staged relaxation"),
    "levels": (_optional(_parse_float_list), None, "contour levels to export"),
    "barrier_slack": (float, 0.1, "window slack for barrier parameter selection"),
}


def parse_config(text: str, apply_env: bool = True) -> dict[str, Any]:
    """Parse key=value text against the schema; env vars override."""
    cfg = {key: default for key, (_, default, _) in SCHEMA.items()}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        parse = SCHEMA[key][0]
        try:
            cfg[key] = parse(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    if apply_env:
        for key in SCHEMA:
            env = os.environ.get(ENV_PREFIX + key.upper())
            if env is not None:
                parse = SCHEMA[key][0]
                try:
                    cfg[key] = parse(env)
                except ValueError as exc:
                    raise ConfigError(
                        f"environment {ENV_PREFIX + key.upper()}: {exc}"
                    ) from exc
    return cfg


def load_config(path: str | None, apply_env: bool = True) -> dict[str, Any]:
    if path is None:
        return parse_config("", apply_env=apply_env)
    with open(path) as fh:
        return parse_config(fh.read(), apply_env=apply_env)


def describe_schema() -> str:
    width = max(len(k) for k in SCHEMA)
    out = []
    for key, (_, default, help_text) in SCHEMA.items():
        out.append(f"  {key:<{width}}  {help_text} (default: {default})")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# constructors for the domain objects

def model_params(cfg: dict[str, Any]) -> ModelParams:
    return ModelParams(cfg["N"], cfg["m"], allow_linear=cfg["allow_linear"])


def grid(cfg: dict[str, Any]) -> Grid:
    ndim = cfg["N"]
    extent = as_tuple(
        cfg["extent"][0] if len(cfg["extent"]) == 1 else cfg["extent"], ndim, "extent"
    )
    npts = as_tuple(
        cfg["npts"][0] if len(cfg["npts"]) == 1 else cfg["npts"], ndim, "npts"
    )
    return Grid(extent, tuple(int(n) for n in npts))


def solver_config(cfg: dict[str, Any], t_end: float | None = None) -> SolverConfig:
    return SolverConfig(
        t_end=cfg["t_end"] if t_end is None else t_end,
        eps=cfg["eps"],
        eps_factor=cfg["eps_factor"],
        dt_policy=cfg["dt_policy"],
        dt=cfg["dt"],
        safety=cfg["safety"],
        boundary=cfg["boundary"],
        record_every=cfg["record_every"],
    )
