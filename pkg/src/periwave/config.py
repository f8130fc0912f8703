"""TOML run configuration: parsing, validation, and object construction.

The schema is versioned; every command embeds the resolved configuration
in its artifacts so a run can be repeated from any output file.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .grids import Grid
from .materials import (
    Bond,
    Coupling,
    DiscreteCoupling,
    build_quadrature,
    coefficient_family,
    potential_library,
    silling_medium,
)
from .solver import SolveOptions

__all__ = ["RunConfig", "load_config", "parse_config", "build_coupling", "build_grid", "build_solver_options"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    grid: Grid
    coupling: Coupling
    solver: SolveOptions
    outdir: Optional[str]
    seed: Optional[int]

    def section(self, name: str) -> dict:
        value = self.raw.get(name)
        if value is None:
            raise ConfigError(f"config is missing the [{name}] section")
        if not isinstance(value, dict):
            raise ConfigError(f"[{name}] must be a table")
        return value

    def resolved(self) -> dict:
        """Everything needed to repeat the run, defaults filled in."""
        solver = asdict(self.solver)
        solver.pop("initial_profile", None)
        return {
            "schema_version": SCHEMA_VERSION,
            "grid": {"L": self.grid.L, "N": self.grid.N},
            "material": self.raw.get("material", {}),
            "solver": solver,
            "seed": self.seed,
            "sections": {
                k: v
                for k, v in self.raw.items()
                if k not in ("schema_version", "grid", "material", "solver", "seed")
            },
        }


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}")


_MISSING = object()


def _get(section: dict, key: str, where: str, kind=None, default=_MISSING):
    if key not in section:
        if default is not _MISSING:
            return default
        raise ConfigError(f"[{where}] is missing required key {key!r}")
    value = section[key]
    if kind is not None and (not isinstance(value, kind) or isinstance(value, bool) and kind is not bool):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(f"[{where}] key {key!r} must be {names}, got {type(value).__name__}")
    return value


def build_grid(section: dict) -> Grid:
    L = _get(section, "L", "grid", (int, float))
    N = _get(section, "N", "grid", int)
    try:
        return Grid(float(L), N)
    except ValueError as exc:
        raise ConfigError(f"[grid] invalid: {exc}")


def _build_potential(spec, where: str):
    if not isinstance(spec, dict):
        raise ConfigError(f"[{where}] potential must be a table with a 'name'")
    name = _get(spec, "name", where, str)
    params = _get(spec, "params", where, dict, default={})
    try:
        return potential_library(name, **params)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{where}] potential {name!r}: {exc}")


def build_coupling(section: dict) -> Coupling:
    kind = _get(section, "coupling", "material", str)
    if kind == "discrete":
        bond_specs = _get(section, "bonds", "material", list)
        if not bond_specs:
            raise ConfigError("[material] needs at least one [[material.bonds]] entry")
        bonds = []
        for i, spec in enumerate(bond_specs):
            where = f"material.bonds[{i}]"
            if not isinstance(spec, dict):
                raise ConfigError(f"[{where}] must be a table")
            xi = _get(spec, "xi", where, (int, float))
            pot = _build_potential(_get(spec, "potential", where, dict), where)
            try:
                bonds.append(Bond(float(xi), pot))
            except ValueError as exc:
                raise ConfigError(f"[{where}]: {exc}")
        try:
            return DiscreteCoupling(tuple(bonds))
        except ValueError as exc:
            raise ConfigError(f"[material]: {exc}")

    if kind == "continuous":
        if section.get("medium") == "silling":
            try:
                return silling_medium(
                    H=float(_get(section, "H", "material", (int, float))),
                    c2=float(_get(section, "c2", "material", (int, float), default=0.5)),
                    c3=float(_get(section, "c3", "material", (int, float), default=-1.0 / 6.0)),
                    xi_step=float(_get(section, "xi_step", "material", (int, float), default=0.01)),
                )
            except ValueError as exc:
                raise ConfigError(f"[material]: {exc}")
        alpha_spec = _get(section, "alpha", "material", dict)
        beta_spec = _get(section, "beta", "material", dict)
        pot = _build_potential(_get(section, "potential", "material", dict), "material")
        try:
            alpha = coefficient_family(
                _get(alpha_spec, "name", "material.alpha", str), **alpha_spec.get("params", {})
            )
            beta = coefficient_family(
                _get(beta_spec, "name", "material.beta", str), **beta_spec.get("params", {})
            )
            return build_quadrature(
                alpha,
                beta,
                pot,
                xi_max=float(_get(section, "xi_max", "material", (int, float))),
                xi_step=float(_get(section, "xi_step", "material", (int, float))),
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[material]: {exc}")

    raise ConfigError(f"[material] coupling must be 'discrete' or 'continuous', got {kind!r}")


_SOLVER_KEYS = {
    "max_iterations": int,
    "tol_r": (int, float),
    "tol_stagnation": (int, float),
    "initial": str,
    "initial_width": (int, float),
    "sign": str,
    "record_history": bool,
    "cone_tol": (int, float),
}


_FLOAT_SOLVER_KEYS = ("tol_r", "tol_stagnation", "initial_width", "cone_tol")


def build_solver_options(section: dict) -> SolveOptions:
    kwargs = {}
    for key, value in section.items():
        if key not in _SOLVER_KEYS:
            raise ConfigError(f"[solver] unknown key {key!r}")
        value = _get(section, key, "solver", _SOLVER_KEYS[key])
        kwargs[key] = float(value) if key in _FLOAT_SOLVER_KEYS else value
    try:
        return SolveOptions(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[solver]: {exc}")


def parse_config(path) -> RunConfig:
    raw = load_config(path)
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    grid = build_grid(_get(raw, "grid", "config", dict))
    coupling = build_coupling(_get(raw, "material", "config", dict))
    solver = build_solver_options(raw.get("solver", {}))
    output = raw.get("output", {})
    outdir = output.get("directory") if isinstance(output, dict) else None
    seed = raw.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return RunConfig(raw=raw, grid=grid, coupling=coupling, solver=solver, outdir=outdir, seed=seed)
