"""Run configuration: TOML parsing with field-path diagnostics, plus the
documented defaults used when no file is given."""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .designs import (
    BOIN,
    CCD,
    CRM,
    DESIGNS,
    I3PLUS3,
    INTCRM,
    MTPI,
    MTPI2,
    DesignConfig,
)

__all__ = [
    "ConfigError",
    "TrialSettings",
    "SimSettings",
    "OutputSettings",
    "RunConfig",
    "load_config",
    "default_designs",
    "default_config",
    "resolve_seed",
    "DEFAULT_SEED",
]

# Fixed default master seed; override with --seed or the SEED environment
# variable (flag wins).
DEFAULT_SEED = 1729

SEED_ENV_VAR = "SEED"


class ConfigError(ValueError):
    """A configuration value is missing or invalid; the message names the
    offending field by path."""


@dataclass(frozen=True)
class TrialSettings:
    n_doses: int = 5
    max_n: int = 30
    cohort_size: int = 3
    start_dose: int = 1


@dataclass(frozen=True)
class SimSettings:
    scenarios: str = "random"  # "random", "fixed", or a file path
    n_scenarios: int = 200
    replicates: int = 400
    doses_mix: tuple[int, ...] = (4, 5, 6)
    seed: int | None = None


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "out"
    fmt: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    designs: tuple[DesignConfig, ...]
    trial: TrialSettings = TrialSettings()
    sim: SimSettings = SimSettings()
    output: OutputSettings = OutputSettings()


_DESIGN_KEYS = {
    "name": str,
    "p_T": float,
    "eps1": float,
    "eps2": float,
    "phi_E": float,
    "phi_D": float,
    "skeleton": list,
    "delta": float,
    "sigma2": float,
    "prior_mtd": int,
    "safety_threshold": float,
}


def _typed(value, want, path: str):
    if want is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, want) or isinstance(value, bool):
        raise ConfigError(
            f"config error at {path}: expected {want.__name__}, "
            f"got {type(value).__name__}"
        )
    return value


def _design_from_table(table: dict, path: str) -> DesignConfig:
    if "name" not in table:
        raise ConfigError(f"config error at {path}.name: missing design name")
    kwargs = {}
    for key, value in table.items():
        if key not in _DESIGN_KEYS:
            raise ConfigError(f"config error at {path}.{key}: unknown key")
        kwargs[key] = _typed(value, _DESIGN_KEYS[key], f"{path}.{key}")
    name = kwargs.pop("name")
    if name not in DESIGNS:
        raise ConfigError(
            f"config error at {path}.name: unknown design {name!r}; "
            f"expected one of {sorted(DESIGNS)}"
        )
    if "phi_E" in kwargs:
        kwargs["boin_phi_E"] = kwargs.pop("phi_E")
    if "phi_D" in kwargs:
        kwargs["boin_phi_D"] = kwargs.pop("phi_D")
    if "skeleton" in kwargs:
        kwargs["skeleton"] = tuple(
            _typed(q, float, f"{path}.skeleton[{i}]")
            for i, q in enumerate(kwargs["skeleton"])
        )
    try:
        return DesignConfig(design=name, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"config error at {path}: {exc}") from None


def _section(data: dict, name: str) -> dict:
    got = data.get(name, {})
    if not isinstance(got, dict):
        raise ConfigError(f"config error at {name}: expected a table")
    return got


def _pick(table: dict, path: str, key: str, want, default):
    if key not in table:
        return default
    return _typed(table[key], want, f"{path}.{key}")


def load_config(path: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config error in {path}: {exc}") from None

    raw_designs = data.get("design", [])
    if isinstance(raw_designs, dict):
        raw_designs = [raw_designs]
    if not raw_designs:
        raise ConfigError("config error at design: at least one [[design]] "
                          "section is required")
    designs = tuple(
        _design_from_table(tbl, f"design[{i}]")
        for i, tbl in enumerate(raw_designs)
    )
    if len({cfg.design for cfg in designs}) != len(designs):
        raise ConfigError("config error at design: duplicate design names")

    t = _section(data, "trial")
    trial = TrialSettings(
        n_doses=_pick(t, "trial", "doses", int, 5),
        max_n=_pick(t, "trial", "max_n", int, 30),
        cohort_size=_pick(t, "trial", "cohort_size", int, 3),
        start_dose=_pick(t, "trial", "start_dose", int, 1),
    )
    if trial.n_doses < 1:
        raise ConfigError("config error at trial.doses: must be >= 1")
    if not trial.max_n >= trial.cohort_size >= 1:
        raise ConfigError(
            "config error at trial.max_n/trial.cohort_size: need "
            "max_n >= cohort_size >= 1"
        )
    if not 1 <= trial.start_dose <= trial.n_doses:
        raise ConfigError(
            "config error at trial.start_dose: outside the dose range"
        )

    s = _section(data, "sim")
    sim = SimSettings(
        scenarios=_pick(s, "sim", "scenarios", str, "random"),
        n_scenarios=_pick(s, "sim", "n_scenarios", int, 200),
        replicates=_pick(s, "sim", "replicates", int, 400),
        doses_mix=tuple(
            _typed(v, int, f"sim.doses_mix[{i}]")
            for i, v in enumerate(_pick(s, "sim", "doses_mix", list, [4, 5, 6]))
        ),
        seed=_pick(s, "sim", "seed", int, None),
    )
    if sim.replicates < 1:
        raise ConfigError("config error at sim.replicates: must be >= 1")
    if sim.n_scenarios < 1:
        raise ConfigError("config error at sim.n_scenarios: must be >= 1")
    if any(d < 2 for d in sim.doses_mix) or not sim.doses_mix:
        raise ConfigError("config error at sim.doses_mix: dose counts >= 2")
    if sim.seed is not None and not 0 <= sim.seed < 2**64:
        raise ConfigError("config error at sim.seed: need a u64")

    o = _section(data, "output")
    output = OutputSettings(
        directory=_pick(o, "output", "dir", str, "out"),
        fmt=_pick(o, "output", "format", str, "csv"),
    )
    if output.fmt not in ("csv", "txt"):
        raise ConfigError("config error at output.format: csv or txt")

    return RunConfig(designs=designs, trial=trial, sim=sim, output=output)


def default_designs(tally_only: bool = False) -> tuple[DesignConfig, ...]:
    """All seven designs with the standard settings (target 0.3, interval
    half-widths 0.05, matched BOIN boundaries, skeleton half-width 0.05)."""
    names = [MTPI, MTPI2, BOIN, CCD, I3PLUS3]
    if not tally_only:
        names += [INTCRM, CRM]
    return tuple(DesignConfig(design=name) for name in names)


def default_config() -> RunConfig:
    return RunConfig(designs=default_designs())


def resolve_seed(flag_value: int | None, config_value: int | None) -> int:
    """Seed precedence: --seed flag, then the SEED environment variable,
    then the config file, then the documented default."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(
                f"environment variable {SEED_ENV_VAR} must be an integer, "
                f"got {env!r}"
            ) from None
    if config_value is not None:
        return config_value
    return DEFAULT_SEED
