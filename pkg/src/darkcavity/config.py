"""Experiment configuration: a single strictly validated TOML file.

The cavity loss rate is the unit of every quantity in the file (kappa = 1 is
fixed).  Unknown keys are rejected anywhere in the document.  The resolved
configuration re-serializes canonically, so identical experiments hash
identically and the emitted echo re-parses to an equivalent configuration.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .model import SystemParams, make_localized_coupling, make_uniform_coupling


def _require_keys(table, known, path):
    unknown = sorted(set(table) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in [{path}]")


def _get(table, key, path, types, required=True, default=None):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key '{key}' in [{path}]")
        return default
    value = table[key]
    if isinstance(value, bool) and types is not bool:
        raise ConfigError(f"key '{key}' in [{path}] must not be a boolean")
    if types is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, types if isinstance(types, tuple) else (types,)):
        raise ConfigError(f"key '{key}' in [{path}] has wrong type {type(value).__name__}")
    return value


def _parse_complex(value, where):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: booleans are not numbers")
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where}: expected a number or [re, im] pair, got {value!r}")


@dataclass(frozen=True)
class CouplingSpec:
    kind: str                     # "uniform" | "localized" | "explicit"
    g: float = None
    perturbation: float = None
    seed: int = None
    matrix: tuple = None          # tuple of tuples of complex


@dataclass(frozen=True)
class SystemConfig:
    n_modes: int
    n_atoms: int
    gamma: float
    drives: tuple                 # tuple of complex
    coupling: CouplingSpec


@dataclass(frozen=True)
class SweepConfig:
    delta_min: float
    delta_max: float
    count: int
    pinned_delta_c: float = None
    method: str = "auto"


@dataclass(frozen=True)
class OracleConfig:
    n_max: int
    drive_ladder: tuple
    delta: float = 0.5
    gamma: float = None           # overrides the system gamma when set


@dataclass(frozen=True)
class DarkstateConfig:
    delta_c: float = 0.0


@dataclass(frozen=True)
class ObservabilityConfig:
    target_splitting: float = 1.0
    single_atom_g: float = None


@dataclass(frozen=True)
class OutputConfig:
    path: str = None
    precision: int = 17


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig
    sweep: SweepConfig = None
    oracle: OracleConfig = None
    darkstate: DarkstateConfig = field(default_factory=DarkstateConfig)
    observability: ObservabilityConfig = field(default_factory=ObservabilityConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


def _parse_coupling(table):
    path = "system.coupling"
    kind = _get(table, "kind", path, str)
    if kind == "uniform":
        _require_keys(table, ("kind", "g"), path)
        return CouplingSpec(kind=kind, g=_get(table, "g", path, float))
    if kind == "localized":
        _require_keys(table, ("kind", "g", "perturbation", "seed"), path)
        pert = _get(table, "perturbation", path, float)
        if pert < 0:
            raise ConfigError("coupling perturbation must be non-negative")
        return CouplingSpec(
            kind=kind, g=_get(table, "g", path, float), perturbation=pert,
            seed=_get(table, "seed", path, int, required=False),
        )
    if kind == "explicit":
        _require_keys(table, ("kind", "matrix"), path)
        raw = _get(table, "matrix", path, list)
        rows = []
        for i, row in enumerate(raw):
            if not isinstance(row, list):
                raise ConfigError(f"coupling matrix row {i} is not a list")
            rows.append(tuple(_parse_complex(v, f"coupling matrix[{i}][{j}]")
                              for j, v in enumerate(row)))
        if len({len(r) for r in rows}) > 1:
            raise ConfigError("coupling matrix rows have unequal lengths")
        return CouplingSpec(kind=kind, matrix=tuple(rows))
    raise ConfigError(f"unknown coupling kind {kind!r}")


def _parse_system(table):
    path = "system"
    _require_keys(table, ("n_modes", "n_atoms", "gamma", "drives", "coupling"), path)
    n_modes = _get(table, "n_modes", path, int)
    n_atoms = _get(table, "n_atoms", path, int)
    gamma = _get(table, "gamma", path, float, required=False, default=0.0)
    raw_drives = _get(table, "drives", path, list)
    drives = tuple(_parse_complex(v, f"drives[{i}]") for i, v in enumerate(raw_drives))
    if len(drives) != n_modes:
        raise ConfigError(f"drives has {len(drives)} entries, expected n_modes={n_modes}")
    coupling_table = table.get("coupling")
    if not isinstance(coupling_table, dict):
        raise ConfigError("missing [system.coupling] table")
    return SystemConfig(
        n_modes=n_modes, n_atoms=n_atoms, gamma=gamma, drives=drives,
        coupling=_parse_coupling(coupling_table),
    )


def _parse_sweep(table):
    path = "sweep"
    _require_keys(table, ("delta_min", "delta_max", "count", "pinned_delta_c", "method"), path)
    count = _get(table, "count", path, int)
    if count < 1:
        raise ConfigError("sweep count must be at least 1")
    method = _get(table, "method", path, str, required=False, default="auto")
    if method not in ("auto", "direct", "eigen"):
        raise ConfigError(f"sweep method must be auto, direct, or eigen, got {method!r}")
    lo = _get(table, "delta_min", path, float)
    hi = _get(table, "delta_max", path, float)
    if lo > hi:
        raise ConfigError("sweep delta_min must not exceed delta_max")
    return SweepConfig(
        delta_min=lo, delta_max=hi, count=count,
        pinned_delta_c=_get(table, "pinned_delta_c", path, float, required=False),
        method=method,
    )


def _parse_oracle(table):
    path = "oracle"
    _require_keys(table, ("n_max", "drive_ladder", "delta", "gamma"), path)
    n_max = _get(table, "n_max", path, int)
    ladder_raw = _get(table, "drive_ladder", path, list)
    ladder = []
    for i, v in enumerate(ladder_raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise ConfigError(f"drive_ladder[{i}] must be a non-negative number")
        ladder.append(float(v))
    if not ladder:
        raise ConfigError("drive_ladder must not be empty")
    return OracleConfig(
        n_max=n_max, drive_ladder=tuple(ladder),
        delta=_get(table, "delta", path, float, required=False, default=0.5),
        gamma=_get(table, "gamma", path, float, required=False),
    )


def _parse_darkstate(table):
    _require_keys(table, ("delta_c",), "darkstate")
    return DarkstateConfig(
        delta_c=_get(table, "delta_c", "darkstate", float, required=False, default=0.0),
    )


def _parse_observability(table):
    _require_keys(table, ("target_splitting", "single_atom_g"), "observability")
    return ObservabilityConfig(
        target_splitting=_get(table, "target_splitting", "observability", float,
                              required=False, default=1.0),
        single_atom_g=_get(table, "single_atom_g", "observability", float, required=False),
    )


def _parse_output(table):
    _require_keys(table, ("path", "precision"), "output")
    precision = _get(table, "precision", "output", int, required=False, default=17)
    if precision < 15:
        raise ConfigError("output precision must be at least 15 significant digits")
    return OutputConfig(
        path=_get(table, "path", "output", str, required=False),
        precision=precision,
    )


def parse_config(text):
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"configuration is not valid TOML: {exc}") from exc
    _require_keys(doc, ("system", "sweep", "oracle", "darkstate",
                        "observability", "output"), "<root>")
    if "system" not in doc:
        raise ConfigError("missing required [system] block")
    return ExperimentConfig(
        system=_parse_system(doc["system"]),
        sweep=_parse_sweep(doc["sweep"]) if "sweep" in doc else None,
        oracle=_parse_oracle(doc["oracle"]) if "oracle" in doc else None,
        darkstate=_parse_darkstate(doc.get("darkstate", {})),
        observability=_parse_observability(doc.get("observability", {})),
        output=_parse_output(doc.get("output", {})),
    )


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except FileNotFoundError as exc:
        raise ConfigError(f"configuration file not found: {path}") from exc


def build_system_params(config: ExperimentConfig, *, seed=None, delta_a=0.0,
                        delta_c=None, gamma=None, drives=None):
    """SystemParams from a configuration, with optional overrides.

    `seed` overrides the seed of a localized coupling; detunings default to
    zero (commands set them per experiment).
    """
    sysc = config.system
    spec = sysc.coupling
    if spec.kind == "uniform":
        coupling = make_uniform_coupling(sysc.n_modes, sysc.n_atoms, spec.g)
    elif spec.kind == "localized":
        use_seed = seed if seed is not None else spec.seed
        if use_seed is None and spec.perturbation > 0:
            raise ConfigError(
                "localized coupling with nonzero perturbation needs a seed "
                "(config key or --seed)"
            )
        coupling = make_localized_coupling(
            sysc.n_modes, sysc.n_atoms, spec.g, spec.perturbation, use_seed or 0
        )
    else:
        coupling = np.array(spec.matrix, dtype=complex)
        if coupling.shape != (sysc.n_modes, sysc.n_atoms):
            raise ConfigError(
                f"explicit coupling matrix has shape {coupling.shape}, "
                f"expected ({sysc.n_modes}, {sysc.n_atoms})"
            )
    return SystemParams(
        n_modes=sysc.n_modes, n_atoms=sysc.n_atoms,
        delta_a=delta_a, delta_c=delta_a if delta_c is None else delta_c,
        kappa=1.0,
        gamma=sysc.gamma if gamma is None else gamma,
        drives=np.array(drives if drives is not None else sysc.drives, dtype=complex),
        coupling=coupling,
    )


def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, complex):
        return f"[{format(v.real, '.17g')}, {format(v.imag, '.17g')}]"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_toml(config: ExperimentConfig):
    """Canonical TOML serialization of a resolved configuration."""
    lines = []

    def block(name, pairs):
        items = [(k, v) for k, v in pairs if v is not None]
        if not items:
            return
        lines.append(f"[{name}]")
        for k, v in items:
            lines.append(f"{k} = {_fmt_value(v)}")
        lines.append("")

    sysc = config.system
    block("system", [
        ("n_modes", sysc.n_modes), ("n_atoms", sysc.n_atoms),
        ("gamma", sysc.gamma), ("drives", list(sysc.drives)),
    ])
    spec = sysc.coupling
    if spec.kind == "explicit":
        block("system.coupling", [("kind", spec.kind),
                                  ("matrix", [list(r) for r in spec.matrix])])
    elif spec.kind == "localized":
        block("system.coupling", [("kind", spec.kind), ("g", spec.g),
                                  ("perturbation", spec.perturbation),
                                  ("seed", spec.seed)])
    else:
        block("system.coupling", [("kind", spec.kind), ("g", spec.g)])
    if config.sweep is not None:
        block("sweep", [
            ("delta_min", config.sweep.delta_min),
            ("delta_max", config.sweep.delta_max),
            ("count", config.sweep.count),
            ("pinned_delta_c", config.sweep.pinned_delta_c),
            ("method", config.sweep.method),
        ])
    if config.oracle is not None:
        block("oracle", [
            ("n_max", config.oracle.n_max),
            ("drive_ladder", list(config.oracle.drive_ladder)),
            ("delta", config.oracle.delta),
            ("gamma", config.oracle.gamma),
        ])
    block("darkstate", [("delta_c", config.darkstate.delta_c)])
    block("observability", [
        ("target_splitting", config.observability.target_splitting),
        ("single_atom_g", config.observability.single_atom_g),
    ])
    block("output", [
        ("path", config.output.path),
        ("precision", config.output.precision),
    ])
    return "\n".join(lines)


def config_hash(config: ExperimentConfig):
    return hashlib.sha256(to_toml(config).encode("utf-8")).hexdigest()
