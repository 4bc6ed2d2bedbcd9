"""Experiment configuration: INI-style files ([section] + key=value, one
level deep) resolved into a validated ExperimentConfig, plus the manifest
writer whose output parses back into the identical resolved config."""

import configparser
import io
import os
import time
from dataclasses import dataclass, fields

from .errors import ConfigError

__all__ = ["ExperimentConfig", "emit_manifest", "parse_config", "read_manifest"]

COMMANDS = (
    "density-eval",
    "certify-kernel-bounds",
    "rate-kernel",
    "parametrix-build",
    "rate-sde",
    "rate-invariant",
    "invariant-moments",
)

_DRIFTS = ("zero", "ou", "perturbed", "bump")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description.

    Sections map to field groups: [experiment] command/id/check/target/
    suite/method/gamma, [kernel] alpha_list/t_list/tol, [space] x bounds and
    point count, [grid] the parametrix space-time grid, [drift] catalog name
    and parameters, [scheme] the Euler/ergodic-average controls, [run]
    seed/threads/out_dir, [tolerances] free-form numeric overrides.
    """

    command: str
    experiment_id: str = "run"
    # [kernel]
    alpha_list: tuple = (1.9,)
    t_list: tuple = (1.0,)
    tol: float = 1e-11
    # [space] spatial evaluation window
    x_min: float = -10.0
    x_max: float = 10.0
    n_points: int = 2001
    # [grid] parametrix space-time grid
    length: float = 10.0
    horizon: float = 0.5
    n_x: int = 513
    n_t: int = 65
    grading: float = 2.0
    # [drift]
    drift_name: str = "ou"
    drift_a: float = 0.5
    drift_beta: float = 0.5
    # [scheme] Euler / ergodic-average controls
    t_burn: float = 10.0
    t_sample: float = 200.0
    steps_per_unit: int = 40
    n_chains: int = 64
    # [experiment] command modes
    check: str = "oracle"      # density-eval: oracle | scaling
    target: str = "kernel"     # rate-kernel: kernel | generator
    suite: str = "ratios"      # certify-kernel-bounds: ratios | properties
    method: str = "exact"      # rate-invariant: exact | euler
    gamma: float = 0.5         # moment order / weighted-variation power
    # [run]
    seed: int = 0
    threads: int = 0           # 0 = library default
    out_dir: str = "results"
    # [tolerances] free-form overrides consumed by the runners
    tolerances: tuple = ()     # sorted (key, value) pairs

    def tolerance(self, key, default):
        for k, v in self.tolerances:
            if k == key:
                return v
        return default

    def validate(self):
        """Per-command usage validation; raises ConfigError naming the key."""
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown command {self.command!r}")
        if not self.alpha_list:
            raise ConfigError("alpha_list: must not be empty")
        if len(set(self.alpha_list)) != len(self.alpha_list):
            raise ConfigError("alpha_list: duplicate entries")
        if any(t <= 0.0 for t in self.t_list):
            raise ConfigError("t_list: times must be positive")
        if not self.x_min < self.x_max:
            raise ConfigError("x_min: must be below x_max")
        if self.n_points < 2:
            raise ConfigError("n_points: need at least 2")
        if self.seed < 0 or self.seed > 2**64 - 1:
            raise ConfigError("seed: must fit in u64")
        if self.threads < 0:
            raise ConfigError("threads: must be nonnegative")
        if self.drift_name not in _DRIFTS:
            raise ConfigError(f"drift_name: unknown drift {self.drift_name!r}")

        lo, hi, where = {
            "density-eval": (0.0, 2.0, "(0, 2]"),
            "certify-kernel-bounds": (0.0, 2.0, "(0, 2]"),
            "rate-kernel": (0.0, 2.0, "(0, 2)"),
            "parametrix-build": (1.0, 2.0, "(1, 2]"),
            "rate-sde": (12.0 / 7.0, 2.0, "(12/7, 2)"),
            "rate-invariant": (1.0, 2.0, "(1, 2)"),
            "invariant-moments": (1.0, 2.0, "(1, 2]"),
        }[self.command]
        open_right = where.endswith(")")
        for a in self.alpha_list:
            if not (lo < a <= hi) or (open_right and a == hi):
                raise ConfigError(f"alpha_list: {self.command} needs alpha in {where}, got {a}")

        if self.command == "density-eval" and self.check not in ("oracle", "scaling"):
            raise ConfigError(f"check: must be oracle or scaling, got {self.check!r}")
        if self.command == "rate-kernel" and self.target not in ("kernel", "generator"):
            raise ConfigError(f"target: must be kernel or generator, got {self.target!r}")
        if self.command == "certify-kernel-bounds" and self.suite not in ("ratios", "properties"):
            raise ConfigError(f"suite: must be ratios or properties, got {self.suite!r}")
        if self.command == "rate-invariant" and self.method not in ("exact", "euler"):
            raise ConfigError(f"method: must be exact or euler, got {self.method!r}")

        if self.command in ("rate-invariant", "invariant-moments"):
            from .drift import drift_catalog

            drift = drift_catalog(self.drift_name, a=self.drift_a, beta=self.drift_beta)
            if drift.dissipative is None:
                raise ConfigError(
                    f"drift_name: {self.command} needs a dissipativity certificate; "
                    f"{self.drift_name!r} carries none"
                )
        fits_rate = self.command in ("rate-kernel", "rate-sde") or (
            self.command == "rate-invariant" and self.method == "exact"
        )
        if fits_rate:
            if len(self.alpha_list) < 2:
                raise ConfigError("alpha_list: rate fits need at least 2 indices")
            if list(self.alpha_list) != sorted(self.alpha_list):
                raise ConfigError("alpha_list: rate fits need increasing indices")
        if self.command == "invariant-moments" and not 0.0 < self.gamma < 2.0:
            raise ConfigError("gamma: moment order must lie in (0, 2)")
        return self


_SECTIONS = {
    "experiment": ("command", "experiment_id", "check", "target", "suite", "method", "gamma"),
    "kernel": ("alpha_list", "t_list", "tol"),
    "space": ("x_min", "x_max", "n_points"),
    "grid": ("length", "horizon", "n_x", "n_t", "grading"),
    "drift": ("drift_name", "drift_a", "drift_beta"),
    "scheme": ("t_burn", "t_sample", "steps_per_unit", "n_chains"),
    "run": ("seed", "threads", "out_dir"),
}
_INI_KEYS = {
    "drift_name": "name",
    "drift_a": "a",
    "drift_beta": "beta",
    "experiment_id": "id",
}
_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(name, raw):
    raw = raw.strip()
    kind = _FIELD_TYPES[name]
    try:
        if name in ("alpha_list", "t_list"):
            return tuple(float(v) for v in raw.replace(",", " ").split())
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from exc


def _load_parser(text):
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from exc
    return parser


def _config_from_parser(parser, overrides=None):
    values = {}
    known = {
        _INI_KEYS.get(name, name): name for names in _SECTIONS.values() for name in names
    }
    for section in parser.sections():
        if section in ("meta", "tolerances"):
            continue
        if section not in _SECTIONS:
            raise ConfigError(f"[{section}]: unknown section")
        for key, raw in parser.items(section):
            if key not in known or known[key] not in _SECTIONS[section]:
                raise ConfigError(f"{key}: unknown key in [{section}]")
            values[known[key]] = _parse_value(known[key], raw)
    if parser.has_section("tolerances"):
        tol_pairs = []
        for key, raw in parser.items("tolerances"):
            try:
                tol_pairs.append((key, float(raw)))
            except ValueError as exc:
                raise ConfigError(f"{key}: tolerance must be numeric, got {raw!r}") from exc
        values["tolerances"] = tuple(sorted(tol_pairs))
    if "command" not in values:
        raise ConfigError("command: missing from [experiment]")
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return ExperimentConfig(**values).validate()


def parse_config(path, overrides=None):
    """Read and validate an experiment config file.

    `overrides` maps field names (seed, threads, out_dir, ...) to values
    that take precedence over the file, mirroring the CLI flags.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    return _config_from_parser(_load_parser(text), overrides)


def _format_value(value):
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_manifest(config, out_dir=None, clock=time.time):
    """Write manifest.txt: the resolved config as INI sections plus a [meta]
    block (library version, timestamp); returns the path.

    Parsing the manifest with read_manifest reproduces the identical
    resolved config; only the timestamp differs between reruns.
    """
    from . import __version__

    out = out_dir if out_dir is not None else config.out_dir
    os.makedirs(out, exist_ok=True)
    buf = io.StringIO()
    buf.write("[meta]\n")
    buf.write(f"version = {__version__}\n")
    buf.write(f"timestamp = {clock():.6f}\n\n")
    for section, names in _SECTIONS.items():
        buf.write(f"[{section}]\n")
        for name in names:
            buf.write(f"{_INI_KEYS.get(name, name)} = {_format_value(getattr(config, name))}\n")
        buf.write("\n")
    buf.write("[tolerances]\n")
    for key, value in config.tolerances:
        buf.write(f"{key} = {_format_value(value)}\n")
    path = os.path.join(out, "manifest.txt")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise ConfigError(f"out_dir: cannot write manifest to {out}: {exc}") from exc
    return path


def read_manifest(path):
    """Parse a manifest back into its resolved ExperimentConfig."""
    return parse_config(path)
