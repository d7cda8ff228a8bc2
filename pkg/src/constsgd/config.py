"""Key-value experiment configuration.

One ``key = value`` pair per line; ``#`` starts a comment, blank lines are
ignored and list values are comma separated::

    experiment = gmc
    d = 16
    sigma = tridiagonal
    alpha_fraction = 0.25
    R = 1000
    k_max = 200

Validation collects every problem before raising, so a broken file is
reported in one pass. ``s = auto`` (the default) resolves to ``choose_s_d(d)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import alpha_max
from .norms import choose_s_d
from .problems import Law, LinearRegressionSpec, TanhPerturbedSpec, tridiagonal_sigma

EXPERIMENTS = ("bounds", "gmc", "sgd_moment", "asgd_gap", "asgd_variance", "bias", "tail", "ga",
               "complexity", "inequalities")
LEMMAS = ("taylor", "rio", "maximal", "norm_equivalence", "all")

# experiments whose guarantees need 0 < alpha < alpha_max
CONTRACTING = ("sgd_moment", "asgd_gap", "asgd_variance", "bias", "tail", "ga")
SIMULATING = ("gmc",) + CONTRACTING + ("complexity",)

MAX_SEED = (1 << 64) - 1


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every violated constraint."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def _int(v: str) -> int:
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v) if v.strip().lstrip("+-").isdigit() else int(f)


def _float(v: str) -> float:
    f = float(v)
    if math.isnan(f):
        raise ValueError("nan is not allowed")
    return f


def _floats(v: str) -> list:
    return [_float(x) for x in v.split(",") if x.strip()]


def _ints(v: str) -> list:
    return [_int(x) for x in v.split(",") if x.strip()]


def _str(v: str) -> str:
    return v


def _s(v: str):
    return "auto" if v.strip().lower() == "auto" else _int(v)


KEYS = {
    "experiment": _str, "problem": _str, "d": _int, "sigma": _str, "sigma_offdiag": _float,
    "covariate_law": _str, "covariate_nu": _float, "noise_law": _str, "noise_nu": _float,
    "noise_scale": _float, "rho": _float, "offset": _float,
    "mu": _float, "L": _float, "M": _float,
    "alpha": _float, "alpha_fraction": _float, "alpha_grid": _floats, "s": _s, "q": _float,
    "k": _int, "k_grid": _ints, "k_max": _int, "z_grid": _floats, "z": _float, "R": _int,
    "epsilon": _float, "delta": _float, "delta0": _float, "tolerance": _float, "T": _int,
    "bandwidth": _int, "macro": _int, "lemma": _str, "instances": _int, "start": _str,
    "radius": _float, "calibration_R": _int, "seed": _int, "threads": _int, "out_dir": _str,
}
ALIASES = {"replications": "R"}

DEFAULTS = {
    "problem": "regression", "sigma": "identity", "sigma_offdiag": 0.2,
    "covariate_law": "gaussian", "noise_law": "gaussian", "noise_scale": 1.0, "rho": 1.0,
    "offset": 0.0, "s": "auto", "q": 2.0, "seed": 0, "threads": 1, "out_dir": ".",
    "lemma": "all", "start": "cold", "radius": 1.0, "delta0": 0.0, "macro": 20,
}

REQUIRED = {
    "bounds": ("mu", "L", "M", "d"),
    "gmc": ("d", "R", "k_max"),
    "sgd_moment": ("d", "alpha_grid", "R"),
    "asgd_gap": ("d", "k_grid", "R"),
    "asgd_variance": ("d", "k_grid", "R"),
    "bias": ("d", "alpha_grid", "k", "R"),
    "tail": ("d", "k", "z_grid", "R"),
    "ga": ("d", "T", "R"),
    "complexity": ("d", "epsilon"),
    "inequalities": (),
}
NEEDS_ALPHA = ("gmc", "asgd_gap", "asgd_variance", "tail", "ga")


@dataclass
class ExperimentConfig:
    experiment: str
    values: dict
    text: str = ""
    given: tuple = ()
    overrides: tuple = ()
    problem_spec: object = field(default=None, repr=False)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    @property
    def seed(self) -> int:
        return self.values["seed"]

    @property
    def s(self) -> int:
        return self.values["s"]

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """Copy with some values replaced (the overrides are recorded as text)."""
        pairs = [f"{k}={_format_value(v)}" for k, v in overrides.items() if v is not None]
        return apply_overrides(self, pairs)

    def to_dict(self) -> dict:
        return dict(self.values)


def tokenize(text: str) -> list:
    """``(line_number, key, raw_value)`` triples and the syntax errors found."""
    pairs, errors = [], []
    for no, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            errors.append(f"line {no}: expected 'key = value', got {body!r}")
            continue
        key, value = (part.strip() for part in body.split("=", 1))
        if not key:
            errors.append(f"line {no}: missing key")
            continue
        pairs.append((no, ALIASES.get(key, key), value))
    return pairs, errors


def _convert(pairs, label) -> tuple[dict, list]:
    values, seen, errors = {}, {}, []
    for no, key, raw in pairs:
        where = f"{label} {no}" if label == "line" else label
        if key not in KEYS:
            errors.append(f"{where}: unknown key {key!r}")
            continue
        if label == "line" and key in seen:
            errors.append(f"{where}: duplicate key {key!r} (first set on line {seen[key]})")
            continue
        seen[key] = no
        try:
            values[key] = KEYS[key](raw)
        except ValueError as exc:
            errors.append(f"{where}: bad value for {key!r}: {exc}")
    return values, errors


def parse_config(text: str, experiment: str | None = None, overrides=()) -> ExperimentConfig:
    """Parse and validate configuration text; raise :class:`ConfigError` listing every problem.

    ``experiment`` supplies the tag when the text has none (and must agree
    with it otherwise). ``overrides`` are ``key=value`` strings applied on
    top of the text before validation; they may repeat keys of the text.
    """
    pairs, errors = tokenize(text)
    values, more = _convert(pairs, "line")
    errors += more
    over_pairs, over_errors = tokenize("\n".join(overrides))
    over_values, more = _convert(over_pairs, "override")
    errors += over_errors + more
    if "experiment" in over_values and over_values.pop("experiment") != (
            experiment or values.get("experiment")):
        errors.append("an override cannot change the experiment")
    tag = values.get("experiment")
    if experiment is not None:
        if tag is not None and tag != experiment:
            errors.append(f"config is for experiment {tag!r}, not {experiment!r}")
        tag = experiment
    if tag is None:
        errors.append("missing key 'experiment'")
    elif tag not in EXPERIMENTS:
        errors.append(f"unknown experiment {tag!r}; expected one of {', '.join(EXPERIMENTS)}")
    if tag not in EXPERIMENTS:
        raise ConfigError(errors)
    values.update(over_values)
    given = tuple(values)
    merged = {**DEFAULTS, **values, "experiment": tag}
    # validate what did parse, so one run lists every problem
    errors += _validate(tag, merged, set(given))
    if errors:
        raise ConfigError(errors)
    spec = build_problem(merged) if tag in SIMULATING else None
    return ExperimentConfig(tag, merged, text, given, tuple(overrides), spec)


def apply_overrides(cfg: ExperimentConfig, pairs) -> ExperimentConfig:
    """Re-parse ``cfg`` with extra ``key=value`` strings on top of its overrides."""
    return parse_config(cfg.text, cfg.experiment, cfg.overrides + tuple(pairs))


def _format_value(v) -> str:
    if isinstance(v, (list, tuple)):
        return ", ".join(repr(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def _validate(tag: str, v: dict, given: set) -> list:
    errors = []
    for key in REQUIRED[tag]:
        if v.get(key) is None:
            errors.append(f"missing required key {key!r} for experiment {tag!r}")
    d = v.get("d")
    if d is not None and d < 1:
        errors.append("d must be >= 1")
    if v["q"] < 2:
        errors.append("q must be >= 2")
    s = v.get("s")
    if s == "auto":
        if d is not None and d >= 1:
            v["s"] = choose_s_d(d)
    elif s < 2 or s % 2:
        errors.append("s must be even ≥ 2")
    if not 0 <= v["seed"] <= MAX_SEED:
        errors.append("seed must be a 64-bit unsigned integer")
    if v["threads"] < 1:
        errors.append("threads must be >= 1")
    for key in ("R", "k", "k_max", "T", "macro", "instances", "calibration_R", "bandwidth"):
        if v.get(key) is not None and v[key] < 1:
            errors.append(f"{key} must be >= 1")
    if v.get("R") is not None and v["R"] < 2 and tag != "bounds":
        errors.append("R must be >= 2")
    for key in ("mu", "L", "M", "epsilon", "z", "radius", "noise_scale", "tolerance"):
        val = v.get(key)
        if val is not None and not (val > 0 and math.isfinite(val)):
            errors.append(f"{key} must be positive and finite")
    if v["delta0"] < 0:
        errors.append("delta0 must be nonnegative")
    if v.get("delta") is not None and not 0 < v["delta"] < 1:
        errors.append("delta must lie in (0, 1)")
    for key in ("k_grid", "alpha_grid", "z_grid"):
        grid = v.get(key)
        if grid is not None:
            if len(grid) < (1 if key == "z_grid" else 2):
                errors.append(f"{key} needs at least {1 if key == 'z_grid' else 2} values")
            if key != "z_grid" and any(g <= 0 for g in grid):
                errors.append(f"{key} entries must be positive")
            if len(set(grid)) != len(grid):
                errors.append(f"{key} entries must be distinct")
    if v["problem"] not in ("regression", "tanh"):
        errors.append("problem must be 'regression' or 'tanh'")
    if v["sigma"] not in ("identity", "tridiagonal"):
        errors.append("sigma must be 'identity' or 'tridiagonal'")
    if v["lemma"] not in LEMMAS:
        errors.append(f"lemma must be one of {', '.join(LEMMAS)}")
    if v["start"] not in ("cold", "stationary"):
        errors.append("start must be 'cold' or 'stationary'")
    if tag in NEEDS_ALPHA and v.get("alpha") is None and v.get("alpha_fraction") is None:
        errors.append(f"experiment {tag!r} needs 'alpha' or 'alpha_fraction'")
    if "alpha" in given and "alpha_fraction" in given:
        errors.append("set only one of 'alpha' and 'alpha_fraction'")
    a, frac = v.get("alpha"), v.get("alpha_fraction")
    if a is not None and not (a > 0 and math.isfinite(a)):
        errors.append("alpha must be positive and finite")
    if frac is not None:
        if not frac > 0:
            errors.append("alpha_fraction must be positive")
        elif tag in CONTRACTING and frac >= 1:
            errors.append(f"alpha_fraction = {frac} >= 1: experiment {tag!r} needs alpha < alpha_max")
    if (tag in CONTRACTING and a is not None and a > 0 and v.get("mu") and v.get("L")
            and isinstance(v.get("s"), int) and v["q"] >= 2):
        limit = alpha_max(v["mu"], v["L"], v["s"], v["q"])
        if a >= limit:
            errors.append(f"alpha = {a} >= alpha_max = {limit}: experiment {tag!r} needs contraction")
    if tag in SIMULATING and d is not None and d >= 1:
        try:
            build_problem(v)
        except ValueError as exc:
            errors.append(f"problem: {exc}")
    return errors


def _law(name: str, nu) -> Law:
    return Law(name, nu)


def build_problem(v: dict):
    """Problem described by the configuration values."""
    d = v["d"]
    if v["problem"] == "tanh":
        return TanhPerturbedSpec(d, v["rho"], _law(v["noise_law"], v.get("noise_nu")),
                                 v["offset"])
    sigma = np.eye(d) if v["sigma"] == "identity" else tridiagonal_sigma(d, 1.0, v["sigma_offdiag"])
    noise = Law(v["noise_law"], v.get("noise_nu"), v["noise_scale"])
    return LinearRegressionSpec.from_sigma(sigma, covariate_law=_law(v["covariate_law"],
                                                                     v.get("covariate_nu")),
                                           noise_law=noise)


def format_config(values: dict) -> str:
    """Configuration text that parses back to ``values``."""
    lines = []
    for key in KEYS:
        val = values.get(key)
        if val is None:
            continue
        lines.append(f"{key} = {_format_value(val)}")
    return "\n".join(lines) + "\n"
