"""Dispatch a configuration to its experiment and write the JSON report and CSV curve."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import inequalities as ineq
from .bounds import UP_TO_CONSTANTS, alpha_max, bound_report
from .config import ExperimentConfig
from .problems import ConstantEstimate, ProblemConstants

SCHEMA_VERSION = "1.0"
PACKAGE_VERSION = "0.1.0"


def version_string() -> str:
    """``<package version>+<git describe>`` when run from a checkout, else the package version."""
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        tag = out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        tag = ""
    return f"{PACKAGE_VERSION}+{tag}" if tag else PACKAGE_VERSION


def format_number(v) -> str:
    """Round-trip text for a CSV cell: 17 significant digits for floats."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return format(float(v), ".17g")


def curve_csv(curve: ex.Curve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(curve.columns)
    for row in curve.rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def jsonable(obj):
    """Plain JSON data; non-finite floats become the strings 'nan', 'inf', '-inf'."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return f
        return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


@dataclass
class RunReport:
    experiment: str
    config_text: str
    config: dict
    seed: int
    criteria: dict
    payload: dict
    wall_time: float
    curve: ex.Curve | None = None
    overrides: tuple = ()
    version: str = field(default_factory=version_string)
    flags: list = field(default_factory=lambda: [UP_TO_CONSTANTS])

    @property
    def passed(self) -> bool:
        return bool(self.criteria) and all(bool(v) for v in self.criteria.values())

    def to_dict(self) -> dict:
        return jsonable({
            "schema_version": SCHEMA_VERSION,
            "version": self.version,
            "experiment": self.experiment,
            "seed": self.seed,
            "pass": self.passed,
            "criteria": {k: bool(v) for k, v in self.criteria.items()},
            "wall_time_s": self.wall_time,
            "flags": self.flags,
            "config_text": self.config_text,
            "config_overrides": list(self.overrides),
            "config": self.config,
            "result": self.payload,
        })

    def write(self, out_dir) -> dict:
        """Write ``<experiment>_report.json`` and, if there is a curve, ``<experiment>_curve.csv``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"report": out / f"{self.experiment}_report.json"}
        if self.curve is not None:
            paths["curve"] = out / f"{self.experiment}_curve.csv"
            paths["curve"].write_text(curve_csv(self.curve))
        paths["report"].write_text(json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n")
        return paths


def resolve_constants(cfg: ExperimentConfig, spec) -> ProblemConstants:
    """Constants from the config where given, Monte Carlo (or analytic) estimates otherwise."""
    given = {k: cfg.get(k) for k in ("mu", "L", "M")}
    if all(v is not None for v in given.values()):
        est = None
    else:
        est = ex.resolve_constants(spec, cfg.s, cfg["q"], None, cfg.seed)
    values, prov = {}, {}
    for name, v in given.items():
        if v is not None:
            values[name] = v
            prov[name] = ConstantEstimate(v, 0.0, "config")
        else:
            values[name] = getattr(est, name)
            prov[name] = est.provenance[name]
    return ProblemConstants(values["mu"], values["L"], values["M"], prov)


def _alpha(cfg: ExperimentConfig, constants: ProblemConstants) -> float:
    if cfg.get("alpha") is not None:
        return cfg["alpha"]
    return cfg["alpha_fraction"] * alpha_max(constants.mu, constants.L, cfg.s, cfg["q"])


def _run_bounds(cfg):
    c = cfg
    alpha = c.get("alpha")
    if alpha is None and c.get("alpha_fraction") is not None:
        alpha = c["alpha_fraction"] * alpha_max(c["mu"], c["L"], c.s, c["q"])
    rep = bound_report(c["mu"], c["L"], c["M"], c["d"], c["q"], c.s, alpha, c.get("k"),
                       c["delta0"], c.get("epsilon"), c.get("z"), c.get("delta"))
    values = [rep.alpha_max, rep.alpha_root]
    return {"finite": all(math.isfinite(v) for v in values)}, rep.to_dict(), None


def _run_inequalities(cfg):
    lemma, n = cfg["lemma"], cfg.get("instances")
    runners = {
        "taylor": lambda: ineq.run_taylor_check(n or 100_000, cfg.seed),
        "rio": lambda: ineq.run_rio_check(n or 1000, cfg.seed),
        "maximal": lambda: ineq.run_maximal_check(n or 200, cfg.seed),
        "norm_equivalence": lambda: ineq.run_norm_equivalence(n or 100_000, seed=cfg.seed),
    }
    names = list(runners) if lemma == "all" else [lemma]
    results = [runners[name]() for name in names]
    rows = [(r.instances, r.violations, r.worst_ratio) for r in results]
    curve = ex.Curve(("instances", "violations", "worst_ratio"), rows)
    return ({r.name: r.passed for r in results}, {r.name: r.to_dict() for r in results}, curve)


def _run_simulation(cfg: ExperimentConfig):
    spec = cfg.problem_spec
    constants = resolve_constants(cfg, spec)
    s, q, R, seed, threads = cfg.s, cfg["q"], cfg.get("R"), cfg.seed, cfg["threads"]
    tag = cfg.experiment
    kw = {}
    if cfg.get("tolerance") is not None:
        kw["tolerance"] = cfg["tolerance"]
    if tag == "gmc":
        rep = ex.verify_gmc(spec, _alpha(cfg, constants), s, q, R, cfg["k_max"], seed, constants,
                            threads=threads, radius=cfg["radius"])
    elif tag == "sgd_moment":
        rep = ex.verify_sgd_moment_scaling(spec, s, q, cfg["alpha_grid"], R, seed, constants,
                                           threads, **kw)
    elif tag == "asgd_gap":
        rep = ex.verify_asgd_stationarity_gap(spec, _alpha(cfg, constants), s, q, cfg["k_grid"], R,
                                              seed, constants, threads, cfg["start"],
                                              cfg["radius"], **kw)
    elif tag == "asgd_variance":
        rep = ex.verify_asgd_variance_rate(spec, _alpha(cfg, constants), s, q, cfg["k_grid"], R,
                                           seed, constants, threads, **kw)
    elif tag == "bias":
        rep = ex.verify_bias_scaling(spec, cfg["alpha_grid"], cfg["k"], R, seed, s, q, constants,
                                     threads, **kw)
    elif tag == "tail":
        rep = ex.estimate_tail(spec, _alpha(cfg, constants), cfg["k"], cfg["z_grid"], R, s, q,
                               seed, constants, threads)
    elif tag == "ga":
        rep = ex.verify_gaussian_approx(spec, _alpha(cfg, constants), cfg["T"], R, seed, s, q,
                                        constants, threads, bandwidth=cfg.get("bandwidth"))
    elif tag == "complexity":
        rep = ex.verify_complexity(spec, cfg["epsilon"], seed, q, R or 50, cfg["macro"],
                                   constants, threads,
                                   calibration_R=cfg.get("calibration_R") or 200,
                                   radius=cfg["radius"])
    else:
        raise ValueError(f"no simulation for experiment {tag!r}")
    payload = rep.to_dict()
    payload["problem"] = spec.to_dict()
    return rep.criteria, payload, rep.curve


def run(cfg: ExperimentConfig, out_dir=None) -> RunReport:
    """Run the configured experiment; write artifacts when ``out_dir`` is given."""
    start = time.perf_counter()
    if cfg.experiment == "bounds":
        criteria, payload, curve = _run_bounds(cfg)
    elif cfg.experiment == "inequalities":
        criteria, payload, curve = _run_inequalities(cfg)
    else:
        criteria, payload, curve = _run_simulation(cfg)
    report = RunReport(cfg.experiment, cfg.text, cfg.to_dict(), cfg.seed, criteria, payload,
                       time.perf_counter() - start, curve, cfg.overrides)
    if out_dir is not None:
        report.write(out_dir)
    return report


def load_report(path) -> dict:
    """Read a JSON report and check its schema version."""
    data = json.loads(Path(path).read_text())
    version = str(data.get("schema_version", ""))
    if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise ValueError(f"unsupported report schema version {version!r}; "
                         f"this build reads {SCHEMA_VERSION}")
    for key in ("experiment", "criteria", "pass"):
        if key not in data:
            raise ValueError(f"report is missing {key!r}")
    return data


def env_default(name: str, default=None):
    return os.environ.get(f"CONSTSGD_{name}", default)
