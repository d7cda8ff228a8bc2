import json
import subprocess
import sys
import time

import pytest
from hypothesis import given, strategies as st

from constsgd import presets
from constsgd.cli import main
from constsgd.config import ConfigError, parse_config
from constsgd.runner import SCHEMA_VERSION, format_number, load_report, run

MINIMAL = "experiment = bounds\nmu = 1\nL = 1\nM = 1\nd = 10\nq = 2\n"


def errors_of(text, **kw):
    with pytest.raises(ConfigError) as info:
        parse_config(text, **kw)
    return info.value.errors


# ---------------------------------------------------------------- parsing

def test_minimal_bounds_config_resolves_s():
    cfg = parse_config(MINIMAL)
    assert cfg.s == 4 and cfg["q"] == 2.0 and cfg.seed == 0


def test_odd_s_rejected():
    errs = errors_of(MINIMAL + "s = 3\n")
    assert any("s must be even" in e and "2" in e for e in errs)


def test_duplicate_key_rejected():
    errs = errors_of(MINIMAL + "mu = 2\n")
    assert any("duplicate key 'mu'" in e for e in errs)


def test_all_errors_reported_together():
    errs = errors_of("experiment = gmc\nfoo = 1\ns = 3\n")
    text = "\n".join(errs)
    assert "unknown key 'foo'" in text
    assert "s must be even" in text
    assert "R" in text and "k_max" in text


def test_comments_lists_and_alias():
    cfg = parse_config("experiment = sgd_moment  # scaling\nproblem = tanh\nd = 2\n"
                       "alpha_grid = 0.001, 0.002\nreplications = 10\n")
    assert cfg["alpha_grid"] == [0.001, 0.002] and cfg["R"] == 10


def test_overrides_replace_file_values():
    cfg = parse_config(MINIMAL, overrides=["mu=2", "seed=5"])
    assert cfg["mu"] == 2.0 and cfg.seed == 5
    assert cfg.overrides == ("mu=2", "seed=5")
    errs = errors_of(MINIMAL, experiment="gmc")
    assert errs


def test_alpha_and_fraction_are_exclusive():
    errs = errors_of("experiment = gmc\nd = 2\nR = 10\nk_max = 5\nalpha = 0.1\n"
                     "alpha_fraction = 0.5\n")
    assert any("alpha" in e for e in errs)


def test_every_preset_parses():
    for name, text in presets.ACCEPTANCE.items():
        parse_config(text)


# ---------------------------------------------------------------- output format

@given(st.floats(allow_nan=False, allow_infinity=False))
def test_seventeen_digits_round_trip(x):
    assert float(format_number(x)) == x


def test_format_number_types():
    assert format_number(3) == "3"
    assert format_number(True) == "1"
    assert format_number(None) == ""
    assert format_number(0.1) == "0.10000000000000001"


# ---------------------------------------------------------------- runner and CLI

def test_bounds_run_is_fast_and_flagged(tmp_path):
    start = time.perf_counter()
    report = run(parse_config(MINIMAL), tmp_path)
    assert time.perf_counter() - start < 1.0
    data = json.loads((tmp_path / "bounds_report.json").read_text())
    assert data["schema_version"] == SCHEMA_VERSION
    assert "up to universal constants" in data["flags"]
    assert "up to universal constants" in data["result"]["flags"]
    assert report.passed and data["pass"] is True


def test_cli_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "b.cfg"
    cfg.write_text(MINIMAL)
    assert main(["bounds", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    bad = tmp_path / "bad.cfg"
    bad.write_text(MINIMAL + "s = 3\n")
    assert main(["bounds", "--config", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and any("s must be even" in e for e in err["errors"])


def test_cli_failing_criterion_exits_one(tmp_path):
    cfg = tmp_path / "g.cfg"
    # far above the contraction threshold: the chains diverge and the run fails
    cfg.write_text("experiment = gmc\nd = 2\nR = 20\nk_max = 200\nalpha = 5\n")
    assert main(["verify", "gmc", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1


def test_cli_flags_and_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CONSTSGD_SEED", "11")
    monkeypatch.setenv("CONSTSGD_OUT_DIR", str(tmp_path))
    assert main(["property-test", "maximal", "--replications", "5", "--threads", "1"]) == 0
    data = load_report(tmp_path / "inequalities_report.json")
    assert data["seed"] == 11
    assert "instances=5" in data["config_overrides"]
    assert main(["property-test", "maximal", "--seed", "12", "instances=3"]) == 0
    assert load_report(tmp_path / "inequalities_report.json")["seed"] == 12


def test_identical_runs_give_identical_csv(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        args = ["verify", "gmc", "--preset", "gmc", "--out-dir", str(out), "R=50", "k_max=40"]
        assert main(args) == 0
        outs.append((out / "gmc_curve.csv").read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].splitlines()[0] == b"k,empirical_moment,envelope,se"


def test_report_subcommand(tmp_path, capsys):
    run(parse_config(MINIMAL), tmp_path)
    assert main(["report", str(tmp_path / "bounds_report.json")]) == 0
    assert "PASS  bounds" in capsys.readouterr().out
    data = json.loads((tmp_path / "bounds_report.json").read_text())
    data["schema_version"] = "9.0"
    (tmp_path / "old.json").write_text(json.dumps(data))
    assert main(["report", str(tmp_path / "old.json")]) == 2


def test_gmc_preset_passes_within_budget(tmp_path):
    start = time.perf_counter()
    report = run(parse_config(presets.ACCEPTANCE["gmc"]), tmp_path)
    assert report.passed
    assert time.perf_counter() - start < 60


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "constsgd", "bounds", "mu=1", "L=1", "M=1",
                          "d=10", "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "PASS  bounds" in out.stdout
