import json
import subprocess
import sys

import pytest

from reflekt.cli import (JobConfig, canonicalize, draw_rational, emit_report, load_config, load_report, main,
                         parse_bindings, parse_spin, run, worker_count)
from reflekt.errors import ConfigError, IOFailure
from reflekt.scalar import S


def names(report):
    return {c.name: c for c in report.checks}


@pytest.mark.parametrize("argv", [
    ["verify", "re"],
    ["verify", "dual-re"],
    ["verify", "ybe"],
    ["verify", "ybe", "--model", "a1", "--spin", "1"],
    ["verify", "quasi-k"],
    ["verify", "coideal"],
    ["verify", "coideal", "--model", "a1"],
    ["kmatrix"],
    ["transfer", "--sites", "1"],
    ["transfer", "--sites", "2", "--hamiltonian"],
    ["transfer", "--sites", "3", "--draws", "2", "--seed", "7"],
    ["hamiltonian", "--sites", "2"],
    ["finite", "trivial"],
    ["finite", "trivial", "--spin", "1"],
    ["finite", "kolb"],
])
def test_passing_verbs(argv):
    code, report, _ = run(argv)
    assert code == 0, [(c.name, c.status, c.error) for c in report.checks]
    assert report.checks


def test_crossing_reports_scale():
    code, report, _ = run(["verify", "crossing"])
    c = names(report)["crossing"]
    assert c.residual_nonzero_entries == 0
    assert c.derived["residual_zero"] is True
    assert c.derived["scale_is_one"] is False
    assert c.status == "fail"
    assert code == 1
    assert names(report)["crossing-rtilde-inverse"].status == "pass"


def test_kmatrix_payload():
    _, report, _ = run(["kmatrix", "--format", "json"])
    K = names(report)["kmatrix"].derived["K(z)"]
    assert S(K[1][1]) == S("(xi - z^2)/(xi*z^2 - 1)")


def test_sabotage_is_detected():
    _, report, _ = run(["verify", "dual-re"])
    c = names(report)["dual-reflection-sabotage"]
    assert c.status == "pass" and c.residual_nonzero_entries > 0


def test_finite_trivial_value():
    _, report, _ = run(["finite", "trivial"])
    for c in report.checks:
        assert S(c.derived["value"]) == S("q + 1/q")


def test_json_round_trip(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "re", "--format", "json", "--out", str(out)]) == 0
    data = out.read_bytes()
    report = load_report(data)
    assert emit_report(report, "json") == data
    raw = json.loads(data)
    assert raw["config"]["verb"] == "verify re"
    assert canonicalize(raw["checks"][0]["derived"]["K(z)"]) == raw["checks"][0]["derived"]["K(z)"]


def test_text_report(capsys):
    assert main(["verify", "coideal"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("reflekt ")
    assert "[PASS] coideal" in out


def test_reports_are_deterministic():
    a = emit_report(run(["transfer", "--sites", "3", "--draws", "2", "--seed", "3"])[1], "json")
    b = emit_report(run(["transfer", "--sites", "3", "--draws", "2", "--seed", "3"])[1], "json")
    strip = lambda d: [{k: v for k, v in c.items() if k != "wall_time"} for c in json.loads(d)["checks"]]
    assert strip(a) == strip(b)


def test_specialize():
    code, report, cfg = run(["verify", "re", "--specialize", "v=3/2,xi=5/7", "--format", "json"])
    assert code == 0
    assert report.config["specialize"] == {"v": "3/2", "xi": "5/7"}


def test_config_file(tmp_path):
    path = tmp_path / "job.ini"
    path.write_text("[datum]\nkind = a1-affine\n[modules]\nspin = 1\nsites = 1\n[run]\nseed = 4\n")
    cfg = load_config(str(path), JobConfig())
    assert cfg.spin == 1 and cfg.sites == 1 and cfg.seed == 4
    code, report, _ = run(["transfer", "--config", str(path), "--spin", "1/2"])
    assert code == 0
    assert report.config["seed"] == 4 and report.config["spin"] == "1/2"


@pytest.mark.parametrize("text", ["[bogus]\nx = 1\n", "[modules]\ncolour = red\n", "[datum]\nkind = e8\n"])
def test_bad_config(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(str(path), JobConfig())
    assert main(["verify", "re", "--config", str(path)]) == 2


def test_config_errors():
    with pytest.raises(ConfigError):
        parse_spin("1/3")
    with pytest.raises(ConfigError):
        parse_spin("half")
    with pytest.raises(ConfigError):
        parse_bindings("v")
    assert parse_bindings("v = 2, xi=1/3") == {"v": S(2), "xi": S("1/3")}
    assert main(["verify", "re", "--model", "a1"]) == 2
    assert main(["transfer", "--sites", "-1"]) == 2
    with pytest.raises(SystemExit):
        main(["verify", "nonsense"])


def test_bad_report():
    with pytest.raises(IOFailure):
        load_report(b"{not json")
    with pytest.raises(IOFailure):
        emit_report(run(["verify", "coideal"])[1], "xml")


def test_draws_are_bounded():
    import random
    rng = random.Random(0)
    for _ in range(200):
        x = draw_rational(rng)
        assert abs(x.numerator) <= 97 and x.denominator <= 97 and x not in (0, 1, -1)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("REFLEKT_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("REFLEKT_THREADS", "zero")
    assert worker_count() == 1
    monkeypatch.setenv("REFLEKT_THREADS", "1")
    code, _, _ = run(["verify", "re"])
    assert code == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "reflekt", "verify", "coideal", "--format", "json"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["checks"][0]["status"] == "pass"
