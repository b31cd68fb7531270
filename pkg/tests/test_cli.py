import json
import math
import subprocess
import sys

import numpy as np
import pytest

from mfbm import export
from mfbm.cli import RunConfig, build_parser, config_from_args, main, parse_alphas
from mfbm.errors import DomainError
from mfbm.fbm import fbm_increment_covariance


def run_cli(argv, tmp_path, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (out.read_text(encoding="utf-8") if out.exists() else None)


def embedded_config(text):
    _, _, comments = export.read_csv(text)
    line = next(c for c in comments if c.startswith("config: "))
    return json.loads(line[len("config: "):])


def test_covariance_trace_line(tmp_path):
    code, text = run_cli(["covariance", "--hurst", "0.8", "--n", "2"], tmp_path)
    assert code == 0
    _, _, comments = export.read_csv(text)
    trace = float(next(c for c in comments if c.startswith("trace=")).split("=")[1])
    assert trace == pytest.approx(2**-0.6, rel=1e-15)
    assert trace == pytest.approx(0.659754, abs=1e-6)


def test_covariance_brownian_matrix_round_trips(tmp_path):
    code, text = run_cli(["covariance", "--hurst", "0.5", "--n", "4"], tmp_path)
    assert code == 0
    header, rows, _ = export.read_csv(text)
    assert header == ["c0", "c1", "c2", "c3"]
    np.testing.assert_array_equal(np.array(rows, dtype=float), 0.25 * np.eye(4))


def test_covariance_csv_is_exact(tmp_path):
    _, text = run_cli(["covariance", "--hurst", "0.83", "--n", "7"], tmp_path)
    _, rows, _ = export.read_csv(text)
    np.testing.assert_array_equal(np.array(rows, dtype=float), fbm_increment_covariance(0.83, 7).matrix)


def test_covariance_json(tmp_path):
    code, text = run_cli(["covariance", "--hurst", "0.8", "--n", "3", "--format", "json"], tmp_path)
    doc = json.loads(text)
    assert code == 0
    assert doc["stats"]["total"] == pytest.approx(1.0, abs=1e-12)
    assert doc["config"]["hurst"] == 0.8


def test_validation_exit_code(tmp_path, capsys):
    code, text = run_cli(["covariance", "--hurst", "1.2", "--n", "4"], tmp_path)
    assert code == 2 and text is None
    err = capsys.readouterr().err
    assert err.startswith("DomainError:") and "(0, 1)" in err


def test_sweep_default_increasing(tmp_path):
    code, text = run_cli(["entropy-sweep", "--defaults"], tmp_path)
    assert code == 0
    header, rows, _ = export.read_csv(text)
    assert tuple(header) == export.SWEEP_COLUMNS
    h = [float(r[header.index("entropy_nats")]) for r in rows]
    assert len(h) == 6 and all(b > a for a, b in zip(h, h[1:]))


def test_sweep_drift_differs_by_correction(tmp_path):
    _, base = run_cli(["entropy-sweep", "--mu", "0"], tmp_path, "a")
    _, drift = run_cli(["entropy-sweep", "--mu", "1"], tmp_path, "b")
    hdr, r0, _ = export.read_csv(base)
    _, r1, _ = export.read_csv(drift)
    i, w = hdr.index("entropy_nats"), hdr.index("entropy_wiener_nats")
    for a, b in zip(r0, r1):
        alpha = float(a[0])
        corr = 0.5 * (-(alpha**4) / (alpha**2 + 1) + math.log(alpha**2 + 1))
        assert float(b[i]) - float(a[i]) == pytest.approx(corr, rel=1e-8, abs=1e-9)
        assert float(b[w]) == pytest.approx(float(a[w]), rel=1e-12)


def test_sweep_n1_with_drift_rejected(tmp_path):
    code, _ = run_cli(["entropy-sweep", "--n", "1", "--mu", "0.5"], tmp_path)
    assert code == 2


def test_separate_json_reproducible(tmp_path):
    argv = ["separate", "--format", "json", "--seed", "42"]
    code1, a = run_cli(argv, tmp_path, "a.json")
    code2, b = run_cli(argv, tmp_path, "b.json")
    assert code1 == code2 == 0
    da, db = json.loads(a), json.loads(b)
    assert da["saa_conclusion"] == "SAA-evidence"
    assert da["verdict"] == "EntirelySeparableTrend"
    assert da["seed"] == 42 and da["config"]["seed"] == 42
    assert "timestamp" in da
    assert export.dumps_json(export.canonical_body(da)) == export.dumps_json(export.canonical_body(db))
    strip = lambda t: "".join(ln for ln in t.splitlines(True) if '"timestamp"' not in ln)
    assert strip(a) == strip(b)


def test_separate_two_point_grid(tmp_path, capsys):
    code, _ = run_cli(["separate", "--alphas", "1,2"], tmp_path)
    assert code == 2
    assert "InsufficientData" in capsys.readouterr().err


def test_seed_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("MFBM_SEED", "7")
    _, a = run_cli(["separate", "--n", "4", "--samples", "200", "--format", "json"], tmp_path, "a")
    assert json.loads(a)["seed"] == 7
    _, b = run_cli(["separate", "--n", "4", "--samples", "200", "--format", "json", "--seed", "9"], tmp_path, "b")
    assert json.loads(b)["seed"] == 9
    monkeypatch.setenv("MFBM_SEED", "not-a-number")
    code, _ = run_cli(["separate"], tmp_path, "c")
    assert code == 2


def test_restricted_columns(tmp_path):
    code, text = run_cli(["restricted", "--samples", "100000"], tmp_path)
    assert code == 0
    header, rows, comments = export.read_csv(text)
    assert tuple(header) == export.RESTRICTED_COLUMNS
    for r in rows:
        e, se = float(r[1]), float(r[2])
        assert abs(e - 1) <= 3 * se
        assert float(r[3]) >= 0.3 and float(r[5]) >= 0.3
    mass = float(next(c for c in comments if c.startswith("tilt_mass=")).split("=")[1])
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_restricted_bad_delta(tmp_path):
    code, _ = run_cli(["restricted", "--delta", "1.5"], tmp_path)
    assert code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["covariance", "--hurst", "0.9", "--n", "5"],
        ["entropy-sweep", "--n", "4", "--alphas", "0.5:8:5", "--mu", "0.3"],
        ["separate", "--n", "4", "--samples", "500", "--alphas", "1,3,9", "--seed", "3"],
        ["restricted", "--samples", "10000", "--alphas", "10,20", "--seed", "11", "--format", "json"],
    ],
)
def test_embedded_config_reproduces_body(argv, tmp_path):
    _, first = run_cli(argv, tmp_path, "first")
    if "--format" in argv:
        cfg_dict = json.loads(first)["config"]
    else:
        cfg_dict = embedded_config(first)
    cfg = RunConfig(**{**cfg_dict, "alphas": tuple(cfg_dict["alphas"]) if cfg_dict["alphas"] else None})
    _, second = run_cli(cfg.to_argv(), tmp_path, "second")
    if "--format" in argv:
        assert export.canonical_body(json.loads(first)) == export.canonical_body(json.loads(second))
    else:
        assert first == second


def test_parse_alphas():
    assert parse_alphas("1:32:geometric") == (1, 2, 4, 8, 16, 32)
    assert parse_alphas("1,2.5,7") == (1.0, 2.5, 7.0)
    np.testing.assert_allclose(parse_alphas("1:100:3"), [1, 10, 100])
    for bad in ("a,b", "1:2", "0:4:geometric", "1:2:x"):
        with pytest.raises(DomainError):
            parse_alphas(bad)


def test_defaults_match_acceptance_inputs():
    parser = build_parser()
    sep = config_from_args(parser.parse_args(["separate", "--defaults"]))
    assert (sep.hurst, sep.mu, sep.sigma, sep.n, sep.samples) == (0.8, 0.0, 1.0, 16, 10_000)
    assert sep.alphas == (1, 2, 4, 8, 16, 32)
    res = config_from_args(parser.parse_args(["restricted"]))
    assert (res.sigma, res.alphas, res.delta, res.samples) == (1.0, (10, 30, 100), 0.1, 1_000_000)


def test_module_entry_point(tmp_path):
    out = tmp_path / "cov.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "mfbm", "covariance", "--n", "3", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("# config:")


def test_stdout_when_no_out(capsys):
    assert main(["covariance", "--n", "2"]) == 0
    assert "c0,c1" in capsys.readouterr().out


def test_json_has_no_nan():
    text = export.dumps_json({"a": float("nan"), "b": [1.0, float("inf")]})
    assert json.loads(text) == {"a": None, "b": [1.0, None]}
