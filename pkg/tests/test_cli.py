import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hqc import cli, holo, suite
from hqc.errors import InputFormatError
from hqc.grid import DiskGrid
from hqc.output import dumps, fmt

SMALL_MANIFEST = """\
# quick checks
kernel_normalization n_points=5
c_alpha
mori Ks=1,2 n_pairs=500
bergman_closed_form alphas=0.5 ps=1
"""


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


@pytest.fixture
def identity_boundary(tmp_path):
    t = 2 * np.pi * np.arange(1024) / 1024
    path = tmp_path / "identity_boundary.txt"
    np.savetxt(path, np.c_[np.cos(t), np.sin(t)], fmt="%.17g")
    return path


# -- gallery ----------------------------------------------------------------------


def test_gallery(tmp_path, capsys):
    assert run("gallery") == 0
    data = json.loads(capsys.readouterr().out)
    assert {e["name"] for e in data["functions"]} == set(holo.GALLERY_FUNCTIONS)
    assert "rounded-square" in {e["name"] for e in data["curves"]}
    assert run("gallery", "--format", "text") == 0
    assert "f0" in capsys.readouterr().out


# -- extend -------------------------------------------------------------------------


def test_extend_identity(tmp_path, identity_boundary):
    out = tmp_path / "ext"
    assert run("extend", "--input", identity_boundary, "--modes", 512, "--output", out) == 0
    g = holo.read_coefficients(out / "g_coeffs.txt").coeffs
    h = holo.read_coefficients(out / "h_coeffs.txt").coeffs
    assert abs(g[1] - 1) < 1e-10
    assert np.abs(np.delete(g, 1)).max() < 1e-10 and np.abs(h).max() < 1e-10
    rows = read_csv(out / "field.csv")
    assert rows[0] == ["z_re", "z_im", "gp_abs", "hp_abs", "mu_abs", "jacobian"]
    assert len(rows) == 1 + 64 * 512


def test_extend_builtin_curve(tmp_path):
    out = tmp_path / "sq"
    assert run("extend", "--curve", "square", "--modes", 128, "--output", out) == 0
    summary = json.loads((out / "extend.json").read_text())
    assert summary["convex"] is True and summary["jacobian_min"] > 0


def test_extend_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 0\n0 1\n-1 zero\n")
    assert run("extend", "--input", bad, "--output", tmp_path / "o") != 0
    assert "bad.txt:3" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


# -- analyze ------------------------------------------------------------------------


def test_analyze_f0(tmp_path):
    out = tmp_path / "an"
    assert run("analyze", "--map", "f0", "--alpha", 0.5, "--grid-radial", 64, "--grid-angular", 512,
               "--output", out) == 0
    header, row = read_csv(out / "norms.csv")
    Y = float(row[header.index("Y")])
    assert abs(Y - holo.bloch_alpha_norm(holo.f0(), 0.5, DiskGrid.build(64, 512, 20))) < 1e-12
    field = read_csv(out / "field.csv")
    assert field[0] == ["z_re", "z_im", "gp_abs", "hp_abs", "mu_abs", "jacobian", "U"]
    norms = json.loads((out / "norms.json").read_text())
    for key in ("X", "hardy", "bergman_df", "k_hat", "K_hat", "B", "omega"):
        assert norms[key] is not None
    deltas = [d for d, _ in norms["omega"]]
    assert deltas == sorted(deltas)


def test_analyze_from_extend_output(tmp_path, identity_boundary):
    run("extend", "--input", identity_boundary, "--modes", 16, "--output", tmp_path / "e")
    assert run("analyze", "--coeffs", tmp_path / "e", "--output", tmp_path / "a") == 0
    norms = json.loads((tmp_path / "a" / "norms.json").read_text())
    assert abs(norms["B"] - math.pi / 2) < 1e-3 and abs(norms["k_hat"]) < 1e-10


def test_analyze_linear_map(tmp_path):
    assert run("analyze", "--map", "linear", "--k", 0.25, "--output", tmp_path / "a") == 0
    norms = json.loads((tmp_path / "a" / "norms.json").read_text())
    assert abs(norms["K_hat"] - 5 / 3) < 1e-12


# -- parameters ---------------------------------------------------------------------


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 0.3, "grid_angular": 256}))
    args = cli.build_parser().parse_args(["analyze", "--map", "f0", "--config", str(cfg), "--alpha", "0.7",
                                          "--output", "x"])
    params = cli.resolve(args)
    assert params["alpha"] == 0.7          # flag
    assert params["grid_angular"] == 256   # config
    assert params["grid_radial"] == 64     # default
    assert params["exclusion_arc"] == 1e-3


@pytest.mark.parametrize("argv, name", [
    (["analyze", "--map", "f0", "--alpha", "1.5"], "alpha"),
    (["analyze", "--map", "f0", "--grid-radial", "10"], "grid_radial"),
    (["analyze", "--map", "nope"], "map"),
    (["analyze", "--map", "f0", "--p", "-1"], "p"),
    (["verify", "--suite", "core", "--workers", "0"], "workers"),
    (["verify", "--suite", "core", "--seed", "-3"], "seed"),
    (["verify", "--suite", "nope"], "suite"),
    (["analyze", "--map", "f0", "--exclusion-arc", "0"], "exclusion_arc"),
])
def test_parameter_violations(tmp_path, capsys, argv, name):
    out = tmp_path / "o"
    code = run(*argv, "--output", out)
    assert code == 2
    assert f"invalid parameter {name}" in capsys.readouterr().err
    assert not out.exists()


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"alpha": 0.5,\n "bogus": 1}')
    assert run("analyze", "--map", "f0", "--config", cfg, "--output", tmp_path / "o") == 2
    assert "bogus" in capsys.readouterr().err
    cfg.write_text('{"alpha": 0.5,\n oops}')
    assert run("analyze", "--map", "f0", "--config", cfg, "--output", tmp_path / "o") == 3
    assert "cfg.json:2" in capsys.readouterr().err


# -- verify and report ----------------------------------------------------------------


def test_verify_manifest_json_and_csv(tmp_path):
    man = tmp_path / "m.txt"
    man.write_text(SMALL_MANIFEST)
    assert run("verify", "--manifest", man, "--output", tmp_path / "v.json") == 0
    data = json.loads((tmp_path / "v.json").read_text())
    assert all(v["pass"] for v in data)
    assert {"name", "inputs", "lhs", "rhs", "pass", "witness", "grid_meta"} <= set(data[0])
    assert run("verify", "--manifest", man, "--format", "csv", "--output", tmp_path / "v.csv") == 0
    rows = read_csv(tmp_path / "v.csv")
    assert rows[0] == ["name", "lhs", "rhs", "pass", "witness_re", "witness_im"]
    assert len(rows) == len(data) + 1


def test_verify_exit_status_reflects_failures(tmp_path):
    man = tmp_path / "m.txt"
    man.write_text("mori Ks=4 exponent=0.5 n_pairs=200\n")
    assert run("verify", "--manifest", man, "--output", tmp_path / "v.json") == 1
    assert not json.loads((tmp_path / "v.json").read_text())[0]["pass"]


def test_verify_deterministic_across_workers(tmp_path, monkeypatch):
    man = tmp_path / "m.txt"
    man.write_text(SMALL_MANIFEST)
    outs = []
    for workers in ("1", "4", "1"):
        p = tmp_path / f"v{len(outs)}.json"
        run("verify", "--manifest", man, "--workers", workers, "--output", p)
        outs.append(p.read_bytes())
    monkeypatch.setenv("HQC_THREADS", "3")
    run("verify", "--manifest", man, "--output", tmp_path / "env.json")
    assert outs[0] == outs[1] == outs[2] == (tmp_path / "env.json").read_bytes()


def test_manifest_errors(tmp_path, capsys):
    man = tmp_path / "m.txt"
    man.write_text("c_alpha\n\nno_such_check x=1\n")
    assert run("verify", "--manifest", man) == 3
    assert "m.txt:3" in capsys.readouterr().err
    man.write_text("# c\nmori Ks\n")
    with pytest.raises(InputFormatError, match=":2"):
        suite.load_manifest(path=man)


def test_report(tmp_path, capsys):
    man = tmp_path / "m.txt"
    man.write_text(SMALL_MANIFEST)
    (tmp_path / "r").mkdir()
    run("verify", "--manifest", man, "--output", tmp_path / "r" / "v.json")
    assert run("analyze", "--map", "identity", "--output", tmp_path / "r" / "an") == 0
    assert run("report", tmp_path / "r", "--output", tmp_path / "summary.json") == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["all_pass"] and summary["n_files"] == 2 and summary["n_failed"] == 0


def test_console_script_entry(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hqc.cli", "gallery", "--format", "text"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "circle" in proc.stdout


# -- output formatting ------------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    assert float(fmt(x)) == x


@settings(max_examples=100, deadline=None)
@given(obj=st.recursive(
    st.none() | st.booleans() | st.integers(-10 ** 6, 10 ** 6) | st.floats(allow_nan=False, allow_infinity=False)
    | st.text(max_size=8),
    lambda kids: st.lists(kids, max_size=4) | st.dictionaries(st.text(max_size=4), kids, max_size=4),
    max_leaves=12))
def test_json_output_is_valid_and_stable(obj):
    text = dumps(obj)
    assert json.loads(text) == json.loads(json.dumps(obj))
    assert dumps(json.loads(text)) == text


@settings(max_examples=50, deadline=None)
@given(pairs=st.lists(st.tuples(st.sampled_from(["a", "b_c", "Ks"]),
                                st.one_of(st.integers(0, 99), st.floats(0.01, 9.5).map(lambda x: round(x, 3)),
                                          st.lists(st.integers(1, 9), min_size=2, max_size=4))),
                      max_size=4, unique_by=lambda p: p[0]))
def test_manifest_values_parse(pairs):
    tokens = " ".join(f"{k}={','.join(map(str, v)) if isinstance(v, list) else v}" for k, v in pairs)
    (name, params), = suite.parse_manifest(f"c_alpha {tokens}\n")
    assert name == "c_alpha"
    assert params == {k: v for k, v in pairs}
