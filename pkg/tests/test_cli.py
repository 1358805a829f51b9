import csv
import io
import json

import numpy as np
import pytest

from srbb import tableio
from srbb.cli import main
from srbb.gamma import GammaTable


def run(*args):
    return main([str(a) for a in args])


def body(path):
    lines = [l for l in open(path) if not l.startswith("#")]
    return list(csv.reader(io.StringIO("".join(lines))))


def test_alpha_zero_table_equals_phi_and_manifest(tmp_path):
    out = tmp_path / "g.csv"
    assert run("estimate-gamma", "--seed", 1, "--alpha", 0, "--K", 6, "--d", 3, "--out", out) == 0
    t = GammaTable.load(out)
    assert np.array_equal(t.values, (2 * np.pi * np.arange(1, 7)) ** -1.5)
    man = json.loads((tmp_path / "g.csv.manifest.json").read_text())
    assert man["config"]["K"] == 6 and "wall_time_s" in man and man["outputs"] == [str(out)]


def test_resume_and_rerun(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["--seed", 3, "--alpha", 0.3, "--n-samples", 600, "--M", 6, "--d", 3]
    assert run("estimate-gamma", *common, "--K", 3, "--out", a) == 0
    first = GammaTable.load(a)
    assert run("estimate-gamma", *common, "--K", 5, "--out", a) == 0
    assert run("estimate-gamma", *common, "--K", 5, "--out", b) == 0
    assert np.array_equal(GammaTable.load(a).values[:3], first.values)
    assert a.read_bytes() == b.read_bytes()


def test_corrupt_cache_is_not_overwritten(tmp_path):
    out = tmp_path / "g.csv"
    run("estimate-gamma", "--seed", 3, "--alpha", 0.3, "--K", 2, "--n-samples", 100, "--M", 4, "--out", out)
    text = out.read_text().replace("\n2,", "\n2,9")
    out.write_text(text)
    assert run("estimate-gamma", "--seed", 3, "--alpha", 0.3, "--K", 4, "--n-samples", 100, "--M", 4,
               "--out", out) == 2
    assert out.read_text() == text


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nseed = 4\n\n[estimate-gamma]\nalpha = 0\nK = 3\nd = 2\n")
    out = tmp_path / "g.csv"
    assert run("estimate-gamma", "--config", cfg, "--K", 4, "--out", out) == 0
    t = GammaTable.load(out)
    assert t.K == 4 and t.d == 2 and t.params["seed"] == 4
    bad = tmp_path / "bad.ini"
    bad.write_text("[estimate-gamma]\nflavour = 3\n")
    assert run("estimate-gamma", "--config", bad, "--seed", 1, "--out", out) == 2
    assert run("estimate-gamma", "--config", tmp_path / "missing.ini", "--seed", 1) == 2


def test_missing_seed_and_bad_values(tmp_path):
    assert run("estimate-gamma", "--out", tmp_path / "x.csv") == 2
    assert run("estimate-gamma", "--seed", 1, "--K", "many", "--out", tmp_path / "x.csv") == 2
    with pytest.raises(SystemExit) as e:
        main(["no-such-command"])
    assert e.value.code == 2


def test_phase_diagram_regime_flip(tmp_path):
    out = tmp_path / "p.csv"
    assert run("phase-diagram", "--gamma", "free", "--d", 5, "--K", 400, "--lam", 1,
               "--rho-min", 0.001, "--rho-max", 0.03, "--n-rho", 30, "--out", out) == 0
    rows = body(out)
    assert rows[0] == ["rho", "c", "f", "mass", "regime"]
    header, _, _ = tableio.read(out)
    rc = float(header["rho_c_truncated"])
    for r in rows[1:]:
        assert (r[4] == "supercritical") == (float(r[0]) > rc)
    cs = [float(r[1]) for r in rows[1:] if r[4] == "subcritical"]
    assert all(a > b for a, b in zip(cs, cs[1:]))
    assert run("phase-diagram", "--gamma", "free", "--out", tmp_path / "e.csv") == 2


def test_estimate_rhoc_and_numeric_failure(tmp_path):
    out = tmp_path / "r.csv"
    assert run("estimate-rhoc", "--gamma", "free", "--d", 5, "--K", 200, "--out", out) == 0
    header, cols, rows = tableio.read(out)
    assert float(header["lambda"]) == 1.0 and len(rows) == 200
    bad = GammaTable.free(3, 10)
    bad = GammaTable(bad.values * 0.5 ** np.arange(1, 11), bad.errors, bad.n_samples,
                     dict(bad.params, alpha=0.1, L=1.0))
    bad.save(tmp_path / "bad.csv")
    assert run("estimate-rhoc", "--gamma", tmp_path / "bad.csv", "--out", tmp_path / "x.csv") == 3
    assert run("estimate-rhoc", "--out", tmp_path / "y.csv") == 2


def test_sample_cycles(tmp_path):
    out, samples = tmp_path / "c.csv", tmp_path / "s.txt"
    assert run("sample-cycles", "--seed", 2, "--weights", "free", "--N", 1, "--rho", 0.2, "--n-samples", 4,
               "--K", 1, "--out", out, "--samples-out", samples) == 0
    assert [l for l in samples.read_text().splitlines() if not l.startswith("#")] == ["1:1"] * 4
    assert run("sample-cycles", "--seed", 2, "--weights", "free", "--d", 5, "--N", 100, "--rho", 0.005,
               "--n-samples", 500, "--K", 3, "--K-thermo", 200, "--out", out) == 0
    rows = body(out)
    assert rows[0][-2:] == ["p_star", "z_score"] and all(r[-1] != "nan" for r in rows[1:])
    assert run("sample-cycles", "--seed", 2, "--N", 10, "--rho", 0.1, "--out", out) == 2


def test_verify_suites(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert run("verify", "--seed", 1, "--n-matrices", 50, "--n-samples", 2000, "--M", 8, "--out", out) == 0
    rows = body(out)
    assert [r[0] for r in rows[1:]] == ["lace-identity", "characterization", "interlacing", "convolution",
                                        "deconvolution"]
    assert all(r[3] == "pass" for r in rows[1:])
    assert run("verify", "--seed", 1, "--suites", "characterization", "--mutate", "yes", "--out", out) == 1
    assert body(out)[1][3] == "fail"
    capped = tmp_path / "capped.csv"
    assert run("verify", "--seed", 1, "--N-interlace", 12, "--out", capped) == 2
    assert not capped.exists()
    assert run("verify", "--seed", 1, "--suites", "everything", "--out", capped) == 2


def test_deconvolve_green_and_un(tmp_path):
    out = tmp_path / "d.csv"
    assert run("deconvolve", "--source", "heat", "--X", 6, "--h", 0.05, "--out", out) == 0
    header, cols, rows = tableio.read(out)
    assert float(header["l1_error_vs_exact"]) < 1e-6 and len(rows) == 241
    assert run("deconvolve", "--X", 6, "--h", 0.07, "--out", out) == 2
    assert run("deconvolve", "--source", "heat", "--lam", 1.5, "--X", 6, "--h", 0.05, "--out", out) == 2
    g = tmp_path / "g.csv"
    assert run("green-asymptotics", "--r-min", 1, "--r-max", 4, "--n-r", 4, "--out", g) == 0
    header, _, rows = tableio.read(g)
    assert float(header["a_d"]) == pytest.approx(1 / (4 * np.pi ** 2)) and len(rows) == 4
    assert run("green-asymptotics", "--d", 2, "--out", g) == 2
    u = tmp_path / "u.csv"
    assert run("un-decay", "--seed", 3, "--n-samples", 500, "--M", 4, "--n-s", 3, "--out", u) == 0
    header, _, rows = tableio.read(u)
    assert float(header["slope_log_u_vs_s2"]) < 0


def test_grid_file_source(tmp_path):
    from srbb import greenlab as gl
    f = gl.heat_kernel(1.0, 1, 6.0, 121) * 0.3
    src = tmp_path / "gpi.csv"
    src.write_text(f.dumps())
    out = tmp_path / "d.csv"
    assert run("deconvolve", "--source", src, "--X", 6, "--h", 0.1, "--out", out) == 0
    assert run("deconvolve", "--source", src, "--X", 6, "--h", 0.05, "--out", out) == 2
