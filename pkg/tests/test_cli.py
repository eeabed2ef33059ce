import io as _io
import json
import subprocess
import sys

import pytest

from shellrecon import cli
from shellrecon import io
from shellrecon.forward import BoundaryData, reference_trace
from shellrecon.nd_map import ShellConfig, nd_symbol, symbol_table

G2 = {"dimension": 2, "basis": "fourier", "modes": [{"n": 0, "re": 1.0, "im": 0.0}, {"n": 1, "re": 1.0, "im": 0.0},
                                                     {"n": -1, "re": 1.0, "im": 0.0}, {"n": 2, "re": 0.5, "im": 0.0}]}
G3 = {"dimension": 3, "basis": "spherical_harmonic", "modes": [{"n": 2, "m": 1, "re": 1.0, "im": 0.0},
                                                             {"n": 1, "m": 0, "re": 0.3, "im": 0.0}]}


@pytest.fixture
def gfile(tmp_path):
    def write(doc, name="g.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return write


def run(argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", _io.StringIO(stdin))
    return cli.main(argv)


# --- forward ------------------------------------------------------------------

def test_forward_writes_symbol_products(gfile, tmp_path):
    out = tmp_path / "trace.json"
    assert cli.main(["forward", "--dim", "2", "--r1", "0.5", "--sigma1", "2", "--g", gfile(G2), "--out", str(out)]) == 0
    trace = BoundaryData.from_dict(json.loads(out.read_text()))
    cfg = ShellConfig(2, 0.5, 2.0)
    for k in trace.modes():
        assert trace[k] == nd_symbol(cfg, abs(k)) * BoundaryData.from_dict(G2)[k]


def test_forward_unit_sigma_is_reference(gfile, capsys):
    assert cli.main(["forward", "--r1", "0.3", "--sigma1", "1", "--g", gfile(G2)]) == 0
    trace = BoundaryData.from_dict(json.loads(capsys.readouterr().out))
    ref = reference_trace(BoundaryData.from_dict(G2))
    for k in ref.modes():
        assert trace[k] == pytest.approx(ref[k], rel=1e-14)


def test_forward_missing_r1_is_usage_error(gfile, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["forward", "--sigma1", "2", "--g", gfile(G2)])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("doc", [{"dimension": 2}, "not json"])
def test_forward_malformed_input(tmp_path, doc, capsys):
    path = tmp_path / "bad.json"
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    assert cli.main(["forward", "--r1", "0.5", "--sigma1", "2", "--g", str(path)]) == 2
    assert "error" in capsys.readouterr().err


def test_forward_dimension_mismatch(gfile):
    assert cli.main(["forward", "--dim", "3", "--r1", "0.5", "--sigma1", "2", "--g", gfile(G2)]) == 2


def test_forward_bad_config(gfile):
    assert cli.main(["forward", "--r1", "1.5", "--sigma1", "2", "--g", gfile(G2)]) == 2


def test_forward_wave_csv(gfile, tmp_path):
    wave = tmp_path / "w.csv"
    argv = ["forward", "--dim", "3", "--r1", "0.4", "--sigma1", "0.25", "--g", gfile(G3),
            "--out", str(tmp_path / "t.json"), "--wave-csv", str(wave), "--wave-grid", "2,3,2"]
    assert cli.main(argv) == 0
    header, rows = io.parse_csv(wave.read_text())
    assert header == ["r", "phi", "theta", "re", "im"]
    assert len(rows) == 2 * 3 * 2
    assert all(len(r) == 5 for r in rows)


def test_forward_wave_grid_validation(gfile, tmp_path):
    argv = ["forward", "--r1", "0.4", "--sigma1", "2", "--g", gfile(G2), "--out", str(tmp_path / "t.json"),
            "--wave-csv", str(tmp_path / "w.csv"), "--wave-grid", "2,3,4"]
    assert cli.main(argv) == 2


# --- ndmap --------------------------------------------------------------------

def test_ndmap_table_rows(capsys):
    assert cli.main(["ndmap", "--dim", "3", "--r1", "0.4", "--sigma1", "0.25", "--nmax", "64"]) == 0
    header, rows = io.parse_csv(capsys.readouterr().out)
    assert header == ["n", "lambda"]
    assert len(rows) == 65
    table = symbol_table(ShellConfig(3, 0.4, 0.25), 64)
    # 17 significant digits round-trip bit-for-bit
    assert [float(r[1]) for r in rows] == list(table.symbols)


def test_ndmap_single_row(capsys):
    assert cli.main(["ndmap", "--r1", "0.4", "--sigma1", "3", "--nmax", "0"]) == 0
    _, rows = io.parse_csv(capsys.readouterr().out)
    assert len(rows) == 1


def test_ndmap_sweep_monotone(capsys):
    assert cli.main(["ndmap", "--sweep", "sigma1:2,1.5,1.25,1.125", "--r1", "0.5"]) == 0
    header, rows = io.parse_csv(capsys.readouterr().out)
    assert header == ["parameter", "norm", "argmax_mode"]
    norms = [float(r[1]) for r in rows]
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_ndmap_sweep_needs_fixed_parameter():
    assert cli.main(["ndmap", "--sweep", "r1:0.4,0.2"]) == 2
    assert cli.main(["ndmap", "--sweep", "sigma1:2,1.5"]) == 2


def test_ndmap_bad_sweep_spec():
    with pytest.raises(SystemExit) as info:
        cli.main(["ndmap", "--sweep", "r2:0.4", "--r1", "0.5"])
    assert info.value.code == 2


def test_ndmap_uncertified_truncation_exit_3(monkeypatch, capsys):
    from shellrecon import nd_map

    monkeypatch.setattr(nd_map, "_tail_ok", lambda values: False)
    assert cli.main(["ndmap", "--sweep", "sigma1:2,1.5", "--r1", "0.5", "--nmax", "16"]) == 3
    assert "not certified" in capsys.readouterr().err


# --- invert -------------------------------------------------------------------

def forward_measurement(tmp_path, gfile, dim, r1, s1, doc):
    meas = tmp_path / "m.json"
    argv = ["forward", "--dim", str(dim), "--r1", str(r1), "--sigma1", str(s1), "--g", gfile(doc),
            "--out", str(tmp_path / "t.json"), "--measurement", str(meas)]
    assert cli.main(argv) == 0
    return meas


def test_invert_round_trip(tmp_path, gfile, capsys):
    meas = forward_measurement(tmp_path, gfile, 2, 0.5, 2.0, G2)
    assert cli.main(["invert", "--r1", "0.5", "--measurement", str(meas)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["sigma1"] == pytest.approx(2.0, rel=1e-8)
    assert {"sigma1", "mode_used", "residual", "per_mode"} <= set(doc)


def test_invert_from_stdin_trace(tmp_path, gfile, monkeypatch, capsys):
    g = gfile(G3)
    assert cli.main(["forward", "--dim", "3", "--r1", "0.3", "--sigma1", "0.25", "--g", g]) == 0
    trace = capsys.readouterr().out
    assert run(["invert", "--dim", "3", "--r1", "0.3", "--g", g, "--trace", "-"], trace, monkeypatch) == 0
    assert json.loads(capsys.readouterr().out)["sigma1"] == pytest.approx(0.25, rel=1e-8)


def test_invert_unit_sigma(tmp_path, gfile, capsys):
    meas = forward_measurement(tmp_path, gfile, 2, 0.6, 1.0, G2)
    assert cli.main(["invert", "--r1", "0.6", "--measurement", str(meas)]) == 0
    assert abs(json.loads(capsys.readouterr().out)["sigma1"] - 1.0) <= 1e-10


def test_invert_corrupted_trace_exit_4(tmp_path, gfile, capsys):
    meas = forward_measurement(tmp_path, gfile, 2, 0.5, 2.0, G2)
    doc = json.loads(meas.read_text())
    doc["dirichlet"]["modes"][-1]["re"] *= 2
    meas.write_text(json.dumps(doc))
    assert cli.main(["invert", "--r1", "0.5", "--measurement", str(meas)]) == 4
    captured = capsys.readouterr()
    assert json.loads(captured.out)["error"] == "inconsistent measurement"
    assert "inconsistent" in captured.err


def test_invert_needs_inputs():
    assert cli.main(["invert", "--r1", "0.5"]) == 2


def test_invert_noise_and_potential(tmp_path, gfile, capsys):
    meas = forward_measurement(tmp_path, gfile, 2, 0.5, 2.0, {"dimension": 2, "modes": [{"n": 0, "re": 1.0}]})
    argv = ["invert", "--r1", "0.5", "--measurement", str(meas), "--noise", "1e-12", "--seed", "9", "--e-tilde", "3"]
    assert cli.main(argv) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["noise"] == {"relative": 1e-12, "seed": 9}
    assert doc["potential"]["u_tilde_shell"] == 4.0


def test_invert_ill_posed_exit_3(tmp_path, gfile):
    meas = tmp_path / "m.json"
    zero = {"dimension": 2, "modes": [{"n": 1, "re": 0.0}]}
    meas.write_text(json.dumps({"neumann": zero, "dirichlet": zero}))
    assert cli.main(["invert", "--r1", "0.5", "--measurement", str(meas)]) == 3


# --- nonuniq ------------------------------------------------------------------

def test_nonuniq_unit_control(capsys):
    assert cli.main(["nonuniq", "--r1", "0.5", "--sigma1", "1", "--r2", "0.7", "--n", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["b"]["sigma1"] - 1.0) <= 1e-10


def test_nonuniq_pair(capsys):
    assert cli.main(["nonuniq", "--r1", "0.5", "--sigma1", "2", "--r2", "0.7", "--n", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["symbol_gap"] <= 1e-10 and doc["det_residual"] <= 1e-10
    assert doc["a"] == {"r1": 0.5, "sigma1": 2.0}


def test_nonuniq_no_root_exit_5(capsys):
    argv = ["nonuniq", "--r1", "0.5", "--sigma1", "2", "--r2", "0.7", "--n", "1", "--sigma2-range", "10,11"]
    assert cli.main(argv) == 5
    assert "no sign change" in capsys.readouterr().err


# --- verify -------------------------------------------------------------------

def test_verify_single_suite(capsys):
    assert cli.main(["verify", "--suite", "wronskian"]) == 0
    out = capsys.readouterr().out
    assert "wronskian" in out and "PASS" in out and "oracle" not in out


def test_verify_unknown_suite():
    assert cli.main(["verify", "--suite", "nope"]) == 2


def test_verify_failure_exit_1(monkeypatch):
    from shellrecon import verify

    def failing(quick=False):
        res = verify.SuiteResult("ratio_bound")
        res.record(1.0, False)
        return res

    monkeypatch.setitem(verify.SUITES, "ratio_bound", failing)
    assert cli.main(["verify", "--suite", "ratio_bound"]) == 1


# --- module entry and threads -------------------------------------------------

def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "shellrecon", "ndmap", "--r1", "0.5", "--sigma1", "2", "--nmax", "3"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "n,lambda"


def test_thread_count_does_not_change_output(monkeypatch, capsys):
    argv = ["ndmap", "--dim", "3", "--r1", "0.4", "--sigma1", "0.25", "--nmax", "40"]
    monkeypatch.delenv("SHELLRECON_THREADS", raising=False)
    cli.main(argv)
    serial = capsys.readouterr().out
    monkeypatch.setenv("SHELLRECON_THREADS", "4")
    cli.main(argv)
    assert capsys.readouterr().out == serial
