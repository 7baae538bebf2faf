import json

from click.testing import CliRunner

from ppta.cli import main

from conftest import model_path

GEO = model_path("geometric")
NRP = model_path("nrp")


def run(*args):
    return CliRunner().invoke(main, list(args))


def test_check_success():
    r = run("check", GEO, "--target", "goal", "--gamma", "T=3")
    assert r.exit_code == 0, r.output
    assert "max reachability = 7/8" in r.output


def test_check_backwards_witness():
    r = run("check", GEO, "--target", "goal", "--engine", "backwards",
            "--gamma", "T=2")
    assert r.exit_code == 0, r.output
    assert "3/4" in r.output
    assert "witness:" in r.output


def test_check_records_format():
    r = run("check", GEO, "--target", "goal", "--gamma", "T=3",
            "--format", "records")
    assert r.exit_code == 0, r.output
    data = json.loads(r.output)
    assert data["value"] == "7/8"


def test_usage_errors_exit_1():
    r = run("check", GEO, "--target", "goal", "--gamma", "T=zzz")
    assert r.exit_code == 1
    r = run("check", GEO, "--target", "", "--gamma", "T=1")
    assert r.exit_code == 1
    r = run("check", GEO, "--target", "goal", "--objective", "median")
    assert r.exit_code == 1
    r = run("nonsense")
    assert r.exit_code == 1


def test_parse_error_exit_2(tmp_path):
    bad = tmp_path / "bad.pppta"
    bad.write_text("pppta nope clocks ;;;")
    r = run("check", str(bad), "--target", "goal")
    assert r.exit_code == 2
    assert "error (parse)" in r.output


def test_validation_error_exit_2(tmp_path):
    bad = tmp_path / "bad.pppta"
    bad.write_text("pppta b clocks c; prob_params p in [0,1]; "
                   "location a init; "
                   "edge a -- x [] -> { p : goto a ; p : reset {c} goto a };")
    r = run("check", str(bad), "--target", "a", "--rho", "p=1/2")
    assert r.exit_code == 2
    assert "error (validation)" in r.output


def test_precondition_exit_3(tmp_path):
    # backwards + min is refused
    r = run("check", GEO, "--target", "goal", "--objective", "min",
            "--engine", "backwards", "--gamma", "T=2")
    assert r.exit_code == 3
    assert "error (precondition)" in r.output
    # strict model cannot go through the digital engine
    strict = tmp_path / "strict.pppta"
    strict.write_text("pppta s clocks c; location a init invariant c < 2; "
                      "location b; edge a -- x [] -> { 1 : goto b };")
    r = run("check", str(strict), "--target", "b")
    assert r.exit_code == 3


def test_info():
    r = run("info", NRP)
    assert r.exit_code == 0, r.output
    assert "clock param CD in [6, 10]: Lower" in r.output
    assert "clock param TO in [3, 20]: Both" in r.output
    assert "closed: yes" in r.output


def test_info_invalid_model_exit_2(tmp_path):
    bad = tmp_path / "bad.pppta"
    bad.write_text("pppta b clocks c; prob_params p in [0,1]; "
                   "location a init; "
                   "edge a -- x [] -> { p : goto a ; p : reset {c} goto a };")
    r = run("info", str(bad))
    assert r.exit_code == 2
    assert "diagnostic:" in r.output


def test_synth_default_region():
    r = run("synth", GEO, "--target", "goal")
    assert r.exit_code == 0, r.output
    assert "best: gamma T=5" in r.output
    assert "value 31/32" in r.output
    assert "reduction fixed: T=5" in r.output


def test_synth_gamma_range_no_reduce():
    r = run("synth", GEO, "--target", "goal", "--gamma-range", "T=0:4",
            "--no-reduce")
    assert r.exit_code == 0, r.output
    assert "best: gamma T=4" in r.output
    assert "evaluated points: 5" in r.output


def test_synth_gamma_set_and_records(tmp_path):
    pts = tmp_path / "points.txt"
    pts.write_text("T=1, U=0\nT=0, U=1  // the good corner\n")
    r = run("synth", model_path("separability"), "--target", "goal",
            "--gamma-set", str(pts), "--format", "records")
    assert r.exit_code == 0, r.output
    lines = [json.loads(l) for l in r.output.strip().splitlines()]
    assert len(lines) == 3  # two table rows plus the summary
    assert lines[-1]["best"]["gamma"] == {"T": 0, "U": 1}
    assert lines[-1]["best"]["value"] == "1"


def test_synth_rho_grid():
    r = run("synth", NRP, "--target", "done", "--rho-grid", "p=1/2",
            "--rho-grid", "q:#1", "--gamma-range", "TO=3:3",
            "--gamma-range", "CD=6:6", "--format", "records")
    assert r.exit_code == 0, r.output
    lines = [json.loads(l) for l in r.output.strip().splitlines()]
    for row in lines[:-1]:
        assert row["rho"]["p"] == "1/2"
        assert row["rho"]["q"] == "1/10"


def test_reduce_command():
    r = run("reduce", NRP)
    assert r.exit_code == 0, r.output
    assert "fix CD = 6 (Lower)" in r.output
    assert "keep TO in [3, 20] (Both)" in r.output


def test_export_deterministic(tmp_path):
    out1, out2 = tmp_path / "a.txt", tmp_path / "b.txt"
    r = run("export", GEO, "--target", "goal", "--gamma", "T=2",
            "-o", str(out1))
    assert r.exit_code == 0, r.output
    r = run("export", GEO, "--target", "goal", "--gamma", "T=2",
            "-o", str(out2))
    assert r.exit_code == 0
    assert out1.read_text() == out2.read_text()
    assert "pmdp" in out1.read_text()


def test_export_backwards_to_stdout():
    r = run("export", GEO, "--target", "goal", "--engine", "backwards",
            "--gamma", "T=1")
    assert r.exit_code == 0, r.output
    assert r.output.startswith("# backwards pmdp of geometric")
    assert "stall" in r.output
