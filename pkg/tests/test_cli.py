import subprocess
import sys

import pytest

from soilobs import cli
from soilobs.matrixio import load_matrices, read_report

SMALL = """
[grid]
N = 3
spacing = 10.0          ; cm
diffusivity = 0.19e-4   ; cm^2/s
vx = 3.5e-3             ; cm/s
vy_upper = -0.2         ; cm/s
vy_lower = -0.1         ; cm/s
y_axis = up
sensors = 1,1; 3,1
tau_na = 1.0            ; s

[reaction]
r_max = 1.2e-4
K_na = 4.5e-3
K_oc = 6.0e-3

[coupling]
operating_point = 5e-3, 3e-3, 2e-4

[lipschitz]
resolution = 5

[observer]
variant = both

[reduction]
enabled = false
lambda = 2.0e-3, 2.0e-3, 2.1e-3
initial_product = 0.3e-9
gamma = 1e-4

[simulation]
t_end = 20.0
dt = 0.05
stride = 20
"""


@pytest.fixture
def scenario(tmp_path):
    def make(text=SMALL, name="small"):
        path = tmp_path / f"{name}.scenario"
        path.write_text(text)
        return str(path)

    return make


def _run(*argv):
    return cli.main([str(a) for a in argv])


def test_run_writes_all_artifacts(scenario, tmp_path):
    out = tmp_path / "out"
    assert _run("run", "--scenario", scenario(), "--out", out) == cli.EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "design_rh.mtx", "design_thau.mtx", "report.txt", "system.mtx",
        "trajectory_rh.csv", "trajectory_thau.csv",
    ]
    rep = read_report(out / "report.txt")
    assert rep["scenario"]["n"] == str(3 * 9 + 2)
    assert rep["observability"]["detectable"] == "true"
    for v in ("thau", "rh"):
        assert rep[f"design_{v}"]["reverified"] == "true"
        assert float(rep[f"simulation_{v}"]["final_error"]) < float(rep[f"simulation_{v}"]["initial_error"])
    assert "rho" in rep["lipschitz"] and "gamma" in rep["lipschitz"]
    mats = load_matrices(out / "system.mtx")
    assert mats["A"].shape == (29, 29) and mats["B"].shape == (29, 9)


def test_single_variant_uses_plain_names(scenario, tmp_path):
    out = tmp_path / "out"
    assert _run("simulate", "--scenario", scenario(), "--out", out, "--variant", "rh") == 0
    assert (out / "design.mtx").exists() and (out / "trajectory.csv").exists()
    assert "design_thau" not in read_report(out / "report.txt")


@pytest.mark.parametrize(
    "stage,present,absent",
    [
        ("assemble", {"system.mtx"}, {"design_thau.mtx"}),
        ("check", {"system.mtx"}, {"design_thau.mtx"}),
        ("lipschitz", {"system.mtx"}, {"design_thau.mtx"}),
        ("synthesize", {"design_thau.mtx", "design_rh.mtx"}, {"trajectory_thau.csv"}),
    ],
)
def test_stages_stop_where_asked(scenario, tmp_path, stage, present, absent):
    out = tmp_path / stage
    assert _run(stage, "--scenario", scenario(), "--out", out) == 0
    names = {p.name for p in out.iterdir()}
    assert present <= names and not (absent & names)
    rep = read_report(out / "report.txt")
    assert ("observability" in rep) == (stage != "assemble")
    assert ("lipschitz" in rep) == (stage in ("lipschitz", "synthesize"))


def test_config_error_writes_nothing(scenario, tmp_path):
    out = tmp_path / "bad"
    path = scenario(SMALL.replace("spacing = 10.0", "spacing = -10.0"), "bad")
    assert _run("run", "--scenario", path, "--out", out) == cli.EXIT_CONFIG
    assert not out.exists()


def test_missing_scenario_is_config_error(tmp_path):
    assert _run("run", "--scenario", tmp_path / "nowhere.scenario") == cli.EXIT_CONFIG
    assert _run("run") == cli.EXIT_CONFIG


def test_undetectable_orientation_fails_synthesis(scenario, tmp_path):
    out = tmp_path / "down"
    path = scenario(SMALL.replace("y_axis = up", "y_axis = down"), "down")
    assert _run("synthesize", "--scenario", path, "--out", out) == cli.EXIT_SYNTHESIS
    rep = read_report(out / "report.txt")
    assert "synthesis_failure" in rep
    assert rep["observability"]["detectable"] == "false"


def test_unstable_step_reports_divergence(scenario, tmp_path):
    out = tmp_path / "div"
    code = _run("run", "--scenario", scenario(), "--out", out, "--dt", 5.0, "--t-end", 2000)
    assert code == cli.EXIT_DIVERGENCE
    assert (out / "report.txt").exists()


def test_certificate_round_trip(scenario, tmp_path, capsys):
    out = tmp_path / "out"
    _run("synthesize", "--scenario", scenario(), "--out", out)
    rep = read_report(out / "report.txt")
    capsys.readouterr()
    for v in ("thau", "rh"):
        code = _run("check", "--certificate", out / f"design_{v}.mtx")
        text = capsys.readouterr().out
        assert code == cli.EXIT_OK
        assert f"variant = {v}" in text
        assert "passed = true" in text
        assert f"residual_max_eig = {rep[f'design_{v}']['reverified_residual_max_eig']}" in text


def test_tampered_certificate_fails(scenario, tmp_path):
    out = tmp_path / "out"
    _run("synthesize", "--scenario", scenario(), "--out", out, "--variant", "thau")
    path = out / "design.mtx"
    lines = path.read_text().splitlines()
    start = lines.index(next(l for l in lines if l.startswith("%matrix P ")))
    i, j, _ = lines[start + 1].split()
    lines[start + 1] = f"{i} {j} -1e6"
    path.write_text("\n".join(lines) + "\n")
    assert _run("check", "--certificate", path) == cli.EXIT_FAILED_CHECK


def test_rerun_is_byte_identical(scenario, tmp_path):
    out = tmp_path / "out"
    path = scenario()
    _run("run", "--scenario", path, "--out", out, "--full-state")
    first = {p.name: p.read_bytes() for p in out.glob("*.csv")}
    _run("run", "--scenario", path, "--out", out, "--full-state")
    assert first == {p.name: p.read_bytes() for p in out.glob("*.csv")}
    header = first["trajectory_thau.csv"].split(b"\n", 1)[0].split(b",")
    assert len(header) == 2 + 2 * 29


def test_reduce_subcommand(scenario, tmp_path):
    out = tmp_path / "red"
    assert _run("reduce", "--scenario", scenario(), "--out", out) == 0
    mats = load_matrices(out / "system.mtx")
    assert mats["A"].shape == (3 * 3 + 2 + 1,) * 2
    assert mats["C_d"].shape == (11, 1)
    assert "reduction" in read_report(out / "report.txt")


def test_reduced_run(scenario, tmp_path):
    out = tmp_path / "red"
    assert _run("run", "--scenario", scenario(), "--out", out, "--reduced") == 0
    rep = read_report(out / "report.txt")
    assert rep["scenario"]["model"] == "reduced"
    assert "lipschitz" not in rep
    assert rep["design_thau"]["gamma"] == "0.0001"


def test_sweep(scenario, tmp_path):
    a = scenario(name="a")
    b = scenario(SMALL.replace("t_end = 20.0", "t_end = 10.0"), name="b")
    bad = scenario(SMALL.replace("tau_na = 1.0", "tau_na = -1.0"), name="c")
    root = tmp_path / "sweep"
    assert _run("run", "--sweep", a, b, "--out", root, "--jobs", 2) == cli.EXIT_OK
    assert (root / "a" / "trajectory_rh.csv").exists()
    assert (root / "b" / "trajectory_rh.csv").exists()
    assert _run("run", "--sweep", a, bad, "--out", root) == cli.EXIT_CONFIG
    assert not (root / "c").exists()


def test_bundled_scenario_assembles(tmp_path):
    assert _run("assemble", "--scenario", "bundled:table1", "--out", tmp_path / "t1") == 0
    assert _run("assemble", "--scenario", "bundled:nope", "--out", tmp_path / "x") == cli.EXIT_CONFIG


def test_console_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "soilobs.cli", "assemble", "--scenario", "bundled:table2_reduced", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "system.mtx").exists()
