import json
from pathlib import Path

import numpy as np
import pytest

from app.cli import VERIFY_TOLERANCES, build_parser, main, run_verify
from app.data.loader import load_config, parse_recipe, parse_recipe_list, resolve_case, resolve_mesh
from app.data.schemas import MeshKind
from app.errors import ConfigError
from app.runner import convergence_sweep, run_case, snapshot_schedule

SMOKE = """\
[run]
case = manufactured
degree = 1
cfl = 0.5
final_time = 0.02
snapshot_interval = 0.01
output_dir = {out}

[mesh]
recipe = disk(n=2)

[corrections]
outer = on
"""


def write_config(tmp_path: Path, text: str, name: str = "run.ini") -> Path:
    path = tmp_path / name
    path.write_text(text)
    return path


@pytest.fixture
def smoke_config(tmp_path):
    return write_config(tmp_path, SMOKE.format(out=tmp_path / "out"))


def test_load_config(smoke_config, tmp_path):
    config = load_config(smoke_config)
    assert config.case == "manufactured"
    assert config.degree == 1
    assert config.final_time == 0.02
    assert config.output_dir == tmp_path / "out"
    assert config.mesh.kind is MeshKind.DISK
    assert config.mesh.params == {"n": 2}
    assert config.corrections == {"outer": True}


@pytest.mark.parametrize("text", [
    "[run]\ncase = shock_tube\n",
    "[run]\ncase = manufactured\ndegree = 5\n",
    "[run]\ncase = manufactured\ncfl = -1\n",
    "[run]\ncase = manufactured\n[plot]\nx = 1\n",
    "[run]\ncase = manufactured\n[corrections]\nouter = maybe\n",
    "[run]\ncase = manufactured\n[mesh]\nrecipe = square(n=3)\n",
])
def test_invalid_configs_raise(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_parse_recipes():
    recipe = parse_recipe("annulus(n_r=3, n_theta=64)")
    assert recipe.kind is MeshKind.ANNULUS
    assert recipe.params == {"n_r": 3, "n_theta": 64}
    assert recipe.label() == "annulus(n_r=3, n_theta=64)"
    assert parse_recipe("default").kind is MeshKind.DEFAULT
    assert [r.params["n"] for r in parse_recipe_list("disk(n=4); disk(n=8);")] == [4, 8]
    with pytest.raises(ConfigError):
        parse_recipe("disk(n)")


def test_mesh_tags_must_match_the_case(tmp_path):
    config = load_config(write_config(tmp_path, "[run]\ncase = kidder\n[mesh]\nrecipe = disk(n=2)\n"))
    with pytest.raises(ConfigError):
        resolve_mesh(config, resolve_case(config))


def test_unknown_case_parameter(tmp_path):
    config = load_config(write_config(tmp_path, "[run]\ncase = manufactured\n[case]\nn_theta = 8\n"))
    with pytest.raises(ConfigError):
        resolve_case(config)


@pytest.mark.parametrize("final, interval, expected", [
    (1.0, None, [1.0]),
    (1.0, 0.25, [0.25, 0.5, 0.75, 1.0]),
    (1.0, 0.3, [0.3, 0.6, 0.9, 1.0]),
    (0.2, 0.5, [0.2]),
])
def test_snapshot_schedule(final, interval, expected):
    assert snapshot_schedule(final, interval) == pytest.approx(expected)


def test_verify_passes():
    results = run_verify()
    assert set(results) == set(VERIFY_TOLERANCES)
    assert all(results[k] <= VERIFY_TOLERANCES[k] for k in results)
    assert main(["verify"]) == 0


def test_cli_lists_cases(capsys):
    assert main(["cases"]) == 0
    assert "kidder" in capsys.readouterr().out


def test_cli_reports_config_errors(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.ini")]) == 1
    assert "ERROR" in capsys.readouterr().err


def test_parser_defaults():
    args = build_parser().parse_args(["sweep", "a.ini", "--jobs", "2"])
    assert args.jobs == 2
    assert args.output is None


def test_smoke_run_writes_outputs(smoke_config, tmp_path):
    report = run_case(load_config(smoke_config))
    out = tmp_path / "out"
    assert report.final_time == pytest.approx(0.02)
    assert report.steps > 0
    assert report.snapshot_times == pytest.approx([0.01, 0.02])
    assert report.errors is not None and report.errors.rho < 0.2
    assert report.max_mass_drift < 1e-12
    for name in ("report.json", "timings.json", "conservation.csv", "snapshot_0000.vtk", "snapshot_0001.vtk"):
        assert (out / name).exists()
    assert json.loads((out / "report.json").read_text())["case"] == "manufactured"


def test_report_json_is_deterministic(tmp_path):
    first = load_config(write_config(tmp_path, SMOKE.format(out=tmp_path / "a"), "a.ini"))
    second = first.model_copy(update={"output_dir": tmp_path / "b"})
    run_case(first)
    run_case(second)
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_cli_run(smoke_config, tmp_path, capsys):
    assert main(["run", str(smoke_config), "--output", str(tmp_path / "cli")]) == 0
    assert (tmp_path / "cli" / "report.json").exists()
    assert "L2 error" in capsys.readouterr().out


def test_convergence_sweep(tmp_path):
    text = SMOKE.format(out=tmp_path / "sweep") + "\n[sweep]\nmeshes = disk(n=2); disk(n=3)\n"
    data = convergence_sweep(load_config(write_config(tmp_path, text)), n_jobs=1)
    assert [row["mesh"] for row in data["rows"]] == ["disk(n=2)", "disk(n=3)"]
    assert data["rows"][0]["rho_order"] is None
    assert data["rows"][1]["rho_order"] is not None
    for name in ("convergence.json", "convergence.csv", "convergence.xlsx"):
        assert (tmp_path / "sweep" / name).exists()
    assert (tmp_path / "sweep" / "mesh_01" / "report.json").exists()


def test_sweep_needs_meshes_and_exact_solution(tmp_path):
    with pytest.raises(ConfigError):
        convergence_sweep(load_config(write_config(tmp_path, SMOKE.format(out=tmp_path / "o"))))
    text = "[run]\ncase = cylinder_horizontal\n[sweep]\nmeshes = default\n"
    with pytest.raises(ConfigError):
        convergence_sweep(load_config(write_config(tmp_path, text, "cyl.ini")))


def test_cylinder_box_recipe_is_centered_on_the_wall(tmp_path):
    text = "[run]\ncase = cylinder_vertical\n[mesh]\nrecipe = cylinder_box(n_r=4, n_theta=16)\n"
    config = load_config(write_config(tmp_path, text))
    case = resolve_case(config)
    mesh = resolve_mesh(config, case)
    wall = mesh.vertices[mesh.boundary_vertices("wall")]
    center = case.descriptors["wall"].center(0.0)
    assert center[1] == pytest.approx(0.05)
    assert max(abs(np.hypot(wall[:, 0] - center[0], wall[:, 1] - center[1]) - 1.0)) < 1e-12
