"""Longer end-to-end runs. Deselected by default; run with ``pytest -m slow``."""
import numpy as np
import pytest

from app.cases.kidder import KidderSolution
from app.cases.metrics import observed_order
from app.data.schemas import MeshKind, MeshRecipe, RunConfig
from app.runner import run_case

pytestmark = pytest.mark.slow

KIDDER_MESHES = [MeshRecipe(kind=MeshKind.ANNULUS, params={"n_r": 3, "n_theta": 64}),
                 MeshRecipe(kind=MeshKind.ANNULUS, params={"n_r": 5, "n_theta": 128})]


def disk(n: int) -> MeshRecipe:
    return MeshRecipe(kind=MeshKind.DISK, params={"n": n})


def run_all(config: RunConfig, recipes: list[MeshRecipe]):
    return [run_case(config, recipe, write_outputs=False) for recipe in recipes]


def rho_orders(reports) -> list[float]:
    return [observed_order(a.grid_size, a.errors.rho, b.grid_size, b.errors.rho)
            for a, b in zip(reports[:-1], reports[1:])]


def test_manufactured_corrected_reaches_design_order():
    config = RunConfig(case="manufactured", degree=2, corrections={"outer": True}, write_vtk=False)
    coarse, fine = run_all(config, [disk(6), disk(12)])
    assert fine.max_mass_drift < 1e-12
    assert rho_orders([coarse, fine])[0] >= 2.8
    assert 7.82e-4 / 3 <= coarse.errors.rho <= 7.82e-4 * 3
    assert 8.17e-5 / 3 <= fine.errors.rho <= 8.17e-5 * 3


def test_manufactured_uncorrected_loses_order():
    config = RunConfig(case="manufactured", degree=3, corrections={"outer": False}, write_vtk=False)
    reports = run_all(config, [disk(6), disk(12), disk(24)])
    assert all(order <= 2.4 for order in rho_orders(reports))


def test_kidder_corrected_converges_and_compresses_to_the_target_radius():
    config = RunConfig(case="kidder", degree=3, corrections={"inner": True, "outer": True}, write_vtk=False)
    coarse, fine = run_all(config, KIDDER_MESHES)
    assert fine.final_time == pytest.approx(KidderSolution().final_time)
    assert rho_orders([coarse, fine])[0] >= 3.3
    assert abs(fine.extras["inner_radius"] - 0.45) <= 5e-3
    assert fine.max_mass_drift < 1e-12


def test_kidder_correction_removes_spurious_entropy():
    on = RunConfig(case="kidder", degree=3, corrections={"inner": True, "outer": True}, write_vtk=False)
    off = on.model_copy(update={"corrections": {"inner": False, "outer": False}})
    corrected = run_case(on, KIDDER_MESHES[1], write_outputs=False)
    plain = run_case(off, KIDDER_MESHES[1], write_outputs=False)
    assert corrected.entropy_deviation <= 1e-3
    assert corrected.entropy_deviation < plain.entropy_deviation


def test_oscillating_cylinder_correction_halves_entropy():
    on = RunConfig(case="cylinder_horizontal", degree=2, final_time=5.0, corrections={"wall": True}, write_vtk=False)
    off = on.model_copy(update={"corrections": {"wall": False}})
    corrected = run_case(on, write_outputs=False)
    plain = run_case(off, write_outputs=False)
    assert np.isfinite(plain.entropy_deviation)
    assert corrected.entropy_deviation <= 0.5 * plain.entropy_deviation


def test_freestream_run_keeps_the_uniform_state():
    config = RunConfig(case="freestream", degree=3, final_time=0.2, write_vtk=False)
    report = run_case(config, write_outputs=False)
    assert report.steps > 0
    assert report.max_mass_drift < 1e-12
