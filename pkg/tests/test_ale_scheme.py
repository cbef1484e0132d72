import numpy as np
import pytest

from app.cases.freestream import freestream_case, swirl_velocity
from app.errors import FluxError, PositivityError, TimeStepError
from app.physics.euler import ale_normal_flux, primitive_to_conserved
from app.scheme.ale import (
    accumulate_fluxes,
    cap_inversion,
    cfl_timestep,
    clip_timestep,
    compute_timestep,
    face_geometry,
    face_points,
    fv_update,
    osher_flux,
)
from app.scheme.predictor import slab_min_areas
from app.scheme.solver import ALESolver
from tests.helpers import random_states


@pytest.mark.parametrize("M, n", [(1, 2), (2, 2), (3, 3)])
def test_face_points(M, n):
    assert face_points(M) == n


@pytest.mark.parametrize("M", [1, 2, 3])
def test_swept_face_volumes_match_area_change(jittered_disk, M):
    V = swirl_velocity(jittered_disk.vertices, 0.8) + 0.1
    dt = 0.05
    faces = face_geometry(jittered_disk, V, dt, M)
    swept = np.einsum("ep,ep->e", faces.weights, faces.Vn)[:, None]
    change = accumulate_fluxes(jittered_disk, faces.edges, swept)[:, 0]
    areas1 = jittered_disk.signed_areas(jittered_disk.vertices + dt * V)
    np.testing.assert_allclose(change, areas1 - jittered_disk.areas(), rtol=0, atol=1e-14)


def test_face_reference_points_agree_between_sides(jittered_disk):
    faces = face_geometry(jittered_disk, np.zeros_like(jittered_disk.vertices), 0.1, 2,
                          jittered_disk.interior_edges)
    X1, J, _, _ = jittered_disk.affine_maps()
    cells = jittered_disk.edge_cells[faces.edges]
    from_left = X1[cells[:, 0], None] + np.einsum("eij,epj->epi", J[cells[:, 0]], faces.left_xi)
    from_right = X1[cells[:, 1], None] + np.einsum("eij,epj->epi", J[cells[:, 1]], faces.right_xi)
    np.testing.assert_allclose(from_left, faces.points, atol=1e-14)
    np.testing.assert_allclose(from_right, faces.points, atol=1e-14)


def test_osher_flux_is_consistent(gas, rng):
    Q = random_states(rng, 25)
    theta = rng.uniform(0, 2 * np.pi, 25)
    n = np.column_stack([np.cos(theta), np.sin(theta)])
    Vn = rng.uniform(-0.5, 0.5, 25)
    np.testing.assert_allclose(osher_flux(Q, Q, n, Vn, gas), ale_normal_flux(Q, n, Vn, gas), rtol=1e-13, atol=1e-13)


def test_osher_flux_is_antisymmetric(gas, rng):
    qm = random_states(rng, 25)
    qp = random_states(rng, 25)
    theta = rng.uniform(0, 2 * np.pi, 25)
    n = np.column_stack([np.cos(theta), np.sin(theta)])
    Vn = rng.uniform(-0.5, 0.5, 25)
    np.testing.assert_allclose(osher_flux(qm, qp, n, Vn, gas), -osher_flux(qp, qm, -n, -Vn, gas),
                               rtol=1e-12, atol=1e-12)


def test_osher_flux_upwinds_supersonic_flow(gas):
    qm = primitive_to_conserved(np.array([1.0, 6.0, 0.3, 1.0]), gas)
    qp = primitive_to_conserved(np.array([1.02, 5.95, 0.31, 1.01]), gas)
    n = np.array([1.0, 0.0])
    G = osher_flux(qm, qp, n, 0.5, gas)
    np.testing.assert_allclose(G, ale_normal_flux(qm, n, 0.5, gas), rtol=1e-9, atol=1e-9)


def test_osher_flux_rejects_invalid_states(gas):
    good = primitive_to_conserved(np.array([1.0, 0.0, 0.0, 1.0]), gas)
    with pytest.raises(FluxError):
        osher_flux(good, np.array([-1.0, 0.0, 0.0, 1.0]), np.array([1.0, 0.0]), 0.0, gas)


def test_accumulated_fluxes_telescope(jittered_disk, rng):
    edge_flux = rng.normal(size=(jittered_disk.n_edges, 4))
    net = accumulate_fluxes(jittered_disk, np.arange(jittered_disk.n_edges), edge_flux)
    np.testing.assert_allclose(net.sum(axis=0), edge_flux[jittered_disk.boundary_edges].sum(axis=0), atol=1e-12)


def test_fv_update_keeps_uniform_state(gas):
    q = primitive_to_conserved(np.array([1.0, 0.2, 0.0, 1.0]), gas)
    Q0 = np.tile(q, (3, 1))
    areas = np.array([0.5, 1.0, 2.0])
    Q1 = fv_update(Q0, areas, 1.1 * areas, -0.1 * areas[:, None] * q, None, gas)
    np.testing.assert_allclose(Q1, Q0, rtol=1e-14)


def test_fv_update_rejects_negative_density(gas):
    q = primitive_to_conserved(np.array([1.0, 0.0, 0.0, 1.0]), gas)
    outflow = np.zeros((2, 4))
    outflow[1, 0] = 5.0
    with pytest.raises(PositivityError) as info:
        fv_update(np.tile(q, (2, 1)), np.ones(2), np.ones(2), outflow, None, gas)
    assert info.value.cell == 1


@pytest.mark.parametrize("dt, t, targets, expected", [
    (0.1, 0.95, [1.0], 0.05),
    (0.1, 0.0, [0.5, 1.0], 0.1),
    (0.1, 0.5, [0.5, 1.0], 0.1),
    (0.1, 1.0, [1.0], 0.1),
])
def test_clip_timestep(dt, t, targets, expected):
    assert clip_timestep(dt, t, targets) == pytest.approx(expected)


def test_cap_inversion_halves_until_valid(small_disk):
    V = np.zeros_like(small_disk.vertices)
    V[0] = [50.0, 0.0]
    dt = cap_inversion(small_disk, V, 1.0)
    assert dt < 1.0
    assert np.all(slab_min_areas(small_disk, V, dt) > 0.0)
    assert np.any(slab_min_areas(small_disk, V, 2.0 * dt) <= 0.0)


def test_cfl_timestep_scales_with_degree(small_disk, gas):
    q = primitive_to_conserved(np.array([1.0, 0.5, 0.0, 1.0]), gas)
    Q = np.tile(q, (small_disk.n_cells, 1))
    V = np.zeros_like(small_disk.vertices)
    dt1 = cfl_timestep(small_disk, Q, V, 0.5, 1, gas)
    dt3 = cfl_timestep(small_disk, Q, V, 0.5, 3, gas)
    assert dt1 > 0.0
    assert dt1 / dt3 == pytest.approx(7.0 / 3.0)


def test_timestep_underflow_raises(small_disk, gas):
    q = primitive_to_conserved(np.array([1.0, 0.0, 0.0, 1.0]), gas)
    Q = np.tile(q, (small_disk.n_cells, 1))
    with pytest.raises(TimeStepError):
        compute_timestep(small_disk, Q, np.zeros_like(small_disk.vertices), 0.5, 1, gas, 0.0, 1e20)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_freestream_survives_interior_swirl(M):
    solver = ALESolver(freestream_case(n=3, final_time=10.0), M)
    Q0 = solver.initialize().copy()
    history = solver.run(max_steps=20)
    assert len(history) == 20
    assert not np.allclose(solver.mesh.vertices, solver.case.mesh_factory().vertices)
    assert np.max(np.abs(solver.Q - Q0)) <= 1e-11
    assert max(abs(h.drift) for h in history) < 1e-12
