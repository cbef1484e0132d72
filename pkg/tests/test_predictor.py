import numpy as np
import pytest

from app.errors import TangledMeshError
from app.mesh.trimesh import cell_averages
from app.physics.euler import primitive_to_conserved
from app.scheme.basis import spacetime_basis
from app.scheme.predictor import (
    precompute_reference_tensors,
    slab_geometry,
    slab_min_areas,
    solve_predictor,
)
from app.scheme.weno import WenoReconstructor


def advected_state(x, t, gas):
    """rho = 1 + 0.1 (x + y - 2t), u = v = 1, p = 1: an exact linear Euler solution."""
    rho = 1.0 + 0.1 * (x[:, 0] + x[:, 1] - 2.0 * t)
    W = np.column_stack([rho, np.ones_like(rho), np.ones_like(rho), np.ones_like(rho)])
    return primitive_to_conserved(W, gas)


def swirl(X):
    return 0.1 * np.column_stack([-X[:, 1], X[:, 0]])


def test_constant_state_is_preserved_on_moving_slab(jittered_disk, gas):
    q = primitive_to_conserved(np.array([1.2, 0.4, -0.3, 0.9]), gas)
    averages = np.tile(q, (jittered_disk.n_cells, 1))
    recon = WenoReconstructor(jittered_disk, 2).reconstruct(jittered_disk, averages)
    geometry = slab_geometry(jittered_disk, swirl(jittered_disk.vertices), 0.05)
    field, _ = solve_predictor(recon, geometry, gas)
    np.testing.assert_allclose(field.coefficients, np.broadcast_to(q, field.coefficients.shape), atol=1e-11)


@pytest.mark.parametrize("M", [1, 2])
def test_linear_advection_is_exact(jittered_disk, gas, M):
    averages = cell_averages(jittered_disk, lambda x: advected_state(x, 0.0, gas), 2)
    recon = WenoReconstructor(jittered_disk, M).reconstruct(jittered_disk, averages)
    dt = 0.01
    geometry = slab_geometry(jittered_disk, np.zeros_like(jittered_disk.vertices), dt)
    field, _ = solve_predictor(recon, geometry, gas)
    assert field.sweeps <= 3
    cells = np.arange(jittered_disk.n_cells)
    xi = np.full((len(cells), 2), 1.0 / 3.0)
    end = field.end_state(cells, xi)
    np.testing.assert_allclose(end, advected_state(jittered_disk.barycenters(), dt, gas), atol=1e-10)
    middle = field.evaluate_physical(cells, jittered_disk.barycenters(), np.full(len(cells), 0.5))
    np.testing.assert_allclose(middle, advected_state(jittered_disk.barycenters(), 0.5 * dt, gas), atol=1e-10)


def test_uniform_source_grows_density_linearly(small_disk, gas):
    q = primitive_to_conserved(np.array([1.0, 0.0, 0.0, 1.0]), gas)
    s = np.array([0.5, 0.0, 0.0, 0.0])
    averages = np.tile(q, (small_disk.n_cells, 1))
    recon = WenoReconstructor(small_disk, 1).reconstruct(small_disk, averages)
    dt = 0.02
    geometry = slab_geometry(small_disk, np.zeros_like(small_disk.vertices), dt)
    tensors = precompute_reference_tensors(spacetime_basis(1))
    field, s_hat = solve_predictor(recon, geometry, gas, source=lambda x, t: np.tile(s, (len(x), 1)),
                                   tensors=tensors)
    cells = np.arange(small_disk.n_cells)
    end = field.end_state(cells, np.full((len(cells), 2), 0.25))
    np.testing.assert_allclose(end, np.broadcast_to(q + dt * s, end.shape), atol=1e-12)
    integral = field.volume_source_integral(s_hat, tensors)
    np.testing.assert_allclose(integral, dt * small_disk.areas()[:, None] * s, rtol=1e-12, atol=1e-15)


def test_slab_geometry_interpolates_vertex_paths(small_disk):
    V = swirl(small_disk.vertices)
    geometry = slab_geometry(small_disk, V, 0.1)
    np.testing.assert_allclose(geometry.vertices(1.0), (small_disk.vertices + 0.1 * V)[small_disk.triangles])
    np.testing.assert_allclose(geometry.areas(0.0), small_disk.areas())


def test_tangling_slab_raises(small_disk):
    V = np.zeros_like(small_disk.vertices)
    V[0] = [50.0, 0.0]
    assert slab_min_areas(small_disk, V, 1.0).min() < 0.0
    with pytest.raises(TangledMeshError) as info:
        slab_geometry(small_disk, V, 1.0)
    assert info.value.cell is not None


def test_non_positive_timestep_rejected(small_disk):
    with pytest.raises(ValueError):
        slab_geometry(small_disk, np.zeros_like(small_disk.vertices), 0.0)
