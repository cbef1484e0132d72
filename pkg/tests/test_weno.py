import numpy as np
import pytest

from app.errors import StencilError
from app.mesh.io import read_mesh
from app.mesh.quadrature import triangle_rule
from app.mesh.trimesh import cell_averages
from app.scheme.basis import monomial_basis, n_coefficients, spacetime_basis
from app.scheme.weno import (
    CENTRAL,
    _pivoted_pinv,
    build_stencils,
    oscillation_indicator,
    reconstruct_stencil,
    stencil_size,
    weno_combine,
    WenoReconstructor,
)
from tests.helpers import perturbed_disk


def random_polynomial(rng, M):
    """p(x, y) = sum c_ab x^a y^b with a + b <= M and O(1) coefficients."""
    exps = [(a, p - a) for p in range(M + 1) for a in range(p + 1)]
    coef = rng.uniform(-1.0, 1.0, len(exps))
    coef[0] += 3.0

    def p(x):
        return sum(c * x[..., 0] ** a * x[..., 1] ** b for c, (a, b) in zip(coef, exps))

    return p


@pytest.fixture(scope="module")
def mesh200():
    # 6 * 6^2 = 216 cells
    return perturbed_disk(6, 0.25, seed=3)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_basis_has_zero_mean_beyond_constant(M):
    basis = monomial_basis(M)
    assert basis.size == n_coefficients(M)
    assert basis.averages[0] == pytest.approx(1.0)
    assert basis.averages[1] == pytest.approx(0.0, abs=1e-15)
    assert basis.averages[2] == pytest.approx(0.0, abs=1e-15)
    sigma = basis.smoothness_matrix
    np.testing.assert_allclose(sigma, sigma.T)
    assert np.all(sigma[0] == 0.0)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_spacetime_basis_is_nodal(M):
    basis = spacetime_basis(M)
    nodes = basis.nodes
    values = basis.evaluate(nodes[:, :2], nodes[:, 2])
    np.testing.assert_allclose(values, np.eye(basis.size), atol=1e-11)
    assert basis.size == n_coefficients(M) * (M + 1)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_stencils_have_fixed_size_and_owner_first(mesh200, M):
    stencils = build_stencils(mesh200, M)
    n_s = stencil_size(M)
    assert stencils.members.shape == (4, mesh200.n_cells, n_s)
    assert stencils.valid[CENTRAL].all()
    for cell in (0, 50, mesh200.n_cells - 1):
        st = stencils.stencil(cell)
        assert st.members[0] == cell
        assert len(set(st.members.tolist())) == n_s


def test_unavailable_sector_raises(mesh200):
    stencils = build_stencils(mesh200, 3)
    cell, sector = np.argwhere(~stencils.valid[1:].T)[0]
    with pytest.raises(StencilError):
        stencils.stencil(int(cell), int(sector) + 1)


@pytest.mark.parametrize("M", [1, 2, 3])
def test_reconstruction_reproduces_polynomials(mesh200, rng, M):
    recon = WenoReconstructor(mesh200, M)
    rule = triangle_rule(M + 1)
    X1, J, _, _ = mesh200.affine_maps()
    cells = np.repeat(np.arange(mesh200.n_cells), rule.size)
    on_cell = (X1[:, None, :] + np.einsum("cij,qj->cqi", J, rule.points)).reshape(-1, 2)
    diam = mesh200.edge_lengths_per_cell().max(axis=1)
    off_cell = mesh200.barycenters() + diam[:, None] * np.array([1.0, 0.0])
    for _ in range(20):
        p = random_polynomial(rng, M)
        averages = cell_averages(mesh200, lambda x: p(x)[:, None], M + 2)
        field = recon.reconstruct(mesh200, averages)
        np.testing.assert_allclose(field.evaluate(cells, on_cell)[:, 0], p(on_cell), rtol=0, atol=1e-9)
        off = field.evaluate(np.arange(mesh200.n_cells), off_cell)[:, 0]
        np.testing.assert_allclose(off, p(off_cell), rtol=0, atol=1e-8)


def test_reconstruction_preserves_cell_averages(mesh200, rng):
    recon = WenoReconstructor(mesh200, 2)
    averages = rng.uniform(1.0, 2.0, (mesh200.n_cells, 4))
    field = recon.reconstruct(mesh200, averages)
    rule = triangle_rule(2)
    values = field.evaluate_reference(np.repeat(np.arange(mesh200.n_cells)[:, None], rule.size, axis=1),
                                      np.broadcast_to(rule.points, (mesh200.n_cells, rule.size, 2)))
    np.testing.assert_allclose(np.einsum("q,cqv->cv", rule.unit_weights, values), averages, atol=1e-12)


def test_single_stencil_matches_owner_average(mesh200):
    basis = monomial_basis(2)
    stencils = build_stencils(mesh200, 2)
    averages = np.arange(mesh200.n_cells, dtype=float)
    coef = reconstruct_stencil(mesh200, stencils.stencil(10), averages, basis)
    assert coef.shape == (basis.size,)
    assert basis.averages @ coef == pytest.approx(averages[10])


def test_oscillatory_candidates_lose_weight():
    D, nv = 3, 1
    coef = np.zeros((4, D, nv))
    coef[0, 1] = 5.0      # steep central candidate
    sigma = oscillation_indicator(coef, monomial_basis(1).smoothness_matrix)
    combined, weights = weno_combine(coef, sigma)
    assert weights[0, 0] < 1e-6
    np.testing.assert_allclose(weights.sum(axis=0), 1.0)
    assert abs(combined[1, 0]) < 1e-5


def test_invalid_candidates_get_zero_weight():
    coef = np.ones((4, 3, 2))
    sigma = np.zeros((4, 2))
    valid = np.array([True, False, True, False])
    _, weights = weno_combine(coef, sigma, valid=valid)
    assert np.all(weights[[1, 3]] == 0.0)
    np.testing.assert_allclose(weights.sum(axis=0), 1.0)


def test_too_small_mesh_has_no_central_stencil(sample_mesh_path):
    with pytest.raises(StencilError):
        build_stencils(read_mesh(sample_mesh_path), 1)


def test_pivoted_least_squares_matches_lstsq(rng):
    B = rng.normal(size=(5, 11, 5))
    P, ok = _pivoted_pinv(B)
    assert ok.all()
    b = rng.normal(size=11)
    for i in range(5):
        np.testing.assert_allclose(P[i] @ b, np.linalg.lstsq(B[i], b, rcond=None)[0], rtol=1e-10, atol=1e-12)


def test_pivoted_least_squares_flags_rank_deficiency(rng):
    B = rng.normal(size=(3, 9, 4))
    B[1, :, 3] = 2.0 * B[1, :, 0]
    B[2] = 0.0
    P, ok = _pivoted_pinv(B)
    assert ok.tolist() == [True, False, False]
    assert np.all(P[1:] == 0.0)
