from math import factorial

import numpy as np
import pytest

from app.errors import MeshError, MeshParseError, TangledMeshError
from app.mesh.generators import generate_annulus, generate_cylinder_box, generate_disk
from app.mesh.io import read_mesh, write_mesh
from app.mesh.quadrature import gauss_legendre, triangle_rule
from app.mesh.trimesh import build_connectivity, cell_averages, move_vertices, require_tags


@pytest.mark.parametrize("degree", range(0, 9))
def test_triangle_rule_integrates_monomials_exactly(degree):
    rule = triangle_rule(degree)
    for a in range(degree + 1):
        b = degree - a
        exact = factorial(a) * factorial(b) / factorial(a + b + 2)
        approx = np.sum(rule.weights * rule.points[:, 0] ** a * rule.points[:, 1] ** b)
        assert approx == pytest.approx(exact, rel=1e-13, abs=1e-15)
    assert np.all(rule.weights > 0)


def test_gauss_legendre_on_unit_interval():
    x, w = gauss_legendre(3)
    assert w.sum() == pytest.approx(1.0)
    assert np.sum(w * x ** 5) == pytest.approx(1.0 / 6.0)
    with pytest.raises(ValueError):
        gauss_legendre(0)


def test_sample_mesh_reads(sample_mesh_path):
    mesh = read_mesh(sample_mesh_path)
    assert (mesh.n_vertices, mesh.n_cells, mesh.n_edges) == (4, 2, 5)
    assert mesh.tags == ["bottom", "left", "right", "top"]
    assert len(mesh.interior_edges) == 1
    assert mesh.total_area() == pytest.approx(1.0)


def test_mesh_file_round_trip_is_bit_exact(tmp_path, jittered_disk):
    path = write_mesh(jittered_disk, tmp_path / "disk.mesh")
    back = read_mesh(path)
    assert np.array_equal(back.vertices, jittered_disk.vertices)
    assert np.array_equal(back.triangles, jittered_disk.triangles)
    assert back.tags == jittered_disk.tags


@pytest.mark.parametrize("text, line", [
    ("", 1),
    ("3 1\n", 1),
    ("3 1 0\n0 0\n1 0\n", 4),
    ("3 1 0\n0 0\n1 0\n0 1\n1 2 x\n", 5),
    ("3 1 0\n0 0\n1 0\n0 1\n1 2 4\n", 5),
    ("3 1 0\n0 0\n1 0\n0 1\n1 2 3\n9 9\n", 6),
])
def test_parse_errors_name_the_line(tmp_path, text, line):
    path = tmp_path / "bad.mesh"
    path.write_text(text)
    with pytest.raises(MeshParseError) as info:
        read_mesh(path)
    assert info.value.line == line


def test_clockwise_triangle_rejected():
    with pytest.raises(MeshError):
        build_connectivity([[0, 0], [1, 0], [0, 1]], [[0, 2, 1]])


def test_non_conforming_edge_rejected():
    verts = [[0, 0], [1, 0], [0, 1], [1, 1], [0, -1]]
    # three triangles on edge (0, 1)
    with pytest.raises(MeshError):
        build_connectivity(verts, [[0, 1, 2], [0, 1, 3], [1, 0, 4]])


def test_disk_generator():
    mesh = generate_disk(1.0, 4)
    assert mesh.n_cells == 6 * 4 ** 2
    assert mesh.tags == ["outer"]
    ring = mesh.vertices[mesh.boundary_vertices("outer")]
    np.testing.assert_allclose(np.hypot(ring[:, 0], ring[:, 1]), 1.0, rtol=0, atol=1e-15)
    assert mesh.boundary_polygon_area() == pytest.approx(mesh.total_area(), rel=1e-13)
    assert np.all(mesh.areas() > 0)


def test_annulus_generator():
    mesh = generate_annulus(0.9, 1.0, 3, 32)
    assert mesh.n_cells == 2 * 2 * 32
    assert mesh.tags == ["inner", "outer"]
    assert len(mesh.edges_with_tag("inner")) == 32
    inner = mesh.vertices[mesh.boundary_vertices("inner")]
    np.testing.assert_allclose(np.hypot(inner[:, 0], inner[:, 1]), 0.9, atol=1e-15)
    with pytest.raises(MeshError):
        generate_annulus(1.0, 0.9, 3, 32)


def test_cylinder_box_generator():
    mesh = generate_cylinder_box(1.0, 5.0, 6, 16, 1.2)
    assert mesh.tags == ["farfield", "wall"]
    far = mesh.vertices[mesh.boundary_vertices("farfield")]
    assert np.all(np.isclose(np.max(np.abs(far), axis=1), 5.0, rtol=0, atol=1e-12))
    corners = {(5.0, 5.0), (-5.0, 5.0), (-5.0, -5.0), (5.0, -5.0)}
    assert corners <= {tuple(np.round(p, 12)) for p in far}
    with pytest.raises(MeshError):
        generate_cylinder_box(1.0, 5.0, 6, 20)


def test_moving_vertices_keeps_topology(small_disk):
    checksum = small_disk.connectivity_checksum()
    moved = move_vertices(small_disk, 0.01 * small_disk.vertices)
    assert moved.connectivity_checksum() == checksum
    assert moved.total_area() == pytest.approx(1.01 ** 2 * small_disk.total_area())


def test_tangling_motion_names_the_cell(small_disk):
    shift = np.zeros_like(small_disk.vertices)
    shift[0] = [5.0, 0.0]
    with pytest.raises(TangledMeshError) as info:
        move_vertices(small_disk, shift)
    assert info.value.cell is not None


def test_characteristic_size_is_largest_circumdiameter():
    mesh = build_connectivity([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]])
    assert mesh.characteristic_size() == pytest.approx(np.sqrt(2.0))


def test_cell_averages_of_linear_field_are_barycenter_values(jittered_disk):
    avg = cell_averages(jittered_disk, lambda x: np.column_stack([1 + 2 * x[:, 0] - x[:, 1]]), 1)
    b = jittered_disk.barycenters()
    np.testing.assert_allclose(avg[:, 0], 1 + 2 * b[:, 0] - b[:, 1], rtol=1e-13, atol=1e-14)


def test_require_tags(small_disk):
    require_tags(small_disk, ["outer"])
    with pytest.raises(MeshError):
        require_tags(small_disk, ["wall"])


def test_cylinder_box_wall_ring_follows_the_center():
    mesh = generate_cylinder_box(1.0, 5.0, 6, 16, 1.2, center=(0.0, 0.3))
    wall = mesh.vertices[mesh.boundary_vertices("wall")]
    np.testing.assert_allclose(np.hypot(wall[:, 0], wall[:, 1] - 0.3), 1.0, rtol=0, atol=1e-14)
    far = mesh.vertices[mesh.boundary_vertices("farfield")]
    assert np.all(np.isclose(np.max(np.abs(far), axis=1), 5.0, rtol=0, atol=1e-12))
    assert np.all(mesh.areas() > 0.0)
    with pytest.raises(MeshError):
        generate_cylinder_box(1.0, 5.0, 6, 16, center=(4.2, 0.0))
