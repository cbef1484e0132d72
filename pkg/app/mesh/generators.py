"""
Reproducible structured-unstructured meshes for the benchmark geometries.

All generators place boundary vertices exactly on the analytic curves and tag
their boundary edges ("inner"/"outer" for rings, "outer" for disks,
"wall"/"farfield" for the cylinder-in-box O-grid).
"""
from __future__ import annotations

import numpy as np

from app.errors import MeshError
from app.mesh.trimesh import TriMesh, build_connectivity, signed_areas


def _orient(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Flip clockwise triangles to counterclockwise."""
    triangles = np.asarray(triangles, dtype=int)
    flip = signed_areas(vertices, triangles) < 0.0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def _ring_boundary(ids: np.ndarray, tag: str) -> list[tuple[int, int, str]]:
    return [(int(ids[j]), int(ids[(j + 1) % len(ids)]), tag) for j in range(len(ids))]


def _structured_rings(points: np.ndarray, n_r: int, n_theta: int) -> np.ndarray:
    """Triangles of a periodic (n_r x n_theta) ring grid with alternating diagonals."""
    idx = np.arange(n_r * n_theta).reshape(n_r, n_theta)
    tris = []
    for i in range(n_r - 1):
        for j in range(n_theta):
            a, b = idx[i, j], idx[i, (j + 1) % n_theta]
            d, c = idx[i + 1, j], idx[i + 1, (j + 1) % n_theta]
            if (i + j) % 2 == 0:
                tris += [(a, d, c), (a, c, b)]
            else:
                tris += [(a, d, b), (d, c, b)]
    return _orient(points, np.array(tris))


def generate_annulus(r_i: float, r_e: float, n_r: int, n_theta: int) -> TriMesh:
    """Polar annulus with n_r vertex rings between r_i and r_e and n_theta vertices per ring."""
    if not (0.0 < r_i < r_e):
        raise MeshError(f"invalid annulus radii r_i={r_i}, r_e={r_e}")
    if n_r < 2 or n_theta < 3:
        raise MeshError(f"annulus needs n_r >= 2 and n_theta >= 3, got {n_r}, {n_theta}")
    radii = np.linspace(r_i, r_e, n_r)
    radii[0], radii[-1] = r_i, r_e
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    R, TH = np.meshgrid(radii, theta, indexing="ij")
    points = np.column_stack([(R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()])
    triangles = _structured_rings(points, n_r, n_theta)
    ids = np.arange(n_r * n_theta).reshape(n_r, n_theta)
    boundary = _ring_boundary(ids[0], "inner") + _ring_boundary(ids[-1], "outer")
    return build_connectivity(points, triangles, boundary)


def _stitch(a_ids, a_ang, b_ids, b_ang) -> list[tuple[int, int, int]]:
    """Triangulate the band between two closed rings sorted by angle."""
    m, n = len(a_ids), len(b_ids)
    a_ext = np.append(a_ang, a_ang[0] + 2.0 * np.pi)
    b_ext = np.append(b_ang, b_ang[0] + 2.0 * np.pi)
    i = j = 0
    tris = []
    while i < m or j < n:
        if j == n or (i < m and a_ext[i + 1] < b_ext[j + 1]):
            tris.append((a_ids[i % m], a_ids[(i + 1) % m], b_ids[j % n]))
            i += 1
        else:
            tris.append((a_ids[i % m], b_ids[(j + 1) % n], b_ids[j % n]))
            j += 1
    return tris


def generate_disk(r: float, n: int) -> TriMesh:
    """Disk of radius r built from n concentric rings with 6k vertices on ring k."""
    if not r > 0.0:
        raise MeshError(f"invalid disk radius {r}")
    if n < 2:
        raise MeshError(f"disk needs n >= 2 rings, got {n}")
    points = [np.zeros(2)]
    rings: list[tuple[np.ndarray, np.ndarray]] = []
    next_id = 1
    for k in range(1, n + 1):
        count = 6 * k
        ang = 2.0 * np.pi * np.arange(count) / count
        radius = r * k / n
        ring = np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])
        if k == n:
            ring *= r / np.linalg.norm(ring, axis=1, keepdims=True)
        points.extend(ring)
        rings.append((np.arange(next_id, next_id + count), ang))
        next_id += count
    points = np.array(points)
    tris = []
    first_ids, _ = rings[0]
    for j in range(6):
        tris.append((0, first_ids[j], first_ids[(j + 1) % 6]))
    for (a_ids, a_ang), (b_ids, b_ang) in zip(rings[:-1], rings[1:]):
        tris += _stitch(a_ids, a_ang, b_ids, b_ang)
    triangles = _orient(points, np.array(tris))
    boundary = _ring_boundary(rings[-1][0], "outer")
    return build_connectivity(points, triangles, boundary)


def generate_cylinder_box(
    radius: float = 1.0,
    half_width: float = 10.0,
    n_r: int = 38,
    n_theta: int = 96,
    grading: float = 1.08,
    center: tuple[float, float] = (0.0, 0.0),
) -> TriMesh:
    """O-grid between a circle about `center` (tag "wall") and the square [-L, L]^2 (tag "farfield").

    Radial spacing grows geometrically by `grading`; n_theta must be a multiple of 8
    so that the square corners are vertices.
    """
    center = np.asarray(center, dtype=float)
    if not (0.0 < radius and radius + np.max(np.abs(center)) < half_width):
        raise MeshError(f"invalid cylinder/box sizes radius={radius}, center={center.tolist()}, half_width={half_width}")
    if n_theta % 8 != 0 or n_r < 2:
        raise MeshError(f"cylinder box needs n_theta % 8 == 0 and n_r >= 2, got {n_theta}, {n_r}")
    if abs(grading - 1.0) < 1e-12:
        s = np.linspace(0.0, 1.0, n_r)
    else:
        s = (grading ** np.arange(n_r) - 1.0) / (grading ** (n_r - 1) - 1.0)
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    circle = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    box = half_width * circle / (radius * np.max(np.abs(circle / radius), axis=1, keepdims=True))
    # snap the square exactly onto its sides
    box = np.where(np.isclose(np.abs(box), half_width, rtol=0, atol=1e-12 * half_width),
                   np.sign(box) * half_width, box)
    points = ((1.0 - s)[:, None, None] * (center + circle)[None] + s[:, None, None] * box[None]).reshape(-1, 2)
    triangles = _structured_rings(points, n_r, n_theta)
    ids = np.arange(n_r * n_theta).reshape(n_r, n_theta)
    boundary = _ring_boundary(ids[0], "wall") + _ring_boundary(ids[-1], "farfield")
    return build_connectivity(points, triangles, boundary)
