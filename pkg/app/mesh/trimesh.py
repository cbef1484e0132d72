"""
Conforming triangle mesh with time-dependent vertex positions.

Connectivity (triangles, edges, edge-to-cell adjacency, boundary tags) is built
once and never modified; motion only replaces the vertex position array.
Edges are oriented counterclockwise with respect to their left cell, so the
spatial normal (dy, -dx) of an edge points out of the left cell.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from app.errors import MeshError, TangledMeshError
from app.mesh.quadrature import REFERENCE_VERTICES, triangle_rule

logger = logging.getLogger(__name__)

DEFAULT_BOUNDARY_TAG = "boundary"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def signed_areas(positions: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = positions[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


@dataclass(frozen=True)
class ReferenceMap:
    """Affine map x = X1 + (X2 - X1) xi + (X3 - X1) eta of one cell."""

    cell: int
    vertices: np.ndarray  # (3, 2)

    @property
    def jacobian(self) -> np.ndarray:
        X = self.vertices
        return np.column_stack([X[1] - X[0], X[2] - X[0]])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.jacobian))

    def inverse_jacobian(self) -> np.ndarray:
        det = self.det
        if not det > 0.0:
            raise MeshError(f"degenerate reference map (det={det!r})", cell=self.cell)
        J = self.jacobian
        return np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]]) / det


def reference_to_physical(ref: ReferenceMap, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return ref.vertices[0] + xi @ ref.jacobian.T


def physical_to_reference(ref: ReferenceMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (x - ref.vertices[0]) @ ref.inverse_jacobian().T


def cell_average(ref: ReferenceMap, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], degree: int):
    """Average of fn(x, y) over the cell, exact for polynomials up to `degree`.

    fn may return scalars per point or arrays of shape (nq, k).
    """
    rule = triangle_rule(degree)
    x = reference_to_physical(ref, rule.points)
    values = np.asarray(fn(x[:, 0], x[:, 1]), dtype=float)
    return np.tensordot(rule.unit_weights, values, axes=(0, 0))


def cell_averages(mesh: "TriMesh", fn: Callable[[np.ndarray], np.ndarray], degree: int) -> np.ndarray:
    """(nt, k) averages of fn(points (N, 2)) -> (N, k) on every cell of the mesh."""
    rule = triangle_rule(degree)
    X1, J, _, _ = mesh.affine_maps()
    x = X1[:, None, :] + np.einsum("cij,qj->cqi", J, rule.points)
    values = np.asarray(fn(x.reshape(-1, 2)), dtype=float).reshape(mesh.n_cells, rule.size, -1)
    return np.einsum("q,cqk->ck", rule.unit_weights, values)


@dataclass(frozen=True)
class TriMesh:
    vertices: np.ndarray          # (nv, 2) positions at the current time level
    triangles: np.ndarray         # (nt, 3) counterclockwise vertex ids
    edges: np.ndarray             # (ne, 2) vertex ids, oriented CCW for the left cell
    edge_cells: np.ndarray        # (ne, 2) left, right cell ids; right = -1 on the boundary
    edge_local: np.ndarray        # (ne, 2) local edge index in left / right cell
    edge_tags: tuple[str, ...]    # per edge, "" for interior edges
    cell_edges: np.ndarray        # (nt, 3) edge id of local edge k = (v_k, v_{k+1})
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    # ------------------------------------------------------------------
    # Sizes and lookups
    # ------------------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_cells(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def boundary_edges(self) -> np.ndarray:
        if "boundary_edges" not in self._cache:
            self._cache["boundary_edges"] = _readonly(np.flatnonzero(self.edge_cells[:, 1] < 0))
        return self._cache["boundary_edges"]

    @property
    def interior_edges(self) -> np.ndarray:
        if "interior_edges" not in self._cache:
            self._cache["interior_edges"] = _readonly(np.flatnonzero(self.edge_cells[:, 1] >= 0))
        return self._cache["interior_edges"]

    @property
    def tags(self) -> list[str]:
        return sorted({self.edge_tags[e] for e in self.boundary_edges})

    def edges_with_tag(self, tag: str) -> np.ndarray:
        key = ("tag_edges", tag)
        if key not in self._cache:
            ids = [e for e in self.boundary_edges if self.edge_tags[e] == tag]
            self._cache[key] = _readonly(np.array(ids, dtype=int))
        return self._cache[key]

    def boundary_vertices(self, tag: str | None = None) -> np.ndarray:
        """Sorted vertex ids on boundary edges (optionally of one tag)."""
        edges = self.boundary_edges if tag is None else self.edges_with_tag(tag)
        return np.unique(self.edges[edges].ravel())

    def vertex_neighbors(self) -> list[np.ndarray]:
        """Cells sharing at least one vertex with each cell."""
        if "vertex_neighbors" not in self._cache:
            vertex_cells: list[list[int]] = [[] for _ in range(self.n_vertices)]
            for c, tri in enumerate(self.triangles):
                for v in tri:
                    vertex_cells[v].append(c)
            nbrs = []
            for c, tri in enumerate(self.triangles):
                s = set(vertex_cells[tri[0]]) | set(vertex_cells[tri[1]]) | set(vertex_cells[tri[2]])
                s.discard(c)
                nbrs.append(np.array(sorted(s), dtype=int))
            self._cache["vertex_neighbors"] = nbrs
        return self._cache["vertex_neighbors"]

    def face_neighbors(self) -> np.ndarray:
        """(nt, 3) neighbour across local edge k, -1 on the boundary."""
        if "face_neighbors" not in self._cache:
            out = np.full((self.n_cells, 3), -1, dtype=int)
            for side in (0, 1):
                other = 1 - side
                cells = self.edge_cells[:, side]
                ok = cells >= 0
                out[cells[ok], self.edge_local[ok, side]] = self.edge_cells[ok, other]
            self._cache["face_neighbors"] = _readonly(out)
        return self._cache["face_neighbors"]

    # ------------------------------------------------------------------
    # Geometry (always evaluated on the given or current positions)
    # ------------------------------------------------------------------

    def signed_areas(self, positions: np.ndarray | None = None) -> np.ndarray:
        return signed_areas(self.vertices if positions is None else positions, self.triangles)

    def areas(self) -> np.ndarray:
        return self.signed_areas()

    def total_area(self) -> float:
        return float(self.signed_areas().sum())

    def barycenters(self, positions: np.ndarray | None = None) -> np.ndarray:
        P = self.vertices if positions is None else positions
        return P[self.triangles].mean(axis=1)

    def edge_lengths_per_cell(self, positions: np.ndarray | None = None) -> np.ndarray:
        P = (self.vertices if positions is None else positions)[self.triangles]
        return np.linalg.norm(np.roll(P, -1, axis=1) - P, axis=2)

    def incircle_diameters(self) -> np.ndarray:
        perimeter = self.edge_lengths_per_cell().sum(axis=1)
        return 4.0 * self.areas() / perimeter

    def circumdiameters(self) -> np.ndarray:
        L = self.edge_lengths_per_cell()
        return L.prod(axis=1) / (2.0 * self.areas())

    def characteristic_size(self) -> float:
        """Grid size h: the largest circumscribed-circle diameter."""
        return float(self.circumdiameters().max())

    def boundary_polygon_area(self) -> float:
        """Shoelace sum over boundary edges (all boundary loops, holes subtract)."""
        P = self.vertices[self.edges[self.boundary_edges]]
        a, b = P[:, 0], P[:, 1]
        return float(0.5 * np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))

    def reference_map(self, cell: int) -> ReferenceMap:
        return ReferenceMap(cell=int(cell), vertices=self.vertices[self.triangles[cell]].copy())

    def affine_maps(self, positions: np.ndarray | None = None):
        """Batched reference maps: X1 (nt, 2), J (nt, 2, 2), Jinv (nt, 2, 2), det (nt,)."""
        P = (self.vertices if positions is None else positions)[self.triangles]
        J = np.stack([P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]], axis=2)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        bad = np.flatnonzero(~(det > 0.0))
        if bad.size:
            raise MeshError(f"degenerate reference map (det={det[bad[0]]!r})", cell=int(bad[0]))
        Jinv = np.empty_like(J)
        Jinv[:, 0, 0] = J[:, 1, 1] / det
        Jinv[:, 0, 1] = -J[:, 0, 1] / det
        Jinv[:, 1, 0] = -J[:, 1, 0] / det
        Jinv[:, 1, 1] = J[:, 0, 0] / det
        return P[:, 0].copy(), J, Jinv, det

    # ------------------------------------------------------------------
    # Motion
    # ------------------------------------------------------------------

    def with_positions(self, positions: np.ndarray) -> "TriMesh":
        """Same connectivity, new vertex positions (validated)."""
        positions = np.asarray(positions, dtype=float)
        if positions.shape != self.vertices.shape:
            raise MeshError(f"position array shape {positions.shape} != {self.vertices.shape}")
        area = signed_areas(positions, self.triangles)
        bad = np.flatnonzero(~(area > 0.0))
        if bad.size:
            raise TangledMeshError(f"triangle area {area[bad[0]]!r} after motion", cell=int(bad[0]))
        cache = {k: v for k, v in self._cache.items() if k in _TOPOLOGY_KEYS or isinstance(k, tuple)}
        return replace(self, vertices=_readonly(positions.copy()), _cache=cache)

    def connectivity_checksum(self) -> str:
        h = hashlib.sha256()
        for a in (self.triangles, self.edges, self.edge_cells, self.edge_local):
            h.update(np.ascontiguousarray(a, dtype=np.int64).tobytes())
        h.update("|".join(self.edge_tags).encode())
        return h.hexdigest()


_TOPOLOGY_KEYS = {"boundary_edges", "interior_edges", "vertex_neighbors", "face_neighbors"}


def move_vertices(mesh: TriMesh, displacement) -> TriMesh:
    """X^{n+1} = X^n + displacement; raises TangledMeshError naming the first inverted cell."""
    displacement = np.asarray(displacement, dtype=float)
    if not np.all(np.isfinite(displacement)):
        raise MeshError("non-finite vertex displacement")
    return mesh.with_positions(mesh.vertices + displacement)


def build_connectivity(
    vertices,
    triangles,
    boundary: Iterable[tuple[int, int, str]] | None = None,
    default_tag: str = DEFAULT_BOUNDARY_TAG,
) -> TriMesh:
    """Build edges, adjacency and boundary tags from raw arrays.

    Parameters
    ----------
    vertices : (nv, 2) coordinates
    triangles : (nt, 3) 0-based vertex ids, counterclockwise
    boundary : optional (v1, v2, tag) triples tagging boundary edges; untagged
        boundary edges get `default_tag`
    """
    V = np.asarray(vertices, dtype=float)
    T = np.asarray(triangles, dtype=int)
    if V.ndim != 2 or V.shape[1] != 2:
        raise MeshError(f"vertices must be (nv, 2), got {V.shape}")
    if T.ndim != 2 or T.shape[1] != 3 or len(T) == 0:
        raise MeshError(f"triangles must be (nt, 3) and non-empty, got {T.shape}")
    if T.min() < 0 or T.max() >= len(V):
        raise MeshError("triangle vertex id out of range")
    if np.any((T[:, 0] == T[:, 1]) | (T[:, 1] == T[:, 2]) | (T[:, 0] == T[:, 2])):
        raise MeshError("triangle with repeated vertex")
    area = signed_areas(V, T)
    bad = np.flatnonzero(~(area > 0.0))
    if bad.size:
        raise MeshError(f"triangle is not counterclockwise or is degenerate (area={area[bad[0]]!r})",
                        cell=int(bad[0]))

    nt = len(T)
    half = np.stack([T, np.roll(T, -1, axis=1)], axis=2).reshape(-1, 2)   # (3nt, 2) oriented
    keys = np.sort(half, axis=1)
    uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if counts.max() > 2:
        e = int(np.flatnonzero(counts > 2)[0])
        raise MeshError(f"non-conforming mesh: edge {tuple(uniq[e])} shared by {counts[e]} triangles")

    ne = len(uniq)
    edges = np.empty((ne, 2), dtype=int)
    edge_cells = np.full((ne, 2), -1, dtype=int)
    edge_local = np.full((ne, 2), -1, dtype=int)
    order = np.argsort(inverse, kind="stable")
    seen = np.zeros(ne, dtype=bool)
    for h in order:
        e = inverse[h]
        cell, local = divmod(int(h), 3)
        if not seen[e]:
            seen[e] = True
            edges[e] = half[h]
            edge_cells[e, 0] = cell
            edge_local[e, 0] = local
        else:
            if half[h, 0] != edges[e, 1] or half[h, 1] != edges[e, 0]:
                raise MeshError("inconsistent triangle orientation across an edge", cell=cell)
            edge_cells[e, 1] = cell
            edge_local[e, 1] = local
    cell_edges = inverse.reshape(nt, 3)

    tag_lookup: dict[tuple[int, int], str] = {}
    for v1, v2, tag in boundary or ():
        tag_lookup[(min(int(v1), int(v2)), max(int(v1), int(v2)))] = str(tag)
    tags = []
    for e in range(ne):
        if edge_cells[e, 1] >= 0:
            tags.append("")
        else:
            tags.append(tag_lookup.get((int(uniq[e, 0]), int(uniq[e, 1])), default_tag))
    unknown = set(tag_lookup) - {tuple(int(x) for x in uniq[e]) for e in range(ne) if edge_cells[e, 1] < 0}
    if unknown:
        raise MeshError(f"tagged boundary edge is not on the mesh boundary: {sorted(unknown)[0]}")

    mesh = TriMesh(
        vertices=_readonly(V.copy()),
        triangles=_readonly(T.copy()),
        edges=_readonly(edges),
        edge_cells=_readonly(edge_cells),
        edge_local=_readonly(edge_local),
        edge_tags=tuple(tags),
        cell_edges=_readonly(cell_edges),
    )
    logger.debug("mesh built: %d vertices, %d cells, %d edges (%d boundary)",
                 mesh.n_vertices, mesh.n_cells, mesh.n_edges, len(mesh.boundary_edges))
    return mesh


def local_edge_reference(local: int, reverse: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Reference coordinates of the start and end of local edge k = (v_k, v_{k+1})."""
    a = REFERENCE_VERTICES[local]
    b = REFERENCE_VERTICES[(local + 1) % 3]
    return (b, a) if reverse else (a, b)


def require_tags(mesh: TriMesh, tags: Sequence[str]) -> None:
    """Raise MeshError if any of `tags` is not a boundary tag of the mesh."""
    missing = sorted(set(tags) - set(mesh.tags))
    if missing:
        raise MeshError(f"unknown boundary tag(s) {missing}; mesh has {mesh.tags}")
