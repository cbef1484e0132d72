"""
ASCII mesh files.

Format (whitespace separated, '#' starts a comment):
    NV NT NB
    x y                 (NV lines)
    v1 v2 v3            (NT lines, 1-based, counterclockwise)
    v1 v2 tag           (NB lines, tagged boundary edges)
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from app.errors import MeshError, MeshParseError
from app.mesh.trimesh import TriMesh, build_connectivity


def _records(path: Path):
    """Yield (line number, tokens) for non-empty lines with comments stripped."""
    with open(path, "r", encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                yield number, text.split()


def _ints(tokens, count, line, path):
    if len(tokens) < count:
        raise MeshParseError(f"expected {count} integers, got {len(tokens)}", line, path)
    try:
        return [int(t) for t in tokens[:count]]
    except ValueError:
        raise MeshParseError(f"expected integers, got {' '.join(tokens)!r}", line, path) from None


def read_mesh(path: str | Path) -> TriMesh:
    path = Path(path)
    records = _records(path)
    try:
        line, tokens = next(records)
    except StopIteration:
        raise MeshParseError("empty mesh file: missing 'NV NT NB' header", 1, str(path)) from None
    if len(tokens) != 3:
        raise MeshParseError("header must be 'NV NT NB'", line, str(path))
    nv, nt, nb = _ints(tokens, 3, line, str(path))
    if nv < 3 or nt < 1 or nb < 0:
        raise MeshParseError(f"invalid counts NV={nv} NT={nt} NB={nb}", line, str(path))

    vertices = np.empty((nv, 2))
    triangles = np.empty((nt, 3), dtype=int)
    boundary: list[tuple[int, int, str]] = []
    last_line = line
    try:
        for i in range(nv):
            line, tokens = next(records)
            if len(tokens) < 2:
                raise MeshParseError("vertex line needs 'x y'", line, str(path))
            try:
                vertices[i] = float(tokens[0]), float(tokens[1])
            except ValueError:
                raise MeshParseError(f"bad coordinates {' '.join(tokens)!r}", line, str(path)) from None
            last_line = line
        for i in range(nt):
            line, tokens = next(records)
            ids = _ints(tokens, 3, line, str(path))
            if min(ids) < 1 or max(ids) > nv:
                raise MeshParseError(f"vertex id out of range 1..{nv}", line, str(path))
            triangles[i] = [v - 1 for v in ids]
            last_line = line
        for _ in range(nb):
            line, tokens = next(records)
            if len(tokens) < 3:
                raise MeshParseError("boundary line needs 'v1 v2 tag'", line, str(path))
            v1, v2 = _ints(tokens, 2, line, str(path))
            if min(v1, v2) < 1 or max(v1, v2) > nv:
                raise MeshParseError(f"vertex id out of range 1..{nv}", line, str(path))
            boundary.append((v1 - 1, v2 - 1, tokens[2]))
            last_line = line
    except StopIteration:
        raise MeshParseError("unexpected end of file", last_line + 1, str(path)) from None

    extra = next(records, None)
    if extra is not None:
        raise MeshParseError("trailing data after the declared records", extra[0], str(path))
    try:
        return build_connectivity(vertices, triangles, boundary)
    except MeshError as exc:
        raise MeshParseError(exc.message, None, str(path)) from exc


def write_mesh(mesh: TriMesh, path: str | Path) -> Path:
    """Write `mesh` so that read_mesh reproduces coordinates bit-exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    bnd = mesh.boundary_edges
    lines = [f"{mesh.n_vertices} {mesh.n_cells} {len(bnd)}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [f"{a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles.tolist()]
    lines += [f"{mesh.edges[e, 0] + 1} {mesh.edges[e, 1] + 1} {mesh.edge_tags[e]}" for e in bnd]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
