"""
Legacy ASCII VTK writer for cell-centred snapshots.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from app.config import VTK_HEADER
from app.mesh.trimesh import TriMesh
from app.physics.euler import GasModel, conserved_to_primitive, entropy

VTK_TRIANGLE = 5


def _rows(values: np.ndarray) -> str:
    return "\n".join(" ".join(f"{v:.17g}" for v in row) for row in np.atleast_2d(values)) + "\n"


def write_vtk(mesh: TriMesh, averages: np.ndarray, gas: GasModel, path: str | Path,
              time: float | None = None) -> Path:
    """UNSTRUCTURED_GRID with cell scalars rho, u, v, p, S and the velocity vector."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    W = conserved_to_primitive(np.asarray(averages, dtype=float), gas)
    S = entropy(averages, gas)
    nv, nt = mesh.n_vertices, mesh.n_cells
    points = np.column_stack([mesh.vertices, np.zeros(nv)])
    cells = np.column_stack([np.full(nt, 3), mesh.triangles])
    velocity = np.column_stack([W[:, 1], W[:, 2], np.zeros(nt)])
    title = "ALE-SBM snapshot" if time is None else f"ALE-SBM snapshot t={time:.17g}"

    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{VTK_HEADER}\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {nv} double\n")
        fh.write(_rows(points))
        fh.write(f"CELLS {nt} {4 * nt}\n")
        fh.write("\n".join(" ".join(str(int(i)) for i in row) for row in cells) + "\n")
        fh.write(f"CELL_TYPES {nt}\n")
        fh.write("\n".join([str(VTK_TRIANGLE)] * nt) + "\n")
        fh.write(f"CELL_DATA {nt}\n")
        for name, values in (("rho", W[:, 0]), ("u", W[:, 1]), ("v", W[:, 2]), ("p", W[:, 3]), ("S", S)):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write(_rows(values[:, None]))
        fh.write("VECTORS velocity double\n")
        fh.write(_rows(velocity))
    return path


def snapshot_path(out_dir: Path, index: int) -> Path:
    return out_dir / f"snapshot_{index:04d}.vtk"
