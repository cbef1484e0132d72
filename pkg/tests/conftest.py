"""Shared fixtures: gas models, small meshes, random generators."""
from __future__ import annotations

import numpy as np
import pytest

from app.config import SAMPLE_MESH_DIR
from app.mesh.generators import generate_annulus, generate_disk
from app.mesh.trimesh import TriMesh
from app.physics.euler import GasModel
from tests.helpers import perturbed_disk


@pytest.fixture
def gas() -> GasModel:
    return GasModel(1.4)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def small_disk() -> TriMesh:
    return generate_disk(1.0, 3)


@pytest.fixture
def jittered_disk() -> TriMesh:
    return perturbed_disk()


@pytest.fixture
def ring16() -> TriMesh:
    """Annulus whose outer boundary is a 16-edge polygon inscribed in the unit circle."""
    return generate_annulus(0.5, 1.0, 3, 16)


@pytest.fixture
def sample_mesh_path():
    return SAMPLE_MESH_DIR / "unit_square.mesh"
