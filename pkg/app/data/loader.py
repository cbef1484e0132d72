"""
Run configuration files and mesh recipes.

Config files are flat ``key = value`` lines grouped in ``[run]``, ``[mesh]``,
``[corrections]``, ``[sweep]`` and ``[case]`` sections. Mesh recipes are short
generator calls: ``disk(n=6)``, ``annulus(n_r=3, n_theta=64)``,
``cylinder_box(n_r=20, n_theta=48)``, ``file(path=meshes/shell.mesh)``.
"""
from __future__ import annotations

import ast
import configparser
import re
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.cases.base import CaseDefinition
from app.cases.cylinder import wall_center
from app.cases.registry import case_names, get_case
from app.errors import ConfigError, MeshError
from app.data.schemas import MeshKind, MeshRecipe, RunConfig
from app.geometry.boundary import CircleBoundary
from app.mesh.generators import generate_annulus, generate_cylinder_box, generate_disk
from app.mesh.io import read_mesh
from app.mesh.trimesh import TriMesh

SECTIONS = ("run", "mesh", "corrections", "sweep", "case")
_RECIPE_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")
_TRUE = {"on", "true", "yes", "1"}
_FALSE = {"off", "false", "no", "0"}


# ---------------------------------------------------------------------------
# Values and recipes
# ---------------------------------------------------------------------------

def parse_value(text: str) -> Any:
    """Python literal if it parses, otherwise the stripped string."""
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_toggle(text: str) -> bool:
    key = text.strip().lower()
    if key in _TRUE:
        return True
    if key in _FALSE:
        return False
    raise ConfigError(f"expected on/off, got {text!r}")


def parse_recipe(text: str) -> MeshRecipe:
    m = _RECIPE_RE.match(text)
    if not m:
        raise ConfigError(f"malformed mesh recipe {text!r}")
    name, args = m.group(1), m.group(2)
    try:
        kind = MeshKind(name)
    except ValueError:
        raise ConfigError(f"unknown mesh kind {name!r}; expected one of {[k.value for k in MeshKind]}") from None
    params: dict[str, Any] = {}
    for part in filter(None, (p.strip() for p in (args or "").split(","))):
        if "=" not in part:
            raise ConfigError(f"mesh recipe argument {part!r} must be key=value")
        key, value = part.split("=", 1)
        params[key.strip()] = parse_value(value)
    return MeshRecipe(kind=kind, params=params)


def parse_recipe_list(text: str) -> list[MeshRecipe]:
    return [parse_recipe(p) for p in text.split(";") if p.strip()]


def build_mesh(recipe: MeshRecipe, case: CaseDefinition | None = None) -> TriMesh:
    p = dict(recipe.params)
    try:
        if recipe.kind is MeshKind.DEFAULT:
            if case is None:
                raise ConfigError("default mesh recipe needs a case")
            return case.mesh_factory()
        if recipe.kind is MeshKind.DISK:
            return generate_disk(float(p.pop("r", 1.0)), int(p.pop("n")), **p)
        if recipe.kind is MeshKind.ANNULUS:
            return generate_annulus(float(p.pop("r_i", 0.9)), float(p.pop("r_e", 1.0)),
                                    int(p.pop("n_r")), int(p.pop("n_theta")), **p)
        if recipe.kind is MeshKind.CYLINDER_BOX:
            wall = case.descriptors.get("wall") if case is not None else None
            if isinstance(wall, CircleBoundary) and "center" not in p:
                p["center"] = wall_center(wall)
            return generate_cylinder_box(**p)
        return read_mesh(Path(str(p["path"])))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad arguments for mesh recipe {recipe.label()}: {exc}") from exc


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

def read_config(path: str | Path) -> configparser.ConfigParser:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";;"))
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    unknown = sorted(set(parser.sections()) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"{path}: unknown section(s) {unknown}; expected {list(SECTIONS)}")
    return parser


def load_config(path: str | Path) -> RunConfig:
    parser = read_config(path)
    run = dict(parser["run"]) if parser.has_section("run") else {}
    fields: dict[str, Any] = {k: parse_value(v) for k, v in run.items()}
    if "case" in fields:
        fields["case"] = str(fields["case"])
    if "output_dir" in fields:
        fields["output_dir"] = Path(run["output_dir"].strip())
    if "write_vtk" in fields:
        fields["write_vtk"] = parse_toggle(run["write_vtk"])
    if parser.has_section("mesh") and "recipe" in parser["mesh"]:
        fields["mesh"] = parse_recipe(parser["mesh"]["recipe"])
    if parser.has_section("corrections"):
        fields["corrections"] = {tag: parse_toggle(v) for tag, v in parser["corrections"].items()}
    if parser.has_section("sweep") and "meshes" in parser["sweep"]:
        fields["sweep"] = parse_recipe_list(parser["sweep"]["meshes"])
    if parser.has_section("case"):
        fields["case_params"] = {k: parse_value(v) for k, v in parser["case"].items()}
    try:
        config = RunConfig(**fields)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc.errors()[0]['loc']}: {exc.errors()[0]['msg']}") from exc
    if config.case not in case_names():
        raise ConfigError(f"unknown case {config.case!r}; available: {case_names()}")
    return config


def resolve_case(config: RunConfig) -> CaseDefinition:
    """Case with parameter overrides and correction toggles applied."""
    try:
        case = get_case(config.case, **config.case_params)
        return case.with_corrections(config.corrections)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc.args[0] if exc.args else exc)) from exc


def resolve_mesh(config: RunConfig, case: CaseDefinition, recipe: MeshRecipe | None = None) -> TriMesh:
    """Build the mesh and check every configured tag exists on it."""
    try:
        mesh = build_mesh(recipe or config.mesh, case)
    except MeshError as exc:
        raise ConfigError(f"mesh recipe failed: {exc}") from exc
    missing = sorted((set(config.corrections) | set(case.boundaries)) - set(mesh.tags))
    if missing:
        raise ConfigError(f"boundary tag(s) {missing} not present in the mesh (tags: {mesh.tags})")
    return mesh
