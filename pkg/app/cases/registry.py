"""
Case registry: name -> factory accepting keyword overrides from the [case] config section.
"""
from __future__ import annotations

import inspect
from typing import Callable

from app.cases.base import CaseDefinition
from app.cases.cylinder import cylinder_case
from app.cases.freestream import freestream_case
from app.cases.kidder import kidder_case
from app.cases.manufactured import manufactured_case

CASES: dict[str, Callable[..., CaseDefinition]] = {
    "manufactured": manufactured_case,
    "kidder": kidder_case,
    "cylinder_horizontal": lambda **kw: cylinder_case("horizontal", **kw),
    "cylinder_vertical": lambda **kw: cylinder_case("vertical", **kw),
    "freestream": freestream_case,
}

_SIGNATURES = {
    "manufactured": manufactured_case,
    "kidder": kidder_case,
    "cylinder_horizontal": cylinder_case,
    "cylinder_vertical": cylinder_case,
    "freestream": freestream_case,
}


def case_names() -> list[str]:
    return sorted(CASES)


def case_parameters(name: str) -> list[str]:
    params = inspect.signature(_SIGNATURES[name]).parameters
    return [p for p in params if p not in ("mode", "corrected", "solution")]


def get_case(name: str, **overrides) -> CaseDefinition:
    """Build a case, passing only the overrides its factory accepts."""
    if name not in CASES:
        raise KeyError(f"unknown case {name!r}; available: {case_names()}")
    allowed = set(case_parameters(name))
    unknown = sorted(set(overrides) - allowed)
    if unknown:
        raise KeyError(f"case {name!r} has no parameter(s) {unknown}; accepted: {sorted(allowed)}")
    return CASES[name](**overrides)
