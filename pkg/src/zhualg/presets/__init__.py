"""Declarative presentation files and the shipped presets.

A presentation file is JSON with a ``schema`` tag.  Two kinds are used:

``zhualg-presentation/1`` (VOA families)::

    {
      "schema": "zhualg-presentation/1",
      "name": "affine-sl2",
      "family": "heisenberg" | "virasoro" | "affine",
      "cutoff": 6,                      # default table range for the CLI
      # heisenberg: "rank": d, "level": "1"
      # virasoro:   "central_charge": "1/2"
      # affine:     "level": "1",
      #             "generators": [{"name","weight","charge"}...],
      #             "brackets":  [{"left","right","terms":{name: coeff}}...],
      #             "form":      [{"left","right","value"}...]
    }

``zhualg-filtered-instance/1`` (abstract finite filtered algebra + bimodules)
is documented in :mod:`zhualg.filtgen`.

Rational values are strings like ``"-3/2"`` (or plain integers).  Modules are
named by compact specs: ``fock:1`` or ``fock:1,0`` (momenta), ``verma:1/3``
(conformal weight h), ``weyl:2`` (dominant integral sl2 weight; general
affine bottom levels take explicit matrices in the file under "modules").
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Optional

from ..rational import rat
from ..voa import GeneratorSpec, ModulePresentation, PresentationError, VOAPresentation

BUILTIN = ("heisenberg-1", "virasoro", "affine-sl2")

PRESENTATION_SCHEMA = "zhualg-presentation/1"


def heisenberg_presentation(rank: int = 1, level="1", name: Optional[str] = None) -> VOAPresentation:
    gens = [GeneratorSpec(i, f"a{i+1}" if rank > 1 else "a", 1) for i in range(rank)]
    return VOAPresentation(
        "heisenberg", gens, level=level, name=name or f"heisenberg-{rank}"
    )


def virasoro_presentation(central_charge="1/2", name: str = "virasoro") -> VOAPresentation:
    return VOAPresentation(
        "virasoro", [GeneratorSpec(0, "L", 2)], central_charge=central_charge, name=name
    )


def affine_sl2_presentation(level="1", name: str = "affine-sl2") -> VOAPresentation:
    gens = [
        GeneratorSpec(0, "e", 1, charge=2),
        GeneratorSpec(1, "h", 1, charge=0),
        GeneratorSpec(2, "f", 1, charge=-2),
    ]
    struct = {(0, 2): {1: 1}, (1, 0): {0: 2}, (1, 2): {2: -2}}
    form = {(0, 2): 1, (1, 1): 2}
    return VOAPresentation("affine", gens, level=level, struct=struct, form=form, name=name)


def sl2_irrep_matrices(weight: int):
    """Bottom-level matrices of the (weight+1)-dimensional sl2 irrep.

    Basis v_0..v_m: e.v_i = i(m+1-i) v_{i-1}, h.v_i = (m-2i) v_i,
    f.v_i = v_{i+1}.  Returned in generator order (e, h, f), together with
    the h-eigenvalue charge list.
    """
    m = int(weight)
    if m < 0:
        raise PresentationError("dominant weight must be >= 0")
    n = m + 1
    e = [[0] * n for _ in range(n)]
    h = [[0] * n for _ in range(n)]
    f = [[0] * n for _ in range(n)]
    for j in range(n):
        h[j][j] = m - 2 * j
        if j + 1 < n:
            f[j + 1][j] = 1
        if j >= 1:
            e[j - 1][j] = j * (m + 1 - j)
    return [e, h, f], [m - 2 * j for j in range(n)]


def make_module(vpres: VOAPresentation, spec) -> ModulePresentation:
    """Build a module from a compact spec string or a dict."""
    if isinstance(spec, str):
        kind, _, arg = spec.partition(":")
        kind = kind.strip()
        if kind == "fock":
            momenta = [rat(x) for x in arg.split(",")] if arg else [0] * len(vpres.generators)
            return ModulePresentation(vpres, "fock", momenta=momenta, name=spec)
        if kind == "verma":
            return ModulePresentation(vpres, "verma", h=arg or "0", name=spec)
        if kind == "weyl":
            mats, charges = sl2_irrep_matrices(int(arg or "0"))
            return ModulePresentation(
                vpres, "weyl", matrices=mats, bottom_charges=charges, name=spec
            )
        raise PresentationError(f"unknown module spec {spec!r}")
    kind = spec.get("kind")
    if kind == "fock":
        return ModulePresentation(vpres, "fock", momenta=spec["momenta"], name=spec.get("name"))
    if kind == "verma":
        return ModulePresentation(vpres, "verma", h=spec["h"], name=spec.get("name"))
    if kind == "weyl":
        if "weight" in spec:
            mats, charges = sl2_irrep_matrices(int(spec["weight"]))
        else:
            mats, charges = spec["matrices"], spec.get("bottom_charges")
        return ModulePresentation(
            vpres, "weyl", matrices=mats, bottom_charges=charges, name=spec.get("name")
        )
    raise PresentationError(f"unknown module kind {kind!r}")


def presentation_from_dict(data: dict) -> tuple:
    """(VOAPresentation, default cutoff) from parsed presentation JSON."""
    if data.get("schema") != PRESENTATION_SCHEMA:
        raise PresentationError(
            f"expected schema {PRESENTATION_SCHEMA!r}, got {data.get('schema')!r}"
        )
    family = data.get("family")
    cutoff = int(data.get("cutoff", 6))
    name = data.get("name")
    if family == "heisenberg":
        pres = heisenberg_presentation(
            rank=int(data.get("rank", 1)), level=data.get("level", "1"), name=name
        )
    elif family == "virasoro":
        pres = virasoro_presentation(
            central_charge=data.get("central_charge", "1/2"), name=name
        )
    elif family == "affine":
        gens = [
            GeneratorSpec(i, g["name"], int(g.get("weight", 1)), int(g.get("charge", 0)))
            for i, g in enumerate(data["generators"])
        ]
        index = {g.name: g.gid for g in gens}
        struct = {}
        for br in data.get("brackets", []):
            a, b = index[br["left"]], index[br["right"]]
            struct[(a, b)] = {index[c]: rat(v) for c, v in br["terms"].items()}
        form = {}
        for fr in data.get("form", []):
            form[(index[fr["left"]], index[fr["right"]])] = rat(fr["value"])
        pres = VOAPresentation(
            "affine", gens, level=data.get("level", "1"), struct=struct, form=form, name=name
        )
    else:
        raise PresentationError(f"unknown family {family!r}")
    return pres, cutoff


def load_builtin(name: str) -> dict:
    if name not in BUILTIN:
        raise PresentationError(f"unknown preset {name!r}; shipped presets: {', '.join(BUILTIN)}")
    text = resources.files("zhualg.presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_presentation(source: str) -> tuple:
    """Load by preset name or file path; returns (presentation, cutoff)."""
    if source in BUILTIN:
        return presentation_from_dict(load_builtin(source))
    with open(source, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return presentation_from_dict(data)
