"""JSON fixtures for sites, groups, group presheaves, crossed sheaves and sequences."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from . import fixtures
from .crossed import CrossedGroupSheaf, abelian_crossed, constant_crossed, int_crossed
from .groups import FiniteGroup, cyclic, dihedral, direct_product, symmetric, trivial
from .sheaf import Presheaf, constant_presheaf, constant_sheaf
from .site import FiniteSite, build_poset_site, point_site, pseudo_circle, sphere2, tetra_sphere


class FixtureError(ValueError):
    """Malformed fixture; ``where`` locates the problem."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


BUILTIN_SITES = {
    "pt": point_site,
    "pseudo-circle": pseudo_circle,
    "sphere2": sphere2,
    "tetra-sphere": tetra_sphere,
}


def hashable(x):
    """JSON values to hashable labels: lists become tuples."""
    if isinstance(x, list):
        return tuple(hashable(v) for v in x)
    return x


def jsonable(x):
    if isinstance(x, tuple):
        return [jsonable(v) for v in x]
    return x


def read_json(path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise FixtureError(where, f"missing key {key!r}")
    return d[key]


# -- sites

def site_from_dict(d: dict, where: str = "site") -> FiniteSite:
    if not isinstance(d, dict):
        raise FixtureError(where, "expected an object")
    if "builtin" in d:
        name = d["builtin"]
        if name not in BUILTIN_SITES:
            raise FixtureError(f"{where}.builtin", f"unknown site {name!r}")
        return BUILTIN_SITES[name]()
    name = d.get("name", "")
    if "opens" in d:
        return build_poset_site(_need(d, "points", where), d["opens"], name)
    objects = [str(x) for x in _need(d, "objects", where)]
    leq = {(str(v), str(u)) for v, u in _need(d, "leq", where)}
    leq |= {(u, u) for u in objects}
    covers_raw = _need(d, "covers", where)
    covers = {}
    for U in objects:
        fams = covers_raw.get(U, [[U]])
        covers[U] = tuple(tuple(str(m) for m in fam) for fam in fams)
        for fam in covers[U]:
            for m in fam:
                if m not in objects:
                    raise FixtureError(f"{where}.covers.{U}", f"unknown object {m!r}")
    points = {str(k): frozenset(str(p) for p in v) for k, v in d.get("points", {}).items()} if isinstance(d.get("points"), dict) else {}
    return FiniteSite(objects, leq, covers, points, name)


def site_to_dict(site: FiniteSite) -> dict:
    out = {
        "name": site.name,
        "objects": list(site.objects),
        "leq": sorted([v, u] for v, u in site.leq if v != u),
        "covers": {U: [list(f) for f in site.covers[U]] for U in site.objects},
    }
    if site.points:
        out["points"] = {U: sorted(site.points[U]) for U in site.objects}
    return out


def dump_site(site: FiniteSite) -> str:
    return json.dumps(site_to_dict(site), sort_keys=True, indent=1)


def load_site(path) -> FiniteSite:
    return site_from_dict(read_json(path), str(path))


# -- groups

def group_from_dict(d, where: str = "group") -> FiniteGroup:
    if isinstance(d, str):
        if d.startswith("Z") and d[1:].isdigit():
            return cyclic(int(d[1:]))
        if d.startswith("S") and d[1:].isdigit():
            return symmetric(int(d[1:]))
        if d.startswith("D") and d[1:].isdigit():
            return dihedral(int(d[1:]))
        if d in ("1", "trivial"):
            return trivial()
        raise FixtureError(where, f"unknown group name {d!r}")
    if not isinstance(d, dict):
        raise FixtureError(where, "expected a group name or object")
    for key, make in (("cyclic", cyclic), ("symmetric", symmetric), ("dihedral", dihedral)):
        if key in d:
            return make(int(d[key]))
    if "product" in d:
        parts = [group_from_dict(g, f"{where}.product[{i}]") for i, g in enumerate(d["product"])]
        G = parts[0]
        for H in parts[1:]:
            G = direct_product(G, H)
        return G
    els = [hashable(x) for x in _need(d, "elements", where)]
    table = _need(d, "table", where)
    try:
        G = FiniteGroup(els, table, d.get("name", ""))
        G.check_axioms()
    except (ValueError, IndexError, TypeError) as exc:
        raise FixtureError(where, str(exc)) from None
    return G


def group_to_dict(G: FiniteGroup) -> dict:
    return {"name": G.name, "elements": [jsonable(x) for x in G.elements], "table": [list(r) for r in G.table]}


# -- group presheaves

def presheaf_from_dict(site: FiniteSite, d: dict, where: str = "sheaf") -> Presheaf:
    if not isinstance(d, dict):
        raise FixtureError(where, "expected an object")
    if "constant" in d:
        G = group_from_dict(d["constant"], f"{where}.constant")
        return constant_sheaf(site, G)
    if "constant_presheaf" in d:
        return constant_presheaf(site, group_from_dict(d["constant_presheaf"], f"{where}.constant_presheaf"))
    objs = _need(d, "objects", where)
    values, groups = {}, {}
    for U in site.objects:
        block = _need(objs, U, f"{where}.objects")
        if "table" in block:
            G = group_from_dict(block, f"{where}.objects.{U}")
            values[U], groups[U] = G.elements, G
        else:
            values[U] = tuple(hashable(x) for x in _need(block, "elements", f"{where}.objects.{U}"))
    res = {}
    for k, r in enumerate(_need(d, "restrictions", where)):
        w = f"{where}.restrictions[{k}]"
        U, V = _need(r, "from", w), _need(r, "to", w)
        res[U, V] = {hashable(x): hashable(y) for x, y in _need(r, "map", w)}
    for U in site.objects:
        res[U, U] = {x: x for x in values[U]}
        for V in site.down(U):
            if (U, V) not in res:
                raise FixtureError(where, f"missing restriction {U} -> {V}")
    return Presheaf(site, values, res, groups if len(groups) == len(values) else None, d.get("name", ""))


def presheaf_to_dict(P: Presheaf) -> dict:
    site = P.site
    objs = {}
    for U in site.objects:
        if P.is_group:
            objs[U] = group_to_dict(P.group(U))
        else:
            objs[U] = {"elements": [jsonable(x) for x in P.values[U]]}
    res = [
        {"from": U, "to": V, "map": [[jsonable(x), jsonable(P.restrict(U, V, x))] for x in P.values[U]]}
        for U in site.objects for V in site.down(U) if V != U
    ]
    return {"name": P.name, "objects": objs, "restrictions": res}


# -- crossed group sheaves

def crossed_from_dict(site: FiniteSite, d: dict, where: str = "crossed") -> CrossedGroupSheaf:
    if not isinstance(d, dict):
        raise FixtureError(where, "expected an object")
    if "abelian" in d:
        G = group_from_dict(d["abelian"], f"{where}.abelian")
        if not G.is_abelian():
            raise FixtureError(f"{where}.abelian", "group is not abelian")
        return abelian_crossed(site, G)
    if "int" in d:
        return int_crossed(site, presheaf_from_dict(site, d["int"], f"{where}.int"))
    if "constant" in d:
        c = d["constant"]
        w = f"{where}.constant"
        A = group_from_dict(_need(c, "A", w), f"{w}.A")
        Pi = group_from_dict(_need(c, "Pi", w), f"{w}.Pi")
        rho = {hashable(a): hashable(p) for a, p in _need(c, "rho", w)}
        phi = {(hashable(p), hashable(a)): hashable(r) for p, a, r in _need(c, "phi", w)}
        return constant_crossed(site, A, Pi, rho, phi)
    A = presheaf_from_dict(site, _need(d, "A", where), f"{where}.A")
    Pi = presheaf_from_dict(site, _need(d, "Pi", where), f"{where}.Pi")
    rho, phi = {}, {}
    for U in site.objects:
        rho[U] = {hashable(a): hashable(p) for a, p in _need(_need(d, "rho", where), U, f"{where}.rho")}
        phi[U] = {
            (hashable(p), hashable(a)): hashable(r)
            for p, a, r in _need(_need(d, "phi", where), U, f"{where}.phi")
        }
    return CrossedGroupSheaf(A, Pi, rho, phi, d.get("name", ""))


def crossed_to_dict(Phi: CrossedGroupSheaf) -> dict:
    site = Phi.site
    return {
        "name": Phi.name,
        "A": presheaf_to_dict(Phi.A),
        "Pi": presheaf_to_dict(Phi.Pi),
        "rho": {U: [[jsonable(a), jsonable(p)] for a, p in Phi.rho[U].items()] for U in site.objects},
        "phi": {
            U: [[jsonable(p), jsonable(a), jsonable(r)] for (p, a), r in Phi.phi[U].items()]
            for U in site.objects
        },
    }


# -- sequences and diagrams

def sequence_from_dict(site: FiniteSite, d, where: str = "seq"):
    name = d if isinstance(d, str) else _need(d, "builtin", where)
    if name not in fixtures.SEQUENCES:
        raise FixtureError(where, f"unknown sequence {name!r}; known: {sorted(fixtures.SEQUENCES)}")
    return fixtures.SEQUENCES[name](site)


def diagram_from_dict(site: FiniteSite, d, where: str = "diagram") -> tuple:
    if isinstance(d, dict) and "identity" in d:
        return fixtures.identity_diagram(sequence_from_dict(site, d["identity"], f"{where}.identity"))
    name = d if isinstance(d, str) else _need(d, "builtin", where)
    if name != "Z2xZ2-to-Z4":
        raise FixtureError(where, f"unknown diagram {name!r}")
    return fixtures.naturality_diagram(site)
