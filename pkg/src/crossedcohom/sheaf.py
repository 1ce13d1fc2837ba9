"""Presheaves and sheaves of finite sets and groups on a finite site."""

from __future__ import annotations

from itertools import product
from typing import Callable, Optional

from .groups import FiniteGroup
from .report import Report
from .site import EMPTY, FiniteSite


class SheafError(ValueError):
    pass


class Presheaf:
    """Finite presheaf: ``values[U]`` is a tuple of elements, ``res[U, V]`` a dict
    for every V <= U. When ``groups`` is given, ``groups[U]`` is a FiniteGroup on
    ``values[U]`` and the restrictions are homomorphisms.
    """

    def __init__(self, site: FiniteSite, values: dict, res: dict, groups: Optional[dict] = None, name: str = ""):
        self.site = site
        self.values = {U: tuple(values[U]) for U in site.objects}
        self.res = res
        self.groups = groups
        self.name = name
        self._sets = {U: frozenset(v) for U, v in self.values.items()}

    def __repr__(self):
        kind = "GroupPresheaf" if self.groups else "Presheaf"
        sizes = ",".join(f"{U}:{len(self.values[U])}" for U in self.site.objects)
        return f"{kind}({self.name or sizes})"

    @property
    def is_group(self) -> bool:
        return self.groups is not None

    def group(self, U) -> FiniteGroup:
        return self.groups[U]

    def contains(self, U, x) -> bool:
        return x in self._sets[U]

    def restrict(self, U, V, x):
        if U == V:
            return x
        return self.res[U, V][x]

    @classmethod
    def from_edges(cls, site, values, edge_maps, groups=None, name=""):
        """Build all restrictions by composing maps given on Hasse edges."""
        res = {}
        for U in site.objects:
            res[U, U] = {x: x for x in values[U]}
        for U in site.top_down:
            for V in site.top_down:
                if V == U or not site.le(V, U) or (U, V) in res:
                    continue
                if (U, V) in edge_maps:
                    res[U, V] = dict(edge_maps[U, V])
                    continue
                W = next(
                    W for W in site.top_down
                    if (U, W) in edge_maps and site.le(V, W) and W != U
                )
                first = edge_maps[U, W]
                rest = _compose_path(site, edge_maps, W, V, res)
                res[U, V] = {x: rest[first[x]] for x in values[U]}
        return cls(site, values, res, groups, name)


def _compose_path(site, edge_maps, U, V, cache):
    if (U, V) in cache:
        return cache[U, V]
    if (U, V) in edge_maps:
        cache[U, V] = dict(edge_maps[U, V])
        return cache[U, V]
    W = next(W for W in site.top_down if (U, W) in edge_maps and site.le(V, W) and W != U)
    first = edge_maps[U, W]
    rest = _compose_path(site, edge_maps, W, V, cache)
    cache[U, V] = {x: rest[first[x]] for x in first}
    return cache[U, V]


def check_presheaf(P: Presheaf) -> Report:
    site = P.site
    rep = Report("presheaf")
    bad = None
    for (U, V), m in P.res.items():
        if not site.le(V, U):
            bad = bad or ("restriction along non-arrow", U, V)
            continue
        for x in P.values[U]:
            if not P.contains(V, m.get(x, object())):
                bad = bad or ("restriction leaves target", U, V, x)
    rep.add("restrictions well-typed", bad is None, bad)
    bad = [U for U in site.objects if any(P.restrict(U, U, x) != x for x in P.values[U])]
    rep.add("identity restriction", not bad, bad)
    bad = None
    for U in site.objects:
        for V in site.down(U):
            for W in site.down(V):
                for x in P.values[U]:
                    if P.restrict(V, W, P.restrict(U, V, x)) != P.restrict(U, W, x):
                        bad = bad or (U, V, W, x)
    rep.add("restrictions compose", bad is None, bad)
    if P.is_group:
        bad = None
        for U in site.objects:
            G = P.group(U)
            if tuple(G.elements) != P.values[U] and set(G.elements) != set(P.values[U]):
                bad = bad or ("group carrier mismatch", U)
            for V in site.down(U):
                H = P.group(V)
                m = P.res[U, V] if U != V else None
                if m is None:
                    continue
                for x in G:
                    for y in G:
                        if m[G.mul(x, y)] != H.mul(m[x], m[y]):
                            bad = bad or ("restriction not a homomorphism", U, V, x, y)
        rep.add("restrictions are homomorphisms", bad is None, bad)
    return rep


def matching_families(site: FiniteSite, P: Presheaf, family) -> list:
    """Families (s_i) with s_i and s_j agreeing on every nonempty pairwise meet."""
    family = list(family)
    out = []

    def go(i, chosen):
        if i == len(family):
            out.append(tuple(chosen))
            return
        Ui = family[i]
        for s in P.values[Ui]:
            ok = True
            for j in range(i):
                Uj = family[j]
                W = site.meet(Ui, Uj)
                if W is EMPTY:
                    continue
                if P.restrict(Ui, W, s) != P.restrict(Uj, W, chosen[j]):
                    ok = False
                    break
            if ok:
                chosen.append(s)
                go(i + 1, chosen)
                chosen.pop()

    go(0, [])
    return out


def check_sheaf(site: FiniteSite, P: Presheaf, families: str = "all") -> Report:
    """Gluing check on covering families.

    ``families="all"`` uses every declared covering family; ``"minimal"`` only the
    generators of the minimal covering sieve of each object, which suffices on a
    finite site and is much cheaper.
    """
    rep = Report("check-sheaf")
    for U in site.top_down:
        fams = site.covers[U] if families == "all" else [site.minimal_family(U)]
        for fam in fams:
            if tuple(fam) == (U,):
                continue
            seen = {}
            for s in P.values[U]:
                key = tuple(P.restrict(U, M, s) for M in fam)
                seen.setdefault(key, []).append(s)
            for key, pre in seen.items():
                if len(pre) > 1:
                    rep.add(f"gluing over {U}", False, {"cover": fam, "family": key, "gluings": pre})
                    return rep
            for mf in matching_families(site, P, fam):
                if mf not in seen:
                    rep.add(f"gluing over {U}", False, {"cover": fam, "family": mf, "gluings": []})
                    return rep
    rep.add("every matching family glues uniquely", True)
    return rep


def is_sheaf(site, P, families="minimal") -> bool:
    return check_sheaf(site, P, families).ok


def glue(site: FiniteSite, P: Presheaf, U, family, sections):
    """The unique section over U restricting to the given sections."""
    hits = [s for s in P.values[U] if all(P.restrict(U, M, s) == t for M, t in zip(family, sections))]
    if len(hits) != 1:
        raise SheafError(f"{len(hits)} gluings over {U} for {tuple(sections)!r}")
    return hits[0]


# -- plus construction

def _plus_index(site):
    gens = {U: site.minimal_family(U) for U in site.objects}
    return gens


def _sieve_families(site, P, U, gens):
    """Matching families on the minimal covering sieve of U, labelled by their
    values on the sieve's maximal elements."""
    S = site.minimal_sieve(U)
    order = [V for V in site.top_down if V in S]
    out = []
    for choice in product(*(P.values[M] for M in gens)):
        fam = dict(zip(gens, choice))
        ok = True
        for V in order:
            vals = {P.restrict(M, V, fam[M]) for M in gens if site.le(V, M)}
            if len(vals) != 1:
                ok = False
                break
        if ok:
            out.append(tuple(choice))
    return out


def plus_construction(site: FiniteSite, P: Presheaf) -> tuple:
    """One plus-construction pass: returns (P+, unit) with unit[U] a dict."""
    gens = _plus_index(site)
    values, res, unit = {}, {}, {}
    for U in site.objects:
        values[U] = _sieve_families(site, P, U, gens[U])
        unit[U] = {s: tuple(P.restrict(U, M, s) for M in gens[U]) for s in P.values[U]}
    for U in site.objects:
        for V in site.down(U):
            mapping = {}
            for f in values[U]:
                fam = dict(zip(gens[U], f))
                img = []
                for M2 in gens[V]:
                    M = next(M for M in gens[U] if site.le(M2, M))
                    img.append(P.restrict(M, M2, fam[M]))
                mapping[f] = tuple(img)
            res[U, V] = mapping
    groups = None
    if P.is_group:
        groups = {}
        for U in site.objects:
            Gs = [P.group(M) for M in gens[U]]
            groups[U] = FiniteGroup.from_function(
                values[U],
                lambda x, y, Gs=Gs: tuple(G.mul(a, b) for G, a, b in zip(Gs, x, y)),
                f"{P.name}+({U})",
            )
    return Presheaf(site, values, res, groups, f"{P.name}+" if P.name else ""), unit


def sheafify(site: FiniteSite, P: Presheaf) -> tuple:
    """Associated sheaf by two plus passes; returns (a(P), unit)."""
    P1, u1 = plus_construction(site, P)
    P2, u2 = plus_construction(site, P1)
    unit = {U: {s: u2[U][u1[U][s]] for s in P.values[U]} for U in site.objects}
    return P2, unit


def plus_map(site, m: dict, P: Presheaf, Q: Presheaf) -> dict:
    """Induced map P+ -> Q+ of a presheaf morphism m (components m[U])."""
    gens = _plus_index(site)
    P1, _ = plus_construction(site, P)
    return {U: {f: tuple(m[M][x] for M, x in zip(gens[U], f)) for f in P1.values[U]} for U in site.objects}


def sheafify_map(site, m: dict, P: Presheaf, Q: Presheaf) -> dict:
    P1, _ = plus_construction(site, P)
    Q1, _ = plus_construction(site, Q)
    m1 = plus_map(site, m, P, Q)
    return plus_map(site, m1, P1, Q1)


def local_representative(site: FiniteSite, P: Presheaf, aP: Presheaf, unit: dict, U, s) -> tuple:
    """For s in a(P)(U), a cover of U with a preimage in P over each member."""
    members, preimages = [], []
    for M in site.minimal_family(U):
        t = aP.restrict(U, M, s)
        hits = [x for x in P.values[M] if unit[M][x] == t]
        if not hits:
            raise SheafError(f"no local representative of {s!r} over {M}")
        members.append(M)
        preimages.append(hits[0])
    return tuple(members), tuple(preimages)


# -- maps

def is_natural(site, m: dict, P: Presheaf, Q: Presheaf) -> bool:
    return all(
        m[V][P.restrict(U, V, x)] == Q.restrict(U, V, m[U][x])
        for U in site.objects for V in site.down(U) for x in P.values[U]
    )


def compose_maps(site, m2: dict, m1: dict) -> dict:
    return {U: {x: m2[U][y] for x, y in m1[U].items()} for U in site.objects}


def is_isomorphism(site, m: dict, P: Presheaf, Q: Presheaf) -> bool:
    return all(
        len(set(m[U].values())) == len(Q.values[U]) == len(P.values[U]) for U in site.objects
    )


# -- quotients and sections

def quotient_sheaf(site: FiniteSite, X: Presheaf, A: Presheaf, act: Callable) -> tuple:
    """Sheaf X/A for a right action act(U, x, a); returns (X/A, q)."""
    for U in site.objects:
        for V in site.down(U):
            for x in X.values[U]:
                for a in A.values[U]:
                    if X.restrict(U, V, act(U, x, a)) != act(V, X.restrict(U, V, x), A.restrict(U, V, a)):
                        raise SheafError(f"action not compatible with restriction {U} -> {V} at {x!r}, {a!r}")
    proj = {}
    values = {}
    for U in site.objects:
        rep = {}
        for x in X.values[U]:
            if x in rep:
                continue
            orbit = [act(U, x, a) for a in A.values[U]]
            for y in orbit:
                rep.setdefault(y, x)
        proj[U] = rep
        values[U] = tuple(dict.fromkeys(rep[x] for x in X.values[U]))
    res = {
        (U, V): {r: proj[V][X.restrict(U, V, r)] for r in values[U]}
        for U in site.objects for V in site.down(U)
    }
    Q0 = Presheaf(site, values, res, None, f"{X.name}/{A.name}")
    Q, unit = sheafify(site, Q0)
    q = {U: {x: unit[U][proj[U][x]] for x in X.values[U]} for U in site.objects}
    return Q, q


def global_sections(site: FiniteSite, P: Presheaf) -> list:
    """Compatible families over all objects; equals P(top) when a top exists."""
    top = site.top
    if top is not None:
        return list(P.values[top])
    maximal = [U for U in site.objects if not any(V != U and site.le(U, V) for V in site.objects)]
    return [f for f in matching_families(site, P, maximal)]


def final_sheaf(site: FiniteSite) -> Presheaf:
    values = {U: ((),) for U in site.objects}
    res = {(U, V): {(): ()} for U in site.objects for V in site.down(U)}
    return Presheaf(site, values, res, None, "1")


def constant_presheaf(site: FiniteSite, G, name: str = "") -> Presheaf:
    """Constant presheaf with value G (a FiniteGroup or a list of elements)."""
    els = tuple(G.elements if isinstance(G, FiniteGroup) else G)
    values = {U: els for U in site.objects}
    res = {(U, V): {x: x for x in els} for U in site.objects for V in site.down(U)}
    groups = {U: G for U in site.objects} if isinstance(G, FiniteGroup) else None
    return Presheaf(site, values, res, groups, name or f"const({getattr(G, 'name', '')})")


def constant_sheaf(site: FiniteSite, G, name: str = "") -> Presheaf:
    """Locally constant sheaf with stalks G.

    On a site of opens a section over U is the tuple of its stalk values at the
    points of U, constant along specialisation. Abstract sites fall back to
    sheafifying the constant presheaf.
    """
    if not site.points:
        return sheafify(site, constant_presheaf(site, G, name))[0]
    els = tuple(G.elements if isinstance(G, FiniteGroup) else G)
    values = {}
    for U in site.objects:
        pts = sorted(site.points[U])
        comps = _components(site, U)
        secs = []
        for choice in product(els, repeat=len(comps)):
            val = {}
            for comp, g in zip(comps, choice):
                for x in comp:
                    val[x] = g
            secs.append(tuple(val[x] for x in pts))
        values[U] = tuple(sorted(secs, key=lambda t: tuple(els.index(v) for v in t)))
    res = {}
    for U in site.objects:
        pu = sorted(site.points[U])
        for V in site.down(U):
            pv = sorted(site.points[V])
            idx = [pu.index(x) for x in pv]
            res[U, V] = {s: tuple(s[i] for i in idx) for s in values[U]}
    groups = None
    if isinstance(G, FiniteGroup):
        groups = {
            U: FiniteGroup.from_function(
                values[U], lambda s, t: tuple(G.mul(a, b) for a, b in zip(s, t)), f"{G.name}({U})"
            )
            for U in site.objects
        }
    return Presheaf(site, values, res, groups, name or f"{getattr(G, 'name', 'const')}")


def _components(site, U) -> list:
    """Connected components of the open U, as lists of points."""
    pts = sorted(site.points[U])
    parent = {x: x for x in pts}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for x in pts:
        for z in site.points[site.minimal_open(x)]:
            parent[find(z)] = find(x)
    comps = {}
    for x in pts:
        comps.setdefault(find(x), []).append(x)
    return list(comps.values())


def group_map_on_constant(site, A: Presheaf, B: Presheaf, f: dict) -> dict:
    """Apply a group-level map stalkwise to locally constant sheaves."""
    return {U: {s: tuple(f[v] for v in s) for s in A.values[U]} for U in site.objects}
