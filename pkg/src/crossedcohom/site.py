"""Finite poset sites: objects, meets, covering families."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Sequence

from .report import Report

EMPTY = None  # sentinel for an empty meet


class SiteError(ValueError):
    pass


def _name(points: Iterable[str]) -> str:
    pts = sorted(points)
    if all(len(p) == 1 for p in pts):
        return "".join(pts)
    return "{" + ",".join(pts) + "}"


@dataclass(frozen=True)
class Cover:
    target: str
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True, eq=False)
class FiniteSite:
    """A finite poset with binary meets and a topology given by covering families.

    ``leq`` holds pairs (V, U) with V <= U, i.e. a morphism V -> U.
    ``points`` maps each object to its underlying point set when the site comes
    from a finite topological space; it is empty for abstract poset sites.
    """

    objects: tuple
    leq: frozenset
    covers: dict
    points: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "leq", frozenset(self.leq))
        order = sorted(self.objects, key=lambda U: (-len(self.down(U)), self.objects.index(U)))
        object.__setattr__(self, "_top_down", tuple(order))
        meets = {}
        for U in self.objects:
            for V in self.objects:
                meets[U, V] = self._glb(U, V)
        object.__setattr__(self, "_meets", meets)

    def __repr__(self):
        return f"FiniteSite({self.name or len(self.objects)})"

    # -- order structure

    def le(self, V, U) -> bool:
        return (V, U) in self.leq

    def down(self, U) -> list:
        return [V for V in self.objects if (V, U) in self.leq]

    def up(self, V) -> list:
        return [U for U in self.objects if (V, U) in self.leq]

    def _glb(self, U, V):
        lower = [W for W in self.objects if (W, U) in self.leq and (W, V) in self.leq]
        if not lower:
            return EMPTY
        top = [W for W in lower if all((X, W) in self.leq for X in lower)]
        if len(top) != 1:
            raise SiteError(f"objects {U!r} and {V!r} have no meet")
        return top[0]

    def meet(self, *objs):
        """Meet of one or more objects; EMPTY if the intersection is empty."""
        r = objs[0]
        for V in objs[1:]:
            if r is EMPTY or V is EMPTY:
                return EMPTY
            r = self._meets[r, V]
        return r

    @property
    def top_down(self) -> tuple:
        """Objects ordered so that every object precedes those below it."""
        return self._top_down

    @property
    def top(self):
        tops = [U for U in self.objects if all(self.le(V, U) for V in self.objects)]
        return tops[0] if tops else None

    def hasse_edges(self, subset=None) -> list:
        """Pairs (U, V) with V < U and nothing strictly between, inside subset."""
        objs = self.objects if subset is None else [U for U in self.objects if U in subset]
        edges = []
        for U in objs:
            for V in objs:
                if V != U and self.le(V, U):
                    if not any(
                        W not in (U, V) and self.le(V, W) and self.le(W, U) for W in objs
                    ):
                        edges.append((U, V))
        return edges

    # -- topology

    def sieve(self, members: Iterable) -> frozenset:
        members = list(members)
        return frozenset(V for V in self.objects if any(self.le(V, M) for M in members))

    def sieve_covers(self, S: frozenset, U) -> bool:
        return any(all(M in S for M in fam) for fam in self.covers[U])

    def minimal_sieve(self, U) -> frozenset:
        """Intersection of all covering sieves of U."""
        S = frozenset(self.down(U))
        for fam in self.covers[U]:
            S = S & self.sieve(fam)
        return S

    def minimal_family(self, U) -> tuple:
        """Maximal elements of the minimal covering sieve of U."""
        S = self.minimal_sieve(U)
        return tuple(V for V in self.top_down if V in S and not any(W != V and self.le(V, W) for W in S))

    def minimal_open(self, x):
        """Smallest open containing the point x."""
        return min((U for U in self.objects if x in self.points[U]), key=lambda U: len(self.points[U]))

    def minimal_basis_cover(self) -> Cover:
        """Cover of the top by the minimal open neighbourhoods of all points."""
        if not self.points:
            return Cover(self.top, self.minimal_family(self.top))
        pts = sorted(self.points[self.top])
        members = []
        for x in pts:
            U = self.minimal_open(x)
            if U not in members:
                members.append(U)
        members.sort(key=self.objects.index)
        return Cover(self.top, members)


def build_poset_site(points: Sequence[str], opens: Iterable[Iterable[str]], name: str = "") -> FiniteSite:
    """Site of nonempty open subsets of a finite topological space."""
    points = [str(p) for p in points]
    pts = frozenset(points)
    sets = {frozenset(str(p) for p in o) for o in opens}
    for o in sets:
        if not o <= pts:
            raise SiteError(f"open {_name(o)} has points outside the space")
    if pts not in sets:
        raise SiteError("the whole space is not listed as open")
    for a, b in combinations(sorted(sets, key=sorted), 2):
        if a | b not in sets:
            raise SiteError(f"opens {_name(a)} and {_name(b)} have a non-open union")
        if a & b and a & b not in sets:
            raise SiteError(f"opens {_name(a)} and {_name(b)} have a non-open intersection")
    nonempty = sorted((o for o in sets if o), key=lambda o: (len(o), sorted(o)))
    names = {o: _name(o) for o in nonempty}
    objects = [names[o] for o in nonempty]
    leq = {(names[a], names[b]) for a in nonempty for b in nonempty if a <= b}
    covers = {}
    for U in nonempty:
        below = [V for V in nonempty if V <= U]
        fams = []
        for r in range(1, len(below) + 1):
            for fam in combinations(below, r):
                if frozenset().union(*fam) == U:
                    fams.append(tuple(names[V] for V in fam))
        covers[names[U]] = tuple(fams)
    return FiniteSite(objects, leq, covers, {names[o]: o for o in nonempty}, name)


def union_closure(generators: Iterable[Iterable[str]]) -> set:
    """All unions of subfamilies of the generators, including the empty open."""
    opens = {frozenset()}
    for g in generators:
        g = frozenset(g)
        opens |= {o | g for o in opens}
    return opens


def space_from_minimal_opens(minimal: dict, name: str = "") -> FiniteSite:
    """Build a site from the minimal open neighbourhood of every point."""
    opens = union_closure(minimal.values())
    return build_poset_site(sorted(minimal), [sorted(o) for o in opens], name)


def is_covering_family(site: FiniteSite, cover: Cover) -> bool:
    for M in cover.members:
        if M not in site.objects:
            raise SiteError(f"cover member {M!r} is not an object")
        if not site.le(M, cover.target):
            raise SiteError(f"cover member {M!r} is not below {cover.target!r}")
    return site.sieve_covers(site.sieve(cover.members), cover.target)


def meet(site: FiniteSite, U, V):
    return site.meet(U, V)


def base_change(site: FiniteSite, family: Iterable, V) -> tuple:
    out = []
    for M in family:
        W = site.meet(M, V)
        if W is not EMPTY and W not in out:
            out.append(W)
    return tuple(out)


def validate_site(site: FiniteSite) -> Report:
    rep = Report("validate-site")
    objs = site.objects
    bad = None
    for U in objs:
        if not site.le(U, U):
            bad = ("reflexive", U)
    for U, V in product(objs, repeat=2):
        if U != V and site.le(U, V) and site.le(V, U):
            bad = bad or ("antisymmetric", U, V)
    for U, V, W in product(objs, repeat=3):
        if site.le(U, V) and site.le(V, W) and not site.le(U, W):
            bad = bad or ("transitive", U, V, W)
    rep.add("partial order", bad is None, bad)

    bad = None
    for U, V in product(objs, repeat=2):
        m = site.meet(U, V)
        if m is EMPTY:
            if any(site.le(W, U) and site.le(W, V) for W in objs):
                bad = (U, V)
        elif not (site.le(m, U) and site.le(m, V)):
            bad = bad or (U, V, m)
    rep.add("meets", bad is None, bad)

    bad = None
    for U in objs:
        for fam in site.covers.get(U, ()):
            for M in fam:
                if not site.le(M, U):
                    bad = bad or (U, fam, M)
    rep.add("covering families lie below their target", bad is None, bad)

    bad = [U for U in objs if not site.sieve_covers(site.sieve([U]), U)]
    rep.add("identity family covers", not bad, bad[0] if bad else None)

    bad = None
    for U in objs:
        for fam in site.covers[U]:
            for V in site.down(U):
                bc = base_change(site, fam, V)
                if not site.sieve_covers(site.sieve(bc), V):
                    bad = bad or {"target": U, "family": fam, "along": V}
    rep.add("stability under base change", bad is None, bad)

    bad = [U for U in objs if not site.sieve_covers(site.minimal_sieve(U), U)]
    rep.add("covering sieves closed under intersection", not bad, bad[0] if bad else None)

    bad = None
    for U in objs:
        for fam in site.covers[U]:
            S = frozenset()
            for M in fam:
                S |= site.minimal_sieve(M)
            if not site.sieve_covers(S, U):
                bad = bad or {"target": U, "family": fam}
    rep.add("local character", bad is None, bad)
    return rep


# -- standard fixtures

def point_site() -> FiniteSite:
    return build_poset_site(["p"], [[], ["p"]], "pt")


def pseudo_circle() -> FiniteSite:
    opens = [[], ["a"], ["b"], ["a", "b"], ["a", "b", "c"], ["a", "b", "d"], ["a", "b", "c", "d"]]
    return build_poset_site(["a", "b", "c", "d"], opens, "pseudo-circle")


def sphere2() -> FiniteSite:
    """Six-point model of S^2: the non-Hausdorff suspension of the pseudo-circle."""
    minimal = {
        "a": "a", "b": "b", "c": "abc", "d": "abd", "e": "abcde", "f": "abcdf",
    }
    return space_from_minimal_opens({k: list(v) for k, v in minimal.items()}, "sphere2")


def discrete2() -> FiniteSite:
    return build_poset_site(["x", "y"], [[], ["x"], ["y"], ["x", "y"]], "discrete2")


def site_from_opens(points: dict, name: str = "") -> FiniteSite:
    """Site on a meet-closed family of named open sets.

    ``points`` maps object names to point sets; the family need not be closed
    under unions, and a family covers U when its union is U.
    """
    sets = {k: frozenset(v) for k, v in points.items()}
    objects = sorted(sets, key=lambda k: (len(sets[k]), k))
    leq = {(a, b) for a in objects for b in objects if sets[a] <= sets[b]}
    covers = {}
    for U in objects:
        below = [V for V in objects if sets[V] <= sets[U]]
        covers[U] = _minimal_covering_families(sets, below, sets[U])
    site = FiniteSite(objects, leq, covers, sets, name)
    for a in objects:
        for b in objects:
            m = site.meet(a, b)
            if (sets[a] & sets[b]) != (sets[m] if m is not EMPTY else frozenset()):
                raise SiteError(f"intersection of {a} and {b} is not an object")
    return site


def _minimal_covering_families(sets: dict, below: list, target: frozenset) -> tuple:
    """Inclusion-minimal subfamilies of ``below`` whose union is ``target``."""
    found = set()

    def go(chosen, covered):
        missing = target - covered
        if not missing:
            found.add(frozenset(chosen))
            return
        x = min(missing, key=lambda p: sum(p in sets[V] for V in below))
        for V in below:
            if x in sets[V] and V not in chosen:
                go(chosen | {V}, covered | sets[V])

    go(frozenset(), frozenset())
    minimal = [f for f in found if not any(g < f for g in found)]
    return tuple(sorted((tuple(sorted(f, key=below.index)) for f in minimal), key=lambda f: (len(f), f)))


def tetra_sphere() -> FiniteSite:
    """Open stars in the face poset of the boundary of a tetrahedron.

    Objects are the whole space and the closures of the vertices, edges and
    faces; the four face closures cover the top with the nerve of a 2-sphere.
    """
    verts = "abcd"
    simplices = [frozenset(s) for r in (1, 2, 3) for s in combinations(verts, r)]
    label = lambda s: "".join(sorted(s))
    pts = {label(s): {label(t) for t in simplices if t <= s} for s in simplices}
    pts = {("s" + k): {"p" + x for x in v} for k, v in pts.items()}
    pts["top"] = set().union(*pts.values())
    return site_from_opens(pts, "tetra-sphere")
