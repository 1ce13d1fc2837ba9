"""Sheaves of crossed groups (A, rho, Pi, phi) and their morphisms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .groups import FiniteGroup, inner_automorphisms, trivial
from .report import Report
from .sheaf import Presheaf, check_presheaf, check_sheaf, constant_sheaf, sheafify
from .site import FiniteSite


@dataclass
class CrossedGroupSheaf:
    """``rho[U]`` maps A(U) -> Pi(U); ``phi[U]`` maps (pi, a) -> pi.a (left action)."""

    A: Presheaf
    Pi: Presheaf
    rho: dict
    phi: dict
    name: str = ""

    @property
    def site(self) -> FiniteSite:
        return self.A.site

    def act(self, U, pi, a):
        return self.phi[U][pi, a]

    def __repr__(self):
        return f"CrossedGroupSheaf({self.name or (self.A.name, self.Pi.name)})"


@dataclass
class CrossedMorphism:
    source: CrossedGroupSheaf
    target: CrossedGroupSheaf
    f: dict
    varphi: dict
    name: str = ""

    def __repr__(self):
        return f"CrossedMorphism({self.name or (self.source.name, self.target.name)})"


@dataclass
class ShortExactCrossedSeq:
    """e -> Phi --(f, phi)--> Phi1 --(h, psi)--> Phi2 -> e"""

    first: CrossedMorphism
    second: CrossedMorphism
    name: str = ""

    @property
    def Phi(self):
        return self.first.source

    @property
    def Phi1(self):
        return self.first.target

    @property
    def Phi2(self):
        return self.second.target


# -- constructors

def identity_map(P: Presheaf) -> dict:
    return {U: {x: x for x in P.values[U]} for U in P.site.objects}


def stalkwise_map(A: Presheaf, g: dict) -> dict:
    """Apply a group-level map to each stalk value of a locally constant sheaf."""
    return {U: {s: tuple(g[v] for v in s) for s in A.values[U]} for U in A.site.objects}


def compose_maps(m2: dict, m1: dict) -> dict:
    return {U: {x: m2[U][y] for x, y in m1[U].items()} for U in m1}


def constant_crossed(site: FiniteSite, A: FiniteGroup, Pi: FiniteGroup, rho: dict, phi: dict, name: str = "") -> CrossedGroupSheaf:
    """Locally constant crossed group sheaf from a crossed group (A, rho, Pi, phi)."""
    SA = constant_sheaf(site, A)
    SP = constant_sheaf(site, Pi)
    r = stalkwise_map(SA, rho)
    act = {
        U: {(p, a): tuple(phi[x, y] for x, y in zip(p, a)) for p in SP.values[U] for a in SA.values[U]}
        for U in site.objects
    }
    return CrossedGroupSheaf(SA, SP, r, act, name or f"({A.name},{Pi.name})")


def abelian_crossed(site: FiniteSite, A: FiniteGroup, name: str = "") -> CrossedGroupSheaf:
    """(A, 1): trivial Pi, trivial rho and action."""
    one = trivial()
    rho = {a: one.identity for a in A}
    phi = {(p, a): a for p in one for a in A}
    return constant_crossed(site, A, one, rho, phi, name or f"({A.name},1)")


def trivial_pi(site: FiniteSite, A: Presheaf) -> CrossedGroupSheaf:
    """(A, 1) for an arbitrary group sheaf A."""
    one = trivial()
    Pi = Presheaf(
        site,
        {U: one.elements for U in site.objects},
        {(U, V): {0: 0} for U in site.objects for V in site.down(U)},
        {U: one for U in site.objects},
        "1",
    )
    rho = {U: {a: 0 for a in A.values[U]} for U in site.objects}
    phi = {U: {(0, a): a for a in A.values[U]} for U in site.objects}
    return CrossedGroupSheaf(A, Pi, rho, phi, f"({A.name},1)")


def int_crossed(site: FiniteSite, A: Presheaf) -> CrossedGroupSheaf:
    """(A, Int(A)) with rho = int and phi = application of automorphisms.

    A section of Int(A) over U is recorded by its inner automorphism on every
    A(V), V <= U; this is A(U) modulo the sections that are central everywhere
    below U.
    """
    below = {U: [V for V in site.top_down if site.le(V, U)] for U in site.objects}
    ints = {V: inner_automorphisms(A.group(V))[1] for V in site.objects}

    def int_family(U, a):
        return tuple(ints[V][A.restrict(U, V, a)] for V in below[U])

    values, groups, rho = {}, {}, {}
    for U in site.objects:
        rho[U] = {a: int_family(U, a) for a in A.values[U]}
        values[U] = tuple(dict.fromkeys(rho[U][a] for a in A.values[U]))

        def mul(p, q):
            return tuple(tuple(x[i] for i in y) for x, y in zip(p, q))

        groups[U] = FiniteGroup.from_function(values[U], mul, f"Int({A.name})({U})")
    res = {}
    for U in site.objects:
        for V in site.down(U):
            keep = [below[U].index(W) for W in below[V]]
            res[U, V] = {p: tuple(p[i] for i in keep) for p in values[U]}
    Pi = Presheaf(site, values, res, groups, f"Int({A.name})")
    if not check_sheaf(site, Pi, "minimal").ok:
        raise NotImplementedError("Int(A) presheaf is not a sheaf on this site")
    phi = {}
    for U in site.objects:
        G = A.group(U)
        phi[U] = {(p, a): G.elements[p[0][G.index[a]]] for p in values[U] for a in A.values[U]}
    return CrossedGroupSheaf(A, Pi, rho, phi, f"({A.name},Int({A.name}))")


def normal_subsheaf_crossed(Phi: CrossedGroupSheaf, B: Presheaf, incl: dict, name: str = "") -> tuple:
    """Restrict Phi to a Pi-stable normal subsheaf B -> A; returns (Phi_B, inclusion morphism)."""
    site = Phi.site
    rho = {U: {b: Phi.rho[U][incl[U][b]] for b in B.values[U]} for U in site.objects}
    back = {U: {a: b for b, a in incl[U].items()} for U in site.objects}
    phi = {
        U: {(p, b): back[U][Phi.act(U, p, incl[U][b])] for p in Phi.Pi.values[U] for b in B.values[U]}
        for U in site.objects
    }
    sub = CrossedGroupSheaf(B, Phi.Pi, rho, phi, name or f"({B.name},{Phi.Pi.name})")
    return sub, CrossedMorphism(sub, Phi, incl, identity_map(Phi.Pi))


def identity_morphism(Phi: CrossedGroupSheaf) -> CrossedMorphism:
    return CrossedMorphism(Phi, Phi, identity_map(Phi.A), identity_map(Phi.Pi), "id")


def compose(m2: CrossedMorphism, m1: CrossedMorphism) -> CrossedMorphism:
    return CrossedMorphism(
        m1.source, m2.target, compose_maps(m2.f, m1.f), compose_maps(m2.varphi, m1.varphi),
        f"{m2.name}o{m1.name}",
    )


# -- checks

def _hom_failure(site, P, Q, m):
    for U in site.objects:
        G, H = P.group(U), Q.group(U)
        for x in G:
            for y in G:
                if m[U][G.mul(x, y)] != H.mul(m[U][x], m[U][y]):
                    return (U, x, y)
    return None


def _natural_failure(site, P, Q, m):
    for U in site.objects:
        for V in site.down(U):
            for x in P.values[U]:
                if m[V][P.restrict(U, V, x)] != Q.restrict(U, V, m[U][x]):
                    return (U, V, x)
    return None


def check_crossed(site: FiniteSite, Phi: CrossedGroupSheaf, check_sheaves: bool = True) -> Report:
    rep = Report("check-crossed")
    A, Pi = Phi.A, Phi.Pi
    if check_sheaves:
        rep.add("A is a sheaf of groups", check_presheaf(A).ok and check_sheaf(site, A, "minimal").ok)
        rep.add("Pi is a sheaf of groups", check_presheaf(Pi).ok and check_sheaf(site, Pi, "minimal").ok)
    rep.add("rho is a homomorphism", (w := _hom_failure(site, A, Pi, Phi.rho)) is None, w)
    rep.add("rho commutes with restriction", (w := _natural_failure(site, A, Pi, Phi.rho)) is None, w)
    bad = None
    for U in site.objects:
        G, P = A.group(U), Pi.group(U)
        for p in P:
            for a in G:
                for b in G:
                    if Phi.act(U, p, G.mul(a, b)) != G.mul(Phi.act(U, p, a), Phi.act(U, p, b)):
                        bad = bad or ("not by automorphisms", U, p, a, b)
            for q in P:
                for a in G:
                    if Phi.act(U, P.mul(p, q), a) != Phi.act(U, p, Phi.act(U, q, a)):
                        bad = bad or ("not an action", U, p, q, a)
        for a in G:
            if Phi.act(U, P.identity, a) != a:
                bad = bad or ("identity acts nontrivially", U, a)
    rep.add("phi is a left action by automorphisms", bad is None, bad)
    bad = None
    for U in site.objects:
        for V in site.down(U):
            for p in Pi.values[U]:
                for a in A.values[U]:
                    lhs = A.restrict(U, V, Phi.act(U, p, a))
                    rhs = Phi.act(V, Pi.restrict(U, V, p), A.restrict(U, V, a))
                    if lhs != rhs:
                        bad = bad or (U, V, p, a)
    rep.add("phi commutes with restriction", bad is None, bad)
    bad = None
    for U in site.objects:
        G, P = A.group(U), Pi.group(U)
        for p in P:
            for a in G:
                if Phi.rho[U][Phi.act(U, p, a)] != P.conj(p, Phi.rho[U][a]):
                    bad = bad or {"object": U, "pi": p, "a": a}
    rep.add("equivariance rho(pi.a) = pi rho(a) pi^-1", bad is None, bad)
    bad = None
    for U in site.objects:
        G = A.group(U)
        for a in G:
            for b in G:
                if Phi.act(U, Phi.rho[U][a], b) != G.conj(a, b):
                    bad = bad or {"object": U, "a": a, "b": b}
    rep.add("Peiffer rho(a).b = a b a^-1", bad is None, bad)
    return rep


def check_crossed_morphism(site: FiniteSite, m: CrossedMorphism) -> Report:
    rep = Report("check-crossed-morphism")
    S, T = m.source, m.target
    rep.add("f is a homomorphism", (w := _hom_failure(site, S.A, T.A, m.f)) is None, w)
    rep.add("varphi is a homomorphism", (w := _hom_failure(site, S.Pi, T.Pi, m.varphi)) is None, w)
    rep.add("f is natural", (w := _natural_failure(site, S.A, T.A, m.f)) is None, w)
    rep.add("varphi is natural", (w := _natural_failure(site, S.Pi, T.Pi, m.varphi)) is None, w)
    bad = None
    for U in site.objects:
        for a in S.A.values[U]:
            if T.rho[U][m.f[U][a]] != m.varphi[U][S.rho[U][a]]:
                bad = bad or {"object": U, "a": a}
    rep.add("rho' o f = varphi o rho", bad is None, bad)
    bad = None
    for U in site.objects:
        for p in S.Pi.values[U]:
            for a in S.A.values[U]:
                if m.f[U][S.act(U, p, a)] != T.act(U, m.varphi[U][p], m.f[U][a]):
                    bad = bad or {"object": U, "pi": p, "a": a}
    rep.add("f(pi.a) = varphi(pi).f(a)", bad is None, bad)
    return rep


def locally_surjective(site: FiniteSite, P: Presheaf, Q: Presheaf, m: dict) -> Optional[tuple]:
    """None if every section of Q lifts locally along m, else a witness (U, y)."""
    images = {U: set(m[U].values()) for U in site.objects}
    for U in site.objects:
        for y in Q.values[U]:
            if y in images[U]:
                continue
            fams = site.covers[U]
            if not any(all(Q.restrict(U, M, y) in images[M] for M in fam) for fam in fams):
                return (U, y)
    return None


def check_short_exact(site: FiniteSite, seq: ShortExactCrossedSeq) -> Report:
    rep = Report("check-short-exact")
    rep.extend(check_crossed_morphism(site, seq.first), "(f,phi): ")
    rep.extend(check_crossed_morphism(site, seq.second), "(h,psi): ")
    A, A1, A2 = seq.Phi.A, seq.Phi1.A, seq.Phi2.A
    f, h = seq.first.f, seq.second.f
    bad = [U for U in site.objects if len(set(f[U].values())) != len(A.values[U])]
    rep.add("f injective", not bad, bad)
    bad = None
    for U in site.objects:
        e2 = A2.group(U).identity
        ker = {x for x in A1.values[U] if h[U][x] == e2}
        img = set(f[U].values())
        if ker != img:
            # compare as sheaves: every kernel element must be locally in the image
            for k in ker - img:
                if not any(all(A1.restrict(U, M, k) in set(f[M].values()) for M in fam) for fam in site.covers[U]):
                    bad = bad or {"object": U, "kernel element": k}
            if img - ker:
                bad = bad or {"object": U, "image outside kernel": sorted(img - ker, key=repr)[0]}
    rep.add("image(f) = kernel(h)", bad is None, bad)
    rep.add("h epimorphism (locally surjective)", (w := locally_surjective(site, A1, A2, h)) is None, w)
    P, P1 = seq.Phi.Pi, seq.Phi1.Pi
    bad = [U for U in site.objects if len(set(seq.first.varphi[U].values())) != len(P1.values[U])
           or len(P.values[U]) != len(P1.values[U])]
    rep.add("phi isomorphism", not bad, bad)
    rep.add(
        "psi epimorphism (locally surjective)",
        (w := locally_surjective(site, P1, seq.Phi2.Pi, seq.second.varphi)) is None,
        w,
    )
    return rep
