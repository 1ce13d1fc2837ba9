"""H^0, H^1 and the connecting maps of a short exact sequence of crossed group sheaves."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .action import (
    ActionSheaf,
    classify_torsor,
    extend_group,
    inverse_image_of_section,
    is_torsor,
    torsor_classes,
)
from .crossed import CrossedGroupSheaf, CrossedMorphism, ShortExactCrossedSeq, compose, identity_morphism
from .gerbes import Cocycle2, CocycleError, H2Set, h2_classes, map_h2
from .groups import FiniteGroup
from .report import DEFAULT_BOUND, Report
from .sheaf import Presheaf, global_sections
from .site import Cover, FiniteSite


def _group_sheaf(X) -> Presheaf:
    return X.A if isinstance(X, CrossedGroupSheaf) else X


def h0(site: FiniteSite, X) -> FiniteGroup:
    """Group of global sections of A (or of Phi's A)."""
    A = _group_sheaf(X)
    if site.top is None:
        raise NotImplementedError("global sections need a final object")
    G = A.group(site.top)
    assert set(global_sections(site, A)) == set(G.elements)
    return G


@dataclass
class H1Set:
    """Isomorphism classes of A-torsors; index 0 is the trivial class."""

    group: Presheaf
    reps: list

    def __len__(self):
        return len(self.reps)

    def classify(self, site, X: ActionSheaf) -> int:
        return classify_torsor(site, X, self.reps)


def h1(site: FiniteSite, X, bound: int = DEFAULT_BOUND) -> H1Set:
    A = _group_sheaf(X)
    return H1Set(A, torsor_classes(site, A, bound))


def map_h0(site, f: dict, x):
    return f[site.top][x]


def map_h1(site: FiniteSite, f: dict, source: H1Set, target: H1Set, idx: int) -> int:
    """Class of the torsor obtained by extending the structure group along f."""
    X, _ = extend_group(site, source.reps[idx], source.group, target.group, f)
    return target.classify(site, X)


def coboundary1(site: FiniteSite, seq: ShortExactCrossedSeq, s, H1A: Optional[H1Set] = None) -> int:
    """Class of the A-torsor h^-1(s) for a global section s of A''."""
    X = coboundary1_torsor(site, seq, s)
    H1A = H1A or h1(site, seq.Phi)
    return H1A.classify(site, X)


def coboundary1_torsor(site: FiniteSite, seq: ShortExactCrossedSeq, s) -> ActionSheaf:
    A, A1, A2 = seq.Phi.A, seq.Phi1.A, seq.Phi2.A
    f, h = seq.first.f, seq.second.f
    act = {
        U: {(x, a): A1.group(U).mul(x, f[U][a]) for x in A1.values[U] for a in A.values[U]}
        for U in site.objects
    }
    X = ActionSheaf(A1, A, act, False, "A' over A")
    fibre = inverse_image_of_section(site, X, h, A2, s)
    rep = is_torsor(site, fibre)
    if not rep.ok:
        raise CocycleError(f"fibre over {s!r} is not a torsor: {rep.failures()}")
    return fibre


def _pointed_exact(rep: Report, name: str, image: set, kernel: set):
    rep.add(
        name,
        image == kernel,
        None if image == kernel else {"image": sorted(image, key=repr), "kernel": sorted(kernel, key=repr)},
    )


def verify_low_exactness(site: FiniteSite, seq: ShortExactCrossedSeq, bound: int = DEFAULT_BOUND) -> Report:
    """Exactness of 1 -> H0(A) -> H0(A') -> H0(A'') -> H1(A) -> H1(A') -> H1(A'')."""
    rep = Report("low-degree exactness")
    top = site.top
    A, A1, A2 = seq.Phi.A, seq.Phi1.A, seq.Phi2.A
    f, h = seq.first.f, seq.second.f
    G, G1, G2 = h0(site, A), h0(site, A1), h0(site, A2)
    fx = {x: f[top][x] for x in G}
    hx = {x: h[top][x] for x in G1}
    rep.add("H0(A) -> H0(A') injective", len(set(fx.values())) == len(G), None)
    _pointed_exact(rep, "exact at H0(A')", set(fx.values()), {x for x in G1 if hx[x] == G2.identity})
    HA, HA1, HA2 = h1(site, A, bound), h1(site, A1, bound), h1(site, A2, bound)
    d = {s: coboundary1(site, seq, s, HA) for s in G2}
    _pointed_exact(rep, "exact at H0(A'')", set(hx.values()), {s for s in G2 if d[s] == 0})
    f1 = {i: map_h1(site, f, HA, HA1, i) for i in range(len(HA))}
    h1m = {i: map_h1(site, h, HA1, HA2, i) for i in range(len(HA1))}
    _pointed_exact(rep, "exact at H1(A)", set(d.values()), {i for i in f1 if f1[i] == 0})
    _pointed_exact(rep, "exact at H1(A')", set(f1.values()), {i for i in h1m if h1m[i] == 0})
    rep.data.update({
        "H0": [len(G), len(G1), len(G2)],
        "H1": [len(HA), len(HA1), len(HA2)],
        "coboundary": {repr(s): i for s, i in d.items()},
    })
    return rep


# -- second coboundary

def coboundary2(
    site: FiniteSite,
    seq: ShortExactCrossedSeq,
    P: ActionSheaf,
    cover: Optional[Cover] = None,
    rng: Optional[random.Random] = None,
) -> Cocycle2:
    """A 2-cocycle of Phi measuring the obstruction to lifting the A''-torsor P to A'.

    Sections s_i of P over the cover give transitions s_j = s_i g_ij; lifting
    g_ij to a'_ij in A' yields pi_ij = phi^-1(rho'(a'_ij)) and
    a_ijk = f^-1(a'_ij a'_jk a'_ik^-1). ``rng`` randomises all choices.
    """
    cover = cover or site.minimal_basis_cover()
    Phi, Phi1 = seq.Phi, seq.Phi1
    A1 = Phi1.A
    f, h, varphi = seq.first.f, seq.second.f, seq.first.varphi
    U = cover.members
    pick = (lambda xs: rng.choice(list(xs))) if rng else (lambda xs: list(xs)[0])
    sections = []
    for M in U:
        vals = P.values(M)
        if not vals:
            raise CocycleError(f"torsor has no section over cover member {M!r}; refine the cover")
        sections.append(pick(vals))
    n = len(U)
    lift = {}
    for i in range(n):
        for j in range(n):
            W = site.meet(U[i], U[j])
            if W is None:
                continue
            si = P.restrict(U[i], W, sections[i])
            sj = P.restrict(U[j], W, sections[j])
            g = [x for x in P.group.values[W] if P.act(W, si, x) == sj]
            if len(g) != 1:
                raise CocycleError(f"action is not free and transitive over {W!r}")
            pre = [x for x in A1.values[W] if h[W][x] == g[0]]
            if not pre:
                raise CocycleError(f"transition over {W!r} does not lift; refine the cover")
            lift[i, j] = pick(pre)
    vinv = {W: {y: x for x, y in m.items()} for W, m in varphi.items()}
    finv = {W: {y: x for x, y in m.items()} for W, m in f.items()}
    pi, a = {}, {}
    for (i, j), x in lift.items():
        W = site.meet(U[i], U[j])
        pi[i, j] = vinv[W][Phi1.rho[W][x]]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                W = site.meet(U[i], U[j], U[k])
                if W is None:
                    continue
                G1 = A1.group(W)
                r = lambda p: A1.restrict(site.meet(U[p[0]], U[p[1]]), W, lift[p])
                y = G1.prod(r((i, j)), r((j, k)), G1.inv(r((i, k))))
                if y not in finv[W]:
                    raise CocycleError(f"a'_ij a'_jk a'_ik^-1 leaves the kernel over {W!r}")
                a[i, j, k] = finv[W][y]
    return Cocycle2(cover, pi, a)


@dataclass
class SequenceCohomology:
    """All pointed sets and maps of the long sequence, computed on one cover."""

    H1_1: H1Set
    H1_2: H1Set
    H2: H2Set
    H2_1: H2Set
    H2_2: H2Set
    h1_map: dict
    d: dict
    f2: dict
    h2: dict


def sequence_cohomology(site: FiniteSite, seq: ShortExactCrossedSeq, cover: Optional[Cover] = None, bound: int = DEFAULT_BOUND) -> SequenceCohomology:
    cover = cover or site.minimal_basis_cover()
    H1_1, H1_2 = h1(site, seq.Phi1, bound), h1(site, seq.Phi2, bound)
    H2, H2_1, H2_2 = (h2_classes(site, X, cover, bound) for X in (seq.Phi, seq.Phi1, seq.Phi2))
    h1_map = {i: map_h1(site, seq.second.f, H1_1, H1_2, i) for i in range(len(H1_1))}
    d = {p: H2.classify(coboundary2(site, seq, H1_2.reps[p], cover)) for p in range(len(H1_2))}
    f2 = {x: map_h2(site, seq.first, H2, H2_1, x) for x in range(len(H2))}
    h2 = {x: map_h2(site, seq.second, H2_1, H2_2, x) for x in range(len(H2_1))}
    return SequenceCohomology(H1_1, H1_2, H2, H2_1, H2_2, h1_map, d, f2, h2)


def verify_exact_h2(site: FiniteSite, seq: ShortExactCrossedSeq, cover: Optional[Cover] = None, bound: int = DEFAULT_BOUND) -> Report:
    """Exactness of H1(A') -> H1(A'') -> H2(Phi) -> H2(Phi') -> H2(Phi'').

    - p lies in the image of H1(A') iff d(p) is neutral;
    - x lies in the image of d iff its image in H2(Phi') is the unit;
    - y lies in the image of H2(Phi) iff its image in H2(Phi'') is neutral.
    """
    rep = Report("exactness in degree two")
    C = sequence_cohomology(site, seq, cover, bound)
    image_h1 = set(C.h1_map.values())
    bad = [p for p in C.d if (p in image_h1) != C.H2.is_neutral(C.d[p])]
    rep.add("lifts iff coboundary neutral", not bad, bad or None)
    image_d = set(C.d.values())
    unit1 = C.H2_1.unit
    bad = [x for x in C.f2 if (x in image_d) != (C.f2[x] == unit1)]
    rep.add("image of coboundary = kernel of f", not bad, bad or None)
    image_f = set(C.f2.values())
    bad = [y for y in C.h2 if (y in image_f) != C.H2_2.is_neutral(C.h2[y])]
    rep.add("image of f = neutral preimage under h", not bad, bad or None)
    rep.data.update({
        "H1": [len(C.H1_1), len(C.H1_2)],
        "H2": [len(C.H2), len(C.H2_1), len(C.H2_2)],
        "neutral": [sum(c.is_neutral for c in H.classes) for H in (C.H2, C.H2_1, C.H2_2)],
        "coboundary": C.d,
        "f": C.f2,
        "h": C.h2,
    })
    return rep


def _squares_commute(site, top: CrossedMorphism, bottom: CrossedMorphism, left: CrossedMorphism, right: CrossedMorphism):
    """right o top == bottom o left, on both A and Pi components."""
    a = compose(right, top)
    b = compose(bottom, left)
    for U in site.objects:
        if a.f[U] != b.f[U]:
            return {"object": U, "component": "A"}
        if a.varphi[U] != b.varphi[U]:
            return {"object": U, "component": "Pi"}
    return None


def verify_naturality(
    site: FiniteSite,
    seq: ShortExactCrossedSeq,
    seq2: ShortExactCrossedSeq,
    m: CrossedMorphism,
    m1: CrossedMorphism,
    m2: CrossedMorphism,
    cover: Optional[Cover] = None,
    bound: int = DEFAULT_BOUND,
) -> Report:
    """Every square between the two long cohomology sequences commutes.

    (m, m1, m2) map seq to seq2; both coboundary squares are included.
    """
    rep = Report("naturality")
    cover = cover or site.minimal_basis_cover()
    w1 = _squares_commute(site, seq.first, seq2.first, m, m1)
    w2 = _squares_commute(site, seq.second, seq2.second, m1, m2)
    rep.add("coefficient square (f)", w1 is None, w1)
    rep.add("coefficient square (h)", w2 is None, w2)
    if w1 or w2:
        return rep
    top = site.top

    def square(name, domain, right_then_down, down_then_right):
        bad = [x for x in domain if right_then_down(x) != down_then_right(x)]
        rep.add(name, not bad, bad[:3] or None)

    G, G1, G2 = (h0(site, X) for X in (seq.Phi, seq.Phi1, seq.Phi2))
    square("H0 square (f)", G, lambda x: m1.f[top][seq.first.f[top][x]], lambda x: seq2.first.f[top][m.f[top][x]])
    square("H0 square (h)", G1, lambda x: m2.f[top][seq.second.f[top][x]], lambda x: seq2.second.f[top][m1.f[top][x]])

    T = [h1(site, X, bound) for X in (seq.Phi, seq.Phi1, seq.Phi2)]
    B = [h1(site, X, bound) for X in (seq2.Phi, seq2.Phi1, seq2.Phi2)]
    square(
        "coboundary square in degree one", G2,
        lambda s: map_h1(site, m.f, T[0], B[0], coboundary1(site, seq, s, T[0])),
        lambda s: coboundary1(site, seq2, m2.f[top][s], B[0]),
    )
    square(
        "H1 square (f)", range(len(T[0])),
        lambda x: map_h1(site, m1.f, T[1], B[1], map_h1(site, seq.first.f, T[0], T[1], x)),
        lambda x: map_h1(site, seq2.first.f, B[0], B[1], map_h1(site, m.f, T[0], B[0], x)),
    )
    square(
        "H1 square (h)", range(len(T[1])),
        lambda x: map_h1(site, m2.f, T[2], B[2], map_h1(site, seq.second.f, T[1], T[2], x)),
        lambda x: map_h1(site, seq2.second.f, B[1], B[2], map_h1(site, m1.f, T[1], B[1], x)),
    )
    TH = [h2_classes(site, X, cover, bound) for X in (seq.Phi, seq.Phi1, seq.Phi2)]
    BH = [h2_classes(site, X, cover, bound) for X in (seq2.Phi, seq2.Phi1, seq2.Phi2)]
    square(
        "coboundary square in degree two", range(len(T[2])),
        lambda p: map_h2(site, m, TH[0], BH[0], TH[0].classify(coboundary2(site, seq, T[2].reps[p], cover))),
        lambda p: BH[0].classify(coboundary2(site, seq2, B[2].reps[map_h1(site, m2.f, T[2], B[2], p)], cover)),
    )
    square(
        "H2 square (f)", range(len(TH[0])),
        lambda x: map_h2(site, m1, TH[1], BH[1], map_h2(site, seq.first, TH[0], TH[1], x)),
        lambda x: map_h2(site, seq2.first, BH[0], BH[1], map_h2(site, m, TH[0], BH[0], x)),
    )
    square(
        "H2 square (h)", range(len(TH[1])),
        lambda x: map_h2(site, m2, TH[2], BH[2], map_h2(site, seq.second, TH[1], TH[2], x)),
        lambda x: map_h2(site, seq2.second, BH[1], BH[2], map_h2(site, m1, TH[1], BH[1], x)),
    )
    rep.data.update({
        "H1": [[len(H) for H in T], [len(H) for H in B]],
        "H2": [[len(H) for H in TH], [len(H) for H in BH]],
    })
    return rep


def verify_functoriality(site: FiniteSite, m1: CrossedMorphism, m2: CrossedMorphism, cover: Optional[Cover] = None, bound: int = DEFAULT_BOUND) -> Report:
    """(m2 o m1)_* = m2_* o m1_* and id_* = id on H2 and H1."""
    rep = Report("functoriality")
    cover = cover or site.minimal_basis_cover()
    Hs = [h2_classes(site, X, cover, bound) for X in (m1.source, m1.target, m2.target)]
    m21 = compose(m2, m1)
    bad = [
        x for x in range(len(Hs[0]))
        if map_h2(site, m21, Hs[0], Hs[2], x) != map_h2(site, m2, Hs[1], Hs[2], map_h2(site, m1, Hs[0], Hs[1], x))
    ]
    rep.add("H2: (m2 o m1)_* = m2_* o m1_*", not bad, bad or None)

    bad = [x for x in range(len(Hs[0])) if map_h2(site, identity_morphism(m1.source), Hs[0], Hs[0], x) != x]
    rep.add("H2: id_* = id", not bad, bad or None)
    H1s = [h1(site, X, bound) for X in (m1.source, m1.target, m2.target)]
    bad = [
        x for x in range(len(H1s[0]))
        if map_h1(site, m21.f, H1s[0], H1s[2], x)
        != map_h1(site, m2.f, H1s[1], H1s[2], map_h1(site, m1.f, H1s[0], H1s[1], x))
    ]
    rep.add("H1: (m2 o m1)_* = m2_* o m1_*", not bad, bad or None)
    rep.data.update({"H2": [len(H) for H in Hs], "H1": [len(H) for H in H1s]})
    return rep
