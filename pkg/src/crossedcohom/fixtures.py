"""Standard coefficient data: short exact sequences and a morphism between two of them."""

from __future__ import annotations

from .crossed import (
    CrossedGroupSheaf,
    CrossedMorphism,
    ShortExactCrossedSeq,
    abelian_crossed,
    identity_morphism,
    int_crossed,
    normal_subsheaf_crossed,
    stalkwise_map,
)
from .groups import cyclic, direct_product, subgroup, symmetric
from .sheaf import constant_sheaf
from .site import FiniteSite


def _to_single(P_src, P_tgt) -> dict:
    """The map to a sheaf with one section over every object."""
    return {U: {x: P_tgt.values[U][0] for x in P_src.values[U]} for U in P_src.site.objects}


def abelian_morphism(site: FiniteSite, Phi: CrossedGroupSheaf, Psi: CrossedGroupSheaf, g: dict, name: str = "") -> CrossedMorphism:
    """(A, 1) -> (B, 1) induced by a homomorphism g: A -> B of stalks."""
    return CrossedMorphism(Phi, Psi, stalkwise_map(Phi.A, g), _to_single(Phi.Pi, Psi.Pi), name)


def seq_z2_z4_z2(site: FiniteSite) -> ShortExactCrossedSeq:
    """1 -> Z/2 -> Z/4 -> Z/2 -> 1 with trivial Pi-row."""
    Z2, Z4 = cyclic(2), cyclic(4)
    P, P1, P2 = abelian_crossed(site, Z2), abelian_crossed(site, Z4), abelian_crossed(site, Z2)
    f = abelian_morphism(site, P, P1, {x: 2 * x for x in Z2}, "x->2x")
    h = abelian_morphism(site, P1, P2, {x: x % 2 for x in Z4}, "mod 2")
    return ShortExactCrossedSeq(f, h, "Z2-Z4-Z2")


def seq_z2_z2xz2_z2(site: FiniteSite) -> ShortExactCrossedSeq:
    """1 -> Z/2 -> Z/2 x Z/2 -> Z/2 -> 1, split, with trivial Pi-row."""
    Z2 = cyclic(2)
    V = direct_product(Z2, Z2)
    P, P1, P2 = abelian_crossed(site, Z2), abelian_crossed(site, V), abelian_crossed(site, Z2)
    f = abelian_morphism(site, P, P1, {x: (x, 0) for x in Z2}, "x->(x,0)")
    h = abelian_morphism(site, P1, P2, {v: v[1] for v in V}, "(x,y)->y")
    return ShortExactCrossedSeq(f, h, "Z2-Z2xZ2-Z2")


def sign(p) -> int:
    inv = sum(1 for i in range(len(p)) for j in range(i + 1, len(p)) if p[i] > p[j])
    return inv % 2


def seq_z3_s3_z2(site: FiniteSite) -> ShortExactCrossedSeq:
    """1 -> Z/3 -> S3 -> Z/2 -> 1 with Pi-row Int(S3) -> Int(S3) -> 1."""
    S3 = symmetric(3)
    A3 = subgroup(S3, [p for p in S3 if sign(p) == 0], "Z3")
    A1 = constant_sheaf(site, S3)
    Phi1 = int_crossed(site, A1)
    B = constant_sheaf(site, A3)
    incl = {U: {b: b for b in B.values[U]} for U in site.objects}
    Phi, f = normal_subsheaf_crossed(Phi1, B, incl, "(Z3,Int(S3))")
    Phi2 = abelian_crossed(site, cyclic(2))
    h = CrossedMorphism(
        Phi1, Phi2, stalkwise_map(A1, {p: sign(p) for p in S3}), _to_single(Phi1.Pi, Phi2.Pi), "sign"
    )
    f.name = "incl"
    return ShortExactCrossedSeq(f, h, "Z3-S3-Z2")


def naturality_diagram(site: FiniteSite) -> tuple:
    """A morphism from Z/2 -> Z/2xZ/2 -> Z/2 to Z/2 -> Z/4 -> Z/2.

    Vertical maps: identity on the kernel, (x, y) -> 2x in the middle, zero on
    the quotient. Returns (top, bottom, m, m1, m2).
    """
    top, bot = seq_z2_z2xz2_z2(site), seq_z2_z4_z2(site)
    Z2 = cyclic(2)
    V = direct_product(Z2, Z2)
    m = CrossedMorphism(top.Phi, bot.Phi, stalkwise_map(top.Phi.A, {x: x for x in Z2}), _to_single(top.Phi.Pi, bot.Phi.Pi), "id")
    m1 = abelian_morphism(site, top.Phi1, bot.Phi1, {v: 2 * v[0] for v in V}, "(x,y)->2x")
    m2 = abelian_morphism(site, top.Phi2, bot.Phi2, {x: 0 for x in Z2}, "0")
    return top, bot, m, m1, m2


def identity_diagram(seq: ShortExactCrossedSeq) -> tuple:
    return seq, seq, identity_morphism(seq.Phi), identity_morphism(seq.Phi1), identity_morphism(seq.Phi2)


SEQUENCES = {
    "Z2-Z4-Z2": seq_z2_z4_z2,
    "Z2-Z2xZ2-Z2": seq_z2_z2xz2_z2,
    "Z3-S3-Z2": seq_z3_s3_z2,
}
