import itertools
import random

import pytest

from crossedcohom.crossed import abelian_crossed, int_crossed
from crossedcohom.gerbes import (
    CocycleError,
    CocycleSpace,
    Cocycle2,
    apply_coboundary,
    cocycles_equivalent,
    core_subcover,
    h2_classes,
    unit_cocycle,
    validate_cocycle,
)
from crossedcohom.groups import cyclic, symmetric
from crossedcohom.report import BoundExceeded
from crossedcohom.sheaf import constant_sheaf
from crossedcohom.site import Cover, point_site, pseudo_circle, tetra_sphere

CIRCLE2 = Cover("abcd", ("abc", "abd"))


def s3_int(site):
    return int_crossed(site, constant_sheaf(site, symmetric(3)))


# -- label-level oracle, written from the cocycle and coboundary formulas


class Naive:
    def __init__(self, site, Phi, cover):
        self.site, self.Phi, self.cover = site, Phi, cover
        self.U = cover.members
        self.n = len(self.U)

    def meet(self, *ix):
        return self.site.meet(*(self.U[i] for i in ix))

    def rA(self, src, dst, x):
        return self.Phi.A.restrict(src, dst, x)

    def rP(self, src, dst, x):
        return self.Phi.Pi.restrict(src, dst, x)

    def is_cocycle(self, c):
        A, P, Phi = self.Phi.A, self.Phi.Pi, self.Phi
        for i, j, k in itertools.product(range(self.n), repeat=3):
            W = self.meet(i, j, k)
            if W is None:
                continue
            G = P.group(W)
            lhs = Phi.rho[W][c.a[i, j, k]]
            pij = self.rP(self.meet(i, j), W, c.pi[i, j])
            pjk = self.rP(self.meet(j, k), W, c.pi[j, k])
            pik = self.rP(self.meet(i, k), W, c.pi[i, k])
            if lhs != G.prod(pij, pjk, G.inv(pik)):
                return False
        for i, j, k, l in itertools.product(range(self.n), repeat=4):
            W = self.meet(i, j, k, l)
            if W is None:
                continue
            G = A.group(W)

            def a(*t):
                return self.rA(self.meet(*t), W, c.a[t])

            pij = self.rP(self.meet(i, j), W, c.pi[i, j])
            if G.mul(a(i, j, k), a(i, k, l)) != G.mul(Phi.act(W, pij, a(j, k, l)), a(i, j, l)):
                return False
        return True

    def act(self, c, d):
        A, P, Phi = self.Phi.A, self.Phi.Pi, self.Phi
        tw, pi = {}, {}
        for (i, j), x in c.pi.items():
            W = self.meet(i, j)
            G = P.group(W)
            bi, bj = self.rP(self.U[i], W, d.b[i]), self.rP(self.U[j], W, d.b[j])
            tw[i, j] = G.prod(bi, x, G.inv(bj))
            pi[i, j] = G.mul(Phi.rho[W][d.beta[i, j]], tw[i, j])
        a = {}
        for (i, j, k), x in c.a.items():
            W = self.meet(i, j, k)
            G = A.group(W)
            be = {p: self.rA(self.meet(*p), W, d.beta[p]) for p in ((i, j), (j, k), (i, k))}
            t = self.rP(self.meet(i, j), W, tw[i, j])
            bi = self.rP(self.U[i], W, d.b[i])
            a[i, j, k] = G.prod(be[i, j], Phi.act(W, t, be[j, k]), Phi.act(W, bi, x), G.inv(be[i, k]))
        return Cocycle2(c.cover, pi, a)


def all_candidates(space):
    """Every assignment of values to pairs and triples."""
    pis = [range(len(space.GP[space.pair_obj[p]])) for p in space.pairs]
    as_ = [range(len(space.GA[space.triple_obj[t]])) for t in space.triples]
    for x in itertools.product(*pis):
        for y in itertools.product(*as_):
            yield (x, y)


CASES = [
    ("pt-S3", point_site, s3_int, None),
    ("pt-Z4", point_site, lambda s: abelian_crossed(s, cyclic(4)), None),
    ("circle-Z2", pseudo_circle, lambda s: abelian_crossed(s, cyclic(2)), CIRCLE2),
]


@pytest.mark.parametrize("name,make_site,make_phi,cover", CASES, ids=[c[0] for c in CASES])
def test_enumeration_matches_brute_force(name, make_site, make_phi, cover):
    site = make_site()
    Phi = make_phi(site)
    cover = cover or site.minimal_basis_cover()
    space = CocycleSpace(site, Phi, cover)
    naive = Naive(site, Phi, cover)
    brute = {k for k in all_candidates(space) if naive.is_cocycle(space.to_cocycle(k))}
    assert set(space.enumerate()) == brute
    assert all(space.failure(k) is None for k in brute)


@pytest.mark.parametrize("name,make_site,make_phi,cover", CASES, ids=[c[0] for c in CASES])
def test_orbits_match_all_coboundary_data(name, make_site, make_phi, cover):
    site = make_site()
    Phi = make_phi(site)
    cover = cover or site.minimal_basis_cover()
    space = CocycleSpace(site, Phi, cover)
    data = [space.data_key(d) for d in space.all_data()]
    for key in space.enumerate()[:20]:
        brute = {space.apply_idx(key, d) for d in data}
        assert set(space.orbit(key)) == brute


@pytest.mark.parametrize("name,make_site,make_phi,cover", CASES, ids=[c[0] for c in CASES])
def test_action_matches_formula_and_composes(name, make_site, make_phi, cover):
    site = make_site()
    Phi = make_phi(site)
    cover = cover or site.minimal_basis_cover()
    space = CocycleSpace(site, Phi, cover)
    naive = Naive(site, Phi, cover)
    rng = random.Random(3)
    keys = space.enumerate()
    for _ in range(30):
        c = space.to_cocycle(rng.choice(keys))
        d1, d2 = space.random_data(rng), space.random_data(rng)
        c1 = apply_coboundary(site, Phi, c, d1)
        assert c1 == naive.act(c, d1)
        assert naive.is_cocycle(c1)
        both = apply_coboundary(site, Phi, c1, d2)
        assert both == apply_coboundary(site, Phi, c, space.compose_data(d2, d1))
        assert apply_coboundary(site, Phi, c, space.identity_data()) == c


@pytest.mark.parametrize(
    "make_site,make_phi,cover",
    [(point_site, s3_int, None), (pseudo_circle, lambda s: abelian_crossed(s, cyclic(4)), CIRCLE2)],
    ids=["pt-S3", "circle-Z4"],
)
def test_equivalence_witness_is_correct(make_site, make_phi, cover):
    site = make_site()
    Phi = make_phi(site)
    cover = cover or site.minimal_basis_cover()
    space = CocycleSpace(site, Phi, cover)
    rng = random.Random(5)
    c = unit_cocycle(site, Phi, cover)
    for _ in range(5):
        d = space.random_data(rng)
        c2 = apply_coboundary(site, Phi, c, d)
        ok, w = cocycles_equivalent(site, Phi, c, c2)
        assert ok
        assert apply_coboundary(site, Phi, c, w) == c2


def test_non_cocycle_is_rejected():
    site = point_site()
    Phi = s3_int(site)
    c = unit_cocycle(site, Phi, site.minimal_basis_cover())
    P = Phi.Pi.group(site.top)
    g = next(x for x in P if x != P.identity)
    # rho(a) = 1 but pi pi pi^-1 = pi != 1
    bad = Cocycle2(c.cover, {p: g for p in c.pi}, dict(c.a))
    assert validate_cocycle(site, Phi, bad)["condition"] == "C1"
    with pytest.raises(CocycleError):
        apply_coboundary(site, Phi, bad, CocycleSpace(site, Phi, c.cover).identity_data())


def test_core_subcover_drops_contained_members():
    site = pseudo_circle()
    cover = site.minimal_basis_cover()
    core, tau = core_subcover(site, cover)
    assert [cover.members[i] for i in core] == ["abc", "abd"]
    assert all(site.le(cover.members[i], cover.members[core[t]]) for i, t in enumerate(tau))


@pytest.mark.parametrize("G", [cyclic(2), cyclic(3), cyclic(4)], ids=lambda g: g.name)
def test_h2_trivial_on_fixture_sites(G):
    for site in (point_site(), pseudo_circle()):
        H = h2_classes(site, abelian_crossed(site, G))
        assert len(H) == 1
        assert H.classes[0].is_unit and H.classes[0].is_neutral


def test_h2_independent_of_cover_refinement():
    site = pseudo_circle()
    Phi = s3_int(site)
    for cover in (site.minimal_basis_cover(), CIRCLE2, Cover("abcd", ("abcd",))):
        assert len(h2_classes(site, Phi, cover)) == 1


def test_h2_of_tetrahedron_sphere_with_z2():
    # H^2(S^2; Z/2) = Z/2 over the cover by the four closed faces
    site = tetra_sphere()
    Phi = abelian_crossed(site, cyclic(2))
    H = h2_classes(site, Phi, Cover("top", ("sabc", "sabd", "sacd", "sbcd")))
    assert len(H) == 2
    assert [c.is_neutral for c in H.classes] == [True, False]
    assert H.neutral_witness(1) is None
    assert H.classify(H.classes[1].representative) == 1


def test_bound_refusal():
    site = pseudo_circle()
    with pytest.raises(BoundExceeded):
        h2_classes(site, s3_int(site), bound=100)
