import itertools

from hypothesis import given, settings
from hypothesis import strategies as st

from crossedcohom.action import find_sheaf_iso
from crossedcohom.groups import cyclic, symmetric
from crossedcohom.sheaf import (
    Presheaf,
    check_presheaf,
    check_sheaf,
    constant_presheaf,
    constant_sheaf,
    glue,
    global_sections,
    sheafify,
)
from crossedcohom.site import discrete2, point_site, pseudo_circle, sphere2


def _sub_presheaf(site, S, seed_sets):
    """Smallest subpresheaf of U -> S^points(U) containing the seed sections."""
    pts = {U: sorted(site.points[U]) for U in site.objects}
    vals = {U: set(seed_sets[U]) for U in site.objects}
    for U in site.top_down:
        for V in site.down(U):
            idx = [pts[U].index(x) for x in pts[V]]
            vals[V] |= {tuple(s[i] for i in idx) for s in vals[U]}
    values = {U: tuple(sorted(vals[U])) for U in site.objects}
    res = {}
    for U in site.objects:
        for V in site.down(U):
            idx = [pts[U].index(x) for x in pts[V]]
            res[U, V] = {s: tuple(s[i] for i in idx) for s in values[U]}
    return Presheaf(site, values, res)


def _local_closure_sizes(site, S, P):
    """Oracle: sections of S^points(U) whose restriction to each minimal open lies in P."""
    out = {}
    for U in site.objects:
        pts = sorted(site.points[U])
        n = 0
        for s in itertools.product(S, repeat=len(pts)):
            val = dict(zip(pts, s))
            ok = True
            for x in pts:
                M = site.minimal_open(x)
                t = tuple(val[y] for y in sorted(site.points[M]))
                if t not in set(P.values[M]):
                    ok = False
                    break
            n += ok
        out[U] = n
    return out


@st.composite
def seeded(draw):
    site = draw(st.sampled_from([pseudo_circle(), discrete2()]))
    S = (0, 1)
    seeds = {}
    for U in site.objects:
        k = len(site.points[U])
        allf = list(itertools.product(S, repeat=k))
        seeds[U] = draw(st.lists(st.sampled_from(allf), max_size=3))
    return site, S, seeds


@settings(max_examples=40, deadline=None)
@given(seeded())
def test_sheafify_matches_local_closure(case):
    site, S, seeds = case
    P = _sub_presheaf(site, S, seeds)
    assert check_presheaf(P).ok
    aP, unit = sheafify(site, P)
    expect = _local_closure_sizes(site, S, P)
    assert {U: len(aP.values[U]) for U in site.objects} == expect
    assert check_sheaf(site, aP).ok
    is_sheaf = all(len(P.values[U]) == expect[U] for U in site.objects)
    assert check_sheaf(site, P).ok == is_sheaf


@settings(max_examples=15, deadline=None)
@given(seeded())
def test_sheafify_is_idempotent(case):
    site, S, seeds = case
    aP, _ = sheafify(site, _sub_presheaf(site, S, seeds))
    aaP, unit = sheafify(site, aP)
    assert find_sheaf_iso(site, aP, aaP) is not None
    # on a sheaf the unit is a bijection
    assert all(len(set(unit[U].values())) == len(aP.values[U]) == len(aaP.values[U]) for U in site.objects)


def test_constant_presheaf_is_not_a_sheaf_on_disconnected_space():
    site = discrete2()
    P = constant_presheaf(site, cyclic(3))
    rep = check_sheaf(site, P)
    assert not rep.ok
    aP, _ = sheafify(site, P)
    assert len(aP.values[site.top]) == 9
    assert find_sheaf_iso(site, aP, constant_sheaf(site, cyclic(3))) is not None


def test_constant_sheaf_global_sections_count_components():
    for site, comps in ((point_site(), 1), (pseudo_circle(), 1), (sphere2(), 1), (discrete2(), 2)):
        for G in (cyclic(2), symmetric(3)):
            A = constant_sheaf(site, G)
            assert check_sheaf(site, A).ok
            assert len(global_sections(site, A)) == len(G) ** comps


def test_glue_returns_unique_section():
    site = pseudo_circle()
    A = constant_sheaf(site, cyclic(4))
    fam = ("abc", "abd")
    for s in A.values[site.top]:
        parts = [A.restrict(site.top, M, s) for M in fam]
        assert glue(site, A, site.top, fam, parts) == s


def test_constant_presheaf_on_pseudo_circle_fails_on_ab():
    site = pseudo_circle()
    P = constant_presheaf(site, cyclic(2))
    rep = check_sheaf(site, P)
    assert not rep.ok
    bad = rep.failures()[0]
    assert bad.name == "gluing over ab"
    assert bad.witness["cover"] == ("a", "b")
    aP, unit = sheafify(site, P)
    assert len(aP.values["ab"]) == 4


def test_quotient_examples():
    from crossedcohom.action import right_translation, trivial_group_action
    from crossedcohom.groups import subgroup
    from crossedcohom.sheaf import quotient_sheaf

    site = pseudo_circle()
    Z4 = cyclic(4)
    A = constant_sheaf(site, Z4)
    X = right_translation(site, A)
    Q, _ = quotient_sheaf(site, A, A, X.act)
    assert all(len(Q.values[U]) == 1 for U in site.objects)
    T = trivial_group_action(site, A)
    Q, _ = quotient_sheaf(site, A, T.group, T.act)
    assert find_sheaf_iso(site, Q, A) is not None
    # Z/2 in Z/4 acting by translation: 2-element stalks over the connected opens
    H = constant_sheaf(site, subgroup(Z4, [0, 2]))
    Q, q = quotient_sheaf(site, A, H, lambda U, x, h: A.group(U).mul(x, h))
    assert len(Q.values[site.top]) == 2
    assert len(Q.values["ab"]) == 4


def test_final_sheaf_and_discrete_sections():
    from crossedcohom.sheaf import final_sheaf

    site = pseudo_circle()
    assert len(global_sections(site, final_sheaf(site))) == 1
    d = discrete2()
    aP, _ = sheafify(d, constant_presheaf(d, cyclic(2)))
    assert len(global_sections(d, aP)) == 4


def test_unit_naturality():
    from crossedcohom.crossed import stalkwise_map
    from crossedcohom.sheaf import is_natural, sheafify_map

    site = pseudo_circle()
    P, Q = constant_presheaf(site, cyclic(4)), constant_presheaf(site, cyclic(2))
    m = {U: {x: x % 2 for x in P.values[U]} for U in site.objects}
    assert is_natural(site, m, P, Q)
    aP, uP = sheafify(site, P)
    aQ, uQ = sheafify(site, Q)
    am = sheafify_map(site, m, P, Q)
    for U in site.objects:
        for x in P.values[U]:
            assert am[U][uP[U][x]] == uQ[U][m[U][x]]
