import itertools

import pytest

from crossedcohom.site import (
    Cover,
    FiniteSite,
    SiteError,
    build_poset_site,
    discrete2,
    is_covering_family,
    point_site,
    pseudo_circle,
    site_from_opens,
    sphere2,
    tetra_sphere,
    validate_site,
)

SITES = [point_site, pseudo_circle, sphere2, discrete2, tetra_sphere]


@pytest.mark.parametrize("make", SITES, ids=lambda f: f.__name__)
def test_fixture_sites_validate(make):
    rep = validate_site(make())
    assert rep.ok, rep.to_text()


def test_object_counts():
    # nonempty opens of each finite space, counted by hand
    assert len(point_site().objects) == 1
    assert len(pseudo_circle().objects) == 6
    assert len(sphere2().objects) == 9
    assert len(tetra_sphere().objects) == 15


def _is_open(opens, S):
    return frozenset(S) in opens


def test_sphere2_opens_are_up_closed_unions():
    # oracle: the opens of the model are exactly the down-sets of the specialisation order
    # generated by the minimal opens, which we recompute by brute force
    site = sphere2()
    pts = sorted(site.points[site.top])
    minimal = {x: site.points[site.minimal_open(x)] for x in pts}
    opens = set()
    for r in range(1, len(pts) + 1):
        for S in itertools.combinations(pts, r):
            if all(minimal[x] <= set(S) for x in S):
                opens.add(frozenset(S))
    assert opens == {frozenset(site.points[U]) for U in site.objects}


def test_meets_are_intersections():
    site = pseudo_circle()
    for U, V in itertools.product(site.objects, repeat=2):
        m = site.meet(U, V)
        inter = site.points[U] & site.points[V]
        if not inter:
            assert m is None
        else:
            assert site.points[m] == inter


def test_covers_match_unions():
    # a family covers U iff the union of its points is U's points
    site = pseudo_circle()
    for U in site.objects:
        below = site.down(U)
        for r in range(1, len(below) + 1):
            for fam in itertools.combinations(below, r):
                union = frozenset().union(*(site.points[M] for M in fam))
                assert is_covering_family(site, Cover(U, fam)) == (union == site.points[U])


def test_minimal_basis_cover():
    site = pseudo_circle()
    cov = site.minimal_basis_cover()
    assert set(cov.members) == {"a", "b", "abc", "abd"}
    assert is_covering_family(site, cov)


def test_build_rejects_non_topology():
    with pytest.raises(SiteError):
        build_poset_site(["a", "b"], [[], ["a"], ["b"]], "not closed")


def test_site_from_opens_rejects_missing_intersection():
    with pytest.raises(SiteError):
        site_from_opens({"U": {"a", "b"}, "V": {"b", "c"}, "X": {"a", "b", "c"}})


def test_broken_order_is_rejected():
    with pytest.raises(SiteError):
        FiniteSite(["U", "V"], {("U", "U"), ("V", "V"), ("U", "V"), ("V", "U")}, {"U": (("U",),), "V": (("V",),)})


def test_bad_covering_family_is_reported():
    leq = {("A", "A"), ("U", "U"), ("A", "U")}
    site = FiniteSite(["A", "U"], leq, {"A": (("A",), ("U",)), "U": (("U",),)})
    rep = validate_site(site)
    assert not rep.ok
    assert "covering families lie below their target" in [c.name for c in rep.failures()]


def test_meet_examples():
    site = pseudo_circle()
    assert site.meet("abc", "abd") == "ab"
    assert site.meet("abc", "abc") == "abc"
    assert site.meet("a", "b") is None


def test_meet_is_associative_and_commutative():
    site = sphere2()
    objs = site.objects
    for U, V in itertools.product(objs, repeat=2):
        assert site.meet(U, V) == site.meet(V, U)
    for U, V, W in itertools.product(objs, repeat=3):
        left = site.meet(U, V)
        right = site.meet(V, W)
        lhs = None if left is None else site.meet(left, W)
        rhs = None if right is None else site.meet(U, right)
        assert lhs == rhs


def test_covering_family_examples():
    site = pseudo_circle()
    assert is_covering_family(site, Cover("abcd", ("abc", "abd")))
    assert not is_covering_family(site, Cover("ab", ("a",)))
    for U in site.objects:
        assert is_covering_family(site, Cover(U, (U,)))


def test_missing_identity_cover_is_reported():
    site = pseudo_circle()
    covers = dict(site.covers)
    # no covering family declared for {a,b}: not even the identity covers it
    covers["ab"] = ()
    broken = FiniteSite(site.objects, site.leq, covers, site.points, "broken")
    rep = validate_site(broken)
    failed = [c for c in rep.failures() if c.name == "identity family covers"]
    assert failed and failed[0].witness == "ab"
