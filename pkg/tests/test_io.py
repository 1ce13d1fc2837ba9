import json

import pytest

from crossedcohom import io
from crossedcohom.crossed import check_crossed, int_crossed
from crossedcohom.groups import cyclic, dihedral, direct_product, symmetric
from crossedcohom.sheaf import constant_sheaf
from crossedcohom.site import point_site, pseudo_circle, sphere2, tetra_sphere


@pytest.mark.parametrize("make", [point_site, pseudo_circle, sphere2, tetra_sphere], ids=lambda f: f.__name__)
def test_site_round_trip_is_bit_exact(make, tmp_path):
    site = make()
    text = io.dump_site(site)
    path = tmp_path / "site.json"
    path.write_text(text)
    again = io.load_site(path)
    assert io.dump_site(again) == text
    assert again.objects == site.objects and again.leq == site.leq and again.covers == site.covers


def test_site_from_points_and_opens():
    d = {"name": "pseudo-circle", "points": ["a", "b", "c", "d"], "opens": [[], ["a"], ["b"], ["a", "b"], ["a", "b", "c"], ["a", "b", "d"], ["a", "b", "c", "d"]]}
    site = io.site_from_dict(d)
    assert io.dump_site(site) == io.dump_site(pseudo_circle())


@pytest.mark.parametrize("G", [cyclic(3), symmetric(3), dihedral(4), direct_product(cyclic(2), cyclic(2))], ids=lambda g: g.name)
def test_group_round_trip(G):
    d = json.loads(json.dumps(io.group_to_dict(G)))
    H = io.group_from_dict(d)
    assert H.elements == G.elements and H.table == G.table


def test_group_names():
    assert len(io.group_from_dict("Z5")) == 5
    assert len(io.group_from_dict("S3")) == 6
    assert len(io.group_from_dict({"product": ["Z2", "Z3"]})) == 6
    with pytest.raises(io.FixtureError):
        io.group_from_dict("Q8")


def test_bad_group_table_is_located():
    with pytest.raises(io.FixtureError) as exc:
        io.group_from_dict({"elements": [0, 1], "table": [[0, 1], [0, 1]]}, "g.json")
    assert "g.json" in str(exc.value)


def test_presheaf_and_crossed_round_trip():
    site = pseudo_circle()
    A = constant_sheaf(site, symmetric(3))
    d = json.loads(json.dumps(io.presheaf_to_dict(A)))
    B = io.presheaf_from_dict(site, d)
    assert B.values == A.values and B.res == A.res
    Phi = int_crossed(site, A)
    d = json.loads(json.dumps(io.crossed_to_dict(Phi)))
    Psi = io.crossed_from_dict(site, d)
    assert check_crossed(site, Psi).ok
    assert Psi.rho == Phi.rho and Psi.phi == Phi.phi


def test_missing_restriction_is_reported():
    site = pseudo_circle()
    d = io.presheaf_to_dict(constant_sheaf(site, cyclic(2)))
    d["restrictions"] = d["restrictions"][1:]
    with pytest.raises(io.FixtureError, match="missing restriction"):
        io.presheaf_from_dict(site, d)


def test_malformed_json_reports_line_and_column(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "points": ["a",\n}\n')
    with pytest.raises(io.FixtureError) as exc:
        io.read_json(path)
    assert f"{path}:3:1" in str(exc.value)


def test_unknown_builtin_site():
    with pytest.raises(io.FixtureError, match="unknown site"):
        io.site_from_dict({"builtin": "torus"})
