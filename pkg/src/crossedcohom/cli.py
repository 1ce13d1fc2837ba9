"""Command-line driver.

    crossed-cohom <command> key=value ... [--bound N] [--oracle] [--json] [--cover NAME]

Exit status: 0 success, 1 verification failure, 2 input error, 3 bound refusal.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import io
from .cohomology import coboundary1, coboundary2, h0, h1, verify_exact_h2, verify_low_exactness, verify_naturality
from .compare import OracleError, cech_h1, compare_abelian, giraud_correspondence
from .crossed import abelian_crossed, check_crossed, int_crossed, trivial_pi
from .gerbes import CocycleError, h2_classes
from .report import DEFAULT_BOUND, BoundExceeded, Report
from .sheaf import SheafError, check_sheaf
from .site import Cover, SiteError, validate_site

COMMANDS = (
    "validate-site", "check-sheaf", "check-crossed", "h0", "h1", "h2", "coboundary1", "coboundary2",
    "verify-exact", "verify-naturality", "compare-abelian", "compare-giraud",
)


class InputError(ValueError):
    pass


def _parse_params(items) -> dict:
    out = {}
    for it in items:
        if "=" not in it:
            raise InputError(f"expected key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k] = v
    return out


def _source(value: str):
    """A fixture path, or a bare name used as a builtin shorthand."""
    p = Path(value)
    if p.exists():
        return io.read_json(p), str(p)
    return value, value


def _site(params):
    if "site" not in params:
        raise InputError("missing site=<fixture>")
    data, where = _source(params["site"])
    if isinstance(data, str):
        data = {"builtin": data}
    return io.site_from_dict(data, where)


def _group_sheaf(site, params, key="group"):
    if key not in params:
        raise InputError(f"missing {key}=<fixture>")
    data, where = _source(params[key])
    if isinstance(data, str):
        data = {"constant": data}
    return io.presheaf_from_dict(site, data, where)


def _group(params, key="group"):
    if key not in params:
        raise InputError(f"missing {key}=<group>")
    data, where = _source(params[key])
    if isinstance(data, dict) and "constant" in data:
        data = data["constant"]
    return io.group_from_dict(data, where)


def _crossed(site, params):
    if "crossed" in params:
        data, where = _source(params["crossed"])
        if isinstance(data, str):
            raise InputError(f"crossed fixture {data!r} not found")
        return io.crossed_from_dict(site, data, where)
    if "group" in params:
        # shorthand: (A, 1) for abelian A, (A, Int(A)) otherwise
        A = _group_sheaf(site, params)
        if not all(A.group(U).is_abelian() for U in site.objects):
            return int_crossed(site, A)
        try:
            return abelian_crossed(site, _group(params))
        except io.FixtureError:
            return trivial_pi(site, A)
    raise InputError("missing crossed=<fixture> or group=<fixture>")


def _seq(site, params):
    if "seq" not in params:
        raise InputError("missing seq=<fixture>")
    data, where = _source(params["seq"])
    if isinstance(data, str):
        data = Path(data).stem if data.endswith(".json") else data
    return io.sequence_from_dict(site, data, where)


def _cover(site, name):
    if not name or name == "minimal-basis":
        return site.minimal_basis_cover()
    if name == "top-family":
        return Cover(site.top, site.minimal_family(site.top))
    members = tuple(m.strip() for m in name.split(","))
    for m in members:
        if m not in site.objects:
            raise InputError(f"cover member {m!r} is not an object")
    if not site.sieve_covers(site.sieve(members), site.top):
        raise InputError(f"{name!r} does not cover the top object")
    return Cover(site.top, members)


def _bound(args) -> int:
    if args.bound is not None:
        return args.bound
    env = os.environ.get("CROSSED_COHOM_BOUND")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"CROSSED_COHOM_BOUND={env!r} is not an integer") from None
    return DEFAULT_BOUND


def run(args) -> Report:
    params = _parse_params(args.params)
    cmd = args.command
    bound = _bound(args)
    site = _site(params)
    cover = _cover(site, args.cover or params.get("cover"))

    if cmd == "validate-site":
        return validate_site(site)

    if cmd == "check-sheaf":
        P = _group_sheaf(site, params, "sheaf" if "sheaf" in params else "group")
        return check_sheaf(site, P)

    if cmd == "check-crossed":
        return check_crossed(site, _crossed(site, params))

    if cmd == "h0":
        A = _group_sheaf(site, params) if "group" in params else _crossed(site, params).A
        G = h0(site, A)
        rep = Report(f"h0: group of order {len(G)}")
        rep.data.update({"order": len(G), "abelian": G.is_abelian(), "elements": list(G.elements)})
        return rep

    if cmd == "h1":
        A = _group_sheaf(site, params) if "group" in params else _crossed(site, params).A
        H = h1(site, A, bound)
        rep = Report(f"h1: {len(H)} classes")
        rep.data.update({"classes": len(H), "supports": [sorted(getattr(X, "support", ())) for X in H.reps]})
        if args.oracle:
            n = len(cech_h1(site, A, cover, bound))
            rep.add("agrees with Cech H1 over the cover", n == len(H), {"torsors": len(H), "cech": n})
        return rep

    if cmd == "h2":
        Phi = _crossed(site, params)
        H = h2_classes(site, Phi, cover, bound)
        rep = Report(f"h2: {len(H)} classes")
        rep.data.update({
            "cover": list(cover.members),
            "core": [cover.members[i] for i in H.core_index],
            "classes": len(H),
            "neutral": [c.is_neutral for c in H.classes],
            "unit": H.unit,
            "orbit sizes": [c.size for c in H.classes],
        })
        if args.json:
            rep.data["representatives"] = [
                {"pi": {f"{i},{j}": v for (i, j), v in c.representative.pi.items()},
                 "a": {f"{i},{j},{k}": v for (i, j, k), v in c.representative.a.items()}}
                for c in H.classes
            ]
        if args.oracle:
            trivial_pi = all(len(Phi.Pi.values[U]) == 1 for U in site.objects)
            if trivial_pi and "group" in params:
                rep.extend(compare_abelian(site, _group(params), cover, bound), "oracle: ")
            else:
                rep.add("oracle applicable", False, "the abelian oracle needs (A, 1) with constant abelian A")
        return rep

    if cmd == "coboundary1":
        seq = _seq(site, params)
        G2 = h0(site, seq.Phi2)
        s = _element(G2, params.get("s", "0"))
        idx = coboundary1(site, seq, s, h1(site, seq.Phi, bound))
        rep = Report(f"coboundary1: class {idx}")
        rep.data.update({"section": s, "class": idx, "base point": idx == 0})
        return rep

    if cmd == "coboundary2":
        seq = _seq(site, params)
        H1 = h1(site, seq.Phi2, bound)
        p = int(params.get("class", "0"))
        if not 0 <= p < len(H1):
            raise InputError(f"class={p} out of range; H1 has {len(H1)} classes")
        H = h2_classes(site, seq.Phi, cover, bound)
        rng = random.Random(int(params["seed"])) if "seed" in params else None
        idx = H.classify(coboundary2(site, seq, H1.reps[p], cover, rng))
        rep = Report(f"coboundary2: class {idx}")
        rep.data.update({"torsor class": p, "class": idx, "neutral": H.is_neutral(idx), "unit": idx == H.unit})
        return rep

    if cmd == "verify-exact":
        seq = _seq(site, params)
        rep = Report(f"verify-exact {seq.name}")
        rep.extend(verify_low_exactness(site, seq, bound), "degree <= 1: ")
        r2 = verify_exact_h2(site, seq, cover, bound)
        rep.extend(r2, "degree 2: ")
        rep.data.update(r2.data)
        return rep

    if cmd == "verify-naturality":
        if "diagram" not in params:
            raise InputError("missing diagram=<fixture>")
        data, where = _source(params["diagram"])
        return verify_naturality(site, *io.diagram_from_dict(site, data, where), cover=cover, bound=bound)

    if cmd == "compare-abelian":
        return compare_abelian(site, _group(params), cover, bound)

    if cmd == "compare-giraud":
        return giraud_correspondence(site, _group_sheaf(site, params), cover, bound)

    raise InputError(f"unknown command {cmd!r}")


def _element(G, text):
    """Element of G given by its index in G's element order or its JSON label."""
    try:
        label = io.hashable(json.loads(text))
    except json.JSONDecodeError:
        label = text
    if label in G:
        return label
    if isinstance(label, int) and 0 <= label < len(G):
        return G.elements[label]
    raise InputError(f"{text!r} is not an element or element index")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crossed-cohom", description="Nonabelian cohomology with crossed coefficients on finite sites.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("params", nargs="*", help="key=value arguments, e.g. site=pt.json group=Z2")
    ap.add_argument("--bound", type=int, default=None, help="enumeration bound (default: $CROSSED_COHOM_BOUND or 10^7)")
    ap.add_argument("--oracle", action="store_true", help="cross-check against the independent oracles")
    ap.add_argument("--json", action="store_true", help="emit the report as JSON")
    ap.add_argument("--cover", default=None, help="minimal-basis (default), top-family, or comma-separated objects")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        rep = run(args)
    except BoundExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except (InputError, io.FixtureError, SiteError, OracleError, NotImplementedError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (SheafError, CocycleError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps(rep.to_dict(), indent=1, sort_keys=True))
    else:
        print(rep.to_text())
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
