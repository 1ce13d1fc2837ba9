"""Group actions on sheaves, torsors and contracted products."""

from __future__ import annotations

from itertools import product
from typing import Iterator, Optional

from .groups import FiniteGroup
from .report import DEFAULT_BOUND, BoundExceeded, Report
from .sheaf import (
    Presheaf,
    SheafError,
    check_sheaf,
    plus_construction,
    quotient_sheaf,
)
from .site import FiniteSite


class ActionSheaf:
    """A sheaf ``carrier`` with a right action of the group sheaf ``group``.

    ``act[U]`` maps (x, g) to x.g. A left action g.x is stored as the right
    action x.g := g^-1.x with ``left=True``.
    """

    def __init__(self, carrier: Presheaf, group: Presheaf, act: dict, left: bool = False, name: str = ""):
        self.carrier = carrier
        self.group = group
        self.act_table = act
        self.left = left
        self.name = name
        self.site = carrier.site

    def __repr__(self):
        return f"ActionSheaf({self.name or self.carrier!r})"

    def act(self, U, x, g):
        return self.act_table[U][x, g]

    def values(self, U):
        return self.carrier.values[U]

    def restrict(self, U, V, x):
        return self.carrier.restrict(U, V, x)

    def orbit(self, U, x) -> set:
        return {self.act(U, x, g) for g in self.group.values[U]}

    def stabilizer(self, U, x) -> frozenset:
        return frozenset(g for g in self.group.values[U] if self.act(U, x, g) == x)


def right_translation(site: FiniteSite, G: Presheaf, name: str = "") -> ActionSheaf:
    act = {U: {(x, g): G.group(U).mul(x, g) for x in G.values[U] for g in G.values[U]} for U in site.objects}
    return ActionSheaf(G, G, act, False, name or f"{G.name}_d")


def left_translation(site: FiniteSite, G: Presheaf) -> ActionSheaf:
    act = {
        U: {(x, g): G.group(U).mul(G.group(U).inv(g), x) for x in G.values[U] for g in G.values[U]}
        for U in site.objects
    }
    return ActionSheaf(G, G, act, True, f"{G.name}_s")


def left_via(site: FiniteSite, F: Presheaf, G: Presheaf, u: dict) -> ActionSheaf:
    """G with F acting on the left through u: f.g = u(f) g."""
    act = {}
    for U in site.objects:
        GU = G.group(U)
        act[U] = {(x, f): GU.mul(GU.inv(u[U][f]), x) for x in G.values[U] for f in F.values[U]}
    return ActionSheaf(G, F, act, True, f"{G.name} via u")


def conjugation_action(site: FiniteSite, A: Presheaf) -> ActionSheaf:
    """A acting on itself on the left by inner automorphisms."""
    act = {}
    for U in site.objects:
        G = A.group(U)
        act[U] = {(x, a): G.conj(G.inv(a), x) for x in A.values[U] for a in A.values[U]}
    return ActionSheaf(A, A, act, True, f"{A.name} by conjugation")


def check_action(site: FiniteSite, X: ActionSheaf) -> Report:
    rep = Report("action")
    bad = None
    for U in site.objects:
        G = X.group.group(U)
        for x in X.values(U):
            if X.act(U, x, G.identity) != x:
                bad = bad or ("identity", U, x)
            for g in G:
                for h in G:
                    if X.act(U, X.act(U, x, g), h) != X.act(U, x, G.mul(g, h)):
                        bad = bad or ("associativity", U, x, g, h)
    rep.add("objectwise right action", bad is None, bad)
    bad = None
    for U in site.objects:
        for V in site.down(U):
            for x in X.values(U):
                for g in X.group.values[U]:
                    lhs = X.restrict(U, V, X.act(U, x, g))
                    rhs = X.act(V, X.restrict(U, V, x), X.group.restrict(U, V, g))
                    if lhs != rhs:
                        bad = bad or (U, V, x, g)
    rep.add("compatible with restrictions", bad is None, bad)
    return rep


def is_torsor(site: FiniteSite, X: ActionSheaf, families: str = "minimal") -> Report:
    """Torsor verdict; on success ``data`` holds a cover of the top with sections."""
    rep = Report("is-torsor")
    rep.extend(check_action(site, X))
    rep.extend(check_sheaf(site, X.carrier, families))
    bad = None
    for U in site.objects:
        P = X.values(U)
        if not P:
            continue
        G = X.group.values[U]
        pairs = {(p, X.act(U, p, g)) for p in P for g in G}
        if len(pairs) != len(P) * len(G) or len(pairs) != len(P) ** 2:
            p = P[0]
            seen = {}
            for g in G:
                seen.setdefault(X.act(U, p, g), []).append(g)
            clash = next((v for v in seen.values() if len(v) > 1), None)
            bad = {"object": U, "point": p, "colliding": clash, "orbit": len(seen), "stalk": len(P)}
            break
    rep.add("(p,g) -> (p,pg) bijective", bad is None, bad)
    top = site.top
    fam = next((f for f in site.covers[top] if all(X.values(M) for M in f)), None)
    rep.add("local sections over a cover of the top", fam is not None, {"object": top})
    if fam is not None:
        rep.data["cover"] = fam
        rep.data["sections"] = tuple(X.values(M)[0] for M in fam)
    return rep


def trivial_torsor(site: FiniteSite, G: Presheaf) -> ActionSheaf:
    return right_translation(site, G)


# -- equivariant maps

def equivariant_maps(site: FiniteSite, X: ActionSheaf, Y: ActionSheaf, objects=None, injective: bool = False) -> Iterator[dict]:
    """All natural G-maps X -> Y (restricted to ``objects``, downward closed).

    Objects are filled bottom-up so naturality prunes each candidate against the
    objects already fixed below it.
    """
    objs = [U for U in reversed(site.top_down) if objects is None or U in objects]
    G = X.group

    def orbit_reps(U):
        reps, seen = [], set()
        for x in X.values(U):
            if x not in seen:
                reps.append(x)
                seen |= X.orbit(U, x)
        return reps

    reps = {U: orbit_reps(U) for U in objs}
    lower = {U: [V for V in objs if V != U and site.le(V, U)] for U in objs}

    def compatible(U, x, y, out):
        return all(out[V][X.restrict(U, V, x)] == Y.restrict(U, V, y) for V in lower[U])

    def extend(U, r, y, f, used, out):
        for g in G.values[U]:
            x, t = X.act(U, r, g), Y.act(U, y, g)
            if x in f:
                if f[x] != t:
                    return False
                continue
            if injective and t in used:
                return False
            if not compatible(U, x, t, out):
                return False
            f[x] = t
            used.add(t)
        return True

    def go(k, out):
        if k == len(objs):
            yield {U: dict(m) for U, m in out.items()}
            return
        yield from pick(objs[k], 0, {}, set(), out, k)

    def pick(U, i, f, used, out, k):
        if i == len(reps[U]):
            out[U] = f
            yield from go(k + 1, out)
            del out[U]
            return
        r = reps[U][i]
        stab = X.stabilizer(U, r)
        for y in Y.values(U):
            if injective and y in used:
                continue
            if not all(Y.act(U, y, s) == y for s in stab):
                continue
            f2, used2 = dict(f), set(used)
            if extend(U, r, y, f2, used2, out):
                yield from pick(U, i + 1, f2, used2, out, k)

    yield from go(0, {})


def find_equivariant_iso(site: FiniteSite, X: ActionSheaf, Y: ActionSheaf) -> Optional[dict]:
    for U in site.objects:
        if len(X.values(U)) != len(Y.values(U)):
            return None
    for m in equivariant_maps(site, X, Y, injective=True):
        if all(len(set(m[U].values())) == len(Y.values(U)) for U in site.objects):
            return m
    return None


def trivial_group_action(site: FiniteSite, P: Presheaf) -> ActionSheaf:
    """P with the trivial group acting; isomorphisms are plain sheaf isomorphisms."""
    from .groups import trivial

    one = trivial()
    G = Presheaf(
        site,
        {U: one.elements for U in site.objects},
        {(U, V): {0: 0} for U in site.objects for V in site.down(U)},
        {U: one for U in site.objects},
        "1",
    )
    act = {U: {(x, 0): x for x in P.values[U]} for U in site.objects}
    return ActionSheaf(P, G, act, False, P.name)


def find_sheaf_iso(site: FiniteSite, P: Presheaf, Q: Presheaf) -> Optional[dict]:
    return find_equivariant_iso(site, trivial_group_action(site, P), trivial_group_action(site, Q))


# -- torsor classification

def torsor_from_transitions(site: FiniteSite, G: Presheaf, support, c: dict, name: str = "") -> ActionSheaf:
    """Torsor with P(U) = G(U) on ``support`` (empty elsewhere), restriction
    x -> c[U, V] * x|V and right translation. ``c`` must be given on all pairs."""
    values = {U: (G.values[U] if U in support else ()) for U in site.objects}
    res = {}
    for U in site.objects:
        for V in site.down(U):
            if U not in support:
                res[U, V] = {}
            elif U == V:
                res[U, V] = {x: x for x in G.values[U]}
            else:
                GV = G.group(V)
                res[U, V] = {x: GV.mul(c[U, V], G.restrict(U, V, x)) for x in G.values[U]}
    carrier = Presheaf(site, values, res, None, name)
    act = {
        U: {(x, g): G.group(U).mul(x, g) for x in values[U] for g in G.values[U]}
        for U in site.objects
    }
    X = ActionSheaf(carrier, G, act, False, name)
    X.support = frozenset(support)
    X.transitions = dict(c)
    return X


def _down_closed_supports(site: FiniteSite) -> list:
    objs = list(site.objects)
    if len(objs) > 20:
        raise BoundExceeded("torsor supports", 2 ** len(objs), 2**20)
    out = []
    for mask in range(1 << len(objs)):
        N = frozenset(U for i, U in enumerate(objs) if mask >> i & 1)
        if not N:
            continue
        if any(V not in N for U in N for V in site.down(U)):
            continue
        if all(any(all(M in N for M in fam) for fam in site.covers[U]) for U in objs):
            out.append(N)
    out.sort(key=lambda N: (-len(N), sorted(objs.index(U) for U in N)))
    return out


def _gauge_tree(site, N):
    edges = site.hasse_edges(N)
    tree = {}
    for U, V in edges:
        tree.setdefault(V, (U, V))
    free = [e for e in edges if tree.get(e[1]) != e]
    return edges, free


def _complete_transitions(site, G, N, edge_c):
    """Extend Hasse-edge transitions to all pairs; None if paths disagree."""
    c = {}
    order = [U for U in site.top_down if U in N]
    for U in order:
        c[U, U] = G.group(U).identity
    for U in order:
        for V in order:
            if V == U or not site.le(V, U):
                continue
            vals = set()
            for W in order:
                if (W, V) in edge_c and site.le(W, U) and (U, W) in c:
                    GV = G.group(V)
                    vals.add(GV.mul(edge_c[W, V], G.restrict(W, V, c[U, W])))
            if len(vals) != 1:
                return None
            c[U, V] = vals.pop()
    return c


def _torsor_iso(site, G, X, Y) -> bool:
    """Left-multiplication isomorphism between two transition-form torsors."""
    if X.support != Y.support:
        return False
    N = X.support
    order = [U for U in site.top_down if U in N]
    roots = [U for U in order if not any(W != U and site.le(U, W) for W in N)]
    for hs in product(*(G.values[R] for R in roots)):
        h = dict(zip(roots, hs))
        ok = True
        for U in order:
            for W in order:
                if W == U or not site.le(U, W) or W not in h:
                    continue
                GU = G.group(U)
                val = GU.prod(Y.transitions[W, U], G.restrict(W, U, h[W]), GU.inv(X.transitions[W, U]))
                if h.setdefault(U, val) != val:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


def torsor_classes(site: FiniteSite, G: Presheaf, bound: int = DEFAULT_BOUND) -> list:
    """Representatives of the G-torsors up to isomorphism; the trivial one first."""
    supports = _down_closed_supports(site)
    plan = []
    total = 0
    for N in supports:
        edges, free = _gauge_tree(site, N)
        size = 1
        for _, V in free:
            size *= len(G.values[V])
        total += size
        plan.append((N, edges, free))
    if total > bound:
        raise BoundExceeded("torsor candidates", total, bound)
    reps = []
    for N, edges, free in plan:
        for choice in product(*(G.values[V] for _, V in free)):
            edge_c = {e: G.group(e[1]).identity for e in edges}
            edge_c.update(zip(free, choice))
            c = _complete_transitions(site, G, N, edge_c)
            if c is None:
                continue
            X = torsor_from_transitions(site, G, N, c, f"P{len(reps)}")
            if not check_sheaf(site, X.carrier, "minimal").ok:
                continue
            if any(_torsor_iso(site, G, X, Y) for Y in reps):
                continue
            reps.append(X)
    return reps


def classify_torsor(site: FiniteSite, X: ActionSheaf, reps: list) -> int:
    """Index of the representative isomorphic to X."""
    for i, Y in enumerate(reps):
        if find_equivariant_iso(site, X, Y) is not None:
            return i
    raise SheafError("torsor matches no representative")


# -- contracted products

def _product_presheaf(site, P: Presheaf, Q: Presheaf) -> Presheaf:
    values = {U: tuple(product(P.values[U], Q.values[U])) for U in site.objects}
    res = {
        (U, V): {(p, q): (P.restrict(U, V, p), Q.restrict(U, V, q)) for p, q in values[U]}
        for U in site.objects for V in site.down(U)
    }
    return Presheaf(site, values, res, None, f"{P.name}x{Q.name}")


def plus_action(site, P: Presheaf, H: Presheaf, act) -> dict:
    """Transport a right action act(U, x, h) on P to the plus construction P+."""
    P1, _ = plus_construction(site, P)
    gens = {U: site.minimal_family(U) for U in site.objects}
    table = {}
    for U in site.objects:
        table[U] = {
            (f, h): tuple(act(M, x, H.restrict(U, M, h)) for M, x in zip(gens[U], f))
            for f in P1.values[U] for h in H.values[U]
        }
    return P1, table


def contracted_product(site: FiniteSite, P: ActionSheaf, Q: ActionSheaf, residual=None, residual_side: str = "Q"):
    """P ^G Q for P a right G-sheaf and Q a left G-sheaf (stored right).

    Without ``residual`` the result is a sheaf of sets. With ``residual`` an
    ActionSheaf on the carrier of Q (``residual_side="Q"``) or of P, commuting
    with the G-actions, the result carries the induced right action.
    """
    if P.group is not Q.group and P.group.values != Q.group.values:
        raise SheafError("contracted product over different groups")
    if not Q.left:
        raise SheafError("second factor must carry a left action")
    G = P.group
    X = _product_presheaf(site, P.carrier, Q.carrier)

    def diag(U, x, g):
        return (P.act(U, x[0], g), Q.act(U, x[1], g))

    C, q = quotient_sheaf(site, X, G, diag)
    if residual is None:
        return C, q
    H = residual.group

    def act0(U, x, h):
        if residual_side == "Q":
            return (x[0], residual.act(U, x[1], h))
        return (residual.act(U, x[0], h), x[1])

    # objectwise orbit representatives, as produced by quotient_sheaf
    orbit_rep = {}
    for U in site.objects:
        rep = {}
        for x in X.values[U]:
            if x not in rep:
                for g in G.values[U]:
                    rep.setdefault(diag(U, x, g), x)
        orbit_rep[U] = rep
    values0 = {U: tuple(dict.fromkeys(orbit_rep[U][x] for x in X.values[U])) for U in site.objects}
    res0 = {
        (U, V): {r: orbit_rep[V][X.restrict(U, V, r)] for r in values0[U]}
        for U in site.objects for V in site.down(U)
    }
    Q0 = Presheaf(site, values0, res0)

    def act_q0(U, r, h):
        return orbit_rep[U][act0(U, r, h)]

    Q1, t1 = plus_action(site, Q0, H, act_q0)
    Q2, t2 = plus_action(site, Q1, H, lambda U, f, h: t1[U][f, h])
    return ActionSheaf(Q2, H, t2, residual.left, f"{P.name}^{Q.name}"), q


def extend_group(site: FiniteSite, P: ActionSheaf, F: Presheaf, G: Presheaf, u: dict) -> tuple:
    """^uP = P ^F G_d; returns the right G-torsor and the map P -> ^uP."""
    Gl = left_via(site, F, G, u)
    Gd = right_translation(site, G)
    X, q = contracted_product(site, P, Gl, residual=Gd, residual_side="Q")
    adj = {U: {p: q[U][p, G.group(U).identity] for p in P.values(U)} for U in site.objects}
    X.name = f"^u{P.name}"
    return X, adj


def pushforward_torsor(site, P: ActionSheaf, F: Presheaf, G: Presheaf, u: dict) -> ActionSheaf:
    return extend_group(site, P, F, G, u)[0]


def adjoint_group(site: FiniteSite, P: ActionSheaf) -> Presheaf:
    """Sheaf of equivariant automorphisms of the torsor P."""
    objs = {U: [V for V in site.top_down if site.le(V, U)] for U in site.objects}
    values, groups = {}, {}
    for U in site.objects:
        auts = []
        for m in equivariant_maps(site, P, P, objects=set(objs[U]), injective=True):
            if all(len(set(m[V].values())) == len(P.values(V)) for V in objs[U]):
                auts.append(tuple(tuple(m[V][x] for x in P.values(V)) for V in objs[U]))
        values[U] = tuple(auts)

        def mul(a, b, U=U):
            # (a*b)(x) = a(b(x))
            out = []
            for k, V in enumerate(objs[U]):
                idx = {x: i for i, x in enumerate(P.values(V))}
                out.append(tuple(a[k][idx[y]] for y in b[k]))
            return tuple(out)

        groups[U] = FiniteGroup.from_function(values[U], mul, f"ad({U})")
    res = {}
    for U in site.objects:
        for V in site.down(U):
            keep = [objs[U].index(W) for W in objs[V]]
            res[U, V] = {a: tuple(a[i] for i in keep) for a in values[U]}
    return Presheaf(site, values, res, groups, f"ad({P.name})")


def inverse_image_of_section(site: FiniteSite, X: ActionSheaf, q: dict, Y: Presheaf, s) -> ActionSheaf:
    """Fibre q^-1(s) of q: X -> Y over a global section s of Y, with X's action.

    ``s`` is either an element of Y(top) or a dict object -> section.
    """
    top = site.top
    if not isinstance(s, dict):
        if not Y.contains(top, s):
            raise SheafError(f"{s!r} is not a section of {Y.name or 'the quotient'}")
        s = {U: Y.restrict(top, U, s) for U in site.objects}
    for U in site.objects:
        for V in site.down(U):
            if Y.restrict(U, V, s[U]) != s[V]:
                raise SheafError(f"family is not a section: {U} -> {V}")
    values = {U: tuple(x for x in X.values(U) if q[U][x] == s[U]) for U in site.objects}
    res = {(U, V): {x: X.restrict(U, V, x) for x in values[U]} for U in site.objects for V in site.down(U)}
    carrier = Presheaf(site, values, res, None, "fibre")
    act = {
        U: {(x, g): X.act(U, x, g) for x in values[U] for g in X.group.values[U]}
        for U in site.objects
    }
    for U in site.objects:
        if any(y not in set(values[U]) for y in act[U].values()):
            raise SheafError(f"the action does not preserve the fibre over {U}")
    return ActionSheaf(carrier, X.group, act, X.left, "fibre")
