"""Independent oracles: abelian Cech cohomology, nonabelian Cech H^1, and the
comparison of (A, Int(A)) classes with Giraud-style cocycles (lambda, g)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from .crossed import abelian_crossed, int_crossed
from .gerbes import Cocycle2, h2_classes
from .report import DEFAULT_BOUND, BoundExceeded, Report
from .sheaf import Presheaf
from .site import EMPTY, Cover, FiniteSite


class OracleError(ValueError):
    pass


# -- modular Smith reduction over Z/p^e

def _factor(n: int) -> list:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def _val(x: int, p: int, e: int) -> int:
    """p-adic valuation of x in Z/p^e (e for zero)."""
    x %= p ** e
    if x == 0:
        return e
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def smith_local(M: np.ndarray, p: int, e: int):
    """Smith form of M over Z/p^e.

    Returns (vals, U, Vinv) with U M V diagonal, diagonal entries p^vals[i]
    times a unit (vals has min(rows, cols) entries, e meaning zero).
    """
    q = p ** e
    A = np.array(M, dtype=np.int64) % q
    m, n = A.shape
    U = np.eye(m, dtype=np.int64)
    Vinv = np.eye(n, dtype=np.int64)
    vals = []
    for t in range(min(m, n)):
        sub = A[t:, t:]
        nz = np.argwhere(sub != 0)
        if nz.size == 0:
            vals.extend([e] * (min(m, n) - t))
            break
        best, bv = None, e + 1
        for i, j in nz:
            v = _val(int(sub[i, j]), p, e)
            if v < bv:
                best, bv = (i + t, j + t), v
                if v == 0:
                    break
        i, j = best
        if i != t:
            A[[t, i]] = A[[i, t]]
            U[[t, i]] = U[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
            Vinv[[t, j]] = Vinv[[j, t]]
        piv = int(A[t, t])
        unit = piv // p ** bv
        uinv = pow(unit, -1, q)
        A[t] = (A[t] * uinv) % q
        U[t] = (U[t] * uinv) % q
        g = p ** bv
        # clear column t
        col = A[:, t].copy()
        col[t] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            c = (col[rows] // g) % q
            A[rows] = (A[rows] - np.outer(c, A[t])) % q
            U[rows] = (U[rows] - np.outer(c, U[t])) % q
        # clear row t; column ops act on Vinv by the inverse row ops
        row = A[t].copy()
        row[t] = 0
        cols = np.nonzero(row)[0]
        if cols.size:
            c = (row[cols] // g) % q
            A[:, cols] = (A[:, cols] - np.outer(A[:, t], c)) % q
            Vinv[t] = (Vinv[t] + c @ Vinv[cols]) % q
        vals.append(bv)
    return vals, U, Vinv


@dataclass
class _LocalH:
    p: int
    e: int
    kernel_vals: list
    Vinv: np.ndarray
    rel_vals: list
    U_rel: np.ndarray

    @property
    def invariants(self) -> list:
        return sorted(self.p ** w for w in self.rel_vals if w > 0)


def _local_cohomology(Din: np.ndarray, Dout: np.ndarray, p: int, e: int) -> _LocalH:
    """ker(Dout) / im(Din) over Z/p^e."""
    q = p ** e
    g = Dout.shape[1]
    if Dout.shape[0] == 0:
        vals_out, Vinv = [], np.eye(g, dtype=np.int64)
    else:
        vals_out, _, Vinv = smith_local(Dout, p, e)
    vals_out = list(vals_out) + [e] * (g - len(vals_out))
    # kernel ~ sum of Z/p^v_i with generator p^(e - v_i) V e_i
    coords = _kernel_coords(Din % q, Vinv, vals_out, p, e)
    k = len(vals_out)
    rel = np.concatenate([np.diag([p ** v % q for v in vals_out]).astype(np.int64), coords], axis=1)
    rel_vals, U_rel, _ = smith_local(rel, p, e)
    rel_vals = list(rel_vals) + [e] * (k - len(rel_vals))
    # a zero relation value on a coordinate of order p^v means Z/p^v, capped by the diagonal
    return _LocalH(p, e, vals_out, Vinv, rel_vals, U_rel)


def _kernel_coords(Y: np.ndarray, Vinv, vals, p, e):
    """Coordinates of kernel vectors (columns of Y) on the kernel generators."""
    q = p ** e
    Z = (Vinv @ (Y % q)) % q
    out = np.zeros_like(Z)
    for i, v in enumerate(vals):
        s = p ** (e - v)
        if np.any(Z[i] % s):
            raise OracleError("vector is not in the kernel")
        out[i] = (Z[i] // s) % (p ** v)
    return out


@dataclass
class AbelianCech:
    """Cech complex of an abelian group sheaf over a cover, on all ordered tuples.

    Every A(W) must be free over Z/n for a single n; sections are encoded by
    coordinate vectors on a chosen basis.
    """

    site: FiniteSite
    A: Presheaf
    cover: Cover
    n: int
    tuples: dict = field(default_factory=dict)
    offsets: dict = field(default_factory=dict)
    dims: dict = field(default_factory=dict)
    basis: dict = field(default_factory=dict)
    coords: dict = field(default_factory=dict)
    D: dict = field(default_factory=dict)

    @classmethod
    def build(cls, site: FiniteSite, A: Presheaf, cover: Cover, top_degree: int = 3) -> "AbelianCech":
        objs = list(site.objects)
        for W in objs:
            if not A.group(W).is_abelian():
                raise OracleError(f"A({W}) is not abelian")
        n = 1
        for W in objs:
            for x in A.values[W]:
                n = np.lcm(n, A.group(W).order_of(x))
        C = cls(site, A, cover, int(n))
        U = cover.members
        for p in range(top_degree + 1):
            ts = [t for t in product(range(len(U)), repeat=p + 1) if site.meet(*(U[i] for i in t)) is not EMPTY]
            C.tuples[p] = ts
            off, k = {}, 0
            for t in ts:
                W = site.meet(*(U[i] for i in t))
                C._present(W)
                off[t] = k
                k += len(C.basis[W])
            C.offsets[p], C.dims[p] = off, k
        for p in range(top_degree):
            C.D[p] = C._differential(p)
        return C

    def obj(self, t):
        return self.site.meet(*(self.cover.members[i] for i in t))

    def _present(self, W):
        if W in self.basis:
            return
        G = self.A.group(W)
        n, size = self.n, len(G)
        c = 0
        while n ** c < size:
            c += 1
        if n ** c != size:
            raise OracleError(f"A({W}) has order {size}, not a power of {n}")
        for gens in product(G.elements, repeat=c):
            table = {}
            for coeffs in product(range(n), repeat=c):
                x = G.identity
                for g, k in zip(gens, coeffs):
                    x = G.mul(x, G.power(g, k))
                table.setdefault(x, coeffs)
            if len(table) == size:
                self.basis[W] = gens
                self.coords[W] = table
                return
        raise OracleError(f"A({W}) is not free over Z/{n}")

    def vector(self, p: int, values: dict) -> np.ndarray:
        v = np.zeros(self.dims[p], dtype=np.int64)
        for t in self.tuples[p]:
            W = self.obj(t)
            o = self.offsets[p][t]
            for k, c in enumerate(self.coords[W][values[t]]):
                v[o + k] = c
        return v % self.n

    def _differential(self, p: int) -> np.ndarray:
        M = np.zeros((self.dims[p + 1], self.dims[p]), dtype=np.int64)
        for tau in self.tuples[p + 1]:
            W = self.obj(tau)
            o_tau = self.offsets[p + 1][tau]
            for j in range(p + 2):
                sigma = tau[:j] + tau[j + 1:]
                V = self.obj(sigma)
                o_sig = self.offsets[p][sigma]
                sign = -1 if j % 2 else 1
                for k, g in enumerate(self.basis[V]):
                    for r, c in enumerate(self.coords[W][self.A.restrict(V, W, g)]):
                        M[o_tau + r, o_sig + k] += sign * c
        return M % self.n

    def dd_zero(self) -> bool:
        return all(
            not np.any((self.D[p + 1] @ self.D[p]) % self.n) for p in range(len(self.D) - 1)
        )

    def _locals(self, p: int) -> list:
        key = ("H", p)
        if key not in self.__dict__:
            Din = self.D[p - 1] if p > 0 else np.zeros((self.dims[0], 0), dtype=np.int64)
            self.__dict__[key] = [
                _local_cohomology(Din, self.D[p], q, e) for q, e in _factor(self.n)
            ]
        return self.__dict__[key]

    def cohomology(self, p: int) -> "FiniteAbelian":
        inv = []
        for L in self._locals(p):
            inv.extend(L.invariants)
        return FiniteAbelian(sorted(inv), {q: self.dims[q] for q in self.dims})

    def class_of(self, p: int, v: np.ndarray) -> tuple:
        """Canonical coordinates of the class of a cocycle vector."""
        out = []
        for L in self._locals(p):
            q = L.p ** L.e
            c = _kernel_coords((v % q).reshape(-1, 1), L.Vinv, L.kernel_vals, L.p, L.e)[:, 0]
            z = (L.U_rel @ c) % q
            out.extend(int(z[i]) % (L.p ** w) for i, w in enumerate(L.rel_vals) if w > 0)
        return tuple(out)


@dataclass
class FiniteAbelian:
    invariants: list
    dims: dict

    @property
    def order(self) -> int:
        r = 1
        for d in self.invariants:
            r *= d
        return r

    def __repr__(self):
        if not self.invariants:
            return "0"
        return " + ".join(f"Z/{d}" for d in self.invariants)


def abelian_cech(site: FiniteSite, A: Presheaf, cover: Optional[Cover] = None, degree: int = 2) -> FiniteAbelian:
    cover = cover or site.minimal_basis_cover()
    C = AbelianCech.build(site, A, cover, degree + 1)
    if not C.dd_zero():
        raise OracleError("d o d != 0")
    return C.cohomology(degree)


def abelian_cech_h2(site, A, cover=None) -> FiniteAbelian:
    return abelian_cech(site, A, cover, 2)


def abelian_cech_h1(site, A, cover=None) -> FiniteAbelian:
    return abelian_cech(site, A, cover, 1)


def compare_abelian(site: FiniteSite, G, cover: Optional[Cover] = None, bound: int = DEFAULT_BOUND) -> Report:
    """Crossed H2 of (A, 1) against the Cech oracle, as groups.

    ``G`` is an abelian FiniteGroup (constant coefficients).
    """
    cover = cover or site.minimal_basis_cover()
    rep = Report("compare-abelian")
    Phi = abelian_crossed(site, G)
    A = Phi.A
    C = AbelianCech.build(site, A, cover, 3)
    rep.add("oracle d o d = 0", C.dd_zero(), None)
    H = C.cohomology(2)
    classes = h2_classes(site, Phi, cover, bound)
    rep.add("cardinalities agree", len(classes) == H.order, {"crossed": len(classes), "oracle": H.order})
    vec = lambda c: C.vector(2, c.a)
    oracle = [C.class_of(2, vec(c.representative)) for c in classes.classes]
    rep.add("class map injective", len(set(oracle)) == len(oracle), oracle)
    space = classes.space
    bad = None
    for i, ci in enumerate(classes.classes):
        for j, cj in enumerate(classes.classes):
            k1, k2 = space.key(ci.representative), space.key(cj.representative)
            prod_a = tuple(space.mA[space.triple_obj[t]][x][y] for t, x, y in zip(space.triples, k1[1], k2[1]))
            prod = space.to_cocycle((k1[0], prod_a))
            lhs = classes.classify(prod)
            rhs = C.class_of(2, (vec(ci.representative) + vec(cj.representative)) % C.n)
            if oracle[lhs] != rhs:
                bad = bad or {"classes": (i, j)}
    rep.add("class map is a homomorphism", bad is None, bad)
    rep.data.update({"crossed_classes": len(classes), "oracle": repr(H), "dims": C.dims})
    return rep


# -- nonabelian Cech H^1

def cech_h1(site: FiniteSite, G: Presheaf, cover: Cover, bound: int = DEFAULT_BOUND) -> list:
    """Classes of cocycles g_ij (g_ij g_jk = g_ik) modulo g_ij -> b_i g_ij b_j^-1.

    Returns one representative per class.
    """
    U = cover.members
    n = len(U)
    pairs = [(i, j) for i in range(n) for j in range(n) if site.meet(U[i], U[j]) is not EMPTY]
    obj = {p: site.meet(U[p[0]], U[p[1]]) for p in pairs}
    triples = [t for t in product(range(n), repeat=3) if site.meet(*(U[i] for i in t)) is not EMPTY]
    pos = {p: k for k, p in enumerate(pairs)}
    checks = {}
    for t in triples:
        i, j, k = t
        checks.setdefault(max(pos[i, j], pos[j, k], pos[i, k]), []).append(t)

    def ok(g, t):
        i, j, k = t
        W = site.meet(U[i], U[j], U[k])
        r = lambda p: G.restrict(obj[p], W, g[p])
        return G.group(W).mul(r((i, j)), r((j, k))) == r((i, k))

    cocycles = []
    count = [0]

    def go(s, g):
        if s == len(pairs):
            cocycles.append(tuple(g[p] for p in pairs))
            return
        p = pairs[s]
        for x in G.values[obj[p]]:
            count[0] += 1
            if count[0] > bound:
                raise BoundExceeded("Cech 1-cochains", count[0], bound)
            g[p] = x
            if all(ok(g, t) for t in checks.get(s, ())):
                go(s + 1, g)
        g.pop(p, None)

    go(0, {})

    def act(c, i, b):
        g = dict(zip(pairs, c))
        out = []
        for (x, y) in pairs:
            W = obj[x, y]
            H = G.group(W)
            v = g[x, y]
            if x == i:
                v = H.mul(G.restrict(U[i], W, b), v)
            if y == i:
                v = H.mul(v, H.inv(G.restrict(U[i], W, b)))
            out.append(v)
        return tuple(out)

    moves = [(i, b) for i in range(n) for b in G.group(U[i]).generators()]
    seen, reps = set(), []
    for c in cocycles:
        if c in seen:
            continue
        reps.append(dict(zip(pairs, c)))
        queue = deque([c])
        seen.add(c)
        while queue:
            x = queue.popleft()
            for i, b in moves:
                y = act(x, i, b)
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return reps


# -- Giraud-style cocycles for (A, Int(A))

def giraud_correspondence(site: FiniteSite, A: Presheaf, cover: Optional[Cover] = None, bound: int = DEFAULT_BOUND, sample: int = 200) -> Report:
    """Round trip between (A, Int(A)) cocycles and cocycles (lambda, g).

    lambda_ij is an automorphism of A over U_ij recorded as its permutation of
    every A(V), V <= U_ij; g_ijk lies in A(U_ijk). The Giraud conditions are

        lambda_ij lambda_jk = int(g_ijk) lambda_ik
        g_ijk g_ikl = lambda_ij(g_jkl) g_ijl
    """
    rep = Report("compare-giraud")
    cover = cover or site.minimal_basis_cover()
    Phi = int_crossed(site, A)
    H = h2_classes(site, Phi, cover, bound)
    core = H.core_space
    below = {W: [V for V in site.top_down if site.le(V, W)] for W in site.objects}

    def as_auto(W, pi):
        """The automorphism pi of A|W as a dict V -> permutation of A(V) labels."""
        out = {}
        for V, perm in zip(below[W], pi):
            els = A.group(V).elements
            out[V] = {els[i]: els[perm[i]] for i in range(len(els))}
        return out

    def inner(W, a):
        out = {}
        for V in below[W]:
            G = A.group(V)
            x = A.restrict(W, V, a)
            out[V] = {y: G.conj(x, y) for y in G.elements}
        return out

    def compose_auto(s, t):
        return {V: {y: s[V][t[V][y]] for y in t[V]} for V in t}

    def restrict_auto(s, W):
        return {V: s[V] for V in below[W]}

    def freeze(s):
        return tuple(sorted((V, tuple(sorted(m.items(), key=repr))) for V, m in s.items()))

    def forward(c):
        lam = {p: as_auto(core.pair_obj[p], x) for p, x in c.pi.items()}
        return lam, dict(c.a)

    back_table = {}
    for W in site.objects:
        for pi in Phi.Pi.values[W]:
            back_table[W, freeze(as_auto(W, pi))] = pi

    def backward(lam, g):
        pi = {p: back_table[core.pair_obj[p], freeze(s)] for p, s in lam.items()}
        return Cocycle2(core.cover, pi, dict(g))

    def giraud_failure(lam, g):
        M = core.members
        for (i, j, k) in core.triples:
            W = core.triple_obj[i, j, k]
            lhs = compose_auto(restrict_auto(lam[i, j], W), restrict_auto(lam[j, k], W))
            rhs = compose_auto(inner(W, g[i, j, k]), restrict_auto(lam[i, k], W))
            if freeze(lhs) != freeze(rhs):
                return {"law": "lambda", "triple": (i, j, k)}
        for (i, j, k, l) in core.quads:
            W = core.quad_obj[i, j, k, l]
            G = A.group(W)
            r = lambda t: A.restrict(core.triple_obj[t], W, g[t])
            lhs = G.mul(r((i, j, k)), r((i, k, l)))
            rhs = G.mul(restrict_auto(lam[i, j], W)[W][r((j, k, l))], r((i, j, l)))
            if lhs != rhs:
                return {"law": "g", "quadruple": (i, j, k, l)}
        return None

    def giraud_apply(lam, g, d):
        """Change of trivialisation on (lambda, g), written with automorphisms only."""
        M = core.members
        b = {i: as_auto(M[i], d.b[i]) for i in d.b}
        lam2, tw = {}, {}
        for (i, j), s in lam.items():
            W = core.pair_obj[i, j]
            bi, bj = restrict_auto(b[i], W), restrict_auto(b[j], W)
            bj_inv = {V: {y: x for x, y in m.items()} for V, m in bj.items()}
            tw[i, j] = compose_auto(compose_auto(bi, s), bj_inv)
            lam2[i, j] = compose_auto(inner(W, d.beta[i, j]), tw[i, j])
        g2 = {}
        for (i, j, k), x in g.items():
            W = core.triple_obj[i, j, k]
            G = A.group(W)
            r = lambda p: A.restrict(core.pair_obj[p], W, d.beta[p])
            t1 = restrict_auto(tw[i, j], W)[W][r((j, k))]
            t2 = restrict_auto(b[i], W)[W][x]
            g2[i, j, k] = G.prod(r((i, j)), t1, t2, G.inv(r((i, k))))
        return lam2, g2

    orbit_members = [k for orb in H.orbits for k in orb]
    step = max(1, len(orbit_members) // sample)
    checked = orbit_members[::step]
    moves = core.elementary_data()
    bad_rt = bad_law = bad_eq = None
    for key in checked:
        c = core.to_cocycle(key)
        lam, g = forward(c)
        if bad_law is None and (w := giraud_failure(lam, g)):
            bad_law = {"cocycle": key, **w}
        if backward(lam, g) != c:
            bad_rt = bad_rt or key
        for d in moves:
            lam2, g2 = giraud_apply(lam, g, d)
            if backward(lam2, g2) != core.to_cocycle(core.apply(key, d)):
                bad_eq = bad_eq or {"cocycle": key}
    rep.add("forward images satisfy the Giraud laws", bad_law is None, bad_law)
    rep.add("round trip is the identity", bad_rt is None, bad_rt)
    rep.add("changes of trivialisation correspond", bad_eq is None, bad_eq)
    images = {}
    bad_class = None
    for idx, cls_ in enumerate(H.classes):
        c = core.to_cocycle(cls_.core_key)
        lam, g = forward(c)
        back = H.class_of_key[core.key(backward(lam, g))]
        if back != idx:
            bad_class = bad_class or idx
        images[idx] = freeze_cocycle(lam, g, freeze)
    rep.add("every class returns to itself", bad_class is None, bad_class)
    rep.add("distinct classes have distinct images", len(set(images.values())) == len(H.classes), None)
    rep.data.update({"classes": len(H), "checked_cocycles": len(checked), "moves": len(moves)})
    return rep


def freeze_cocycle(lam, g, freeze):
    return (tuple(sorted((p, freeze(s)) for p, s in lam.items())), tuple(sorted(g.items(), key=repr)))
