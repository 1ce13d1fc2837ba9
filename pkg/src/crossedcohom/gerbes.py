"""Second cohomology with crossed coefficients, via 2-cocycle descent data.

A class of (A, Pi)-gerbes trivialised over a cover U_1..U_n of the top object
is recorded by pi_ij in Pi(U_ij) and a_ijk in A(U_ijk) subject to

    rho(a_ijk) = pi_ij pi_jk pi_ik^-1                      (C1)
    a_ijk a_ikl = (pi_ij . a_jkl) a_ijl                     (C2)

on all ordered tuples with nonempty meet. Coboundary data (b_i, beta_ij) act by

    pi'_ij  = rho(beta_ij) b_i pi_ij b_j^-1
    a'_ijk  = beta_ij ((b_i pi_ij b_j^-1) . beta_jk) (b_i . a_ijk) beta_ik^-1
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .crossed import CrossedGroupSheaf, CrossedMorphism
from .report import DEFAULT_BOUND, BoundExceeded
from .site import EMPTY, Cover, FiniteSite


class CocycleError(ValueError):
    pass


@dataclass(frozen=True)
class Cocycle2:
    cover: Cover
    pi: dict
    a: dict

    def __eq__(self, other):
        return isinstance(other, Cocycle2) and (self.cover, self.pi, self.a) == (other.cover, other.pi, other.a)

    def __hash__(self):
        return hash((self.cover, tuple(sorted(self.pi.items(), key=repr))))


@dataclass(frozen=True)
class CoboundaryData:
    b: dict
    beta: dict


class CocycleSpace:
    """Index bookkeeping and compiled group arithmetic for 2-cocycles over a cover.

    Internally a cocycle is a key ``(pis, as_)`` of element indices in the order
    of ``pairs`` and ``triples``; coboundary data are ``(b, beta)`` index tuples.
    """

    def __init__(self, site: FiniteSite, Phi: CrossedGroupSheaf, cover: Cover):
        self.site, self.Phi, self.cover = site, Phi, cover
        U = cover.members
        self.n = n = len(U)
        self.members = U
        meet = site.meet
        self.pairs = [(i, j) for i in range(n) for j in range(n) if meet(U[i], U[j]) is not EMPTY]
        self.pair_obj = {p: meet(U[p[0]], U[p[1]]) for p in self.pairs}
        self.triples = [
            (i, j, k) for i in range(n) for j in range(n) for k in range(n)
            if meet(U[i], U[j], U[k]) is not EMPTY
        ]
        self.triple_obj = {t: meet(*(U[x] for x in t)) for t in self.triples}
        self.quads = [
            (i, j, k, l) for i in range(n) for j in range(n) for k in range(n) for l in range(n)
            if meet(U[i], U[j], U[k], U[l]) is not EMPTY
        ]
        self.quad_obj = {q: meet(*(U[x] for x in q)) for q in self.quads}
        self.pidx = {p: i for i, p in enumerate(self.pairs)}
        self.tidx = {t: i for i, t in enumerate(self.triples)}
        self._compile()

    # -- compiled tables

    def _compile(self):
        A, Pi, Phi = self.Phi.A, self.Phi.Pi, self.Phi
        objs = set(self.members) | set(self.pair_obj.values()) | set(self.triple_obj.values()) | set(self.quad_obj.values())
        self.GA = {W: A.group(W) for W in objs}
        self.GP = {W: Pi.group(W) for W in objs}
        self.mA = {W: G.table for W, G in self.GA.items()}
        self.iA = {W: G._inv for W, G in self.GA.items()}
        self.mP = {W: G.table for W, G in self.GP.items()}
        self.iP = {W: G._inv for W, G in self.GP.items()}
        self.rho = {W: [self.GP[W].index[Phi.rho[W][x]] for x in self.GA[W].elements] for W in objs}
        self.act = {
            W: [[self.GA[W].index[Phi.act(W, p, a)] for a in self.GA[W].elements] for p in self.GP[W].elements]
            for W in objs
        }
        self._res = {}

        def rA(U, W):
            return self._table(A, self.GA, U, W)

        def rP(U, W):
            return self._table(Pi, self.GP, U, W)

        M = self.members
        self._pair_ops = []
        for (i, j) in self.pairs:
            W = self.pair_obj[i, j]
            self._pair_ops.append((i, j, rP(M[i], W), rP(M[j], W), self.mP[W], self.iP[W], self.rho[W]))
        self._triple_ops = []
        pidx = self.pidx
        for (i, j, k) in self.triples:
            W = self.triple_obj[i, j, k]
            oij, ojk, oik = self.pair_obj[i, j], self.pair_obj[j, k], self.pair_obj[i, k]
            self._triple_ops.append((
                i, pidx[i, j], pidx[j, k], pidx[i, k],
                rA(oij, W), rA(ojk, W), rA(oik, W),
                rP(oij, W), rP(ojk, W), rP(oik, W), rP(M[i], W),
                self.mA[W], self.iA[W], self.mP[W], self.iP[W], self.act[W], self.rho[W],
            ))
        self._quad_ops = []
        tidx = self.tidx
        for (i, j, k, l) in self.quads:
            W = self.quad_obj[i, j, k, l]
            ts = [(i, j, k), (i, k, l), (j, k, l), (i, j, l)]
            self._quad_ops.append((
                [tidx[t] for t in ts],
                [rA(self.triple_obj[t], W) for t in ts],
                pidx[i, j], rP(self.pair_obj[i, j], W), self.mA[W], self.act[W],
            ))

    def _table(self, P, groups, U, W):
        key = (id(P), U, W)
        if key not in self._res:
            GU, GW = P.group(U), P.group(W)
            self._res[key] = [GW.index[P.restrict(U, W, x)] for x in GU.elements]
        return self._res[key]

    # -- conversions

    def to_cocycle(self, key) -> Cocycle2:
        pis, as_ = key
        pi = {p: self.GP[self.pair_obj[p]].elements[x] for p, x in zip(self.pairs, pis)}
        a = {t: self.GA[self.triple_obj[t]].elements[x] for t, x in zip(self.triples, as_)}
        return Cocycle2(self.cover, pi, a)

    def key(self, c: Cocycle2):
        if c.cover != self.cover:
            raise CocycleError("cocycle lives on a different cover; pass to a common refinement first")
        try:
            return (
                tuple(self.GP[self.pair_obj[p]].index[c.pi[p]] for p in self.pairs),
                tuple(self.GA[self.triple_obj[t]].index[c.a[t]] for t in self.triples),
            )
        except KeyError as exc:
            raise CocycleError(f"cocycle value missing or outside its group: {exc}") from None

    def data_key(self, d: CoboundaryData):
        return (
            tuple(self.GP[M].index[d.b[i]] for i, M in enumerate(self.members)),
            tuple(self.GA[self.pair_obj[p]].index[d.beta[p]] for p in self.pairs),
        )

    def to_data(self, dk) -> CoboundaryData:
        b, beta = dk
        return CoboundaryData(
            {i: self.GP[M].elements[x] for i, (M, x) in enumerate(zip(self.members, b))},
            {p: self.GA[self.pair_obj[p]].elements[x] for p, x in zip(self.pairs, beta)},
        )

    def unit_key(self):
        return (
            tuple(self.GP[self.pair_obj[p]]._e for p in self.pairs),
            tuple(self.GA[self.triple_obj[t]]._e for t in self.triples),
        )

    def is_a_trivial(self, key) -> bool:
        return all(a == self.GA[self.triple_obj[t]]._e for t, a in zip(self.triples, key[1]))

    # -- conditions

    def _c1(self, pis, k):
        op = self._triple_ops[k]
        _, ij, jk, ik, _, _, _, pij, pjk, pik, _, _, _, mP, iP, _, _ = op
        return mP[mP[pij[pis[ij]]][pjk[pis[jk]]]][iP[pik[pis[ik]]]]

    def _c2(self, pis, as_, q):
        ts, rs, ij, pij, m, act = self._quad_ops[q]
        x0, x1, x2, x3 = (r[as_[t]] for t, r in zip(ts, rs))
        return m[x0][x1] == m[act[pij[pis[ij]]][x2]][x3]

    def failure(self, key):
        pis, as_ = key
        for k, t in enumerate(self.triples):
            if self._triple_ops[k][16][as_[k]] != self._c1(pis, k):
                return {"condition": "C1", "triple": t}
        for q, quad in enumerate(self.quads):
            if not self._c2(pis, as_, q):
                return {"condition": "C2", "quadruple": quad}
        return None

    # -- coboundary action

    def apply_idx(self, key, dk):
        pis, as_ = key
        b, beta = dk
        tw = []
        new_pi = []
        for (i, j, ri, rj, mP, iP, rho), x, be in zip(self._pair_ops, pis, beta):
            t = mP[mP[ri[b[i]]][x]][iP[rj[b[j]]]]
            tw.append(t)
            new_pi.append(mP[rho[be]][t])
        new_a = []
        for op, a in zip(self._triple_ops, as_):
            i, ij, jk, ik, aij, ajk, aik, pij, _, _, pi_, m, inv, _, _, act, _ = op
            x = m[aij[beta[ij]]][act[pij[tw[ij]]][ajk[beta[jk]]]]
            x = m[m[x][act[pi_[b[i]]][a]]][inv[aik[beta[ik]]]]
            new_a.append(x)
        return tuple(new_pi), tuple(new_a)

    def apply(self, key, d: CoboundaryData):
        return self.apply_idx(key, self.data_key(d))

    def identity_idx(self):
        return (
            tuple(self.GP[M]._e for M in self.members),
            tuple(self.GA[self.pair_obj[p]]._e for p in self.pairs),
        )

    def identity_data(self) -> CoboundaryData:
        return self.to_data(self.identity_idx())

    def compose_idx(self, d2, d1):
        """Datum acting as d2 after d1: (b2 b1, beta2 (b2 . beta1))."""
        b2, be2 = d2
        b1, be1 = d1
        M = self.members
        b = tuple(self.mP[M[i]][b2[i]][b1[i]] for i in range(self.n))
        beta = []
        for k, (i, j, ri, _, _, _, _) in enumerate(self._pair_ops):
            W = self.pair_obj[i, j]
            beta.append(self.mA[W][be2[k]][self.act[W][ri[b2[i]]][be1[k]]])
        return b, tuple(beta)

    def compose_data(self, d2: CoboundaryData, d1: CoboundaryData) -> CoboundaryData:
        return self.to_data(self.compose_idx(self.data_key(d2), self.data_key(d1)))

    def elementary_idx(self) -> list:
        out = []
        b0, beta0 = self.identity_idx()
        for i, M in enumerate(self.members):
            G = self.GP[M]
            for g in G.generators():
                b = list(b0)
                b[i] = G.index[g]
                out.append((tuple(b), beta0))
        for k, p in enumerate(self.pairs):
            G = self.GA[self.pair_obj[p]]
            for x in G.generators():
                beta = list(beta0)
                beta[k] = G.index[x]
                out.append((b0, tuple(beta)))
        return out

    def elementary_data(self) -> list:
        return [self.to_data(d) for d in self.elementary_idx()]

    def all_data(self, bound: int = DEFAULT_BOUND):
        sizes = [len(self.GP[M]) for M in self.members] + [len(self.GA[self.pair_obj[p]]) for p in self.pairs]
        total = 1
        for s in sizes:
            total *= s
        if total > bound:
            raise BoundExceeded("coboundary data", total, bound)
        bs = [range(len(self.GP[M])) for M in self.members]
        betas = [range(len(self.GA[self.pair_obj[p]])) for p in self.pairs]
        for bc in product(*bs):
            for bec in product(*betas):
                yield self.to_data((bc, bec))

    def random_data(self, rng: random.Random) -> CoboundaryData:
        b = tuple(rng.randrange(len(self.GP[M])) for M in self.members)
        beta = tuple(rng.randrange(len(self.GA[self.pair_obj[p]])) for p in self.pairs)
        return self.to_data((b, beta))

    # -- orbits

    def orbit(self, key, bound: int = DEFAULT_BOUND) -> dict:
        """Orbit of key under coboundary data: maps each member to (parent, datum index)."""
        moves = self.elementary_idx()
        seen = {key: None}
        queue = deque([key])
        apply = self.apply_idx
        while queue:
            x = queue.popleft()
            for d in moves:
                y = apply(x, d)
                if y not in seen:
                    seen[y] = (x, d)
                    if len(seen) > bound:
                        raise BoundExceeded("coboundary orbit", len(seen), bound)
                    queue.append(y)
        return seen

    def witness(self, orbit: dict, target) -> CoboundaryData:
        path = []
        y = target
        while orbit[y] is not None:
            x, d = orbit[y]
            path.append(d)
            y = x
        w = self.identity_idx()
        for d in reversed(path):
            w = self.compose_idx(d, w)
        return self.to_data(w)

    # -- enumeration

    def enumerate(self, bound: int = DEFAULT_BOUND) -> list:
        """All cocycles over the cover, by backtracking with forward checking."""
        preimage = {}
        for W in set(self.triple_obj.values()):
            inv = {}
            for a, r in enumerate(self.rho[W]):
                inv.setdefault(r, []).append(a)
            preimage[W] = inv
        tpre = [preimage[self.triple_obj[t]] for t in self.triples]

        pair_order = sorted(range(len(self.pairs)), key=lambda k: (max(self.pairs[k]), self.pairs[k]))
        pos = {k: s for s, k in enumerate(pair_order)}
        done_at = {}
        for k, op in enumerate(self._triple_ops):
            last = max(pos[op[1]], pos[op[2]], pos[op[3]])
            done_at.setdefault(last, []).append(k)

        torder = [self.tidx[t] for t in self._triple_order()]
        tpos = {t: s for s, t in enumerate(torder)}
        quads_at = {}
        for q, op in enumerate(self._quad_ops):
            quads_at.setdefault(max(tpos[t] for t in op[0]), []).append(q)

        out = []
        nodes = [0]
        npairs, ntrip = len(self.pairs), len(self.triples)
        psize = [len(self.GP[self.pair_obj[p]]) for p in self.pairs]
        pis = [0] * npairs
        as_ = [0] * ntrip

        def tick():
            nodes[0] += 1
            if nodes[0] > bound:
                raise BoundExceeded("cocycle search nodes", nodes[0], bound)

        def go_pi(s):
            if s == npairs:
                go_a(0)
                return
            k = pair_order[s]
            for x in range(psize[k]):
                tick()
                pis[k] = x
                if all(self._c1(pis, t) in tpre[t] for t in done_at.get(s, ())):
                    go_pi(s + 1)

        def go_a(s):
            if s == ntrip:
                out.append((tuple(pis), tuple(as_)))
                if len(out) > bound:
                    raise BoundExceeded("cocycles", len(out), bound)
                return
            t = torder[s]
            for a in tpre[t].get(self._c1(pis, t), ()):
                tick()
                as_[t] = a
                if all(self._c2(pis, as_, q) for q in quads_at.get(s, ())):
                    go_a(s + 1)

        go_pi(0)
        return out

    def _triple_order(self) -> list:
        """Greedy order completing as many C2 constraints as early as possible."""
        qs = [
            [(q[0], q[1], q[2]), (q[0], q[2], q[3]), (q[1], q[2], q[3]), (q[0], q[1], q[3])]
            for q in self.quads
        ]
        by_triple = {t: [] for t in self.triples}
        for ts in qs:
            for t in set(ts):
                by_triple[t].append(ts)
        remaining = list(self.triples)
        chosen, placed = [], set()
        while remaining:
            best = max(
                remaining,
                key=lambda t: sum(1 for ts in by_triple[t] if all(u in placed or u == t for u in ts)),
            )
            chosen.append(best)
            placed.add(best)
            remaining.remove(best)
        return chosen

    # -- transport between covers and coefficients

    def restrict_key(self, key, sub: "CocycleSpace", index_map: list):
        """Cocycle on a subfamily; index_map[k] is the index in self of sub's k-th member."""
        pis, as_ = key
        m = index_map
        new_pi = tuple(pis[self.pidx[m[i], m[j]]] for i, j in sub.pairs)
        new_a = tuple(as_[self.tidx[m[i], m[j], m[k]]] for i, j, k in sub.triples)
        return new_pi, new_a

    def pullback_key(self, key, big: "CocycleSpace", tau: list):
        """Pull a cocycle back along a refinement: big member i lies in self member tau[i]."""
        c = self.to_cocycle(key)
        A, Pi = self.Phi.A, self.Phi.Pi
        pi = {}
        for i, j in big.pairs:
            p = (tau[i], tau[j])
            pi[i, j] = Pi.restrict(self.pair_obj[p], big.pair_obj[i, j], c.pi[p])
        a = {}
        for i, j, k in big.triples:
            t = (tau[i], tau[j], tau[k])
            a[i, j, k] = A.restrict(self.triple_obj[t], big.triple_obj[i, j, k], c.a[t])
        return big.key(Cocycle2(big.cover, pi, a))


def core_subcover(site: FiniteSite, cover: Cover) -> tuple:
    """Members not contained in another member, and a refinement map into them."""
    mem = list(cover.members)
    core = []
    for i, U in enumerate(mem):
        dominated = any(
            (site.le(U, V) and U != V) or (U == V and j < i) for j, V in enumerate(mem) if j != i
        )
        if not dominated:
            core.append(i)
    tau = []
    for U in mem:
        tau.append(next(k for k, i in enumerate(core) if site.le(U, mem[i])))
    return core, tau


@dataclass
class H2Class:
    representative: Cocycle2
    core_key: tuple
    is_unit: bool
    is_neutral: bool
    size: int = 0


@dataclass
class H2Set:
    """Classes of (A, Pi)-gerbes trivialised over a fixed cover.

    Classes are computed on the irredundant core of the cover, which refines and
    is refined by the cover, and representatives are pulled back to the cover.
    """

    space: CocycleSpace
    core_space: CocycleSpace
    core_index: list
    tau: list
    classes: list
    class_of_key: dict = field(repr=False)
    orbits: list = field(repr=False)

    def __len__(self):
        return len(self.classes)

    @property
    def unit(self) -> int:
        return next(i for i, c in enumerate(self.classes) if c.is_unit)

    def classify(self, c) -> int:
        key = self.space.key(c) if isinstance(c, Cocycle2) else c
        fail = self.space.failure(key)
        if fail:
            raise CocycleError(f"not a cocycle: {fail}")
        core = self.space.restrict_key(key, self.core_space, self.core_index)
        return self.class_of_key[core]

    def is_neutral(self, idx: int) -> bool:
        return self.classes[idx].is_neutral

    def neutral_witness(self, idx: int) -> Optional[Cocycle2]:
        """A cocycle on the core cover in the class with trivial A-part, if any."""
        for k in self.orbits[idx]:
            if self.core_space.is_a_trivial(k):
                return self.core_space.to_cocycle(k)
        return None


def h2_classes(site: FiniteSite, Phi: CrossedGroupSheaf, cover: Optional[Cover] = None, bound: int = DEFAULT_BOUND) -> H2Set:
    cover = cover or site.minimal_basis_cover()
    space = CocycleSpace(site, Phi, cover)
    core_index, tau = core_subcover(site, cover)
    core_cover = Cover(cover.target, [cover.members[i] for i in core_index])
    core = CocycleSpace(site, Phi, core_cover)
    keys = core.enumerate(bound)
    unit = core.unit_key()
    class_of, orbits, classes = {}, [], []
    ordered = [unit] + [k for k in keys if k != unit]
    for k in ordered:
        if k in class_of:
            continue
        orb = core.orbit(k, bound)
        idx = len(classes)
        for x in orb:
            class_of[x] = idx
        orbits.append(frozenset(orb))
        rep_full = core.pullback_key(k, space, tau)
        classes.append(
            H2Class(
                space.to_cocycle(rep_full),
                k,
                is_unit=(k == unit),
                is_neutral=any(core.is_a_trivial(x) for x in orb),
                size=len(orb),
            )
        )
    if len(class_of) != len(keys):
        raise CocycleError("orbits leave the enumerated cocycle set")
    return H2Set(space, core, core_index, tau, classes, class_of, orbits)


def validate_cocycle(site, Phi, c: Cocycle2):
    space = CocycleSpace(site, Phi, c.cover)
    return space.failure(space.key(c))


def apply_coboundary(site: FiniteSite, Phi: CrossedGroupSheaf, c: Cocycle2, d: CoboundaryData) -> Cocycle2:
    space = CocycleSpace(site, Phi, c.cover)
    key = space.key(c)
    fail = space.failure(key)
    if fail:
        raise CocycleError(f"not a cocycle: {fail}")
    return space.to_cocycle(space.apply(key, d))


def cocycles_equivalent(site, Phi, c1: Cocycle2, c2: Cocycle2, bound: int = DEFAULT_BOUND) -> tuple:
    """(True, witness) if some coboundary datum carries c1 to c2, else (False, None)."""
    if c1.cover != c2.cover:
        raise CocycleError("cocycles over different covers; pass to a common refinement first")
    space = CocycleSpace(site, Phi, c1.cover)
    k1, k2 = space.key(c1), space.key(c2)
    for k in (k1, k2):
        if (fail := space.failure(k)):
            raise CocycleError(f"not a cocycle: {fail}")
    orb = space.orbit(k1, bound)
    if k2 not in orb:
        return False, None
    return True, space.witness(orb, k2)


def unit_cocycle(site, Phi, cover: Cover) -> Cocycle2:
    space = CocycleSpace(site, Phi, cover)
    return space.to_cocycle(space.unit_key())


def is_neutral(H: H2Set, idx: int) -> bool:
    return H.is_neutral(idx)


def push_cocycle(site, m: CrossedMorphism, c: Cocycle2) -> Cocycle2:
    """Image of a cocycle under a crossed morphism, on the same cover."""
    S = CocycleSpace(site, m.source, c.cover)
    pi = {p: m.varphi[S.pair_obj[p]][x] for p, x in c.pi.items()}
    a = {t: m.f[S.triple_obj[t]][x] for t, x in c.a.items()}
    return Cocycle2(c.cover, pi, a)


def map_h2(site: FiniteSite, m: CrossedMorphism, source: H2Set, target: H2Set, idx: int) -> int:
    """Class of the pushforward of the representative of class idx."""
    c = source.classes[idx].representative
    return target.classify(push_cocycle(site, m, c))
