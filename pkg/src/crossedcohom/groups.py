"""Finite groups given by explicit multiplication tables."""

from __future__ import annotations

from itertools import permutations, product
from typing import Callable, Hashable, Iterable, Sequence


class FiniteGroup:
    """A finite group on a tuple of hashable labels.

    The table is stored on indices; the public API works on labels.
    """

    def __init__(self, elements: Sequence[Hashable], table: Sequence[Sequence[int]], name: str = ""):
        self.elements = tuple(elements)
        self.index = {x: i for i, x in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise ValueError("duplicate group elements")
        self.table = tuple(tuple(row) for row in table)
        self.name = name
        n = len(self.elements)
        e = [i for i in range(n) if all(self.table[i][j] == j for j in range(n))]
        if len(e) != 1:
            raise ValueError(f"group {name!r} has no unique identity")
        self._e = e[0]
        inv = [None] * n
        for i in range(n):
            for j in range(n):
                if self.table[i][j] == self._e:
                    inv[i] = j
                    break
            else:
                raise ValueError(f"group {name!r}: element {self.elements[i]!r} has no inverse")
        self._inv = tuple(inv)

    @classmethod
    def from_function(cls, elements: Iterable[Hashable], mul: Callable, name: str = "") -> "FiniteGroup":
        elements = tuple(elements)
        index = {x: i for i, x in enumerate(elements)}
        table = [[index[mul(x, y)] for y in elements] for x in elements]
        return cls(elements, table, name)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self.index

    def __repr__(self):
        return f"FiniteGroup({self.name or len(self)})"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteGroup)
            and self.elements == other.elements
            and self.table == other.table
        )

    def __hash__(self):
        return hash((self.elements, self.table))

    @property
    def identity(self):
        return self.elements[self._e]

    def mul(self, x, y):
        return self.elements[self.table[self.index[x]][self.index[y]]]

    def prod(self, *xs):
        r = self._e
        for x in xs:
            r = self.table[r][self.index[x]]
        return self.elements[r]

    def inv(self, x):
        return self.elements[self._inv[self.index[x]]]

    def conj(self, g, x):
        """g x g^-1"""
        return self.prod(g, x, self.inv(g))

    def power(self, x, k: int):
        if k < 0:
            x, k = self.inv(x), -k
        r = self.identity
        for _ in range(k):
            r = self.mul(r, x)
        return r

    def order_of(self, x) -> int:
        k, y = 1, x
        while y != self.identity:
            y = self.mul(y, x)
            k += 1
        return k

    def is_abelian(self) -> bool:
        n = len(self)
        return all(self.table[i][j] == self.table[j][i] for i in range(n) for j in range(i))

    def center(self) -> list:
        return [z for z in self if all(self.mul(z, x) == self.mul(x, z) for x in self)]

    def generators(self) -> list:
        """A small generating set, chosen greedily in element order."""
        gens, seen = [], {self.identity}
        for x in self.elements:
            if x not in seen:
                gens.append(x)
                seen = set(closure(self, gens))
        return gens

    def check_axioms(self) -> None:
        n = len(self)
        for i in range(n):
            if sorted(self.table[i]) != list(range(n)):
                raise ValueError(f"group {self.name!r}: row {self.elements[i]!r} is not a permutation")
        for i, j, k in product(range(n), repeat=3):
            if self.table[self.table[i][j]][k] != self.table[i][self.table[j][k]]:
                raise ValueError(
                    f"group {self.name!r}: not associative at "
                    f"{(self.elements[i], self.elements[j], self.elements[k])!r}"
                )


def closure(G: FiniteGroup, gens: Iterable) -> list:
    """Subgroup generated by gens, in discovery order."""
    out = [G.identity]
    seen = {G.identity}
    frontier = list(out)
    gens = list(gens)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    out.append(y)
                    nxt.append(y)
        frontier = nxt
    return out


def cyclic(n: int) -> FiniteGroup:
    return FiniteGroup.from_function(range(n), lambda x, y: (x + y) % n, f"Z{n}")


def trivial() -> FiniteGroup:
    return cyclic(1)


def _compose(p, q):
    # (p*q)(i) = p(q(i)): apply q first
    return tuple(p[i] for i in q)


def permutation_group(gens: Sequence[tuple], name: str = "") -> FiniteGroup:
    n = len(gens[0])
    e = tuple(range(n))
    els = [e]
    seen = {e}
    frontier = [e]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _compose(x, g)
                if y not in seen:
                    seen.add(y)
                    els.append(y)
                    nxt.append(y)
        frontier = nxt
    return FiniteGroup.from_function(sorted(els), _compose, name)


def symmetric(n: int) -> FiniteGroup:
    return FiniteGroup.from_function(sorted(permutations(range(n))), _compose, f"S{n}")


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n acting on an n-gon."""
    r = tuple((i + 1) % n for i in range(n))
    s = tuple((-i) % n for i in range(n))
    return permutation_group([r, s], f"D{n}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    els = list(product(G.elements, H.elements))
    return FiniteGroup.from_function(
        els, lambda x, y: (G.mul(x[0], y[0]), H.mul(x[1], y[1])), f"{G.name}x{H.name}"
    )


def is_homomorphism(G: FiniteGroup, H: FiniteGroup, f: dict) -> bool:
    return all(f[G.mul(x, y)] == H.mul(f[x], f[y]) for x in G for y in G)


def homomorphisms(G: FiniteGroup, H: FiniteGroup) -> list:
    """All homomorphisms G -> H, found by assigning images to generators."""
    gens = G.generators()
    out = []
    for imgs in product(H.elements, repeat=len(gens)):
        f = {G.identity: H.identity}
        todo = [G.identity]
        ok = True
        while todo and ok:
            x = todo.pop()
            for g, h in zip(gens, imgs):
                y, v = G.mul(x, g), H.mul(f[x], h)
                if y not in f:
                    f[y] = v
                    todo.append(y)
                elif f[y] != v:
                    ok = False
                    break
        if ok and is_homomorphism(G, H, f):
            out.append(f)
    return out


def subgroup(G: FiniteGroup, elements: Iterable, name: str = "") -> FiniteGroup:
    els = [x for x in G.elements if x in set(elements)]
    return FiniteGroup.from_function(els, G.mul, name)


def inner_automorphisms(G: FiniteGroup) -> tuple[FiniteGroup, dict]:
    """Int(G) realised as permutations of G's element indices, with g -> int(g)."""
    idx = G.index

    def int_of(g):
        return tuple(idx[G.conj(g, x)] for x in G.elements)

    to_int = {g: int_of(g) for g in G}
    els = sorted(set(to_int.values()))
    Int = FiniteGroup.from_function(els, _compose, f"Int({G.name})")
    return Int, to_int
