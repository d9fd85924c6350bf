"""Finite groupoids and the two algebras they carry: the groupoid algebra
(group-like coproduct) and the algebra of functions (convolution coproduct),
each returned with its closed-form counit and antipode."""

from __future__ import annotations

import random
from itertools import product as cartesian

from .algebra_core import FinAlgebra, Functional, StructureError
from .coproduct import Coproduct
from .exact_linalg import ONE, Matrix

__all__ = [
    "Group", "GROUPS", "FiniteGroupoid", "group_groupoid", "pair_groupoid",
    "transitive_groupoid", "disjoint_union", "random_groupoid", "groupoid_algebra",
    "function_algebra", "groupoid_from_algebra",
]


class Group:
    """Small finite group on 0..order-1 with 0 as identity."""

    def __init__(self, name, names, mul):
        self.name = name
        self.names = tuple(names)
        self.order = len(self.names)
        self.mul = mul
        self.inv = tuple(next(j for j in range(self.order) if mul(i, j) == 0) for i in range(self.order))

    def __repr__(self):
        return f"Group({self.name})"


def _cyclic(n):
    names = ["1", "g"] + [f"g^{k}" for k in range(2, n)]
    return Group(f"C{n}", names[:n], lambda i, j: (i + j) % n)


GROUPS = {
    "C1": _cyclic(1),
    "C2": _cyclic(2),
    "C3": _cyclic(3),
    "C4": _cyclic(4),
    "V4": Group("V4", ["1", "a", "b", "ab"], lambda i, j: i ^ j),
}


class FiniteGroupoid:
    """Arrows (source, target, label); compose[(p, q)] = p∘q when
    source(p) == target(q)."""

    def __init__(self, objects, arrows, compose, inverse, units):
        self.objects = list(objects)
        self.arrows = list(arrows)
        self.compose = dict(compose)
        self.inverse = list(inverse)
        self.units = dict(units)
        bad = self.violation()
        if bad is not None:
            raise StructureError("groupoid", bad)

    def source(self, p):
        return self.arrows[p][0]

    def target(self, p):
        return self.arrows[p][1]

    @property
    def labels(self):
        return [a[2] for a in self.arrows]

    def __len__(self):
        return len(self.arrows)

    def violation(self):
        n = len(self.arrows)
        for p in range(n):
            for q in range(n):
                defined = self.source(p) == self.target(q)
                r = self.compose.get((p, q))
                if defined != (r is not None):
                    return f"composition of {p} and {q} defined wrongly"
                if r is not None and (self.source(r) != self.source(q) or self.target(r) != self.target(p)):
                    return f"composite of {p} and {q} has wrong ends"
        for (p, q), r in self.compose.items():
            for s in range(n):
                if (q, s) in self.compose:
                    if self.compose.get((r, s)) != self.compose[(p, self.compose[(q, s)])]:
                        return f"associativity fails at {p}, {q}, {s}"
        for obj, u in self.units.items():
            if self.source(u) != obj or self.target(u) != obj:
                return f"unit of {obj} is not a loop"
        for p in range(n):
            if self.compose[(self.units[self.target(p)], p)] != p or self.compose[(p, self.units[self.source(p)])] != p:
                return f"unit law fails at {p}"
            q = self.inverse[p]
            if self.compose.get((p, q)) != self.units[self.target(p)]:
                return f"inverse fails at {p}"
        return None

    def __eq__(self, other):
        if not isinstance(other, FiniteGroupoid):
            return NotImplemented
        return (self.objects, self.arrows, self.compose, self.inverse, self.units) == \
            (other.objects, other.arrows, other.compose, other.inverse, other.units)

    __hash__ = None

    def __repr__(self):
        return f"FiniteGroupoid(objects={len(self.objects)}, arrows={len(self.arrows)})"


def transitive_groupoid(k, group, prefix=""):
    """Pair groupoid on k objects times a group; arrow (i, j, h) has target i,
    source j and index (i*k + j)*|G| + h."""
    if isinstance(group, str):
        group = GROUPS[group]
    m = group.order
    objects = [f"{prefix}{i + 1}" for i in range(k)]
    arrows = []
    for i, j, h in cartesian(range(k), range(k), range(m)):
        if k == 1:
            label = prefix + group.names[h]
        elif m == 1:
            label = f"{prefix}g{i + 1}{j + 1}"
        else:
            label = f"{prefix}g{i + 1}{j + 1}:{group.names[h]}"
        arrows.append((objects[j], objects[i], label))
    idx = lambda i, j, h: (i * k + j) * m + h  # noqa: E731
    compose = {}
    for i, j, h in cartesian(range(k), range(k), range(m)):
        for l, h2 in cartesian(range(k), range(m)):
            compose[(idx(i, j, h), idx(j, l, h2))] = idx(i, l, group.mul(h, h2))
    inverse = [idx(j, i, group.inv[h]) for i, j, h in cartesian(range(k), range(k), range(m))]
    units = {objects[i]: idx(i, i, 0) for i in range(k)}
    return FiniteGroupoid(objects, arrows, compose, inverse, units)


def group_groupoid(group):
    return transitive_groupoid(1, group)


def pair_groupoid(k):
    return transitive_groupoid(k, "C1")


def disjoint_union(parts):
    objects, arrows, compose, inverse, units = [], [], {}, [], {}
    for G in parts:
        off = len(arrows)
        objects += G.objects
        arrows += G.arrows
        compose.update({(p + off, q + off): r + off for (p, q), r in G.compose.items()})
        inverse += [q + off for q in G.inverse]
        units.update({o: u + off for o, u in G.units.items()})
    if len(set(objects)) != len(objects):
        raise ValueError("object labels collide in the disjoint union")
    return FiniteGroupoid(objects, arrows, compose, inverse, units)


def random_groupoid(seed, max_objects, group_pool):
    """Seeded disjoint union of (pair groupoid × group) components."""
    if not 1 <= max_objects <= 4:
        raise ValueError("max_objects must lie in 1..4")
    pool = sorted(group_pool)
    if not pool or any(g not in GROUPS for g in pool):
        raise ValueError(f"group pool must be a nonempty subset of {sorted(GROUPS)}")
    rng = random.Random(seed)
    total = rng.randint(1, max_objects)
    sizes = []
    left = total
    while left:
        s = rng.randint(1, left)
        sizes.append(s)
        left -= s
    if len(sizes) == 1:
        return transitive_groupoid(sizes[0], rng.choice(pool))
    parts = [transitive_groupoid(s, rng.choice(pool), prefix=f"{chr(ord('a') + c)}")
             for c, s in enumerate(sizes)]
    return disjoint_union(parts)


# ---------------------------------------------------------------------------

def _perm_matrix(perm):
    n = len(perm)
    return Matrix(n, n, {(perm[j], j): ONE for j in range(n)})


def groupoid_algebra(G):
    """Algebra spanned by the arrows with composition-or-zero product and
    Δ(g) = g⊗g; returns (A, Δ, expected ε ≡ 1, expected S = inversion)."""
    n = len(G)
    mult = {(p, q, r): 1 for (p, q), r in G.compose.items()}
    J = _perm_matrix(G.inverse)
    A = FinAlgebra(n, G.labels, mult, involution=J)
    D = Coproduct.from_elements(A, [{p * n + p: ONE} for p in range(n)])
    eps = Functional(A, [1] * n)
    return A, D, eps, _perm_matrix(G.inverse)


def function_algebra(G):
    """Point functions on the arrows with Δ(δ_g) = Σ_{h∘k=g} δ_h⊗δ_k;
    returns (A, Δ, expected ε = evaluation on units, expected S = δ_g -> δ_{g⁻¹})."""
    n = len(G)
    mult = {(p, p, p): 1 for p in range(n)}
    A = FinAlgebra(n, [f"δ[{x}]" for x in G.labels], mult, involution=Matrix.identity(n))
    els = [{} for _ in range(n)]
    for (h, k), g in G.compose.items():
        els[g][h * n + k] = ONE
    D = Coproduct.from_elements(A, els)
    unit_arrows = set(G.units.values())
    eps = Functional(A, [1 if p in unit_arrows else 0 for p in range(n)])
    return A, D, eps, _perm_matrix(G.inverse)


def groupoid_from_algebra(A, D):
    """Recover the groupoid from a groupoid algebra presented on its arrows."""
    n = A.dim
    for p in range(n):
        if D.elements[p] != {p * n + p: ONE}:
            raise StructureError("groupoid algebra", "basis is not group-like", p)
    compose = {}
    for p in range(n):
        for q in range(n):
            r = A.basis_product(p, q)
            if not r:
                continue
            if len(r) != 1 or next(iter(r.values())) != ONE:
                raise StructureError("groupoid algebra", "product of arrows is not an arrow", (p, q))
            compose[(p, q)] = next(iter(r))
    idem = [p for p in range(n) if compose.get((p, p)) == p]
    src, tgt = [], []
    for p in range(n):
        s = [u for u in idem if compose.get((p, u)) == p]
        t = [u for u in idem if compose.get((u, p)) == p]
        if len(s) != 1 or len(t) != 1:
            raise StructureError("groupoid algebra", "arrow without a unique source or target", p)
        src.append(s[0])
        tgt.append(t[0])
    inverse = []
    for p in range(n):
        q = [q for q in range(n) if compose.get((p, q)) == tgt[p] and compose.get((q, p)) == src[p]]
        if len(q) != 1:
            raise StructureError("groupoid algebra", "arrow without an inverse", p)
        inverse.append(q[0])
    names = A.basis_names
    objects = [names[u] for u in idem]
    arrows = [(names[src[p]], names[tgt[p]], names[p]) for p in range(n)]
    units = {names[u]: u for u in idem}
    return FiniteGroupoid(objects, arrows, compose, inverse, units)
