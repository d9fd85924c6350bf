"""Left and right integrals: solving for them, faithfulness, and the
invariance and smeared-range identities they satisfy."""

from __future__ import annotations

from .algebra_core import Check, Functional, StructureError, multiplier_algebra
from .exact_linalg import ONE, ZERO, Matrix, Subspace, axpy, dense, kernel_basis
from .separability import is_psd, subalgebra

__all__ = [
    "IntegralSpace", "target_multipliers", "source_multipliers", "solve_left_integrals",
    "solve_right_integrals", "check_faithful_set", "faithfulness_witness",
    "verify_invariance_identities", "verify_smeared_ranges", "integral_space",
    "positive_integral_count", "as_functionals",
]


class IntegralSpace:
    """Bases of the left and right integral spaces with their faithfulness."""

    def __init__(self, left, right, left_faithful, right_faithful, parent):
        self.left = left
        self.right = right
        self.parent = parent
        self.left_faithful = left_faithful
        self.right_faithful = right_faithful

    @property
    def left_basis(self):
        return as_functionals(self.left, self.parent)

    @property
    def right_basis(self):
        return as_functionals(self.right, self.parent)

    def __repr__(self):
        return (f"IntegralSpace(left={self.left.dim}, right={self.right.dim}, "
                f"faithful={self.left_faithful}/{self.right_faithful})")


def as_functionals(space, A):
    if isinstance(space, Subspace):
        return [Functional(A, dense(v, A.dim)) for v in space.basis]
    return [f if isinstance(f, Functional) else Functional(A, dense(f, A.dim)) for f in space]


def _multiplier_span(A, S):
    """M(S) for a subalgebra S of A, as a subspace of A via x -> λ_x(1_S)."""
    alg = subalgebra(A, S)
    basis, _ = multiplier_algebra(alg)
    u = alg.unit
    if u is None:
        raise StructureError("unit", "the leg algebra has no unit")
    vecs = []
    for m in basis:
        coords = m.lam.apply(u)
        vecs.append(S.combine(dense(coords, S.dim)))
    return Subspace(A.dim, vecs)


def target_multipliers(sep):
    """A_t = M(C) sitting in A."""
    return _multiplier_span(sep.E.parent, sep.C)


def source_multipliers(sep):
    """A_s = M(B) sitting in A."""
    return _multiplier_span(sep.E.parent, sep.B)


def _membership_rows(V):
    """Functionals whose joint kernel is V: one per non-pivot coordinate q,
    v -> v_q - sum_k v_{p_k} b_k[q]."""
    n = V.ambient_dim
    piv = set(V.pivots)
    rows = []
    for q in range(n):
        if q in piv:
            continue
        row = {q: ONE}
        for p, b in zip(V.pivots, V.basis):
            c = b.get(q)
            if c:
                row[p] = row.get(p, ZERO) - c
        rows.append({k: x for k, x in row.items() if x})
    return rows


def _solve_invariant(D, V, side):
    A = D.parent
    n = A.dim
    rows = _membership_rows(V)
    entries = {}
    r = 0
    for a in range(n):
        t = D.elements[a]
        # slice: (ι⊗φ)t = sum_ij t_ij φ_j e_i, (ψ⊗ι)t = sum_ij t_ij ψ_i e_j
        by_out = {}
        for idx, x in t.items():
            i, j = divmod(idx, n)
            o, f = (i, j) if side == "left" else (j, i)
            by_out.setdefault(o, {})
            by_out[o][f] = by_out[o].get(f, ZERO) + x
        for w in rows:
            eq = {}
            for o, c in w.items():
                for f, x in by_out.get(o, {}).items():
                    eq[f] = eq.get(f, ZERO) + c * x
            for f, x in eq.items():
                if x:
                    entries[(r, f)] = x
            r += 1
    return kernel_basis(Matrix(max(r, 1), n, entries))


def solve_left_integrals(D, sep, A_t=None):
    """All φ with (ι⊗φ)Δ(a) ∈ A_t for every basis a."""
    return _solve_invariant(D, A_t or target_multipliers(sep), "left")


def solve_right_integrals(D, sep, A_s=None):
    """All ψ with (ψ⊗ι)Δ(a) ∈ A_s for every basis a."""
    return _solve_invariant(D, A_s or source_multipliers(sep), "right")


def faithfulness_witness(space, A):
    """('left'|'right', a) with φ(ab)=0 (resp. φ(ba)=0) for all b and all
    φ in the space, or None when the set is faithful."""
    funcs = as_functionals(space, A)
    n = A.dim
    for side in ("right", "left"):
        cols = {}
        for a in range(n):
            col = {}
            r = 0
            for f in funcs:
                for b in range(n):
                    p = A.basis_product(a, b) if side == "right" else A.basis_product(b, a)
                    x = f(p)
                    if x:
                        col[r] = x
                    r += 1
            cols[a] = col
        M = Matrix.from_columns(max(len(funcs) * n, 1), n, cols)
        ker = kernel_basis(M)
        if ker.dim:
            return ("φ(ab)" if side == "right" else "φ(ba)", dense(ker.basis[0], n))
    return None


def check_faithful_set(space, A):
    return faithfulness_witness(space, A) is None


def integral_space(D, sep):
    A = D.parent
    left = solve_left_integrals(D, sep)
    right = solve_right_integrals(D, sep)
    return IntegralSpace(left, right, left.dim > 0 and check_faithful_set(left, A),
                         right.dim > 0 and check_faithful_set(right, A), A)


def positive_integral_count(space, A):
    """How many basis integrals φ have φ(a*a) ≥ 0 as a form (needs an involution)."""
    if A.involution is None:
        return None
    count = 0
    n = A.dim
    for f in as_functionals(space, A):
        G = Matrix.from_function(n, n, lambda i, j: f(A.product(A.star({i: ONE}), {j: ONE})))
        if is_psd(G):
            count += 1
    return count


# ---------------------------------------------------------------------------

def _slice2(t, f, n):
    """(ι⊗f)(t)"""
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        c = f.get(j)
        if c is not None:
            out[i] = out.get(i, ZERO) + c * x
    return {k: x for k, x in out.items() if x}


def _slice1(t, f, n):
    """(f⊗ι)(t)"""
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        c = f.get(i)
        if c is not None:
            out[j] = out.get(j, ZERO) + c * x
    return {k: x for k, x in out.items() if x}


def _mul(A, t, u, side, leg):
    """Multiply t ∈ A⊗A by u on one leg: side 'l' means u on the left."""
    n = A.dim
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        e = {i if leg == 1 else j: ONE}
        p = A.product(u, e) if side == "l" else A.product(e, u)
        for k, y in p.items():
            axpy(out, ONE, {(k * n + j) if leg == 1 else (i * n + k): x * y})
    return out


def verify_invariance_identities(D, sep, left_space, right_space):
    """The four F-identities for integrals and the restricted modular
    behaviour of integrals on A_t and A_s."""
    A = D.parent
    n = A.dim
    report = []
    left = [f.sparse for f in as_functionals(left_space, A)]
    right = [f.sparse for f in as_functionals(right_space, A)]
    F1, F2, F3, F4 = sep.F1, sep.F2, sep.F3, sep.F4
    checks = {
        "(ι⊗φ)Δ(a) = (ι⊗φ)(F2(1⊗a))": (left, lambda a: _mul(A, F2, {a: ONE}, "r", 2), _slice2),
        "(ι⊗φ)Δ(a) = (ι⊗φ)((1⊗a)F4)": (left, lambda a: _mul(A, F4, {a: ONE}, "l", 2), _slice2),
        "(ψ⊗ι)Δ(a) = (ψ⊗ι)((a⊗1)F1)": (right, lambda a: _mul(A, F1, {a: ONE}, "l", 1), _slice1),
        "(ψ⊗ι)Δ(a) = (ψ⊗ι)(F3(a⊗1))": (right, lambda a: _mul(A, F3, {a: ONE}, "r", 1), _slice1),
    }
    for name, (funcs, other, slc) in checks.items():
        bad = None
        for a in range(n):
            rhs_t = other(a)
            for k, f in enumerate(funcs):
                if slc(D.elements[a], f, n) != slc(rhs_t, f, n):
                    bad = (a, k)
                    break
            if bad:
                break
        report.append(Check(name, bad is None, bad))
    # modular behaviour: φ(ya) = φ(aσ(y)) on C, ψ(xa) = ψ(aσ(x)) on B
    for label, funcs, S, forms in (("φ(ya) = φ(aσ_C(y))", left, sep.C, sep.sigma_candidates["C"]),
                                   ("ψ(xa) = ψ(aσ_B(x))", right, sep.B, sep.sigma_candidates["B"])):
        holds = []
        for key, sigma in forms.items():
            ok = True
            for k, y in enumerate(S.basis):
                sy = S.combine(dense(sigma.column(k), sigma.rows))
                for a in range(n):
                    ea = {a: ONE}
                    lhs = A.product(y, ea)
                    rhs = A.product(ea, sy)
                    if any(_ev(f, lhs) != _ev(f, rhs) for f in funcs):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                holds.append(key)
        report.append(Check(label, bool(holds), None, "holds with " + ", ".join(holds) if holds else ""))
    return report


def _ev(f, v):
    s = ZERO
    for k, x in v.items():
        c = f.get(k)
        if c is not None:
            s = s + c * x
    return s


def _T(D, which, X):
    """Apply T1..T4 to an element X of A⊗A without building matrices."""
    A = D.parent
    n = A.dim
    out = {}
    for idx, x in X.items():
        i, j = divmod(idx, n)
        if which == 1:
            v = _mul(A, D.elements[i], {j: ONE}, "r", 2)
        elif which == 2:
            v = _mul(A, D.elements[j], {i: ONE}, "l", 1)
        elif which == 3:
            v = _mul(A, D.elements[i], {j: ONE}, "l", 2)
        else:
            v = _mul(A, D.elements[j], {i: ONE}, "r", 1)
        axpy(out, x, v)
    return out


def verify_smeared_ranges(D, sep, left_space, right_space, covered=False):
    """The four covered identities turning smeared products into E-ideals.

    With ``covered=False`` the cover c runs over the unit only; both sides
    are module maps in c, so this is equivalent to the basis sweep that
    ``covered=True`` performs."""
    A = D.parent
    A2 = D.square
    n = A.dim
    u = A.unit
    E = sep.E.element
    left = [f.sparse for f in as_functionals(left_space, A)]
    right = [f.sparse for f in as_functionals(right_space, A)]
    covers = [{c: ONE} for c in range(n)] if covered else [u]
    els = D.elements
    names = [
        "T1((ι⊗ι⊗φ)Δ13(a)Δ23(b)) = E(p⊗1)",
        "T3((ι⊗ι⊗φ)Δ23(a)Δ13(b)) = (p⊗1)E",
        "T2((ψ⊗ι⊗ι)Δ12(a)Δ13(b)) = (1⊗q)E",
        "T4((ψ⊗ι⊗ι)Δ13(a)Δ12(b)) = E(1⊗q)",
    ]
    bad = [None] * 4
    for a in range(n):
        for b in range(n):
            da, db = els[a], els[b]
            pairs = []
            for ia, xa in da.items():
                x, y = divmod(ia, n)
                for ib, xb in db.items():
                    uu, v = divmod(ib, n)
                    pairs.append((x, y, uu, v, xa * xb))
            for k, f in enumerate(left):
                # Σ φ(yv) x⊗u and Σ φ(yv) u⊗x
                s13, s23 = {}, {}
                for x, y, uu, v, c0 in pairs:
                    w = _ev(f, A.basis_product(y, v))
                    if w:
                        axpy(s13, c0 * w, {x * n + uu: ONE})
                        axpy(s23, c0 * w, {uu * n + x: ONE})
                p1 = _slice2(_mul(A, da, {b: ONE}, "r", 2), f, n)
                p3 = _slice2(_mul(A, db, {a: ONE}, "l", 2), f, n)
                for c in covers:
                    if bad[0] is None:
                        lhs = _T(D, 1, _mul(A, s13, c, "r", 2))
                        rhs = A2.product(E, {i * n + j: x * y for i, x in p1.items() for j, y in c.items()})
                        if lhs != rhs:
                            bad[0] = (a, b, k)
                    if bad[1] is None:
                        lhs = _T(D, 3, _mul(A, s23, c, "l", 2))
                        rhs = A2.product({i * n + j: x * y for i, x in p3.items() for j, y in c.items()}, E)
                        if lhs != rhs:
                            bad[1] = (a, b, k)
            for k, f in enumerate(right):
                # Σ ψ(xu) y⊗v and Σ ψ(xu) v⊗y
                s12, s13 = {}, {}
                for x, y, uu, v, c0 in pairs:
                    w = _ev(f, A.basis_product(x, uu))
                    if w:
                        axpy(s12, c0 * w, {y * n + v: ONE})
                        axpy(s13, c0 * w, {v * n + y: ONE})
                q2 = _slice1(_mul(A, db, {a: ONE}, "l", 1), f, n)
                q4 = _slice1(_mul(A, da, {b: ONE}, "r", 1), f, n)
                for c in covers:
                    if bad[2] is None:
                        lhs = _T(D, 2, _mul(A, s12, c, "l", 1))
                        rhs = A2.product({i * n + j: x * y for i, x in c.items() for j, y in q2.items()}, E)
                        if lhs != rhs:
                            bad[2] = (a, b, k)
                    if bad[3] is None:
                        lhs = _T(D, 4, _mul(A, s13, c, "r", 1))
                        rhs = A2.product(E, {i * n + j: x * y for i, x in c.items() for j, y in q4.items()})
                        if lhs != rhs:
                            bad[3] = (a, b, k)
    return [Check(nm, w is None, w) for nm, w in zip(names, bad)]

