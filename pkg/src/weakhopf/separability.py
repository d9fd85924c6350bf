"""Separability data of the canonical idempotent: legs B and C, antipodal
maps, distinguished functionals, modular automorphisms and the F-multipliers.

B and C are subspaces of A (for a unital A every multiplier is an element).
Maps between them are matrices on the echelon coordinates of their bases.
"""

from __future__ import annotations

from .algebra_core import (
    Check, FinAlgebra, Functional, StructureError, check_nondegenerate,
    leg13_element, tensor_power,
)
from .exact_linalg import (
    ONE, ZERO, Matrix, Subspace, axpy, dense, inverse, kernel_basis, solve_linear, sparse,
)

__all__ = [
    "SeparabilityStructure", "extract_legs", "check_regular_separability",
    "separability_report", "antipodal_maps", "distinguished_functionals",
    "modular_automorphisms", "compute_F_multipliers", "check_involutive",
    "involutive_report", "separability_structure", "subalgebra", "is_psd",
    "in_tensor", "left_components", "right_components",
]


# ---------------------------------------------------------------------------
# tensors against echelon bases

def left_components(t, S, n):
    """Rows y_k with t = sum_k S.basis[k] ⊗ y_k, valid when t ∈ S⊗A."""
    rows = [{} for _ in S.pivots]
    where = {p: k for k, p in enumerate(S.pivots)}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        k = where.get(i)
        if k is not None:
            rows[k][j] = x
    return rows


def right_components(t, S, n):
    """Columns x_k with t = sum_k x_k ⊗ S.basis[k], valid when t ∈ A⊗S."""
    cols = [{} for _ in S.pivots]
    where = {p: k for k, p in enumerate(S.pivots)}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        k = where.get(j)
        if k is not None:
            cols[k][i] = x
    return cols


def _outer(u, v, n):
    return {i * n + j: a * b for i, a in u.items() for j, b in v.items()}


def in_tensor(t, L, R, n):
    """Membership of t in L⊗R (either side may be None for all of A)."""
    if L is not None:
        rebuilt = {}
        for b, y in zip(L.basis, left_components(t, L, n)):
            axpy(rebuilt, ONE, _outer(b, y, n))
        if rebuilt != t:
            return False
    if R is not None:
        rebuilt = {}
        for c, x in zip(R.basis, right_components(t, R, n)):
            axpy(rebuilt, ONE, _outer(x, c, n))
        if rebuilt != t:
            return False
    return True


def _coeffs(t, L, R, n):
    """tau with t = sum tau[k][l] L_k ⊗ R_l for t ∈ L⊗R."""
    rows = left_components(t, L, n)
    return [[y.get(q, ZERO) for q in R.pivots] for y in rows]


def _map_vec(M, S_from, S_to, v):
    """Apply a coordinate matrix S_from -> S_to to an element v of S_from."""
    coords = {k: v[p] for k, p in enumerate(S_from.pivots) if p in v}
    return S_to.combine(dense(M.apply(coords), M.rows))


def subalgebra(A, S, names=None):
    """The subspace S as an algebra on its echelon basis."""
    mult = {}
    for i, x in enumerate(S.basis):
        for j, y in enumerate(S.basis):
            c = S.coordinates(A.product(x, y))
            if c is None:
                raise StructureError("subalgebra", "subspace is not closed under the product", (i, j))
            for k, z in enumerate(c):
                if z:
                    mult[(i, j, k)] = z
    names = names or [f"s{i}" for i in range(S.dim)]
    return FinAlgebra(S.dim, names, mult)


# ---------------------------------------------------------------------------

def extract_legs(E):
    """B = span of left legs of E(1⊗a), C = span of right legs of (a⊗1)E."""
    A2 = E.square
    A = E.parent
    n = A.dim
    t = E.element
    lefts, rights = [], []
    for a in range(n):
        ea = {a: ONE}
        x = A2.product(t, _outer(A.unit, ea, n))
        y = A2.product(_outer(ea, A.unit, n), t)
        cols = {}
        for idx, z in x.items():
            i, j = divmod(idx, n)
            cols.setdefault(j, {})[i] = z
        lefts.extend(cols.values())
        rows = {}
        for idx, z in y.items():
            i, j = divmod(idx, n)
            rows.setdefault(i, {})[j] = z
        rights.extend(rows.values())
    return Subspace(n, lefts), Subspace(n, rights)


def separability_report(E, B, C):
    """Regular separability of E relative to given B and C."""
    A = E.parent
    A2 = E.square
    n = A.dim
    t = E.element
    u = A.unit
    out = []
    out.append(Check("E idempotent", A2.product(t, t) == t))
    for name, S in (("B", B), ("C", C)):
        closed = all(S.contains(A.product(x, y)) for x in S.basis for y in S.basis)
        out.append(Check(f"{name} is a subalgebra", closed))
        nd = closed and S.dim > 0 and check_nondegenerate(subalgebra(A, S))
        out.append(Check(f"{name} non-degenerate", nd))
    LB, LC = extract_legs(E)
    out.append(Check("left leg of E is B", LB == B, None if LB == B else LB.dim))
    out.append(Check("right leg of E is C", LC == C, None if LC == C else LC.dim))
    bad = None
    for k, b in enumerate(B.basis):
        for v in (A2.product(_outer(b, u, n), t), A2.product(t, _outer(b, u, n))):
            if not in_tensor(v, B, C, n):
                bad = ("b", k)
    for k, c in enumerate(C.basis):
        for v in (A2.product(t, _outer(u, c, n)), A2.product(_outer(u, c, n), t)):
            if not in_tensor(v, B, C, n):
                bad = ("c", k)
    out.append(Check("one-sided products of E lie in B⊗C", bad is None, bad))
    N = n * n
    eb1 = Subspace(N, [A2.product(t, _outer(b, u, n)) for b in B.basis])
    e1c = Subspace(N, [A2.product(t, _outer(u, c, n)) for c in C.basis])
    b1e = Subspace(N, [A2.product(_outer(b, u, n), t) for b in B.basis])
    ce1 = Subspace(N, [A2.product(_outer(u, c, n), t) for c in C.basis])
    out.append(Check("E(B⊗1) = E(1⊗C)", eb1 == e1c))
    out.append(Check("(B⊗1)E = (1⊗C)E", b1e == ce1))
    return out


def check_regular_separability(E, B, C):
    return all(c.passed for c in separability_report(E, B, C))


# ---------------------------------------------------------------------------

def _solve_map(columns, rhs_list, dim_in):
    """Matrix X with sum_k X[k, j] columns[k] = rhs_list[j]; None if some
    right-hand side is out of reach or the columns are dependent."""
    N = max([max(c) for c in columns if c] + [max(r) for r in rhs_list if r] + [0]) + 1
    M = Matrix.from_columns(N, len(columns), dict(enumerate(columns)))
    if kernel_basis(M).dim:
        return None
    cols = {}
    for j, r in enumerate(rhs_list):
        x, _ = solve_linear(M, r)
        if x is None:
            return None
        cols[j] = sparse(x)
    return Matrix.from_columns(len(columns), dim_in, cols)


def antipodal_maps(E, B, C):
    """S_B: B -> C and S_C: C -> B from E(b⊗1) = E(1⊗S_B(b)) and
    (1⊗c)E = (S_C(c)⊗1)E, with their defining properties verified."""
    A = E.parent
    A2 = E.square
    n = A.dim
    t = E.element
    u = A.unit
    e1c = [A2.product(t, _outer(u, c, n)) for c in C.basis]
    eb1 = [A2.product(t, _outer(b, u, n)) for b in B.basis]
    S_B = _solve_map(e1c, eb1, B.dim)
    if S_B is None:
        raise StructureError("not separability", "E(b⊗1) = E(1⊗x) has no unique solution in C")
    ce1 = [A2.product(_outer(u, c, n), t) for c in C.basis]
    b1e = [A2.product(_outer(b, u, n), t) for b in B.basis]
    S_C = _solve_map(b1e, ce1, C.dim)
    if S_C is None:
        raise StructureError("not separability", "(1⊗c)E = (y⊗1)E has no unique solution in B")
    if S_B.rows != S_B.cols or inverse(S_B) is None or inverse(S_C) is None:
        raise StructureError("not separability", "antipodal maps are not bijective")
    for k, b in enumerate(B.basis):
        for l, b2 in enumerate(B.basis):
            lhs = _map_vec(S_B, B, C, A.product(b, b2))
            rhs = A.product(_map_vec(S_B, B, C, b2), _map_vec(S_B, B, C, b))
            if lhs != rhs:
                raise StructureError("not separability", "S_B is not anti-multiplicative", (k, l))
    for k, c in enumerate(C.basis):
        for l, c2 in enumerate(C.basis):
            lhs = _map_vec(S_C, C, B, A.product(c, c2))
            rhs = A.product(_map_vec(S_C, C, B, c2), _map_vec(S_C, C, B, c))
            if lhs != rhs:
                raise StructureError("not separability", "S_C is not anti-multiplicative", (k, l))
    return S_B, S_C


def _apply_left(t, M, S_from, S_to, n):
    """(M ⊗ ι)(t) for t ∈ S_from⊗A."""
    out = {}
    for k, y in enumerate(left_components(t, S_from, n)):
        img = S_to.combine(dense(M.column(k), M.rows))
        axpy(out, ONE, _outer(img, y, n))
    return out


def _apply_right(t, M, S_from, S_to, n):
    """(ι ⊗ M)(t) for t ∈ A⊗S_from."""
    out = {}
    for k, x in enumerate(right_components(t, S_from, n)):
        img = S_to.combine(dense(M.column(k), M.rows))
        axpy(out, ONE, _outer(x, img, n))
    return out


def _flip(t, n):
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        out[j * n + i] = x
    return out


def _multiply(A, t):
    n = A.dim
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        axpy(out, x, A.basis_product(i, j))
    return out


def distinguished_functionals(E, B, C, Balg=None, Calg=None):
    """φ_B with (φ_B⊗ι)E = 1 and φ_C with (ι⊗φ_C)E = 1."""
    A = E.parent
    n = A.dim
    t = E.element
    u = A.unit
    Balg = Balg or subalgebra(A, B)
    Calg = Calg or subalgebra(A, C)
    rows = left_components(t, B, n)
    M = Matrix.from_columns(n, B.dim, dict(enumerate(rows)))
    x, ker = solve_linear(M, u)
    if x is None or ker.dim:
        raise StructureError("not separability", "(φ_B⊗ι)E = 1 has no unique solution")
    phi_B = Functional(Balg, x)
    cols = right_components(t, C, n)
    M = Matrix.from_columns(n, C.dim, dict(enumerate(cols)))
    y, ker = solve_linear(M, u)
    if y is None or ker.dim:
        raise StructureError("not separability", "(ι⊗φ_C)E = 1 has no unique solution")
    phi_C = Functional(Calg, y)
    for name, alg, f in (("φ_B", Balg, phi_B), ("φ_C", Calg, phi_C)):
        gram = Matrix.from_function(alg.dim, alg.dim, lambda i, j: f(alg.basis_product(i, j)))
        if kernel_basis(gram).dim:
            raise StructureError("not separability", f"{name} is not faithful")
    return phi_B, phi_C


def _kms_violation(alg, phi, sigma):
    for i in range(alg.dim):
        si = sigma.column(i)
        for j in range(alg.dim):
            if phi(alg.basis_product(i, j)) != phi(alg.product({j: ONE}, si)):
                return (i, j)
    return None


def modular_automorphisms(S_B, S_C, phi_B, phi_C):
    """Automorphisms σ_B of B and σ_C of C with the weak KMS property
    φ_B(bb') = φ_B(b'σ_B(b)) and φ_C(cc') = φ_C(c'σ_C(c)).

    Two formulas circulate for each side: S_C S_B or its inverse on B, and
    S_B S_C or its inverse on C.  All four are returned in ``candidates``;
    on each side the one satisfying weak KMS is chosen, and ``warnings``
    records every side where the two formulas differ.
    """
    algs = {"B": (phi_B.parent, phi_B), "C": (phi_C.parent, phi_C)}
    sb_sc = S_B @ S_C
    sc_sb = S_C @ S_B
    candidates = {
        "B": {"S_C S_B": sc_sb, "S_B^-1 S_C^-1": inverse(sc_sb)},
        "C": {"S_B S_C": sb_sc, "S_C^-1 S_B^-1": inverse(sb_sc)},
    }
    chosen = {}
    warnings = []
    for side, forms in candidates.items():
        alg, phi = algs[side]
        good = [k for k, m in forms.items() if _kms_violation(alg, phi, m) is None]
        if not good:
            raise StructureError("modular automorphism", f"weak KMS fails on {side} with both formulas")
        chosen[side] = forms[good[0]]
        a, b = forms.values()
        if a != b:
            warnings.append(f"σ_{side}: formulas differ; weak KMS holds with {good[0]}")
    return chosen["B"], chosen["C"], candidates, warnings


def compute_F_multipliers(E, B, C, S_B, S_C):
    """F1=(ι⊗S_C)E, F2=(S_B⊗ι)E, F3=(ι⊗S_B⁻¹)E, F4=(S_C⁻¹⊗ι)E as elements."""
    n = E.parent.dim
    t = E.element
    S_Bi = inverse(S_B)
    S_Ci = inverse(S_C)
    F1 = _apply_right(t, S_C, C, B, n)
    F2 = _apply_left(t, S_B, B, C, n)
    F3 = _apply_right(t, S_Bi, C, B, n)
    F4 = _apply_left(t, S_Ci, B, C, n)
    return F1, F2, F3, F4


def F_identities_report(E, B, C, F):
    """The leg-numbered identities tying F1..F4 to E, plus m F1 = m F2 = 1."""
    A = E.parent
    n = A.dim
    u = A.unit
    t = E.element
    F1, F2, F3, F4 = F
    A3 = tensor_power(A, 3)
    E13 = leg13_element(A, t)
    one_E = {}
    E_one = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        for k, y in u.items():
            one_E[(k * n + i) * n + j] = x * y
            E_one[(i * n + j) * n + k] = x * y

    def ext_left(f):   # f ⊗ 1
        return {idx * n + k: x * y for idx, x in f.items() for k, y in u.items()}

    def ext_right(f):  # 1 ⊗ f
        N = n * n
        return {k * N + idx: x * y for idx, x in f.items() for k, y in u.items()}

    p = A3.product
    out = [
        Check("E13(F1⊗1) = E13(1⊗E)", p(E13, ext_left(F1)) == p(E13, one_E)),
        Check("(F3⊗1)E13 = (1⊗E)E13", p(ext_left(F3), E13) == p(one_E, E13)),
        Check("(1⊗F2)E13 = (E⊗1)E13", p(ext_right(F2), E13) == p(E_one, E13)),
        Check("E13(1⊗F4) = E13(E⊗1)", p(E13, ext_right(F4)) == p(E13, E_one)),
        Check("F1, F3 ∈ B⊗B", in_tensor(F1, B, B, n) and in_tensor(F3, B, B, n)),
        Check("F2, F4 ∈ C⊗C", in_tensor(F2, C, C, n) and in_tensor(F4, C, C, n)),
        Check("m F1 = 1", _multiply(A, F1) == u),
        Check("m F2 = 1", _multiply(A, F2) == u),
    ]
    return out


# ---------------------------------------------------------------------------

class SeparabilityStructure:
    """E with its legs and all derived separability data."""

    def __init__(self, E, B, C, Balg, Calg, S_B, S_C, phi_B, phi_C, sigma_B, sigma_C,
                 sigma_candidates, F, report, warnings):
        self.E = E
        self.B = B
        self.C = C
        self.Balg = Balg
        self.Calg = Calg
        self.S_B = S_B
        self.S_C = S_C
        self.phi_B = phi_B
        self.phi_C = phi_C
        self.sigma_B = sigma_B
        self.sigma_C = sigma_C
        self.sigma_candidates = sigma_candidates
        self.F1, self.F2, self.F3, self.F4 = F
        self.report = report
        self.warnings = warnings

    @property
    def B_basis(self):
        return self.B.basis

    @property
    def C_basis(self):
        return self.C.basis

    def S_B_on(self, v):
        """S_B applied to an element of A lying in B."""
        return _map_vec(self.S_B, self.B, self.C, v)

    def S_C_on(self, v):
        return _map_vec(self.S_C, self.C, self.B, v)

    def sigma_on(self, which, v):
        if which == "B":
            return _map_vec(self.sigma_B, self.B, self.B, v)
        return _map_vec(self.sigma_C, self.C, self.C, v)

    def __repr__(self):
        return f"SeparabilityStructure(dim B={self.B.dim}, dim C={self.C.dim})"


def separability_structure(E, B=None, C=None):
    """Run every separability step; raises StructureError("not separability")
    on the first failed requirement."""
    A = E.parent
    n = A.dim
    if A.unit is None:
        raise StructureError("unit", "separability data are computed for unital algebras")
    if B is None or C is None:
        B, C = extract_legs(E)
    report = separability_report(E, B, C)
    for c in report:
        if not c.passed:
            raise StructureError("not separability", c.name, c.witness)
    Balg = subalgebra(A, B, [f"b{i}" for i in range(B.dim)])
    Calg = subalgebra(A, C, [f"c{i}" for i in range(C.dim)])
    S_B, S_C = antipodal_maps(E, B, C)
    t = E.element
    # m_C (S_B⊗ι)(E(1⊗c)) = c and m_B (ι⊗S_C)((b⊗1)E) = b
    A2 = E.square
    u = A.unit
    ok_c = all(_multiply(A, _apply_left(A2.product(t, _outer(u, c, n)), S_B, B, C, n)) == c for c in C.basis)
    ok_b = all(_multiply(A, _apply_right(A2.product(_outer(b, u, n), t), S_C, C, B, n)) == b for b in B.basis)
    report.append(Check("m(S_B⊗ι)(E(1⊗c)) = c", ok_c))
    report.append(Check("m(ι⊗S_C)((b⊗1)E) = b", ok_b))
    tau = _coeffs(t, B, C, n)
    lhs = {}
    for k in range(B.dim):
        sb = _map_vec(S_B, B, C, B.basis[k])
        for l in range(C.dim):
            if tau[k][l]:
                axpy(lhs, tau[k][l], _outer(sb, _map_vec(S_C, C, B, C.basis[l]), n))
    report.append(Check("(S_B⊗S_C)E = ζE", lhs == _flip(t, n)))
    phi_B, phi_C = distinguished_functionals(E, B, C, Balg, Calg)
    comp = Functional(Balg, [phi_C(S_B.column(k)) for k in range(B.dim)])
    report.append(Check("φ_B = φ_C∘S_B", comp == phi_B))
    comp = Functional(Calg, [phi_B(S_C.column(k)) for k in range(C.dim)])
    report.append(Check("φ_C = φ_B∘S_C", comp == phi_C))
    sigma_B, sigma_C, cands, warnings = modular_automorphisms(S_B, S_C, phi_B, phi_C)
    report.append(Check("weak KMS for φ_B", True))
    report.append(Check("weak KMS for φ_C", True))
    both = {}
    for k in range(B.dim):
        sb = _map_vec(cands["B"]["S_C S_B"], B, B, B.basis[k])
        for l in range(C.dim):
            if tau[k][l]:
                axpy(both, tau[k][l], _outer(sb, _map_vec(cands["C"]["S_B S_C"], C, C, C.basis[l]), n))
    report.append(Check("(S_C S_B ⊗ S_B S_C)E = E", both == t))
    F = compute_F_multipliers(E, B, C, S_B, S_C)
    report.extend(F_identities_report(E, B, C, F))
    report.append(Check("B and C commute", all(A.product(b, c) == A.product(c, b) for b in B.basis for c in C.basis)))
    report.append(Check("B has a unit", Balg.unit is not None))
    report.append(Check("C has a unit", Calg.unit is not None))
    for c in report:
        if not c.passed:
            raise StructureError("not separability", c.name, c.witness)
    return SeparabilityStructure(E, B, C, Balg, Calg, S_B, S_C, phi_B, phi_C, sigma_B, sigma_C,
                                 cands, F, report, warnings)


# ---------------------------------------------------------------------------

def is_psd(G):
    """Exact positive semidefiniteness of a Hermitian matrix (LDL* with
    the rule that a zero pivot forces a zero row)."""
    n = G.rows
    M = [[G.entry(i, j) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if M[i][j] != M[j][i].conj():
                return False
    active = list(range(n))
    while active:
        k = active[0]
        d = M[k][k]
        if not d.is_real:
            return False
        if d.re < 0:
            return False
        if d.re == 0:
            if any(M[k][j] for j in active):
                return False
            active.pop(0)
            continue
        rest = active[1:]
        for i in rest:
            f = M[i][k] / d
            if f:
                for j in rest:
                    M[i][j] = M[i][j] - f * M[k][j]
        active = rest
    return True


def involutive_report(S, A=None):
    """Involution compatibility of the separability data; E must be self-adjoint."""
    E = S.E
    A = A or E.parent
    n = A.dim
    if A.involution is None:
        raise StructureError("involution", "algebra carries no involution")
    t = E.element
    star_t = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        axpy(star_t, x.conj(), _outer(A.star({i: ONE}), A.star({j: ONE}), n))
    if star_t != t:
        raise StructureError("involution", "E is not self-adjoint")
    out = []
    okb = True
    for b in S.B.basis:
        bs = A.star(b)
        if not S.B.contains(bs):
            okb = False
            break
        if A.star(S.S_C_on(S.S_B_on(bs))) != b:
            okb = False
            break
    out.append(Check("S_C(S_B(b*))* = b", okb))
    okc = True
    for c in S.C.basis:
        x = A.star(S.S_C_on(c))
        if not S.B.contains(x) or A.star(S.S_B_on(x)) != c:
            okc = False
            break
    out.append(Check("S_B(S_C(c)*)* = c", okc))
    for name, Sp, phi in (("φ_B", S.B, S.phi_B), ("φ_C", S.C, S.phi_C)):
        coords = lambda v, Sp=Sp: {k: v[p] for k, p in enumerate(Sp.pivots) if p in v}  # noqa: E731
        gram = Matrix.from_function(Sp.dim, Sp.dim,
                                    lambda i, j, Sp=Sp, phi=phi: phi(coords(A.product(A.star(Sp.basis[i]), Sp.basis[j]))))
        out.append(Check(f"{name} positive", is_psd(gram)))
    return out


def check_involutive(S, A=None):
    return all(c.passed for c in involutive_report(S, A))
