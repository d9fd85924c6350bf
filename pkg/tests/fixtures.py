"""Hand-built fixtures shared by the test modules."""

from fractions import Fraction

from weakhopf.algebra_core import FinAlgebra, Functional
from weakhopf.coproduct import CanonicalIdempotent, Coproduct
from weakhopf.exact_linalg import ONE, Matrix, Scalar, Subspace, axpy, solve_linear, sparse


def matrix_units(n):
    """M_n with e_ij at index i*n + j."""
    mult = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                mult[(i * n + j, j * n + k, i * n + k)] = 1
    names = [f"e{i + 1}{j + 1}" for i in range(n) for j in range(n)]
    return FinAlgebra(n * n, names, mult)


def opposite(A):
    mult = {(j, i, k): x for i, j, k, x in A.structure_constants()}
    return FinAlgebra(A.dim, [f"{s}°" for s in A.basis_names], mult)


def tensor_algebra(A, B):
    m = B.dim
    mult = {}
    for i, j, k, x in A.structure_constants():
        for p, q, r, y in B.structure_constants():
            key = (i * m + p, j * m + q, k * m + r)
            mult[key] = x * y
    names = [f"{a}⊗{b}" for a in A.basis_names for b in B.basis_names]
    return FinAlgebra(A.dim * m, names, mult)


def _mt(u, v, n):
    return {i * n + j: a * b for i, a in u.items() for j, b in v.items()}


def skewed_separability(w=(Fraction(1, 3), Fraction(2, 3))):
    """A = M_2 ⊗ M_2^op, B = M_2 ⊗ 1, C = 1 ⊗ M_2^op and
    E = sum_{k,i} w_k (e_ki ⊗ 1) ⊗ (1 ⊗ e_ik); idempotent iff sum w = 1."""
    M = matrix_units(2)
    A = tensor_algebra(M, opposite(M))
    n = A.dim
    one = {0: ONE, 3: ONE}
    left = lambda k, i: _mt({k * 2 + i: ONE}, one, 4)    # noqa: E731
    right = lambda i, k: _mt(one, {i * 2 + k: ONE}, 4)   # noqa: E731
    t = {}
    for k in range(2):
        for i in range(2):
            axpy(t, Scalar.coerce(w[k]), _mt(left(k, i), right(i, k), n))
    B = Subspace(n, [left(k, i) for k in range(2) for i in range(2)])
    C = Subspace(n, [right(i, k) for k in range(2) for i in range(2)])
    return A, CanonicalIdempotent.standalone(A, t), B, C


def nonfull_separability():
    """sum_i (e_i1 ⊗ 1) ⊗ (1 ⊗ e_1i) in the same ambient algebra, tested
    against the full B = M_2 ⊗ 1 and C = 1 ⊗ M_2^op."""
    A, _, B, C = skewed_separability()
    n = A.dim
    one = {0: ONE, 3: ONE}
    t = {}
    for i in range(2):
        axpy(t, ONE, _mt(_mt({i * 2 + 0: ONE}, one, 4), _mt(one, {0 * 2 + i: ONE}, 4), n))
    return A, CanonicalIdempotent.standalone(A, t), B, C


def corner_idempotent():
    """E = e11 ⊗ e11 inside M_2 with B = C = M_2."""
    A = matrix_units(2)
    full = Subspace.full(4)
    return A, CanonicalIdempotent.standalone(A, {0: ONE}), full, full


def rebase(A, D, P, eps=None):
    """Present (A, Δ) in the basis f_j = sum_i P[i][j] e_i."""
    n = A.dim
    Pm = Matrix(n, n, {(i, j): Scalar.coerce(P[i][j]) for i in range(n) for j in range(n) if P[i][j]})
    cols = [Pm.column(j) for j in range(n)]

    def coords(v):
        x, _ = solve_linear(Pm, v)
        return sparse(x)

    mult = {}
    for i in range(n):
        for j in range(n):
            for k, x in coords(A.product(cols[i], cols[j])).items():
                mult[(i, j, k)] = x
    names = [f"f{j}" for j in range(n)]
    B = FinAlgebra(n, names, mult)
    els = []
    for j in range(n):
        d = D(cols[j])
        out = {}
        for idx, x in d.items():
            a, b = divmod(idx, n)
            ca, cb = coords({a: ONE}), coords({b: ONE})
            axpy(out, x, _mt(ca, cb, n))
        els.append(out)
    D2 = Coproduct.from_elements(B, els)
    if eps is None:
        return B, D2
    return B, D2, Functional(B, [eps(cols[j]) for j in range(n)])


def skewed_weak_hopf(w=(Fraction(1, 3), Fraction(2, 3))):
    """A = M_2 ⊗ M_2^op with Δ(x⊗y°) = sum_{k,i} w_k (x⊗e_ik°) ⊗ (e_ki⊗y°).

    Multiplicative and coassociative because sum w = 1; the canonical
    idempotent is non-tracial unless the weights agree."""
    M = matrix_units(2)
    A = tensor_algebra(M, opposite(M))
    n = A.dim
    els = []
    for x in range(4):
        for y in range(4):
            t = {}
            for k in range(2):
                for i in range(2):
                    axpy(t, Scalar.coerce(w[k]), {(x * 4 + i * 2 + k) * n + (k * 2 + i) * 4 + y: ONE})
            els.append(t)
    return A, Coproduct.from_elements(A, els)
