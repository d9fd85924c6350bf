"""Finite-dimensional algebras given by structure constants, their
multipliers, tensor powers and leg-numbering embeddings."""

from __future__ import annotations

from functools import cached_property
from itertools import product as cartesian

from .exact_linalg import (
    ONE, ZERO, Matrix, Scalar, Subspace, axpy, dense, kernel_basis, solve_linear,
    sparse, vconj, vscale,
)

__all__ = [
    "FinAlgebra", "TensorPower", "Multiplier", "Functional", "StructureError",
    "check_associativity", "associativity_violation", "check_nondegenerate",
    "nondegeneracy_violation", "check_idempotent_algebra", "multiplier_algebra",
    "embed", "tensor_square", "tensor_power", "leg13", "leg13_element",
    "tensor", "slice_left", "slice_right", "flip", "involution_violation",
    "left1", "right1", "left2", "right2", "apply_legs", "multiply_legs",
    "Check", "all_passed", "first_failure", "identity_multiplier",
]

_EMPTY = {}


class StructureError(ValueError):
    """An algebraic law failed; ``law`` names it and ``witness`` locates it."""

    def __init__(self, law, message, witness=None):
        super().__init__(f"{law}: {message}")
        self.law = law
        self.witness = witness


class FinAlgebra:
    """Algebra with basis e_0..e_{dim-1} and e_i e_j = sum_k mult[i,j,k] e_k.

    ``mult`` may be a dict keyed by (i, j, k), a dict keyed by (i, j) holding
    sparse output vectors, or a nested dim x dim x dim list.  The optional
    involution is a matrix J with (sum x_i e_i)* = J conj(x).
    Nothing is validated here; see the check_* functions.
    """

    def __init__(self, dim, basis_names=None, mult=None, involution=None):
        self.dim = dim
        self.basis_names = tuple(basis_names) if basis_names is not None else tuple(f"e{i}" for i in range(dim))
        if len(self.basis_names) != dim:
            raise ValueError("basis_names has the wrong length")
        self._table = _read_table(dim, mult) if mult is not None else {}
        if involution is not None and (involution.rows, involution.cols) != (dim, dim):
            raise ValueError("involution has the wrong shape")
        self.involution = involution

    def basis_product(self, i, j):
        """Sparse e_i e_j (shared; do not mutate)."""
        return self._table.get((i, j), _EMPTY)

    def product(self, u, v):
        out = {}
        bp = self.basis_product
        for i, x in u.items():
            for j, y in v.items():
                p = bp(i, j)
                if p:
                    c = x * y
                    for k, z in p.items():
                        w = out.get(k)
                        out[k] = c * z if w is None else w + c * z
        return {k: x for k, x in out.items() if x}

    def e(self, i):
        return {i: ONE}

    def structure_constants(self):
        """Sorted nonzero (i, j, k, Scalar) entries."""
        out = []
        for i in range(self.dim):
            for j in range(self.dim):
                for k, x in sorted(self.basis_product(i, j).items()):
                    out.append((i, j, k, x))
        return out

    def left_matrix(self, u):
        u = _vec(u)
        return Matrix.from_columns(self.dim, self.dim,
                                   {j: self.product(u, {j: ONE}) for j in range(self.dim)})

    def right_matrix(self, u):
        u = _vec(u)
        return Matrix.from_columns(self.dim, self.dim,
                                   {j: self.product({j: ONE}, u) for j in range(self.dim)})

    @cached_property
    def unit(self):
        """Sparse unit element, or None when the algebra has none."""
        n = self.dim
        entries = {}
        rhs = {}
        row = 0
        for j in range(n):
            for side in (0, 1):
                for k in range(n):
                    for i in range(n):
                        c = (self.basis_product(i, j) if side == 0 else self.basis_product(j, i)).get(k)
                        if c:
                            entries[(row, i)] = c
                    if j == k:
                        rhs[row] = ONE
                    row += 1
        x, _ = solve_linear(Matrix(row, n, entries), rhs)
        if x is None:
            return None
        return sparse(x)

    def star(self, u):
        if self.involution is None:
            raise StructureError("involution", "algebra carries no involution")
        return self.involution.apply(vconj(u))

    def __eq__(self, other):
        if not isinstance(other, FinAlgebra):
            return NotImplemented
        return (self.dim == other.dim and self.basis_names == other.basis_names
                and self.structure_constants() == other.structure_constants()
                and self.involution == other.involution)

    __hash__ = object.__hash__

    def __repr__(self):
        return f"FinAlgebra(dim={self.dim})"


def _read_table(dim, mult):
    table = {}
    if isinstance(mult, dict):
        for key, val in mult.items():
            if len(key) == 3:
                i, j, k = key
                _check_index(dim, i, j, k)
                x = Scalar.coerce(val)
                if x:
                    cell = table.setdefault((i, j), {})
                    y = cell.get(k)
                    cell[k] = x if y is None else y + x
            else:
                i, j = key
                _check_index(dim, i, j)
                v = sparse(val)
                _check_index(dim, *v)
                if v:
                    table[(i, j)] = v
    else:
        for i in range(dim):
            for j in range(dim):
                v = sparse(mult[i][j])
                if v:
                    table[(i, j)] = v
    return {key: {k: x for k, x in v.items() if x} for key, v in table.items() if any(v.values())}


def _check_index(dim, *idx):
    for i in idx:
        if not 0 <= i < dim:
            raise ValueError(f"basis index {i} out of range for dimension {dim}")


def _vec(u):
    return u if isinstance(u, dict) else sparse(u)


class TensorPower(FinAlgebra):
    """A^{(x)p} with row-major basis; products computed from the base on demand."""

    def __init__(self, base, power):
        self.base = base
        self.power = power
        self.dim = base.dim ** power
        self.involution = None
        self._table = None

    @cached_property
    def basis_names(self):
        return tuple("⊗".join(t) for t in cartesian(self.base.basis_names, repeat=self.power))

    @cached_property
    def _digit_table(self):
        return list(cartesian(range(self.base.dim), repeat=self.power))

    def digits(self, i):
        return self._digit_table[i]

    def basis_product(self, i, j):
        n = self.base.dim
        acc = {0: ONE}
        for a, b in zip(self.digits(i), self.digits(j)):
            p = self.base.basis_product(a, b)
            if not p:
                return _EMPTY
            acc = {k * n + m: x * y for k, x in acc.items() for m, y in p.items()}
        return acc

    @cached_property
    def _partners(self):
        # per base index, the indices with a nonzero product on its right
        A = self.base
        return [frozenset(b for b in range(A.dim) if A.basis_product(a, b)) for a in range(A.dim)]

    def product(self, u, v):
        # v is indexed as a trie over its legs so only pairs whose products
        # are nonzero on every leg get visited; caching basis pairs would
        # need memory growing like n^(2p)
        n = self.base.dim
        bp = self.base.basis_product
        if len(v) == 1 or len(u) == 1:
            # one side is a single basis tensor: no index needed
            out = {}
            for i, x in u.items():
                for j, y in v.items():
                    p = self.basis_product(i, j)
                    if p:
                        c = x * y
                        for k, z in p.items():
                            w = out.get(k)
                            out[k] = c * z if w is None else w + c * z
            return {k: x for k, x in out.items() if x}
        trie = {}
        for j, y in v.items():
            node = trie
            ds = self.digits(j)
            for d in ds[:-1]:
                node = node.setdefault(d, {})
            node[ds[-1]] = y
        out = {}
        for i, x in u.items():
            states = [(trie, {0: x})]
            for a in self.digits(i):
                part = self._partners[a]
                nxt = []
                for node, acc in states:
                    for b, child in node.items():
                        if b in part:
                            p = bp(a, b)
                            nxt.append((child, {k * n + m: c * z for k, c in acc.items() for m, z in p.items()}))
                states = nxt
                if not states:
                    break
            for y, acc in states:
                for k, c in acc.items():
                    w = out.get(k)
                    out[k] = c * y if w is None else w + c * y
        return {k: x for k, x in out.items() if x}

    @cached_property
    def unit(self):
        u = self.base.unit
        if u is None:
            return None
        acc = {0: ONE}
        for _ in range(self.power):
            acc = tensor(acc, u, self.base.dim)
        return acc

    def star(self, u):
        J = self.base.involution
        if J is None:
            raise StructureError("involution", "algebra carries no involution")
        out = {}
        n = self.base.dim
        for i, x in u.items():
            acc = {0: x.conj()}
            for d in self.digits(i):
                acc = tensor(acc, J.column(d), n)
            axpy(out, ONE, acc)
        return out

    def __repr__(self):
        return f"TensorPower(dim={self.dim}, power={self.power})"


def tensor_square(A):
    return TensorPower(A, 2)


def tensor_power(A, p):
    return TensorPower(A, p)


# ---------------------------------------------------------------------------
# elementary tensors and slices (row-major indexing)

def tensor(u, v, dim_v):
    out = {}
    for i, x in u.items():
        for j, y in v.items():
            out[i * dim_v + j] = x * y
    return out


def slice_left(t, f, n):
    """(f (x) id)(t) for a coefficient dict f on the first leg."""
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        c = f.get(i)
        if c is not None:
            y = out.get(j)
            out[j] = c * x if y is None else y + c * x
    return {k: x for k, x in out.items() if x}


def slice_right(t, f, n):
    """(id (x) f)(t)."""
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        c = f.get(j)
        if c is not None:
            y = out.get(i)
            out[i] = c * x if y is None else y + c * x
    return {k: x for k, x in out.items() if x}


def flip(t, n):
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        out[j * n + i] = x
    return out


# ---------------------------------------------------------------------------

def associativity_violation(A):
    n = A.dim
    bp = A.basis_product
    for i in range(n):
        for j in range(n):
            ij = bp(i, j)
            for k in range(n):
                left = A.product(ij, {k: ONE})
                right = A.product({i: ONE}, bp(j, k))
                if left != right:
                    return (i, j, k)
    return None


def check_associativity(A):
    return associativity_violation(A) is None


def nondegeneracy_violation(A):
    """A nonzero a with a*A = 0 or A*a = 0, tagged by side, or None."""
    n = A.dim
    for side in ("left", "right"):
        # column a maps to the concatenation of its products with the basis
        cols = {}
        for a in range(n):
            col = {}
            for b in range(n):
                p = A.basis_product(a, b) if side == "left" else A.basis_product(b, a)
                for k, x in p.items():
                    col[b * n + k] = x
            cols[a] = col
        ker = kernel_basis(Matrix.from_columns(n * n, n, cols))
        if ker.dim:
            return side, dense(ker.basis[0], n)
    return None


def check_nondegenerate(A):
    return nondegeneracy_violation(A) is None


def check_idempotent_algebra(A):
    n = A.dim
    span = Subspace(n, [A.basis_product(i, j) for i in range(n) for j in range(n)])
    return span.dim == n


def involution_violation(A):
    """Check (ab)* = b* a* and a** = a on the basis."""
    if A.involution is None:
        return None
    n = A.dim
    for i in range(n):
        if A.star(A.star({i: ONE})) != {i: ONE}:
            return ("double star", i)
    for i in range(n):
        si = A.star({i: ONE})
        for j in range(n):
            if A.star(A.basis_product(i, j)) != A.product(A.star({j: ONE}), si):
                return ("anti-multiplicative", i, j)
    return None


# ---------------------------------------------------------------------------

class Multiplier:
    """Pair (lam, rho) of a left action b -> m b and a right action a -> a m."""

    __slots__ = ("parent", "lam", "rho", "__dict__")

    def __init__(self, parent, lam, rho):
        n = parent.dim
        if (lam.rows, lam.cols) != (n, n) or (rho.rows, rho.cols) != (n, n):
            raise ValueError("multiplier actions have the wrong shape")
        self.parent = parent
        self.lam = lam
        self.rho = rho

    def __mul__(self, other):
        return Multiplier(self.parent, self.lam @ other.lam, other.rho @ self.rho)

    def __add__(self, other):
        return Multiplier(self.parent, self.lam + other.lam, self.rho + other.rho)

    def __sub__(self, other):
        return Multiplier(self.parent, self.lam - other.lam, self.rho - other.rho)

    def scale(self, c):
        return Multiplier(self.parent, self.lam.scale(c), self.rho.scale(c))

    def __eq__(self, other):
        if not isinstance(other, Multiplier):
            return NotImplemented
        return self.lam == other.lam and self.rho == other.rho

    __hash__ = None

    def left(self, v):
        return self.lam.apply(v)

    def right(self, v):
        return self.rho.apply(v)

    def law_violation(self):
        """First failing basis pair for the module and compatibility laws."""
        A = self.parent
        n = A.dim
        lam, rho = self.lam, self.rho
        for a in range(n):
            la = lam.column(a)
            ra = rho.column(a)
            for b in range(n):
                ab = A.basis_product(a, b)
                if lam.apply(ab) != A.product(la, {b: ONE}):
                    return ("left module", a, b)
                if rho.apply(ab) != A.product({a: ONE}, rho.column(b)):
                    return ("right module", a, b)
                if A.product(ra, {b: ONE}) != A.product({a: ONE}, lam.column(b)):
                    return ("compatibility", a, b)
        return None

    def check(self):
        return self.law_violation() is None

    def is_idempotent(self):
        return self * self == self

    @cached_property
    def element(self):
        """The element t of A with embed(t) == self, or None."""
        A = self.parent
        u = A.unit
        if u is not None:
            t = self.lam.apply(u)
        else:
            # solve t e_b = lam(e_b) for all b
            n = A.dim
            cols = {}
            for i in range(n):
                col = {}
                for b in range(n):
                    for k, x in A.basis_product(i, b).items():
                        col[b * n + k] = x
                cols[i] = col
            rhs = {}
            for b in range(n):
                for k, x in self.lam.column(b).items():
                    rhs[b * n + k] = x
            sol, _ = solve_linear(Matrix.from_columns(n * n, n, cols), rhs)
            if sol is None:
                return None
            t = sparse(sol)
        if embed(A, t) != self:
            return None
        return t

    def __repr__(self):
        return f"Multiplier(dim={self.parent.dim})"


def embed(A, a):
    a = _vec(a)
    return Multiplier(A, A.left_matrix(a), A.right_matrix(a))


def identity_multiplier(A):
    I = Matrix.identity(A.dim)
    return Multiplier(A, I, I)


def multiplier_algebra(A):
    """Basis of M(A) as multipliers, with the algebra structure they span."""
    bad = nondegeneracy_violation(A)
    if bad is not None:
        raise StructureError("non-degeneracy", "multiplier pairing needs a non-degenerate product", bad)
    n = A.dim
    nn = n * n
    L = lambda r, c: r * n + c           # noqa: E731  unknown L[r][c]
    R = lambda r, c: nn + r * n + c      # noqa: E731  unknown R[r][c]
    rows = []

    def eq():
        rows.append({})
        return rows[-1]

    def add(row, key, c):
        y = row.get(key)
        z = c if y is None else y + c
        if z:
            row[key] = z
        else:
            row.pop(key, None)

    for a in range(n):
        for b in range(n):
            ab = A.basis_product(a, b)
            for k in range(n):
                # lam(ab) = lam(a) b
                row = eq()
                for c, x in ab.items():
                    add(row, L(k, c), x)
                for r in range(n):
                    x = A.basis_product(r, b).get(k)
                    if x:
                        add(row, L(r, a), -x)
                # rho(ab) = a rho(b)
                row = eq()
                for c, x in ab.items():
                    add(row, R(k, c), x)
                for r in range(n):
                    x = A.basis_product(a, r).get(k)
                    if x:
                        add(row, R(r, b), -x)
                # rho(a) b = a lam(b)
                row = eq()
                for r in range(n):
                    x = A.basis_product(r, b).get(k)
                    if x:
                        add(row, R(r, a), x)
                    y = A.basis_product(a, r).get(k)
                    if y:
                        add(row, L(r, b), -y)
    entries = {(i, key): x for i, row in enumerate(rows) for key, x in row.items()}
    sol = kernel_basis(Matrix(len(rows), 2 * nn, entries))

    def to_mult(v):
        lam = Matrix(n, n, {(r, c): v[L(r, c)] for r in range(n) for c in range(n) if L(r, c) in v})
        rho = Matrix(n, n, {(r, c): v[R(r, c) - 0] for r in range(n) for c in range(n) if R(r, c) in v})
        return Multiplier(A, lam, rho)

    def to_vec(m):
        v = {}
        for c in range(n):
            for r, x in m.lam.column(c).items():
                v[L(r, c)] = x
            for r, x in m.rho.column(c).items():
                v[R(r, c)] = x
        return v

    basis = [to_mult(v) for v in sol.basis]
    mult = {}
    for i, mi in enumerate(basis):
        for j, mj in enumerate(basis):
            coords = sol.coordinates(to_vec(mi * mj))
            if coords is None:
                raise StructureError("multiplier algebra", "product of multipliers left the solution space", (i, j))
            for k, x in enumerate(coords):
                if x:
                    mult[(i, j, k)] = x
    names = [f"m{i}" for i in range(len(basis))]
    return basis, FinAlgebra(len(basis), names, mult)


# ---------------------------------------------------------------------------

def leg13(A, m):
    """Multiplier of A(x)A(x)A acting with m on legs 1 and 3."""
    n = A.dim
    A3 = tensor_power(A, 3)

    def act(M):
        cols = {}
        for idx in range(n ** 3):
            x, rest = divmod(idx, n * n)
            y, z = divmod(rest, n)
            out = {}
            for k, c in M.column(x * n + z).items():
                u, w = divmod(k, n)
                out[(u * n + y) * n + w] = c
            if out:
                cols[idx] = out
        return Matrix.from_columns(n ** 3, n ** 3, cols)

    return Multiplier(A3, act(m.lam), act(m.rho))


def leg13_element(A, t):
    """sum t_ij e_i (x) 1 (x) e_j for a unital A."""
    n = A.dim
    u = A.unit
    if u is None:
        raise StructureError("unit", "leg numbering of elements needs a unit")
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        for k, y in u.items():
            out[(i * n + k) * n + j] = x * y
    return out


class Functional:
    """Linear functional on A given by its values on the basis."""

    __slots__ = ("parent", "coeffs", "_sp")

    def __init__(self, parent, coeffs):
        coeffs = tuple(Scalar.coerce(c) for c in coeffs)
        if len(coeffs) != parent.dim:
            raise ValueError("functional length differs from the algebra dimension")
        self.parent = parent
        self.coeffs = coeffs
        self._sp = {k: c for k, c in enumerate(coeffs) if c}

    @classmethod
    def from_sparse(cls, parent, f):
        return cls(parent, dense(f, parent.dim))

    @property
    def sparse(self):
        return self._sp

    def __call__(self, v):
        s = ZERO
        sp = self._sp
        for k, x in v.items():
            c = sp.get(k)
            if c is not None:
                s = s + c * x
        return s

    def __eq__(self, other):
        if not isinstance(other, Functional):
            return NotImplemented
        return self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self):
        return "Functional(" + ", ".join(str(c) for c in self.coeffs) + ")"


def scaled(c, v):
    return vscale(c, v)


# ---------------------------------------------------------------------------
# one-leg multiplications on A(x)A; none of these needs a unit

def left1(A, a, t):
    """(a (x) 1) t"""
    n = A.dim
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        for k, y in A.product(a, {i: ONE}).items():
            axpy(out, ONE, {k * n + j: x * y})
    return out


def right1(A, t, a):
    """t (a (x) 1)"""
    n = A.dim
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        for k, y in A.product({i: ONE}, a).items():
            axpy(out, ONE, {k * n + j: x * y})
    return out


def left2(A, a, t):
    """(1 (x) a) t"""
    n = A.dim
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        for k, y in A.product(a, {j: ONE}).items():
            axpy(out, ONE, {i * n + k: x * y})
    return out


def right2(A, t, a):
    """t (1 (x) a)"""
    n = A.dim
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        for k, y in A.product({j: ONE}, a).items():
            axpy(out, ONE, {i * n + k: x * y})
    return out


def apply_legs(t, f, g, n):
    """(f (x) g)(t) for linear maps f, g on sparse vectors (None = identity)."""
    out = {}
    cache_f, cache_g = {}, {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        fi = cache_f.get(i)
        if fi is None:
            fi = cache_f[i] = {i: ONE} if f is None else f({i: ONE})
        gj = cache_g.get(j)
        if gj is None:
            gj = cache_g[j] = {j: ONE} if g is None else g({j: ONE})
        for k, y in fi.items():
            for m, z in gj.items():
                axpy(out, ONE, {k * n + m: x * y * z})
    return out


def multiply_legs(A, t):
    """m(t) = sum x_i y_i for t = sum x_i (x) y_i."""
    n = A.dim
    out = {}
    for idx, x in t.items():
        i, j = divmod(idx, n)
        axpy(out, x, A.basis_product(i, j))
    return out


# ---------------------------------------------------------------------------
# named check records shared by the verification stages

class Check:
    """Outcome of one named identity check; ``witness`` locates a failure."""

    __slots__ = ("name", "passed", "witness", "detail")

    def __init__(self, name, passed, witness=None, detail=""):
        self.name = name
        self.passed = bool(passed)
        self.witness = witness
        self.detail = detail

    def as_dict(self):
        out = {"name": self.name, "passed": self.passed}
        if self.witness is not None:
            out["witness"] = _plain(self.witness)
        if self.detail:
            out["detail"] = self.detail
        return out

    def __repr__(self):
        mark = "ok" if self.passed else "FAIL"
        return f"Check({self.name!r}, {mark})"


def _plain(w):
    if isinstance(w, Scalar):
        return str(w)
    if isinstance(w, dict):
        return {str(k): _plain(v) for k, v in sorted(w.items(), key=lambda kv: str(kv[0]))}
    if isinstance(w, (list, tuple)):
        return [_plain(x) for x in w]
    return w


def all_passed(report):
    return all(c.passed for c in report)


def first_failure(report):
    for c in report:
        if not c.passed:
            return c
    return None
