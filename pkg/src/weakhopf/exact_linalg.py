"""Exact linear algebra over the Gaussian rationals Q(i).

Vectors are sparse dicts ``{index: Scalar}`` with no zero entries.  Matrices
store their columns sparsely; callers see a plain rows x cols grid through
``entry``, ``to_dense`` and equality.
"""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

__all__ = [
    "Scalar", "Matrix", "Subspace", "Eliminator", "LinalgError",
    "solve_linear", "kernel_basis", "image_basis", "subspace_equal",
    "restricted_inverse", "inverse", "rank", "sparse", "dense",
]


class LinalgError(ValueError):
    pass


_Q0 = mpq(0)
_Q1 = mpq(1)


def _q(x):
    if isinstance(x, int):
        return mpq(x)
    if type(x) is type(_Q0):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            return mpq(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad rational {x!r}") from exc
    raise TypeError(f"cannot make a rational out of {type(x).__name__}")


_RAT = r"[+-]?\d+(?:/\d+)?"
_FULL_RE = re.compile(rf"^({_RAT})(?:([+-])(\d+(?:/\d+)?)\*i)?$")
_IMAG_RE = re.compile(rf"^({_RAT})\*i$")


class Scalar:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __new__(cls, re=0, im=0):
        if isinstance(re, Scalar):
            return re if not im else re + Scalar(0, im)
        self = object.__new__(cls)
        self.re = _q(re)
        self.im = _q(im)
        return self

    @classmethod
    def parse(cls, text):
        """Read ``a``, ``a/b``, ``a/b+c/d*i``, ``a/b-c/d*i`` or ``c/d*i``."""
        t = "".join(text.split())
        try:
            m = _FULL_RE.match(t)
            if m:
                im = 0
                if m.group(2):
                    im = mpq(m.group(3)) if m.group(2) == "+" else -mpq(m.group(3))
                return cls(mpq(m.group(1)), im)
            m = _IMAG_RE.match(t)
            if m:
                return cls(0, mpq(m.group(1)))
        except ZeroDivisionError as exc:
            raise ValueError(f"zero denominator in {text!r}") from exc
        raise ValueError(f"bad scalar {text!r}")

    @classmethod
    def coerce(cls, x):
        if type(x) is Scalar:
            return x
        if isinstance(x, str):
            return cls.parse(x)
        if isinstance(x, complex):
            raise TypeError("floating point complex numbers are not exact")
        return cls(x)

    # exact integer views of the canonical form
    @property
    def re_num(self):
        return int(self.re.numerator)

    @property
    def re_den(self):
        return int(self.re.denominator)

    @property
    def im_num(self):
        return int(self.im.numerator)

    @property
    def im_den(self):
        return int(self.im.denominator)

    def is_real(self):
        return not self.im

    def conj(self):
        return _mk(self.re, -self.im)

    def norm2(self):
        """|z|^2 as a real Scalar."""
        return _mk(self.re * self.re + self.im * self.im, _Q0)

    def __add__(self, o):
        if type(o) is not Scalar:
            if not isinstance(o, (int, Fraction)):
                return NotImplemented
            o = Scalar(o)
        return _mk(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        if type(o) is not Scalar:
            if not isinstance(o, (int, Fraction)):
                return NotImplemented
            o = Scalar(o)
        return _mk(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return Scalar.coerce(o) - self

    def __mul__(self, o):
        if type(o) is not Scalar:
            if not isinstance(o, (int, Fraction)):
                return NotImplemented
            o = Scalar(o)
        a, b, c, d = self.re, self.im, o.re, o.im
        if not b and not d:
            return _mk(a * c, _Q0)
        return _mk(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self):
        a, b = self.re, self.im
        if not b:
            if not a:
                raise ZeroDivisionError("Scalar division by zero")
            return _mk(1 / a, _Q0)
        n = a * a + b * b
        return _mk(a / n, -b / n)

    def __truediv__(self, o):
        return self * Scalar.coerce(o).inverse()

    def __rtruediv__(self, o):
        return Scalar.coerce(o) * self.inverse()

    def __neg__(self):
        return _mk(-self.re, -self.im)

    def __pos__(self):
        return self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        if type(o) is Scalar:
            return self.re == o.re and self.im == o.im
        if isinstance(o, (int, Fraction)):
            return not self.im and self.re == o
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __str__(self):
        r = _qstr(self.re)
        if not self.im:
            return r
        sign = "-" if self.im < 0 else "+"
        return f"{r}{sign}{_qstr(abs(self.im))}*i"

    def __repr__(self):
        return f"Scalar('{self}')"


def _qstr(q):
    if q.denominator == 1:
        return str(int(q.numerator))
    return f"{int(q.numerator)}/{int(q.denominator)}"


def _mk(re, im):
    s = object.__new__(Scalar)
    s.re = re
    s.im = im
    return s


ZERO = _mk(_Q0, _Q0)
ONE = _mk(_Q1, _Q0)
Scalar.ZERO = ZERO
Scalar.ONE = ONE


# ---------------------------------------------------------------------------
# sparse vector helpers

def sparse(v):
    """Coerce a dense sequence or a dict into a sparse dict of Scalars."""
    if isinstance(v, dict):
        out = {}
        for k, x in v.items():
            x = Scalar.coerce(x)
            if x:
                out[int(k)] = x
        return out
    out = {}
    for k, x in enumerate(v):
        x = Scalar.coerce(x)
        if x:
            out[k] = x
    return out


def dense(v, n):
    out = [ZERO] * n
    for k, x in v.items():
        out[k] = x
    return out


def axpy(acc, c, v):
    """acc += c*v in place, dropping cancelled entries."""
    for k, x in v.items():
        y = acc.get(k)
        if y is None:
            acc[k] = c * x
        else:
            z = y + c * x
            if z:
                acc[k] = z
            else:
                del acc[k]
    return acc


def vadd(u, v):
    return axpy(dict(u), ONE, v)


def vsub(u, v):
    return axpy(dict(u), -ONE, v)


def vscale(c, v):
    if not c:
        return {}
    return {k: c * x for k, x in v.items()}


def vconj(v):
    return {k: x.conj() for k, x in v.items()}


def dot(f, v):
    """Pair a coefficient dict with a vector: sum f[k]*v[k]."""
    if len(f) > len(v):
        f, v = v, f
    s = ZERO
    for k, x in f.items():
        y = v.get(k)
        if y is not None:
            s = s + x * y
    return s


def _leading(v):
    return min(v)


# ---------------------------------------------------------------------------

class Matrix:
    """rows x cols matrix of Scalars (sparse columns internally)."""

    __slots__ = ("rows", "cols", "_c")

    def __init__(self, rows, cols=None, entries=None):
        if cols is None:
            # Matrix([[...], [...]])
            entries = rows
            rows = len(entries)
            cols = len(entries[0]) if rows else 0
        self.rows = rows
        self.cols = cols
        c = {}
        if entries is None:
            pass
        elif isinstance(entries, dict):
            for (i, j), x in entries.items():
                if not (0 <= i < rows and 0 <= j < cols):
                    raise LinalgError(f"entry ({i},{j}) outside {rows}x{cols}")
                x = Scalar.coerce(x)
                if x:
                    c.setdefault(j, {})[i] = x
        else:
            if len(entries) != rows:
                raise LinalgError("row count does not match")
            for i, row in enumerate(entries):
                if len(row) != cols:
                    raise LinalgError(f"row {i} has length {len(row)}, expected {cols}")
                for j, x in enumerate(row):
                    x = Scalar.coerce(x)
                    if x:
                        c.setdefault(j, {})[i] = x
        self._c = c

    @classmethod
    def from_columns(cls, rows, cols, columns):
        """Build from ``{j: sparse column}``; the dicts are taken over, not copied."""
        m = object.__new__(cls)
        m.rows = rows
        m.cols = cols
        m._c = {j: v for j, v in columns.items() if v}
        return m

    @classmethod
    def from_function(cls, rows, cols, fn):
        """Entry (i, j) is fn(i, j)."""
        columns = {}
        for j in range(cols):
            col = {}
            for i in range(rows):
                x = Scalar.coerce(fn(i, j))
                if x:
                    col[i] = x
            columns[j] = col
        return cls.from_columns(rows, cols, columns)

    @classmethod
    def identity(cls, n):
        return cls.from_columns(n, n, {j: {j: ONE} for j in range(n)})

    @classmethod
    def zero(cls, rows, cols):
        return cls.from_columns(rows, cols, {})

    def entry(self, i, j):
        return self._c.get(j, {}).get(i, ZERO)

    def __getitem__(self, ij):
        return self.entry(*ij)

    def column(self, j):
        """Sparse column j (shared, do not mutate)."""
        return self._c.get(j, {})

    def row(self, i):
        return {j: col[i] for j, col in self._c.items() if i in col}

    def nnz(self):
        return sum(len(v) for v in self._c.values())

    def is_zero(self):
        return not self._c

    def apply(self, v):
        out = {}
        cols = self._c
        for j, x in v.items():
            col = cols.get(j)
            if col:
                for i, a in col.items():
                    y = out.get(i)
                    out[i] = a * x if y is None else y + a * x
        return {i: x for i, x in out.items() if x}

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise LinalgError(f"cannot compose {self.rows}x{self.cols} with {other.rows}x{other.cols}")
            return Matrix.from_columns(self.rows, other.cols,
                                       {j: self.apply(v) for j, v in other._c.items()})
        return self.apply(sparse(other))

    def __add__(self, other):
        self._same_shape(other)
        cols = {j: dict(v) for j, v in self._c.items()}
        for j, v in other._c.items():
            axpy(cols.setdefault(j, {}), ONE, v)
        return Matrix.from_columns(self.rows, self.cols, cols)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Matrix.from_columns(self.rows, self.cols,
                                   {j: vscale(-ONE, v) for j, v in self._c.items()})

    def scale(self, c):
        c = Scalar.coerce(c)
        return Matrix.from_columns(self.rows, self.cols,
                                   {j: vscale(c, v) for j, v in self._c.items()})

    def transpose(self):
        cols = {}
        for j, v in self._c.items():
            for i, x in v.items():
                cols.setdefault(i, {})[j] = x
        return Matrix.from_columns(self.cols, self.rows, cols)

    def conjugate(self):
        return Matrix.from_columns(self.rows, self.cols,
                                   {j: vconj(v) for j, v in self._c.items()})

    def _same_shape(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise LinalgError("shape mismatch")

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self._c == other._c

    __hash__ = None

    def to_dense(self):
        out = [[ZERO] * self.cols for _ in range(self.rows)]
        for j, v in self._c.items():
            for i, x in v.items():
                out[i][j] = x
        return out

    def entries(self):
        """Nonzero entries as sorted ``(row, col, Scalar)`` triples."""
        return sorted((i, j, x) for j, v in self._c.items() for i, x in v.items())

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, nnz={self.nnz()})"


# ---------------------------------------------------------------------------

class Eliminator:
    """Incremental Gaussian elimination with pivot = smallest index.

    Every stored row carries a tag vector that undergoes the same row
    operations; tags record preimages, right-hand sides or combinations.
    """

    def __init__(self, ambient):
        self.ambient = ambient
        self.rows = {}          # pivot -> (vec, tag), vec[pivot] == 1

    def __len__(self):
        return len(self.rows)

    def reduce(self, vec, tag=None):
        v = dict(vec)
        t = {} if tag is None else dict(tag)
        rows = self.rows
        while True:
            hits = [k for k in v if k in rows]
            if not hits:
                return v, t
            k = min(hits)
            c = -v[k]
            rv, rt = rows[k]
            axpy(v, c, rv)
            if rt:
                axpy(t, c, rt)

    def add(self, vec, tag=None):
        """Insert a vector.  Returns None if it was independent, otherwise the
        reduced tag (the dependency, or the inconsistency for right-hand sides)."""
        v, t = self.reduce(vec, tag)
        if not v:
            return t
        p = _leading(v)
        lead = v[p]
        if lead != ONE:
            inv = lead.inverse()
            v = vscale(inv, v)
            t = vscale(inv, t)
        self.rows[p] = (v, t)
        return None

    def rref(self):
        """Fully reduce the stored rows; returns them sorted by pivot."""
        done = {}
        for p in sorted(self.rows, reverse=True):
            v, t = self.rows[p]
            v = dict(v)
            t = dict(t)
            for k in [k for k in v if k in done and k != p]:
                c = v.get(k)
                if c is None:
                    continue
                rv, rt = done[k]
                axpy(v, -c, rv)
                axpy(t, -c, rt)
            done[p] = (v, t)
        self.rows = done
        return [(p,) + done[p] for p in sorted(done)]


class Subspace:
    """Subspace of Q(i)^n stored by its reduced echelon basis."""

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim, vectors=()):
        el = Eliminator(ambient_dim)
        for v in vectors:
            v = sparse(v)
            if any(not 0 <= k < ambient_dim for k in v):
                raise LinalgError("vector outside the ambient space")
            el.add(v)
        rows = el.rref()
        self.ambient_dim = ambient_dim
        self.pivots = tuple(p for p, _, _ in rows)
        self.basis = tuple(v for _, v, _ in rows)

    @classmethod
    def full(cls, n):
        return cls._raw(n, [{k: ONE} for k in range(n)])

    @classmethod
    def _raw(cls, n, echelon):
        s = object.__new__(cls)
        s.ambient_dim = n
        s.basis = tuple(echelon)
        s.pivots = tuple(_leading(v) for v in echelon)
        return s

    @property
    def dim(self):
        return len(self.basis)

    def __len__(self):
        return len(self.basis)

    def eliminator(self):
        el = Eliminator(self.ambient_dim)
        for p, v in zip(self.pivots, self.basis):
            el.rows[p] = (v, {})
        return el

    def contains(self, v):
        # the basis is fully reduced, so v lies in the span exactly when it
        # equals the combination read off at the pivots
        v = sparse(v) if not isinstance(v, dict) else {k: x for k, x in v.items() if x}
        return self.combine([v.get(p, ZERO) for p in self.pivots]) == v

    def coordinates(self, v):
        """Coordinates of v in the echelon basis, or None if v is outside."""
        if not self.contains(v):
            return None
        return [v.get(p, ZERO) for p in self.pivots]

    def combine(self, coords):
        out = {}
        for c, b in zip(coords, self.basis):
            if c:
                axpy(out, c, b)
        return out

    def __add__(self, other):
        return Subspace(self.ambient_dim, self.basis + other.basis)

    def dense_basis(self):
        return [dense(v, self.ambient_dim) for v in self.basis]

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    __hash__ = None

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


# ---------------------------------------------------------------------------

def _column_elimination(A):
    """Eliminate the columns of A, tagging each with its index.  Returns the
    eliminator and the kernel vectors found along the way."""
    el = Eliminator(A.rows)
    kernel = []
    for j in range(A.cols):
        dep = el.add(A.column(j), {j: ONE})
        if dep is not None:
            kernel.append(dep)
    return el, kernel


def solve_linear(A, b):
    """Return ``(x, kernel)`` with ``A x = b``; x is None when inconsistent."""
    b = sparse(b)
    if any(not 0 <= k < A.rows for k in b):
        raise LinalgError("right-hand side length does not match the row count")
    el, kernel = _column_elimination(A)
    r, t = el.reduce(b)
    ker = Subspace(A.cols, kernel)
    if r:
        return None, ker
    return tuple(dense(vscale(-ONE, t), A.cols)), ker


def inverse(M):
    """Exact inverse of a square matrix, or None when it is singular."""
    n = M.rows
    if M.cols != n:
        return None
    el, kernel = _column_elimination(M)
    if kernel:
        return None
    cols = {}
    for j in range(n):
        _, t = el.reduce({j: ONE})
        cols[j] = vscale(-ONE, t)
    return Matrix.from_columns(n, n, cols)


def kernel_basis(A):
    _, kernel = _column_elimination(A)
    return Subspace(A.cols, kernel)


def image_basis(A):
    return Subspace(A.rows, [A.column(j) for j in range(A.cols)])


def rank(A):
    return image_basis(A).dim


def subspace_equal(U, V):
    if U.ambient_dim != V.ambient_dim:
        raise LinalgError("subspaces live in different ambient spaces")
    return U.basis == V.basis


class _Preimages:
    """Solves T x = y for y in the image of T, column by column."""

    def __init__(self, T):
        self.T = T
        self.el, _ = _column_elimination(T)

    def __call__(self, y):
        r, t = self.el.reduce(y)
        if r:
            return None
        return vscale(-ONE, t)


def restricted_inverse(T, K, P, Q=None):
    """Generalized inverse R of T with R T = P and T R = Q.

    P must be an idempotent whose image complements the kernel K of T and
    with T P = T.  Q is a projection onto the image of T; by default the one
    whose kernel is spanned by the standard basis vectors at the non-pivot
    positions of the image's echelon basis.
    """
    n = T.cols
    if P.rows != n or P.cols != n:
        raise LinalgError("P must be square on the domain of T")
    if not subspace_equal(K, kernel_basis(T)):
        raise LinalgError("K is not the kernel of T")
    if P @ P != P:
        raise LinalgError("P is not idempotent")
    ran_p = image_basis(P)
    if ran_p.dim + K.dim != n or (ran_p + K).dim != n:
        raise LinalgError("image of P is not a complement of the kernel")
    if T @ P != T:
        raise LinalgError("T P differs from T")
    image = image_basis(T)
    if Q is None:
        Q = _coordinate_projection(image)
    else:
        if Q @ Q != Q or not subspace_equal(image_basis(Q), image):
            raise LinalgError("Q is not a projection onto the image of T")
    solve = _Preimages(T)
    cols = {}
    for j in range(T.rows):
        y = Q.column(j)
        if not y:
            continue
        x = solve(y)
        cols[j] = P.apply(x)
    R = Matrix.from_columns(n, T.rows, cols)
    if R @ T != P or T @ R != Q:
        raise LinalgError("restricted inverse failed its defining identities")
    return R


def _coordinate_projection(S):
    # projection onto S along span{e_k : k not a pivot of S}
    n = S.ambient_dim
    piv = set(S.pivots)
    cols = {}
    by_pivot = dict(zip(S.pivots, S.basis))
    for j in range(n):
        if j in piv:
            cols[j] = dict(by_pivot[j])
    return Matrix.from_columns(n, n, cols)
