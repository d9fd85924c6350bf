from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle as O
from fixtures import corner_idempotent, nonfull_separability, skewed_separability
from weakhopf.algebra_core import FinAlgebra, StructureError
from weakhopf.coproduct import Coproduct, find_canonical_idempotent
from weakhopf.examples import function_algebra, groupoid_algebra, pair_groupoid, transitive_groupoid
from weakhopf.exact_linalg import ONE, Matrix, Scalar, Subspace
from weakhopf.separability import (
    check_involutive, check_regular_separability, extract_legs, involutive_report, is_psd,
    separability_report, separability_structure,
)

HALF = Scalar(Fraction(1, 2))


def e11_plus_e22(x):
    """x⊗1 in M2⊗M2° as a sparse vector (x = 0..3 for e11, e12, e21, e22)."""
    return {x * 4 + 0: ONE, x * 4 + 3: ONE}


def one_tensor(y):
    """1⊗y° in M2⊗M2°."""
    return {0 * 4 + y: ONE, 3 * 4 + y: ONE}


def pair2_sep():
    A, D, _, _ = groupoid_algebra(pair_groupoid(2))
    return A, D, separability_structure(find_canonical_idempotent(D))


# ---------------------------------------------------------------------------
# legs and regular separability

def test_legs_for_pair_groupoid():
    A, D, sep = pair2_sep()
    diag = Subspace(4, [{0: ONE}, {3: ONE}])
    B, C = extract_legs(sep.E)
    assert B == diag == C


def test_legs_for_group_algebra():
    A, D, _, _ = groupoid_algebra(transitive_groupoid(1, "C3"))
    B, C = extract_legs(find_canonical_idempotent(D))
    assert B.dim == C.dim == 1 and B.contains(O.unit(A))


def test_legs_of_skewed_idempotent():
    A, E, B, C = skewed_separability()
    LB, LC = extract_legs(E)
    assert LB == B and LC == C
    assert check_regular_separability(E, B, C)


def test_corner_idempotent_is_not_regular():
    A, E, B, C = corner_idempotent()
    rep = separability_report(E, B, C)
    assert not check_regular_separability(E, B, C)
    failed = {c.name for c in rep if not c.passed}
    assert "left leg of E is B" in failed and "right leg of E is C" in failed


def test_nonfull_idempotent_is_not_regular():
    A, E, B, C = nonfull_separability()
    assert not check_regular_separability(E, B, C)
    with pytest.raises(StructureError):
        separability_structure(E, B, C)


def test_weighted_non_idempotent_rejected():
    A, E, B, C = skewed_separability((1, 1))
    rep = separability_report(E, B, C)
    assert rep[0].name == "E idempotent" and not rep[0].passed
    with pytest.raises(StructureError) as err:
        separability_structure(E, B, C)
    assert err.value.law == "not separability"


# ---------------------------------------------------------------------------
# derived data on the tracial example

def test_pair_groupoid_data():
    A, D, sep = pair2_sep()
    E = sep.E.element
    for b in sep.B.basis:
        assert sep.S_B_on(b) == b
        assert sep.sigma_on("B", b) == b
    for c in sep.C.basis:
        assert sep.S_C_on(c) == c
    assert sep.phi_B.coeffs == (ONE, ONE) == sep.phi_C.coeffs
    assert sep.F1 == E == sep.F2 == sep.F3 == sep.F4
    assert sep.warnings == []
    assert all(c.passed for c in sep.report)


def test_function_algebra_data():
    A, D, _, _ = function_algebra(pair_groupoid(2))
    sep = separability_structure(find_canonical_idempotent(D))
    # B and C are the functions of the target and of the source
    assert sep.B.dim == sep.C.dim == 2
    assert O.m(A, sep.F1) == O.unit(A) == O.m(A, sep.F2)


# ---------------------------------------------------------------------------
# non-tracial example, frozen values checked by hand:
# E = Σ w_k (e_ki⊗1)⊗(1⊗e_ik°) with w = (1/3, 2/3)

@pytest.fixture(scope="module")
def skewed():
    A, E, B, C = skewed_separability()
    return A, separability_structure(E, B, C)


def test_skewed_legs(skewed):
    A, sep = skewed
    assert list(sep.B.basis) == [e11_plus_e22(x) for x in range(4)]
    assert list(sep.C.basis) == sorted([one_tensor(y) for y in range(4)], key=min)


def test_skewed_S_B(skewed):
    A, sep = skewed
    # S_B(e_pq⊗1) = 1⊗e_pq°
    for x in range(4):
        assert sep.S_B_on(e11_plus_e22(x)) == one_tensor(x)


def test_skewed_S_C(skewed):
    A, sep = skewed
    assert sep.S_C_on(one_tensor(0)) == e11_plus_e22(0)
    assert sep.S_C_on(one_tensor(1)) == {k: HALF for k in e11_plus_e22(1)}
    assert sep.S_C_on(one_tensor(2)) == {k: Scalar(2) for k in e11_plus_e22(2)}
    assert sep.S_C_on(one_tensor(3)) == e11_plus_e22(3)


def test_skewed_phi(skewed):
    A, sep = skewed
    # φ_B is 1/w_k on the diagonal units
    assert sep.phi_B.coeffs == (Scalar(3), Scalar(0), Scalar(0), Scalar(Fraction(3, 2)))
    n = A.dim
    # (φ_B⊗ι)E = 1 by brute force, reading coordinates off the B basis
    coords = lambda v: {k: v[p] for k, p in enumerate(sep.B.pivots) if p in v}  # noqa: E731
    phi = lambda v: sep.phi_B(coords(v))                                      # noqa: E731
    assert O.slice1(sep.E.element, phi, n) == O.unit(A)


def test_skewed_sigma(skewed):
    A, sep = skewed
    assert sep.sigma_on("B", e11_plus_e22(0)) == e11_plus_e22(0)
    assert sep.sigma_on("B", e11_plus_e22(1)) == {k: Scalar(2) for k in e11_plus_e22(1)}
    assert sep.sigma_on("B", e11_plus_e22(2)) == {k: HALF for k in e11_plus_e22(2)}
    assert sep.sigma_on("B", e11_plus_e22(3)) == e11_plus_e22(3)
    assert sep.sigma_on("C", one_tensor(1)) == {k: HALF for k in one_tensor(1)}
    assert sep.sigma_on("C", one_tensor(2)) == {k: Scalar(2) for k in one_tensor(2)}


def test_skewed_kms_by_brute_force(skewed):
    A, sep = skewed
    coords = lambda v: {k: v[p] for k, p in enumerate(sep.B.pivots) if p in v}  # noqa: E731
    phi = lambda v: sep.phi_B(coords(v))                                      # noqa: E731
    for b in sep.B.basis:
        for b2 in sep.B.basis:
            assert phi(O.mul(A, b, b2)) == phi(O.mul(A, b2, sep.sigma_on("B", b)))
    # the other formula breaks the identity on e12⊗1
    wrong = sep.sigma_candidates["B"]["S_C S_B"]
    assert wrong != sep.sigma_B
    b = e11_plus_e22(1)
    w = sep.B.combine(O.dense_of(wrong.apply(coords(b)), sep.B.dim))
    assert any(phi(O.mul(A, b, b2)) != phi(O.mul(A, b2, w)) for b2 in sep.B.basis)


def test_skewed_warnings(skewed):
    A, sep = skewed
    assert sep.warnings == [
        "σ_B: formulas differ; weak KMS holds with S_B^-1 S_C^-1",
        "σ_C: formulas differ; weak KMS holds with S_B S_C",
    ]


def test_skewed_F1(skewed):
    A, sep = skewed
    n = A.dim
    third, two_thirds = Scalar(Fraction(1, 3)), Scalar(Fraction(2, 3))
    # F1 = 1/3 e11⊗e11 + 2/3 e12⊗e21 + 1/3 e21⊗e12 + 2/3 e22⊗e22, all inside B⊗B
    expect = {}
    for x, y, w in ((0, 0, third), (1, 2, two_thirds), (2, 1, third), (3, 3, two_thirds)):
        O.add_into(expect, w, O.otimes(e11_plus_e22(x), e11_plus_e22(y), n))
    assert sep.F1 == expect
    assert sep.F1 != sep.E.element


def test_skewed_F_and_flip(skewed):
    A, sep = skewed
    assert O.m(A, sep.F1) == O.unit(A) == O.m(A, sep.F2)
    names = {c.name for c in sep.report}
    assert "(S_B⊗S_C)E = ζE" in names
    assert all(c.passed for c in sep.report)


def test_equal_weights_are_tracial():
    A, E, B, C = skewed_separability((HALF, HALF))
    sep = separability_structure(E, B, C)
    assert sep.warnings == []
    for b in sep.B.basis:
        assert sep.sigma_on("B", b) == b


# ---------------------------------------------------------------------------
# involutive case

def test_involutive_examples():
    A, D, sep = pair2_sep()
    assert check_involutive(sep)
    A, D, _, _ = groupoid_algebra(transitive_groupoid(1, "C2"))
    assert check_involutive(separability_structure(find_canonical_idempotent(D)))


def test_swapped_involution_breaks_self_adjointness():
    A, D, _, _ = function_algebra(pair_groupoid(2))
    swap = Matrix([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    mult = {(i, j, k): x for i, j, k, x in A.structure_constants()}
    A2 = FinAlgebra(A.dim, A.basis_names, mult, involution=swap)
    E = find_canonical_idempotent(Coproduct.from_elements(A2, D.elements))
    sep = separability_structure(E)
    with pytest.raises(StructureError, match="self-adjoint"):
        involutive_report(sep)


def test_involutive_requires_an_involution():
    A, E, B, C = skewed_separability()
    with pytest.raises(StructureError):
        involutive_report(separability_structure(E, B, C))


# ---------------------------------------------------------------------------
# exact positivity

gauss = st.builds(Scalar, st.integers(-3, 3), st.integers(-2, 2))
real = st.builds(Scalar, st.integers(-3, 3))


@given(real, real, gauss)
def test_is_psd_on_2x2_against_minors(a, c, b):
    G = Matrix([[a, b], [b.conj(), c]])
    det = a * c - b * b.conj()
    expect = a.re >= 0 and c.re >= 0 and det.re >= 0
    assert is_psd(G) == expect


@given(st.lists(st.lists(gauss, min_size=3, max_size=3), min_size=1, max_size=3))
def test_gram_matrices_are_psd(vectors):
    # G_ij = <v_i, v_j>
    G = Matrix.from_function(len(vectors), len(vectors),
                             lambda i, j: sum((x.conj() * y for x, y in zip(vectors[i], vectors[j])), Scalar(0)))
    assert is_psd(G)
    neg = Matrix.from_function(G.rows, G.cols, lambda i, j: -G.entry(i, j))
    assert is_psd(neg) == G.is_zero()


def test_is_psd_rejects_non_hermitian():
    assert not is_psd(Matrix([[1, 1], [0, 1]]))
    assert not is_psd(Matrix([[Scalar(0, 1)]]))
