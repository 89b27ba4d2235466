from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from surgery_calc.arith import (
    ArithError,
    LensLabel,
    cfrac_eval,
    cfrac_expand,
    hj_expand,
    lens_label,
    smith_cokernel,
    smith_normal_form,
)
from surgery_calc.plumbing import from_pq, intersection_matrix

from conftest import coprime_pairs

C305 = (18, 19) + (2,) * 14 + (3,) + (2,) * 16


def continuant_fraction(entries):
    """Independent evaluation via the 2x2 matrix product [[b, -1], [1, 0]]."""
    M = sympy.eye(2)
    for b in entries:
        M = M * sympy.Matrix([[b, -1], [1, 0]])
    return Fraction(int(M[0, 0]), int(M[1, 0]))


@pytest.mark.parametrize("p,q,entries", [
    (3, 1, (5, 2)),
    (2, 1, (4,)),
    (305, 17, C305),
    (5, 2, (3, 5, 2)),
])
def test_cfrac_examples(p, q, entries):
    cf = cfrac_expand(p, q)
    assert cf.entries == entries
    assert len(cfrac_expand(305, 17)) == 33


@pytest.mark.parametrize("entries,value", [
    ((4,), Fraction(4)),
    ((5, 2), Fraction(9, 2)),
    (C305, Fraction(93025, 5184)),
])
def test_cfrac_eval_examples(entries, value):
    assert cfrac_eval(entries) == value


@pytest.mark.parametrize("p,q", [(3, 3), (2, 4), (4, 2), (6, 4), (5, 0), (1, 1), (-3, 1)])
def test_cfrac_rejects_bad_pairs(p, q):
    with pytest.raises(ArithError):
        cfrac_expand(p, q)


def test_cfrac_eval_rejects_small_entries():
    with pytest.raises(ArithError):
        cfrac_eval([3, 1])
    with pytest.raises(ArithError):
        cfrac_eval([])


def test_hj_expand_rejects_improper():
    with pytest.raises(ArithError):
        hj_expand(3, 5)


@pytest.mark.parametrize("p,q", coprime_pairs(200)[::97])
def test_cfrac_round_trip_range(p, q):
    cf = cfrac_expand(p, q)
    assert cfrac_eval(cf.entries) == Fraction(p * p, p * q - 1)
    assert continuant_fraction(cf.entries) == Fraction(p * p, p * q - 1)
    assert min(cf.entries) >= 2


def test_cfrac_round_trip_all_p_le_200():
    for p, q in coprime_pairs(200):
        assert cfrac_eval(cfrac_expand(p, q).entries) == Fraction(p * p, p * q - 1)


@pytest.mark.parametrize("p", range(3, 60))
def test_q_equals_one_family(p):
    assert cfrac_expand(p, 1).entries == (p + 2,) + (2,) * (p - 2)


@given(st.lists(st.integers(2, 9), min_size=1, max_size=12))
def test_hj_expansion_unique(entries):
    # expanding the value of any admissible list gives back the list
    v = cfrac_eval(entries)
    assert hj_expand(v.numerator, v.denominator) == tuple(entries)
    assert continuant_fraction(entries) == v


@pytest.mark.parametrize("p,q,text", [
    (3, 1, "L(9, -2)"),
    (305, 17, "L(93025, -5184)"),
    (2, 1, "L(4, -1)"),
])
def test_lens_label(p, q, text):
    lab = lens_label(p, q)
    assert str(lab) == text
    assert lab.p == p
    assert 0 <= lab.twist < lab.order


def test_lens_label_normalizes_twist():
    assert LensLabel(9, -2) == LensLabel(9, 7)
    with pytest.raises(ArithError):
        LensLabel(8, 3)  # not a square
    with pytest.raises(ArithError):
        LensLabel(9, 3)  # not coprime


def _mat_mul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def _check_snf(M):
    U, D, V = smith_normal_form(M)
    assert _mat_mul(_mat_mul(U, M), V) == D
    assert abs(sympy.Matrix(U).det()) == 1
    assert abs(sympy.Matrix(V).det()) == 1
    n, m = len(D), len(D[0])
    diag = [D[i][i] for i in range(min(n, m))]
    assert all(D[i][j] == 0 for i in range(n) for j in range(m) if i != j)
    assert all(d >= 0 for d in diag)
    nz = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    oracle = sympy_snf(sympy.Matrix(M), domain=sympy.ZZ)
    want = sorted(abs(int(oracle[i, i])) for i in range(min(n, m)))
    assert sorted(diag) == want
    return diag


@given(st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n),
                       min_size=n, max_size=n)))
def test_snf_matches_sympy(M):
    _check_snf(M)


def test_snf_rectangular():
    _check_snf([[2, 4, 4], [-6, 6, 12]])


def test_snf_deterministic():
    Q = intersection_matrix(from_pq(305, 17))
    assert smith_normal_form(Q) == smith_normal_form(Q)


@pytest.mark.parametrize("M,factors", [
    ([[-4]], (4,)),
    (intersection_matrix(from_pq(3, 1)), (9,)),
    (intersection_matrix(from_pq(305, 17)), (93025,)),
    ([[2, 0], [0, 3]], (6,)),
    ([[2, 0], [0, 2]], (2, 2)),
    ([[1, 0], [0, 1]], ()),
])
def test_smith_cokernel_examples(M, factors):
    cok = smith_cokernel(M)
    assert cok.factors == factors


def test_smith_cokernel_singular():
    with pytest.raises(ArithError):
        smith_cokernel([[1, 2], [2, 4]])


@pytest.mark.parametrize("p,q", coprime_pairs(60)[::5] + [(305, 17)])
def test_cokernel_projection_kills_image(p, q):
    Q = intersection_matrix(from_pq(p, q))
    cok = smith_cokernel(Q)
    assert cok.factors == (p * p,)
    assert cok.order == p * p
    k = len(Q)
    for j in range(k):
        assert cok.project([Q[i][j] for i in range(k)]) == (0,)
    # the projection is onto: some standard vector generates
    images = {cok.project([int(i == j) for i in range(k)])[0] for j in range(k)}
    assert any(sympy.gcd(x, p * p) == 1 for x in images)


def test_single_cyclic_factor_sampled_to_200():
    for p, q in coprime_pairs(200)[::23]:
        assert smith_cokernel(intersection_matrix(from_pq(p, q))).factors == (p * p,)
