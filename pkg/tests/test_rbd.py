import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from surgery_calc.lattice import AmbientLattice, EmbeddedConfiguration
from surgery_calc.plumbing import LinearPlumbing, from_pq, intersection_matrix
from surgery_calc.rbd import (
    DescentError,
    DescentMode,
    DescentVerdict,
    corollary_condition,
    descend,
    pattern_mode,
    prepare,
    restriction_square,
    solve_tridiagonal,
    theorem_condition,
)
from surgery_calc.swcalc import FactoredSW, SWFunction, alexander_twist, sw_k3

from conftest import coprime_pairs


def synthetic(p, q):
    """Configuration spheres u_i plus dual classes d_i with d_i . u_j = delta_ij."""
    P = from_pq(p, q)
    Q = intersection_matrix(P)
    k = len(Q)
    names = [f"u{i}" for i in range(1, k + 1)] + [f"d{i}" for i in range(1, k + 1)]
    gram = [[0] * (2 * k) for _ in range(2 * k)]
    for i in range(k):
        for j in range(k):
            gram[i][j] = Q[i][j]
        gram[i][k + i] = gram[k + i][i] = 1
    lat = AmbientLattice(tuple(names), tuple(map(tuple, gram)))
    cfg = EmbeddedConfiguration(f"C{p}_{q}", P, tuple(lat.gen(f"u{i}") for i in range(1, k + 1)))
    return lat, cfg


def class_with_vector(lat, v):
    return lat.combination({f"d{i}": x for i, x in enumerate(v, start=1)})


def sympy_square(weights, v):
    Q = sympy.Matrix(intersection_matrix(LinearPlumbing(tuple(weights))))
    vv = sympy.Matrix(v)
    return Fraction(str((vv.T * Q.inv() * vv)[0, 0]))


@pytest.mark.parametrize("pq,v,want", [
    ((2, 1), (2,), Fraction(-1)),
    ((3, 1), (3, 0), Fraction(-2)),
    ((3, 1), (0, 0), Fraction(0)),
    ((305, 17), (0,) * 33, Fraction(0)),
])
def test_restriction_square_examples(pq, v, want):
    lat, cfg = synthetic(*pq)
    assert restriction_square(class_with_vector(lat, v), cfg) == want


def test_pattern_modes():
    b = (5, 2)
    assert pattern_mode((3, 0), b) is DescentMode.PLUS
    assert pattern_mode((-3, 0), b) is DescentMode.MINUS
    assert pattern_mode((-1, 0), b) is DescentMode.FAILS
    assert pattern_mode((0, 0), b) is DescentMode.FAILS


def test_theorem_condition_examples():
    lat, cfg = synthetic(3, 1)
    good = theorem_condition(class_with_vector(lat, (3, 0)), cfg)
    assert good.mode is DescentMode.PLUS and good.theorem_ok
    assert good.restriction_square == -2 and good.m_parity_ok
    zero = theorem_condition(lat.zero(), cfg)
    assert zero.mode is DescentMode.FAILS and not zero.theorem_ok
    assert zero.restriction_square == 0


def test_theorem_only_classes_exist():
    # the sign pattern is sufficient, not necessary
    lat, cfg = synthetic(3, 1)
    verdict = theorem_condition(class_with_vector(lat, (-1, 2)), cfg)
    assert verdict.restriction_square == -2
    assert verdict.mode is DescentMode.THEOREM_ONLY
    assert verdict.descends


def test_inconsistent_pattern_verdict_is_rejected():
    with pytest.raises(AssertionError):
        DescentVerdict(DescentMode.PLUS, True, Fraction(-1), 3, 1, 2)


def test_sign_pattern_examples_on_z_data(z_env):
    lat = z_env.lattice
    L = 6 * lat.gen("T") + lat.combination({f"E{i}": 1 for i in range(1, 25)})
    L7 = L - 2 * lat.gen("E7")
    c305, c31 = z_env.configs["C305"], z_env.configs["C31"]
    assert corollary_condition(L, c305) is DescentMode.PLUS
    assert corollary_condition(L7, c305) is DescentMode.PLUS
    assert corollary_condition(-L, c305) is DescentMode.MINUS
    assert corollary_condition(L, c31) is DescentMode.PLUS
    assert corollary_condition(L7, c31) is DescentMode.FAILS
    assert not theorem_condition(L7, c31).theorem_ok
    assert corollary_condition(lat.zero(), c305) is DescentMode.FAILS


@pytest.mark.parametrize("p,q", coprime_pairs(200)[::37] + [(305, 17)])
def test_pattern_vector_square_is_minus_k(p, q):
    P = from_pq(p, q)
    v = [b - 2 for b in P.b]
    assert sum(x * y for x, y in zip(v, solve_tridiagonal(P.weights, v))) == -len(P)


def test_pattern_vector_all_p_le_200():
    for p, q in coprime_pairs(200):
        P = from_pq(p, q)
        v = [b - 2 for b in P.b]
        assert sum(x * y for x, y in zip(v, solve_tridiagonal(P.weights, v))) == -len(P)


@given(st.sampled_from(coprime_pairs(15)), st.randoms(use_true_random=False))
def test_thomas_against_sympy_and_adjugate(pq, rnd):
    lat, cfg = synthetic(*pq)
    k = len(cfg.plumbing)
    v = [rnd.randint(-6, 6) for _ in range(k)]
    want = sympy_square(cfg.plumbing.weights, v)
    got = restriction_square(class_with_vector(lat, v), cfg)
    assert got == want
    prep = prepare(cfg)
    det, adj = prep.adjugate
    adj_square = Fraction(sum(v[i] * adj[i][j] * v[j] for i in range(k) for j in range(k)), det)
    assert adj_square == want
    assert sympy.Matrix(adj) == sympy.Matrix(intersection_matrix(cfg.plumbing)).adjugate()


@given(st.sampled_from(coprime_pairs(25)), st.randoms(use_true_random=False))
def test_boundary_projection_detects_image(pq, rnd):
    # x == 0 exactly when v lies in the image of Q, i.e. Q^-1 v is integral
    lat, cfg = synthetic(*pq)
    k = len(cfg.plumbing)
    Q = sympy.Matrix(intersection_matrix(cfg.plumbing))
    prep = prepare(cfg)
    a = [rnd.randint(-3, 3) for _ in range(k)]
    v_img = list(Q * sympy.Matrix(a))
    assert prep.cokernel.project(v_img) == (0,)
    v = [rnd.randint(-5, 5) for _ in range(k)]
    integral = all(x.is_integer for x in Q.inv() * sympy.Matrix(v))
    assert (prep.cokernel.project(v) == (0,)) == integral


@given(st.sampled_from(coprime_pairs(50)), st.randoms(use_true_random=False))
def test_sign_pattern_implies_descent_property(pq, rnd):
    lat, cfg = synthetic(*pq)
    b = cfg.plumbing.b
    Q = intersection_matrix(cfg.plumbing)
    k = len(b)
    sign = rnd.choice((1, -1))
    a = [rnd.randint(-3, 3) for _ in range(k)]
    # a class with the pattern plus arbitrary u-components: L = sum a_i u_i + sum c_i d_i
    c = [sign * (b[i] - 2) - sum(Q[i][j] * a[j] for j in range(k)) for i in range(k)]
    L = lat.combination({**{f"u{i + 1}": a[i] for i in range(k)},
                         **{f"d{i + 1}": c[i] for i in range(k)}})
    assert corollary_condition(L, cfg) is not DescentMode.FAILS
    verdict = theorem_condition(L, cfg)
    assert verdict.theorem_ok


@given(st.sampled_from(coprime_pairs(20)), st.randoms(use_true_random=False))
def test_bulk_screen_matches_exact_verdicts(pq, rnd):
    lat, cfg = synthetic(*pq)
    prep = prepare(cfg)
    k = len(cfg.plumbing)
    b = cfg.plumbing.b
    rows = [[rnd.randint(-4, 4) for _ in range(k)] for _ in range(30)]
    rows.append([x - 2 for x in b])
    rows.append([2 - x for x in b])
    mask = prep.screen(np.array(rows))
    for v, m in zip(rows, mask):
        assert bool(m) == prep.verdict(v).theorem_ok
    assert mask[-1] and mask[-2]


def test_m_residue_readings_reported(z_env):
    lat = z_env.lattice
    L = 6 * lat.gen("T") + lat.combination({f"E{i}": 1 for i in range(1, 25)})
    v = theorem_condition(L, z_env.configs["C31"])
    assert v.m is not None and v.theorem_ok
    assert isinstance(v.m_interpretations_agree, bool)


def test_descend_requires_pq_and_valid_embedding():
    lat, cfg = synthetic(3, 1)
    bad = EmbeddedConfiguration("bad", from_pq(3, 1), tuple(reversed(cfg.sphere_classes)))
    with pytest.raises(DescentError):
        descend(sw_k3(lat), bad)
    nopq = EmbeddedConfiguration("nopq", LinearPlumbing((-5, -2)), cfg.sphere_classes)
    with pytest.raises(DescentError):
        descend(sw_k3(lat), nopq)


def test_descend_with_no_survivors_is_empty():
    lat, cfg = synthetic(3, 1)
    out, table = descend(sw_k3(lat), cfg)
    assert out.term_count() == 0
    assert table.survivors == ()


def _small_model():
    """A C(3,1) in a lattice with a few exceptional classes, brute-forceable."""
    sq = {"T": 0, "S": -2, "Fp": 0}
    sq.update({f"E{i}": -1 for i in range(1, 9)})
    lat = AmbientLattice.from_pairings(sq, {("S", "T"): 1, ("S", "Fp"): 1})
    c = lat.combination
    cfg = EmbeddedConfiguration("C31", from_pq(3, 1),
                                (c({"Fp": 1, "E1": -1, "E3": -2}), c({"E1": 1, "E2": -1})))
    return lat, cfg


@pytest.mark.parametrize("n", [1, 2, 3])
def test_factored_descent_matches_brute_force(n):
    lat, cfg = _small_model()
    f = FactoredSW(sw_k3(lat))
    for _ in range(3):
        f = f.knot_surgery(lat.gen("T") + lat.gen("E8") - lat.gen("E8"), alexander_twist(n))
    f = f.knot_surgery(lat.gen("Fp"), alexander_twist(1))
    for i in range(1, 7):
        f = f.blow_up(f"E{i}")
    out, table = descend(f, cfg)
    expanded = f.expand()
    from surgery_calc.lattice import Cls
    want = {k: v for k, v in expanded.terms.items()
            if theorem_condition(Cls(lat, k), cfg).theorem_ok}
    assert out.expand().terms == want
    assert table.examined == len(f.base) * 2**3  # E1, E2, E3 meet the configuration
    assert table.free == ("E4", "E5", "E6")
    # coefficients preserved
    for k, v in out.expand().terms.items():
        assert expanded.terms[k] == v


def test_z_descent_and_order_independence(z_env):
    lat = z_env.lattice
    n = 2
    f = FactoredSW(sw_k3(lat))
    for _ in range(3):
        f = f.knot_surgery(lat.gen("T"), alexander_twist(n))
    for i in range(1, 25):
        f = f.blow_up(f"E{i}")
    c305, c31 = z_env.configs["C305"], z_env.configs["C31"]
    y1, t1 = descend(f, c305)
    assert t1.examined == 7 * 2**23
    assert y1.term_count() == 4
    assert t1.free == ("E7",)
    assert {abs(v) for _, v in y1.iter_terms()} == {n**3}
    z, t2 = descend(y1, c31)
    L = 6 * lat.gen("T") + lat.combination({f"E{i}": 1 for i in range(1, 25)})
    assert z.expand().terms == {L.coords: n**3, (-L).coords: n**3}
    y2, _ = descend(f, c31)
    z2, _ = descend(y2, c305)
    assert z2.expand() == z.expand()


def test_descent_table_is_deterministic(z_env):
    lat = z_env.lattice
    f = FactoredSW(sw_k3(lat)).knot_surgery(lat.gen("T"), alexander_twist(1))
    for i in range(1, 8):
        f = f.blow_up(f"E{i}")
    a = descend(f, z_env.configs["C31"])
    b = descend(f, z_env.configs["C31"])
    assert a[1] == b[1] and a[0].expand() == b[0].expand()


def test_random_fixed_seed_smoke():
    rnd = random.Random(7)
    lat, cfg = synthetic(5, 2)
    k = len(cfg.plumbing)
    for _ in range(50):
        v = [rnd.randint(-5, 5) for _ in range(k)]
        verdict = theorem_condition(class_with_vector(lat, v), cfg)
        if verdict.mode in (DescentMode.PLUS, DescentMode.MINUS):
            assert verdict.theorem_ok
