import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kmlat.errors import HeightTooSmall, TruncationLoss
from kmlat.lie import (
    LieOperator,
    TruncatedKMAlgebra,
    build_truncated_algebra,
    default_signs,
    e,
    epsilon_pair,
    eta,
    f,
    h,
    minimal_height,
    sign_certificate,
    vec_add,
    vec_scale,
)
from kmlat.roots import GCM, Root, classify_root, positive_roots
from oracles import eta_squared_signs, lie_dimension

SYM2 = GCM.symmetric(2)
SYM3 = GCM.symmetric(3)


def test_height_precondition():
    with pytest.raises(HeightTooSmall):
        build_truncated_algebra(SYM2, 5)
    assert build_truncated_algebra(SYM2, 6).H == 6


def test_dimension_examples():
    alg = build_truncated_algebra(SYM2, 6)
    assert alg.dim((1, 1)) == 1
    assert alg.dim((2, 1)) == 1
    assert alg.dim((1, 0)) == 1
    assert alg.bracket(e(1), e(2)) != {}


@pytest.mark.parametrize("a12,a21", [(-2, -2), (-3, -3), (-2, -3), (-1, -4), (-1, -1)])
def test_dimensions_match_free_algebra_quotient(a12, a21):
    alg = TruncatedKMAlgebra(GCM(a12, a21), 6)
    for k1 in range(7):
        for k2 in range(7 - k1):
            if k1 + k2 == 0:
                continue
            assert alg.dim((k1, k2)) == lie_dimension(a12, a21, k1, k2), (k1, k2)


def test_finite_types_have_expected_dimension():
    # A2 and G2 close up inside the window: 8 and 14 dimensional
    assert len(TruncatedKMAlgebra(GCM(-1, -1), 8).basis()) == 8
    assert len(TruncatedKMAlgebra(GCM(-1, -3), 8).basis()) == 14


@pytest.mark.parametrize("gcm", [SYM2, SYM3, GCM(-2, -3), GCM(-1, -4)])
def test_real_roots_are_one_dimensional(gcm):
    alg = TruncatedKMAlgebra(gcm, 10)
    for side in (1, 2):
        for r in positive_roots(gcm, side, 6):
            if r.height <= 10:
                assert alg.dim(r) == 1
    for k1 in range(11):
        for k2 in range(11 - k1):
            if (k1, k2) != (0, 0) and alg.dim((k1, k2)) > 1:
                assert not classify_root(gcm, Root(k1, k2)).is_real


@pytest.mark.parametrize("gcm", [SYM2, SYM3, GCM(-2, -5)])
def test_serre_vanishing(gcm):
    alg = build_truncated_algebra(gcm, minimal_height(gcm))
    assert alg.serre_element(1, 2) == {}
    assert alg.serre_element(2, 1) == {}
    # one step short of the Serre exponent is nonzero
    v = e(2)
    for _ in range(-gcm.a12):
        v = alg.ad_e(1, v)
    assert v != {}


@pytest.mark.parametrize("gcm", [SYM2, SYM3, GCM(-1, -3), GCM(-2, -3)])
def test_jacobi_and_antisymmetry(gcm):
    alg = TruncatedKMAlgebra(gcm, 8)
    basis = alg.basis()
    rng = random.Random(7)
    checked = 0
    while checked < 500:
        x, y, z = rng.sample(basis, 3)
        degs = [alg.degree(b) for b in (x, y, z)]
        sums = [Root(a.k1 + b.k1, a.k2 + b.k2) for a in degs for b in degs]
        sums.append(Root(sum(d.k1 for d in degs), sum(d.k2 for d in degs)))
        if not all(alg.in_window(s) for s in sums):
            continue
        X, Y, Z = {x: 1}, {y: 1}, {z: 1}
        jac = vec_add(
            alg.bracket(X, alg.bracket(Y, Z)),
            alg.bracket(Y, alg.bracket(Z, X)),
            alg.bracket(Z, alg.bracket(X, Y)),
        )
        assert jac == {}, (x, y, z)
        assert vec_add(alg.bracket(X, Y), alg.bracket(Y, X)) == {}
        checked += 1


def test_structure_constants_are_rational():
    alg = TruncatedKMAlgebra(SYM3, 8)
    for b in alg.basis():
        for g in (e(1), e(2), f(1), f(2)):
            try:
                v = alg.bracket(g, {b: 1})
            except TruncationLoss:
                continue
            assert all(isinstance(c, (Fraction, int)) for c in v.values())


def test_chevalley_relations():
    alg = build_truncated_algebra(SYM3, 8)
    assert alg.bracket(e(1), f(1)) == vec_scale(-1, h(1))
    assert alg.bracket(e(1), f(2)) == {}
    assert alg.bracket(h(1), e(2)) == vec_scale(-3, e(2))
    assert alg.bracket(h(2), f(2)) == vec_scale(-2, f(2))


def test_bracket_outside_window_raises():
    alg = build_truncated_algebra(SYM2, 6)
    top = ("e", Root(3, 3), 0)
    with pytest.raises(TruncationLoss):
        alg.bracket(e(1), {top: 1})


# --- eta and the signs ---


def test_eta_on_generators():
    alg = build_truncated_algebra(SYM2, 6)
    eta1 = eta(alg, 1)
    image = eta1(e(1))
    assert list(image) == [("f", Root(1, 0), 0)]
    assert abs(image[("f", Root(1, 0), 0)]) == 1
    sq = eta1.power(2)
    assert sq(e(1)) == e(1)
    assert sq(f(1)) == f(1)


def test_lie_operator_matrix_reports_lossy_columns():
    alg = build_truncated_algebra(SYM2, 6)
    cols, lossy = eta(alg, 1).matrix(alg.basis())
    assert ("h", 1) in cols
    assert lossy and all(lbl[1].height >= 3 for lbl in lossy)


@pytest.mark.parametrize("m,expected", [(2, (1, 1)), (3, (-1, -1)), (4, (1, 1)), (5, (-1, -1))])
def test_epsilon_pair_symmetric(m, expected):
    assert epsilon_pair(GCM.symmetric(m)) == expected


@pytest.mark.parametrize("a12,a21", [(-2, -2), (-3, -3), (-2, -3), (-1, -4), (-1, -3), (-4, -5)])
def test_epsilon_pair_matches_sl2_module_oracle(a12, a21):
    gcm = GCM(a12, a21)
    expected = []
    for i, a in ((1, a12), (2, a21)):
        on_e, on_f = eta_squared_signs(-a)
        assert on_e == on_f
        expected.append(int(on_e))
    assert epsilon_pair(gcm) == tuple(expected)


@pytest.mark.parametrize("gcm", [SYM2, SYM3, GCM(-2, -3)])
def test_epsilon_truncation_stability(gcm):
    H = minimal_height(gcm)
    assert epsilon_pair(gcm, H) == epsilon_pair(gcm, H + 1) == epsilon_pair(gcm, H + 2)


def test_sign_certificate_agrees_on_e_and_f():
    cert = sign_certificate(SYM3)
    assert cert.on_e == cert.on_f == (-1, -1)
    doc = cert.as_dict()
    assert doc["eps1"] == -1 and len(doc["strings"]) == 2


@settings(max_examples=25)
@given(st.integers(-6, -1), st.integers(-6, -1))
def test_default_signs_parity_rule(a12, a21):
    # eta_i^2 is the torus element h_i(-1), which acts on e_j by (-1)^{a_ij}
    assert default_signs(GCM(a12, a21)) == ((-1) ** a12, (-1) ** a21)
