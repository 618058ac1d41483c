import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from spinverify.gsp4 import (
    QuadExtData,
    block_diag,
    chi_value,
    make_gsp,
    mat,
    mat_det,
    mat_inv,
    mat_mul,
    mat_scale,
    mat_T,
    siegel_levi,
    unipotent_U,
)
from spinverify.local_unramified import (
    LeviCoset,
    alpha_chi_p,
    coset_key,
    delta0,
    delta0_prime,
    enumerate_levi_cosets,
    enumerate_torus_L_cosets,
    hermite_normal,
    in_torus_image,
    integrand_sides,
    lambda_y,
    lemma_prediction,
    levi_parts,
    prime_type,
    proof_witness,
    random_levi,
    torus_coset_as_levi,
    unipotent_integral,
    y_matrix,
)
from spinverify.padic import LatticeQuotient, PrimeCtx, char_sum, is_integral, val_p

F = Fraction


def levi_from_top(m_t, nu) -> "GSpElement":
    m_t = mat(m_t)
    return make_gsp(block_diag(m_t, mat_scale(F(nu), mat_T(mat_inv(m_t)))))


def levi_from_bottom(m_b, nu):
    m_b = mat(m_b)
    return make_gsp(block_diag(mat_scale(F(nu), mat_T(mat_inv(m_b))), m_b))


def lemma_element(p, al, de, b):
    return levi_from_top([[F(p) ** de, 0], [-F(b), F(p) ** al]], F(p) ** (al + de))


def dense_unipotent_integral(g, ext, ctx, lower):
    """Sum of chi(u) 1(u g integral) over every cell of (p^-lower Z_p / Z_p)^3."""
    def f(x11, x12, x22):
        u = unipotent_U(x11, x12, x22)
        ug = mat_mul(u.mat, g.mat)
        if all(is_integral(x, ctx) for r in ug for x in r):
            return chi_value(u, ext, ctx)
        return 0

    return char_sum(f, LatticeQuotient(3, lower, 0), ctx)


def test_delta0_prime_examples():
    ctx = PrimeCtx(5)
    assert delta0_prime(mat([[1, 0], [0, 1]]), QuadExtData(-1), ctx) == 1
    assert delta0_prime(mat([[5, 2], [0, 1]]), QuadExtData(-1), ctx) == 1
    assert delta0_prime(mat([[5, 1], [0, 1]]), QuadExtData(-1), ctx) == 0
    assert all(delta0_prime(mat([[5, b], [0, 1]]), QuadExtData(2), ctx) == 0 for b in range(5))


def test_delta0_examples():
    ctx = PrimeCtx(5)
    ext = QuadExtData(-1)
    assert delta0(levi_from_top([[1, 0], [0, 1]], 1), ext, ctx) == 1
    tA = levi_from_top([[5, 0], [0, 5]], 5)  # m_t = p 1_2, m_b = 1_2
    assert levi_parts(tA)[1] == mat([[1, 0], [0, 1]])
    assert delta0(tA, ext, ctx) == F(1, 5)
    dead = levi_from_bottom([[5, 1], [0, 1]], 5)
    assert delta0(dead, ext, ctx) == 0


def test_alpha_chi_examples():
    ctx = PrimeCtx(5)
    ext = QuadExtData(-1)
    assert abs(alpha_chi_p(levi_from_top([[1, 0], [0, 1]], 1), ext, ctx) - 1) < 1e-9
    assert abs(alpha_chi_p(levi_from_top([[5, 0], [0, 5]], 5), ext, ctx) - 0.2) < 1e-9
    assert abs(alpha_chi_p(levi_from_bottom([[5, 1], [0, 1]], 5), ext, ctx)) < 1e-9
    assert abs(alpha_chi_p(levi_from_bottom([[5, 2], [0, 1]], 5), ext, ctx) - 1) < 1e-9


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("D", [-1, 2, -7, 5])
def test_alpha_chi_matches_delta0_on_random_levi_elements(p, D):
    ctx, ext = PrimeCtx(p), QuadExtData(D)
    rng = random.Random(p * 100 + D)
    for _ in range(15):
        m = random_levi(ctx, rng, max_kappa=3)
        assert abs(alpha_chi_p(m, ext, ctx) - float(delta0(m, ext, ctx))) < 1e-9


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("D", [-1, -7])
def test_alpha_chi_is_right_invariant_under_integral_levi(p, D):
    ctx, ext = PrimeCtx(p), QuadExtData(D)
    rng = random.Random(7)
    k = siegel_levi(mat([[2, 1], [1, 1]]), -1)
    for _ in range(10):
        m = random_levi(ctx, rng, max_kappa=3)
        assert abs(alpha_chi_p(m * k, ext, ctx) - alpha_chi_p(m, ext, ctx)) < 1e-9
        assert abs(alpha_chi_p(m, ext, ctx, guard=1) - alpha_chi_p(m, ext, ctx)) < 1e-9


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.lists(st.integers(-30, 30), min_size=4, max_size=4),
       st.lists(st.integers(0, 3), min_size=4, max_size=4))
def test_hermite_normal_form_is_in_the_same_coset(p, ints, exps):
    m2 = mat([[F(ints[i]) * F(p) ** exps[i] for i in range(2)], [F(ints[i]) * F(p) ** exps[i] for i in range(2, 4)]])
    if mat_det(m2) == 0:
        return
    ctx = PrimeCtx(p)
    alpha, b, delta = hermite_normal(m2, ctx)
    h = mat([[F(p) ** alpha, b], [0, F(p) ** delta]])
    k = mat_mul(mat_inv(h), m2)
    assert all(is_integral(x, ctx) for r in k for x in r)
    assert val_p(mat_det(k), ctx) == 0
    assert 0 <= b < p ** max(alpha, 0) or (alpha <= 0 and b == 0)


def test_unipotent_integral_examples():
    ctx = PrimeCtx(5)
    ext = QuadExtData(-1)
    assert abs(unipotent_integral(levi_from_top([[1, 0], [0, 1]], 1), ext, ctx) - 1) < 1e-9
    g = levi_from_bottom([[5, 2], [0, 1]], 5)
    assert abs(unipotent_integral(g, ext, ctx) - 5) < 1e-9
    g = levi_from_bottom([[1, 0], [0, 5]], 5)
    assert abs(unipotent_integral(g, ext, ctx)) < 1e-9


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("D", [-1, 2, -7, 5, -3])
def test_unipotent_integral_against_dense_grid(p, D):
    ctx, ext = PrimeCtx(p), QuadExtData(D)
    for al in (0, 1):
        for de in (0, 1):
            for b in range(p ** al):
                g = lemma_element(p, al, de, b)
                fast = unipotent_integral(g, ext, ctx)
                dense = dense_unipotent_integral(g, ext, ctx, al + de)
                assert abs(fast - dense) < 1e-9


def test_congruence_orientation_witness_at_two():
    # p = 2, D = -7: b^2 - b = -2 mod 4 holds for b = 3 but b^2 + b = -2 mod 4 does not
    ctx, ext = PrimeCtx(2), QuadExtData(-7)
    g3, g1 = lemma_element(2, 2, 0, 3), lemma_element(2, 2, 0, 1)
    assert abs(unipotent_integral(g3, ext, ctx) - 4) < 1e-9
    assert abs(unipotent_integral(g1, ext, ctx)) < 1e-9
    assert lemma_prediction(g3, ext, ctx, "minus") == 4 and lemma_prediction(g1, ext, ctx, "minus") == 0
    assert lemma_prediction(g3, ext, ctx, "plus") == 0 and lemma_prediction(g1, ext, ctx, "plus") == 4


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("D", [-1, -2, 2, 3, 5, -7])
def test_unipotent_lemma_on_a_small_grid(p, D):
    ctx, ext = PrimeCtx(p), QuadExtData(D)
    for al in (-1, 0, 1, 2):
        for de in (0, 1):
            for b in [F(x) for x in range(p ** max(al, 0))] + [F(1, p)]:
                g = lemma_element(p, al, de, b)
                assert abs(unipotent_integral(g, ext, ctx) - float(lemma_prediction(g, ext, ctx))) < 1e-9


def test_y_matrix_examples():
    ctx = PrimeCtx(3)
    y = y_matrix(1, 0, QuadExtData(-1))
    assert y.matrix == ((1, 0), (0, 1)) and y.is_half_integral(ctx)
    y = y_matrix(1, 0, QuadExtData(5))
    assert y.matrix == ((-1, F(1, 2)), (F(1, 2), 1)) and y.is_half_integral(ctx)
    y = y_matrix(9, 3, QuadExtData(-1))
    assert not y.scaled(F(1, 3)).is_half_integral(ctx)


@pytest.mark.parametrize("pair", [(5, -1), (3, 3), (2, -7), (3, -1)])
def test_lambda_y_on_torus_images(pair):
    p, D = pair
    ctx, ext = PrimeCtx(p), QuadExtData(D)
    for img in enumerate_torus_L_cosets(ext, ctx, 2):
        ly = lambda_y(img.element, ext)
        assert ly.is_half_integral(ctx)


def test_levi_coset_examples():
    one = LeviCoset(0, F(0), 0)
    assert enumerate_levi_cosets(QuadExtData(-1), PrimeCtx(5), 0) == [one]
    got = set(enumerate_levi_cosets(QuadExtData(-1), PrimeCtx(5), 1))
    assert got == {one, LeviCoset(1, F(2), 0), LeviCoset(1, F(3), 0), LeviCoset(0, F(0), 1)}
    got = set(enumerate_levi_cosets(QuadExtData(-1), PrimeCtx(3), 1))
    assert got == {one, LeviCoset(0, F(0), 1)}


def test_coset_key_matches_element():
    for c in enumerate_levi_cosets(QuadExtData(-1), PrimeCtx(5), 3):
        assert coset_key(c.element(5), PrimeCtx(5)) == c.key()


def test_torus_coset_examples():
    ctx, ext = PrimeCtx(5), QuadExtData(-1)
    imgs = enumerate_torus_L_cosets(ext, ctx, 1)
    assert torus_coset_as_levi(imgs[0]) == LeviCoset(0, F(0), 0)
    alpha_one = {torus_coset_as_levi(i) for i in imgs if i.coset[0] == 1}
    assert alpha_one == {LeviCoset(1, F(2), 0), LeviCoset(1, F(3), 0)}
    ram = enumerate_torus_L_cosets(QuadExtData(3), PrimeCtx(3), 1)
    assert LeviCoset(1, F(0), 0) in {torus_coset_as_levi(i) for i in ram}


def test_prime_types():
    assert prime_type(QuadExtData(-1), 5) == "split"
    assert prime_type(QuadExtData(-1), 3) == "inert"
    assert prime_type(QuadExtData(3), 3) == "ramified"
    assert prime_type(QuadExtData(-1), 2) == "ramified"
    assert prime_type(QuadExtData(-7), 2) == "split"
    assert prime_type(QuadExtData(5), 2) == "inert"


@pytest.mark.parametrize("pair", [(5, -1), (3, -1), (3, 3), (2, -1), (2, -7), (2, 5), (5, 5)])
def test_coset_bijection_and_integrand(pair):
    p, D = pair
    ctx, ext = PrimeCtx(p), QuadExtData(D)
    torus = enumerate_torus_L_cosets(ext, ctx, 2)
    assert {torus_coset_as_levi(i) for i in torus} == set(enumerate_levi_cosets(ext, ctx, 2))
    for img in torus:
        lhs, rhs = integrand_sides(img, ext, ctx)
        assert lhs == rhs
    for c in enumerate_levi_cosets(ext, ctx, 2):
        g = proof_witness(c, ext, ctx)
        assert in_torus_image(g, ext)
        assert coset_key(g, ctx) == c.key()
