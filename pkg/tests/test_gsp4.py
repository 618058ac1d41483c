import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from spinverify.gsp4 import (
    F2F1,
    J4,
    GSpElement,
    QuadExtData,
    SymplecticError,
    V5Vector,
    act_v5,
    block_diag,
    centralizer_element,
    chi_value,
    embed_gl2L,
    embed_matrix,
    gl2l,
    gsp4z_generators,
    identity,
    is_integral_matrix,
    is_klingen,
    is_siegel_parabolic,
    line_orbits_mod_p,
    make_gsp,
    make_v_D,
    mat,
    mat_det,
    mat_inv,
    mat_mul,
    modulus_chars,
    norm2,
    pairing,
    q,
    random_gl2l,
    random_gsp4z,
    siegel_levi,
    t_matrix,
    unipotent_U,
)
from spinverify.padic import PrimeCtx, psi_p

DISCS = [-1, -2, 2, 3, 5, -7, -3, 13]
small = st.integers(-4, 4)


def test_make_gsp_examples():
    assert make_gsp(identity()).nu == 1
    p = 5
    assert make_gsp([[p, 0, 0, 0], [0, p, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]).nu == p
    assert make_gsp(J4).nu == 1
    with pytest.raises(SymplecticError):
        make_gsp([[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    with pytest.raises(SymplecticError):
        make_gsp([[0] * 4] * 4)


def test_matrix_helpers():
    a = mat([[2, 1], [7, 4]])
    assert mat_det(a) == 1
    assert mat_mul(a, mat_inv(a)) == identity(2)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_random_words_are_integral_symplectic(seed):
    g = random_gsp4z(random.Random(seed))
    assert is_integral_matrix(g.mat)
    assert abs(g.nu) == 1
    assert make_gsp(g.mat).nu == g.nu


def test_embedding_examples():
    ext = QuadExtData(-1)
    one = gl2l((1, 0), (0, 0), (0, 0), (1, 0))
    assert embed_gl2L(one, ext).mat == identity()
    # diag(alpha, 1) has det alpha, so it is outside GL*_2 and only the raw matrix exists
    u = gl2l((0, 1), (0, 0), (0, 0), (1, 0))
    with pytest.raises(ValueError):
        embed_gl2L(u, ext)
    m = embed_matrix(ext, u)
    assert m[0] == (0, 1, 0, 0)
    assert m[1] == (-1, 0, 0, 0)
    assert m[2] == (0, 0, 1, 0) and m[3] == (0, 0, 0, 1)
    # the upper unipotent N lands in U when D = 1 mod 4
    ext5 = QuadExtData(5)
    n = embed_gl2L(gl2l((1, 0), (1, 0), (0, 0), (1, 0)), ext5)
    assert is_siegel_parabolic(n.mat)
    assert n.mat[0][:2] == (1, 0) and n.mat[1][:2] == (0, 1)
    assert n.mat[0][3] == n.mat[1][2]


@pytest.mark.parametrize("D", DISCS)
def test_embedding_is_a_homomorphism_with_similitude_det(D):
    ext = QuadExtData(D)
    rng = random.Random(D)
    from spinverify.gsp4 import gl2l_det, gl2l_mul

    for _ in range(10):
        u, v = random_gl2l(ext, rng), random_gl2l(ext, rng)
        gu, gv = embed_gl2L(u, ext), embed_gl2L(v, ext)
        assert embed_gl2L(gl2l_mul(ext, u, v), ext).mat == mat_mul(gu.mat, gv.mat)
        assert gu.nu == gl2l_det(ext, u)[0]


def test_embedding_rejects_irrational_det():
    ext = QuadExtData(-1)
    with pytest.raises(ValueError):
        embed_gl2L(gl2l((1, 1), (0, 0), (0, 0), (1, 0)), ext)


def test_v_D_norms():
    assert q(make_v_D(QuadExtData(-2))) == -2
    assert q(make_v_D(QuadExtData(-7))) == Fraction(-7, 4)
    assert q(make_v_D(QuadExtData(5))) == Fraction(5, 4)
    assert q(make_v_D(QuadExtData(-1))) == -1


@pytest.mark.parametrize("D", DISCS)
def test_v_D_is_fixed_by_the_embedded_group(D):
    ext = QuadExtData(D)
    rng = random.Random(100 + D)
    v = make_v_D(ext)
    for _ in range(50):
        assert act_v5(v, embed_gl2L(random_gl2l(ext, rng), ext)) == v


@pytest.mark.parametrize("D", DISCS)
def test_centralizer_element_commutes_with_embedded_group(D):
    ext = QuadExtData(D)
    c = centralizer_element(ext)
    rng = random.Random(D)
    for _ in range(5):
        g = embed_gl2L(random_gl2l(ext, rng), ext).mat
        assert mat_mul(c, g) == mat_mul(g, c)


@settings(max_examples=60, deadline=None)
@given(st.lists(small, min_size=5, max_size=5), st.integers(0, 10**6))
def test_q_is_invariant_and_identity_acts_trivially(coords, seed):
    v = V5Vector.of(*coords)
    assert act_v5(v, identity()) == v
    g = random_gsp4z(random.Random(seed), 6)
    assert q(act_v5(v, g)) == q(v)
    assert act_v5(v, g).is_integral(QuadExtData(-1))


def test_pairing_and_norm_conventions():
    v = V5Vector.of(1, 2, 3, 4, 5)
    assert pairing(v, v) == 2 * q(v)
    assert q(v) == 1 * 5 + 9 + 2 * 4
    assert norm2(v) == 1 + 4 + 2 * 9 + 16 + 25
    # the Siegel Levi diag(a, nu a^-t) scales f2^f1 by nu / det a
    a = mat([[2, 1], [3, 1]])
    lev = siegel_levi(a, 3)
    assert act_v5(F2F1, lev) == F2F1.scale(Fraction(3) / mat_det(a))


def test_chi_examples():
    ctx = PrimeCtx(5)
    for D in (-1, 5):
        ext = QuadExtData(D)
        assert chi_value(identity(), ext, ctx) == 1


@pytest.mark.parametrize("D", DISCS)
def test_chi_is_trivial_on_embedded_unipotents(D):
    ext = QuadExtData(D)
    rng = random.Random(D)
    ctx = PrimeCtx(3)
    for _ in range(20):
        x = (Fraction(rng.randint(-20, 20), rng.randint(1, 9)), Fraction(rng.randint(-20, 20), rng.randint(1, 9)))
        n = embed_gl2L(gl2l((1, 0), x, (0, 0), (1, 0)), ext)
        assert abs(chi_value(n, ext, ctx) - 1) < 1e-12
        assert abs(chi_value(n, ext, "inf") - 1) < 1e-12


@pytest.mark.parametrize("D", DISCS)
def test_chi_is_psi_of_trace(D):
    ext = QuadExtData(D)
    T = t_matrix(ext)
    rng = random.Random(D)
    ctx = PrimeCtx(3)
    for _ in range(20):
        x11, x12, x22 = (Fraction(rng.randint(-30, 30), rng.choice([1, 3, 9, 2])) for _ in range(3))
        tr = T[0][0] * x11 + 2 * T[0][1] * x12 + T[1][1] * x22
        assert abs(chi_value(unipotent_U(x11, x12, x22), ext, ctx) - psi_p(tr, ctx)) < 1e-12


def test_modulus_character_examples():
    ctx = PrimeCtx(3)
    one = modulus_chars(make_gsp(identity()), ctx)
    assert one == {"delta_P": 1, "delta_B": 1, "delta_Q": 1}
    tA = make_gsp([[3, 0, 0, 0], [0, 3, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert modulus_chars(tA, ctx)["delta_B"] == Fraction(1, 27)
    kl = make_gsp([[1, 0, 0, 0], [0, 3, 0, 0], [0, 0, 3, 0], [0, 0, 0, 1]])
    assert is_klingen(kl.mat)
    assert modulus_chars(kl, ctx)["delta_Q"] == Fraction(1, 9)
    assert modulus_chars(make_gsp(J4), ctx)["delta_P"] is None


def test_delta_P_is_multiplicative_on_the_parabolic():
    ctx = PrimeCtx(5)
    rng = random.Random(1)
    for _ in range(20):
        a = mat([[rng.choice([1, 5, 25]) * rng.choice([1, 2]), rng.randint(-3, 3)], [0, rng.choice([1, 5])]])
        nu = rng.choice([1, 5, Fraction(1, 5)])
        g = siegel_levi(a, nu) * unipotent_U(rng.randint(-3, 3), 1, 2)
        h = siegel_levi(mat([[5, 0], [1, 1]]), 25)
        lhs = modulus_chars(g * h, ctx)["delta_P"]
        assert lhs == modulus_chars(g, ctx)["delta_P"] * modulus_chars(h, ctx)["delta_P"]


def brute_orbits(ext, p):
    """Orbit sizes on lines under the images of every invertible u over F_p.

    This group contains the image of GL*_2 and is enumerated element by
    element, so it checks the generator-based search independently.
    """
    import itertools

    def embed(u):
        return [[int(x) % p for x in r] for r in embed_matrix(ext, tuple((Fraction(a), Fraction(b)) for a, b in u))]

    elems = []
    for vals in itertools.product(range(p), repeat=8):
        u = tuple((vals[2 * i], vals[2 * i + 1]) for i in range(4))
        m = embed(u)
        d = mat_det(mat(m))
        if int(d) % p:
            elems.append(m)
    lines = set()
    for v in itertools.product(range(p), repeat=4):
        if any(v):
            k = next(x for x in v if x)
            inv = pow(k, -1, p)
            lines.add(tuple(x * inv % p for x in v))
    seen, sizes = set(), []
    for L in sorted(lines):
        if L in seen:
            continue
        orb = set()
        for m in elems:
            w = [sum(L[i] * m[i][j] for i in range(4)) % p for j in range(4)]
            k = next(x for x in w if x)
            inv = pow(k, -1, p)
            orb.add(tuple(x * inv % p for x in w))
        seen |= orb
        sizes.append(len(orb))
    return sorted(sizes)


def test_orbit_examples():
    assert len(line_orbits_mod_p(QuadExtData(1), PrimeCtx(3))) == 3
    assert len(line_orbits_mod_p(QuadExtData(-1), PrimeCtx(3))) == 1
    assert len(line_orbits_mod_p(QuadExtData(-1), PrimeCtx(5))) == 3
    with pytest.raises(ValueError):
        line_orbits_mod_p(QuadExtData(-1), PrimeCtx(2))


@pytest.mark.parametrize("D", [-1, 1])
def test_orbits_from_generators_match_full_group_enumeration(D):
    ext = QuadExtData(D)
    assert line_orbits_mod_p(ext, PrimeCtx(3)) == brute_orbits(ext, 3)


def test_generators_are_symplectic():
    for g in gsp4z_generators():
        assert isinstance(g, GSpElement)
        assert make_gsp(g.mat).nu == g.nu


def test_block_diag_of_levi():
    a = mat([[1, 2], [0, 1]])
    g = siegel_levi(a, 2)
    assert g.nu == 2
    assert g.mat == block_diag(a, mat([[2, 0], [-4, 2]]))


@pytest.mark.parametrize("D", DISCS)
def test_commutant_of_centralizer_element_is_the_embedded_algebra(D):
    # both are 8-dimensional and one contains the other, so they coincide
    import numpy as np

    ext = QuadExtData(D)
    c = np.array(centralizer_element(ext), dtype=float)
    units = np.eye(16).reshape(16, 4, 4)
    comm = np.array([(c @ e - e @ c).ravel() for e in units]).T
    span = []
    for k in range(8):
        u = [[Fraction(0), Fraction(0)] for _ in range(4)]
        u[k // 2][k % 2] = Fraction(1)
        span.append(np.array(embed_matrix(ext, tuple(tuple(x) for x in u)), dtype=float).ravel())
    span = np.array(span).T
    assert 16 - np.linalg.matrix_rank(comm) == 8
    assert np.linalg.matrix_rank(span) == 8
    assert np.abs(comm @ span).max() == 0
