"""Local objects of the unramified calculation on the Siegel Levi.

Contents: the support functions Delta_0' and Delta_0, the oscillatory integral
alpha_{chi,p} computed as a direct character sum, the unipotent integral
int_U chi(u) 1(ug) du, the matrix Y, and the two coset enumerations (Levi
normal forms versus embedded torus elements of GL*_{2,L}).

A Levi element is m = diag(m_t, m_b) with m_t = nu * m_b^-t.  Right
multiplication by M(Z_p) acts on m_b by arbitrary column operations over Z_p
and changes nu by a unit, so the coset of m is determined by the column
Hermite form of m_b together with ord_p(nu).
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np


from .gsp4 import (
    F2F1,
    GSpElement,
    Matrix,
    QuadExtData,
    act_v5,
    block_diag,
    blocks,
    embed_gl2L,
    is_siegel_levi,
    make_gsp,
    make_v_D,
    mat,
    mat_det,
    mat_inv,
    mat_mul,
    mat_scale,
    mat_T,
    modulus_chars,
    t_matrix,
)
from .padic import (
    LatticeQuotient,
    PrimeCtx,
    ResolutionError,
    abs_p,
    char_sum,
    frac_p,
    is_integral,
    psi_p,
    reduce_mod,
    val_p,
)

ORIENTATIONS = ("minus", "plus")


def _F(x) -> Fraction:
    return Fraction(x)


def _pow(p: int, k: int) -> Fraction:
    return Fraction(p) ** k


# ---------------------------------------------------------------------------
# column Hermite form over Z_p

def hermite_upper(m2: Matrix, ctx: PrimeCtx) -> tuple[Fraction, Fraction, Fraction]:
    """Upper-triangularize m2 by right GL2(Z_p) multiplication.

    The pivot is the bottom-row entry of least valuation (left column on ties);
    it is moved to position (2,2) and used to clear position (2,1).  Returns
    (m11, m12, m22).
    """
    (a, b), (c, d) = ((_F(x) for x in r) for r in m2)
    if a * d - b * c == 0:
        raise ValueError("singular matrix")
    if c != 0 and (d == 0 or val_p(c, ctx) <= val_p(d, ctx)):
        a, b, c, d = b, a, d, c
    if c != 0:
        k = c / d
        assert val_p(k, ctx) >= 0
        a, c = a - k * b, Fraction(0)
    return a, b, d


def hermite_normal(m2: Matrix, ctx: PrimeCtx) -> tuple[int, Fraction, int]:
    """(alpha, b, delta) with m2 GL2(Z_p) = (p^alpha, b; 0, p^delta) GL2(Z_p), b reduced mod p^alpha."""
    m11, m12, m22 = hermite_upper(m2, ctx)
    alpha, delta = val_p(m11, ctx), val_p(m22, ctx)
    unit2 = _pow(ctx.p, delta) / m22
    return alpha, reduce_mod(m12 * unit2, alpha, ctx), delta


# ---------------------------------------------------------------------------
# Delta_0', Delta_0

def _congruence(y: Fraction, ext: QuadExtData, modulus_val: int, ctx: PrimeCtx,
                orientation: str = "minus") -> bool:
    if ext.one_mod_4:
        f = y * y - y if orientation == "minus" else y * y + y
        diff = f - ext.c
    else:
        diff = y * y - ext.D
    return val_p(diff, ctx) >= modulus_val


def delta0_prime(m2: Matrix, ext: QuadExtData, ctx: PrimeCtx) -> int:
    m11, m12, m22 = hermite_upper(m2, ctx)
    v22 = val_p(m22, ctx)
    if val_p(m11, ctx) < v22:
        return 0
    lead = 2 * m12 if ext.one_mod_4 else m12
    if val_p(lead, ctx) < v22:
        return 0
    y = m12 / m22
    return int(_congruence(y, ext, val_p(m11 / m22, ctx), ctx))


def levi_parts(m: GSpElement) -> tuple[Matrix, Matrix]:
    if not is_siegel_levi(m.mat):
        raise ValueError("element is not in the Siegel Levi")
    a, _, _, d = blocks(m.mat)
    return a, d


def sqrt_abs_ratio(m: GSpElement, ctx: PrimeCtx) -> tuple[int, Fraction]:
    """(ord_p r, |r|^(1/2)) for r = det(m_t)/det(m_b)."""
    m_t, m_b = levi_parts(m)
    r = Fraction(mat_det(m_t)) / mat_det(m_b)
    v = val_p(r, ctx)
    if v % 2:
        raise ValueError(f"odd valuation {v} under the square root: malformed Levi element")
    return v, _pow(ctx.p, -(v // 2))


def delta0(m: GSpElement, ext: QuadExtData, ctx: PrimeCtx) -> Fraction:
    v, root = sqrt_abs_ratio(m, ctx)
    if v < 0:
        return Fraction(0)
    _, m_b = levi_parts(m)
    return root * delta0_prime(m_b, ext, ctx)


# ---------------------------------------------------------------------------
# alpha_{chi,p} as a character sum

def alpha_chi_p(m: GSpElement, ext: QuadExtData, ctx: PrimeCtx, guard: int = 0) -> complex:
    """int_{Q_p} psi_p(z) 1(v_D n24(z) m in V5(Z_p)) dz by a finite character sum.

    Only the f1^f2 coordinate of v_D n24(z) m depends on z, and it is a fixed
    multiple of z, so the integrand is invariant under translation by
    kappa Z_p (kappa the inverse of that multiple) and by Z_p.  The quotient is
    taken at that resolution (plus ``guard`` levels) and checked once more at
    the next level.
    """
    _ = levi_parts(m)
    v0 = act_v5(make_v_D(ext), m)
    w1 = act_v5(F2F1, m)  # image of f2^f1; only its C-coordinate is nonzero
    if any(x != 0 for x in w1.coords[:4]):
        raise ValueError("f2^f1 is not preserved by a Levi element")
    slope = w1.C
    kappa_v = -val_p(slope, ctx)
    n = max(0, -kappa_v)
    mm = max(0, kappa_v) + guard

    def f(z):
        v = v0.coords[:4] + (v0.C + z * slope,)
        lat = (v[0], v[1], 2 * v[2] if ext.one_mod_4 else v[2], v[3], v[4])
        if all(is_integral(x, ctx) for x in lat):
            return psi_p(z, ctx)
        return 0

    a = char_sum(f, LatticeQuotient(1, n, mm), ctx)
    b = char_sum(f, LatticeQuotient(1, n, mm + 1), ctx)
    if abs(a - b) > 1e-12 * max(1.0, abs(a)):
        raise ResolutionError(f"alpha_chi_p changed under refinement: {a} -> {b}")
    return a


# ---------------------------------------------------------------------------
# the unipotent integral int_U chi(u) 1(ug) du

def chi_coefficients(ext: QuadExtData) -> tuple[Fraction, Fraction, Fraction]:
    """(a11, a12, a22) with chi(u) = psi(a11 u11 + a12 u12 + a22 u22)."""
    if ext.one_mod_4:
        return Fraction(1 - ext.D, 4), Fraction(1), Fraction(1)
    return Fraction(-ext.D), Fraction(0), Fraction(1)


def unipotent_integral(g: GSpElement, ext: QuadExtData, ctx: PrimeCtx, guard: int = 0,
                       check: bool = True) -> complex:
    """int over U(Q_p) of chi(u) 1(u g in M4(Z_p)) du, as an exact finite character sum.

    u = u(X) with X = (u11, u12; u12, u22).  Integrality of ug means m_t and
    m_b integral and both rows of X m_b integral, i.e. (u11, u12) and
    (u12, u22) lie in the lattice Lambda = Z_p^2 m_b^-1, which contains Z_p^2.
    chi and the indicator are invariant under p^M Z_p^3 for every M >= 0, so
    the integral is a sum over Lambda / p^M Z_p^2 with cells of measure
    p^-3M.  The sum is organised by Fubini over u12 and repeated at M + 1 as a
    resolution check.
    """
    m_t, m_b = levi_parts(g)
    if not all(is_integral(x, ctx) for r in m_t + m_b for x in r):
        return 0j
    val = _unipotent_sum(m_b, ext, ctx, guard)
    if check:
        finer = _unipotent_sum(m_b, ext, ctx, guard + 1)
        if abs(val - finer) > 1e-9 * max(1.0, abs(val)):
            raise ResolutionError(f"unipotent integral changed under refinement: {val} -> {finer}")
    return val


def _unipotent_sum(m_b: Matrix, ext: QuadExtData, ctx: PrimeCtx, mlev: int) -> complex:
    """Sum over Lambda / p^mlev Z_p^2, Lambda = Z_p^2 m_b^-1, for integral m_b.

    With H = (p^alpha, b; 0, p^delta) the Hermite form of m_b, Lambda has basis
    rows of H^-1 and the box 0 <= i < p^(alpha+mlev), 0 <= j < p^(delta+mlev)
    indexes the quotient.  Coordinates are kept as integers scaled by p^E,
    E = alpha + delta.
    """
    p = ctx.p
    alpha, b, delta = hermite_normal(m_b, ctx)
    assert b.denominator == 1
    e = alpha + delta
    pe, big = p ** e, p ** (e + mlev)
    i, j = np.meshgrid(np.arange(p ** (alpha + mlev), dtype=np.int64),
                       np.arange(p ** (delta + mlev), dtype=np.int64), indexing="ij")
    s = (i * p ** delta).ravel()                       # p^E * first coordinate
    t = (-i * int(b) + j * p ** alpha).ravel() % big   # p^E * second coordinate
    a11, a12, a22 = (int(c) for c in chi_coefficients(ext))

    def psi(x):
        return np.exp(-2j * np.pi * ((x % pe) / pe))

    # rows (u12, u22) = (s, t): inner sum over u22 grouped by u12 mod p^mlev
    inner = np.zeros(big, dtype=complex)
    np.add.at(inner, s % big, psi(a22 * t))
    # rows (u11, u12) = (s, t)
    terms = psi(a11 * s + a12 * t) * inner[t]
    cell = float(Fraction(p) ** (-3 * mlev))
    return complex(math.fsum(terms.real), math.fsum(terms.imag)) * cell


def lemma_prediction(g: GSpElement, ext: QuadExtData, ctx: PrimeCtx,
                     orientation: str = "minus") -> Fraction:
    """p^alpha when delta = 0, alpha >= 0 and b satisfies the branch congruence; else 0."""
    _, m_b = levi_parts(g)
    alpha, b, delta = hermite_normal(m_b, ctx)
    if delta != 0 or alpha < 0:
        return Fraction(0)
    if val_p(b, ctx) < 0:
        return Fraction(0)
    if not _congruence(b, ext, alpha, ctx, orientation):
        return Fraction(0)
    return Fraction(ctx.p) ** alpha


# ---------------------------------------------------------------------------
# the matrix Y

@dataclass(frozen=True)
class SymHalfInt:
    a: Fraction
    b: Fraction
    d: Fraction

    @property
    def matrix(self) -> Matrix:
        return ((self.a, self.b), (self.b, self.d))

    def is_half_integral(self, ctx: PrimeCtx) -> bool:
        return is_integral(self.a, ctx) and is_integral(self.d, ctx) and is_integral(2 * self.b, ctx)

    def scaled(self, c) -> "SymHalfInt":
        c = Fraction(c)
        return SymHalfInt(c * self.a, c * self.b, c * self.d)


def y_matrix(x, y, ext: QuadExtData) -> SymHalfInt:
    x, y = Fraction(x), Fraction(y)
    if x == 0:
        raise ValueError("x must be nonzero")
    if ext.one_mod_4:
        h = Fraction(1, 2) + y
        return SymHalfInt((y * y + y + Fraction(1 - ext.D, 4)) / x, h, x)
    return SymHalfInt((y * y - ext.D) / x, y, x)


def lambda_y(m: GSpElement, ext: QuadExtData) -> SymHalfInt:
    """m_b^-1 T m_t, which equals lambda * Y."""
    m_t, m_b = levi_parts(m)
    s = mat_mul(mat_mul(mat_inv(m_b), t_matrix(ext)), m_t)
    if s[0][1] != s[1][0]:
        raise ValueError("m_b^-1 T m_t is not symmetric")
    return SymHalfInt(s[0][0], s[0][1], s[1][1])


# ---------------------------------------------------------------------------
# cosets

@dataclass(frozen=True, order=True)
class LeviCoset:
    alpha_exp: int
    b: Fraction
    lambda_exp: int

    def m_b(self, p: int) -> Matrix:
        return mat([[Fraction(p) ** self.alpha_exp, self.b], [Fraction(0), Fraction(1)]])

    def element(self, p: int) -> GSpElement:
        m_b = self.m_b(p)
        lam = Fraction(p) ** self.lambda_exp
        m_t = mat_scale(lam * mat_det(m_b), mat_T(mat_inv(m_b)))
        return make_gsp(block_diag(m_t, m_b))

    def key(self) -> tuple:
        return (self.alpha_exp, 0, self.b, self.alpha_exp + self.lambda_exp)


def coset_key(m: GSpElement, ctx: PrimeCtx) -> tuple:
    """(alpha, b, delta, ord nu) classifying m M(Z_p) for a Levi element m."""
    _, m_b = levi_parts(m)
    alpha, b, delta = hermite_normal(m_b, ctx)
    return (alpha, delta, b, val_p(m.nu, ctx))


def enumerate_levi_cosets(ext: QuadExtData, ctx: PrimeCtx, val_bound: int,
                          orientation: str = "minus") -> list[LeviCoset]:
    """All (alpha, b, lambda) with alpha + ord(lambda) <= val_bound and the branch congruence on b."""
    from .padic import sqrt_cong_solutions

    if val_bound < 0:
        raise ValueError("val_bound must be non-negative")
    variant = "plain"
    if ext.one_mod_4:
        variant = "shifted" if orientation == "minus" else "shifted_plus"
    out = []
    for alpha in range(val_bound + 1):
        for b in sqrt_cong_solutions(ext.D, alpha, variant, ctx):
            for lam in range(val_bound - alpha + 1):
                out.append(LeviCoset(alpha, Fraction(b), lam))
    return sorted(out)


def prime_type(ext: QuadExtData, p: int) -> str:
    D = ext.D
    if p == 2:
        if not ext.one_mod_4:
            return "ramified"
        return "split" if D % 8 == 1 else "inert"
    if D % p == 0:
        return "ramified"
    return "split" if pow(D % p, (p - 1) // 2, p) == 1 else "inert"


def local_uniformizer(ext: QuadExtData, ctx: PrimeCtx):
    """An element eps + alpha of L whose norm has p-valuation exactly one (None if inert)."""
    p = ctx.p
    for e in range(4 * p * p):
        x = (Fraction(e), Fraction(1))
        if val_p(ext.l_norm(x), ctx) == 1:
            return x
    return None


def _l_pow(ext: QuadExtData, x, k: int):
    out = (Fraction(1), Fraction(0))
    base = x if k >= 0 else ext.l_inv(x)
    for _ in range(abs(k)):
        out = ext.l_mul(out, base)
    return out


@dataclass(frozen=True)
class TorusCosetImage:
    coset: tuple  # coset_key of the embedded element
    element: GSpElement
    x: tuple
    y: tuple


def torus_elements(ext: QuadExtData, ctx: PrimeCtx, box: int) -> Iterable[tuple]:
    """Pairs (x, y) covering T*_L(Q_p)/T*_L(Z_p)Z(Q_p) for exponents in a box."""
    kind = prime_type(ext, ctx.p)
    pi = local_uniformizer(ext, ctx)
    one = (Fraction(1), Fraction(0))
    if kind == "split":
        xs = [_l_pow(ext, pi, i) for i in range(-box, box + 1)]
    elif kind == "ramified":
        xs = [one, pi]
    else:
        xs = [one]
    for x in xs:
        for l in range(-box, box + 1):
            c = Fraction(ctx.p) ** l
            xi = ext.l_inv(x)
            yield x, (c * xi[0], c * xi[1])


def _scale_l(x, c):
    return (c * x[0], c * x[1])


def enumerate_torus_L_cosets(ext: QuadExtData, ctx: PrimeCtx, val_bound: int,
                             box: int | None = None) -> list[TorusCosetImage]:
    """Embedded torus elements with nonzero integrand, reduced to Levi normal form.

    Each class is rescaled by the centre so that val_p(g) = 0; it is kept when
    lambda = nu/det(m_b) is integral and ord(nu) <= val_bound.  The box of
    exponents is enlarged by two and the resulting set must not change.
    """
    if box is None:
        box = 2 * val_bound + 3

    def collect(bx):
        found = {}
        zero = (Fraction(0), Fraction(0))
        for x, y in torus_elements(ext, ctx, bx):
            g = embed_gl2L((x, zero, zero, y), ext)
            v = min(val_p(e, ctx) for r in g.mat for e in r if e != 0)
            s = Fraction(ctx.p) ** (-v)
            x2, y2 = _scale_l(x, s), _scale_l(y, s)
            g = embed_gl2L((x2, zero, zero, y2), ext)
            _, m_b = levi_parts(g)
            lam_exp = val_p(g.nu, ctx) - val_p(mat_det(m_b), ctx)
            if lam_exp < 0 or val_p(g.nu, ctx) > val_bound:
                continue
            key = coset_key(g, ctx)
            if key not in found:
                found[key] = TorusCosetImage(key, g, x2, y2)
        return found

    a = collect(box)
    b = collect(box + 2)
    if set(a) != set(b):
        raise ResolutionError("torus coset enumeration not stable in the exponent box")
    return [a[k] for k in sorted(a)]


def torus_coset_as_levi(img: TorusCosetImage) -> LeviCoset:
    alpha, delta, b, nu_exp = img.coset
    if delta != 0:
        raise ValueError(f"torus element with delta = {delta}: reduction to (p^a, b; 0, 1) failed")
    return LeviCoset(alpha, b, nu_exp - alpha)


def delta_B_L(x, y, ext: QuadExtData, ctx: PrimeCtx) -> Fraction:
    """Modulus character of the Borel of GL*_{2,L} at diag(x, y): |N(x)/N(y)|_p."""
    return abs_p(Fraction(ext.l_norm(x)) / ext.l_norm(y), ctx)


def integrand_sides(img: TorusCosetImage, ext: QuadExtData, ctx: PrimeCtx) -> tuple[Fraction, Fraction]:
    """(delta_P^-1 |det m_t/det m_b|^(1/2), delta_{B*_L}^-1) at the torus element."""
    dP = modulus_chars(img.element, ctx)["delta_P"]
    _, root = sqrt_abs_ratio(img.element, ctx)
    return root / dP, 1 / delta_B_L(img.x, img.y, ext, ctx)


def proof_witness(coset: LeviCoset, ext: QuadExtData, ctx: PrimeCtx) -> GSpElement:
    """An explicit embedded torus element in the coset of (alpha, b, lambda).

    m_b' is the image of y = t + alpha_L with t = b + gamma p^alpha, that is
    (t, D; 1, t), or (t, (D-1)/4; 1, t - 1) on the D = 1 mod 4 branch, and
    m_t' = lambda det(m_b') (m_b')^-t is the image of lambda conj(y).  gamma
    runs over 0..p until the coset matches.
    """
    p = ctx.p
    alpha, b, lam = coset.alpha_exp, coset.b, Fraction(p) ** coset.lambda_exp
    target = coset.key()
    cands = []
    if alpha == 0:
        cands.append(mat([[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]))
    for gamma in range(p + 1):
        t = b + gamma * Fraction(p) ** alpha
        if ext.one_mod_4:
            cands.append(mat([[t, ext.c], [Fraction(1), t - 1]]))
        else:
            cands.append(mat([[t, Fraction(ext.D)], [Fraction(1), t]]))
    for mb in cands:
        mt = mat_scale(lam * mat_det(mb), mat_T(mat_inv(mb)))
        g = make_gsp(block_diag(mt, mb))
        if coset_key(g, ctx) == target:
            return g
    raise ValueError(f"no witness found for {coset}")


def in_torus_image(g: GSpElement, ext: QuadExtData) -> bool:
    """Whether a block-diagonal element is the image of some diag(x, y) of GL*_{2,L}."""
    m_t, m_b = levi_parts(g)
    if ext.one_mod_4:
        c = ext.c
        # rows 3,4 of the embedding with u2 = u3 = 0: (eps4, c eta4; eta4, eps4 - eta4)
        e4, h4 = m_b[0][0], m_b[1][0]
        ok_b = m_b[0][1] == c * h4 and m_b[1][1] == e4 - h4
        e1, h1 = m_t[0][0], m_t[0][1]
        ok_t = m_t[1][0] == c * h1 and m_t[1][1] == e1 - h1
    else:
        e4, h4 = m_b[0][0], m_b[1][0]
        ok_b = m_b[0][1] == ext.D * h4 and m_b[1][1] == e4
        e1, h1 = m_t[0][0], m_t[0][1]
        ok_t = m_t[1][0] == ext.D * h1 and m_t[1][1] == e1
    return ok_b and ok_t


def random_levi(ctx: PrimeCtx, rng: random.Random, max_kappa: int = 4) -> GSpElement:
    """Random Siegel-Levi element diag(A, nu A^-t) with p-power scaled entries."""
    p = ctx.p
    while True:
        a = [[Fraction(rng.randint(-4, 4)) * Fraction(p) ** rng.randint(-1, 2) for _ in range(2)]
             for _ in range(2)]
        if a[0][0] * a[1][1] - a[0][1] * a[1][0] == 0:
            continue
        nu = Fraction(rng.choice([1, -1, 2, 3, 7])) * Fraction(p) ** rng.randint(-1, 3)
        a = mat(a)
        mb = mat_scale(nu, mat_T(mat_inv(a)))
        g = make_gsp(block_diag(a, mb))
        kappa = Fraction(mat_det(a)) / nu
        if abs(val_p(kappa, ctx)) <= max_kappa:
            return g
