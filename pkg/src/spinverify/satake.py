"""Unramified torus integrals on GSp4 and the spin L-factor identity.

This module works in the basis (e1, e2, f2, f1), in which the Borel subgroup
is upper triangular.  ``to_gsp4_order`` and ``from_gsp4_order`` convert to
and from the (e1, e2, f1, f2) ordering used by :mod:`spinverify.gsp4`.

A torus element diag(p^u1, p^u2, p^u3, p^u4) satisfies u1 + u4 = u2 + u3,
which is ord(nu).  It factors as t_A^a t_B^b t_C^c t_D^d with
t_A = (1,1,0,0), t_B = (1,0,1,0), t_C = (0,1,0,1) and t_D = (0,0,1,1), and
alpha(t) = X_A^a X_B^b X_C^c X_D^d depends only on t.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .exact_algebra import (
    ONE,
    W,
    X_A,
    X_B,
    X_C,
    X_D,
    AlgebraError,
    LaurentPoly,
    TruncatedSeries,
    series_from_poly,
    series_geo_inverse,
    torus_monomial,
)
from .gsp4 import Matrix, make_gsp, mat, mat_det, modulus_chars
from .padic import PrimeCtx, ResolutionError, is_integral, val_p

# permutation between (e1, e2, f1, f2) and (e1, e2, f2, f1); it is an involution
_PERM = (0, 1, 3, 2)

GENERATORS = {"A": (1, 1, 0, 0), "B": (1, 0, 1, 0), "C": (0, 1, 0, 1), "D": (0, 0, 1, 1)}


def to_gsp4_order(m: Matrix) -> Matrix:
    return tuple(tuple(m[_PERM[i]][_PERM[j]] for j in range(4)) for i in range(4))


def from_gsp4_order(m: Matrix) -> Matrix:
    return to_gsp4_order(m)


@dataclass(frozen=True, order=True)
class TorusElt:
    u: tuple[int, int, int, int]

    def __post_init__(self):
        u1, u2, u3, u4 = self.u
        if u1 + u4 != u2 + u3:
            raise ValueError(f"{self.u} violates u1 + u4 = u2 + u3")

    @classmethod
    def of(cls, *u) -> "TorusElt":
        return cls(tuple(int(x) for x in u))

    @property
    def ord_nu(self) -> int:
        return self.u[0] + self.u[3]

    @property
    def val(self) -> int:
        """val_p(t), the least exponent."""
        return min(self.u)

    def is_integral(self) -> bool:
        return self.val >= 0

    def __mul__(self, other: "TorusElt") -> "TorusElt":
        return TorusElt(tuple(a + b for a, b in zip(self.u, other.u)))

    def matrix(self, p: int) -> Matrix:
        """Diagonal matrix in the (e1, e2, f2, f1) basis."""
        return tuple(tuple(Fraction(p) ** self.u[i] if i == j else Fraction(0) for j in range(4))
                     for i in range(4))

    def gsp4_matrix(self, p: int) -> Matrix:
        return to_gsp4_order(self.matrix(p))

    def alpha(self) -> LaurentPoly:
        return torus_monomial(self.u)


def integral_torus(ord_nu: int) -> Iterator[TorusElt]:
    """All integral torus elements with the given ord(nu)."""
    n = ord_nu
    for u1 in range(n + 1):
        for u2 in range(n + 1):
            yield TorusElt((u1, u2, n - u2, n - u1))


def integral_torus_upto(bound: int) -> Iterator[TorusElt]:
    for n in range(bound + 1):
        yield from integral_torus(n)


# ---------------------------------------------------------------------------
# assignments of the Satake variables

@dataclass(frozen=True)
class SatakeAssignment:
    """Symbolic (values None) or numeric values for X_A, X_B, W."""

    x_a: object = None
    x_b: object = None
    w: object = None

    @property
    def symbolic(self) -> bool:
        return self.x_a is None

    def apply(self, s: TruncatedSeries) -> TruncatedSeries:
        if self.symbolic:
            return s
        return s.evaluate(self.x_a, self.x_b, self.w)

    def x_c(self):
        return self.w / self.x_b

    def x_d(self):
        return self.w / self.x_a


SYMBOLIC = SatakeAssignment()


# ---------------------------------------------------------------------------
# I_P

def _require_integral_matrix(m2: Matrix, ctx: PrimeCtx):
    if not all(is_integral(x, ctx) for r in m2 for x in r):
        raise ValueError("m2 must be p-integral")
    if mat_det(m2) == 0:
        raise ValueError("m2 must be invertible")


def ip_formula(m2: Matrix, ctx: PrimeCtx) -> Fraction:
    """|det m2|^-1 Delta_1(m2)^-1 with Delta_1 the largest absolute value of an entry."""
    m2 = mat(m2)
    _require_integral_matrix(m2, ctx)
    p = ctx.p
    vdet = val_p(mat_det(m2), ctx)
    vmin = min(val_p(x, ctx) for r in m2 for x in r if x != 0)
    return Fraction(p) ** (vdet + vmin)


def _int_residue(x: Fraction, k: int, p: int) -> int:
    mod = p ** k
    if mod == 1:
        return 0
    return (x.numerator * pow(x.denominator, -1, mod)) % mod


def _ip_count(m2: Matrix, p: int, n: int, mlev: int) -> Fraction:
    """Measure of {(x, y, z): (x, y) m2 and (z, x) m2 integral} on p^-n Z_p / p^mlev Z_p per axis."""
    k = n + mlev
    size = p ** k
    mod = p ** n
    r = [[_int_residue(Fraction(e), n, p) for e in row] for row in m2]
    reps = np.arange(size, dtype=np.int64)  # coordinate = rep / p^n
    xs = reps[:, None]
    other = reps[None, :]
    # row (x, y) m2 integral: x r[0][j] + y r[1][j] = 0 mod p^n
    ok_y = ((xs * r[0][0] + other * r[1][0]) % mod == 0) & ((xs * r[0][1] + other * r[1][1]) % mod == 0)
    # row (z, x) m2 integral: z r[0][j] + x r[1][j] = 0 mod p^n
    ok_z = ((other * r[0][0] + xs * r[1][0]) % mod == 0) & ((other * r[0][1] + xs * r[1][1]) % mod == 0)
    hits = int((ok_y.sum(axis=1) * ok_z.sum(axis=1)).sum())
    return Fraction(hits, p ** (3 * mlev))


def ip_by_counting(m2: Matrix, ctx: PrimeCtx, resolution: int = 0) -> Fraction:
    """Measure of {X = (x, y; z, x): X m2 integral} by lattice counting.

    Every solution has coordinates in p^-N Z_p with N = ord det(m2) - min ord(m2),
    since the rows of X lie in Z_p^2 m2^-1; the set is invariant under Z_p^3,
    so the count on p^-N Z_p / p^M Z_p is exact for M >= 0.  The count is
    repeated at M + 1.
    """
    m2 = mat(m2)
    _require_integral_matrix(m2, ctx)
    vdet = val_p(mat_det(m2), ctx)
    vmin = min(val_p(x, ctx) for r in m2 for x in r if x != 0)
    n = vdet - vmin
    a = _ip_count(m2, ctx.p, n, resolution)
    b = _ip_count(m2, ctx.p, n, resolution + 1)
    if a != b:
        raise ResolutionError(f"ip count changed under refinement: {a} -> {b}")
    return a


# ---------------------------------------------------------------------------
# I_B

def n_matrix(a, b, c, d) -> Matrix:
    """Element of the upper unipotent N in the basis (e1, e2, f2, f1).

    The free coordinates are x12 = a, x13 = b, x14 = c, x23 = d; the
    symplectic relation forces x24 = b - a d and x34 = -a.
    """
    a, b, c, d = (Fraction(x) for x in (a, b, c, d))
    return mat([[1, a, b, c], [0, 1, d, b - a * d], [0, 0, 1, -a], [0, 0, 0, 1]])


def check_n_parametrization(a, b, c, d) -> bool:
    """n(a,b,c,d) is symplectic with similitude 1 (checked in the gsp4 basis)."""
    g = make_gsp(to_gsp4_order(n_matrix(a, b, c, d)))
    return g.nu == 1


def _ib_abd_count(t: TorusElt, p: int, bump: int) -> Fraction:
    """Measure of the (a, b, d) part of {n : n t integral}; the c factor is separate."""
    u1, u2, u3, u4 = t.u
    na = min(u2, u4)
    if u3 <= u4:
        # coordinates (a, b, d); translations must keep (b - a d) p^u4 integral
        ma = max(u3 - u4, -na) + bump
        nd, md = u3, max(na - u4, -u3) + bump
        nb, mb = u3, -u3 + bump

        def ok(a, b, d):
            return (is_integral(a * p ** u2, p) and is_integral(a * p ** u4, p)
                    and is_integral(b * p ** u3, p) and is_integral(d * p ** u3, p)
                    and is_integral((b - a * d) * p ** u4, p))

        axes = ((na, ma), (nb, mb), (nd, md))
    else:
        # coordinates (a, e, d) with e = b - a d (unit Jacobian for fixed a, d)
        ma = max(0, -na) + bump
        nd, md = u3, max(na - u3, -u3) + bump
        ne, me = u4, -u4 + bump

        def ok(a, e, d):
            return (is_integral(a * p ** u2, p) and is_integral(a * p ** u4, p)
                    and is_integral((e + a * d) * p ** u3, p) and is_integral(d * p ** u3, p)
                    and is_integral(e * p ** u4, p))

        axes = ((na, ma), (ne, me), (nd, md))

    def axis(n, m):
        return [Fraction(i, 1) / Fraction(p) ** n for i in range(p ** (n + m))]

    xs = [axis(n, m) for n, m in axes]
    hits = 0
    for x0 in xs[0]:
        for x2 in xs[2]:
            for x1 in xs[1]:
                if ok(x0, x1, x2):
                    hits += 1
    cell = Fraction(p) ** -sum(m for _, m in axes)
    return hits * cell


def ib_by_counting(t: TorusElt, ctx: PrimeCtx, resolution: int = 0) -> Fraction:
    """Haar measure of {n in N(Q_p): n t in M4(Z_p)} by counting lattice cosets.

    (n t)_ij = n_ij p^u_j, so c = x14 contributes the factor p^u4 and the
    remaining coordinates are counted on a quotient chosen so that the
    integrand is constant on cells; the count is repeated one level finer.
    """
    if not t.is_integral():
        raise ValueError("t must be integral")
    p = ctx.p
    c_factor = Fraction(p) ** t.u[3]
    a = _ib_abd_count(t, p, resolution)
    b = _ib_abd_count(t, p, resolution + 1)
    if a != b:
        raise ResolutionError(f"I_B count changed under refinement: {a} -> {b}")
    return c_factor * a


def ib_prefactor(t: TorusElt, ctx: PrimeCtx) -> Fraction:
    """delta_B(t)^(1/2) |nu(t)|^(-3/2), computed through the gsp4 modulus character."""
    p = ctx.p
    dB = modulus_chars(t.gsp4_matrix(p), ctx)["delta_B"]
    # twice the exponent of p: delta_B is the rational p^ord(delta_B), |nu|^-3 = p^(3 ord nu)
    e2 = val_p(dB, ctx) + 3 * t.ord_nu
    if e2 % 2:
        raise AlgebraError(f"half-integral exponent {e2}/2 in the I_B prefactor for {t.u}")
    return Fraction(p) ** (e2 // 2)


def ib_formula(t: TorusElt, ctx: PrimeCtx) -> Fraction:
    """delta_B^(1/2) |nu|^(-3/2) (val_p(pt) - |p| val_p(t)), which is p^(u3+2u4) ((k+1) - k/p)."""
    if not t.is_integral():
        raise ValueError("t must be integral")
    k = t.val
    pre = ib_prefactor(t, ctx)
    assert pre == Fraction(ctx.p) ** (t.u[2] + 2 * t.u[3])
    return pre * (Fraction(k + 1) - Fraction(k, ctx.p))


# ---------------------------------------------------------------------------
# factorization and series

def factorization_count(t: TorusElt) -> int:
    """Number of (a, b, c, d) >= 0 with t_A^a t_B^b t_C^c t_D^d = t."""
    if not t.is_integral():
        raise ValueError("t must be integral")
    u1, u2, u3, u4 = t.u
    n = 0
    for a in range(u1 + 1):
        b = u1 - a
        c = u2 - a
        d = u3 - b
        if c >= 0 and d >= 0 and c + d == u4:
            n += 1
    return n


def torus_sum(kind: str, assign: SatakeAssignment, ctx: PrimeCtx, K: int) -> TruncatedSeries:
    """Sum over integral t with ord nu <= K of alpha(t) coef(t) Q^ord(nu).

    coef is val_p(pt) - |p| val_p(t) for ``weighted`` and val_p(pt) for ``plain``.
    """
    if kind not in ("weighted", "plain"):
        raise ValueError(f"unknown kind {kind!r}")
    if K < 0:
        raise ValueError("K must be non-negative")
    p = ctx.p
    coeffs = {}
    for n in range(K + 1):
        total = LaurentPoly()
        for t in integral_torus(n):
            k = t.val
            coef = Fraction(k + 1) - (Fraction(k, p) if kind == "weighted" else 0)
            total = total + t.alpha() * coef
        coeffs[n] = total
    return assign.apply(series_from_poly(coeffs, K))


def spin_l_factor(assign: SatakeAssignment, ctx: PrimeCtx, K: int) -> TruncatedSeries:
    """prod over X in (X_A, X_B, X_C, X_D) of (1 - X Q)^-1, truncated at Q^K."""
    out = TruncatedSeries.one(K)
    for x in (X_A, X_B, X_C, X_D):
        out = out * series_geo_inverse(x, K)
    return assign.apply(out)


def central_factor(assign: SatakeAssignment, ctx: PrimeCtx, K: int) -> TruncatedSeries:
    """1 - p^-1 W Q^2."""
    s = series_from_poly({0: ONE, 2: W * Fraction(-1, ctx.p)}, K)
    return assign.apply(s)


def literal_tA_series(K: int) -> TruncatedSeries:
    """sum_k alpha(t_A) Q^k with alpha(t_A) unraised, used to show the power k is needed."""
    return series_from_poly({k: X_A for k in range(1, K + 1)} | {0: ONE}, K)


@dataclass
class VerificationReport:
    ok: bool
    order: int
    p: int
    weighted_ok: bool
    plain_ok: bool
    mismatch: dict | None = None

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "order": self.order,
            "p": self.p,
            "weighted_ok": self.weighted_ok,
            "plain_ok": self.plain_ok,
            "mismatch": self.mismatch,
        }


def verify_macdonald(assign: SatakeAssignment, ctx: PrimeCtx, K: int) -> VerificationReport:
    """weighted torus sum = (1 - p^-1 W Q^2) L and plain torus sum = L, with L the spin factor."""
    L = spin_l_factor(assign, ctx, K)
    weighted = torus_sum("weighted", assign, ctx, K)
    plain = torus_sum("plain", assign, ctx, K)
    rhs = central_factor(assign, ctx, K) * L
    d1 = weighted.first_difference(rhs)
    d2 = plain.first_difference(L)
    mismatch = None
    for name, d in (("weighted", d1), ("plain", d2)):
        if d is not None and mismatch is None:
            mismatch = {"side": name, "degree": d[0], "difference": repr(d[1])}
    return VerificationReport(d1 is None and d2 is None, K, ctx.p, d1 is None, d2 is None, mismatch)
