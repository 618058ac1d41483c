"""GSp4, the five-dimensional representation V5, and the embedding of GL*_{2,L}.

Conventions: W4 = Q^4 as row vectors with ordered basis (e1, e2, f1, f2) and
GSp4 acting on the right; g J4 g^t = nu(g) J4 with J4 = [[0, 1], [-1, 0]] in
2x2 blocks.  V5 = (wedge^2_0 W4) (x) nu^-1 and a V5Vector stores its
coordinates (A, B1, B2, B3, C) against

    e1^e2,  e1^f2,  e1^f1 - e2^f2,  e2^f1,  f1^f2.

In these coordinates (v, v) = 2AC + 2 B2^2 + 2 B1 B3 and q(v) = (v, v)/2.
When D = 1 mod 4 the integral lattice uses (e1^f1 - e2^f2)/2 as its third
basis vector, so integrality allows B2 in (1/2)Z; coordinates are still
stored against e1^f1 - e2^f2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .padic import PrimeCtx, abs_p, val_p

Matrix = tuple[tuple, ...]


class SymplecticError(ValueError):
    """A matrix failed the symplectic similitude identity."""


# ---------------------------------------------------------------------------
# small dense matrix helpers (generic scalars: Fraction, int, float, complex)

def mat(rows: Iterable[Iterable]) -> Matrix:
    return tuple(tuple(r) for r in rows)


def identity(n: int = 4) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)) for i in range(n)
    )


def mat_T(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def mat_scale(c, a: Matrix) -> Matrix:
    return tuple(tuple(c * x for x in row) for row in a)


def mat_det(a: Matrix):
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = 0
    for j in range(n):
        if a[0][j] == 0:
            continue
        minor = tuple(tuple(row[c] for c in range(n) if c != j) for row in a[1:])
        total += (-1) ** j * a[0][j] * mat_det(minor)
    return total


def mat_inv(a: Matrix) -> Matrix:
    """Exact inverse by Gauss-Jordan elimination over the rationals."""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


def block_diag(a: Matrix, b: Matrix) -> Matrix:
    z = Fraction(0)
    return (
        (a[0][0], a[0][1], z, z),
        (a[1][0], a[1][1], z, z),
        (z, z, b[0][0], b[0][1]),
        (z, z, b[1][0], b[1][1]),
    )


def blocks(g: Matrix) -> tuple[Matrix, Matrix, Matrix, Matrix]:
    """The 2x2 blocks (A, B, C, D) of g = [[A, B], [C, D]]."""
    def blk(r, c):
        return ((g[r][c], g[r][c + 1]), (g[r + 1][c], g[r + 1][c + 1]))
    return blk(0, 0), blk(0, 2), blk(2, 0), blk(2, 2)


def from_blocks(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Matrix:
    return (
        (a[0][0], a[0][1], b[0][0], b[0][1]),
        (a[1][0], a[1][1], b[1][0], b[1][1]),
        (c[0][0], c[0][1], d[0][0], d[0][1]),
        (c[1][0], c[1][1], d[1][0], d[1][1]),
    )


J4 = mat([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
J4 = tuple(tuple(Fraction(x) for x in row) for row in J4)


def similitude(m: Matrix):
    """nu with m J4 m^t = nu J4, or None when m is not a symplectic similitude."""
    s = mat_mul(mat_mul(m, J4), mat_T(m))
    nu = s[0][2]
    for i in range(4):
        for j in range(4):
            if s[i][j] != nu * J4[i][j]:
                return None
    return nu


@dataclass(frozen=True)
class GSpElement:
    mat: Matrix
    nu: Fraction

    def __mul__(self, other: "GSpElement") -> "GSpElement":
        return GSpElement(mat_mul(self.mat, other.mat), self.nu * other.nu)

    def inverse(self) -> "GSpElement":
        return GSpElement(mat_inv(self.mat), 1 / Fraction(self.nu))

    def blocks(self):
        return blocks(self.mat)


def make_gsp(m: Sequence[Sequence], exact: bool = True) -> GSpElement:
    """Validate g J4 g^t = nu J4 and return the element with its similitude."""
    m = mat(tuple(Fraction(x) for x in row) for row in m) if exact else mat(m)
    if len(m) != 4 or any(len(r) != 4 for r in m):
        raise SymplecticError("expected a 4x4 matrix")
    s = mat_mul(mat_mul(m, J4), mat_T(m))
    nu = s[0][2]
    if nu == 0:
        raise SymplecticError("similitude is zero (matrix not invertible)")
    for i in range(4):
        for j in range(4):
            want = nu * J4[i][j]
            if (s[i][j] != want) if exact else abs(s[i][j] - want) > 1e-9 * max(1.0, abs(nu)):
                raise SymplecticError(
                    f"(g J4 g^t)[{i}][{j}] = {s[i][j]} but nu*J4[{i}][{j}] = {want}"
                )
    return GSpElement(m, nu)


def levi_element(m_t: Matrix, m_b: Matrix) -> GSpElement:
    return make_gsp(block_diag(m_t, m_b))


def siegel_levi(a: Matrix, nu) -> GSpElement:
    """diag(a, nu * a^-t), the general element of the Siegel Levi."""
    a = mat(tuple(Fraction(x) for x in row) for row in a)
    nu = Fraction(nu)
    return make_gsp(block_diag(a, mat_scale(nu, mat_T(mat_inv(a)))))


def unipotent_U(x11, x12, x22) -> GSpElement:
    o, z = Fraction(1), Fraction(0)
    return make_gsp([[o, z, x11, x12], [z, o, x12, x22], [z, z, o, z], [z, z, z, o]])


def is_siegel_levi(g: Matrix) -> bool:
    _, b, c, _ = blocks(g)
    return all(x == 0 for row in b + c for x in row)


def is_siegel_parabolic(g: Matrix) -> bool:
    _, _, c, _ = blocks(g)
    return all(x == 0 for row in c for x in row)


def is_klingen(g: Matrix) -> bool:
    """Stabilizer of the line Q f2: column 2 and row 4 vanish off the diagonal."""
    return all(g[i][1] == 0 for i in (0, 2, 3)) and all(g[3][j] == 0 for j in range(3))


# ---------------------------------------------------------------------------
# the quadratic algebra L and GL_2(L)

@dataclass(frozen=True)
class QuadExtData:
    D: int

    def __post_init__(self):
        D = self.D
        if D == 0:
            raise ValueError("D must be nonzero")
        n = abs(D)
        f = 2
        while f * f <= n:
            if n % (f * f) == 0:
                raise ValueError(f"D = {D} is not square-free")
            f += 1

    @property
    def one_mod_4(self) -> bool:
        return self.D % 4 == 1

    @property
    def branch(self) -> str:
        return "d_1_mod4" if self.one_mod_4 else "d_not_1_mod4"

    @property
    def c(self) -> Fraction:
        """(D-1)/4 on the D = 1 mod 4 branch."""
        return Fraction(self.D - 1, 4)

    # arithmetic of L in the basis (1, alpha)
    def l_mul(self, x, y):
        e1, h1 = x
        e2, h2 = y
        if self.one_mod_4:
            # alpha^2 = -alpha + (D-1)/4
            return (e1 * e2 + self.c * h1 * h2, e1 * h2 + h1 * e2 - h1 * h2)
        return (e1 * e2 + self.D * h1 * h2, e1 * h2 + h1 * e2)

    def l_add(self, x, y):
        return (x[0] + y[0], x[1] + y[1])

    def l_sub(self, x, y):
        return (x[0] - y[0], x[1] - y[1])

    def l_conj(self, x):
        e, h = x
        if self.one_mod_4:
            # conj(alpha) = -1 - alpha
            return (e - h, -h)
        return (e, -h)

    def l_norm(self, x):
        e, h = self.l_mul(x, self.l_conj(x))
        assert h == 0
        return e

    def l_inv(self, x):
        n = Fraction(self.l_norm(x))
        if n == 0:
            raise ZeroDivisionError("element of L with zero norm")
        e, h = self.l_conj(x)
        return (e / n, h / n)

    def eps_D(self) -> Matrix:
        if self.one_mod_4:
            return mat([[0, 1], [self.c, -1]])
        return mat([[0, 1], [self.D, 0]])


GL2L = tuple  # (u1, u2, u3, u4), each an (eps, eta) pair


def gl2l(u1, u2, u3, u4) -> GL2L:
    return tuple((Fraction(a), Fraction(b)) for a, b in (u1, u2, u3, u4))


def gl2l_mul(ext: QuadExtData, u: GL2L, v: GL2L) -> GL2L:
    m, a = ext.l_mul, ext.l_add
    return (
        a(m(u[0], v[0]), m(u[1], v[2])),
        a(m(u[0], v[1]), m(u[1], v[3])),
        a(m(u[2], v[0]), m(u[3], v[2])),
        a(m(u[2], v[1]), m(u[3], v[3])),
    )


def gl2l_det(ext: QuadExtData, u: GL2L):
    return ext.l_sub(ext.l_mul(u[0], u[3]), ext.l_mul(u[1], u[2]))


def embed_matrix(ext: QuadExtData, u: GL2L) -> Matrix:
    (e1, h1), (e2, h2), (e3, h3), (e4, h4) = u
    D = ext.D
    if ext.one_mod_4:
        c = ext.c
        return (
            (e1, h1, h2, e2 - h2),
            (c * h1, e1 - h1, e2 - h2, -e2 + h2 * Fraction(D + 3, 4)),
            (e3 + c * h3, e3, e4, c * h4),
            (e3, h3, h4, e4 - h4),
        )
    return (
        (e1, h1, h2, e2),
        (D * h1, e1, e2, D * h2),
        (D * h3, e3, e4, D * h4),
        (e3, h3, h4, e4),
    )


def embed_gl2L(u: GL2L, ext: QuadExtData) -> GSpElement:
    """Image of u in GSp4; the similitude equals det(u), which must be rational and nonzero."""
    det = gl2l_det(ext, u)
    if det[0] == 0 and det[1] == 0:
        raise ValueError("degenerate element: det = 0")
    if det[1] != 0:
        raise ValueError(f"det(u) = {det} is not rational")
    g = make_gsp(embed_matrix(ext, u))
    assert g.nu == det[0]
    return g


def random_gl2l(ext: QuadExtData, rng: random.Random, length: int = 6, size: int = 3) -> GL2L:
    """Seeded random word in unipotents and diag(x, c*conj(x)) of GL*_{2,L}(Q)."""
    one, zero = (Fraction(1), Fraction(0)), (Fraction(0), Fraction(0))
    u = (one, zero, zero, one)

    def rnd():
        return (Fraction(rng.randint(-size, size)), Fraction(rng.randint(-size, size)))

    for _ in range(length):
        kind = rng.randrange(3)
        if kind == 0:
            g = (one, rnd(), zero, one)
        elif kind == 1:
            g = (one, zero, rnd(), one)
        else:
            x = rnd()
            while ext.l_norm(x) == 0:
                x = rnd()
            c = Fraction(rng.choice([1, -1, 2, 3, Fraction(1, 2)]))
            cx = ext.l_conj(x)
            g = (x, zero, zero, (c * cx[0], c * cx[1]))
        u = gl2l_mul(ext, u, g)
    return u


def centralizer_element(ext: QuadExtData) -> Matrix:
    """diag(eps_D, eps_D^t), which commutes with the image of GL*_{2,L}."""
    e = ext.eps_D()
    e = mat(tuple(Fraction(x) for x in r) for r in e)
    return block_diag(e, mat_T(e))


# split-case basis change: rows are e1' = e1+e2, e2' = e2, f1' = f1, f2' = f1-f2
SPLIT_BASIS = tuple(tuple(Fraction(x) for x in r) for r in
                    ((1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 1, -1)))


# ---------------------------------------------------------------------------
# V5

_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))  # e1e2 e1f1 e1f2 e2f1 e2f2 f1f2


@dataclass(frozen=True)
class V5Vector:
    A: object
    B1: object
    B2: object
    B3: object
    C: object

    @classmethod
    def of(cls, *coords) -> "V5Vector":
        if len(coords) == 1:
            coords = tuple(coords[0])
        return cls(*(Fraction(x) if isinstance(x, (int, str)) else x for x in coords))

    @property
    def coords(self) -> tuple:
        return (self.A, self.B1, self.B2, self.B3, self.C)

    def __add__(self, o: "V5Vector") -> "V5Vector":
        return V5Vector(*(a + b for a, b in zip(self.coords, o.coords)))

    def __sub__(self, o: "V5Vector") -> "V5Vector":
        return V5Vector(*(a - b for a, b in zip(self.coords, o.coords)))

    def __neg__(self) -> "V5Vector":
        return V5Vector(*(-a for a in self.coords))

    def scale(self, c) -> "V5Vector":
        return V5Vector(*(c * a for a in self.coords))

    def wedge6(self) -> tuple:
        A, B1, B2, B3, C = self.coords
        return (A, B2, B1, B3, -B2, C)

    @classmethod
    def from_wedge6(cls, y: Sequence) -> "V5Vector":
        e12, e1f1, e1f2, e2f1, e2f2, f1f2 = y
        tr = e1f1 + e2f2
        if isinstance(tr, (int, Fraction)):
            bad = tr != 0
        else:
            bad = abs(tr) > 1e-9 * max(1.0, max(abs(c) for c in y))
        if bad:
            raise ValueError("vector leaves the trace-free part of wedge^2")
        return cls(e12, e1f2, e1f1, e2f1, f1f2)

    def lattice_coords(self, ext: QuadExtData) -> tuple:
        """Coordinates against the integral basis of the D-branch."""
        A, B1, B2, B3, C = self.coords
        return (A, B1, 2 * B2 if ext.one_mod_4 else B2, B3, C)

    def is_integral(self, ext: QuadExtData, ctx: PrimeCtx | None = None) -> bool:
        """Membership in V5(Z) (ctx None) or V5(Z_p)."""
        for x in self.lattice_coords(ext):
            x = Fraction(x)
            if ctx is None:
                if x.denominator != 1:
                    return False
            elif val_p(x, ctx) < 0:
                return False
        return True


def pairing(v: V5Vector, w: V5Vector):
    """The invariant bilinear form: v ^ w = (v, w) e1^e2^f1^f2."""
    return (2 * v.B2 * w.B2 + v.B1 * w.B3 + v.B3 * w.B1 + v.A * w.C + v.C * w.A)


def q(v: V5Vector):
    return pairing(v, v) / 2


def norm2(v: V5Vector):
    """Squared norm induced by the orthonormal basis e1, e2, f1, f2."""
    return v.A * v.A + v.B1 * v.B1 + 2 * v.B2 * v.B2 + v.B3 * v.B3 + v.C * v.C


def wedge_action_matrix(g: Matrix) -> tuple:
    """6x6 matrix of wedge^2 g on the pair basis (row-vector convention)."""
    rows = []
    for (i, j) in _PAIRS:
        rows.append(tuple(g[i][k] * g[j][l] - g[i][l] * g[j][k] for (k, l) in _PAIRS))
    return tuple(rows)


def act_v5(v: V5Vector, g: GSpElement | Matrix, nu=None) -> V5Vector:
    """v . g in V5, i.e. the wedge action twisted by nu(g)^-1."""
    if isinstance(g, GSpElement):
        m, nu = g.mat, g.nu
    else:
        m = g
        if nu is None:
            nu = similitude(m)
    x = v.wedge6()
    wm = wedge_action_matrix(m)
    y = [sum(x[r] * wm[r][c] for r in range(6)) / nu for c in range(6)]
    return V5Vector.from_wedge6(y)


def make_v_D(ext: QuadExtData) -> V5Vector:
    D = ext.D
    if ext.one_mod_4:
        return V5Vector.of(0, Fraction(D - 1, 4), Fraction(1, 2), 1, 0)
    return V5Vector.of(0, D, 0, 1, 0)


F2F1 = V5Vector.of(0, 0, 0, 0, -1)  # f2 ^ f1


# ---------------------------------------------------------------------------
# characters of U and modulus characters

def t_matrix(ext: QuadExtData) -> Matrix:
    if ext.one_mod_4:
        return mat([[Fraction(1 - ext.D, 4), Fraction(1, 2)], [Fraction(1, 2), Fraction(1)]])
    return mat([[Fraction(-ext.D), Fraction(0)], [Fraction(0), Fraction(1)]])


def u_block(u: Matrix) -> tuple:
    """(u11, u12, u22) for u = [[1, X], [0, 1]] with X symmetric; raises otherwise."""
    a, b, c, d = blocks(u)
    one = ((1, 0), (0, 1))
    if (any(a[i][j] != one[i][j] or d[i][j] != one[i][j] or c[i][j] != 0
            for i in range(2) for j in range(2)) or b[0][1] != b[1][0]):
        raise ValueError("element is not in the unipotent radical U")
    return b[0][0], b[0][1], b[1][1]


def chi_argument(u: Matrix, ext: QuadExtData):
    u11, u12, u22 = u_block(u)
    if ext.one_mod_4:
        return ext.c * -1 * u11 + u12 + u22
    return -ext.D * u11 + u22


def chi_value(u: GSpElement | Matrix, ext: QuadExtData, place: PrimeCtx | str) -> complex:
    """chi(u) = psi(-D u11 + u22), or psi((1-D)/4 u11 + u12 + u22) for D = 1 mod 4."""
    from .padic import psi_inf, psi_p

    m = u.mat if isinstance(u, GSpElement) else u
    x = chi_argument(m, ext)
    if place == "inf":
        return psi_inf(float(x))
    return psi_p(x, place)


def _abs(x, ctx: PrimeCtx | None):
    if ctx is None:
        return abs(Fraction(x))
    return abs_p(x, ctx)


def modulus_chars(g: GSpElement | Matrix, ctx: PrimeCtx | None = None) -> dict:
    """delta_P, delta_B, delta_Q at g, each None when g is outside that subgroup.

    delta_P on the Siegel parabolic is |det A|^3 |nu|^-3 (A the top-left block),
    delta_B on diagonal elements is |lam|^3 |t1/t2| after writing the element as
    diag(lam t1, lam t2, t1, t2) in the basis (e1, e2, f2, f1), and delta_Q on
    the Klingen parabolic is |a/d|^2.
    """
    m = g.mat if isinstance(g, GSpElement) else g
    nu = g.nu if isinstance(g, GSpElement) else similitude(m)
    out = {"delta_P": None, "delta_B": None, "delta_Q": None}
    if is_siegel_parabolic(m):
        a, _, _, _ = blocks(m)
        out["delta_P"] = _abs(mat_det(a), ctx) ** 3 / _abs(nu, ctx) ** 3
    if all(m[i][j] == 0 for i in range(4) for j in range(4) if i != j):
        t1, t2 = m[3][3], m[2][2]  # f1, f2 entries in the reordered basis
        lam = Fraction(m[0][0]) / t1
        out["delta_B"] = _abs(lam, ctx) ** 3 * _abs(Fraction(t1) / t2, ctx)
    if is_klingen(m):
        out["delta_Q"] = (_abs(m[1][1], ctx) / _abs(m[3][3], ctx)) ** 2
    return out


# ---------------------------------------------------------------------------
# orbits on lines over F_p

def _embed_mod_p(ext: QuadExtData, u, p: int):
    m = embed_matrix(ext, tuple((Fraction(a), Fraction(b)) for a, b in u))
    return tuple(tuple(int(x) % p for x in row) for row in m)


def _normalize_line(v, p):
    for x in v:
        if x % p:
            inv = pow(x, -1, p)
            return tuple((y * inv) % p for y in v)
    raise ValueError("zero vector")


def line_orbits_mod_p(ext: QuadExtData, ctx: PrimeCtx) -> list[int]:
    """Sorted orbit sizes of the image of GL*_{2,L}(F_p) on the lines of F_p^4."""
    p = ctx.p
    if p == 2 or ext.D % p == 0:
        raise ValueError(f"p = {p} is a bad-reduction prime for D = {ext.D}")
    one, zero = (1, 0), (0, 0)
    gens = []
    for x in ((1, 0), (0, 1)):
        gens.append((one, x, zero, one))
        gens.append((one, zero, x, one))
    for c in range(1, p):
        gens.append(((c, 0), zero, zero, one))
    for e in range(p):
        for h in range(p):
            x = (e, h)
            n = ext.l_norm((Fraction(e), Fraction(h)))
            if int(n) % p == 0:
                continue
            ninv = pow(int(n) % p, -1, p)
            conj = ext.l_conj((e, h))
            xinv = (int(conj[0]) * ninv % p, int(conj[1]) * ninv % p)
            gens.append((x, zero, zero, xinv))
    mats = [_embed_mod_p(ext, u, p) for u in gens]

    points = set()
    for v in _all_vectors(p):
        points.add(_normalize_line(v, p))
    seen: set = set()
    sizes = []
    for start in sorted(points):
        if start in seen:
            continue
        orbit = {start}
        frontier = [start]
        while frontier:
            v = frontier.pop()
            for m in mats:
                w = tuple(sum(v[i] * m[i][j] for i in range(4)) % p for j in range(4))
                w = _normalize_line(w, p)
                if w not in orbit:
                    orbit.add(w)
                    frontier.append(w)
        seen |= orbit
        sizes.append(len(orbit))
    return sorted(sizes)


def _all_vectors(p: int):
    import itertools

    for v in itertools.product(range(p), repeat=4):
        if any(v):
            yield v


# ---------------------------------------------------------------------------
# random elements of GSp4(Z)

def gsp4z_generators() -> list[GSpElement]:
    """Weyl elements, elementary unipotents, GL2-block embeddings, and diag(1,1,-1,-1)."""
    f = Fraction
    gens = [make_gsp(J4)]
    for x in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        n = unipotent_U(*x)
        gens.append(n)
        gens.append(make_gsp(mat_T(n.mat)))
    for a in (((1, 1), (0, 1)), ((0, 1), (1, 0)), ((1, 0), (1, 1)), ((-1, 0), (0, 1))):
        gens.append(siegel_levi(a, 1))
    gens.append(make_gsp([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]]))
    # Weyl element swapping e1 <-> e2 and f1 <-> f2
    gens.append(make_gsp([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]))
    return [GSpElement(tuple(tuple(f(x) for x in r) for r in g.mat), g.nu) for g in gens]


def random_gsp4z(rng: random.Random, max_length: int = 12) -> GSpElement:
    gens = gsp4z_generators()
    gens = gens + [g.inverse() for g in gens]
    g = make_gsp(identity())
    for _ in range(rng.randint(1, max_length)):
        g = g * rng.choice(gens)
    return g


def is_integral_matrix(m: Matrix) -> bool:
    return all(Fraction(x).denominator == 1 for row in m for x in row)
