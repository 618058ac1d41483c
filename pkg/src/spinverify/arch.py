"""Archimedean objects: the Siegel upper half space, the isotropic vector w, the
functions Q_v(Z), the contour integral behind alpha_infinity, the section
f_infinity and the Gamma-structure of the archimedean integral.

Exact identities (isotropy of w, |(w, v)|^2 = |v|^2 - (v, v)) are checked in
Gaussian-rational arithmetic by splitting w into real and imaginary parts.
Everything involving exponentials uses floating point; one-dimensional
integrals over half lines go through scipy's QUADPACK wrappers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from .gsp4 import GSpElement, J4, V5Vector, act_v5, norm2, pairing

I2 = np.eye(2)
J4F = np.array(J4, dtype=float)


# ---------------------------------------------------------------------------
# H_2 and the action

@dataclass(frozen=True)
class SiegelPoint:
    Z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.Z, dtype=complex)
        if z.shape != (2, 2) or abs(z[0, 1] - z[1, 0]) > 1e-12 * max(1.0, abs(z).max()):
            raise ValueError("Z must be a symmetric 2x2 matrix")
        y = z.imag
        if not (y[0, 0] > 0 and np.linalg.det(y) > 0):
            raise ValueError("Im Z must be positive definite")
        object.__setattr__(self, "Z", z)

    @classmethod
    def i(cls, scale: float = 1.0) -> "SiegelPoint":
        return cls(1j * scale * I2)

    @property
    def X(self) -> np.ndarray:
        return self.Z.real

    @property
    def Y(self) -> np.ndarray:
        return self.Z.imag

    @property
    def y11(self) -> float:
        return float(self.Y[0, 0])

    @property
    def det_Z(self) -> complex:
        z = self.Z
        return complex(z[0, 0] * z[1, 1] - z[0, 1] * z[1, 0])


def as_array(g) -> np.ndarray:
    m = g.mat if isinstance(g, GSpElement) else g
    return np.array([[float(x) for x in row] for row in m]) if not isinstance(m, np.ndarray) else m


def similitude_float(g: np.ndarray) -> float:
    s = g @ J4F @ g.T
    nu = s[0, 2]
    if np.abs(s - nu * J4F).max() > 1e-9 * max(1.0, abs(nu)):
        raise ValueError("matrix is not a symplectic similitude")
    return float(nu)


def act_H2(g, Z: SiegelPoint) -> tuple[SiegelPoint, complex]:
    """(A Z + B)(C Z + D)^-1 and j(g, Z) = det(C Z + D)."""
    g = as_array(g)
    if similitude_float(g) <= 0:
        raise ValueError("need nu(g) > 0")
    a, b, c, d = g[:2, :2], g[:2, 2:], g[2:, :2], g[2:, 2:]
    den = c @ Z.Z + d
    j = complex(np.linalg.det(den))
    if abs(j) < 1e-14:
        raise ValueError("C Z + D is singular")
    w = (a @ Z.Z + b) @ np.linalg.inv(den)
    return SiegelPoint((w + w.T) / 2), j


def random_k_infty(rng: np.random.Generator) -> np.ndarray:
    """(A, B; -B, A) with A + iB a Haar-random unitary (QR of a complex Gaussian)."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    qm, r = np.linalg.qr(z)
    qm = qm @ np.diag(np.diag(r) / np.abs(np.diag(r)))
    a, b = qm.real, qm.imag
    return np.block([[a, b], [-b, a]])


def random_parabolic(rng: np.random.Generator) -> np.ndarray:
    """diag(nu d^-t, d) u(X) with random invertible d, symmetric X and nu > 0."""
    while True:
        d = rng.normal(size=(2, 2))
        if abs(np.linalg.det(d)) > 0.2:
            break
    x = rng.normal(size=(2, 2))
    x = (x + x.T) / 2
    nu = float(rng.uniform(0.5, 2.0))
    levi = np.block([[nu * np.linalg.inv(d).T, np.zeros((2, 2))], [np.zeros((2, 2)), d]])
    u = np.block([[I2, x], [np.zeros((2, 2)), I2]])
    return levi @ u


# ---------------------------------------------------------------------------
# the vector w = -(e1 - i f1) ^ (e2 - i f2)

W_RE = V5Vector.of(-1, 0, 0, 0, 1)
W_IM = V5Vector.of(0, 1, 0, -1, 0)


def w_vector() -> V5Vector:
    return V5Vector(*(complex(a) + 1j * complex(b) for a, b in zip(W_RE.coords, W_IM.coords)))


def w_isotropy() -> tuple[Fraction, Fraction]:
    """(w, w) as an exact Gaussian rational (real part, imaginary part)."""
    re = pairing(W_RE, W_RE) - pairing(W_IM, W_IM)
    im = 2 * pairing(W_RE, W_IM)
    return re, im


def w_pairing(v: V5Vector) -> tuple[Fraction, Fraction]:
    """(w, v) for rational v: (A - C) - i (B1 - B3) in these coordinates."""
    return pairing(W_RE, v), pairing(W_IM, v)


def w_pairing_identity_check(v: V5Vector) -> tuple[Fraction, Fraction]:
    """(|(w, v)|^2, |v|^2 - (v, v)), both exact."""
    re, im = w_pairing(v)
    return re * re + im * im, norm2(v) - pairing(v, v)


def w_k_defect(k: np.ndarray) -> float:
    """max |w k - j(k, i)^-1 w| for k in K_infinity."""
    _, j = act_H2(k, SiegelPoint.i())
    lhs = act_v5(w_vector(), tuple(map(tuple, k)), nu=1.0)
    rhs = w_vector().scale(1 / j)
    return max(abs(a - b) for a, b in zip(lhs.coords, rhs.coords))


def rstarginv(g) -> V5Vector:
    """nu(g) j(g, i)^-1 w g^-1."""
    g = as_array(g)
    nu = similitude_float(g)
    _, j = act_H2(g, SiegelPoint.i())
    ginv = np.linalg.inv(g)
    return act_v5(w_vector(), tuple(map(tuple, ginv)), nu=1 / nu).scale(nu / j)


def rstarginv_expected(Z: SiegelPoint) -> V5Vector:
    """(-1, z22, z12, -z11, -det Z) in (A, B1, B2, B3, C) coordinates."""
    z = Z.Z
    return V5Vector(-1 + 0j, z[1, 1], z[0, 1], -z[0, 0], -Z.det_Z)


def q_v_eval(v: V5Vector, Z: SiegelPoint) -> complex:
    """Q_v(Z) = -A det Z + tr((-B1, B2; B2, B3) Z) - C.

    B3 is the coefficient of e2^f1 here; against f1^e2 it enters as -B3.
    """
    z = Z.Z
    A, B1, B2, B3, C = (complex(x) for x in v.coords)
    tr = -B1 * z[0, 0] + 2 * B2 * z[0, 1] + B3 * z[1, 1]
    return -A * Z.det_Z + tr - C


def gv_pairing_check(g, v: V5Vector) -> tuple[complex, complex]:
    """(j(g, i)^-1 nu(g) (w, v g), Q_v(g(i)))."""
    g = as_array(g)
    nu = similitude_float(g)
    Z, j = act_H2(g, SiegelPoint.i())
    vg = act_v5(V5Vector(*(float(x) for x in v.coords)), tuple(map(tuple, g)), nu=nu)
    lhs = nu / j * pairing(w_vector(), vg)
    return complex(lhs), q_v_eval(v, Z)


# ---------------------------------------------------------------------------
# Gamma

def gamma_fn(z) -> complex | float:
    """Euler Gamma through scipy.special.gamma; raises at the poles."""
    zc = complex(z)
    if zc.imag == 0 and zc.real <= 0 and zc.real == math.floor(zc.real):
        raise ValueError(f"Gamma has a pole at {z}")
    if zc.imag == 0:
        return float(special.gamma(zc.real))
    return complex(special.gamma(zc))


# ---------------------------------------------------------------------------
# the contour integral  int_{Im z = y} e^{-2 pi i z} z^-r dz

def contour_closed(r: int, y: float) -> complex:
    """Value of int_R e^{-2 pi i x} (x + i y)^-r dx, which is e^{-2 pi y} (-2 pi i)^r / (r-1)!."""
    return math.exp(-2 * math.pi * y) * (-2j * math.pi) ** r / math.factorial(r - 1)


def contour_numeric(r: int, y: float, cutoff: float | None = None, limit: int = 200,
                    epsabs: float | None = None) -> complex:
    """int e^{-2 pi i x} (x + i y)^-r dx by quadrature.

    cutoff None integrates over the whole line with QUADPACK's Fourier routine
    (QAWF) on each half line; a finite cutoff integrates over [-cutoff, cutoff].
    """
    if r < 2:
        raise ValueError("need r >= 2 for absolute convergence")
    if epsabs is None:
        # the integrand peaks at y^-r
        epsabs = 1e-13 * max(1.0, y ** -r)
    om = 2 * math.pi

    def fr(x):
        return ((x + 1j * y) ** -r).real

    def fi(x):
        return ((x + 1j * y) ** -r).imag

    # e^{-i om x} (fr + i fi) = (fr cos + fi sin) + i (fi cos - fr sin)
    if cutoff is None:
        def half(sign):
            # int_0^inf e^{-i om sign x} g(x) dx with g(x) = f(sign x)
            gr = lambda x: fr(sign * x)
            gi = lambda x: fi(sign * x)
            kw = {"wvar": om, "limlst": 100, "epsabs": epsabs}
            c_r = integrate.quad(gr, 0, np.inf, weight="cos", **kw)[0]
            s_i = integrate.quad(gi, 0, np.inf, weight="sin", **kw)[0]
            c_i = integrate.quad(gi, 0, np.inf, weight="cos", **kw)[0]
            s_r = integrate.quad(gr, 0, np.inf, weight="sin", **kw)[0]
            return complex(c_r + sign * s_i, c_i - sign * s_r)

        return half(1) + half(-1)
    re = integrate.quad(lambda x: fr(x) * math.cos(om * x) + fi(x) * math.sin(om * x),
                        -cutoff, cutoff, limit=limit, epsabs=epsabs)[0]
    im = integrate.quad(lambda x: fi(x) * math.cos(om * x) - fr(x) * math.sin(om * x),
                        -cutoff, cutoff, limit=limit, epsabs=epsabs)[0]
    return complex(re, im)


def contour_integral_check(r: int, y: float, cutoff: float | None = None,
                           n_points: int = 4000) -> tuple[complex, complex]:
    """(numeric, closed) for the contour integral on Im z = y."""
    if y <= 0:
        raise ValueError("need y > 0")
    return contour_numeric(r, y, cutoff, limit=n_points), contour_closed(r, y)


# ---------------------------------------------------------------------------
# f_infinity

def f_infty_numeric(g, s: float, epsrel: float = 1e-12) -> float:
    """|nu|^{2s} int_R e^{-pi t^2 |f2 g|^2} |t|^{4s} dt/|t|."""
    if s <= 0:
        raise ValueError("need s > 0")
    g = as_array(g)
    nu = similitude_float(g)
    n2 = float(g[3] @ g[3])  # f2 is the last basis vector
    val, _ = integrate.quad(lambda t: math.exp(-math.pi * n2 * t * t) * t ** (4 * s - 1),
                            0, np.inf, epsabs=0, epsrel=epsrel, limit=200)
    return abs(nu) ** (2 * s) * 2 * val


def f_infty_closed(Z: SiegelPoint, s: float) -> float:
    """pi^{-2s} Gamma(2s) y11^{-2s} det(Y)^{2s}."""
    y = Z.Y
    return (math.pi ** (-2 * s) * gamma_fn(2 * s) * abs(y[0, 0]) ** (-2 * s)
            * abs(np.linalg.det(y)) ** (2 * s))


def f_infty_check(g, s: float) -> tuple[float, float]:
    if s <= 0:
        raise ValueError("need s > 0")
    Z, _ = act_H2(g, SiegelPoint.i())
    return f_infty_numeric(g, s), f_infty_closed(Z, s)


# ---------------------------------------------------------------------------
# the archimedean integral up to a constant

def t_factor_numeric(s: float, r: int) -> float:
    """int_0^inf t^{2s+r-2} e^{-4 pi t} dt/t."""
    a = 2 * s + r - 2
    return integrate.quad(lambda t: t ** (a - 1) * math.exp(-4 * math.pi * t), 0, np.inf,
                          epsabs=0, epsrel=1e-12, limit=200)[0]


def t_factor_closed(s: float, r: int) -> float:
    a = 2 * s + r - 2
    return (4 * math.pi) ** (-a) * gamma_fn(a)


def gauss_panels(lo: float, hi: float, panels: int, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _i_infty_grid(r: int, s: float, D: int, panels: int, scale: float) -> float:
    a = 2 * s + r - 2
    shifted = D % 4 == 1
    absd = abs(D)
    # y11 = u^2 and y12 = u w: the exponent is t + w^2 + |D| u^2 (+ u w), the Jacobian 2 u^2
    form = np.array([[1.0, 0.5 if shifted else 0.0], [0.5 if shifted else 0.0, absd]])
    lam = float(np.linalg.eigvalsh(form)[0])
    box = scale * math.sqrt(40 / (4 * math.pi * lam))
    t, wt = gauss_panels(0.0, scale * 40 / (4 * math.pi), panels)
    u, wu = gauss_panels(0.0, box, panels)
    w, ww = gauss_panels(-box, box, 2 * panels)
    ft = wt * t ** (a - 1) * np.exp(-4 * math.pi * t)
    U, Wv = u[:, None], w[None, :]
    e = Wv * Wv + absd * U * U + (U * Wv if shifted else 0.0)
    fuw = (wu[:, None] * ww[None, :]) * 2 * U * U * np.exp(-4 * math.pi * e)
    # the tensor-product rule summed over all (t, u, w) nodes
    return float(np.einsum("i,jk->", ft, fuw))


def i_infty_triple(r: int, s: float, D: int, panels: int = 24, check: bool = True) -> float:
    """int t^{2s+r-2} e^{-4 pi (t + y12^2/y11 + |D| y11 [+ y12])} dy11 dy12 dt/t over t, y11 > 0.

    The bracketed term is present when D = 1 mod 4.  After y11 = u^2 and
    y12 = u w the integrand is smooth, and the integral is a tensor-product
    composite Gauss-Legendre sum over a box outside which the integrand is
    below e^-40 of its peak.  With ``check`` the sum is recomputed with half
    the panel width and with the box doubled; both must agree to 1e-9.
    """
    if s <= 0:
        raise ValueError("need s > 0")
    val = _i_infty_grid(r, s, D, panels, 1.0)
    if check:
        finer = _i_infty_grid(r, s, D, 2 * panels, 1.0)
        wider = _i_infty_grid(r, s, D, 2 * panels, 2.0)
        for other in (finer, wider):
            if abs(other - val) > 1e-9 * abs(val):
                raise ArithmeticError(f"triple integral not converged: {val} vs {other}")
    return val


def i_infty_closed(r: int, s: float) -> float:
    """pi^{-2s} Gamma(2s) (4 pi)^{-(2s+r-2)} Gamma(2s+r-2)."""
    return math.pi ** (-2 * s) * gamma_fn(2 * s) * t_factor_closed(s, r)


def i_infty_gamma_check(r: int, s_values, D: int) -> dict:
    """Ratio of (f_infinity Gaussian moment) x (triple integral) to the Gamma closed form, per s."""
    if r < 6:
        raise ValueError("need r >= 6")
    if D >= 0:
        raise ValueError("need D < 0")
    ratios = {}
    for s in s_values:
        moment = f_infty_numeric(np.eye(4), s)  # pi^{-2s} Gamma(2s) by quadrature
        numeric = moment * i_infty_triple(r, s, D)
        ratios[s] = numeric / i_infty_closed(r, s)
    vals = list(ratios.values())
    spread = (max(vals) - min(vals)) / abs(vals[0])
    return {"ratios": ratios, "relative_spread": spread}
