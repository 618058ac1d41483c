"""The lattice sum P_D(Z) = sum over the shell q(v) = -|D| of Q_v(Z)^-r.

Two shell conventions are supported.  ``generic`` uses integral coordinates
and q(v) = -|D|.  ``scaled`` allows B2 in (1/2)Z (the D = 1 mod 4 lattice) and
uses q(v) = -|D|/4, matching q(v_D) = D/4 on that branch; it is the default
when D = 1 mod 4.

Tail bound.  Write Z = X + iY and g = n(X) diag(Y^1/2, Y^-1/2), so g(i) = Z,
nu(g) = 1 and j(g, i) = det(Y)^-1/2.  The identity Q_v(g(i)) =
j(g,i)^-1 (w, v g) and |(w, u)|^2 = |u|^2 - (u, u) give

    |Q_v(Z)|^2 = det(Y) (|v g|^2 + 2|D'|) >= det(Y) sigma^2 |v|^2,

where q(v) = -|D'| and sigma is the least singular value of v -> v g in
orthonormal coordinates (A, B1, sqrt2 B2, B3, C).  Dropping the shell
condition, the tail over |v| > R is at most det(Y)^-r/2 sigma^-r times the
lattice sum of |v|^-r over |v| > R.  Giving each lattice point its cell
(diameter d, volume c) bounds that sum by

    (1/c) S_4 int_{R-2d}^inf (t + d)^4 t^-r dt,   S_4 = 8 pi^2 / 3,

which expands binomially into a closed form for r >= 6 and R > 2d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arch import SiegelPoint, act_H2, as_array, q_v_eval
from .gsp4 import V5Vector, act_v5, q

SQRT2 = math.sqrt(2.0)


def default_convention(D: int) -> str:
    return "scaled" if D % 4 == 1 else "generic"


def _target(D: int, convention: str) -> Fraction:
    if convention == "generic":
        return Fraction(-abs(D))
    if convention == "scaled":
        return Fraction(-abs(D), 4)
    raise ValueError(f"unknown convention {convention!r}")


def lattice_geometry(convention: str) -> tuple[float, float]:
    """(cell diameter, cell volume) in orthonormal coordinates."""
    if convention == "generic":
        return math.sqrt(6.0), SQRT2
    return math.sqrt(4.5), SQRT2 / 2


@dataclass
class LatticeShell:
    D: int
    radius: float
    convention: str
    coords: np.ndarray = field(repr=False)  # (n, 5) floats; B2 may be a half-integer

    def __len__(self) -> int:
        return len(self.coords)

    @property
    def vectors(self) -> list[V5Vector]:
        return [V5Vector.of(*(Fraction(x).limit_denominator(2) for x in row)) for row in self.coords]

    def key_set(self) -> set[tuple]:
        """Rows as exact tuples (B2 doubled so that every entry is an integer)."""
        c = self.coords.copy()
        c[:, 2] *= 2
        return {tuple(int(round(x)) for x in row) for row in c}


def enumerate_shell(D: int, radius: float, convention: str | None = None) -> LatticeShell:
    """All lattice vectors with q(v) = target and |v| <= radius.

    The box over (A, B1, B2, B3) comes from |v|^2 = A^2 + B1^2 + 2 B2^2 + B3^2 + C^2.
    For A != 0, C is solved from q; for A = 0 the equation does not involve C,
    which then runs over its range.  Arithmetic is on integers with B2 doubled.
    """
    if D >= 0:
        raise ValueError("D must be negative")
    if radius <= 0:
        raise ValueError("radius must be positive")
    convention = convention or default_convention(D)
    t = _target(D, convention)
    t4 = int(4 * t)  # 4 q = 4AC + b^2 + 4 B1 B3 with b = 2 B2
    r2 = radius * radius
    m = int(math.floor(radius))
    step = 1 if convention == "scaled" else 2
    bmax = int(math.floor(radius * SQRT2))  # |b| <= sqrt(2) R since b^2/2 <= R^2
    if step == 2:
        bmax -= bmax % 2
    rng = np.arange(-m, m + 1, dtype=np.int64)
    brng = np.arange(-bmax, bmax + 1, step, dtype=np.int64)
    A, B1, b, B3 = np.meshgrid(rng, rng, brng, rng, indexing="ij")
    A, B1, b, B3 = A.ravel(), B1.ravel(), b.ravel(), B3.ravel()
    partial = A * A + B1 * B1 + B3 * B3 + b * b / 2.0
    keep = partial <= r2 + 1e-9
    A, B1, b, B3, partial = A[keep], B1[keep], b[keep], B3[keep], partial[keep]
    rest = t4 - b * b - 4 * B1 * B3  # must equal 4 A C
    rows = []
    nz = A != 0
    num, den = rest[nz], 4 * A[nz]
    ok = num % den == 0
    C = num[ok] // den[ok]
    sel = partial[nz][ok] + C * C <= r2 + 1e-9
    rows.append(np.stack([A[nz][ok][sel], B1[nz][ok][sel], b[nz][ok][sel], B3[nz][ok][sel], C[sel]], axis=1))
    z = (~nz) & (rest == 0)
    for Cv in range(-m, m + 1):
        sel = partial[z] + Cv * Cv <= r2 + 1e-9
        n = int(sel.sum())
        if n:
            rows.append(np.stack([A[z][sel], B1[z][sel], b[z][sel], B3[z][sel],
                                  np.full(n, Cv, dtype=np.int64)], axis=1))
    ints = np.concatenate(rows) if rows else np.zeros((0, 5), dtype=np.int64)
    ints = ints[np.lexsort(ints.T[::-1])]
    coords = ints.astype(float)
    coords[:, 2] /= 2
    return LatticeShell(D, radius, convention, coords)


def q_v_array(coords: np.ndarray, Z: SiegelPoint) -> np.ndarray:
    """Q_v(Z) for every row (A, B1, B2, B3, C)."""
    z = Z.Z
    A, B1, B2, B3, C = coords.T
    return -A * Z.det_Z - B1 * z[0, 0] + 2 * B2 * z[0, 1] + B3 * z[1, 1] - C


def _csum(x: np.ndarray) -> complex:
    return complex(math.fsum(x.real), math.fsum(x.imag))


def _radial_integral(R: float, d: float, r: int) -> float:
    """int_{R-2d}^inf (t + d)^4 t^-r dt in closed form."""
    a = R - 2 * d
    if a <= 0:
        return math.inf
    return sum(math.comb(4, k) * d ** (4 - k) * a ** (k - r + 1) / (r - k - 1) for k in range(5))


def sigma_min(Z: SiegelPoint) -> float:
    """Least singular value of the V5 action of g = n(X) diag(Y^1/2, Y^-1/2)."""
    g = uniformizing_element(Z)
    basis = np.eye(5)
    scale = np.array([1, 1, SQRT2, 1, 1])
    cols = []
    for e in basis:
        v = V5Vector(*(e / scale))  # unit vector in orthonormal coordinates
        img = act_v5(v, tuple(map(tuple, g)), nu=1.0)
        cols.append(np.array([complex(x).real for x in img.coords]) * scale)
    m = np.array(cols)
    return float(np.linalg.svd(m, compute_uv=False).min())


def uniformizing_element(Z: SiegelPoint) -> np.ndarray:
    """g = n(X) diag(Y^1/2, Y^-1/2) with g(i 1_2) = Z."""
    w, u = np.linalg.eigh(Z.Y)
    half = u @ np.diag(np.sqrt(w)) @ u.T
    ihalf = np.linalg.inv(half)
    levi = np.block([[half, np.zeros((2, 2))], [np.zeros((2, 2)), ihalf]])
    n = np.block([[np.eye(2), Z.X], [np.zeros((2, 2)), np.eye(2)]])
    return n @ levi


def tail_bound(D: int, r: int, Z: SiegelPoint, radius: float, convention: str | None = None) -> float:
    """Upper bound for sum over the shell with |v| > radius of |Q_v(Z)|^-r."""
    if r < 6:
        raise ValueError("need r >= 6")
    convention = convention or default_convention(D)
    d, vol = lattice_geometry(convention)
    detY = float(np.linalg.det(Z.Y))
    sig = sigma_min(Z)
    lattice = (8 * math.pi ** 2 / 3) / vol * _radial_integral(radius, d, r)
    return detY ** (-r / 2) * sig ** (-r) * lattice


def suggest_radius(D: int, r: int, Z: SiegelPoint, tol: float, convention: str | None = None) -> float:
    R = 1.0
    while tail_bound(D, r, Z, R, convention) > tol:
        R *= 1.25
        if R > 1e4:
            break
    return R


def pd_terms(shell: LatticeShell, r: int, Z: SiegelPoint) -> np.ndarray:
    return q_v_array(shell.coords, Z) ** (-r)


def pd_eval(D: int, r: int, Z: SiegelPoint, radius: float, convention: str | None = None,
            tail_tol: float | None = None, shell: LatticeShell | None = None) -> tuple[complex, float]:
    """(partial sum over the shell of radius ``radius``, tail bound)."""
    if r < 6:
        raise ValueError("need r >= 6 for convergence")
    convention = convention or default_convention(D)
    tb = tail_bound(D, r, Z, radius, convention)
    if tail_tol is not None and tb > tail_tol:
        raise ValueError(f"tail bound {tb:.3g} exceeds {tail_tol:.3g}; "
                         f"try radius {suggest_radius(D, r, Z, tail_tol, convention):.3g}")
    if shell is None:
        shell = enumerate_shell(D, radius, convention)
    return _csum(pd_terms(shell, r, Z)), tb


def modularity_check(D: int, r: int, Z: SiegelPoint, gamma, radius: float,
                     convention: str | None = None) -> dict:
    """Compare P_D(gamma Z) j(gamma, Z)^-r with P_D(Z), both truncated at the same radius.

    ``allowed`` is the absolute discrepancy the two tail bounds permit.
    """
    convention = convention or default_convention(D)
    g = as_array(gamma)
    gz, j = act_H2(g, Z)
    shell = enumerate_shell(D, radius, convention)
    p0, t0 = pd_eval(D, r, Z, radius, convention, shell=shell)
    p1, t1 = pd_eval(D, r, gz, radius, convention, shell=shell)
    lhs = p1 * j ** (-r)
    defect = abs(lhs - p0)
    allowed = t0 + abs(j) ** (-r) * t1
    return {
        "value": p0,
        "transformed": lhs,
        "abs_defect": defect,
        "rel_defect": defect / abs(p0) if p0 != 0 else math.inf,
        "allowed": allowed,
        "tail_bound": t0,
        "shell_size": len(shell),
    }


def shell_transport_check(shell: LatticeShell, gamma) -> dict:
    """Vectors of the truncated shell whose image under gamma leaves it lie in the outer annulus.

    For gamma in Sp4(Z) the V5 action permutes the full shell, so a vector v
    with |v| < radius / |gamma|_op has |v gamma| < radius and its image must
    be in the truncated shell again.
    """
    g = as_array(gamma)
    scale = np.array([1, 1, SQRT2, 1, 1])
    # operator norm of the V5 action in orthonormal coordinates
    cols = []
    for e in np.eye(5):
        img = act_v5(V5Vector(*(e / scale)), tuple(map(tuple, g)), nu=1.0)
        cols.append(np.array([float(complex(x).real) for x in img.coords]) * scale)
    op = float(np.linalg.svd(np.array(cols), compute_uv=False).max())
    keys = shell.key_set()
    inner = shell.radius / op
    escaped = []
    for row in shell.coords:
        img = act_v5(V5Vector(*row), tuple(map(tuple, g)), nu=1.0)
        k = (int(round(img.A)), int(round(img.B1)), int(round(2 * img.B2)), int(round(img.B3)), int(round(img.C)))
        if k not in keys:
            escaped.append(float(np.sqrt(np.sum((row * scale) ** 2))))
    ok = all(n >= inner - 1e-9 for n in escaped)
    return {"ok": ok, "escaped": len(escaped), "min_escaped_norm": min(escaped) if escaped else None,
            "annulus_inner": inner, "op_norm": op}


def q_of(row) -> Fraction:
    return q(V5Vector.of(*(Fraction(x).limit_denominator(2) for x in row)))
