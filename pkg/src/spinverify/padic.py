"""p-adic valuations, the additive character psi_p, and exact lattice-quotient sums.

Compact-open sets of Q_p^dim are handled through finite quotients
p^-N Z_p / p^M Z_p taken coordinate by coordinate.  Each representative
a/p^N (0 <= a < p^(N+M)) stands for a coset of measure p^-M, so Z_p has
measure 1.  M may be negative, in which case the cosets are coarser than Z_p.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

INF = math.inf
Number = Union[int, Fraction]


class ResolutionError(RuntimeError):
    """A lattice-quotient sum changed when the resolution was refined."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeCtx:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")


def _prime(ctx: PrimeCtx | int) -> int:
    return ctx.p if isinstance(ctx, PrimeCtx) else int(ctx)


def _ord_int(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def val_p(x: Number, ctx: PrimeCtx | int) -> float | int:
    """ord_p(x); +inf for x = 0."""
    p = _prime(ctx)
    x = Fraction(x)
    if x == 0:
        return INF
    return _ord_int(x.numerator, p) - _ord_int(x.denominator, p)


def abs_p(x: Number, ctx: PrimeCtx | int) -> Fraction:
    """Normalized absolute value |x|_p = p^-ord_p(x) (0 for x = 0)."""
    p = _prime(ctx)
    v = val_p(x, p)
    if v == INF:
        return Fraction(0)
    return Fraction(1, p ** v) if v >= 0 else Fraction(p ** (-v))


def is_integral(x: Number, ctx: PrimeCtx | int) -> bool:
    return val_p(x, ctx) >= 0


def frac_p(x: Number, ctx: PrimeCtx | int) -> Fraction:
    """p-adic fractional part: the element of Z[1/p] in [0, 1) congruent to x mod Z_p."""
    p = _prime(ctx)
    x = Fraction(x)
    den = x.denominator
    k = _ord_int(den, p)
    if k == 0:
        return Fraction(0)
    pk = p ** k
    rest = den // pk
    a = (x.numerator * pow(rest, -1, pk)) % pk
    return Fraction(a, pk)


def psi_p(x: Number, ctx: PrimeCtx | int) -> complex:
    """psi_p(x) = exp(-2 pi i frac_p(x)); trivial on Z_p."""
    f = frac_p(x, ctx)
    if f == 0:
        return 1 + 0j
    return cmath.exp(-2j * math.pi * f.numerator / f.denominator)


def psi_inf(x: float) -> complex:
    return cmath.exp(2j * math.pi * x)


def reduce_mod(x: Number, k: int, ctx: PrimeCtx | int) -> Fraction:
    """Canonical representative of x modulo p^k Z_p, of the form a/p^n with 0 <= a < p^(n+k)."""
    p = _prime(ctx)
    x = Fraction(x)
    v = val_p(x, p)
    if v >= k:
        return Fraction(0)
    n = max(0, -v)
    modulus = p ** (n + k) if n + k >= 0 else 1
    den = x.denominator // p ** _ord_int(x.denominator, p)
    scaled = x * p ** n * den
    assert scaled.denominator == 1
    a = (scaled.numerator * pow(den, -1, modulus)) % modulus if modulus > 1 else 0
    return Fraction(a, p ** n)


@dataclass(frozen=True)
class LatticeQuotient:
    """Representatives of prod_i p^-N_i Z_p / p^M_i Z_p.

    ``lower`` and ``upper`` are the exponents N and M, given either as a single
    integer shared by every coordinate or as one integer per coordinate.
    """

    dim: int
    lower: int | tuple[int, ...]
    upper: int | tuple[int, ...]

    def exponents(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        n = self.lower if isinstance(self.lower, tuple) else (self.lower,) * self.dim
        m = self.upper if isinstance(self.upper, tuple) else (self.upper,) * self.dim
        if len(n) != self.dim or len(m) != self.dim:
            raise ValueError("exponent tuples must have length dim")
        for ni, mi in zip(n, m):
            if ni + mi < 0:
                raise ValueError("need N + M >= 0 in every coordinate")
        return tuple(n), tuple(m)

    def count(self, p: int) -> int:
        n, m = self.exponents()
        return p ** sum(a + b for a, b in zip(n, m))

    def cell_measure(self, p: int) -> Fraction:
        _, m = self.exponents()
        s = sum(m)
        return Fraction(1, p ** s) if s >= 0 else Fraction(p ** (-s))

    def axis(self, i: int, p: int) -> list[Fraction]:
        n, m = self.exponents()
        return [Fraction(a, p ** n[i]) for a in range(p ** (n[i] + m[i]))]

    def representatives(self, p: int) -> Iterator[tuple[Fraction, ...]]:
        return itertools.product(*(self.axis(i, p) for i in range(self.dim)))

    def refined(self, step: int = 1) -> "LatticeQuotient":
        _, m = self.exponents()
        n, _ = self.exponents()
        return LatticeQuotient(self.dim, n, tuple(x + step for x in m))


def measure(pred: Callable[..., bool], lq: LatticeQuotient, ctx: PrimeCtx | int) -> Fraction:
    """Haar measure of the set cut out by ``pred`` (assumed a union of lattice cosets)."""
    p = _prime(ctx)
    hits = sum(1 for rep in lq.representatives(p) if pred(*rep))
    return hits * lq.cell_measure(p)


def char_sum(f: Callable[..., complex], lq: LatticeQuotient, ctx: PrimeCtx | int) -> complex:
    """Sum of f over the representatives, weighted by the cell measure."""
    p = _prime(ctx)
    re, im = [], []
    for rep in lq.representatives(p):
        val = f(*rep)
        if val:
            re.append(val.real)
            im.append(val.imag)
    w = float(lq.cell_measure(p))
    return complex(math.fsum(re) * w, math.fsum(im) * w)


def stable(compute: Callable[[LatticeQuotient], object], lq: LatticeQuotient,
           same: Callable[[object, object], bool] | None = None):
    """Evaluate ``compute`` at lq and at lq refined by one level; they must agree."""
    a = compute(lq)
    b = compute(lq.refined())
    ok = same(a, b) if same is not None else a == b
    if not ok:
        raise ResolutionError(f"value changed under refinement: {a!r} -> {b!r}")
    return a


def close_complex(tol: float = 1e-12) -> Callable[[complex, complex], bool]:
    return lambda a, b: abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def stable_measure(pred, lq: LatticeQuotient, ctx) -> Fraction:
    return stable(lambda q: measure(pred, q, ctx), lq)


def stable_char_sum(f, lq: LatticeQuotient, ctx, tol: float = 1e-12) -> complex:
    return stable(lambda q: char_sum(f, q, ctx), lq, close_complex(tol))


def count_sqrt_cong(D: int, alpha: int, variant: str, ctx: PrimeCtx | int) -> int:
    """Residues b mod p^alpha with b^2 = D (plain) or b^2 - b = (D-1)/4 (shifted)."""
    return len(sqrt_cong_solutions(D, alpha, variant, ctx))


def sqrt_cong_solutions(D: int, alpha: int, variant: str, ctx: PrimeCtx | int) -> list[int]:
    p = _prime(ctx)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if variant == "plain":
        target = D
        poly = lambda b: b * b
    elif variant == "shifted":
        if D % 4 != 1:
            raise ValueError("shifted variant needs D = 1 mod 4")
        target = (D - 1) // 4
        poly = lambda b: b * b - b
    elif variant == "shifted_plus":
        if D % 4 != 1:
            raise ValueError("shifted variant needs D = 1 mod 4")
        target = (D - 1) // 4
        poly = lambda b: b * b + b
    else:
        raise ValueError(f"unknown variant {variant!r}")
    mod = p ** alpha
    return [b for b in range(mod) if (poly(b) - target) % mod == 0]


def kahan_sum(values: Sequence[complex]) -> complex:
    """Correctly rounded sum of complex values (real and imaginary parts separately)."""
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))
