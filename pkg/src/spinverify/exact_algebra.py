"""Exact rationals, Laurent polynomials in the Satake variables, truncated series in Q.

Rationals are ``fractions.Fraction``.  A ``LaurentPoly`` is a sparse map from
exponent triples (e_A, e_B, e_W) to nonzero rational coefficients, standing for
X_A^e_A X_B^e_B W^e_W.  The remaining Satake values are X_C = W/X_B and
X_D = W/X_A.  A ``TruncatedSeries`` holds the coefficients of Q^0 .. Q^K.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

Rat = Fraction
Exponent = tuple[int, int, int]
Scalar = Union[int, Fraction]


class AlgebraError(ValueError):
    """Raised for invalid algebraic operations (zero inversion, order mismatch, ...)."""


def rat(x: Scalar | str, den: int = 1) -> Fraction:
    return Fraction(x) / den


def rat_inv(a: Scalar) -> Fraction:
    a = Fraction(a)
    if a == 0:
        raise AlgebraError("inversion of zero")
    return 1 / a


def rat_str(a: Fraction) -> str:
    a = Fraction(a)
    return f"{a.numerator}/{a.denominator}"


class LaurentPoly:
    """Immutable Laurent polynomial in X_A, X_B, W over the rationals."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Exponent, Scalar] | None = None):
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for e, c in terms.items():
                c = Fraction(c)
                if c != 0:
                    clean[(int(e[0]), int(e[1]), int(e[2]))] = c
        self._terms = clean
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c: Scalar) -> "LaurentPoly":
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, e_a: int = 0, e_b: int = 0, e_w: int = 0, coeff: Scalar = 1) -> "LaurentPoly":
        return cls({(e_a, e_b, e_w): coeff})

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    # arithmetic
    @staticmethod
    def _coerce(other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exponent, Fraction] = {}
        for (a1, b1, w1), c1 in self._terms.items():
            for (a2, b2, w2), c2 in other._terms.items():
                e = (a1 + a2, b1 + b2, w1 + w2)
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            if not self.is_monomial():
                raise AlgebraError("negative power of a non-monomial")
            (e, c), = self._terms.items()
            return LaurentPoly({(e[0] * k, e[1] * k, e[2] * k): Fraction(c) ** k})
        out = LaurentPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def evaluate(self, x_a, x_b, w):
        """Substitute values (exact rationals or complex) for X_A, X_B, W."""
        # ints would turn negative powers into floats
        x_a, x_b, w = (Fraction(v) if isinstance(v, int) else v for v in (x_a, x_b, w))
        total = 0
        for (ea, eb, ew), c in self.items():
            total += c * (x_a ** ea) * (x_b ** eb) * (w ** ew)
        return total

    def to_dict(self) -> dict[str, str]:
        return {f"{ea},{eb},{ew}": rat_str(c) for (ea, eb, ew), c in self.items()}

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for (ea, eb, ew), c in self.items():
            mon = "*".join(
                f"{name}^{k}" if k != 1 else name
                for name, k in (("XA", ea), ("XB", eb), ("W", ew))
                if k
            )
            parts.append(f"{c}*{mon}" if mon else f"{c}")
        return " + ".join(parts)


ONE = LaurentPoly.const(1)
ZERO = LaurentPoly()
X_A = LaurentPoly.monomial(1, 0, 0)
X_B = LaurentPoly.monomial(0, 1, 0)
W = LaurentPoly.monomial(0, 0, 1)
X_C = LaurentPoly.monomial(0, -1, 1)
X_D = LaurentPoly.monomial(-1, 0, 1)


def laurent_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a * b


def torus_monomial(u: Iterable[int]) -> LaurentPoly:
    """alpha(t) for t = diag(p^u1, p^u2, p^u3, p^u4) in the basis (e1, e2, f2, f1).

    Writing t = t_A^a t_B^b t_C^c t_D^d gives a+b=u1, a+c=u2, b+d=u3, c+d=u4;
    the solution with d = 0 yields X_A^(u2-u4) X_B^(u1-u2) W^u4.
    """
    u1, u2, u3, u4 = u
    if u1 + u4 != u2 + u3:
        raise AlgebraError(f"exponents {tuple(u)} violate u1+u4 = u2+u3")
    return LaurentPoly.monomial(u2 - u4, u1 - u2, u4)


def factor_monomial(a: int, b: int, c: int, d: int) -> LaurentPoly:
    """X_A^a X_B^b X_C^c X_D^d = X_A^(a-d) X_B^(b-c) W^(c+d)."""
    return LaurentPoly.monomial(a - d, b - c, c + d)


class TruncatedSeries:
    """Power series in Q with LaurentPoly coefficients, truncated after Q^K."""

    __slots__ = ("order", "coeffs")

    def __init__(self, coeffs: Iterable[LaurentPoly | Scalar], order: int | None = None):
        cs = [c if isinstance(c, LaurentPoly) else LaurentPoly.const(c) for c in coeffs]
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise AlgebraError("series order must be non-negative")
        cs = cs[: order + 1] + [ZERO] * (order + 1 - len(cs))
        self.order = order
        self.coeffs = tuple(cs)

    @classmethod
    def one(cls, order: int) -> "TruncatedSeries":
        return cls([ONE], order)

    def _check(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise AlgebraError("expected a TruncatedSeries")
        if other.order != self.order:
            raise AlgebraError(f"order mismatch: {self.order} vs {other.order}")

    def __add__(self, other):
        self._check(other)
        return TruncatedSeries([a + b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    def __sub__(self, other):
        self._check(other)
        return TruncatedSeries([a - b for a, b in zip(self.coeffs, other.coeffs)], self.order)

    def __mul__(self, other):
        if isinstance(other, (LaurentPoly, int, Fraction)):
            return TruncatedSeries([c * other for c in self.coeffs], self.order)
        self._check(other)
        out = [ZERO] * (self.order + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j in range(self.order + 1 - i):
                b = other.coeffs[j]
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return TruncatedSeries(out, self.order)

    __rmul__ = __mul__

    def __eq__(self, other):
        return series_equal(self, other)

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def first_difference(self, other: "TruncatedSeries") -> tuple[int, LaurentPoly] | None:
        """Lowest Q-degree where the two series differ, with the coefficient difference."""
        self._check(other)
        for k, (a, b) in enumerate(zip(self.coeffs, other.coeffs)):
            if a != b:
                return k, a - b
        return None

    def evaluate(self, x_a, x_b, w) -> "TruncatedSeries":
        return TruncatedSeries(
            [LaurentPoly.const(c.evaluate(x_a, x_b, w)) for c in self.coeffs], self.order
        )

    def to_dict(self) -> dict[str, dict[str, str]]:
        return {str(k): c.to_dict() for k, c in enumerate(self.coeffs) if not c.is_zero()}

    def __repr__(self):
        return " + ".join(f"({c})Q^{k}" for k, c in enumerate(self.coeffs) if not c.is_zero()) or "0"


def series_from_poly(poly_coeffs: Mapping[int, LaurentPoly | Scalar], order: int) -> TruncatedSeries:
    cs = [ZERO] * (order + 1)
    for k, c in poly_coeffs.items():
        if k <= order:
            cs[k] = c if isinstance(c, LaurentPoly) else LaurentPoly.const(c)
    return TruncatedSeries(cs, order)


def series_geo_inverse(m: LaurentPoly, order: int) -> TruncatedSeries:
    """(1 - mQ)^-1 truncated at Q^order, for a monomial m."""
    if not isinstance(m, LaurentPoly) or not m.is_monomial():
        raise AlgebraError("series_geo_inverse needs a single nonzero monomial")
    cs = [ONE]
    for _ in range(order):
        cs.append(cs[-1] * m)
    return TruncatedSeries(cs, order)


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def series_equal(a: TruncatedSeries, b: TruncatedSeries) -> bool:
    if not isinstance(b, TruncatedSeries):
        return False
    a._check(b)
    return a.coeffs == b.coeffs
