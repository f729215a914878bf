"""Truncated fractional power series.

A FracSeries with fractional order alpha and truncation K represents

    sum_{k=0..K} coeffs[k](x) * t^(k*alpha) / Gamma(1 + k*alpha).

Storing the Gamma-normalized coefficients makes the Caputo derivative of
order n*alpha a pure index shift: term k maps to term k-n with the same
coefficient (the derivative of t^(k*alpha) contributes exactly the Gamma
ratio that the normalization absorbs, and terms below the derivative order
vanish the way derivatives of constants do).

Multiplication re-normalizes the plain Cauchy product, so coefficient k of
a product picks up the exact weight Gamma(1+k*a) / (Gamma(1+i*a) *
Gamma(1+j*a)) on each pair i+j = k; the weights stay symbolic through the
Scalar layer (and collapse to binomial coefficients at alpha = 1).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .errors import AlphaMismatch, FracError
from .expr import Expr
from .scalar import Scalar

_weight_cache: dict[tuple[Fraction, int, int], Scalar] = {}


def gamma_factor(alpha: Fraction, k: int) -> Scalar:
    """Gamma(1 + k*alpha) as an exact Scalar."""
    return Scalar.gamma(1 + k * alpha)


def _mul_weight(alpha: Fraction, i: int, j: int) -> Scalar:
    key = (alpha, i, j) if i <= j else (alpha, j, i)
    w = _weight_cache.get(key)
    if w is None:
        w = gamma_factor(alpha, i + j) / (gamma_factor(alpha, i) * gamma_factor(alpha, j))
        _weight_cache[key] = w
    return w


class FracSeries:
    """Immutable truncated series on the t^(k*alpha) grid."""

    __slots__ = ("alpha", "trunc", "coeffs")

    def __init__(self, alpha, trunc: int, coeffs):
        alpha = Fraction(alpha)
        if trunc < 0:
            raise FracError("truncation order must be >= 0")
        items: dict[int, Expr] = {}
        if isinstance(coeffs, Mapping):
            pairs: Iterable = coeffs.items()
        else:
            pairs = enumerate(coeffs)
        for k, e in pairs:
            e = Expr._coerce(e)
            if k < 0:
                raise FracError("series indices must be >= 0")
            if k <= trunc and not e.is_zero():
                items[k] = e
        self.alpha = alpha
        self.trunc = trunc
        self.coeffs = tuple(sorted(items.items()))

    # -- access ---------------------------------------------------------------

    def coeff(self, k: int) -> Expr:
        for i, e in self.coeffs:
            if i == k:
                return e
        return Expr.zero()

    def coeff_list(self) -> list[Expr]:
        """Dense coefficients 0..trunc."""
        out = [Expr.zero()] * (self.trunc + 1)
        for k, e in self.coeffs:
            out[k] = e
        return out

    def value_at_zero(self) -> Expr:
        return self.coeff(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    @classmethod
    def zero(cls, alpha, trunc: int = 0) -> "FracSeries":
        return cls(alpha, trunc, {})

    @classmethod
    def unit(cls, alpha, trunc: int = 0) -> "FracSeries":
        return cls(alpha, trunc, {0: Expr.one()})

    def _check_alpha(self, other: "FracSeries") -> None:
        if self.alpha != other.alpha:
            raise AlphaMismatch(
                f"series orders differ: {self.alpha} vs {other.alpha}"
            )

    # -- ring operations ----------------------------------------------------------

    def add(self, other: "FracSeries") -> "FracSeries":
        self._check_alpha(other)
        out = dict(self.coeffs)
        for k, e in other.coeffs:
            out[k] = out.get(k, Expr.zero()) + e
        return FracSeries(self.alpha, max(self.trunc, other.trunc), out)

    def sub(self, other: "FracSeries") -> "FracSeries":
        return self.add(other.neg())

    def neg(self) -> "FracSeries":
        return FracSeries(self.alpha, self.trunc, {k: -e for k, e in self.coeffs})

    def mul(self, other: "FracSeries", kmax: int) -> "FracSeries":
        self._check_alpha(other)
        out: dict[int, Expr] = {}
        for i, a in self.coeffs:
            if i > kmax:
                continue
            for j, b in other.coeffs:
                k = i + j
                if k > kmax:
                    continue
                term = (a * b).scalar_mul(_mul_weight(self.alpha, i, j))
                out[k] = out.get(k, Expr.zero()) + term
        return FracSeries(self.alpha, kmax, out)

    def pow(self, p: int, kmax: int) -> "FracSeries":
        if p < 1:
            raise FracError(f"series power must be >= 1, got {p}")
        acc = self.truncate(kmax)
        for _ in range(p - 1):
            acc = acc.mul(self, kmax)
        return acc

    def scalar_mul(self, s) -> "FracSeries":
        return FracSeries(
            self.alpha, self.trunc, {k: e.scalar_mul(s) for k, e in self.coeffs}
        )

    def expr_mul(self, e: Expr) -> "FracSeries":
        """Coefficientwise multiplication by a function of x only."""
        return FracSeries(self.alpha, self.trunc, {k: c * e for k, c in self.coeffs})

    # -- calculus on the grid ---------------------------------------------------------

    def dx(self, n: int = 1) -> "FracSeries":
        """Coefficientwise x-derivative."""
        return FracSeries(self.alpha, self.trunc, {k: e.diff_x(n) for k, e in self.coeffs})

    def scale_args(self, xscale, tscale) -> "FracSeries":
        """Proportional-delay substitution (x, t) -> (a*x, b*t).

        Coefficient k picks up the exact factor b^(k*alpha); requires
        rational alpha, which the series carries by construction.
        """
        a = Fraction(xscale)
        b = Fraction(tscale)
        if a <= 0 or b <= 0:
            raise FracError("argument scales must be positive rationals")
        out = {}
        for k, e in self.coeffs:
            out[k] = e.scale_x(a).scalar_mul(Scalar.rational_power(b, k * self.alpha))
        return FracSeries(self.alpha, self.trunc, out)

    def caputo_shift(self, n: int) -> "FracSeries":
        """Caputo derivative of order n*alpha: index shift by n.

        Constants (index < n) are annihilated; coefficient k lands at
        index k - n unchanged thanks to the Gamma normalization.
        """
        if n < 0:
            raise FracError("Caputo shift order must be >= 0")
        out = {k - n: e for k, e in self.coeffs if k >= n}
        return FracSeries(self.alpha, max(self.trunc - n, 0), out)

    def truncate(self, kmax: int) -> "FracSeries":
        return FracSeries(self.alpha, kmax, {k: e for k, e in self.coeffs if k <= kmax})

    # -- identity -----------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FracSeries):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.alpha, self.trunc, self.coeffs))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {e.to_source()}" for k, e in self.coeffs)
        return f"FracSeries(alpha={self.alpha}, trunc={self.trunc}, {{{inner}}})"


# -- functional aliases ------------------------------------------------------------
# The arithmetic lives on the class; these names exist so call sites that read
# as operations on series (rather than methods of one operand) stay legible.

def series_add(a: FracSeries, b: FracSeries) -> FracSeries:
    return a.add(b)


def series_sub(a: FracSeries, b: FracSeries) -> FracSeries:
    return a.sub(b)


def series_mul(a: FracSeries, b: FracSeries, kmax: int) -> FracSeries:
    return a.mul(b, kmax)


def series_pow(a: FracSeries, p: int, kmax: int) -> FracSeries:
    return a.pow(p, kmax)


def series_dx(a: FracSeries, n: int = 1) -> FracSeries:
    return a.dx(n)


def series_scale_args(a: FracSeries, xscale, tscale) -> FracSeries:
    return a.scale_args(xscale, tscale)


def caputo_shift(a: FracSeries, n: int) -> FracSeries:
    return a.caputo_shift(n)


def value_at_zero(a: FracSeries) -> Expr:
    return a.value_at_zero()
