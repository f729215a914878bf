"""Exact symbolic constants.

A Scalar is a quotient num/den of two finite sums of monomials. A monomial
is a rational coefficient times a product of atoms raised to rational
exponents. Three atom kinds exist:

* named parameters (``nu``, ``omega``, ...), assumed positive wherever a
  fractional exponent touches them;
* gamma-function values at fixed positive rational arguments, kept opaque
  except that integer arguments up to 20 resolve to factorials on
  construction;
* prime bases carrying the fractional part of a rational-base power, so
  2^(-1/2) normalizes to the monomial (1/2) * 2^(1/2).

The representation is canonical: coefficients in lowest terms, zero terms
absent, monomials sorted, prime-atom exponents in (0, 1), denominators
normalized to leading coefficient one with common monomial content
cancelled. The zero Scalar is the unique empty numerator. Equal values
either share one representation or are caught by numeric probing at the
expression layer; sums are not factored, so quotients reduce only up to
monomial content.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import EvalError, ScalarError
from .gammafn import gamma_real

# An atom is a small tuple so that atoms order naturally by kind then value:
#   ('g', Fraction arg)   gamma(arg)
#   ('p', str name)       named parameter
#   ('r', int prime)      prime base with fractional exponent
Atom = tuple
# A signature is a sorted tuple of (atom, exponent) pairs with exponents != 0.
Sig = tuple

_ZERO = Fraction(0)
_ONE = Fraction(1)

_GAMMA_RESOLVE_LIMIT = 20
_FACTOR_LIMIT = 10**9

ScalarLike = Union["Scalar", int, Fraction]


def _factorize(n: int) -> dict[int, int]:
    """Prime factorization of a positive integer by trial division."""
    if n <= 0:
        raise ScalarError(f"cannot factor non-positive integer {n}")
    if n > _FACTOR_LIMIT:
        raise ScalarError(f"rational base {n} too large to factor")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 2 if p % 6 == 5 else 4  # step over multiples of 2 and 3
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _normalize_exponents(exps: dict[Atom, Fraction]) -> tuple[Sig, Fraction]:
    """Drop zero exponents, pull integer parts of prime-atom powers into a
    rational multiplier, and return a sorted signature."""
    mult = _ONE
    items = []
    for atom, e in exps.items():
        if not e:
            continue
        if atom[0] == "r":
            whole = e.numerator // e.denominator
            frac = e - whole
            if whole:
                mult *= Fraction(atom[1]) ** whole
            if frac:
                items.append((atom, frac))
        else:
            items.append((atom, e))
    items.sort()
    return tuple(items), mult


def _mono_mul(sig_a: Sig, ca: Fraction, sig_b: Sig, cb: Fraction) -> tuple[Sig, Fraction]:
    exps: dict[Atom, Fraction] = dict(sig_a)
    for atom, e in sig_b:
        exps[atom] = exps.get(atom, _ZERO) + e
    sig, mult = _normalize_exponents(exps)
    return sig, ca * cb * mult


def _mono_inv(sig: Sig, c: Fraction) -> tuple[Sig, Fraction]:
    exps = {atom: -e for atom, e in sig}
    new_sig, mult = _normalize_exponents(exps)
    return new_sig, mult / c


def _mono_pow(sig: Sig, c: Fraction, e: Fraction) -> tuple[Sig, Fraction]:
    exps = {atom: ae * e for atom, ae in sig}
    sig2, mult = _normalize_exponents(exps)
    csig, cval = _rational_power(c, e)
    sig3, mult2 = _mono_mul(sig2, mult, csig, cval)
    return sig3, mult2


def _rational_power(q: Fraction, e: Fraction) -> tuple[Sig, Fraction]:
    """q**e as a monomial; q must be nonzero, and positive unless e is integral."""
    if q == 0:
        raise ScalarError("zero base in rational power")
    if e.denominator == 1:
        return (), q ** int(e)
    if q < 0:
        raise ScalarError(f"fractional power of negative rational {q}")
    exps: dict[Atom, Fraction] = {}
    for base, sign in ((q.numerator, 1), (q.denominator, -1)):
        for p, mult in _factorize(base).items():
            atom = ("r", p)
            exps[atom] = exps.get(atom, _ZERO) + sign * mult * e
    return _normalize_exponents(exps)


# Sum helpers work on {sig: coeff} dicts and tolerate tuple inputs.

def _as_dict(s) -> dict[Sig, Fraction]:
    return dict(s) if not isinstance(s, dict) else dict(s)


def _sum_add(a, b) -> dict[Sig, Fraction]:
    out = _as_dict(a)
    for sig, c in _as_dict(b).items():
        nc = out.get(sig, _ZERO) + c
        if nc:
            out[sig] = nc
        else:
            out.pop(sig, None)
    return out


def _sum_mul(a, b) -> dict[Sig, Fraction]:
    out: dict[Sig, Fraction] = {}
    bd = _as_dict(b).items()
    for sig_a, ca in _as_dict(a).items():
        for sig_b, cb in bd:
            sig, c = _mono_mul(sig_a, ca, sig_b, cb)
            nc = out.get(sig, _ZERO) + c
            if nc:
                out[sig] = nc
            else:
                out.pop(sig, None)
    return out


def _sum_scale(a, q: Fraction) -> dict[Sig, Fraction]:
    if not q:
        return {}
    return {sig: c * q for sig, c in _as_dict(a).items()}


_ONE_SUM: tuple = (((), _ONE),)


class Scalar:
    """Exact constant: quotient of monomial sums. Immutable."""

    __slots__ = ("num", "den", "_src")

    def __init__(self, num, den, _raw: bool = False):
        if not _raw:
            raise ScalarError("use Scalar.from_fraction/param/gamma or arithmetic")
        self.num = num
        self.den = den
        self._src = None

    # -- construction ------------------------------------------------------

    @staticmethod
    def _make(num, den) -> "Scalar":
        num = {sig: c for sig, c in _as_dict(num).items() if c}
        den = {sig: c for sig, c in _as_dict(den).items() if c}
        if not den:
            raise ScalarError("division by a symbolically zero scalar")
        if not num:
            return _ZERO_SCALAR if _ZERO_SCALAR is not None else Scalar((), _ONE_SUM, _raw=True)
        if len(den) == 1:
            (dsig, dc), = den.items()
            inv_sig, inv_c = _mono_inv(dsig, dc)
            folded: dict[Sig, Fraction] = {}
            for sig, c in num.items():
                s2, c2 = _mono_mul(sig, c, inv_sig, inv_c)
                folded[s2] = folded.get(s2, _ZERO) + c2
            num = {s: c for s, c in folded.items() if c}
            if not num:
                return Scalar((), _ONE_SUM, _raw=True)
            return Scalar(tuple(sorted(num.items())), _ONE_SUM, _raw=True)
        # multi-monomial denominator: cancel common atom content, then scale
        # so the canonically first denominator monomial has coefficient 1.
        monos = list(num.items()) + list(den.items())
        common: dict[Atom, Fraction] | None = None
        for sig, _ in monos:
            exps = dict(sig)
            if common is None:
                common = exps
            else:
                common = {
                    atom: min(e, exps[atom]) for atom, e in common.items() if atom in exps
                }
            if not common:
                break
        if common:
            inv_sig, inv_c = _mono_inv(tuple(sorted(common.items())), _ONE)
            num = dict(_mono_mul(s, c, inv_sig, inv_c) for s, c in num.items())
            den = dict(_mono_mul(s, c, inv_sig, inv_c) for s, c in den.items())
        den_items = sorted(den.items())
        scale = den_items[0][1]
        num_t = tuple(sorted((sig, c / scale) for sig, c in num.items()))
        den_t = tuple((sig, c / scale) for sig, c in den_items)
        # proportional num/den collapse to their constant ratio
        if len(num_t) == len(den_t) and all(
            ns == ds for (ns, _), (ds, _) in zip(num_t, den_t)
        ):
            ratio = num_t[0][1] / den_t[0][1]
            if all(nc == ratio * dc for (_, nc), (_, dc) in zip(num_t, den_t)):
                if ratio == 1:
                    return Scalar(_ONE_SUM, _ONE_SUM, _raw=True)
                return Scalar((((), ratio),), _ONE_SUM, _raw=True)
        return Scalar(num_t, den_t, _raw=True)

    @classmethod
    def from_fraction(cls, q) -> "Scalar":
        q = Fraction(q)
        if not q:
            return cls._make({}, dict(_ONE_SUM))
        return cls._make({(): q}, dict(_ONE_SUM))

    @classmethod
    def zero(cls) -> "Scalar":
        return _ZERO_SCALAR

    @classmethod
    def one(cls) -> "Scalar":
        return _ONE_SCALAR

    @classmethod
    def param(cls, name: str) -> "Scalar":
        return cls._make({((("p", name), _ONE),): _ONE}, dict(_ONE_SUM))

    @classmethod
    def gamma(cls, arg) -> "Scalar":
        arg = Fraction(arg)
        if arg <= 0:
            raise ScalarError(f"gamma argument must be positive, got {arg}")
        if arg.denominator == 1 and arg <= _GAMMA_RESOLVE_LIMIT:
            return cls.from_fraction(math.factorial(int(arg) - 1))
        return cls._make({((("g", arg), _ONE),): _ONE}, dict(_ONE_SUM))

    @classmethod
    def rational_power(cls, base, exp) -> "Scalar":
        base = Fraction(base)
        exp = Fraction(exp)
        if base == 0:
            if exp > 0:
                return cls.zero()
            raise ScalarError("0 raised to a non-positive power")
        sig, c = _rational_power(base, exp)
        return cls._make({sig: c}, dict(_ONE_SUM))

    # -- shape predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == _ONE_SUM and self.den == _ONE_SUM

    def as_fraction(self) -> Fraction | None:
        """The exact rational value, or None if atoms remain."""
        if self.den != _ONE_SUM:
            return None
        if not self.num:
            return _ZERO
        if len(self.num) == 1 and self.num[0][0] == ():
            return self.num[0][1]
        return None

    def is_monomial(self) -> bool:
        return self.den == _ONE_SUM and len(self.num) <= 1

    def free_params(self) -> frozenset[str]:
        names = set()
        for part in (self.num, self.den):
            for sig, _ in part:
                for atom, _e in sig:
                    if atom[0] == "p":
                        names.add(atom[1])
        return frozenset(names)

    def leading_coeff_negative(self) -> bool:
        return bool(self.num) and self.num[0][1] < 0

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _coerce(v: ScalarLike) -> "Scalar":
        if isinstance(v, Scalar):
            return v
        if isinstance(v, (int, Fraction)):
            return Scalar.from_fraction(v)
        raise TypeError(f"cannot use {type(v).__name__} as a Scalar")

    def __add__(self, other: ScalarLike) -> "Scalar":
        o = self._coerce(other)
        if self.den == o.den:
            return Scalar._make(_sum_add(self.num, o.num), dict(self.den))
        n = _sum_add(_sum_mul(self.num, o.den), _sum_mul(o.num, self.den))
        return Scalar._make(n, _sum_mul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._make(_sum_scale(self.num, Fraction(-1)), dict(self.den))

    def __sub__(self, other: ScalarLike) -> "Scalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other: ScalarLike) -> "Scalar":
        return self._coerce(other) + (-self)

    def __mul__(self, other: ScalarLike) -> "Scalar":
        o = self._coerce(other)
        return Scalar._make(_sum_mul(self.num, o.num), _sum_mul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other: ScalarLike) -> "Scalar":
        o = self._coerce(other)
        if o.is_zero():
            raise ScalarError("division by a symbolically zero scalar")
        return Scalar._make(_sum_mul(self.num, o.den), _sum_mul(self.den, o.num))

    def __rtruediv__(self, other: ScalarLike) -> "Scalar":
        return self._coerce(other) / self

    def __pow__(self, exp) -> "Scalar":
        e = Fraction(exp)
        if e.denominator == 1:
            n = int(e)
            if n == 0:
                return Scalar.one()
            base = self if n > 0 else Scalar.one() / self
            n = abs(n)
            acc = Scalar.one()
            while n:
                if n & 1:
                    acc = acc * base
                base = base * base if n > 1 else base
                n >>= 1
            return acc
        if len(self.num) == 1 and len(self.den) == 1:
            nsig, nc = _mono_pow(*self.num[0], e)
            dsig, dc = _mono_pow(*self.den[0], e)
            return Scalar._make({nsig: nc}, {dsig: dc})
        if self.is_zero() and e > 0:
            return Scalar.zero()
        raise ScalarError(
            f"fractional power {e} of a non-monomial scalar is outside the class"
        )

    def sqrt(self) -> "Scalar":
        return self ** Fraction(1, 2)

    def same_value(self, other: ScalarLike) -> bool:
        """Exact value equality via cross-multiplication."""
        return (self - self._coerce(other)).is_zero()

    # -- structural identity ---------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Scalar.from_fraction(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    # -- numerics ----------------------------------------------------------------

    def eval(self, params: Mapping[str, float] | None = None) -> float:
        params = params or {}
        try:
            nv = _eval_sum(self.num, params)
            dv = _eval_sum(self.den, params)
        except OverflowError as exc:
            raise EvalError(f"overflow evaluating scalar {self}") from exc
        if dv == 0.0:
            raise EvalError(f"denominator of {self} evaluates to zero")
        return nv / dv

    # -- printing ------------------------------------------------------------------

    def to_source(self) -> str:
        if self._src is None:
            if self.den == _ONE_SUM:
                src = _sum_source(self.num)
            else:
                src = f"({_sum_source(self.num)})/({_sum_source(self.den)})"
            self._src = src
        return self._src

    def sort_key(self) -> str:
        return self.to_source()

    def __str__(self) -> str:
        return self.to_source()

    def __repr__(self) -> str:
        return f"Scalar({self.to_source()!r})"


def _eval_atom(atom: Atom, e: Fraction, params: Mapping[str, float]) -> float:
    kind = atom[0]
    if kind == "p":
        name = atom[1]
        if name not in params:
            raise EvalError(f"unbound parameter '{name}'")
        base = float(params[name])
        if base < 0.0 and e.denominator != 1:
            raise EvalError(f"parameter '{name}' = {base} under fractional power")
        if base == 0.0 and e < 0:
            raise EvalError(f"parameter '{name}' = 0 under negative power")
        return base ** float(e)
    if kind == "g":
        return gamma_real(float(atom[1])) ** float(e)
    return float(atom[1]) ** float(e)


def _eval_sum(monos: Iterable, params: Mapping[str, float]) -> float:
    total = 0.0
    for sig, c in monos:
        v = float(c)
        for atom, e in sig:
            v *= _eval_atom(atom, e, params)
        total += v
    return total


def _exp_source(e: Fraction) -> str:
    if e == 1:
        return ""
    if e.denominator == 1 and e > 0:
        return f"^{e}"
    return f"^({e})"


def _atom_source(atom: Atom) -> str:
    kind = atom[0]
    if kind == "p":
        return atom[1]
    if kind == "g":
        return f"gamma({atom[1]})"
    return str(atom[1])


def _mono_source(sig: Sig, coeff: Fraction) -> tuple[bool, str]:
    neg = coeff < 0
    c = -coeff if neg else coeff
    if not sig:
        return neg, str(c)
    parts = [] if c == 1 else [str(c)]
    for atom, e in sig:
        if atom[0] == "r":
            parts.append(f"{atom[1]}^({e})")
        else:
            parts.append(_atom_source(atom) + _exp_source(e))
    return neg, "*".join(parts)


def _sum_source(monos) -> str:
    if not monos:
        return "0"
    chunks = []
    for i, (sig, c) in enumerate(monos):
        neg, txt = _mono_source(sig, c)
        if i == 0:
            chunks.append(("-" if neg else "") + txt)
        else:
            chunks.append((" - " if neg else " + ") + txt)
    return "".join(chunks)


_ZERO_SCALAR: Scalar | None = None
_ONE_SCALAR: Scalar | None = None
_ZERO_SCALAR = Scalar((), _ONE_SUM, _raw=True)
_ONE_SCALAR = Scalar(_ONE_SUM, _ONE_SUM, _raw=True)
