"""Problem model: structured right-hand sides and validated equations.

An equation is D_t^(m*alpha) psi = R[psi] with m initial conditions.  The
right-hand side is a sum of terms

    coeff(x) * tcoef(t) * prod_j (D_x^(n_j) psi)(xscale_j * x, tscale_j * t)^(power_j)

plus an optional forcing series already living on the t^(k*alpha) grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .errors import AlphaOutOfRange, EvalError, ProblemError
from .expr import Expr, TimeCoef, UNIT_TIME, UnitTime
from .scalar import Scalar
from .series import FracSeries

_RESERVED_NAMES = frozenset({"x", "t", "psi"})


@dataclass(frozen=True)
class RhsFactor:
    """One unknown-function occurrence: (D_x^n psi)(xscale*x, tscale*t)^power."""

    n: int = 0
    xscale: Fraction = Fraction(1)
    tscale: Fraction = Fraction(1)
    power: int = 1

    def __post_init__(self):
        object.__setattr__(self, "xscale", Fraction(self.xscale))
        object.__setattr__(self, "tscale", Fraction(self.tscale))
        if self.n < 0:
            raise ProblemError("x-derivative order must be >= 0")
        if self.xscale <= 0 or self.tscale <= 0:
            raise ProblemError("argument scales must be positive rationals")
        if self.power < 1:
            raise ProblemError("factor power must be >= 1")

    @property
    def scaled(self) -> bool:
        return self.xscale != 1 or self.tscale != 1


@dataclass(frozen=True)
class RhsTerm:
    """Product term of the right-hand side.

    An empty factor tuple makes the term a pure source: it contributes
    coeff(x) * tcoef(t) on its own.
    """

    coeff: Expr
    tcoef: TimeCoef = UNIT_TIME
    factors: tuple[RhsFactor, ...] = ()

    def total_power(self) -> int:
        return sum(f.power for f in self.factors)

    def is_source(self) -> bool:
        return not self.factors


@dataclass(frozen=True)
class RhsOperator:
    terms: tuple[RhsTerm, ...] = ()
    forcing: FracSeries = None  # type: ignore[assignment]

    def is_linear(self) -> bool:
        """True when every term is a single first-power factor.

        This is the structural gate for the shortcut that maps coefficient
        k-m directly to coefficient k; source terms and products disqualify.
        """
        return all(
            len(t.factors) == 1 and t.factors[0].power == 1 for t in self.terms
        )

    def free_params(self) -> set[str]:
        names: set[str] = set()
        for t in self.terms:
            names |= t.coeff.free_params()
            names |= t.tcoef.free_params()
        if self.forcing is not None:
            for _, e in self.forcing.coeffs:
                names |= e.free_params()
        return names


@dataclass(frozen=True)
class Problem:
    """Validated equation D_t^(m*alpha) psi = rhs, with m initial conditions.

    Initial condition j supplies the coefficient of t^(j*alpha)/Gamma(1+j*alpha),
    i.e. the Caputo derivative of order j*alpha at t = 0.
    """

    name: str
    m: int
    alpha: Fraction
    rhs: RhsOperator
    ics: tuple[Expr, ...]
    params: Mapping[str, Optional[Scalar]] = field(default_factory=dict)
    exact: Optional["ExactSolution"] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "ics", tuple(self.ics))
        if self.m < 1:
            raise ProblemError("equation order m must be >= 1")
        if not (0 < self.alpha <= 1):
            raise AlphaOutOfRange(
                f"alpha must lie in (0, 1], got {self.alpha}"
            )
        if len(self.ics) != self.m:
            raise ProblemError(
                f"expected {self.m} initial conditions, got {len(self.ics)}"
            )
        bad = _RESERVED_NAMES & set(self.params)
        if bad:
            raise ProblemError(
                "parameter names collide with built-ins: " + ", ".join(sorted(bad))
            )
        if self.rhs.forcing is not None and self.rhs.forcing.alpha != self.alpha:
            raise ProblemError("forcing series order does not match problem alpha")

    def param_floats(self, overrides: Optional[Mapping[str, float]] = None) -> dict[str, float]:
        """Numeric parameter bindings: file defaults overlaid by overrides."""
        out: dict[str, float] = {}
        for name, val in self.params.items():
            if val is not None:
                out[name] = val.eval({})
        if overrides:
            out.update(overrides)
        return out


# -- exact reference solutions -------------------------------------------------------

# Node shapes (plain tuples, so structural equality is free):
#   ('num', Fraction) ('x',) ('t',) ('param', name)
#   ('neg', a) ('add', a, b) ('sub', a, b) ('mul', a, b) ('div', a, b) ('pow', a, b)
#   ('call', fname, a) with fname in {exp, sinh, cosh, sqrt}

_XT_FUNCS = {
    "exp": math.exp,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "sqrt": math.sqrt,
}


class ExactSolution:
    """Closed-form reference in x and t, kept as a small expression tree.

    Unlike Expr this is evaluation-only: references like x*exp(t) fall
    outside the x-only symbolic class, and the error tables just need
    numbers.
    """

    __slots__ = ("node", "source")

    def __init__(self, node: tuple, source: str):
        self.node = node
        self.source = source

    def eval(self, x: float, t: float, params: Mapping[str, float]) -> float:
        try:
            v = _xt_eval(self.node, x, t, params)
        except (OverflowError, ValueError, ZeroDivisionError) as exc:
            raise EvalError(f"reference evaluation failed at x={x}, t={t}: {exc}")
        if isinstance(v, complex) or math.isnan(v):
            raise EvalError(f"reference evaluation failed at x={x}, t={t}")
        return float(v)

    def free_params(self) -> set[str]:
        out: set[str] = set()
        _xt_params(self.node, out)
        return out

    def to_source(self) -> str:
        return self.source

    def __eq__(self, other):
        if not isinstance(other, ExactSolution):
            return NotImplemented
        return self.node == other.node

    def __hash__(self):
        return hash(self.node)

    def __repr__(self):
        return f"ExactSolution({self.source!r})"


def _xt_eval(node: tuple, x: float, t: float, params: Mapping[str, float]):
    tag = node[0]
    if tag == "num":
        return float(node[1])
    if tag == "x":
        return x
    if tag == "t":
        return t
    if tag == "param":
        name = node[1]
        if name not in params:
            raise EvalError(f"parameter '{name}' has no value")
        return params[name]
    if tag == "neg":
        return -_xt_eval(node[1], x, t, params)
    if tag == "call":
        return _XT_FUNCS[node[1]](_xt_eval(node[2], x, t, params))
    a = _xt_eval(node[1], x, t, params)
    b = _xt_eval(node[2], x, t, params)
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    if tag == "mul":
        return a * b
    if tag == "div":
        return a / b
    if tag == "pow":
        return a ** b
    raise EvalError(f"malformed reference node {tag!r}")


def _xt_params(node: tuple, out: set) -> None:
    tag = node[0]
    if tag == "param":
        out.add(node[1])
    elif tag in ("neg",):
        _xt_params(node[1], out)
    elif tag == "call":
        _xt_params(node[2], out)
    elif tag in ("add", "sub", "mul", "div", "pow"):
        _xt_params(node[1], out)
        _xt_params(node[2], out)
