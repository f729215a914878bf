"""Series solver: explicit coefficient recurrence plus a residual verifier.

For D_t^(m*alpha) psi = R[psi] the truncated solution coefficients come out
one at a time: the first m are the initial conditions, and each later one is

    phi_k = coefficient k-m of R applied to the series built from phi_0..phi_{k-1}.

No symbolic unknowns and no limit process are involved; substituting only the
already-known prefix is exact because the k-m coefficient of R[S] never reads
series entries above k-1 (every operation here preserves or raises grid order).

Verification is independent of the construction: residual_series recomputes
D_t^(m*alpha) S - R[S] from scratch and checks its low-order coefficients
vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotLinear, ProblemError, TimeCoefficientIncompatible
from .expr import Expr, ExpTime, PolyTime, TimeCoef, UnitTime, probe_zero
from .problems import Problem, RhsOperator
from .scalar import Scalar
from .series import FracSeries


@dataclass(frozen=True)
class SeriesSolution:
    """Computed coefficient list for one problem at one truncation order."""

    problem: Problem
    order: int
    coeffs: tuple[Expr, ...]
    linear_path_used: bool = False

    def coeff(self, k: int) -> Expr:
        return self.coeffs[k]

    def series(self) -> FracSeries:
        return FracSeries(
            self.problem.alpha, self.order, dict(enumerate(self.coeffs))
        )

    def replace_coeff(self, k: int, e: Expr) -> "SeriesSolution":
        """Fault-injection helper: same solution with coefficient k swapped."""
        cs = list(self.coeffs)
        cs[k] = e
        return SeriesSolution(self.problem, self.order, tuple(cs), self.linear_path_used)


# -- right-hand side application ------------------------------------------------------

def _tcoef_grid(tcoef: TimeCoef, alpha: Fraction, kmax: int) -> FracSeries:
    """Expand a time coefficient on the integer grid (alpha = 1 only)."""
    if isinstance(tcoef, ExpTime):
        # exp(c*t): normalized coefficient j is c^j
        coeffs = {j: Expr.const(tcoef.rate ** j) for j in range(kmax + 1)}
    elif isinstance(tcoef, PolyTime):
        # plain t^j carries j! once the 1/Gamma(1+j) normalization is factored out
        coeffs = {
            j: Expr.const(s * Scalar.from_fraction(math.factorial(j)))
            for j, s in enumerate(tcoef.coeffs)
            if j <= kmax
        }
    else:
        raise TimeCoefficientIncompatible(f"unknown time coefficient {tcoef!r}")
    return FracSeries(alpha, kmax, coeffs)


def _apply_tcoef(s: FracSeries, tcoef: TimeCoef, kmax: int) -> FracSeries:
    if isinstance(tcoef, UnitTime):
        return s
    if s.is_zero():
        # the time factor multiplies an identically-zero series; nothing to place
        return s
    if s.alpha == 1:
        return s.mul(_tcoef_grid(tcoef, s.alpha, kmax), kmax)
    raise TimeCoefficientIncompatible(
        "time-dependent coefficients need alpha = 1 or a vanishing factor "
        "product: integer powers of t do not live on the t^(k*alpha) grid"
    )


def apply_rhs(rhs: RhsOperator, series: FracSeries, kmax: int) -> FracSeries:
    """Apply a structured right-hand side to a truncated series.

    Per term: x-derivatives, then argument scaling, then the factor power,
    then the product across factors, then the x-coefficient and the time
    coefficient. Source terms (no factors) contribute coeff * tcoef alone.
    """
    if kmax < 0:
        raise ProblemError("target truncation must be >= 0")
    alpha = series.alpha
    total = FracSeries.zero(alpha, kmax)
    for term in rhs.terms:
        acc = None
        for f in term.factors:
            base = series.dx(f.n) if f.n else series
            if f.scaled:
                base = base.scale_args(f.xscale, f.tscale)
            base = base.pow(f.power, kmax) if f.power > 1 else base.truncate(kmax)
            acc = base if acc is None else acc.mul(base, kmax)
        if acc is None:
            acc = FracSeries(alpha, kmax, {0: term.coeff})
        else:
            acc = acc.expr_mul(term.coeff)
        total = total.add(_apply_tcoef(acc, term.tcoef, kmax))
    if rhs.forcing is not None:
        total = total.add(rhs.forcing.truncate(kmax))
    return total.truncate(kmax)


# -- coefficient recurrences --------------------------------------------------------

def _check_order(problem: Problem, order: int) -> None:
    if order < problem.m - 1:
        raise ProblemError(
            f"truncation order {order} is below m-1 = {problem.m - 1}: "
            "not even the initial conditions fit"
        )


def solve(problem: Problem, order: int) -> SeriesSolution:
    """Explicit recurrence: one new coefficient per step, nothing revisited."""
    _check_order(problem, order)
    coeffs = list(problem.ics[: order + 1])
    for k in range(problem.m, order + 1):
        prefix = FracSeries(problem.alpha, k - 1, dict(enumerate(coeffs)))
        image = apply_rhs(problem.rhs, prefix, k - problem.m)
        coeffs.append(image.coeff(k - problem.m))
    return SeriesSolution(problem, order, tuple(coeffs), linear_path_used=False)


def solve_linear(problem: Problem, order: int) -> SeriesSolution:
    """Shortcut for single-factor first-power right-hand sides.

    Coefficient k is the operator applied to coefficient k-m directly; delay
    scalings contribute the exact power tscale^((k-m)*alpha). Time-dependent
    term coefficients are only admissible when their factor image vanishes,
    matching the full path's compatibility rule, so both paths agree wherever
    both run.
    """
    if not problem.rhs.is_linear():
        raise NotLinear(
            "linear path needs every term to be a single first-power factor"
        )
    _check_order(problem, order)
    alpha = problem.alpha
    coeffs = list(problem.ics[: order + 1])
    for k in range(problem.m, order + 1):
        j = k - problem.m
        new = Expr.zero()
        for term in problem.rhs.terms:
            f = term.factors[0]
            g = coeffs[j].diff_x(f.n) if f.n else coeffs[j]
            if f.xscale != 1:
                g = g.scale_x(f.xscale)
            if f.tscale != 1:
                g = g.scalar_mul(Scalar.rational_power(f.tscale, j * alpha))
            g = g * term.coeff
            if not isinstance(term.tcoef, UnitTime) and not g.is_zero():
                raise TimeCoefficientIncompatible(
                    "time-dependent coefficient with a surviving factor: "
                    "use the full recurrence"
                )
            new = new + g
        if problem.rhs.forcing is not None:
            new = new + problem.rhs.forcing.coeff(j)
        coeffs.append(new)
    return SeriesSolution(problem, order, tuple(coeffs), linear_path_used=True)


# -- verification --------------------------------------------------------------

def residual_series(problem: Problem, sol: SeriesSolution) -> FracSeries:
    """Defect of the truncated solution against the defining equation.

    Returns D_t^(m*alpha) S - R[S] with every coefficient recomputed from the
    finished series, truncated at order K-m (higher orders mix truncated-away
    information and are not meaningful).
    """
    if sol.order < problem.m:
        raise ProblemError(
            f"residual check needs order >= m = {problem.m}, got {sol.order}"
        )
    kmax = sol.order - problem.m
    full = sol.series()
    lhs = full.caputo_shift(problem.m).truncate(kmax)
    rhs = apply_rhs(problem.rhs, full, kmax)
    return lhs.sub(rhs)


def residual_orders(
    problem: Problem,
    sol: SeriesSolution,
    points: int = 10,
    rtol: float = 1e-10,
) -> list[tuple[int, bool]]:
    """Per-order verdicts: exact zero, else numeric probe at random points."""
    res = residual_series(problem, sol)
    out = []
    for j in range(sol.order - problem.m + 1):
        e = res.coeff(j)
        ok = e.is_zero() or probe_zero(e, points=points, rtol=rtol)
        out.append((j, ok))
    return out


def mittag_leffler_form(sol: SeriesSolution) -> str | None:
    """Display tag for solutions whose coefficients are all the same function.

    Such a series is c(x) times the partial sum of the one-parameter
    Mittag-Leffler function in t^alpha; returns the tag text, or None.
    """
    head = sol.coeffs[0]
    if all((c - head).is_zero() for c in sol.coeffs[1:]):
        return f"({head.pretty()}) * E_alpha(t^alpha), alpha = {sol.problem.alpha}"
    return None
