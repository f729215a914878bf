"""Coefficient recurrence: hand oracles, path agreement, verification."""

import dataclasses
from fractions import Fraction

import pytest

from fracseries.errors import (
    NotLinear,
    ProblemError,
    TimeCoefficientIncompatible,
)
from fracseries.expr import Expr, ExpTime, PolyTime, probe_equal
from fracseries.problems import Problem, RhsFactor, RhsOperator, RhsTerm
from fracseries.scalar import Scalar
from fracseries.series import FracSeries
from fracseries.solver import (
    apply_rhs,
    mittag_leffler_form,
    residual_orders,
    residual_series,
    solve,
    solve_linear,
)


def _problem(alpha, m, ics, terms, forcing=None, params=None, name="p"):
    rhs = RhsOperator(terms=tuple(terms), forcing=forcing)
    return Problem(
        name=name, m=m, alpha=Fraction(alpha), rhs=rhs, ics=tuple(ics),
        params=params or {},
    )


def _term(coeff=None, n=0, xscale=1, tscale=1, power=1, tcoef=None):
    kwargs = {}
    if tcoef is not None:
        kwargs["tcoef"] = tcoef
    return RhsTerm(
        coeff=coeff if coeff is not None else Expr.one(),
        factors=(RhsFactor(
            n=n, xscale=Fraction(xscale), tscale=Fraction(tscale), power=power
        ),),
        **kwargs,
    )


# -- apply_rhs hand checks --------------------------------------------------------

def test_apply_identity():
    s = FracSeries(Fraction(1, 2), 2, {0: Expr.x(), 1: Expr.one(), 2: Expr.x()})
    rhs = RhsOperator(terms=(_term(),))
    img = apply_rhs(rhs, s, 2)
    assert img == s


def test_apply_second_derivative():
    s = FracSeries(Fraction(1), 1, {0: Expr.poly([0, 0, 1]), 1: Expr.poly([0, 0, 0, 1])})
    rhs = RhsOperator(terms=(_term(n=2),))
    img = apply_rhs(rhs, s, 1)
    assert (img.coeff(0) - Expr.const(2)).is_zero()
    assert (img.coeff(1) - Expr.x().scalar_mul(6)).is_zero()


def test_apply_delay_scaling():
    # psi(x/2, t/2): coefficient j picks up the exact factor (1/2)^(j*alpha)
    a = Fraction(1, 2)
    s = FracSeries(a, 1, {0: Expr.x(), 1: Expr.x()})
    rhs = RhsOperator(terms=(_term(xscale=Fraction(1, 2), tscale=Fraction(1, 2)),))
    img = apply_rhs(rhs, s, 1)
    assert (img.coeff(0) - Expr.x().scalar_mul(Fraction(1, 2))).is_zero()
    half_a = Scalar.rational_power(Fraction(1, 2), a)
    want = Expr.x().scalar_mul(half_a * Fraction(1, 2))
    assert (img.coeff(1) - want).is_zero()


def test_apply_delay_product_matches_hand_derivation(delay_problem):
    # the full delayed right-hand side on the prefix [x, x] gives
    # x*(2^(-alpha) + 1/2) at image order 1
    a = delay_problem.alpha
    s = FracSeries(a, 1, {0: Expr.x(), 1: Expr.x()})
    img = apply_rhs(delay_problem.rhs, s, 1)
    c1 = Scalar.rational_power(2, -a) + Fraction(1, 2)
    assert (img.coeff(0) - Expr.x()).is_zero()
    assert (img.coeff(1) - Expr.x().scalar_mul(c1)).is_zero()


def test_apply_truncates_at_kmax():
    s = FracSeries(Fraction(1), 5, {k: Expr.one() for k in range(6)})
    rhs = RhsOperator(terms=(_term(),))
    img = apply_rhs(rhs, s, 2)
    assert img.trunc == 2
    assert all(k <= 2 for k, _ in img.coeffs)


def test_apply_forcing_only():
    f = FracSeries(Fraction(1, 2), 1, {0: Expr.one(), 1: Expr.x()})
    rhs = RhsOperator(terms=(), forcing=f)
    s = FracSeries(Fraction(1, 2), 0, {0: Expr.x()})
    img = apply_rhs(rhs, s, 1)
    assert img == f


# -- solve: hand oracles -----------------------------------------------------------

def test_exponential_time_coefficient_gives_bell_numbers():
    # u' = exp(t)*u, u(0) = 1 has u = exp(exp(t) - 1): the normalized
    # coefficients are the Bell numbers 1, 1, 2, 5, 15, 52
    p = _problem(1, 1, [Expr.one()], [_term(tcoef=ExpTime(Scalar.one()))])
    sol = solve(p, 5)
    for k, bell in enumerate((1, 1, 2, 5, 15, 52)):
        assert (sol.coeff(k) - Expr.const(bell)).is_zero(), k


def test_polynomial_time_coefficient_convolution():
    # u' = t*u, u(0) = x has u = x*exp(t^2/2); normalized coefficients
    # x * k! * [t^k] exp(t^2/2) = x, 0, x, 0, 3x, 0, 15x
    tc = PolyTime((Scalar.zero(), Scalar.one()))
    p = _problem(1, 1, [Expr.x()], [_term(tcoef=tc)])
    sol = solve(p, 6)
    want = (1, 0, 1, 0, 3, 0, 15)
    for k, w in enumerate(want):
        assert (sol.coeff(k) - Expr.x().scalar_mul(w)).is_zero(), k


def test_forcing_series_in_both_paths():
    # u' = u + 1, u(0) = 0 gives u = exp(t) - 1: coefficients 0, 1, 1, ...
    f = FracSeries(Fraction(1), 0, {0: Expr.one()})
    p = _problem(1, 1, [Expr.zero()], [_term()], forcing=f)
    for sol in (solve(p, 5), solve_linear(p, 5)):
        assert sol.coeff(0).is_zero()
        for k in range(1, 6):
            assert (sol.coeff(k) - Expr.one()).is_zero()


def test_source_term_equivalent_to_forcing():
    # the same equation with the constant written as a factorless term
    src = RhsTerm(coeff=Expr.one(), factors=())
    p = _problem(1, 1, [Expr.zero()], [_term(), src])
    sol = solve(p, 5)
    assert sol.coeff(0).is_zero()
    for k in range(1, 6):
        assert (sol.coeff(k) - Expr.one()).is_zero()
    # but the fast path rejects it structurally
    with pytest.raises(NotLinear):
        solve_linear(p, 5)


def test_fractional_order_diffusion_hand_value():
    # D^alpha u = u_xx, u(0) = x^2, alpha = 1/2:
    # phi_0 = x^2, phi_1 = 2, phi_k = 0 after
    p = _problem(Fraction(1, 2), 1, [Expr.poly([0, 0, 1])], [_term(n=2)])
    sol = solve(p, 4)
    assert (sol.coeff(0) - Expr.poly([0, 0, 1])).is_zero()
    assert (sol.coeff(1) - Expr.const(2)).is_zero()
    for k in range(2, 5):
        assert sol.coeff(k).is_zero()


def test_second_order_equation_interleaves_ics():
    # D^(2a) u = u with u(0) = f, D^a u(0) = g: coefficients alternate f, g
    f = Expr.x()
    g = Expr.one()
    p = _problem(Fraction(1, 2), 2, [f, g], [_term()])
    sol = solve(p, 6)
    for k in range(7):
        want = f if k % 2 == 0 else g
        assert (sol.coeff(k) - want).is_zero(), k


# -- path agreement and rejection ---------------------------------------------------

def test_linear_path_agrees_on_diffusion(diffusion_problem):
    a = solve(diffusion_problem, 8)
    b = solve_linear(diffusion_problem, 8)
    assert b.linear_path_used and not a.linear_path_used
    for k in range(9):
        assert (a.coeff(k) - b.coeff(k)).is_zero(), k


def test_linear_path_agrees_with_delay_scalings(delay_problem):
    # keep only the linear terms of the delayed equation
    lin_terms = tuple(
        t for t in delay_problem.rhs.terms if len(t.factors) == 1 and t.factors[0].power == 1
    )
    p = dataclasses.replace(
        delay_problem, rhs=RhsOperator(terms=lin_terms), name="delay_lin"
    )
    a = solve(p, 6)
    b = solve_linear(p, 6)
    for k in range(7):
        assert (a.coeff(k) - b.coeff(k)).is_zero(), k


def test_nonlinear_rejected_by_fast_path(wave_problem):
    with pytest.raises(NotLinear):
        solve_linear(wave_problem, 3)


def test_time_coefficient_rejected_off_grid():
    # exp(t) coefficient with a surviving factor at alpha = 1/2
    p = _problem(Fraction(1, 2), 1, [Expr.x()], [_term(tcoef=ExpTime(Scalar.one()))])
    with pytest.raises(TimeCoefficientIncompatible):
        solve(p, 3)
    with pytest.raises(TimeCoefficientIncompatible):
        solve_linear(p, 3)


def test_time_coefficient_allowed_when_factor_vanishes():
    # second derivatives of x-linear coefficients vanish, so the exp(t)
    # term contributes nothing and any alpha is fine
    p = _problem(
        Fraction(1, 2), 1, [Expr.x()],
        [_term(n=2, tcoef=ExpTime(Scalar.one())), _term(n=1)],
    )
    sol = solve(p, 3)
    ref = _problem(Fraction(1, 2), 1, [Expr.x()], [_term(n=1)])
    sol_ref = solve(ref, 3)
    for k in range(4):
        assert (sol.coeff(k) - sol_ref.coeff(k)).is_zero()
    lin = solve_linear(p, 3)
    for k in range(4):
        assert (lin.coeff(k) - sol.coeff(k)).is_zero()


# -- structure of solutions ----------------------------------------------------------

def test_prefix_stability(delay_problem):
    small = solve(delay_problem, 4)
    big = solve(delay_problem, 8)
    for k in range(5):
        assert big.coeff(k) == small.coeff(k)


def test_delay_collapses_at_integer_order(delay_problem):
    p = dataclasses.replace(delay_problem, alpha=Fraction(1))
    sol = solve(p, 6)
    for k in range(7):
        assert (sol.coeff(k) - Expr.x()).is_zero(), k


def test_closed_form_tag(diffusion_problem, delay_problem):
    tag = mittag_leffler_form(solve(diffusion_problem, 5))
    assert tag is not None and "E_alpha" in tag
    assert mittag_leffler_form(solve(delay_problem, 4)) is None


def test_series_accessor(diffusion_problem):
    sol = solve(diffusion_problem, 3)
    s = sol.series()
    assert s.trunc == 3
    for k in range(4):
        assert s.coeff(k) == sol.coeff(k)


def test_order_validation(wave_problem):
    with pytest.raises(ProblemError):
        solve(wave_problem, 0)  # m = 2 needs at least m-1 = 1
    sol = solve(wave_problem, 1)  # just the initial data
    assert sol.coeff(0) == wave_problem.ics[0]
    assert sol.coeff(1) == wave_problem.ics[1]


# -- residual verification ------------------------------------------------------------

def test_residual_exactly_zero_for_clean_solution(diffusion_problem):
    sol = solve(diffusion_problem, 6)
    res = residual_series(diffusion_problem, sol)
    assert res.is_zero()


def test_residual_orders_all_pass(delay_problem, wave_problem):
    for prob, K in ((delay_problem, 5), (wave_problem, 5)):
        sol = solve(prob, K)
        verdicts = residual_orders(prob, sol)
        assert len(verdicts) == K - prob.m + 1
        assert all(ok for _, ok in verdicts)


def test_residual_detects_corruption(delay_problem):
    sol = solve(delay_problem, 5)
    bad = sol.replace_coeff(3, sol.coeff(3) + Expr.one())
    verdicts = dict(residual_orders(delay_problem, bad))
    # first failure exactly at order 3 - m = 2
    assert verdicts[0] and verdicts[1]
    assert not verdicts[2]


def test_residual_needs_enough_orders(delay_problem):
    sol = solve(delay_problem, 5)
    short = solve(delay_problem, 0)
    with pytest.raises(ProblemError):
        residual_series(delay_problem, short)
    assert residual_series(delay_problem, sol).trunc == 4


def test_monotone_refinement(diffusion_problem):
    from fracseries.evaluate import eval_solution

    import math

    errs = []
    for K in range(2, 7):
        sol = solve(diffusion_problem, K)
        got = eval_solution(sol, 0.5, 0.8)
        errs.append(abs(got - 1.5 * math.exp(0.8)))
    assert all(b < a for a, b in zip(errs, errs[1:])), errs
