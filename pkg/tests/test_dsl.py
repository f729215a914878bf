"""Problem-file grammar: round trips, precedence, diagnostics, fuzz."""

import random
from fractions import Fraction

import pytest

from fracseries.dsl import (
    parse_expr,
    parse_problem,
    parse_problem_file,
    parse_rhs,
    problem_to_source,
    rhs_to_source,
)
from fracseries.errors import ParseError
from fracseries.expr import Expr, ExpTime, PolyTime, UnitTime
from fracseries.scalar import Scalar


# -- golden round trips -------------------------------------------------------------

def test_round_trip_fixture_files(problems_dir):
    for name in ("kolmogorov.frac", "klein_gordon.frac", "burgers_delay.frac"):
        prob = parse_problem_file(problems_dir / name)
        text = problem_to_source(prob)
        again = parse_problem(text)
        assert again == prob, name
        # serializer output is a fixed point
        assert problem_to_source(again) == text


def test_round_trip_preserves_semantics(problems_dir):
    # the reparsed problem solves to identical coefficients
    from fracseries.solver import solve

    prob = parse_problem_file(problems_dir / "burgers_delay.frac")
    again = parse_problem(problem_to_source(prob))
    a = solve(prob, 3)
    b = solve(again, 3)
    for k in range(4):
        assert (a.coeff(k) - b.coeff(k)).is_zero()


def test_rhs_round_trip_spot_checks():
    cases = [
        "Dx(psi, 2)",
        "(x + 1)*Dx(psi) + x^2*Dx(psi, 2)",
        "Dx(psi)@(x, t/2)*psi@(x/2, t/2) + 1/2*psi",
        "exptime(2)*Dx(psi, 2)",
        "polytime(1, 0, 3/2)*psi",
        "nu*Dx(psi^2, 2) - omega*Dx(psi^2, 4)",
    ]
    for src in cases:
        rhs = parse_rhs(src, params=["nu", "omega"])
        text = rhs_to_source(rhs)
        again = parse_rhs(text, params=["nu", "omega"])
        assert again == rhs, src


# -- expression grammar ---------------------------------------------------------------

def test_precedence_power_binds_tightest():
    assert (parse_expr("2*x^2") - Expr.poly([0, 0, 2])).is_zero()
    assert (parse_expr("-x^2") - Expr.poly([0, 0, -1])).is_zero()
    assert (parse_expr("2^3") - Expr.const(8)).is_zero()


def test_power_right_associative():
    assert (parse_expr("2^3^2") - Expr.const(512)).is_zero()


def test_unary_minus_and_subtraction():
    assert (parse_expr("-x + x") - Expr.zero()).is_zero()
    assert (parse_expr("1 - -x") - (Expr.x() + 1)).is_zero()
    assert (parse_expr("2 - 1 - 1")).is_zero()  # left assoc


def test_division_is_exact():
    e = parse_expr("x/4 + 1/4")
    assert (e.scalar_mul(4) - (Expr.x() + 1)).is_zero()
    assert (parse_expr("0.125*x") - Expr.x().scalar_mul(Fraction(1, 8))).is_zero()


def test_decimals_are_exact_fractions():
    assert (parse_expr("0.1") - Expr.const(Fraction(1, 10))).is_zero()
    assert (parse_expr("2.5*x") - Expr.x().scalar_mul(Fraction(5, 2))).is_zero()


def test_functions_of_scaled_x():
    e = parse_expr("cosh(x/2)")
    assert (e - Expr.cosh_of(Fraction(1, 2))).is_zero()
    e2 = parse_expr("exp(2*x)")
    assert (e2 - Expr.exponential(2)).is_zero()
    e3 = parse_expr("sinh(nu*x)", params=["nu"])
    assert (e3 - Expr.sinh_of(Scalar.param("nu"))).is_zero()


def test_sqrt_of_parameters():
    e = parse_expr("sqrt(nu/omega)*x", params=["nu", "omega"])
    mu = (Scalar.param("nu") / Scalar.param("omega")) ** Fraction(1, 2)
    assert (e - Expr.x().scalar_mul(mu)).is_zero()


def test_rhs_structure_delay_scaling():
    rhs = parse_rhs("psi@(x/2, t/2)")
    (term,) = rhs.terms
    (f,) = term.factors
    assert f.xscale == Fraction(1, 2) and f.tscale == Fraction(1, 2)
    assert f.n == 0 and f.power == 1


def test_rhs_scale_binds_to_nearest_factor():
    rhs = parse_rhs("Dx(psi)@(x, t/2)*psi")
    (term,) = rhs.terms
    scales = sorted((f.n, f.tscale) for f in term.factors)
    assert scales == [(0, Fraction(1)), (1, Fraction(1, 2))]


def test_rhs_leibniz_expansion_of_powers():
    # Dx(psi^2, 2) = 2 psi psi'' + 2 (psi')^2; equal factors bucket into powers
    rhs = parse_rhs("Dx(psi^2, 2)")
    assert len(rhs.terms) == 2
    shapes = {}
    for t in rhs.terms:
        key = tuple(sorted((f.n, f.power) for f in t.factors))
        c = t.coeff.as_scalar().as_fraction()
        shapes[key] = c
    assert shapes == {((0, 1), (2, 1)): 2, ((1, 2),): 2}


def test_rhs_time_coefficients():
    rhs = parse_rhs("exptime(3)*Dx(psi)")
    (term,) = rhs.terms
    assert isinstance(term.tcoef, ExpTime)
    rhs2 = parse_rhs("polytime(1, 2)*psi")
    (term2,) = rhs2.terms
    assert isinstance(term2.tcoef, PolyTime)
    # exptime(0) is the unit coefficient
    rhs3 = parse_rhs("exptime(0)*psi")
    assert isinstance(rhs3.terms[0].tcoef, UnitTime)
    # a one-entry polytime folds into the scalar coefficient
    rhs4 = parse_rhs("polytime(5)*psi")
    (term4,) = rhs4.terms
    assert isinstance(term4.tcoef, UnitTime)
    assert (term4.coeff - Expr.const(5)).is_zero()


def test_rhs_merges_exptime_rates():
    rhs = parse_rhs("exptime(1)*exptime(2)*psi")
    (term,) = rhs.terms
    assert isinstance(term.tcoef, ExpTime)
    assert term.tcoef.rate.same_value(3)


def test_forcing_lines_build_series():
    text = """
name = forced
alpha = 1/2
order = 1
ic0 = x
rhs = Dx(psi, 2)
forcing 0 = x + 1
forcing 2 = x^2
"""
    prob = parse_problem(text)
    f = prob.rhs.forcing
    assert f is not None and f.alpha == Fraction(1, 2)
    assert (f.coeff(0) - (Expr.x() + 1)).is_zero()
    assert f.coeff(1).is_zero()
    assert (f.coeff(2) - Expr.poly([0, 0, 1])).is_zero()


def test_pure_x_rhs_terms_become_sources():
    rhs = parse_rhs("x^2 + Dx(psi)")
    kinds = sorted(len(t.factors) for t in rhs.terms)
    assert kinds == [0, 1]
    src = [t for t in rhs.terms if not t.factors][0]
    assert (src.coeff - Expr.poly([0, 0, 1])).is_zero()


def test_grouping_collects_repeated_shapes():
    rhs = parse_rhs("x*Dx(psi) + Dx(psi)*x + psi")
    assert len(rhs.terms) == 2
    first = rhs.terms[0]
    assert (first.coeff - Expr.x().scalar_mul(2)).is_zero()


def test_default_problem_name_is_file_stem(tmp_path):
    p = tmp_path / "heat_flow.frac"
    p.write_text("alpha = 1\norder = 1\nic0 = x\nrhs = Dx(psi, 2)\n")
    prob = parse_problem_file(p)
    assert prob.name == "heat_flow"


# -- diagnostics ----------------------------------------------------------------------

# (filename, expected line, expected col, message fragment); positions frozen
# after checking by eye that each points at the offending token
_MALFORMED = [
    ("bad_arity.frac", 5, 7, "takes 1 to 2 argument"),
    ("bad_token.frac", 5, 11, "unexpected character"),
    ("div_by_psi.frac", 5, 11, "divisor"),
    ("dup_key.frac", 3, 1, "duplicate 'alpha'"),
    ("exp_nonlinear.frac", 4, 12, "linear in x"),
    ("ic_count.frac", None, None, "missing initial condition 'ic1'"),
    ("missing_alpha.frac", None, None, "missing required line 'alpha"),
    ("nonconst_alpha.frac", 2, 11, "alpha must not depend on x"),
    ("psi_in_ic.frac", 4, 7, "not allowed in an initial condition"),
    ("unclosed_paren.frac", 5, 23, "expected ')'"),
    ("undeclared_param.frac", 4, 7, "unknown name 'nu'"),
    ("unknown_key.frac", 6, 1, "unknown key 'stepsize'"),
]


@pytest.mark.parametrize("name,line,col,fragment", _MALFORMED)
def test_malformed_inputs_report_positions(malformed_dir, name, line, col, fragment):
    with pytest.raises(ParseError) as err:
        parse_problem_file(malformed_dir / name)
    e = err.value
    assert e.line == line and e.col == col, str(e)
    assert fragment in e.message, str(e)


def test_error_message_includes_position_text():
    with pytest.raises(ParseError) as err:
        parse_problem("name = p\nalpha = 1\norder = 1\nic0 = x\nrhs = Dx(psi")
    assert "line 5" in str(err.value)


# -- fuzzing --------------------------------------------------------------------------

_FUZZ_TOKENS = [
    "x", "psi", "Dx", "exp", "sinh", "cosh", "sqrt", "exptime", "polytime",
    "(", ")", ",", "+", "-", "*", "/", "^", "@", "=", "1", "2", "0.5",
    "1/2", "nu", " ", "alpha", "order", "ic0", "rhs", "name", "#", "\n",
]


def _fuzz_text(rng):
    n = rng.randrange(1, 40)
    return "".join(rng.choice(_FUZZ_TOKENS) for _ in range(n))


def test_fuzz_expressions_never_crash():
    # every input either parses or raises a positioned ParseError
    rng = random.Random(20260819)
    parsed = 0
    for _ in range(6000):
        text = _fuzz_text(rng)
        try:
            parse_expr(text, params=["nu"])
            parsed += 1
        except ParseError:
            pass
    assert parsed > 0  # the grammar accepts some of them


def test_fuzz_rhs_never_crashes():
    rng = random.Random(77)
    parsed = 0
    for _ in range(6000):
        text = _fuzz_text(rng)
        try:
            parse_rhs(text, params=["nu"])
            parsed += 1
        except ParseError:
            pass
    assert parsed > 0


def test_fuzz_problem_files_never_crash():
    rng = random.Random(3)
    lines_pool = [
        "name = fuzz", "alpha = 1/2", "alpha = 2", "order = 1", "order = x",
        "ic0 = x", "ic0 = psi", "ic1 = 1", "rhs = Dx(psi)", "rhs = ",
        "param nu", "param nu = 3", "forcing 0 = x", "forcing -1 = x",
        "junk line", "= =", "#c", "", "exact = x*exp(t)", "exact = t/0",
    ]
    parsed = 0
    for _ in range(4000):
        text = "\n".join(rng.choice(lines_pool) for _ in range(rng.randrange(1, 9)))
        try:
            parse_problem(text)
            parsed += 1
        except ParseError:
            pass
    assert parsed >= 0


def test_fuzz_mutated_fixture(problems_dir):
    # single-character mutations of a valid file: parse or positioned error
    base = (problems_dir / "klein_gordon.frac").read_text()
    rng = random.Random(9)
    for _ in range(2000):
        i = rng.randrange(len(base))
        c = rng.choice("xt()+-*/^@=123 #\n")
        text = base[:i] + c + base[i + 1:]
        try:
            parse_problem(text)
        except ParseError as e:
            assert e.message  # never empty
