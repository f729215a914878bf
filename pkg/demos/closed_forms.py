"""Walk the three shipped problem files and print what the solver finds.

Run from the repository root:

    python3 demos/closed_forms.py
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from fracseries import (
    mittag_leffler_form,
    parse_problem_file,
    residual_orders,
    solve,
)

PROBLEMS = pathlib.Path(__file__).resolve().parent.parent / "problems"


def report(filename, order):
    prob = parse_problem_file(PROBLEMS / filename)
    sol = solve(prob, order)
    print(f"== {prob.name}  (m = {prob.m}, alpha = {prob.alpha}, K = {order})")
    for k, c in enumerate(sol.coeffs):
        print(f"  coeff[{k}](x) = {c.pretty()}")
    tag = mittag_leffler_form(sol)
    if tag:
        print(f"  closed form: {tag}")
    verdicts = residual_orders(prob, sol)
    bad = [j for j, ok in verdicts if not ok]
    state = "all zero" if not bad else f"NONZERO at {bad}"
    print(f"  residual through order {order - prob.m}: {state}")
    print()


if __name__ == "__main__":
    report("kolmogorov.frac", 6)
    report("burgers_delay.frac", 5)
    # the wave problem carries free parameters; coefficients stay symbolic
    report("klein_gordon.frac", 7)
