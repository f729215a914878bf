"""Two ways to vary the fractional order alpha.

1. Re-derive the coefficients at another rational alpha.  This is the
   faithful route and is what the CLI's --alpha flag does; the delay
   problem's coefficients genuinely depend on alpha, so nothing less works.

2. For problems whose coefficients happen to be alpha-free (the
   drift-diffusion file: every coefficient is x + 1), the numeric layer can
   sweep real-valued alpha directly in eval_solution without re-solving.
   The series becomes (x+1) * sum t^(k*alpha)/Gamma(1+k*alpha), the partial
   sum of a Mittag-Leffler profile.

    python3 demos/alpha_sweep.py
"""

import math
import pathlib
import sys
from dataclasses import replace
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from fracseries import eval_solution, parse_problem_file, solve

PROBLEMS = pathlib.Path(__file__).resolve().parent.parent / "problems"


def rational_sweep():
    prob = parse_problem_file(PROBLEMS / "burgers_delay.frac")
    print("delay problem, coefficient of t^(2 alpha) as alpha varies:")
    for a in (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(1)):
        sol = solve(replace(prob, alpha=a), 3)
        print(f"  alpha = {a}:  coeff[2](x) = {sol.coeff(2).pretty()}")
    print()


def real_sweep():
    prob = parse_problem_file(PROBLEMS / "kolmogorov.frac")
    sol = solve(prob, 8)
    x, t = 0.5, 0.8
    print(f"drift-diffusion at (x, t) = ({x}, {t}), alpha-free coefficients:")
    for a in (0.6, 0.7, 0.8, 0.9, 1.0):
        v = eval_solution(sol, x, t, alpha=a)
        print(f"  alpha = {a:.1f}:  u = {v:.12f}")
    print(f"  alpha -> 1 target (x+1)*e^t = {(x + 1) * math.exp(t):.12f}")


if __name__ == "__main__":
    rational_sweep()
    real_sweep()
