"""Truncation-error table for the delay problem at alpha = 1.

The file's `exact` line gives x*exp(t); at alpha = 1 every computed
coefficient is x, so the K = 5 partial sum is x times the degree-5 Taylor
polynomial of e^t and the error column below is the pure truncation tail.

    python3 demos/error_table.py            # aligned text
    python3 demos/error_table.py csv        # machine-readable
"""

import pathlib
import sys
from dataclasses import replace
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from fracseries import EvalGrid, error_table, export, parse_problem_file, solve

PROBLEMS = pathlib.Path(__file__).resolve().parent.parent / "problems"


def main(fmt):
    prob = parse_problem_file(PROBLEMS / "burgers_delay.frac")
    prob = replace(prob, alpha=Fraction(1))
    sol = solve(prob, 5)
    grid = EvalGrid(xs=(0.25, 0.5, 0.75), ts=(0.25, 0.5, 0.75, 1.0))
    table = error_table(sol, prob.exact, grid)
    print(export(table, fmt))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "pretty")
