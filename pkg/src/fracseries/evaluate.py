"""Numeric evaluation of series solutions, error tables, and export.

Evaluation binds parameters to floats, computes t^(k*alpha) as
exp(k*alpha*ln t) with the t = 0 terms short-circuited, and divides by the
Gamma normalization via gamma_real.  Error tables compare against a
reference: a closed form in x and t, a callable, or a flat list of
tabulated values in grid order (x outer, t inner).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

from .errors import EvalError
from .gammafn import gamma_real
from .problems import ExactSolution
from .solver import SeriesSolution, mittag_leffler_form

Reference = Union[
    ExactSolution,
    Callable[[float, float, Mapping[str, float]], float],
    Sequence[float],
    None,
]


@dataclass(frozen=True)
class EvalGrid:
    """Cartesian evaluation grid with optional alpha override."""

    xs: tuple[float, ...]
    ts: tuple[float, ...]
    alpha: Optional[float] = None
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        xs = tuple(float(v) for v in self.xs)
        ts = tuple(float(v) for v in self.ts)
        if not xs or not ts:
            raise EvalError("evaluation grid must be nonempty")
        for v in xs + ts:
            if not math.isfinite(v):
                raise EvalError("grid values must be finite")
        if any(t < 0 for t in ts):
            raise EvalError("t values must be >= 0")
        if self.alpha is not None and not (0 < float(self.alpha) <= 1):
            raise EvalError("alpha override must lie in (0, 1]")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ts", ts)

    def points(self):
        for xv in self.xs:
            for tv in self.ts:
                yield xv, tv


def _time_power(t: float, e: float) -> float:
    if t == 0.0:
        return 1.0 if e == 0 else 0.0
    return math.exp(e * math.log(t))


def eval_solution(
    sol: SeriesSolution,
    x: float,
    t: float,
    params: Optional[Mapping[str, float]] = None,
    alpha: Optional[float] = None,
) -> float:
    """Value of the truncated series at one point.

    The alpha override only re-weights the time powers t^(k*alpha) and the
    Gamma normalization; the symbolic coefficients keep whatever alpha the
    problem was derived with, so overriding is meaningful for problems whose
    coefficients do not themselves depend on alpha.  For the general case
    re-derive at the desired alpha instead (the command line does exactly
    that).
    """
    if t < 0:
        raise EvalError("t must be >= 0")
    bind = sol.problem.param_floats(params)
    exact_a: Optional[Fraction] = sol.problem.alpha if alpha is None else None
    a = float(sol.problem.alpha) if alpha is None else float(alpha)
    if not (0 < a <= 1):
        raise EvalError("alpha must lie in (0, 1]")
    total = 0.0
    try:
        for k, e in enumerate(sol.coeffs):
            ka = float(k * exact_a) if exact_a is not None else k * a
            term = e.eval(x, bind)
            if term == 0.0:
                continue
            total += term * _time_power(t, ka) / gamma_real(1.0 + ka)
    except OverflowError as exc:
        raise EvalError(f"overflow while evaluating at x={x}, t={t}: {exc}")
    if math.isnan(total) or math.isinf(total):
        raise EvalError(f"evaluation produced {total} at x={x}, t={t}")
    return total


# -- error tables -----------------------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    x: float
    t: float
    approx: float
    reference: Optional[float] = None
    error: Optional[float] = None


@dataclass(frozen=True)
class ErrorTable:
    problem: str
    order: int
    alpha: str  # exact rational, or the float override as printed
    rows: tuple[TableRow, ...]
    has_reference: bool
    reference_desc: Optional[str] = None

    def max_error(self) -> Optional[float]:
        if not self.has_reference or not self.rows:
            return None
        return max(r.error for r in self.rows)


def _resolve_reference(reference: Reference, count: int):
    """Normalize the reference argument to a per-point callable."""
    if reference is None:
        return None, None
    if isinstance(reference, ExactSolution):
        return (lambda x, t, p: reference.eval(x, t, p)), reference.to_source()
    if callable(reference):
        return reference, getattr(reference, "__name__", "callable")
    vals = [float(v) for v in reference]
    if len(vals) != count:
        raise EvalError(
            f"tabulated reference has {len(vals)} values, grid has {count} points"
        )
    it = iter(vals)
    return (lambda x, t, p, _it=it: next(_it)), "tabulated values"


def error_table(
    sol: SeriesSolution,
    reference: Reference,
    grid: EvalGrid,
) -> ErrorTable:
    """Evaluate on the grid and compare against the reference, if any."""
    pts = list(grid.points())
    ref_fn, ref_desc = _resolve_reference(reference, len(pts))
    bind = sol.problem.param_floats(grid.params)
    rows = []
    for xv, tv in pts:
        approx = eval_solution(sol, xv, tv, params=bind, alpha=grid.alpha)
        if ref_fn is None:
            rows.append(TableRow(xv, tv, approx))
        else:
            refv = float(ref_fn(xv, tv, bind))
            rows.append(TableRow(xv, tv, approx, refv, abs(approx - refv)))
    alpha_txt = str(sol.problem.alpha) if grid.alpha is None else _fmt(grid.alpha)
    return ErrorTable(
        problem=sol.problem.name,
        order=sol.order,
        alpha=alpha_txt,
        rows=tuple(rows),
        has_reference=ref_fn is not None,
        reference_desc=ref_desc,
    )


# -- export -----------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _table_columns(table: ErrorTable) -> list[str]:
    cols = ["x", "t", "approx"]
    if table.has_reference:
        cols += ["reference", "abs_error"]
    return cols


def _row_values(row: TableRow, has_reference: bool) -> list[float]:
    vals = [row.x, row.t, row.approx]
    if has_reference:
        vals += [row.reference, row.error]
    return vals


def _export_table(table: ErrorTable, fmt: str) -> str:
    cols = _table_columns(table)
    if fmt == "csv":
        lines = [",".join(cols)]
        for r in table.rows:
            lines.append(",".join(_fmt(v) for v in _row_values(r, table.has_reference)))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = {
            "problem": table.problem,
            "order": table.order,
            "alpha": table.alpha,
            "reference": table.reference_desc,
            "columns": cols,
            "rows": [
                [float(_fmt(v)) for v in _row_values(r, table.has_reference)]
                for r in table.rows
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "pretty":
        head = (
            f"problem: {table.problem}   order K = {table.order}   "
            f"alpha = {table.alpha}"
        )
        if table.reference_desc:
            head += f"   reference: {table.reference_desc}"
        cells = [cols] + [
            [_short(v) for v in _row_values(r, table.has_reference)]
            for r in table.rows
        ]
        widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
        lines = [head, ""]
        for row in cells:
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        return "\n".join(lines) + "\n"
    raise EvalError(f"unknown export format '{fmt}'")


def _short(v: float) -> str:
    return format(float(v), ".6g")


def _export_coeffs(sol: SeriesSolution, fmt: str) -> str:
    if fmt == "csv":
        lines = ["k,coefficient"]
        for k, e in enumerate(sol.coeffs):
            src = e.to_source()
            if "," in src or '"' in src:
                src = '"' + src.replace('"', '""') + '"'
            lines.append(f"{k},{src}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = {
            "problem": sol.problem.name,
            "alpha": str(sol.problem.alpha),
            "order": sol.order,
            "coefficients": [e.to_source() for e in sol.coeffs],
            "closed_form": mittag_leffler_form(sol),
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "pretty":
        lines = [
            f"coeff[{k}](x) = {e.pretty()}" for k, e in enumerate(sol.coeffs)
        ]
        tag = mittag_leffler_form(sol)
        if tag:
            lines.append(f"closed form: {tag}")
        return "\n".join(lines) + "\n"
    raise EvalError(f"unknown export format '{fmt}'")


def export(obj: Union[ErrorTable, SeriesSolution], fmt: str = "pretty") -> str:
    """Serialize a table or a coefficient list; deterministic output."""
    if isinstance(obj, ErrorTable):
        return _export_table(obj, fmt)
    if isinstance(obj, SeriesSolution):
        return _export_coeffs(obj, fmt)
    raise EvalError(f"cannot export {type(obj).__name__}")


def read_table_csv(text: str) -> tuple[list[str], list[list[float]]]:
    """Inverse of the CSV table export (column names, float rows)."""
    import csv as _csv
    import io

    rows = list(_csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise EvalError("empty CSV")
    header, data = rows[0], rows[1:]
    return header, [[float(v) for v in r] for r in data]
