"""Real gamma function for the numeric layer.

Lanczos approximation with g = 7 and the classic 9-term coefficient set.
Accuracy target: relative error below 1e-12 on (0, 60]; integer arguments
up to 20 go through math.factorial and are exact to the float rounding of
the true factorial.
"""

from __future__ import annotations

import math

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_real(r: float) -> float:
    """Gamma(r) for real r > 0."""
    r = float(r)
    if math.isnan(r) or r <= 0.0:
        raise ValueError(f"gamma_real requires r > 0, got {r!r}")
    if r.is_integer() and r <= 20.0:
        return float(math.factorial(int(r) - 1))
    if r < 0.5:
        # one recurrence step keeps the Lanczos core on z >= -0.5
        return gamma_real(r + 1.0) / r
    z = r - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc
