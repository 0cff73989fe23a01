"""Heat-semigroup orbit on band-limited functions.

Sampling the heat evolution on the Paley-Wiener space with band [-1/2, 1/2]
at time step ``delta`` gives the operator of multiplication by
``exp(-delta xi^2)`` on the Fourier side.  Its spectral measure for a point
evaluation functional lives on ``[exp(-delta/4), 1]`` with density

    h(t) = 1 / (t sqrt(delta) sqrt(-log t)),

which blows up like ``(1 - t)^(-1/2)`` at ``t = 1``.  The tail
``mu(t > 1 - eps) = (2/sqrt(delta)) sqrt(log 1/(1-eps))`` is not ``O(eps)``,
so the orbit is not a Bessel sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .criteria import DEFAULT_CONFIG, CriteriaConfig, CriterionReport, is_diverging
from .densexpr import parse
from .measure import IntervalDensityComponent, SpectralMeasureSpec, tail_mass
from .quadrature import DEFAULT_TOL, Tolerance, integrate

__all__ = [
    "HeatMeasureParams",
    "heat_measure",
    "heat_tail",
    "heat_moment",
    "heat_moment_closed_form",
    "non_bessel_witness",
]


@dataclass(frozen=True)
class HeatMeasureParams:
    """Time step ``delta``; the sensor index does not affect the measure."""

    delta: float = 1.0
    sensor: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta!r}")

    @property
    def lower(self) -> float:
        return math.exp(-self.delta / 4.0)


def _params(p) -> HeatMeasureParams:
    return p if isinstance(p, HeatMeasureParams) else HeatMeasureParams(float(p))


def heat_measure(params) -> SpectralMeasureSpec:
    """Interval-density measure on ``(exp(-delta/4), 1)``, singular at 1."""
    p = _params(params)
    density = parse(f"1/(t*sqrt({p.delta!r})*sqrt(-log(t)))", {"t"})
    comp = IntervalDensityComponent(p.lower, 1.0, density, frozenset({"upper"}))
    return SpectralMeasureSpec((comp,), name=f"heat(delta={p.delta!r})")


def heat_tail(delta: float, eps: float) -> float:
    """Closed-form ``mu(t > 1 - eps)``."""
    p = _params(delta)
    top = 1.0 - p.lower
    if not 0.0 < eps <= top * (1 + 1e-12):
        raise ValueError(f"eps must lie in (0, {top!r}], got {eps!r}")
    return 2.0 / math.sqrt(p.delta) * math.sqrt(-math.log1p(-min(eps, top)))


def heat_moment_closed_form(delta: float, k: int) -> float:
    """``sqrt(pi/(k delta)) erf(sqrt(k delta)/2)`` (and 1 at k = 0)."""
    if k == 0:
        return 1.0
    a = k * _params(delta).delta
    return math.sqrt(math.pi / a) * math.erf(math.sqrt(a) / 2.0)


def heat_moment(delta: float, k: int, tol: Tolerance = DEFAULT_TOL) -> float:
    """``q_k = int_{-1/2}^{1/2} exp(-k delta xi^2) dxi`` by Fourier-side quadrature."""
    if k < 0 or int(k) != k:
        raise ValueError("k must be a nonnegative integer")
    a = int(k) * _params(delta).delta
    if a == 0:
        return 1.0
    # the Gaussian has width ~ a^-1/2; grade the mesh toward its centre
    width = 1.0 / math.sqrt(a)
    breaks = [0.5 * 2.0**-j for j in range(1, 80) if 0.5 * 2.0**-j > width / 8]
    val = integrate(lambda x: np.exp(-a * x * x)[None, :], 0.0, 0.5, breakpoints=breaks, tol=tol)
    return float(2.0 * val[0])


def non_bessel_witness(delta: float = 1.0, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """Tail-ratio report for the heat measure with the closed form alongside.

    Grid points with ``eps`` beyond the support width are dropped.
    """
    p = _params(delta)
    mu = heat_measure(p)
    top = 1.0 - p.lower
    eps = [math.ldexp(1.0, -m) for m in config.eps_exponents if math.ldexp(1.0, -m) <= top]
    ratios = [tail_mass(mu, e, config.tol) / e for e in eps]
    exact = [heat_tail(p, e) / e for e in eps]
    rel = [abs(a - b) / b for a, b in zip(ratios, exact)]
    div = is_diverging(ratios, config.divergence_window, config.divergence_rate)
    const = float(max(ratios))
    return CriterionReport(
        "tail_ratio_sup", const, "divergent" if div else "grid_estimate", div,
        grid={"eps": eps, "closed_form_ratio": exact, "relative_difference": rel, "delta": p.delta},
        values=list(zip(eps, ratios)),
    )
