"""Numerical tests of the Bessel property for operator orbits ``(A^k x)``.

The orbit of a normal operator ``A`` through ``x`` depends only on the scalar
spectral measure of ``x``; this package works with such measures directly.
"""

from .densexpr import DensityExpr, parse
from .measure import SpectralMeasureSpec, load_spec, loads_spec

__all__ = ["DensityExpr", "parse", "SpectralMeasureSpec", "load_spec", "loads_spec"]
__version__ = "0.1.0"
