"""Composite Gauss-Legendre quadrature with adaptive bisection.

All integrators here are *family* integrators: the integrand maps a 1-D array
of nodes ``x`` (shape ``(p,)``) to an array of shape ``(..., p)`` and the
result has shape ``(...)``.  A panel is accepted only when every member of
the family meets its tolerance, so one adaptive pass serves e.g. all moments
of a measure at once.

Endpoint singularities of the form ``|x - c|^(-alpha)`` (``alpha < 1``) are
handled with a geometrically graded mesh down to a floor distance, plus a
power-law model for the innermost piece.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerance",
    "QuadratureError",
    "DivergentIntegralError",
    "gauss_legendre",
    "integrate",
    "graded_breakpoints",
]


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


class DivergentIntegralError(QuadratureError):
    """The integrand is not integrable at a flagged endpoint."""


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative quadrature tolerances (defaults 1e-10 / 1e-9)."""

    atol: float = 1e-10
    rtol: float = 1e-9
    order: int = 20
    max_panels: int = 200_000

    def scaled(self, factor: float) -> "Tolerance":
        return Tolerance(self.atol * factor, self.rtol, self.order, self.max_panels)


DEFAULT_TOL = Tolerance()

# Distance from a singular endpoint below which the power-law model takes over.
# Chosen so that node positions are still resolved to ~1e-5 relative in double
# precision when the endpoint has magnitude ~1.
SINGULAR_FLOOR = 2.0**-36


@functools.lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def graded_breakpoints(a: float, b: float, toward: str, floor: float) -> list[float]:
    """Geometric mesh on [a, b] refining toward ``toward`` ('a' or 'b').

    Panel widths halve down to ``floor``; the returned points include both
    ends, and the distance of the innermost breakpoint from the endpoint is
    ``<= floor``.
    """
    length = b - a
    pts = []
    d = length / 2
    while d > floor:
        pts.append(d)
        d /= 2
    pts.append(d)
    if toward == "b":
        inner = [b - s for s in pts]
        return sorted({a, b, *inner})
    inner = [a + s for s in pts]
    return sorted({a, b, *inner})


def _panel_rule(lo: np.ndarray, hi: np.ndarray, order: int):
    """Nodes (flattened) and weights (per panel) for GL on each panel."""
    x, w = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes, weights


def _apply(fn, lo, hi, order):
    """Integrate ``fn`` on each panel; returns array (..., npanels)."""
    nodes, weights = _panel_rule(lo, hi, order)
    vals = np.asarray(fn(nodes.ravel()))
    vals = vals.reshape(vals.shape[:-1] + nodes.shape)
    return np.einsum("...pk,pk->...p", vals, weights)


def _adaptive(fn, edges: np.ndarray, tol: Tolerance, length: float):
    lo = edges[:-1].astype(float)
    hi = edges[1:].astype(float)
    whole = _apply(fn, lo, hi, tol.order)
    done_lo, done_val = [], []
    n_total = len(lo)
    while len(lo):
        mid = 0.5 * (lo + hi)
        both = _apply(fn, np.concatenate([lo, mid]), np.concatenate([mid, hi]), tol.order)
        left, right = both[..., : len(lo)], both[..., len(lo) :]
        refined = left + right
        err = np.abs(refined - whole)
        width = hi - lo
        limit = np.maximum(tol.atol * width / length, tol.rtol * np.abs(refined))
        # node positions carry absolute rounding ~eps*|x|; for panels that are
        # narrow relative to their location this bounds attainable accuracy
        scale = np.maximum(np.abs(lo), np.abs(hi))
        noise = 16 * np.finfo(float).eps * (scale / width) * np.abs(refined)
        limit = np.maximum(limit, noise)
        ok = np.all(err <= limit, axis=tuple(range(err.ndim - 1)))
        # panels at machine resolution cannot be split further
        tiny = width <= 64 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi)).clip(min=1e-300)
        if np.any(tiny & ~ok):
            bad = np.argmax(tiny & ~ok)
            raise QuadratureError(
                f"quadrature did not converge near x={lo[bad]!r} "
                f"(error {float(np.max(err[..., bad])):.3g})"
            )
        done_lo.append(lo[ok])
        done_val.append(refined[..., ok])
        keep = ~ok
        n_total += int(keep.sum())
        if n_total > tol.max_panels:
            raise QuadratureError(f"quadrature exceeded {tol.max_panels} panels")
        lo, hi, mid = lo[keep], hi[keep], mid[keep]
        whole = np.concatenate([left[..., keep], right[..., keep]], axis=-1)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    all_lo = np.concatenate(done_lo)
    vals = np.concatenate(done_val, axis=-1)
    order = np.argsort(all_lo, kind="stable")
    return np.sum(vals[..., order], axis=-1)


def _endpoint_piece(fn, c: float, d: float, sign: int):
    """Power-law model of the integral over the distance-``d`` piece at ``c``.

    ``sign=+1`` means the piece is [c - d, c]; ``-1`` means [c, c + d].
    """
    x = np.array([c - sign * d, c - sign * d / 2])
    vals = np.asarray(fn(x))
    f1, f2 = vals[..., 0], vals[..., 1]
    m1, m2 = np.abs(f1), np.abs(f2)
    out = np.zeros(np.shape(f1), dtype=np.result_type(f1, float))
    nz = (m1 > 0) & (m2 > 0)
    alpha = np.zeros(np.shape(f1))
    alpha[nz] = np.log2(m2[nz] / m1[nz])
    if np.any(alpha >= 1.0 - 1e-3):
        raise DivergentIntegralError(
            f"integrand behaves like |x - {c!r}|^(-{float(np.max(alpha)):.3g}) at the endpoint"
        )
    out[nz] = f1[nz] * d / (1.0 - alpha[nz])
    # one of the two samples vanishing: fall back to a trapezoid estimate
    mixed = ~nz
    out[mixed] = 0.5 * (f1[mixed] + f2[mixed]) * d
    return out


def integrate(fn, a: float, b: float, *, breakpoints=(), singular=(), tol: Tolerance = DEFAULT_TOL):
    """Integrate a vectorised family ``fn`` over [a, b].

    Parameters
    ----------
    fn : callable
        ``fn(x)`` with ``x`` of shape ``(p,)`` returns shape ``(..., p)``.
    breakpoints : iterable of float
        Interior points where the integrand is known to be non-smooth or
        peaked.  Points outside (a, b) are ignored.
    singular : iterable of {'a', 'b'}
        Endpoints carrying an integrable power singularity.
    """
    a, b = float(a), float(b)
    if not b > a:
        if b == a:
            probe = np.asarray(fn(np.array([a])))
            return np.zeros(probe.shape[:-1], dtype=probe.dtype)
        raise ValueError("integration bounds must satisfy a <= b")
    singular = set(singular)
    length = b - a
    floor = min(SINGULAR_FLOOR * max(1.0, abs(a), abs(b)), length / 16)
    lo_cut, hi_cut = a, b
    pieces = []
    if "a" in singular:
        lo_cut = a + floor
        pieces.append(("a", floor))
    if "b" in singular:
        hi_cut = b - floor
        pieces.append(("b", floor))
    edges = {lo_cut, hi_cut}
    edges.update(p for p in breakpoints if lo_cut < p < hi_cut)
    span = hi_cut - lo_cut
    for end, _ in pieces:
        if end == "a":
            side = graded_breakpoints(lo_cut, lo_cut + span / 2, "a", floor)
        else:
            side = graded_breakpoints(hi_cut - span / 2, hi_cut, "b", floor)
        edges.update(side)
    edges = np.array(sorted(edges))
    total = _adaptive(fn, edges, tol, length)
    for end, d in pieces:
        if end == "a":
            total = total + _endpoint_piece(fn, a, d, -1)
        else:
            total = total + _endpoint_piece(fn, b, d, +1)
    return total


def integrate_scalar(fn, a, b, **kw) -> float:
    """Convenience wrapper for a single scalar integrand."""
    out = integrate(lambda x: np.asarray(fn(x))[None, :], a, b, **kw)
    val = out[0]
    return complex(val) if np.iscomplexobj(val) else float(val)


def geometric_grid(exponents, base: float = 2.0) -> np.ndarray:
    """``base**-m`` for each m, as floats."""
    return np.array([math.ldexp(1.0, -int(m)) if base == 2.0 else base ** -m for m in exponents])
