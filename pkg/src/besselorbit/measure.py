"""Finite positive Borel measures on the complex plane, built from components.

A :class:`SpectralMeasureSpec` is a list of components of four kinds:

``atoms``
    point masses at complex locations;
``circle``
    ``f(theta) dtheta / (2 pi)`` on the unit circle.  The arc measure is
    *normalised* (total arc length 1), so ``f == 1`` has mass 1 and the
    Lipschitz constant with respect to arc length is ``ess sup f``;
``interval``
    ``f(t) dt`` on a real interval, optionally with an integrable power
    singularity flagged at either endpoint;
``disk``
    ``g(r, theta) r dr dtheta`` on ``{|z| < r_max}``, ``r_max <= 1``.

Every integral is linear in the measure, so the measure-level functions below
sum component contributions.  Densities are evaluated through
:mod:`besselorbit.densexpr`; negative values are rejected, never clipped.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, Union

import numpy as np

from . import densexpr
from .densexpr import DensityExpr
from .quadrature import (
    DEFAULT_TOL,
    QuadratureError,
    Tolerance,
    gauss_legendre,
    integrate,
)

__all__ = [
    "AtomicComponent",
    "CircleDensityComponent",
    "IntervalDensityComponent",
    "DiskDensityComponent",
    "SpectralMeasureSpec",
    "MeasureError",
    "SpecError",
    "SingularIntegrandError",
    "ON_CIRCLE_TOL",
    "total_mass",
    "moment",
    "tail_mass",
    "ball_mass",
    "ball_masses",
    "support_radius",
    "resolvent_norm_sq",
    "resolvent_norms_sq",
    "poisson_integral",
    "stieltjes_inversion",
    "integrate_measure",
    "load_spec",
    "loads_spec",
    "dump_spec",
]

TWO_PI = 2.0 * math.pi
ON_CIRCLE_TOL = 1e-12
REAL_TOL = 1e-12
# angular quadrature for disk components with smooth integrands
DISK_THETA_POINTS = 256
MAX_FFT_POINTS = 2**22


class MeasureError(ValueError):
    """Ill-formed measure or an operation outside its domain."""


class SpecError(MeasureError):
    """Malformed measure-spec document; ``index`` names the component."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        prefix = f"component {index}: " if index is not None else ""
        super().__init__(prefix + message)


class SingularIntegrandError(MeasureError):
    """The evaluation point lies on (or numerically at) the support."""


def _check_nonneg(vals, what: str):
    if np.any(vals < 0):
        i = int(np.argmax(np.asarray(vals) < 0))
        raise MeasureError(f"{what} density is negative ({float(np.ravel(vals)[i])!r})")
    return vals


def _wrap(theta):
    return np.mod(theta, TWO_PI)


def _graded_angles(scale: float) -> list[float]:
    """Breakpoints on [-pi, pi] refining geometrically toward 0 down to ``scale``."""
    pts = [0.0]
    s = max(scale, 1e-15)
    d = math.pi / 2
    while d > s / 4:
        pts += [-d, d]
        d /= 2
    pts += [-d, d]
    return sorted(set(pts))


def _composite_gl(breaks: Sequence[float], order: int):
    x, w = gauss_legendre(order)
    b = np.asarray(breaks, dtype=float)
    half = 0.5 * np.diff(b)
    mid = 0.5 * (b[1:] + b[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


# --- components ------------------------------------------------------------


@dataclass(frozen=True)
class AtomicComponent:
    """Point masses ``sum_i m_i delta_{z_i}``."""

    locations: tuple[complex, ...]
    masses: tuple[float, ...]

    kind = "atoms"

    def __post_init__(self):
        locs = tuple(complex(z) for z in self.locations)
        ms = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "masses", ms)
        if len(locs) != len(ms):
            raise MeasureError("atoms: locations and masses differ in length")
        for z, m in zip(locs, ms):
            if not (math.isfinite(m) and m >= 0):
                raise MeasureError(f"atoms: mass {m!r} must be finite and >= 0")
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise MeasureError(f"atoms: location {z!r} is not finite")
        if len(set(locs)) != len(locs):
            raise MeasureError("atoms: locations must be pairwise distinct")

    @property
    def z(self) -> np.ndarray:
        return np.array(self.locations, dtype=complex)

    @property
    def m(self) -> np.ndarray:
        return np.array(self.masses, dtype=float)

    def _select(self, mask) -> "AtomicComponent":
        mask = np.asarray(mask, dtype=bool)
        return AtomicComponent(tuple(self.z[mask]), tuple(self.m[mask]))

    def on_circle(self) -> "AtomicComponent":
        return self._select(np.abs(np.abs(self.z) - 1.0) <= ON_CIRCLE_TOL)

    def off_circle(self) -> "AtomicComponent":
        return self._select(np.abs(np.abs(self.z) - 1.0) > ON_CIRCLE_TOL)

    def conjugate(self) -> "AtomicComponent":
        return AtomicComponent(tuple(np.conj(self.z)), self.masses)

    def scaled(self, s: float) -> "AtomicComponent":
        return AtomicComponent(self.locations, tuple(s * self.m))

    # geometry
    def support_radius(self) -> float:
        pos = self.m > 0
        return float(np.max(np.abs(self.z[pos]))) if np.any(pos) else 0.0

    def circle_supported(self) -> bool:
        pos = self.m > 0
        return bool(np.all(np.abs(np.abs(self.z[pos]) - 1.0) <= ON_CIRCLE_TOL))

    def real_supported(self) -> bool:
        pos = self.m > 0
        return bool(np.all(np.abs(self.z[pos].imag) <= REAL_TOL))

    # integrals
    def mass(self, tol=DEFAULT_TOL) -> float:
        return math.fsum(self.masses)

    def integrate(self, fn, tol=DEFAULT_TOL):
        if not self.locations:
            return np.asarray(fn(np.array([0j])))[..., 0] * 0
        return np.asarray(fn(self.z)) @ self.m

    def moment(self, k: int, j: int, tol=DEFAULT_TOL) -> complex:
        z = self.z
        return complex(np.sum(self.m * z**k * np.conj(z) ** j))

    def moment_matrix(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        V = np.vander(self.z, n, increasing=True) if self.locations else np.zeros((0, n))
        return (V.conj().T * self.m) @ V

    def toeplitz_coefficients(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        V = np.vander(self.z, n, increasing=True) if self.locations else np.zeros((0, n))
        return self.m @ V

    def hankel_coefficients(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        t = self.z.real
        V = np.vander(t, 2 * n - 1, increasing=True) if self.locations else np.zeros((0, 2 * n - 1))
        return self.m @ V

    def tail_mass(self, eps: float, tol=DEFAULT_TOL) -> float:
        return math.fsum(self.m[np.abs(self.z) > 1.0 - eps])

    def ball_masses(self, angles, r: float, tol=DEFAULT_TOL) -> np.ndarray:
        centers = np.exp(1j * np.asarray(angles, dtype=float))
        if not self.locations:
            return np.zeros(len(centers))
        # only the part of the ball inside the closed unit disc counts
        in_disc = np.abs(self.z) <= 1.0 + ON_CIRCLE_TOL
        inside = (np.abs(self.z[None, :] - centers[:, None]) < r) & in_disc[None, :]
        return inside.astype(float) @ self.m

    def peaked(self, kernel, modulus: float, angles, tol=DEFAULT_TOL) -> np.ndarray:
        """``sum_i m_i kernel(z_i)`` for a kernel family of C rows."""
        C = len(np.atleast_1d(angles))
        if not self.locations:
            return np.zeros(C)
        return np.asarray(kernel(np.broadcast_to(self.z, (C, len(self.z))))) @ self.m

    def resolvent_sq(self, modulus: float, angles, tol=DEFAULT_TOL) -> np.ndarray:
        lam = modulus * np.exp(1j * np.asarray(angles, dtype=float))
        if not self.locations:
            return np.zeros(len(lam))
        d2 = np.abs(self.z[None, :] - lam[:, None]) ** 2
        pos = self.m > 0
        if np.any(d2[:, pos] < 1e-28):
            raise SingularIntegrandError("resolvent evaluated at an atom")
        with np.errstate(divide="ignore"):
            return np.where(pos[None, :], self.m[None, :] / np.where(d2 == 0, 1, d2), 0).sum(axis=1)


@dataclass(frozen=True)
class CircleDensityComponent:
    """``f(theta) dtheta / (2 pi)`` on the unit circle.

    ``sup`` optionally declares a known ``ess sup f`` (makes the unitary
    Lipschitz bound certified rather than estimated).
    """

    density: DensityExpr
    sup: float | None = None
    reflected: bool = False

    kind = "circle"

    def f(self, theta) -> np.ndarray:
        th = _wrap(-np.asarray(theta) if self.reflected else np.asarray(theta))
        vals = np.broadcast_to(np.asarray(self.density.eval({"theta": th}), dtype=float), th.shape)
        return _check_nonneg(vals, "circle")

    def conjugate(self) -> "CircleDensityComponent":
        return replace(self, reflected=not self.reflected)

    def scaled(self, s: float) -> "CircleDensityComponent":
        expr = densexpr.parse(f"{s!r}*({self.density.source})", self.density.variables)
        return replace(self, density=expr, sup=None if self.sup is None else s * self.sup)

    def support_radius(self) -> float:
        return 1.0

    def circle_supported(self) -> bool:
        return True

    def real_supported(self) -> bool:
        return False

    def integrate(self, fn, tol=DEFAULT_TOL, breakpoints=()):
        def g(theta):
            return np.asarray(fn(np.exp(1j * theta))) * self.f(theta) / TWO_PI

        return integrate(g, 0.0, TWO_PI, breakpoints=breakpoints, tol=tol)

    def mass(self, tol=DEFAULT_TOL) -> float:
        return float(self.integrate(lambda z: np.ones((1, len(z))), tol)[0])

    def fourier(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        """``c_m = int z^m d mu`` for m = 0..n-1 by the periodic trapezoid rule.

        The sample count doubles until two successive estimates agree.
        """
        M = max(256, 1 << (4 * n - 1).bit_length())
        prev = None
        while M <= MAX_FFT_POINTS:
            theta = TWO_PI * np.arange(M) / M
            c = np.fft.ifft(self.f(theta))[:n]
            if prev is not None:
                scale = max(float(np.max(np.abs(c))), 1e-300)
                if np.max(np.abs(c - prev)) <= tol.atol + tol.rtol * scale:
                    return c
            prev = c
            M *= 2
        raise QuadratureError(f"circle Fourier coefficients did not converge with {MAX_FFT_POINTS} samples")

    def moment(self, k: int, j: int, tol=DEFAULT_TOL) -> complex:
        d = k - j
        out = self.integrate(lambda z: (z**d if d >= 0 else np.conj(z) ** (-d))[None, :], tol)
        return complex(out[0])

    def moment_matrix(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        return _toeplitz_dense(self.fourier(n, tol))

    def toeplitz_coefficients(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        return self.fourier(n, tol)

    def tail_mass(self, eps: float, tol=DEFAULT_TOL) -> float:
        return self.mass(tol)

    def arc_mass(self, alpha: float, beta: float, tol=DEFAULT_TOL) -> float:
        g = lambda th: (self.f(th) / TWO_PI)[None, :]
        return float(integrate(g, alpha, beta, tol=tol)[0])

    def ball_masses(self, angles, r: float, tol=DEFAULT_TOL) -> np.ndarray:
        angles = np.asarray(angles, dtype=float)
        if r >= 2.0:
            return np.full(len(angles), self.mass(tol))
        half = 2.0 * math.asin(r / 2.0)

        def g(u):
            th = angles[:, None] + half * u[None, :]
            return self.f(th) * half / TWO_PI

        return integrate(g, -1.0, 1.0, tol=tol)

    def peaked(self, kernel, modulus: float, angles, tol=DEFAULT_TOL) -> np.ndarray:
        """``int kernel(z) f dtheta/2pi`` for kernels peaked at ``angles``.

        ``kernel`` maps z of shape (C, P) to (C, P); each row is peaked near
        ``exp(i*angles[c])`` with width ~ ``|1 - modulus|``.
        """
        angles = np.asarray(angles, dtype=float)
        breaks = _graded_angles(abs(1.0 - modulus))

        def g(phi):
            th = angles[:, None] + phi[None, :]
            return kernel(np.exp(1j * th)) * self.f(th) / TWO_PI

        return integrate(g, -math.pi, math.pi, breakpoints=breaks, tol=tol)

    def resolvent_sq(self, modulus: float, angles, tol=DEFAULT_TOL) -> np.ndarray:
        if abs(modulus - 1.0) < 1e-14:
            raise SingularIntegrandError("resolvent of a circle component needs |lambda| != 1")
        lam = modulus * np.exp(1j * np.asarray(angles, dtype=float))
        return self.peaked(lambda z: 1.0 / np.abs(z - lam[:, None]) ** 2, modulus, angles, tol)


@dataclass(frozen=True)
class IntervalDensityComponent:
    """``f(t) dt`` on ``[lower, upper]``; ``singular`` flags endpoint blow-up."""

    lower: float
    upper: float
    density: DensityExpr
    singular: frozenset = frozenset()

    kind = "interval"

    def __post_init__(self):
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        object.__setattr__(self, "singular", frozenset(self.singular))
        if not (math.isfinite(self.lower) and math.isfinite(self.upper) and self.lower < self.upper):
            raise MeasureError(f"interval: need finite lower < upper, got [{self.lower}, {self.upper}]")
        if not self.singular <= {"lower", "upper"}:
            raise MeasureError(f"interval: singular flags must be 'lower'/'upper', got {sorted(self.singular)}")

    def f(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        vals = np.broadcast_to(np.asarray(self.density.eval({"t": t}), dtype=float), t.shape)
        return _check_nonneg(vals, "interval")

    def conjugate(self) -> "IntervalDensityComponent":
        return self

    def scaled(self, s: float) -> "IntervalDensityComponent":
        expr = densexpr.parse(f"{s!r}*({self.density.source})", self.density.variables)
        return replace(self, density=expr)

    def support_radius(self) -> float:
        return max(abs(self.lower), abs(self.upper))

    def circle_supported(self) -> bool:
        return False

    def real_supported(self) -> bool:
        return True

    def integrate_t(self, fn, lo=-math.inf, hi=math.inf, tol=DEFAULT_TOL, breakpoints=()):
        """``int_{[lo,hi] ∩ support} fn(t) f(t) dt`` with fn on real nodes."""
        a, b = max(lo, self.lower), min(hi, self.upper)
        if not a < b:
            probe = np.asarray(fn(np.array([self.lower])))
            return np.zeros(probe.shape[:-1], dtype=probe.dtype)
        sing = set()
        if "lower" in self.singular and a == self.lower:
            sing.add("a")
        if "upper" in self.singular and b == self.upper:
            sing.add("b")
        return integrate(lambda t: np.asarray(fn(t)) * self.f(t), a, b,
                         breakpoints=breakpoints, singular=sing, tol=tol)

    def integrate(self, fn, tol=DEFAULT_TOL, breakpoints=()):
        return self.integrate_t(lambda t: fn(t.astype(complex)), tol=tol, breakpoints=breakpoints)

    def mass(self, tol=DEFAULT_TOL) -> float:
        return float(self.integrate_t(lambda t: np.ones((1, len(t))), tol=tol)[0])

    def hankel_coefficients(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        return self.power_moments(2 * n - 1, tol)

    def power_moments(self, count: int, tol=DEFAULT_TOL) -> np.ndarray:
        """``q_m = int t^m f(t) dt`` for m = 0..count-1 in one adaptive pass."""
        ks = np.arange(count)
        return self.integrate_t(lambda t: t[None, :] ** ks[:, None], tol=tol)

    def moment(self, k: int, j: int, tol=DEFAULT_TOL) -> complex:
        p = k + j
        return complex(self.integrate_t(lambda t: (t**p)[None, :], tol=tol)[0])

    def moment_matrix(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        q = self.hankel_coefficients(n, tol)
        idx = np.add.outer(np.arange(n), np.arange(n))
        return q[idx].astype(complex)

    def tail_mass(self, eps: float, tol=DEFAULT_TOL) -> float:
        c = 1.0 - eps
        one = lambda t: np.ones((1, len(t)))
        hi = self.integrate_t(one, lo=c, tol=tol)[0] if self.upper > c else 0.0
        lo = self.integrate_t(one, hi=-c, tol=tol)[0] if self.lower < -c else 0.0
        return float(hi + lo)

    def ball_masses(self, angles, r: float, tol=DEFAULT_TOL) -> np.ndarray:
        out = np.zeros(len(angles))
        for i, ang in enumerate(np.asarray(angles, dtype=float)):
            x0, y0 = math.cos(ang), math.sin(ang)
            if abs(y0) >= r:
                continue
            w = math.sqrt(r * r - y0 * y0)
            out[i] = self.integrate_t(lambda t: np.ones((1, len(t))), lo=max(x0 - w, -1.0),
                                       hi=min(x0 + w, 1.0), tol=tol)[0]
        return out

    def peaked(self, kernel, modulus: float, angles, tol=DEFAULT_TOL) -> np.ndarray:
        """``int kernel(t) f(t) dt`` for kernel rows peaked at ``modulus*e^{i angle}``.

        ``kernel`` maps real nodes broadcast to shape (C, P) to (C, P).
        """
        lam = modulus * np.exp(1j * np.asarray(angles, dtype=float))
        on_segment = (np.abs(lam.imag) < 1e-14) & (lam.real >= self.lower) & (lam.real <= self.upper)
        if np.any(on_segment):
            raise SingularIntegrandError("kernel peak lies on the interval support")
        near = lam.real[(np.abs(lam.imag) < 0.25)]
        C = len(lam)
        return self.integrate_t(lambda t: kernel(np.broadcast_to(t.astype(complex), (C, len(t)))),
                                tol=tol, breakpoints=tuple(near))

    def resolvent_sq(self, modulus: float, angles, tol=DEFAULT_TOL) -> np.ndarray:
        lam = modulus * np.exp(1j * np.asarray(angles, dtype=float))
        return self.peaked(lambda z: 1.0 / np.abs(z - lam[:, None]) ** 2, modulus, angles, tol)


@dataclass(frozen=True)
class DiskDensityComponent:
    """``g(r, theta) r dr dtheta`` on ``{|z| < r_max}``."""

    density: DensityExpr
    r_max: float = 1.0
    reflected: bool = False

    kind = "disk"

    def __post_init__(self):
        object.__setattr__(self, "r_max", float(self.r_max))
        if not 0.0 < self.r_max <= 1.0:
            raise MeasureError(f"disk: r_max must lie in (0, 1], got {self.r_max}")

    def g(self, r, theta) -> np.ndarray:
        th = _wrap(-np.asarray(theta) if self.reflected else np.asarray(theta))
        r = np.asarray(r, dtype=float)
        shape = np.broadcast_shapes(r.shape, th.shape)
        vals = np.broadcast_to(np.asarray(self.density.eval({"r": r, "theta": th}), dtype=float), shape)
        return _check_nonneg(vals, "disk")

    def conjugate(self) -> "DiskDensityComponent":
        return replace(self, reflected=not self.reflected)

    def scaled(self, s: float) -> "DiskDensityComponent":
        expr = densexpr.parse(f"{s!r}*({self.density.source})", self.density.variables)
        return replace(self, density=expr)

    def support_radius(self) -> float:
        return self.r_max

    def circle_supported(self) -> bool:
        return False

    def real_supported(self) -> bool:
        return False

    def _radial(self, inner, lo=0.0, hi=None, tol=DEFAULT_TOL, singular_outer=False, breakpoints=()):
        hi = self.r_max if hi is None else min(hi, self.r_max)
        lo = max(lo, 0.0)
        if not lo < hi:
            probe = np.asarray(inner(np.array([0.5 * self.r_max])))
            return np.zeros(probe.shape[:-1], dtype=probe.dtype)
        sing = {"b"} if singular_outer and hi == self.r_max else set()
        return integrate(inner, lo, hi, breakpoints=breakpoints, singular=sing, tol=tol)

    def integrate(self, fn, tol=DEFAULT_TOL, lo=0.0, hi=None, singular_outer=False, breakpoints=()):
        """Smooth integrands: periodic trapezoid in theta, adaptive in r."""
        M = DISK_THETA_POINTS
        theta = TWO_PI * np.arange(M) / M

        def inner(r):
            out = []
            for chunk in np.array_split(r, max(1, len(r) // 256)):
                z = chunk[:, None] * np.exp(1j * theta)[None, :]
                vals = np.asarray(fn(z.ravel()))
                vals = vals.reshape(vals.shape[:-1] + z.shape)
                gv = self.g(chunk[:, None], theta[None, :])
                out.append((vals * gv).sum(axis=-1) * (TWO_PI / M) * chunk)
            return np.concatenate(out, axis=-1)

        return self._radial(inner, lo, hi, tol, singular_outer, breakpoints)

    def mass(self, tol=DEFAULT_TOL) -> float:
        return float(self.integrate(lambda z: np.ones((1, len(z))), tol)[0].real)

    def moment(self, k: int, j: int, tol=DEFAULT_TOL) -> complex:
        fn = lambda z: (z**k * np.conj(z) ** j)[None, :]
        return complex(self.integrate(fn, tol)[0])

    def moment_matrix(self, n: int, tol=DEFAULT_TOL) -> np.ndarray:
        M = max(DISK_THETA_POINTS, 1 << (4 * n).bit_length())
        theta = TWO_PI * np.arange(M) / M
        kk, jj = np.meshgrid(np.arange(n), np.arange(n))  # G[j][k]
        p = (kk + jj).ravel()
        d = (kk - jj).ravel()

        def inner(r):
            gv = self.g(r[:, None], theta[None, :])
            # ghat[:, m] = int g e^{i m theta} dtheta, m taken mod M
            ghat = np.fft.ifft(gv, axis=1) * TWO_PI
            coef = ghat[:, np.mod(d, M)]  # (Q, n*n)
            return (coef * r[:, None] ** (p[None, :] + 1)).T

        vals = self._radial(inner, tol=tol)
        return vals.reshape(n, n)

    def tail_mass(self, eps: float, tol=DEFAULT_TOL) -> float:
        return float(self.integrate(lambda z: np.ones((1, len(z))), tol, lo=1.0 - eps)[0].real)

    def ball_masses(self, angles, r: float, tol=DEFAULT_TOL) -> np.ndarray:
        angles = np.asarray(angles, dtype=float)
        u, wu = _composite_gl(np.linspace(-1, 1, 5), 16)

        def inner(rho):
            cosb = (rho**2 + 1.0 - r * r) / (2.0 * np.maximum(rho, 1e-300))
            half = np.arccos(np.clip(cosb, -1.0, 1.0))  # (Q,)
            th = angles[:, None, None] + half[None, :, None] * u[None, None, :]
            gv = self.g(rho[None, :, None], th)
            return (gv @ wu) * half[None, :] * rho[None, :]

        return self._radial(inner, lo=max(0.0, 1.0 - r), tol=tol)

    def peaked(self, kernel, modulus: float, angles, tol=DEFAULT_TOL) -> np.ndarray:
        """Disk analogue of :meth:`CircleDensityComponent.peaked` for a peak
        at radius ``modulus > r_max``."""
        if modulus <= self.r_max * (1 + 1e-14):
            raise SingularIntegrandError(
                f"kernel peak at |lambda|={modulus!r} lies on the disk support (r_max={self.r_max})"
            )
        angles = np.asarray(angles, dtype=float)
        gap = modulus - self.r_max
        phi, wphi = _composite_gl(_graded_angles(gap), 16)
        outer_breaks = [self.r_max - gap * 2.0**j for j in range(0, 60) if gap * 2.0**j < self.r_max]

        def inner(rho):
            out = np.empty((len(angles), len(rho)))
            for sl in _chunks(len(rho), 64):
                rr = rho[sl]
                th = angles[:, None, None] + phi[None, None, :]
                z = rr[None, :, None] * np.exp(1j * th)
                kv = kernel(z.reshape(len(angles), -1)).reshape(z.shape)
                gv = self.g(rr[None, :, None], th)
                out[:, sl] = ((kv * gv) @ wphi) * rr[None, :]
            return out

        return self._radial(inner, tol=tol, breakpoints=outer_breaks)

    def resolvent_sq(self, modulus: float, angles, tol=DEFAULT_TOL) -> np.ndarray:
        lam = modulus * np.exp(1j * np.asarray(angles, dtype=float))
        return self.peaked(lambda z: 1.0 / np.abs(z - lam[:, None]) ** 2, modulus, angles, tol)


def _chunks(n: int, size: int):
    for start in range(0, n, size):
        yield slice(start, min(n, start + size))


def _toeplitz_dense(c: np.ndarray) -> np.ndarray:
    """Hermitian Toeplitz matrix with G[j][k] = c[k-j], c[-m] = conj(c[m])."""
    n = len(c)
    d = np.subtract.outer(np.arange(n), np.arange(n))  # j - k
    full = np.where(d <= 0, c[np.abs(d)], np.conj(c[np.abs(d)]))
    return full


Component = Union[AtomicComponent, CircleDensityComponent, IntervalDensityComponent, DiskDensityComponent]


@dataclass(frozen=True)
class SpectralMeasureSpec:
    """A finite positive measure on C as a sum of components."""

    components: tuple = field(default_factory=tuple)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def __iter__(self):
        return iter(self.components)

    def of_kind(self, kind: str) -> list:
        return [c for c in self.components if c.kind == kind]

    def atoms(self) -> AtomicComponent:
        locs, ms = [], []
        for c in self.of_kind("atoms"):
            locs += list(c.locations)
            ms += list(c.masses)
        return AtomicComponent(tuple(locs), tuple(ms))

    def circle_part(self) -> "SpectralMeasureSpec":
        """Restriction to the unit circle (circle densities and atoms on it)."""
        parts = self.of_kind("circle")
        on = self.atoms().on_circle()
        if on.locations:
            parts.append(on)
        return SpectralMeasureSpec(tuple(parts), self.name)

    def disk_part(self) -> "SpectralMeasureSpec":
        """Restriction to the open unit disc."""
        parts = []
        for c in self.components:
            if c.kind == "atoms":
                a = c._select(np.abs(c.z) < 1.0 - ON_CIRCLE_TOL)
                if a.locations:
                    parts.append(a)
            elif c.kind in ("interval", "disk"):
                parts.append(c)
        return SpectralMeasureSpec(tuple(parts), self.name)

    def conjugate(self) -> "SpectralMeasureSpec":
        """Pushforward under complex conjugation."""
        return SpectralMeasureSpec(tuple(c.conjugate() for c in self.components), self.name)

    def scaled(self, s: float) -> "SpectralMeasureSpec":
        if not s > 0:
            raise MeasureError("scale factor must be positive")
        return SpectralMeasureSpec(tuple(c.scaled(s) for c in self.components), self.name)

    def circle_supported(self) -> bool:
        return bool(self.components) and all(c.circle_supported() for c in self.components)

    def real_supported(self) -> bool:
        return bool(self.components) and all(c.real_supported() for c in self.components)

    def has_circle_mass(self) -> bool:
        if self.of_kind("circle"):
            return True
        on = self.atoms().on_circle()
        return bool(np.any(on.m > 0))


# --- measure-level operations ----------------------------------------------


def _sum(values):
    out = 0
    for v in values:
        out = out + v
    return out


def total_mass(mu: SpectralMeasureSpec, tol: Tolerance = DEFAULT_TOL) -> float:
    """``mu(C)`` (the squared norm of the generating vector)."""
    return float(math.fsum(c.mass(tol) for c in mu))


def moment(mu: SpectralMeasureSpec, k: int, j: int, tol: Tolerance = DEFAULT_TOL) -> complex:
    """``int z^k conj(z)^j d mu`` = <A^k x, A^j x>."""
    if k < 0 or j < 0:
        raise MeasureError("moment indices must be nonnegative")
    return complex(_sum(c.moment(k, j, tol) for c in mu))


def integrate_measure(mu: SpectralMeasureSpec, fn, tol: Tolerance = DEFAULT_TOL):
    """``int fn(z) d mu`` for a smooth vectorised family ``fn``: z (P,) -> (K, P)."""
    return _sum(c.integrate(fn, tol) for c in mu)


def tail_mass(mu: SpectralMeasureSpec, eps: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``mu({|z| > 1 - eps})``."""
    if not 0.0 < eps < 1.0:
        raise MeasureError(f"tail_mass needs 0 < eps < 1, got {eps!r}")
    return float(math.fsum(c.tail_mass(eps, tol) for c in mu))


def _check_on_circle(z0: complex) -> float:
    z0 = complex(z0)
    if abs(abs(z0) - 1.0) > 1e-12:
        raise MeasureError(f"ball centre {z0!r} must lie on the unit circle")
    return math.atan2(z0.imag, z0.real)


def ball_masses(mu: SpectralMeasureSpec, angles, r: float, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``mu(closed disc ∩ B_r(e^{i angle}))`` for each centre angle."""
    if not r > 0:
        raise MeasureError("ball radius must be positive")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    return _sum(c.ball_masses(angles, r, tol) for c in mu) + np.zeros(len(angles))


def ball_mass(mu: SpectralMeasureSpec, z0: complex, r: float, tol: Tolerance = DEFAULT_TOL) -> float:
    return float(ball_masses(mu, [_check_on_circle(z0)], r, tol)[0])


def support_radius(mu: SpectralMeasureSpec) -> float:
    """Structural bound ``sup{|z| : z in supp mu}`` from declared domains."""
    radii = [c.support_radius() for c in mu]
    return float(max(radii)) if radii else 0.0


def resolvent_norms_sq(mu: SpectralMeasureSpec, modulus: float, angles, tol: Tolerance = DEFAULT_TOL):
    """``int |z - lambda|^-2 d mu`` for ``lambda = modulus * e^{i angle}``."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if modulus < 0:
        raise MeasureError("modulus must be nonnegative")
    return _sum(c.resolvent_sq(float(modulus), angles, tol) for c in mu) + np.zeros(len(angles))


def resolvent_norm_sq(mu: SpectralMeasureSpec, lam: complex, tol: Tolerance = DEFAULT_TOL) -> float:
    """``||(A - lambda)^-1 x||^2 = int |z - lambda|^-2 d mu``."""
    lam = complex(lam)
    return float(resolvent_norms_sq(mu, abs(lam), [math.atan2(lam.imag, lam.real)], tol)[0])


def _poisson_kernel(w):
    # Re((z + w)/(z - w)), computed from the defining quotient
    return lambda z: ((z + w[:, None]) / (z - w[:, None])).real


def poisson_integrals(mu: SpectralMeasureSpec, modulus: float, angles, tol: Tolerance = DEFAULT_TOL):
    """Poisson integral of ``mu``'s circle part at ``modulus * e^{i angle}``."""
    if abs(modulus - 1.0) < 1e-14:
        raise SingularIntegrandError("Poisson integral needs |w| != 1")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    w = modulus * np.exp(1j * angles)
    part = mu.circle_part()
    out = np.zeros(len(angles))
    for c in part:
        if c.kind == "atoms":
            out = out + (((c.z[None, :] + w[:, None]) / (c.z[None, :] - w[:, None])).real @ c.m)
        else:
            out = out + c.peaked(_poisson_kernel(w), modulus, angles, tol)
    return out


def poisson_integral(mu: SpectralMeasureSpec, w: complex, tol: Tolerance = DEFAULT_TOL) -> float:
    """``P[mu|T](w) = int_T (1-|w|^2)/|z-w|^2 d mu(z)``."""
    w = complex(w)
    return float(poisson_integrals(mu, abs(w), [math.atan2(w.imag, w.real)], tol)[0])


def stieltjes_inversion(mu: SpectralMeasureSpec, alpha: float, beta: float, rs: Iterable[float],
                        tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``int_{(alpha, beta)} P[mu|T](r e^{i theta}) dtheta/2pi`` for each r.

    As r -> 1 this tends to ``mu(arc) + mu({endpoints})/2``.
    """
    if not alpha < beta or beta - alpha > TWO_PI:
        raise MeasureError("arc must satisfy alpha < beta <= alpha + 2 pi")
    rs = [float(r) for r in rs]
    if any(not 0.0 < r < 1.0 for r in rs) or any(b <= a for a, b in zip(rs, rs[1:])):
        raise MeasureError("r values must increase within (0, 1)")
    part = mu.circle_part()
    atoms = [c for c in part if c.kind == "atoms"]
    dens = [c for c in part if c.kind == "circle"]
    atom_angles = []
    for a in atoms:
        for ang in np.angle(a.z):
            # representative of the atom angle inside [alpha, alpha + 2pi)
            atom_angles.append(alpha + float(np.mod(ang - alpha, TWO_PI)))
    out = []
    for r in rs:
        breaks = []
        for ang in atom_angles:
            breaks += [ang + s for s in _graded_angles(1.0 - r)]

        def g(theta, r=r):
            w = r * np.exp(1j * theta)
            total = np.zeros(len(theta))
            for a in atoms:
                total = total + (((a.z[None, :] + w[:, None]) / (a.z[None, :] - w[:, None])).real @ a.m)
            for c in dens:
                total = total + c.peaked(_poisson_kernel(w), r, theta, tol)
            return (total / TWO_PI)[None, :]

        out.append(float(integrate(g, alpha, beta, breakpoints=breaks, tol=tol)[0]))
    return np.array(out)


# --- JSON ------------------------------------------------------------------


def _component_from_dict(d, index: int):
    if not isinstance(d, dict):
        raise SpecError("each component must be a JSON object", index)
    kind = d.get("kind")
    allowed = {
        "atoms": {"kind", "atoms"},
        "circle": {"kind", "density", "sup"},
        "interval": {"kind", "lower", "upper", "density", "singular"},
        "disk": {"kind", "density", "r_max"},
    }
    if kind not in allowed:
        raise SpecError(f"unknown kind {kind!r} (expected one of {sorted(allowed)})", index)
    extra = set(d) - allowed[kind]
    if extra:
        raise SpecError(f"unexpected field(s) {sorted(extra)} for kind {kind!r}", index)
    try:
        if kind == "atoms":
            raw = d.get("atoms")
            if not isinstance(raw, list):
                raise SpecError("'atoms' must be a list", index)
            locs, ms = [], []
            for a in raw:
                if not isinstance(a, dict) or "mass" not in a or "re" not in a:
                    raise SpecError("each atom needs 're', optional 'im', and 'mass'", index)
                locs.append(complex(float(a["re"]), float(a.get("im", 0.0))))
                ms.append(float(a["mass"]))
            return AtomicComponent(tuple(locs), tuple(ms))
        if "density" not in d:
            raise SpecError("missing 'density'", index)
        src = d["density"]
        if kind == "circle":
            sup = d.get("sup")
            return CircleDensityComponent(densexpr.parse(src, {"theta"}), None if sup is None else float(sup))
        if kind == "interval":
            if "lower" not in d or "upper" not in d:
                raise SpecError("interval needs 'lower' and 'upper'", index)
            sing = d.get("singular") or []
            if isinstance(sing, str):
                sing = ["lower", "upper"] if sing == "both" else [sing]
            return IntervalDensityComponent(float(d["lower"]), float(d["upper"]),
                                            densexpr.parse(src, {"t"}), frozenset(sing))
        return DiskDensityComponent(densexpr.parse(src, {"r", "theta"}), float(d.get("r_max", 1.0)))
    except SpecError:
        raise
    except (densexpr.ExprError, MeasureError, TypeError, ValueError) as exc:
        raise SpecError(str(exc), index) from exc


def _component_to_dict(c) -> dict:
    if c.kind == "atoms":
        return {"kind": "atoms", "atoms": [{"re": z.real, "im": z.imag, "mass": m}
                                           for z, m in zip(c.locations, c.masses)]}
    if c.kind == "circle":
        d = {"kind": "circle", "density": c.density.source}
        if c.sup is not None:
            d["sup"] = c.sup
        return d
    if c.kind == "interval":
        d = {"kind": "interval", "lower": c.lower, "upper": c.upper, "density": c.density.source}
        if c.singular:
            d["singular"] = sorted(c.singular)
        return d
    return {"kind": "disk", "density": c.density.source, "r_max": c.r_max}


def loads_spec(text: str, name: str = "") -> SpectralMeasureSpec:
    """Parse a measure-spec JSON document (a list of components)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SpecError("top level must be a list of components")
    if not doc:
        raise SpecError("measure spec has no components")
    comps = tuple(_component_from_dict(d, i) for i, d in enumerate(doc))
    return SpectralMeasureSpec(comps, name)


def load_spec(path) -> SpectralMeasureSpec:
    with open(path, encoding="utf-8") as fh:
        return loads_spec(fh.read(), name=str(path))


def dump_spec(mu: SpectralMeasureSpec) -> str:
    return json.dumps([_component_to_dict(c) for c in mu], indent=2)
