"""Finite sections of the orbit Gram matrix and their operator norms.

The Gram matrix of the orbit ``(A^k x)`` has entries
``G[j][k] = <A^k x, A^j x> = int z^k conj(z)^j d mu``.  When the measure lives
on the unit circle the matrix is Toeplitz (``G[j][k] = c_{k-j}``); when it
lives on the real line it is Hankel (``G[j][k] = q_{j+k}``).  Structured
sections keep only their O(n) coefficients and multiply through FFT-based
circulant embedding.

The norm of a finite section is a lower bound for the optimal Bessel bound
of the orbit; the sections increase to the full Gram operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .measure import SpectralMeasureSpec
from .quadrature import DEFAULT_TOL, Tolerance

__all__ = [
    "GramSection",
    "GramError",
    "NormConvergenceError",
    "build_section",
    "structured_matvec",
    "operator_norm",
    "bessel_bound_profile",
    "DENSE_LIMIT",
]

# sections up to this size are normed with a dense eigensolver
DENSE_LIMIT = 64


class GramError(ValueError):
    pass


class NormConvergenceError(ArithmeticError):
    """Iterative norm estimate did not converge; carries the last estimate."""

    def __init__(self, message: str, last_estimate: float):
        self.last_estimate = last_estimate
        super().__init__(f"{message} (last Rayleigh quotient {last_estimate!r})")


@dataclass(frozen=True, eq=False)
class GramSection:
    """An ``n x n`` principal section of the orbit Gram matrix.

    ``coefficients`` holds ``c_0..c_{n-1}`` (toeplitz) or ``q_0..q_{2n-2}``
    (hankel); dense sections store the full matrix in ``dense``.
    """

    n: int
    structure: str
    coefficients: np.ndarray | None = None
    dense: np.ndarray | None = None

    def __post_init__(self):
        if self.structure not in ("toeplitz", "hankel", "dense"):
            raise GramError(f"unknown structure {self.structure!r}")
        expected = {"toeplitz": self.n, "hankel": 2 * self.n - 1}
        if self.structure in expected and len(self.coefficients) != expected[self.structure]:
            raise GramError("coefficient length does not match section size")
        if self.structure == "dense" and self.dense.shape != (self.n, self.n):
            raise GramError("dense entries do not match section size")

    def entries(self) -> np.ndarray:
        """The full matrix (O(n^2) memory)."""
        n = self.n
        if self.structure == "dense":
            return np.array(self.dense)
        if self.structure == "toeplitz":
            c = self.coefficients
            d = np.subtract.outer(np.arange(n), np.arange(n))  # j - k
            return np.where(d <= 0, c[np.abs(d)], np.conj(c[np.abs(d)]))
        idx = np.add.outer(np.arange(n), np.arange(n))
        return np.asarray(self.coefficients, dtype=complex)[idx]

    def principal(self, m: int) -> "GramSection":
        """Leading ``m x m`` section."""
        if not 1 <= m <= self.n:
            raise GramError(f"section size {m} outside 1..{self.n}")
        if self.structure == "toeplitz":
            return GramSection(m, "toeplitz", self.coefficients[:m])
        if self.structure == "hankel":
            return GramSection(m, "hankel", self.coefficients[: 2 * m - 1])
        return GramSection(m, "dense", dense=self.dense[:m, :m])

    def scaled(self, s: float) -> "GramSection":
        if self.structure == "dense":
            return GramSection(self.n, "dense", dense=s * self.dense)
        return GramSection(self.n, self.structure, s * self.coefficients)

    def matvec(self, v) -> np.ndarray:
        return structured_matvec(self, v)


def _toeplitz_from(c, n) -> GramSection:
    return GramSection(n, "toeplitz", np.asarray(c, dtype=complex))


def build_section(mu: SpectralMeasureSpec, n: int, tol: Tolerance = DEFAULT_TOL,
                  adjoint: bool = False) -> GramSection:
    """Gram section of size ``n``.

    With ``adjoint=True`` the entries are ``int z^j conj(z)^k d mu``, the Gram
    matrix of the orbit under the adjoint operator; it is computed from the
    conjugated measure rather than by transposing.
    """
    if int(n) != n or n < 1:
        raise GramError(f"section size must be a positive integer, got {n!r}")
    n = int(n)
    if not mu.components:
        raise GramError("measure has no components")
    if adjoint:
        mu = mu.conjugate()
    if mu.circle_supported():
        c = sum(comp.toeplitz_coefficients(n, tol) for comp in mu)
        return _toeplitz_from(c, n)
    if mu.real_supported():
        q = sum(np.asarray(comp.hankel_coefficients(n, tol)).real for comp in mu)
        return GramSection(n, "hankel", np.asarray(q, dtype=float))
    dense = sum(comp.moment_matrix(n, tol) for comp in mu)
    dense = 0.5 * (dense + dense.conj().T)  # symmetrise rounding
    return GramSection(n, "dense", dense=dense)


def _fft_len(m: int) -> int:
    return 1 << max(0, (m - 1).bit_length())


def structured_matvec(section: GramSection, v) -> np.ndarray:
    """``G @ v``; O(n log n) for structured sections."""
    v = np.asarray(v)
    n = section.n
    if v.shape != (n,):
        raise GramError(f"vector of shape {v.shape} does not match section size {n}")
    if section.structure == "dense":
        return section.dense @ v
    if section.structure == "toeplitz":
        c = section.coefficients
        L = _fft_len(2 * n - 1)
        col = np.zeros(L, dtype=complex)
        col[:n] = np.conj(c)  # first column: G[j][0] = conj(c_j)
        if n > 1:
            col[L - n + 1:] = c[1:][::-1]  # wrap-around carries the first row
        out = np.fft.ifft(np.fft.fft(col) * np.fft.fft(v, L))[:n]
        return out
    q = section.coefficients
    L = _fft_len(3 * n - 2)
    conv = np.fft.ifft(np.fft.fft(q, L) * np.fft.fft(v[::-1], L))
    out = conv[n - 1: 2 * n - 1]
    if np.isrealobj(v) and np.isrealobj(q):
        return out.real
    return out


def operator_norm(section: GramSection, tol: float = 1e-12, max_iter: int = 1000) -> float:
    """Largest eigenvalue of the PSD section (its spectral norm).

    Small sections use a dense Hermitian eigensolver.  Larger ones use
    implicitly restarted Lanczos on the structured matvec with a fixed start
    vector, so results are reproducible.
    """
    if not tol > 0:
        raise GramError("tol must be positive")
    n = section.n
    if n <= DENSE_LIMIT:
        w = linalg.eigvalsh(section.entries())
        return float(max(w[-1], 0.0))
    dtype = complex
    if section.structure == "hankel" and np.isrealobj(section.coefficients):
        dtype = float
    op = LinearOperator((n, n), matvec=lambda v: structured_matvec(section, v), dtype=dtype)
    v0 = np.random.default_rng(0).standard_normal(n).astype(dtype)
    # a Krylov space that closes early is an exact invariant subspace
    Gv = structured_matvec(section, v0)
    rq = float(np.real(np.vdot(v0, Gv)) / np.vdot(v0, v0).real)
    if np.linalg.norm(Gv - rq * v0) <= 1e-13 * max(np.linalg.norm(Gv), 1e-300):
        return max(rq, 0.0)
    try:
        w = eigsh(op, k=1, which="LA", v0=v0, tol=tol, maxiter=max_iter,
                  ncv=min(n, 40), return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        last = float(exc.eigenvalues[-1]) if len(exc.eigenvalues) else rq
        raise NormConvergenceError(f"Lanczos did not converge in {max_iter} restarts", last) from exc
    return float(max(np.max(w), 0.0))


def bessel_bound_profile(mu: SpectralMeasureSpec, sizes, tol: float = 1e-10,
                         quad_tol: Tolerance = DEFAULT_TOL, adjoint: bool = False):
    """``[(n, ||G_n||)]`` for increasing section sizes.

    All sections are principal sections of the largest one, so the norms are
    nondecreasing up to the eigensolver tolerance; a violation raises.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise GramError("sizes must be a strictly increasing list of positive integers")
    big = build_section(mu, sizes[-1], quad_tol, adjoint=adjoint)
    out = []
    for n in sizes:
        out.append((n, operator_norm(big.principal(n), tol=tol)))
    for (n1, a), (n2, b) in zip(out, out[1:]):
        if b < a - 10 * tol * max(a, 1.0) - 1e-12:
            raise GramError(f"section norms decreased from n={n1} ({a!r}) to n={n2} ({b!r})")
    return out
