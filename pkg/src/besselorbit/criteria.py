"""Bessel criteria for orbits, evaluated as numeric constants, and a verdict.

Each criterion returns a :class:`CriterionReport` holding its constant
(possibly ``inf``), the grid it was evaluated on and the per-grid-point
values.  Asymptotic conditions such as ``mu(|z| > 1 - eps) = O(eps)`` cannot be
decided from finitely many evaluations, so every report carries a ``status``:

``certified``
    closed form or a rigorous sufficient bound;
``grid_estimate``
    maximum over a finite grid, no growth detected;
``divergent``
    the constant is ``inf``, or the grid maxima still grow at the finest
    scale (heuristic, see :func:`is_diverging`);
``not_applicable`` / ``error``
    the criterion does not apply to this measure, or it failed numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import gram
from .measure import (
    ON_CIRCLE_TOL,
    SpectralMeasureSpec,
    ball_masses,
    resolvent_norms_sq,
    support_radius,
    tail_mass,
    total_mass,
)
from .quadrature import DEFAULT_TOL, DivergentIntegralError, Tolerance

__all__ = [
    "CriterionReport",
    "BesselVerdict",
    "CriteriaConfig",
    "is_diverging",
    "classify_operator",
    "support_radius_report",
    "lipschitz_constant_circle",
    "tail_ratio_sup",
    "moment_decay_sup",
    "carleson_constant",
    "carleson_embedding_sup",
    "resolvent_growth_sup",
    "sufficient_integral_bound",
    "compact_support_bound",
    "gram_profile_report",
    "verdict",
]

INF = math.inf

CITATIONS = {
    "support_radius": "necessary: the spectral measure of x lives in the closed unit disc",
    "lipschitz_constant_circle": "unitary part: orbit is Bessel iff mu_x restricted to the circle is "
    "Lipschitz w.r.t. normalised arc length, bound = ess sup of its density",
    "tail_ratio_sup": "selfadjoint: orbit is Bessel iff mu_x(|t| > 1 - eps) = O(eps)",
    "moment_decay_sup": "selfadjoint: orbit is Bessel iff <A^k x, x> = O(1/k) (Hankel moment decay)",
    "carleson_constant": "necessary (and with a Lipschitz circle part sufficient): "
    "mu_x(closed disc ∩ B_r(z)) <= C r for z on the circle",
    "carleson_embedding_sup": "disc part is a Carleson measure iff the Poisson-type kernel integral "
    "(1-|z|^2)/|1-conj(z)w|^2 is bounded over the disc",
    "resolvent_growth_sup": "Bessel iff ||(A - lambda)^-1 x||^2 <= C / |1 - |lambda|^2|",
    "sufficient_integral_bound": "sufficient: (1 - |z|^2)^-1 in L^1(mu_x), bound = its integral",
    "compact_support_bound": "sufficient: support radius nu < 1 gives bound ||x||^2 / (1 - nu^2)",
    "gram_profile": "Bessel bound = norm of the Gram operator; finite sections give lower bounds",
}


@dataclass
class CriterionReport:
    """Outcome of one criterion.

    ``values`` lists ``(grid point, value)`` pairs in grid order.
    """

    id: str
    constant: float | None
    status: str
    divergent: bool = False
    grid: dict = field(default_factory=dict)
    values: list = field(default_factory=list)
    citation: str = ""
    message: str = ""

    def __post_init__(self):
        if not self.citation:
            self.citation = CITATIONS.get(self.id, "")

    @property
    def finite(self) -> bool:
        return self.constant is not None and math.isfinite(self.constant) and not self.divergent

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "constant": _jsonable(self.constant),
            "status": self.status,
            "divergent": self.divergent,
            "grid": {k: _jsonable(v) for k, v in sorted(self.grid.items())},
            "values": [[_jsonable(x), _jsonable(y)] for x, y in self.values],
            "citation": self.citation,
            "message": self.message,
        }


def _jsonable(v):
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(float(v.real)), _jsonable(float(v.imag))]
    return v


@dataclass
class BesselVerdict:
    status: str  # BESSEL, NOT_BESSEL, INCONCLUSIVE
    witness: str | None
    bound: float | None
    bound_kind: str | None  # certified, grid_estimate
    operator_class: str
    reports: list

    def report(self, cid: str) -> CriterionReport | None:
        for r in self.reports:
            if r.id == cid:
                return r
        return None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "witness": self.witness,
            "bound": _jsonable(self.bound),
            "bound_kind": self.bound_kind,
            "operator_class": self.operator_class,
            "reports": [r.to_dict() for r in sorted(self.reports, key=lambda r: r.id)],
        }


@dataclass(frozen=True)
class CriteriaConfig:
    """Grids and tolerances.  Exponents ``m`` refer to dyadic scales ``2^-m``."""

    eps_exponents: tuple = tuple(range(1, 41))
    radius_exponents: tuple = tuple(range(1, 21))
    modulus_exponents: tuple = tuple(range(1, 21))
    embedding_exponents: tuple = tuple(range(0, 21))
    max_centers: int = 256
    max_angles: int = 64
    moment_K: int = 4096
    lipschitz_points: int = 4096
    gram_sizes: tuple = (8, 16, 32, 64, 128, 256)
    dense_max_size: int = 64
    tol: Tolerance = DEFAULT_TOL
    norm_tol: float = 1e-12
    divergence_window: int = 10
    divergence_rate: float = 0.05


DEFAULT_CONFIG = CriteriaConfig()


def is_diverging(values, window: int = 10, rate: float = 0.05) -> bool:
    """Growth heuristic on a sequence of grid maxima ordered coarse to fine.

    True when the last ``window`` values are nondecreasing and grow on
    average by more than ``rate`` per step.
    """
    v = np.asarray([x for x in values], dtype=float)
    if np.any(np.isinf(v)):
        return True
    if len(v) < 2:
        return False
    tail = v[-window:] if len(v) >= window else v
    if tail[0] <= 0:
        return False
    if np.any(np.diff(tail) < -1e-12 * np.abs(tail[1:])):
        return False
    steps = len(tail) - 1
    return bool((tail[-1] / tail[0]) ** (1.0 / steps) > 1.0 + rate)


def _dyadic(m) -> float:
    return math.ldexp(1.0, -int(m))


def _status(constant, divergent, certified=False) -> str:
    if divergent or (constant is not None and math.isinf(constant)):
        return "divergent"
    return "certified" if certified else "grid_estimate"


# --- classification --------------------------------------------------------


def classify_operator(mu: SpectralMeasureSpec) -> str:
    """``unitary`` (mass on the circle), ``selfadjoint`` (mass on the real
    segment [-1, 1]) or ``normal``."""
    if mu.circle_supported():
        return "unitary"
    if mu.real_supported() and support_radius(mu) <= 1.0:
        return "selfadjoint"
    return "normal"


def support_radius_report(mu: SpectralMeasureSpec) -> CriterionReport:
    nu = support_radius(mu)
    rep = CriterionReport("support_radius", nu, "certified")
    if nu > 1.0:
        rep.message = "support leaves the closed unit disc"
    return rep


# --- circle part -----------------------------------------------------------


def _circle_density_total(mu: SpectralMeasureSpec):
    comps = mu.of_kind("circle")
    return comps, (lambda th: sum(c.f(th) for c in comps))


def lipschitz_constant_circle(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """ess sup of the circle density w.r.t. normalised arc length.

    Estimated as the maximum on an equispaced grid plus one local refinement
    round around the largest samples.  Atoms on the circle give ``inf``;
    declared ``sup`` values on every circle component make it certified.
    """
    on = mu.atoms().on_circle()
    if np.any(on.m > 0):
        angles = [float(a) for a in np.angle(on.z[on.m > 0])]
        return CriterionReport("lipschitz_constant_circle", INF, "divergent", True,
                               grid={"atom_angles": angles},
                               message="atom on the unit circle")
    comps, f = _circle_density_total(mu)
    if not comps:
        return CriterionReport("lipschitz_constant_circle", 0.0, "certified",
                               message="no mass on the unit circle")
    if all(c.sup is not None for c in comps):
        sup = math.fsum(c.sup for c in comps)
        return CriterionReport("lipschitz_constant_circle", sup, "certified",
                               grid={"declared_sup": [c.sup for c in comps]})
    N = int(config.lipschitz_points)
    theta = 2 * math.pi * np.arange(N) / N
    vals = f(theta)
    coarse = float(np.max(vals))
    h = 2 * math.pi / N
    top = np.argsort(vals)[-8:]
    local = (theta[top][:, None] + h * np.linspace(-1, 1, 129)[None, :]).ravel()
    fvals = f(local)
    t0 = float(local[np.argmax(fvals)])
    step = h / 64
    # polish the best refined sample with a bounded scalar search
    res = optimize.minimize_scalar(lambda x: -float(f(np.array([x]))[0]), bounds=(t0 - step, t0 + step),
                                   method="bounded", options={"xatol": 1e-12})
    fine = max(float(np.max(fvals)), -float(res.fun))
    best = max(coarse, fine)
    argmax = float(np.mod(res.x if -res.fun >= np.max(fvals) else t0, 2 * math.pi))
    return CriterionReport("lipschitz_constant_circle", best, "grid_estimate",
                           grid={"points": N, "refined_points": int(local.size), "argmax": argmax},
                           values=[["grid", coarse], ["refined", fine]])


# --- tails and moments -----------------------------------------------------


def tail_ratio_sup(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """max over the eps grid of ``mu(|z| > 1 - eps) / eps``."""
    eps = [_dyadic(m) for m in config.eps_exponents]
    ratios = [tail_mass(mu, e, config.tol) / e for e in eps]
    div = is_diverging(ratios, config.divergence_window, config.divergence_rate)
    const = float(max(ratios))
    return CriterionReport("tail_ratio_sup", const, _status(const, div), div,
                           grid={"eps": eps}, values=list(zip(eps, ratios)))


def real_moments(mu: SpectralMeasureSpec, K: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``q_k = int t^k d mu`` for k = 0..K (real-supported measures)."""
    q = np.zeros(K + 1)
    for c in mu:
        if c.kind == "atoms":
            t = c.z.real
            q += (t[None, :] ** np.arange(K + 1)[:, None]) @ c.m
        elif c.kind == "interval":
            q += c.power_moments(K + 1, tol)
        else:
            raise ValueError(f"{c.kind} component is not supported on the real line")
    return q


def moment_decay_sup(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """max over k <= K of ``k |q_k|``.

    Divergence is judged on the maxima over dyadic blocks ``[2^i, 2^(i+1))``
    that cover the last decade ``[K/10, K]``.
    """
    if not (mu.real_supported() and support_radius(mu) <= 1.0):
        return CriterionReport("moment_decay_sup", None, "not_applicable",
                               message="needs a measure on the real segment [-1, 1]")
    K = int(config.moment_K)
    q = real_moments(mu, K, config.tol)
    k = np.arange(K + 1)
    kq = k * np.abs(q)
    blocks, starts = [], []
    b = 1
    while b <= K:
        blocks.append(float(np.max(kq[b: min(2 * b, K + 1)])))
        starts.append(b)
        b *= 2
    # growth is judged over the last decade of k only
    window = sum(1 for b in starts if 2 * b > K / 10)
    div = is_diverging(blocks, window, config.divergence_rate)
    const = float(np.max(kq))
    return CriterionReport("moment_decay_sup", const, _status(const, div), div,
                           grid={"K": K, "block_starts": starts}, values=list(zip(starts, blocks)))


# --- Carleson-type criteria ------------------------------------------------


def _anchor_angles(mu: SpectralMeasureSpec, config: CriteriaConfig) -> list[float]:
    """Angles where a sup is likely attained: 0, pi, atom directions, density peaks."""
    out = [0.0, math.pi]
    atoms = mu.atoms()
    for z, m in zip(atoms.locations, atoms.masses):
        if m > 0 and z != 0:
            out.append(math.atan2(z.imag, z.real))
    comps, f = _circle_density_total(mu)
    if comps:
        theta = 2 * math.pi * np.arange(1024) / 1024
        out.append(float(theta[np.argmax(f(theta))]))
    return out


def _angles(count: int, anchors) -> np.ndarray:
    base = 2 * math.pi * np.arange(count) / count
    return np.unique(np.mod(np.concatenate([base, np.asarray(anchors, dtype=float)]), 2 * math.pi))


def _outside_disc(name: str, mu) -> CriterionReport | None:
    if support_radius(mu) > 1.0:
        return CriterionReport(name, None, "not_applicable", message="support leaves the closed unit disc")
    return None


def carleson_constant(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """max over dyadic radii and centres on the circle of ``mu(B_r(z)) / r``.

    Centres are equispaced with spacing ``<= r/2`` up to ``max_centers`` per
    radius, plus anchor angles.
    """
    bad = _outside_disc("carleson_constant", mu)
    if bad:
        return bad
    anchors = _anchor_angles(mu, config)
    radii, per_r, counts = [], [], []
    for m in config.radius_exponents:
        r = _dyadic(m)
        count = min(config.max_centers, math.ceil(2 * math.pi / (r / 2)))
        ang = _angles(count, anchors)
        vals = ball_masses(mu, ang, r, config.tol) / r
        radii.append(r)
        per_r.append(float(np.max(vals)))
        counts.append(int(ang.size))
    div = is_diverging(per_r, config.divergence_window, config.divergence_rate)
    const = float(max(per_r))
    return CriterionReport("carleson_constant", const, _status(const, div), div,
                           grid={"radii": radii, "centers_per_radius": counts},
                           values=list(zip(radii, per_r)))


def _kernel_sum(part: SpectralMeasureSpec, kernel, peak_modulus: float, angles, tol) -> np.ndarray:
    out = np.zeros(len(angles))
    for c in part:
        out = out + c.peaked(kernel, peak_modulus, angles, tol)
    return out


def carleson_embedding_sup(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """max over a polar grid in the disc of ``int (1-|z|^2)/|1-conj(z)w|^2 d mu(w)``
    over the open-disc part of ``mu``; radii ``1 - 2^-m``."""
    bad = _outside_disc("carleson_embedding_sup", mu)
    if bad:
        return bad
    part = mu.disk_part()
    if not part.components:
        return CriterionReport("carleson_embedding_sup", 0.0, "certified", message="no mass in the open disc")
    anchors = _anchor_angles(mu, config)
    radii, per_r = [], []
    for m in config.embedding_exponents:
        rho = 1.0 - _dyadic(m)
        if rho == 0.0:
            val = total_mass(part, config.tol)
        else:
            count = min(config.max_angles, math.ceil(2 * math.pi / _dyadic(m)))
            ang = _angles(count, anchors)
            z = rho * np.exp(1j * ang)

            def kernel(w, z=z):
                return (1.0 - np.abs(z[:, None]) ** 2) / np.abs(1.0 - np.conj(z[:, None]) * w) ** 2

            val = float(np.max(_kernel_sum(part, kernel, 1.0 / rho, ang, config.tol)))
        radii.append(rho)
        per_r.append(val)
    div = is_diverging(per_r, config.divergence_window, config.divergence_rate)
    const = float(max(per_r))
    return CriterionReport("carleson_embedding_sup", const, _status(const, div), div,
                           grid={"radii": radii}, values=list(zip(radii, per_r)))


def carleson_kernel_integral(mu: SpectralMeasureSpec, z: complex, tol: Tolerance = DEFAULT_TOL) -> float:
    """``int_D (1-|z|^2)/|1-conj(z)w|^2 d mu(w)`` at one point of the disc."""
    z = complex(z)
    part = mu.disk_part()
    if z == 0:
        return total_mass(part, tol) if part.components else 0.0
    zz = np.array([z])
    kernel = lambda w: (1.0 - abs(z) ** 2) / np.abs(1.0 - np.conj(zz[:, None]) * w) ** 2
    return float(_kernel_sum(part, kernel, 1.0 / abs(z), [math.atan2(z.imag, z.real)], tol)[0])


def resolvent_growth_sup(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG,
                         inner: bool | None = None) -> CriterionReport:
    """max of ``|1 - |lambda|^2| * int |z - lambda|^-2 d mu`` over dyadic moduli.

    Moduli ``1 + 2^-m`` always; ``1 - 2^-m`` as well for the unitary class
    (or when ``inner`` is set).
    """
    bad = _outside_disc("resolvent_growth_sup", mu)
    if bad:
        return bad
    if inner is None:
        inner = classify_operator(mu) == "unitary"
    anchors = _anchor_angles(mu, config)
    sides = [("outer", +1)] + ([("inner", -1)] if inner else [])
    grid, per_m = {}, []
    flags = {}
    for name, sign in sides:
        mods, vals = [], []
        for m in config.modulus_exponents:
            h = _dyadic(m)
            R = 1.0 + sign * h
            count = min(config.max_angles, math.ceil(2 * math.pi / h))
            ang = _angles(count, anchors)
            v = abs(1.0 - R * R) * resolvent_norms_sq(mu, R, ang, config.tol)
            mods.append(R)
            vals.append(float(np.max(v)))
        grid[f"{name}_moduli"] = mods
        grid[f"{name}_values"] = vals
        flags[name] = is_diverging(vals, config.divergence_window, config.divergence_rate)
        per_m.append(vals)
    combined = [max(col) for col in zip(*per_m)]
    grid["outer_divergent"] = flags["outer"]
    if inner:
        grid["inner_divergent"] = flags["inner"]
    div = any(flags.values())
    const = float(max(combined))
    hs = [_dyadic(m) for m in config.modulus_exponents]
    return CriterionReport("resolvent_growth_sup", const, _status(const, div), div,
                           grid=grid, values=list(zip(hs, combined)))


# --- sufficient bounds -----------------------------------------------------


def sufficient_integral_bound(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """``int (1 - |z|^2)^-1 d mu``; ``inf`` with mass on the circle or when the
    integral diverges at the boundary."""
    bad = _outside_disc("sufficient_integral_bound", mu)
    if bad:
        return bad
    if mu.has_circle_mass():
        return CriterionReport("sufficient_integral_bound", INF, "divergent", True,
                               message="mass on the unit circle")
    tol = config.tol
    parts = []
    try:
        for c in mu:
            if c.kind == "atoms":
                z = c.z
                parts.append(math.fsum(c.m / (1.0 - np.abs(z) ** 2)) if len(z) else 0.0)
            elif c.kind == "interval":
                sing = set()
                # an endpoint at +-1 makes the weight singular there
                if abs(c.lower) >= 1.0 - 1e-15:
                    sing.add("lower")
                if abs(c.upper) >= 1.0 - 1e-15:
                    sing.add("upper")
                comp = c if not sing else type(c)(c.lower, c.upper, c.density, c.singular | sing)
                parts.append(float(comp.integrate_t(lambda t: (1.0 / (1.0 - t * t))[None, :], tol=tol)[0]))
            elif c.kind == "disk":
                val = c.integrate(lambda z: (1.0 / (1.0 - np.abs(z) ** 2))[None, :], tol,
                                  singular_outer=c.r_max >= 1.0)
                parts.append(float(val[0].real))
    except DivergentIntegralError as exc:
        return CriterionReport("sufficient_integral_bound", INF, "divergent", True, message=str(exc))
    const = math.fsum(parts)
    return CriterionReport("sufficient_integral_bound", const, "certified")


def compact_support_bound(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """``mu(C) / (1 - nu^2)`` when the support radius ``nu`` is below 1."""
    nu = support_radius(mu)
    if nu >= 1.0:
        return CriterionReport("compact_support_bound", INF, "divergent", True,
                               grid={"support_radius": nu}, message="support reaches the unit circle")
    const = total_mass(mu, config.tol) / (1.0 - nu * nu)
    return CriterionReport("compact_support_bound", const, "certified", grid={"support_radius": nu})


def gram_profile_report(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> CriterionReport:
    """Norms of principal Gram sections (a nondecreasing lower-bound trail)."""
    sizes = list(config.gram_sizes)
    if not (mu.circle_supported() or mu.real_supported()):
        sizes = [n for n in sizes if n <= config.dense_max_size] or [min(config.gram_sizes)]
    profile = gram.bessel_bound_profile(mu, sizes, tol=config.norm_tol, quad_tol=config.tol)
    const = max(v for _, v in profile)
    return CriterionReport("gram_profile", const, "lower_bound", grid={"sizes": sizes},
                           values=[[n, v] for n, v in profile])


# --- verdict ---------------------------------------------------------------


def _safe(fn, cid, mu, config) -> CriterionReport:
    try:
        return fn(mu, config)
    except Exception as exc:  # numerical failure of one criterion must not hide the others
        return CriterionReport(cid, None, "error", message=f"{type(exc).__name__}: {exc}")


CRITERIA = (
    ("support_radius", lambda mu, cfg: support_radius_report(mu)),
    ("lipschitz_constant_circle", lipschitz_constant_circle),
    ("tail_ratio_sup", tail_ratio_sup),
    ("moment_decay_sup", moment_decay_sup),
    ("carleson_constant", carleson_constant),
    ("carleson_embedding_sup", carleson_embedding_sup),
    ("resolvent_growth_sup", resolvent_growth_sup),
    ("sufficient_integral_bound", sufficient_integral_bound),
    ("compact_support_bound", compact_support_bound),
    ("gram_profile", gram_profile_report),
)


def run_criteria(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG) -> list[CriterionReport]:
    """All criteria, in a fixed order, each isolated from the others' failures."""
    return [_safe(fn, cid, mu, config) for cid, fn in CRITERIA]


def verdict(mu: SpectralMeasureSpec, config: CriteriaConfig = DEFAULT_CONFIG,
            reports: list[CriterionReport] | None = None) -> BesselVerdict:
    """Combine the criteria into BESSEL / NOT_BESSEL / INCONCLUSIVE.

    Order of checks: support outside the closed disc; atoms on the circle; a
    certified finite sufficient bound (smallest wins); a necessary criterion
    whose grid values keep growing; class-specific grid estimates; otherwise
    inconclusive.
    """
    if reports is None:
        reports = run_criteria(mu, config)
    by = {r.id: r for r in reports}
    cls = classify_operator(mu)

    def out(status, witness, bound=None, kind=None):
        return BesselVerdict(status, witness, bound, kind, cls, reports)

    if by["support_radius"].constant > 1.0:
        return out("NOT_BESSEL", "support_radius")
    lip = by["lipschitz_constant_circle"]
    if lip.constant is not None and math.isinf(lip.constant):
        return out("NOT_BESSEL", "lipschitz_constant_circle")
    # a certified finite bound outranks a growth heuristic on a finite grid
    sufficient = [by[c] for c in ("sufficient_integral_bound", "compact_support_bound")
                  if by[c].status == "certified" and by[c].finite]
    if sufficient:
        best = min(sufficient, key=lambda r: r.constant)
        return out("BESSEL", best.id, best.constant, "certified")
    necessary = ["carleson_constant", "resolvent_growth_sup"]
    if cls == "selfadjoint":
        necessary.insert(0, "tail_ratio_sup")
    for cid in necessary:
        if by[cid].divergent:
            return out("NOT_BESSEL", cid)
    gp = by["gram_profile"]
    gram_bound = gp.constant if gp.status == "lower_bound" else None
    if cls == "unitary" and lip.finite:
        return out("BESSEL", lip.id, lip.constant, "certified" if lip.status == "certified" else "grid_estimate")
    if cls == "selfadjoint" and by["tail_ratio_sup"].finite:
        return out("BESSEL", "tail_ratio_sup", gram_bound, "grid_estimate")
    if cls == "normal" and lip.finite and by["carleson_constant"].finite:
        return out("BESSEL", "carleson_constant", gram_bound, "grid_estimate")
    return out("INCONCLUSIVE", None)
