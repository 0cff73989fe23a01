"""Command-line front end.

    besselorbit --input spec.json --command analyze [--format json|csv|text]

Exit codes: 0 BESSEL (or all checks passed), 1 NOT_BESSEL (or a check
failed), 2 INCONCLUSIVE, 3 bad input or usage, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import criteria as crit
from . import gram, heat
from .measure import (
    MeasureError,
    SpecError,
    SpectralMeasureSpec,
    integrate_measure,
    load_spec,
    poisson_integral,
    resolvent_norm_sq,
    stieltjes_inversion,
    support_radius,
)
from .quadrature import Tolerance

SCHEMA_VERSION = "1.0"
COMMANDS = ("analyze", "gram-profile", "criteria", "heat", "verify")
EXIT_CODES = {"BESSEL": 0, "NOT_BESSEL": 1, "INCONCLUSIVE": 2}
EXIT_USAGE = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="besselorbit", description="Bessel tests for operator orbits from a spectral measure.")
    p.add_argument("--input", help="measure-spec JSON file (not needed for --command heat)")
    p.add_argument("--command", choices=COMMANDS, default="analyze")
    p.add_argument("--tol", type=float, default=1e-9, help="relative quadrature tolerance (default 1e-9)")
    p.add_argument("--max-size", type=int, default=256, help="largest Gram section (default 256)")
    p.add_argument("--eps-min", type=float, default=2.0**-40,
                   help="finest dyadic scale for tail grids (default 2^-40)")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--delta", type=float, default=1.0, help="time step for --command heat (default 1)")
    return p


def make_config(args) -> crit.CriteriaConfig:
    if not (args.tol > 0 and math.isfinite(args.tol)):
        raise UsageError("--tol must be positive")
    if args.max_size < 1:
        raise UsageError("--max-size must be at least 1")
    if not 0 < args.eps_min < 1:
        raise UsageError("--eps-min must lie in (0, 1)")
    m_max = max(1, math.ceil(-math.log2(args.eps_min) - 1e-12))
    sizes = []
    n = 8
    while n < args.max_size:
        sizes.append(n)
        n *= 2
    sizes.append(args.max_size)
    sizes = sorted(set(s for s in sizes if s <= args.max_size))
    tol = Tolerance(atol=args.tol / 10, rtol=args.tol)
    return replace(crit.DEFAULT_CONFIG, eps_exponents=tuple(range(1, m_max + 1)),
                   gram_sizes=tuple(sizes), tol=tol)


# --- commands --------------------------------------------------------------


def cmd_analyze(mu, cfg):
    v = crit.verdict(mu, cfg)
    return v.to_dict(), EXIT_CODES[v.status]


def cmd_criteria(mu, cfg):
    reports = crit.run_criteria(mu, cfg)
    return {"operator_class": crit.classify_operator(mu),
            "reports": [r.to_dict() for r in sorted(reports, key=lambda r: r.id)]}, 0


def cmd_gram_profile(mu, cfg):
    rep = crit.gram_profile_report(mu, cfg)
    return {"structure": gram.build_section(mu, 1, cfg.tol).structure, "report": rep.to_dict()}, 0


def cmd_heat(args, cfg):
    p = heat.HeatMeasureParams(args.delta)
    ks = [0] + [2**i for i in range(0, 21)]
    moments = []
    for k in ks:
        q = heat.heat_moment(p, k, cfg.tol)
        moments.append({"k": k, "q_k": q, "k_q_k": k * q, "closed_form": heat.heat_moment_closed_form(p, k)})
    rep = heat.non_bessel_witness(p, cfg)
    tails = [{"eps": e, "tail": r * e, "tail_over_eps": r, "closed_form_tail_over_eps": c}
             for (e, r), c in zip(rep.values, rep.grid["closed_form_ratio"])]
    v = crit.verdict(heat.heat_measure(p), cfg)
    return {"delta": p.delta, "moments": moments, "tails": tails, "witness": rep.to_dict(),
            "verdict": {"status": v.status, "witness": v.witness}}, EXIT_CODES[v.status]


def _check(name, ok, **values):
    return {"id": name, "pass": bool(ok), **{k: crit._jsonable(v) for k, v in values.items()}}


def cmd_verify(mu: SpectralMeasureSpec, cfg):
    """Cross-criterion identities on the input measure."""
    tol = cfg.tol
    checks = []
    circle = mu.circle_part()
    disc = mu.disk_part()
    inside = support_radius(mu) <= 1.0
    rng = np.random.default_rng(0)

    # synthesis operator vs Gram section
    n = 8
    sec = gram.build_section(mu, n, tol)
    G = sec.entries()
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    direct = float(np.real(integrate_measure(
        mu, lambda z: np.abs(np.polynomial.polynomial.polyval(z, c)) ** 2 * np.ones((1, 1)), tol)[0]))
    quad = float(np.real(np.conj(c) @ G @ c))
    checks.append(_check("synthesis_gram", abs(direct - quad) <= 1e-7 * max(1.0, abs(direct)),
                         direct=direct, gram=quad))
    w_min = float(np.min(np.linalg.eigvalsh(G)))
    checks.append(_check("gram_psd", w_min >= -1e-8 * max(1.0, np.max(np.abs(G))), min_eigenvalue=w_min))

    # adjoint orbit has the same Gram norm
    a = gram.operator_norm(gram.build_section(mu, 32, tol))
    b = gram.operator_norm(gram.build_section(mu, 32, tol, adjoint=True))
    checks.append(_check("adjoint_symmetry", abs(a - b) <= 1e-9 * max(a, 1e-300), norm=a, adjoint_norm=b))

    if circle.components:
        ws = [0.0, 0.3 + 0.4j, -0.7j, 0.95]
        rel = 0.0
        for w in ws:
            p = poisson_integral(circle, w, tol)
            r = (1 - abs(w) ** 2) * resolvent_norm_sq(circle, w, tol)
            rel = max(rel, abs(p - r) / max(abs(p), 1e-300))
        checks.append(_check("poisson_resolvent_link", rel <= 1e-9, max_relative_difference=rel))
        w = 0.5 + 0.2j
        p1, p2 = poisson_integral(circle, w, tol), poisson_integral(circle, 1 / np.conj(w), tol)
        checks.append(_check("poisson_reflection", abs(p1 + p2) <= 1e-9 * max(1.0, abs(p1)),
                             inside=p1, reflected=p2))
        alpha, beta = 0.3, 2.0
        rs = [1 - 2.0**-m for m in (4, 8, 12)]
        vals = stieltjes_inversion(circle, alpha, beta, rs, tol)
        target = _arc_mass(circle, alpha, beta, tol)
        err = abs(vals[-1] - target)
        checks.append(_check("stieltjes_inversion", err <= 2.0**-6 * max(1.0, target),
                             values=list(vals), arc_mass=target))
        if mu.circle_supported() and not circle.atoms().locations:
            lip = crit.lipschitz_constant_circle(mu, cfg)
            N = max(cfg.gram_sizes)
            g = gram.operator_norm(gram.build_section(mu, N, tol))
            ok = g <= lip.constant * (1 + 1e-6) + 1e-9 and g >= 0.99 * lip.constant
            checks.append(_check("toeplitz_symbol", ok, section_norm=g, size=N, density_sup=lip.constant))

    if inside and disc.components:
        car = crit.carleson_constant(mu, cfg)
        res = crit.resolvent_growth_sup(mu, cfg, inner=False)
        checks.append(_check("carleson_resolvent_agreement", car.divergent == res.divergent,
                             carleson_divergent=car.divergent, resolvent_divergent=res.divergent))
        rel = 0.0
        for lam in (1.1, 1.01j, -1.001 + 0.0005j):
            lhs = (abs(lam) ** 2 - 1) * resolvent_norm_sq(disc, lam, tol)
            rhs = crit.carleson_kernel_integral(mu, 1 / np.conj(lam), tol)
            rel = max(rel, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        checks.append(_check("carleson_kernel_resolvent", rel <= 1e-9, max_relative_difference=rel))

    status = all(ch["pass"] for ch in checks)
    return {"checks": checks, "all_pass": status}, 0 if status else 1


def _arc_mass(circle: SpectralMeasureSpec, alpha, beta, tol) -> float:
    """``mu(open arc) + half the endpoint atoms`` for the circle part."""
    total = 0.0
    for c in circle:
        if c.kind == "circle":
            total += c.arc_mass(alpha, beta, tol)
        else:
            for z, m in zip(c.locations, c.masses):
                ang = alpha + (math.atan2(z.imag, z.real) - alpha) % (2 * math.pi)
                if abs(ang - alpha) < 1e-12 or abs(ang - beta) < 1e-12 or abs(ang - alpha - 2 * math.pi) < 1e-12:
                    total += m / 2
                elif alpha < ang < beta:
                    total += m
    return total


# --- output ----------------------------------------------------------------


def _rows(payload, command):
    """Flatten a payload to CSV rows."""
    if command == "heat":
        rows = [["table", "x", "value", "scaled", "closed_form"]]
        for m in payload["moments"]:
            rows.append(["moment", m["k"], m["q_k"], m["k_q_k"], m["closed_form"]])
        for t in payload["tails"]:
            rows.append(["tail", t["eps"], t["tail"], t["tail_over_eps"], t["closed_form_tail_over_eps"]])
        return rows
    if command == "verify":
        return [["check", "pass"]] + [[c["id"], c["pass"]] for c in payload["checks"]]
    reports = payload.get("reports") or [payload["report"]]
    rows = [["criterion", "grid_point", "value"]]
    for r in reports:
        for x, y in r["values"]:
            rows.append([r["id"], x, y])
    return rows


def _text(payload, command) -> str:
    out = []
    if command == "analyze":
        out.append(f"verdict: {payload['status']}  class: {payload['operator_class']}")
        if payload["witness"]:
            out.append(f"witness: {payload['witness']}")
        if payload["bound"] is not None:
            out.append(f"bound: {payload['bound']} ({payload['bound_kind']})")
    if command == "verify":
        for c in payload["checks"]:
            out.append(f"{'PASS' if c['pass'] else 'FAIL'}  {c['id']}")
        return "\n".join(out) + "\n"
    if command == "heat":
        out.append(f"heat measure, delta={payload['delta']}: {payload['verdict']['status']} "
                   f"(witness {payload['verdict']['witness']})")
        for m in payload["moments"]:
            out.append(f"  k={m['k']:<8d} q_k={m['q_k']:.10g}  k*q_k={m['k_q_k']:.6g}")
        return "\n".join(out) + "\n"
    reports = payload.get("reports") or [payload["report"]]
    for r in reports:
        out.append(f"{r['id']:<28} {str(r['constant']):<24} {r['status']:<14} -- {r['citation']}")
    return "\n".join(out) + "\n"


def render(payload, command, fmt) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "result": payload}
        return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(_rows(payload, command))
        return buf.getvalue()
    return _text(payload, command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if args.command == "heat":
            payload, code = cmd_heat(args, cfg)
        else:
            if not args.input:
                raise UsageError(f"--input is required for --command {args.command}")
            mu = load_spec(args.input)
            handler = {"analyze": cmd_analyze, "criteria": cmd_criteria,
                       "gram-profile": cmd_gram_profile, "verify": cmd_verify}[args.command]
            payload, code = handler(mu, cfg)
    except (UsageError, SpecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if not isinstance(exc, MeasureError) or isinstance(exc, SpecError) else EXIT_NUMERIC
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(payload, args.command, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
