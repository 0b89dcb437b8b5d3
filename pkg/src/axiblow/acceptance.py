"""Acceptance checks behind ``axiblow verify``.

Each check returns a CheckResult with sub-results; a check passes only if
all of its sub-results pass.  Tolerances are those of the acceptance
criteria and are never relaxed here: where a criterion cannot be met the
check fails and the detail line says why.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .classify import (boundary_angles, classify_point, growth_exponent, homogeneity_degree,
                       rescaled_profile_residual)
from .field import fb_residual, pde_residual, sample_field
from .functionals import ball_integrals, frequency, identity_ttr_residual, m_from_integrals
from .profiles import (PROFILES, SHIPPED, BlowupCase, axis_profile, build_profile,
                       degenerate_limit_field, degenerate_positive_part, garabedian_profile,
                       perturbed_degenerate_field, stokes_corner)
from .specfun import find_z0, gamma, gamma_closed_forms, lemma_f, legendre_p_prime, legendre_ratio

QUOTED_ANGLE_DEG = 114.799


@dataclass
class SubResult:
    name: str
    passed: bool
    detail: str

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class CheckResult:
    name: str
    title: str
    subresults: list[SubResult] = dc_field(default_factory=list)
    elapsed: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.subresults) and all(s.passed for s in self.subresults)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [s for s in self.subresults if not s.passed]
        summary = self.error or ("; ".join(f"{s.name}: {s.detail}" for s in failed) if failed else
                                 "; ".join(s.detail for s in self.subresults[:2]))
        return f"[{status}] {self.name} ({self.elapsed:.2f}s) {self.title} -- {summary}"

    def as_dict(self) -> dict:
        return {"name": self.name, "title": self.title, "passed": self.passed, "elapsed": self.elapsed,
                "error": self.error, "subresults": [s.as_dict() for s in self.subresults]}


@dataclass(frozen=True)
class VerifyContext:
    """Knobs for fault injection in the suite's own tests."""

    z0_offset: float = 0.0


def _close(name, value, target, tol, fmt="{:.10g}") -> SubResult:
    ok = bool(abs(value - target) <= tol)
    return SubResult(name, ok, f"{fmt.format(value)} vs {fmt.format(target)} (tol {tol:g})")


def check_angle(ctx: VerifyContext) -> list[SubResult]:
    t0 = time.perf_counter()
    root = find_z0(1e-12)
    z0 = root.z0 + ctx.z0_offset
    opening = 2.0 * math.degrees(math.acos(-z0))
    elapsed = time.perf_counter() - t0
    water = math.degrees(math.acos(z0))
    return [
        _close("opening 2*arccos(-z0) [deg]", opening, QUOTED_ANGLE_DEG, 0.01, "{:.6f}"),
        SubResult("runtime", elapsed < 1.0, f"{elapsed:.3f}s (< 1 s)"),
        SubResult("note", True, f"z0={z0:.15g}; arccos(z0)={water:.6f} deg is the quoted angle"),
    ]


def check_stokes_geometry(ctx: VerifyContext) -> list[SubResult]:
    field = stokes_corner(1.0)
    grid = sample_field(field, 1024, 1024, PROFILES["stokes"].extent({"x1": 1.0}))
    est = boundary_angles(grid, (1.0, 0.0))
    target = 1.0 / math.sqrt(3.0)
    subs = [SubResult("branches", len(est.slopes) == 2, f"{len(est.slopes)} branches found")]
    if len(est.slopes) == 2:
        for k, s in enumerate(sorted(est.slopes)):
            want = -target if k == 0 else target
            subs.append(_close(f"slope {k}", s, want, 0.02 * target, "{:.6f}"))
        d = [np.array(v) for v in est.directions]
        opening = math.degrees(math.acos(float(np.clip(d[0] @ d[1], -1, 1))))
        subs.append(_close("opening [deg]", opening, 120.0, 1.0, "{:.4f}"))
    return subs


def check_quadrature_oracle(ctx: VerifyContext) -> list[SubResult]:
    f = degenerate_positive_part()
    r = 0.5
    bi = ball_integrals(f, (0.0, 0.0), r)
    fr = frequency(f, r)
    return [
        _close("I", bi.I, 2 * r ** 5 / 5 + r ** 4 / 8, 1e-6),
        _close("J", bi.J, 2 * r ** 6 / 15, 1e-7),
        _close("M_x1x2", m_from_integrals(bi, BlowupCase.ORIGIN), 1 / 8 + r / 15, 1e-5),
        _close("D", fr.D, 3.0, 1e-4),
        _close("V", fr.V, -1.875, 1e-3),
        _close("H", fr.H, 4.875, 1e-3),
    ]


def check_garabedian(ctx: VerifyContext) -> list[SubResult]:
    field, ang = garabedian_profile()
    radii = np.round(np.arange(0.1, 0.91, 0.1), 10)
    ms, ds = [], []
    for r in radii:
        bi = ball_integrals(field, (0.0, 0.0), r)
        ms.append(m_from_integrals(bi, BlowupCase.ORIGIN))
        ds.append(frequency(field, r).D)
    ms, ds = np.array(ms), np.array(ds)
    density = (1.0 - ang.z0 ** 2) / 8.0
    t = ang.theta_star
    fb = [abs(fb_residual(field, (rho * math.sin(t), rho * math.cos(t)))) for rho in (0.2, 0.5, 0.8)]
    pts = [(rho * math.sin(th), rho * math.cos(th)) for rho in (0.3, 0.6, 0.9)
           for th in np.linspace(t + 0.15, math.pi - 0.3, 4)]
    pde = [abs(pde_residual(field, p)) for p in pts]
    return [
        SubResult("M constant", float(np.ptp(ms)) <= 1e-3, f"spread {np.ptp(ms):.2e} over r=0.1..0.9"),
        _close("M value vs (1-z0^2)/8", float(ms.mean()), density, 1e-3, "{:.7f}"),
        _close("|M| vs (1-z0^2)/8", float(abs(ms.mean())), density, 1e-3, "{:.7f}"),
        SubResult("D = 5/2", bool(np.all(np.abs(ds - 2.5) <= 1e-4)), f"max |D-5/2| = {np.max(np.abs(ds - 2.5)):.2e}"),
        SubResult("fb residual", max(fb) < 1e-6, f"max {max(fb):.2e}"),
        SubResult("pde residual", max(pde) < 1e-6, f"max {max(pde):.2e}"),
    ]


def _shipped_fields():
    out = []
    for name in SHIPPED:
        f, p = build_profile(name)
        out.append((name, f, PROFILES[name].center(p)))
    return out


def check_ttr(ctx: VerifyContext) -> list[SubResult]:
    subs = []
    for name, f, x0 in _shipped_fields():
        res = [identity_ttr_residual(f, r, x0=x0) for r in (0.25, 0.5, 0.75)]
        subs.append(SubResult(name, max(res) < 1e-8, f"max relative residual {max(res):.2e}"))
    return subs


def check_legendre_lemma(ctx: VerifyContext) -> list[SubResult]:
    x = np.linspace(-1.0, 1.0, 1001)[1:-1]
    f = lemma_f(x)
    g = legendre_ratio(x)
    d = np.diff(g)
    bad = np.nonzero(~(d > 0))[0]
    pole = -find_z0().z0
    straddle = [(float(x[k]), float(x[k + 1])) for k in bad]
    branch_ok = all(a < pole < b for a, b in straddle)
    oracle = 3 * math.sqrt(math.pi) / (gamma(-0.25) * gamma(1.75)) * math.sqrt(math.pi) / (gamma(0.25) * gamma(1.25))
    return [
        SubResult("f < 0", bool(np.all(f < 0)), f"max f = {f.max():.6f} on {x.size} points"),
        SubResult("ratio increasing (all pairs)", bad.size == 0,
                  f"{bad.size} of {d.size} pairs not increasing" +
                  (f", at {[(round(a, 4), round(b, 4)) for a, b in straddle]} across the pole x=-z0={pole:.5f}"
                   if bad.size else "")),
        SubResult("ratio increasing (each branch)", branch_ok,
                  "every non-increasing pair straddles the pole" if branch_ok else "decrease inside a branch"),
        _close("f(0) vs Gamma oracle", float(lemma_f(0.0)), oracle, 1e-10, "{:.12f}"),
    ]


def check_closed_forms(ctx: VerifyContext) -> list[SubResult]:
    subs = []
    for m in (0.5, 1.5, 2.5):
        cf = gamma_closed_forms(m)
        subs.append(_close(f"P'_{m}(0)", legendre_p_prime(m, 0.0), cf.p_prime_0, 1e-10, "{:.12f}"))
    return subs


def check_homogeneity(ctx: VerifyContext) -> list[SubResult]:
    radii = np.geomspace(0.05, 0.4, 6)
    cases = [("stokes", stokes_corner(1.0), (1.0, 0.0), 1.5), ("axis", axis_profile(1.0), (0.0, 0.5), 2.0),
             ("garabedian", garabedian_profile()[0], (0.0, 0.0), 2.5),
             ("deglimit", degenerate_limit_field(), (0.0, 0.0), 3.0)]
    return [_close(name, homogeneity_degree(f, x0, radii), deg, 1e-2, "{:.6f}") for name, f, x0, deg in cases]


def check_classifier(ctx: VerifyContext) -> list[SubResult]:
    subs = []
    for name in SHIPPED:
        f, p = build_profile(name)
        entry = PROFILES[name]
        grid = sample_field(f, 512, 512, entry.extent(p))
        pc = classify_point(grid, entry.center(p))
        expected = pc.menu.as_dict()[entry.label]
        err = abs(pc.M0 - expected) if pc.M0 is not None else math.inf
        ok = pc.matched == entry.label and err < 1e-3
        subs.append(SubResult(name, ok, f"matched {pc.matched} (want {entry.label}), |M0 - {expected:.6g}| = {err:.2e}"))
    return subs


def check_deg2d(ctx: VerifyContext) -> list[SubResult]:
    res = rescaled_profile_residual(perturbed_degenerate_field(), [0.4, 0.2, 0.1])
    growth = growth_exponent(degenerate_limit_field(), np.geomspace(0.05, 0.5, 6))
    return [
        SubResult("residual decreasing", res[0] > res[1] > res[2], ", ".join(f"{v:.4g}" for v in res)),
        SubResult("residual at r=0.1", res[2] < 0.05, f"{res[2]:.4g} < 0.05"),
        _close("growth transition alpha*", growth.alpha_star, 3.0, 0.05, "{:.6f}"),
    ]


@dataclass(frozen=True)
class Check:
    name: str
    title: str
    tags: tuple[str, ...]
    run: Callable[[VerifyContext], list[SubResult]]

    def matches(self, pattern: str | None) -> bool:
        if not pattern:
            return True
        pattern = pattern.lower()
        return pattern in self.name.lower() or any(pattern in t for t in self.tags)


CHECKS: tuple[Check, ...] = (
    Check("c1-garabedian-angle", "cone angle from the zero of P'_3/2", ("specfun", "legendre", "angle"), check_angle),
    Check("c2-stokes-geometry", "Stokes corner slopes on a 1024^2 grid", ("boundary", "stokes"), check_stokes_geometry),
    Check("c3-quadrature-oracle", "closed-form integrals of x1^2 max(x2,0)", ("functionals", "quadrature"),
          check_quadrature_oracle),
    Check("c4-garabedian-profile", "pointed-bubble profile suite", ("profiles", "functionals", "garabedian"),
          check_garabedian),
    Check("c5-frequency-identity", "ttr identity on shipped profiles", ("functionals", "frequency"), check_ttr),
    Check("c6-legendre-lemma", "f < 0, monotone ratio, f(0)", ("specfun", "legendre", "lemma"), check_legendre_lemma),
    Check("c7-legendre-closed-forms", "P'_m(0) against Gamma closed forms", ("specfun", "legendre", "gamma"),
          check_closed_forms),
    Check("c8-homogeneity", "degree estimator on exact profiles", ("classify", "homogeneity"), check_homogeneity),
    Check("c9-classifier", "self-consistent labels at 512^2", ("classify",), check_classifier),
    Check("c10-deg2d", "degenerate-limit rescaling and growth", ("classify", "deg2d"), check_deg2d),
)


def run_check(check: Check, ctx: VerifyContext | None = None) -> CheckResult:
    ctx = ctx or VerifyContext()
    result = CheckResult(check.name, check.title)
    t0 = time.perf_counter()
    try:
        result.subresults = check.run(ctx)
    except Exception as exc:  # a crashing check is a failing check, reported not raised
        result.error = f"{type(exc).__name__}: {exc}"
    result.elapsed = time.perf_counter() - t0
    return result


def run_checks(pattern: str | None = None, ctx: VerifyContext | None = None) -> list[CheckResult]:
    return [run_check(c, ctx) for c in CHECKS if c.matches(pattern)]
