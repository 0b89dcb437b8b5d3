"""Weighted integrals over half-balls B_r^+(x0) and the monotonicity quantities.

All integrals use one polar tensor grid centered at x0 (angle measured from
the +x2 axis toward +x1).  Each radial node carries its own angular range,
clipped so that x1 stays nonnegative, and both ranges are split at known
kinks: the radius x0_1 where the half-ball reaches the axis and the support
boundary rays reported by the field.  Piecewise-smooth integrands are then
integrated with Gauss-Legendre panels to near machine precision.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import (AxiblowError, CaseMismatchError, DomainError, IntegrandError,
                     ZeroDenominatorError)
from .field import Field, GridField
from .profiles import BlowupCase

J_ZERO_TOL = 1e-30
ANALYTIC_TREND_TOL = 1e-6
GRID_TREND_TOL = 1e-3

# (a, b) in M(r) = r^-a I(r) - b r^-(a+1) J(r), with the CSV column it fills
M_COEFFICIENTS = {
    BlowupCase.INTERIOR: (2, 1.0, "M_int"),
    BlowupCase.HORIZONTAL: (3, 1.5, "M_x2"),
    BlowupCase.AXIS: (3, 2.0, "M_x1"),
    BlowupCase.ORIGIN: (4, 2.5, "M_x1x2"),
}
CSV_COLUMNS = ("r", "I", "J", "M_int", "M_x2", "M_x1", "M_x1x2", "D", "V", "H")


@dataclass(frozen=True)
class QuadratureSpec:
    n_rho: int = 48
    n_theta: int = 48
    rule: str = "gauss"
    axis_offset: float = 1e-12

    def __post_init__(self):
        if self.n_rho < 16 or self.n_theta < 16:
            raise DomainError("n_rho and n_theta must be at least 16")
        if not self.axis_offset > 0:
            raise DomainError("axis_offset must be positive")
        if self.rule not in ("gauss", "midpoint"):
            raise DomainError(f"unknown quadrature rule {self.rule!r}")


DEFAULT_QUAD = QuadratureSpec()


@lru_cache(maxsize=32)
def _unit_rule(n: int, rule: str) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]; neither rule samples the endpoints."""
    if rule == "gauss":
        x, w = np.polynomial.legendre.leggauss(n)
        return 0.5 * (x + 1.0), 0.5 * w
    return (np.arange(n) + 0.5) / n, np.full(n, 1.0 / n)


def _panels(lo: float, hi: float, cuts: Sequence[float]) -> list[tuple[float, float]]:
    pts = [lo] + sorted(c for c in cuts if lo < c < hi) + [hi]
    return [(a, b) for a, b in zip(pts[:-1], pts[1:]) if b > a]


def _theta_range(x01: float, rho: float) -> tuple[float, float]:
    if x01 <= 0.0:
        return 0.0, math.pi
    if rho <= x01:
        return -math.pi, math.pi
    s = math.asin(x01 / rho)
    return -s, math.pi + s


def _angular_cuts(breaks: Sequence[float], lo: float, hi: float) -> list[float]:
    cuts = []
    for b in breaks:
        for k in (-1, 0, 1):
            c = b + 2 * math.pi * k
            if lo < c < hi:
                cuts.append(c)
    return cuts


def _theta_nodes(lo, hi, cuts, quad):
    t, w = _unit_rule(quad.n_theta, quad.rule)
    th, wt = [], []
    for a, b in _panels(lo, hi, cuts):
        th.append(a + (b - a) * t)
        wt.append((b - a) * w)
    return np.concatenate(th), np.concatenate(wt)


@dataclass
class NodeSet:
    """Quadrature nodes in Cartesian and polar form with their weights."""

    x1: np.ndarray
    x2: np.ndarray
    rho: np.ndarray
    theta: np.ndarray
    w: np.ndarray


def _keep(nodes: NodeSet, quad: QuadratureSpec) -> NodeSet:
    ok = nodes.x1 > quad.axis_offset * np.maximum(nodes.rho, 1.0)
    return NodeSet(*(a[ok] for a in (nodes.x1, nodes.x2, nodes.rho, nodes.theta, nodes.w)))


def area_nodes(x0, r: float, breaks: Sequence[float] = (), quad: QuadratureSpec = DEFAULT_QUAD,
               r_inner: float = 0.0, ring_cuts=None) -> NodeSet:
    """Nodes for integrals over B_r^+(x0), or the annulus r_inner < rho < r (weights include rho).

    ``ring_cuts(rho, lo, hi)``, if given, maps arrays of ring radii and
    angular limits to extra cut angles per ring (support crossings of
    sampled fields).
    """
    x01, x02 = (float(v) for v in x0)
    if not r > r_inner >= 0.0:
        raise DomainError("need 0 <= r_inner < r")
    t, w = _unit_rule(quad.n_rho, quad.rule)
    rings = []
    for a, b in _panels(r_inner, r, [x01]):
        if a == x01 > 0.0:
            # the angular range opens like sqrt(rho - x01) once the ring reaches the
            # axis; rho = a + (b - a) s^2 makes the integrand smooth in s again
            rings += zip(a + (b - a) * t * t, 2.0 * (b - a) * t * w)
        else:
            rings += zip(a + (b - a) * t, (b - a) * w)
    limits = [_theta_range(x01, rho) for rho, _ in rings]
    extra = ring_cuts(np.array([rho for rho, _ in rings]), np.array([l for l, _ in limits]),
                      np.array([h for _, h in limits])) if ring_cuts is not None else [[]] * len(rings)
    rho_all, th_all, w_all = [], [], []
    for (rho, wr), (lo, hi), more in zip(rings, limits, extra):
        th, wt = _theta_nodes(lo, hi, _angular_cuts(breaks, lo, hi) + list(more), quad)
        rho_all.append(np.full(th.shape, rho))
        th_all.append(th)
        w_all.append(wt * wr * rho)
    rho = np.concatenate(rho_all)
    theta = np.concatenate(th_all)
    nodes = NodeSet(x01 + rho * np.sin(theta), x02 + rho * np.cos(theta), rho, theta, np.concatenate(w_all))
    return _keep(nodes, quad)


def arc_nodes(x0, r: float, breaks: Sequence[float] = (), quad: QuadratureSpec = DEFAULT_QUAD,
              ring_cuts=None) -> NodeSet:
    """Nodes for integrals over the circular part of the boundary of B_r^+(x0) (arc-length weights)."""
    x01, x02 = (float(v) for v in x0)
    if not r > 0:
        raise DomainError("radius must be positive")
    lo, hi = _theta_range(x01, r)
    cuts = _angular_cuts(breaks, lo, hi)
    if ring_cuts is not None:
        cuts += list(ring_cuts(np.array([r]), np.array([lo]), np.array([hi]))[0])
    th, wt = _theta_nodes(lo, hi, cuts, quad)
    nodes = NodeSet(x01 + r * np.sin(th), x02 + r * np.cos(th), np.full(th.shape, r), th, wt * r)
    return _keep(nodes, quad)


@dataclass(frozen=True)
class BallIntegrals:
    """Raw integrals on B_r^+(x0): the building blocks of every functional."""

    r: float
    dirichlet: float   # int (1/x1)|grad u|^2
    volume: float      # int x1 x2 chi_{u>0}
    volume_neg: float  # int x1 x2 (1 - chi_{u>0})
    J: float           # int_{arc} u^2 / x1
    B: float           # int_{arc} u d_nu u / x1

    @property
    def I(self) -> float:
        return self.dirichlet + self.volume


def _check_domain(field: Field, nodes: NodeSet) -> None:
    if nodes.x1.size and not np.all(field.contains(nodes.x1, nodes.x2)):
        raise DomainError("half-ball leaves the field domain")


def _finite(name: str, arr: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise IntegrandError(f"non-finite {name} integrand")
    return arr


def ball_integrals(field: Field, x0, r: float, quad: QuadratureSpec = DEFAULT_QUAD) -> BallIntegrals:
    breaks = field.angular_breaks(x0)
    cuts = field.ring_cut_finder(x0)
    area = area_nodes(x0, r, breaks, quad, ring_cuts=cuts)
    arc = arc_nodes(x0, r, breaks, quad, ring_cuts=cuts)
    _check_domain(field, area)
    _check_domain(field, arc)

    wa = field.weight(area.x1)
    g1, g2 = field.grad(area.x1, area.x2)
    chi = np.asarray(field.positive(area.x1, area.x2), dtype=float)
    dens = _finite("energy", (g1 * g1 + g2 * g2) / wa)
    x1x2 = _finite("volume", wa * area.x2)

    wb = field.weight(arc.x1)
    u = np.asarray(field.value(arc.x1, arc.x2), dtype=float)
    b1, b2 = field.grad(arc.x1, arc.x2)
    dnu = np.sin(arc.theta) * b1 + np.cos(arc.theta) * b2
    jj = _finite("boundary", u * u / wb)
    bb = _finite("boundary", u * dnu / wb)
    return BallIntegrals(
        r=float(r),
        dirichlet=float(area.w @ dens),
        volume=float(area.w @ (x1x2 * chi)),
        volume_neg=float(area.w @ (x1x2 * (1.0 - chi))),
        J=float(arc.w @ jj),
        B=float(arc.w @ bb),
    )


def energy_I(field: Field, x0, r: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return ball_integrals(field, x0, r, quad).I


def boundary_J(field: Field, x0, r: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return ball_integrals(field, x0, r, quad).J


def _require_case(x0, case) -> BlowupCase:
    actual = BlowupCase.of(x0)
    if case is None:
        return actual
    case = BlowupCase(case)
    if case is not actual:
        raise CaseMismatchError(f"case {case.value} does not match center {tuple(x0)} ({actual.value})")
    return case


def m_from_integrals(bi: BallIntegrals, case: BlowupCase) -> float:
    a, b, _ = M_COEFFICIENTS[case]
    r = bi.r
    return r ** (-a) * bi.I - b * r ** (-a - 1) * bi.J


def monotonicity_M(field: Field, x0, r: float, case=None, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Case-adapted M(r) = r^-a I(r) - b r^-(a+1) J(r)."""
    case = _require_case(x0, case)
    return m_from_integrals(ball_integrals(field, x0, r, quad), case)


def direct_density(field: Field, x0, r: float, case=None, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """r^-a int x1 x2 chi_{u>0}: the volume part of M alone, whose r -> 0 limit is the density."""
    case = _require_case(x0, case)
    a = M_COEFFICIENTS[case][0]
    return r ** (-a) * ball_integrals(field, x0, r, quad).volume


@dataclass(frozen=True)
class Frequency:
    D: float
    V: float
    H: float


def _frequency_from(bi: BallIntegrals) -> Frequency:
    if not bi.J > J_ZERO_TOL:
        raise ZeroDenominatorError(f"J({bi.r:g}) = {bi.J:.3g}: u vanishes near the center")
    D = bi.r * bi.dirichlet / bi.J
    V = bi.r * bi.volume_neg / bi.J
    return Frequency(D=D, V=V, H=D - V)


def frequency(field: Field, r: float, quad: QuadratureSpec = DEFAULT_QUAD, x0=(0.0, 0.0)) -> Frequency:
    """D, V and H = D - V on B_r^+(x0); x0 defaults to the origin."""
    return _frequency_from(ball_integrals(field, x0, r, quad))


def identity_ttr_residual(field: Field, r: float, quad: QuadratureSpec = DEFAULT_QUAD, x0=(0.0, 0.0)) -> float:
    """Relative residual of int(r d_nu u - D u)^2/x1 + V^2 int u^2/x1 = int(r d_nu u - H u)^2/x1.

    The two sides differ by 2V (D J - r B); the difference vanishes exactly
    when the area energy equals its boundary form, so this measures the
    integration-by-parts identity as seen by the quadrature.
    """
    bi = ball_integrals(field, x0, r, quad)
    fr = _frequency_from(bi)
    arc = arc_nodes(x0, r, field.angular_breaks(x0), quad, ring_cuts=field.ring_cut_finder(x0))
    w = field.weight(arc.x1)
    u = np.asarray(field.value(arc.x1, arc.x2), dtype=float)
    g1, g2 = field.grad(arc.x1, arc.x2)
    rdnu = r * (np.sin(arc.theta) * g1 + np.cos(arc.theta) * g2)
    lhs = arc.w @ ((rdnu - fr.D * u) ** 2 / w) + fr.V ** 2 * (arc.w @ (u * u / w))
    rhs = arc.w @ ((rdnu - fr.H * u) ** 2 / w)
    scale = max(abs(lhs), abs(rhs), float(arc.w @ (rdnu * rdnu / w)))
    if scale == 0.0:
        return 0.0
    return float(abs(lhs - rhs) / scale)


@dataclass
class FunctionalRecord:
    r: float
    x0: tuple[float, float]
    I: float | None = None
    J: float | None = None
    M: dict = dc_field(default_factory=dict)
    D: float | None = None
    V: float | None = None
    H: float | None = None
    error: str | None = None
    integrals: BallIntegrals | None = None

    def row(self) -> dict:
        out = {"r": self.r, "I": self.I, "J": self.J, "D": self.D, "V": self.V, "H": self.H}
        for col in ("M_int", "M_x2", "M_x1", "M_x1x2"):
            out[col] = self.M.get(col)
        return out


@dataclass
class CurveTable:
    x0: tuple[float, float]
    case: BlowupCase
    records: list[FunctionalRecord]
    flags: dict
    notes: list[str]

    @property
    def m_column(self) -> str:
        return M_COEFFICIENTS[self.case][2]

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if rec.row()[name] is None else rec.row()[name] for rec in self.records])

    @property
    def radii(self) -> np.ndarray:
        return np.array([rec.r for rec in self.records])

    @property
    def errors(self) -> list[str]:
        return [f"r={rec.r:g}: {rec.error}" for rec in self.records if rec.error]


def thread_count(requested: int | None = None) -> int:
    """Worker count: explicit request, else AXIBLOW_THREADS (0 or unset = all cores)."""
    if requested is None:
        raw = os.environ.get("AXIBLOW_THREADS", "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError as exc:
            raise DomainError(f"AXIBLOW_THREADS must be an integer, got {raw!r}") from exc
    if requested < 0:
        raise DomainError("thread count must be nonnegative")
    return requested or (os.cpu_count() or 1)


def _record(field, x0, r, case, quad) -> FunctionalRecord:
    rec = FunctionalRecord(r=float(r), x0=tuple(x0))
    try:
        bi = ball_integrals(field, x0, r, quad)
        rec.integrals = bi
        rec.I, rec.J = bi.I, bi.J
        rec.M[M_COEFFICIENTS[case][2]] = m_from_integrals(bi, case)
        if case is BlowupCase.ORIGIN:
            fr = _frequency_from(bi)
            rec.D, rec.V, rec.H = fr.D, fr.V, fr.H
    except (AxiblowError, ArithmeticError, ValueError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _trend(values: np.ndarray, rel_tol: float) -> str:
    values = values[np.isfinite(values)]
    if values.size < 2:
        return "undetermined"
    tol = rel_tol * max(1.0, float(np.max(np.abs(values))))
    diffs = np.diff(values)
    if np.all(np.abs(values - values[0]) <= tol):
        return "constant"
    if np.all(diffs >= -tol):
        return "nondecreasing"
    if np.all(diffs <= tol):
        return "nonincreasing"
    return "mixed"


def _nondecreasing(values: np.ndarray, rel_tol: float) -> bool | None:
    values = values[np.isfinite(values)]
    if values.size < 2:
        return None
    tol = rel_tol * max(1.0, float(np.max(np.abs(values))))
    return bool(np.all(np.diff(values) >= -tol))


def sweep(field: Field, x0, radii: Sequence[float], case=None, quad: QuadratureSpec = DEFAULT_QUAD,
          threads: int | None = None, trend_tol: float | None = None) -> CurveTable:
    """Functionals at each radius, per-radius errors collected, plus monotonicity diagnostics.

    The flags are diagnostics only: the monotonicity statements hold for
    variational solutions, which an arbitrary input is not known to be.
    ``trend_tol`` (relative) defaults to 1e-6 for analytic fields and 1e-3
    for sampled ones.
    """
    if trend_tol is None:
        trend_tol = GRID_TREND_TOL if isinstance(field, GridField) else ANALYTIC_TREND_TOL
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii[:-1], radii[1:])):
        raise DomainError("radii must be positive and strictly increasing")
    x0 = tuple(float(v) for v in x0)
    case = _require_case(x0, case)
    workers = min(thread_count(threads), len(radii))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda r: _record(field, x0, r, case, quad), radii))
    else:
        records = [_record(field, x0, r, case, quad) for r in radii]

    table = CurveTable(x0=x0, case=case, records=records, flags={}, notes=[])
    m = table.column(table.m_column)
    table.flags["M_trend"] = _trend(m, trend_tol)
    table.flags["M_constant"] = table.flags["M_trend"] == "constant"
    table.flags["M_nondecreasing"] = _nondecreasing(m, trend_tol)
    if case is BlowupCase.ORIGIN:
        h = table.column("H")
        j5 = table.column("J") * table.radii ** -5.0
        table.flags["H_nondecreasing"] = _nondecreasing(h, trend_tol)
        table.flags["J5_nondecreasing"] = _nondecreasing(j5, trend_tol)
        if table.flags["H_nondecreasing"] is False:
            table.notes.append("H decreases in r: the field violates the hypotheses under which H is "
                               "nondecreasing (not a variational solution vanishing in {x2 <= 0})")
        if table.flags["J5_nondecreasing"] is False:
            table.notes.append("r^-5 J decreases in r: hypotheses of the frequency monotonicity fail")
    else:
        table.flags["H_nondecreasing"] = None
        table.flags["J5_nondecreasing"] = None
    if table.flags["M_nondecreasing"] is False:
        table.notes.append(f"{table.m_column} is not nondecreasing: the field is not a variational "
                           "solution near x0, or the quadrature is under-resolved")
    return table


def extrapolate_zero(radii: Sequence[float], values: Sequence[float], k: int = 3) -> float:
    """Value at r = 0+ from a least-squares line through the k smallest radii."""
    r = np.asarray(radii, float)
    v = np.asarray(values, float)
    ok = np.isfinite(v)
    r, v = r[ok], v[ok]
    if r.size == 0:
        raise DomainError("no finite values to extrapolate")
    order = np.argsort(r)[:k]
    if order.size == 1:
        return float(v[order[0]])
    slope, intercept = np.polyfit(r[order], v[order], 1)
    return float(intercept)


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    return f"{v:.17g}"


def curves_csv(table: CurveTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in table.records:
        row = rec.row()
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def radii_grid(rmin: float, rmax: float, count: int, log: bool = True) -> np.ndarray:
    if not (0 < rmin < rmax) or count < 2:
        raise DomainError("need 0 < rmin < rmax and count >= 2")
    return np.geomspace(rmin, rmax, count) if log else np.linspace(rmin, rmax, count)
