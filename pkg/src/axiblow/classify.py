"""Blow-up classification of a query point.

Combines the scaling exponent of the center's case, the extrapolated density
M(0+) matched against the case menu, a homogeneity-degree estimate from the
growth of J, and the boundary directions near the point matched against the
curve taxonomy (Stokes corner, horizontal flattening, pointed bubble,
vertical cusp).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from typing import Sequence

import numpy as np

from .boundary import extract_free_boundary
from .errors import AxiblowError, CaseMismatchError, DomainError, ZeroDenominatorError
from .field import Field, GridField, sample_field
from .functionals import (DEFAULT_QUAD, M_COEFFICIENTS, QuadratureSpec, area_nodes, ball_integrals,
                          extrapolate_zero, sweep)
from .profiles import BlowupCase, degenerate_limit_field
from .specfun import find_z0

AXIS_TOL = 1e-9
MATCH_REL_TOL = 0.02
KAPPA = {BlowupCase.INTERIOR: 1.0, BlowupCase.HORIZONTAL: 1.5, BlowupCase.AXIS: 2.0, BlowupCase.ORIGIN: 2.5}
# growth transition stated for the degenerate limit, recorded next to the measured one
DEG2D_STATED_ALPHA = 2.0
SLOPE_TOL = 0.02
FLAT_TOL = 0.05


def scaling_exponent(x0, tol: float = AXIS_TOL) -> float:
    return KAPPA[BlowupCase.of(x0, tol)]


@dataclass(frozen=True)
class DensityMenu:
    case: BlowupCase
    entries: tuple[tuple[str, float], ...]
    rel_tol: float = MATCH_REL_TOL

    def __post_init__(self):
        tol = self.tolerance
        for (la, va), (lb, vb) in combinations(self.entries, 2):
            if abs(va - vb) <= 2.0 * tol:
                raise ValueError(f"menu entries {la} and {lb} closer than twice the matching tolerance")

    @property
    def tolerance(self) -> float:
        return self.rel_tol * max(abs(v) for _, v in self.entries)

    @property
    def min_gap(self) -> float:
        return min(abs(va - vb) for (_, va), (_, vb) in combinations(self.entries, 2))

    def match(self, value: float) -> str:
        label, v = min(self.entries, key=lambda e: abs(e[1] - value))
        return label if abs(v - value) <= self.tolerance else "ambiguous"

    def as_dict(self) -> dict:
        return {label: value for label, value in self.entries}


def density_menu(case, x0) -> DensityMenu:
    """Possible densities M(0+) for the case, evaluated at the center x0.

    The Origin menu carries two pointed-bubble entries: the signed density
    of the realized profile (support between the cone and the axis, lying
    mostly below x2 = 0) and the density of the complementary cone above it.
    """
    case = BlowupCase(case)
    if BlowupCase.of(x0) is not case:
        raise CaseMismatchError(f"case {case.value} does not match center {tuple(x0)}")
    a, b = (float(v) for v in x0)
    if case is BlowupCase.INTERIOR:
        entries = (("halfplane", a * b * math.pi / 2), ("two-sided", a * b * math.pi), ("zero", 0.0))
    elif case is BlowupCase.HORIZONTAL:
        entries = (("stokes", a * math.sqrt(3.0) / 3.0), ("horizontal-positive", 2.0 * a / 3.0),
                   ("horizontal-negative", -2.0 * a / 3.0), ("zero", 0.0))
    elif case is BlowupCase.AXIS:
        entries = (("axis-full", 2.0 * b / 3.0), ("zero", 0.0))
    else:
        z0 = find_z0().z0
        cone = (1.0 - z0 * z0) / 8.0
        entries = (("garabedian", -cone), ("garabedian-statement", cone),
                   ("horizontal-positive", 0.125), ("horizontal-negative", -0.125), ("zero", 0.0))
    return DensityMenu(case=case, entries=entries)


def _loglog_slope(radii, values) -> float:
    return float(np.polyfit(np.log(radii), np.log(values), 1)[0])


def homogeneity_degree(field: Field, x0, radii: Sequence[float], quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Degree from the slope of log J against log r.

    J(r) grows like r^(2 lambda) about an axis point and like r^(2 lambda + 1)
    about a point off the axis, where the weight 1/x1 is locally constant.
    """
    J = np.array([ball_integrals(field, x0, r, quad).J for r in radii])
    if np.any(J <= 0.0):
        raise ZeroDenominatorError("J vanishes at some radius; the degree is undefined")
    offset = 1.0 if BlowupCase.of(x0) in (BlowupCase.INTERIOR, BlowupCase.HORIZONTAL) else 0.0
    return 0.5 * (_loglog_slope(np.asarray(radii, float), J) - offset)


# -- boundary directions -----------------------------------------------------------

def garabedian_slope() -> float:
    """Slope tan(pi/2 - theta*) of the pointed-bubble boundary relative to the horizontal."""
    return 1.0 / math.tan(find_z0().theta_star)


def slope_label(d1: float, d2: float) -> str:
    """Taxonomy label for a boundary branch with direction (d1, d2)."""
    if abs(d2) > 0 and abs(d1 / d2) < FLAT_TOL:
        return "vertical-cusp"
    s = abs(d2 / d1)
    if s < FLAT_TOL:
        return "horizontal"
    if abs(s - 1.0 / math.sqrt(3.0)) <= SLOPE_TOL / math.sqrt(3.0):
        return "stokes"
    g = garabedian_slope()
    if abs(s - g) <= SLOPE_TOL * g:
        return "garabedian"
    return "none"


@dataclass
class AngleEstimate:
    directions: list[tuple[float, float]]
    slopes: list[float]
    labels: list[str]
    match: str

    def as_dict(self) -> dict:
        return {"slopes": self.slopes, "labels": self.labels, "match": self.match,
                "directions": [list(d) for d in self.directions]}


def _local_grid(field: Field, x0, half_width: float, n: int) -> GridField:
    x01, x02 = (float(v) for v in x0)
    lo1 = max(0.0, x01 - half_width)
    return sample_field(field, n, n, (lo1, x01 + half_width, x02 - half_width, x02 + half_width))


def boundary_angles(field: Field, x0, half_width: float = 0.25, n: int = 401,
                    window: tuple[float, float] = (2.0, 20.0), gap_deg: float = 20.0) -> AngleEstimate:
    """Directions of free-boundary branches emanating from x0.

    Grid fields are used as given; analytic fields are first sampled on an
    n-by-n grid around x0.  Vertices at distance [2h, 20h] from x0 are split
    into branches at angular gaps wider than ``gap_deg``; each branch gets a
    least-squares line through x0 (principal axis of sum d d^T).
    """
    grid = field if isinstance(field, GridField) else _local_grid(field, x0, half_width, n)
    h = max(grid.h1, grid.h2)
    curve = extract_free_boundary(grid)
    x0 = np.array([float(v) for v in x0])
    if len(curve) == 0:
        return AngleEstimate([], [], [], "none")
    d = curve.vertices - x0
    dist = np.hypot(d[:, 0], d[:, 1])
    sel = d[(dist >= window[0] * h) & (dist <= window[1] * h)]
    if len(sel) == 0:
        return AngleEstimate([], [], [], "none")
    ang = np.arctan2(sel[:, 0], sel[:, 1])
    order = np.argsort(ang)
    ang, sel = ang[order], sel[order]
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))
    cut_after = np.nonzero(gaps > math.radians(gap_deg))[0]
    if len(cut_after) == 0:
        groups = [np.arange(len(ang))]
    else:
        # start just after a gap so no branch straddles the wrap-around
        start = (cut_after[0] + 1) % len(ang)
        idx = np.roll(np.arange(len(ang)), -start)
        rolled_gaps = np.roll(gaps, -start)
        bounds = np.nonzero(rolled_gaps > math.radians(gap_deg))[0]
        groups, prev = [], 0
        for b in bounds:
            groups.append(idx[prev:b + 1])
            prev = b + 1
    directions, slopes, labels = [], [], []
    for g in groups:
        pts = sel[g]
        w, vecs = np.linalg.eigh(pts.T @ pts)
        v = vecs[:, -1]
        if v @ pts.mean(axis=0) < 0:
            v = -v
        directions.append((float(v[0]), float(v[1])))
        slopes.append(float(v[1] / v[0]) if v[0] != 0 else math.inf)
        labels.append(slope_label(v[0], v[1]))
    unique = set(labels)
    match = labels[0] if len(unique) == 1 else "none"
    return AngleEstimate(directions, slopes, labels, match)


# -- classification ------------------------------------------------------------------

def admissible_radius(field: Field, x0) -> float:
    """Largest r with B_r^+(x0) inside the field domain."""
    if not isinstance(field, GridField):
        return math.inf
    x1min, x1max, x2min, x2max = field.extent
    x01, x02 = (float(v) for v in x0)
    r = min(x1max - x01, x2max - x02, x02 - x2min)
    if x1min > 0.0:
        r = min(r, x01 - x1min)
    return r


def default_radii(field: Field, x0, count: int = 8) -> np.ndarray:
    rmax = min(0.4, 0.8 * admissible_radius(field, x0))
    if not rmax > 0:
        raise DomainError("center lies on the edge of the field domain")
    return np.geomspace(rmax / 8.0, rmax, count)


@dataclass
class PointClass:
    case: BlowupCase
    kappa: float
    M0: float | None
    matched: str
    menu: DensityMenu
    degree_est: float | None
    angle: AngleEstimate
    diagnostics: dict
    M0_direct: float | None = None
    warnings: list[str] = dc_field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "case": self.case.value,
            "kappa": self.kappa,
            "M0": self.M0,
            "M0_direct": self.M0_direct,
            "matched": self.matched,
            "menu": self.menu.as_dict(),
            "degree_est": self.degree_est,
            "angle": self.angle.as_dict(),
            "diagnostics": self.diagnostics,
            "warnings": list(self.warnings),
        }


def classify_point(field: Field, x0, radii: Sequence[float] | None = None,
                   quad: QuadratureSpec = DEFAULT_QUAD, axis_tol: float = AXIS_TOL,
                   threads: int | None = None) -> PointClass:
    """Full classification; failures of individual stages become warnings."""
    x0 = tuple(float(v) for v in x0)
    case = BlowupCase.of(x0, axis_tol)
    menu = density_menu(case, x0)
    warnings: list[str] = []
    radii = default_radii(field, x0) if radii is None else np.asarray(radii, float)

    table = sweep(field, x0, radii, case, quad, threads=threads)
    warnings.extend(table.errors)
    warnings.extend(table.notes)
    m = table.column(table.m_column)
    M0 = None
    matched = "ambiguous"
    try:
        M0 = extrapolate_zero(table.radii, m)
        matched = menu.match(M0)
    except AxiblowError as exc:
        warnings.append(f"density: {exc}")

    M0_direct = None
    a = M_COEFFICIENTS[case][0]
    done = [rec for rec in table.records if rec.integrals is not None]
    if done:
        direct = [rec.r ** (-a) * rec.integrals.volume for rec in done]
        M0_direct = extrapolate_zero([rec.r for rec in done], direct)

    degree = None
    J = np.array([rec.J for rec in done])
    if len(done) >= 2 and np.all(J > 0.0):
        offset = 1.0 if case in (BlowupCase.INTERIOR, BlowupCase.HORIZONTAL) else 0.0
        degree = 0.5 * (_loglog_slope(np.array([rec.r for rec in done]), J) - offset)
    else:
        warnings.append("degree: J vanishes or too few radii; degree undefined")

    try:
        angle = boundary_angles(field, x0)
    except (AxiblowError, ValueError) as exc:
        angle = AngleEstimate([], [], [], "none")
        warnings.append(f"boundary: {exc}")

    if matched == "zero":
        warnings.append("M(0+) = 0 is excluded for solutions satisfying the sharp Bernstein "
                        "inequality; that hypothesis is not verified here")
    if matched == "ambiguous":
        warnings.append(f"M(0+) = {M0} matches no menu entry within {menu.tolerance:.3g}")
    if degree is not None and abs(degree - KAPPA[case]) > 0.05 and matched not in ("horizontal-positive",
                                                                                  "horizontal-negative"):
        warnings.append(f"estimated degree {degree:.4g} differs from the case scaling {KAPPA[case]}")

    diagnostics = {k: table.flags.get(k) for k in ("H_nondecreasing", "J5_nondecreasing", "M_trend")}
    return PointClass(case=case, kappa=KAPPA[case], M0=M0, matched=matched, menu=menu,
                      degree_est=degree, angle=angle, diagnostics=diagnostics, M0_direct=M0_direct,
                      warnings=warnings)


# -- degenerate-point diagnostics ---------------------------------------------------

def _scaled_norm(field: Field, r: float, quad: QuadratureSpec) -> float:
    """sqrt(int_{B_1^+} u(r x)^2 / x1) evaluated by quadrature on the unit half-ball."""
    nodes = area_nodes((0.0, 0.0), 1.0, field.angular_breaks((0.0, 0.0)), quad)
    u = np.asarray(field.value(r * nodes.x1, r * nodes.x2), dtype=float)
    return math.sqrt(float(nodes.w @ (u * u / nodes.x1)))


@dataclass
class GrowthReport:
    alpha_star: float
    stated_alpha: float
    table: list[dict]

    def as_dict(self) -> dict:
        return {"alpha_star": self.alpha_star, "stated_alpha": self.stated_alpha, "table": self.table}


def growth_exponent(field: Field, radii: Sequence[float], alphas: Sequence[float] | None = None,
                    quad: QuadratureSpec = DEFAULT_QUAD, tol: float = 0.05) -> GrowthReport:
    """Growth of N(r) = ||u(r .)||_{L2_w(B_1^+)} about the origin.

    r^-alpha N(r) vanishes as r -> 0 for alpha below the log-log slope of N
    and blows up above it; the slope is reported as alpha_star.
    """
    radii = np.asarray(radii, float)
    N = np.array([_scaled_norm(field, r, quad) for r in radii])
    if not np.all(N > 0.0):
        raise ZeroDenominatorError("field vanishes near the origin; growth is undefined")
    alpha_star = _loglog_slope(radii, N)
    alphas = np.arange(1.0, 4.01, 0.25) if alphas is None else np.asarray(alphas, float)
    table = []
    for a in alphas:
        trend = alpha_star - a
        verdict = "vanishing" if trend > tol else "unbounded" if trend < -tol else "bounded"
        table.append({"alpha": float(a), "verdict": verdict,
                      "values": [float(v) for v in radii ** -a * N]})
    return GrowthReport(alpha_star=alpha_star, stated_alpha=DEG2D_STATED_ALPHA, table=table)


def rescaled_profile_residual(field: Field, radii: Sequence[float], limit: Field | None = None,
                              quad: QuadratureSpec = DEFAULT_QUAD, annulus=(0.1, 0.9)) -> list[float]:
    """Weighted L2 distance on the annulus between u(r x)/sqrt(J(r)) and the degenerate limit.

    Dividing by sqrt(J(r)) gives the rescaling unit weighted norm on the
    half circle, the normalization of the limit field itself.
    """
    limit = degenerate_limit_field() if limit is None else limit
    inner, outer = annulus
    nodes = area_nodes((0.0, 0.0), outer, field.angular_breaks((0.0, 0.0)), quad, r_inner=inner)
    x1, x2, w = nodes.x1, nodes.x2, nodes.w
    target = np.asarray(limit.value(x1, x2), dtype=float)
    out = []
    for r in radii:
        J = ball_integrals(field, (0.0, 0.0), r, quad).J
        if not J > 0.0:
            raise ZeroDenominatorError(f"J({r:g}) = 0")
        v = np.asarray(field.value(r * x1, r * x2), dtype=float) / math.sqrt(J)
        out.append(math.sqrt(float(w @ ((v - target) ** 2 / x1))))
    return out
