"""Exact blow-up profiles and auxiliary analytic test fields.

Polar coordinates about a profile's vertex are (rho, theta) with
x = vertex + rho (sin theta, cos theta), i.e. theta is measured from the
positive x2-axis toward positive x1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError
from .field import AnalyticField, Field
from .specfun import find_z0, legendre_p, legendre_p_prime_closed

SQRT2 = math.sqrt(2.0)
DEGENERATE_NORM = math.sqrt(4.0 / 15.0)


class BlowupCase(str, enum.Enum):
    INTERIOR = "interior"      # x1 > 0, x2 != 0
    HORIZONTAL = "horizontal"  # x1 > 0, x2 = 0
    AXIS = "axis"              # x1 = 0, x2 != 0
    ORIGIN = "origin"          # x1 = x2 = 0

    @classmethod
    def of(cls, x0, tol: float = 1e-9) -> "BlowupCase":
        """Case from the zero pattern of the center; |coordinate| < tol counts as zero."""
        x1, x2 = (float(v) for v in x0)
        if x1 < -tol:
            raise DomainError("center must satisfy x1 >= 0")
        on_axis = abs(x1) < tol
        flat = abs(x2) < tol
        if on_axis:
            return cls.ORIGIN if flat else cls.AXIS
        return cls.HORIZONTAL if flat else cls.INTERIOR


def _polar(x1, x2, vertex):
    d1 = np.asarray(x1, float) - vertex[0]
    d2 = np.asarray(x2, float) - vertex[1]
    return np.hypot(d1, d2), np.arctan2(d1, d2)


def _cartesian_grad(theta, u_rho, u_theta_over_rho):
    s, c = np.sin(theta), np.cos(theta)
    return s * u_rho + c * u_theta_over_rho, c * u_rho - s * u_theta_over_rho


def stokes_corner(x1_0: float, vertex: tuple[float, float] | None = None) -> AnalyticField:
    """(sqrt(2) x1_0 / 3) rho^(3/2) cos(3 theta / 2) on |theta| < pi/3, zero outside."""
    if not x1_0 > 0:
        raise DomainError("x1_0 must be positive")
    vertex = (float(x1_0), 0.0) if vertex is None else tuple(float(v) for v in vertex)
    amp = SQRT2 * x1_0 / 3.0

    def inside(rho, theta):
        return (np.abs(theta) <= math.pi / 3) & (rho > 0)

    def value(x1, x2):
        rho, theta = _polar(x1, x2, vertex)
        return np.where(inside(rho, theta), amp * rho ** 1.5 * np.cos(1.5 * theta), 0.0)

    def grad(x1, x2):
        rho, theta = _polar(x1, x2, vertex)
        k = x1_0 / SQRT2
        sq = np.sqrt(rho)
        g1, g2 = _cartesian_grad(theta, k * sq * np.cos(1.5 * theta), -k * sq * np.sin(1.5 * theta))
        mask = inside(rho, theta)
        return np.where(mask, g1, 0.0), np.where(mask, g2, 0.0)

    def support(x1, x2):
        rho, theta = _polar(x1, x2, vertex)
        return (np.abs(theta) < math.pi / 3) & (rho > 0)

    return AnalyticField(name="stokes", value_fn=value, grad_fn=grad, support_fn=support,
                         vertex=vertex, breaks=(-math.pi / 3, math.pi / 3), degree=1.5,
                         frozen_x1=float(x1_0), params={"x1": x1_0})


def halfplane_profile(x1_0: float, x2_0: float, e=(0.0, 1.0),
                      center: tuple[float, float] | None = None) -> AnalyticField:
    """x1_0 sqrt(x2_0) max((x - center) . e, 0), the one-phase interior limit."""
    if not (x1_0 > 0 and x2_0 > 0):
        raise DomainError("halfplane profile needs x1_0 > 0 and x2_0 > 0")
    e1, e2 = (float(v) for v in e)
    if abs(math.hypot(e1, e2) - 1.0) > 1e-12:
        raise DomainError("e must be a unit vector")
    center = (float(x1_0), float(x2_0)) if center is None else tuple(float(v) for v in center)
    slope = x1_0 * math.sqrt(x2_0)

    def proj(x1, x2):
        return (np.asarray(x1, float) - center[0]) * e1 + (np.asarray(x2, float) - center[1]) * e2

    def value(x1, x2):
        return slope * np.maximum(proj(x1, x2), 0.0)

    def grad(x1, x2):
        on = proj(x1, x2) >= 0.0
        return np.where(on, slope * e1, 0.0), np.where(on, slope * e2, 0.0)

    theta_e = math.atan2(e1, e2)
    breaks = tuple(sorted(math.remainder(theta_e + s * math.pi / 2, 2 * math.pi) for s in (-1, 1)))
    return AnalyticField(name="halfplane", value_fn=value, grad_fn=grad,
                         support_fn=lambda x1, x2: proj(x1, x2) > 0.0, vertex=center, breaks=breaks,
                         degree=1.0, frozen_x1=float(x1_0),
                         params={"x1": x1_0, "x2": x2_0, "e1": e1, "e2": e2})


def axis_profile(gamma: float, x2_0: float = 0.5) -> AnalyticField:
    """gamma x1^2: constant vertical velocity 2 gamma; homogeneous of degree 2 about any axis point."""
    if not gamma >= 0:
        raise DomainError("gamma must be nonnegative")

    def value(x1, x2):
        x1 = np.asarray(x1, float)
        return gamma * x1 * x1 + 0.0 * np.asarray(x2, float)

    def grad(x1, x2):
        x1 = np.asarray(x1, float)
        return 2.0 * gamma * x1 + 0.0 * np.asarray(x2, float), np.zeros(np.broadcast(x1, x2).shape)

    return AnalyticField(name="axis", value_fn=value, grad_fn=grad,
                         support_fn=lambda x1, x2: (np.asarray(x1) > 0) & (gamma > 0) & (np.asarray(x2) == np.asarray(x2)),
                         vertex=(0.0, float(x2_0)), degree=2.0, params={"gamma": gamma, "x2": x2_0})


@dataclass(frozen=True)
class AngularProfile:
    """Angular part U(theta) of rho^kappa U(theta) with its support and normalization."""

    support: tuple[float, float]
    c0: float
    z0: float
    U: Callable
    dU: Callable

    @property
    def theta_star(self) -> float:
        return self.support[0]


def garabedian_angular(c0: float | None = None) -> AngularProfile:
    """Angular part from the potential branch sigma rho^(3/2) P_3/2(-cos theta) on (theta*, pi).

    U(theta) = (2 c0 / 5) sin^2(theta) P'_3/2(-cos theta)
    U'(theta) = -(3 c0 / 2) sin(theta) P_3/2(-cos theta)
    are consistent through the Legendre equation, and U > 0 on the support
    because P'_3/2 > 0 on (z0, 1].  With c0 = None the constant is solved from
    |grad u|^2 = x1^2 x2 on the cone theta = theta*.
    """
    root = find_z0(1e-14)
    theta_star = root.theta_star

    def make(c):
        def U(theta):
            theta = np.asarray(theta, float)
            s = np.clip(-np.cos(theta), root.z0, 1.0)
            return (2.0 * c / 5.0) * np.sin(theta) ** 2 * legendre_p_prime_closed(1.5, s)

        def dU(theta):
            theta = np.asarray(theta, float)
            s = np.clip(-np.cos(theta), root.z0, 1.0)
            return -(1.5 * c) * np.sin(theta) * legendre_p(1.5, s)

        return U, dU

    if c0 is None:
        _, dU1 = make(1.0)
        # at rho = 1 on the cone: |grad u|^2 = U'(theta*)^2 and x1^2 x2 = sin^2 cos
        target = math.sin(theta_star) ** 2 * math.cos(theta_star)
        c0 = math.sqrt(target) / abs(float(dU1(theta_star)))
    U, dU = make(c0)
    return AngularProfile(support=(theta_star, math.pi), c0=float(c0), z0=root.z0, U=U, dU=dU)


@lru_cache(maxsize=1)
def _garabedian_cached() -> AngularProfile:
    return garabedian_angular()


def garabedian_profile() -> tuple[AnalyticField, AngularProfile]:
    """Degree-5/2 pointed-bubble profile rho^(5/2) U(theta), positive on theta* < theta < pi."""
    ang = _garabedian_cached()
    t_star = ang.theta_star

    def inside(theta):
        return theta >= t_star

    def value(x1, x2):
        rho, theta = _polar(x1, x2, (0.0, 0.0))
        mask = inside(theta)
        out = np.zeros(np.shape(rho))
        if np.any(mask):
            out[mask] = rho[mask] ** 2.5 * ang.U(theta[mask])
        return out

    def grad(x1, x2):
        rho, theta = _polar(x1, x2, (0.0, 0.0))
        rho = np.atleast_1d(rho)
        theta = np.atleast_1d(theta)
        mask = inside(theta) & (rho > 0)
        g1 = np.zeros(rho.shape)
        g2 = np.zeros(rho.shape)
        if np.any(mask):
            r, t = rho[mask], theta[mask]
            r32 = r ** 1.5
            a, b = _cartesian_grad(t, 2.5 * r32 * ang.U(t), r32 * ang.dU(t))
            g1[mask], g2[mask] = a, b
        shape = np.broadcast(np.asarray(x1), np.asarray(x2)).shape
        return g1.reshape(shape), g2.reshape(shape)

    def support(x1, x2):
        rho, theta = _polar(x1, x2, (0.0, 0.0))
        return (theta > t_star) & (theta < math.pi) & (rho > 0)

    field = AnalyticField(name="garabedian", value_fn=value, grad_fn=grad, support_fn=support,
                          vertex=(0.0, 0.0), breaks=(t_star,), degree=2.5,
                          params={"c0": ang.c0, "theta_star": t_star})
    return field, ang


def degenerate_limit_field() -> AnalyticField:
    """x1^2 x2 / sqrt(4/15): unit weighted L2 norm on the upper half circle."""
    n = DEGENERATE_NORM

    def value(x1, x2):
        x1 = np.asarray(x1, float)
        return x1 * x1 * np.asarray(x2, float) / n

    def grad(x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        return 2.0 * x1 * x2 / n, x1 * x1 / n + 0.0 * x2

    return AnalyticField(name="deglimit", value_fn=value, grad_fn=grad,
                         support_fn=lambda x1, x2: (np.asarray(x2) > 0) & (np.asarray(x1) > 0),
                         vertex=(0.0, 0.0), breaks=(math.pi / 2,), degree=3.0)


def degenerate_positive_part() -> AnalyticField:
    """x1^2 max(x2, 0): homogeneous of degree 3, but not a solution on {x2 = 0}."""

    def value(x1, x2):
        x1 = np.asarray(x1, float)
        return x1 * x1 * np.maximum(np.asarray(x2, float), 0.0)

    def grad(x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        up = x2 >= 0.0
        return np.where(up, 2.0 * x1 * x2, 0.0), np.where(up, x1 * x1, 0.0)

    return AnalyticField(name="deg-plus", value_fn=value, grad_fn=grad,
                         support_fn=lambda x1, x2: (np.asarray(x2) > 0) & (np.asarray(x1) > 0),
                         vertex=(0.0, 0.0), breaks=(math.pi / 2,), degree=3.0)


def perturbed_degenerate_field(eps: float = 1.0) -> AnalyticField:
    """x1^2 x2 (1 + eps rho): degenerate limit plus an explicit first-order perturbation."""

    def value(x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        return x1 * x1 * x2 * (1.0 + eps * np.hypot(x1, x2))

    def grad(x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        rho = np.hypot(x1, x2)
        safe = np.where(rho > 0, rho, 1.0)
        base = x1 * x1 * x2 * eps / safe
        return (2.0 * x1 * x2 * (1.0 + eps * rho) + base * x1,
                x1 * x1 * (1.0 + eps * rho) + base * x2)

    return AnalyticField(name="deglimit-perturbed", value_fn=value, grad_fn=grad,
                         support_fn=lambda x1, x2: (np.asarray(x2) > 0) & (np.asarray(x1) > 0),
                         vertex=(0.0, 0.0), breaks=(math.pi / 2,), params={"eps": eps})


def zero_field() -> AnalyticField:
    def value(x1, x2):
        return np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape)

    return AnalyticField(name="zero", value_fn=value, grad_fn=lambda a, b: (value(a, b), value(a, b)),
                         support_fn=lambda a, b: value(a, b) > 0, degree=None)


@dataclass(frozen=True)
class ProfileEntry:
    """CLI-addressable profile: builder, parameter defaults, base point and sampling window."""

    name: str
    defaults: dict
    build: Callable[[dict], Field]
    center: Callable[[dict], tuple[float, float]]
    extent: Callable[[dict], tuple[float, float, float, float]]
    label: str | None = None


def _box(c1, c2, half):
    return (max(0.0, c1 - half), c1 + half, c2 - half, c2 + half)


PROFILES: dict[str, ProfileEntry] = {
    "stokes": ProfileEntry(
        "stokes", {"x1": 1.0},
        lambda p: stokes_corner(p["x1"]),
        lambda p: (p["x1"], 0.0),
        lambda p: _box(p["x1"], 0.0, 0.5 * min(p["x1"], 1.0)),
        label="stokes"),
    "halfplane": ProfileEntry(
        "halfplane", {"x1": 1.0, "x2": 1.0, "e1": 0.0, "e2": 1.0},
        lambda p: halfplane_profile(p["x1"], p["x2"], (p["e1"], p["e2"])),
        lambda p: (p["x1"], p["x2"]),
        lambda p: _box(p["x1"], p["x2"], 0.5 * min(p["x1"], 1.0)),
        label="halfplane"),
    "axis": ProfileEntry(
        "axis", {"gamma": 1.0, "x2": 0.5},
        lambda p: axis_profile(p["gamma"], p["x2"]),
        lambda p: (0.0, p["x2"]),
        lambda p: (0.0, 0.5, p["x2"] - 0.5, p["x2"] + 0.5),
        label="axis-full"),
    "garabedian": ProfileEntry(
        "garabedian", {},
        lambda p: garabedian_profile()[0],
        lambda p: (0.0, 0.0),
        lambda p: (0.0, 1.0, -1.0, 1.0),
        label="garabedian"),
    "deglimit": ProfileEntry(
        "deglimit", {},
        lambda p: degenerate_limit_field(),
        lambda p: (0.0, 0.0),
        lambda p: (0.0, 1.0, -1.0, 1.0),
        label="horizontal-positive"),
    "deg-plus": ProfileEntry(
        "deg-plus", {},
        lambda p: degenerate_positive_part(),
        lambda p: (0.0, 0.0),
        lambda p: (0.0, 1.0, -1.0, 1.0),
        label="horizontal-positive"),
    "zero": ProfileEntry(
        "zero", {},
        lambda p: zero_field(),
        lambda p: (0.0, 0.0),
        lambda p: (0.0, 1.0, -1.0, 1.0)),
}

SHIPPED = ("stokes", "halfplane", "axis", "garabedian", "deglimit")


def build_profile(name: str, params: dict | None = None) -> tuple[Field, dict]:
    """Build a registered profile; returns the field and the resolved parameters."""
    if name not in PROFILES:
        raise DomainError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
    entry = PROFILES[name]
    resolved = dict(entry.defaults)
    for key, val in (params or {}).items():
        if key not in entry.defaults:
            raise DomainError(f"profile {name!r} has no parameter {key!r}")
        resolved[key] = float(val)
    return entry.build(resolved), resolved
