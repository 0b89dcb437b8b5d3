"""Stream-function fields on the meridian half-plane {x1 >= 0}.

Two representations share one interface: analytic fields with exact
value/gradient evaluators and an exact support predicate, and grid fields
sampled on a rectangle (bilinear values, central-difference gradients).
The module also holds the pointwise diagnostics: PDE and free-boundary
residuals, the Bernstein-type quantities, 3D velocity reconstruction, and
the AXIFIELD text format.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

MAGIC = "AXIFIELD 1"
ANALYTIC_FD_STEP = 1e-5
AXIS_EPS = 1e-6


class Field:
    """Common interface. Coordinates are (x1, x2) = (distance to axis, axial)."""

    name: str = "field"
    # Blow-up limits at points with x1 > 0 solve the frozen-coefficient problem;
    # weighted quantities then use this constant in place of x1.
    frozen_x1: float | None = None

    def value(self, x1, x2) -> np.ndarray:
        raise NotImplementedError

    def grad(self, x1, x2) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def positive(self, x1, x2) -> np.ndarray:
        return np.asarray(self.value(x1, x2)) > 0.0

    def contains(self, x1, x2) -> np.ndarray:
        return np.asarray(x1) >= 0.0

    def angular_breaks(self, center: Sequence[float]) -> tuple[float, ...]:
        """Directions (angle from the +x2 axis toward +x1) of support boundary rays at ``center``."""
        return ()

    def ring_cut_finder(self, center: Sequence[float]):
        """Callable (rho, lo, hi) -> support crossings on that ring, or None if breaks suffice."""
        return None

    @property
    def fd_step(self) -> float:
        return ANALYTIC_FD_STEP

    def weight(self, x1) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        if self.frozen_x1 is None:
            return x1
        return np.full_like(x1, self.frozen_x1)


@dataclass(kw_only=True)
class AnalyticField(Field):
    """Field given by closed-form value and gradient callables (vectorized)."""

    name: str
    value_fn: Callable
    grad_fn: Callable
    support_fn: Callable | None = None
    vertex: tuple[float, float] = (0.0, 0.0)
    breaks: tuple[float, ...] = ()
    degree: float | None = None
    frozen_x1: float | None = None
    params: dict = dc_field(default_factory=dict)

    def value(self, x1, x2):
        return np.asarray(self.value_fn(np.asarray(x1, float), np.asarray(x2, float)), dtype=float)

    def grad(self, x1, x2):
        g1, g2 = self.grad_fn(np.asarray(x1, float), np.asarray(x2, float))
        shape = np.broadcast(np.asarray(x1), np.asarray(x2)).shape
        return np.broadcast_to(np.asarray(g1, float), shape), np.broadcast_to(np.asarray(g2, float), shape)

    def positive(self, x1, x2):
        if self.support_fn is None:
            return self.value(x1, x2) > 0.0
        return np.asarray(self.support_fn(np.asarray(x1, float), np.asarray(x2, float)), dtype=bool)

    def angular_breaks(self, center):
        if math.dist(tuple(center), self.vertex) < 1e-12:
            return self.breaks
        return ()


class GridField(Field):
    """Field sampled on an nx-by-ny node lattice covering ``extent``.

    ``values`` has shape (ny, nx): row index walks x2, column index walks x1.
    Nodes include both ends of each interval.
    """

    def __init__(self, values, extent: Sequence[float], name: str = "grid"):
        values = np.array(values, dtype=float)
        if values.ndim != 2 or min(values.shape) < 2:
            raise DomainError("grid values must be a 2D array with at least 2 nodes per axis")
        x1min, x1max, x2min, x2max = (float(v) for v in extent)
        if not (x1min >= 0.0 and x1max > x1min and x2max > x2min):
            raise DomainError(f"degenerate or invalid extent {extent}")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid values must be finite")
        self.values = values
        self.values.flags.writeable = False
        self.ny, self.nx = values.shape
        self.extent = (x1min, x1max, x2min, x2max)
        self.name = name
        self.h1 = (x1max - x1min) / (self.nx - 1)
        self.h2 = (x2max - x2min) / (self.ny - 1)
        if x1min == 0.0:
            scale = max(1.0, float(np.max(np.abs(values))))
            if np.max(np.abs(values[:, 0])) > 1e-12 * scale:
                raise DomainError("u must vanish on the sampled axis column x1 = 0")
        self.signed = extend_across_boundary(values, axis_column=(x1min == 0.0))
        self.signed.flags.writeable = False
        g2, g1 = np.gradient(self.signed, self.h2, self.h1, edge_order=2 if min(values.shape) >= 3 else 1)
        self._g1 = g1
        self._g2 = g2

    @property
    def x1_nodes(self) -> np.ndarray:
        return np.linspace(self.extent[0], self.extent[1], self.nx)

    @property
    def x2_nodes(self) -> np.ndarray:
        return np.linspace(self.extent[2], self.extent[3], self.ny)

    @property
    def fd_step(self) -> float:
        return min(self.h1, self.h2)

    def contains(self, x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        tol1, tol2 = 1e-12 * self.h1, 1e-12 * self.h2
        x1min, x1max, x2min, x2max = self.extent
        return ((x1 >= x1min - tol1) & (x1 <= x1max + tol1)
                & (x2 >= x2min - tol2) & (x2 <= x2max + tol2))

    def ring_cut_finder(self, center, samples: int = 512, iterations: int = 40):
        """Angles where the reconstructed positivity set changes along circles about ``center``.

        The returned callable maps arrays (rho, lo, hi) to one list of cut
        angles per ring.  Sign changes between ``samples`` equispaced angles
        are refined by bisection (all rings at once), so quadrature panels can
        end on the interpolated boundary.
        """
        c1, c2 = (float(v) for v in center)

        def inside(rho, th):
            x1 = c1 + rho * np.sin(th)
            x2 = c2 + rho * np.cos(th)
            ok = self.contains(x1, x2) & (x1 >= 0.0)
            out = np.zeros(th.shape, dtype=bool)
            out[ok] = self.positive(x1[ok], x2[ok])
            return out

        def cuts(rho, lo, hi):
            rho, lo, hi = (np.atleast_1d(np.asarray(v, float)) for v in (rho, lo, hi))
            frac = np.linspace(0.0, 1.0, samples)
            th = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
            rr = np.broadcast_to(rho[:, None], th.shape)
            pos = inside(rr, th)
            ring, k = np.nonzero(pos[:, 1:] != pos[:, :-1])
            out = [[] for _ in range(rho.size)]
            if ring.size == 0:
                return out
            a, b = th[ring, k], th[ring, k + 1]
            pa = pos[ring, k]
            rk = rho[ring]
            for _ in range(iterations):
                m = 0.5 * (a + b)
                same = inside(rk, m) == pa
                a = np.where(same, m, a)
                b = np.where(same, b, m)
            for i, t in zip(ring.tolist(), (0.5 * (a + b)).tolist()):
                out[i].append(t)
            return out

        return cuts

    def _locate(self, x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        if not np.all(self.contains(x1, x2)):
            raise DomainError("point outside the grid extent")
        s = (x1 - self.extent[0]) / self.h1
        t = (x2 - self.extent[2]) / self.h2
        i = np.clip(np.floor(s).astype(int), 0, self.nx - 2)
        j = np.clip(np.floor(t).astype(int), 0, self.ny - 2)
        return i, j, s - i, t - j

    def _bilinear(self, arr, x1, x2):
        i, j, s, t = self._locate(x1, x2)
        return ((1 - s) * (1 - t) * arr[j, i] + s * (1 - t) * arr[j, i + 1]
                + (1 - s) * t * arr[j + 1, i] + s * t * arr[j + 1, i + 1])

    # The reconstruction is the bilinear interpolant of ``signed`` on {u > 0}
    # and of the raw values elsewhere, so the positivity set has a second-order
    # boundary while the field itself stays identically zero outside it.

    def positive(self, x1, x2):
        return self._bilinear(self.signed, x1, x2) > 0.0

    def value(self, x1, x2):
        ext = self._bilinear(self.signed, x1, x2)
        return np.where(ext > 0.0, ext, np.minimum(self._bilinear(self.values, x1, x2), 0.0))

    def grad(self, x1, x2):
        pos = self.positive(x1, x2)
        neg = self._bilinear(self.values, x1, x2) < 0.0
        keep = pos | neg
        return (np.where(keep, self._bilinear(self._g1, x1, x2), 0.0),
                np.where(keep, self._bilinear(self._g2, x1, x2), 0.0))


def extend_across_boundary(values: np.ndarray, layers: int = 2, axis_column: bool = False) -> np.ndarray:
    """Replace exact zeros next to {u > 0} by linear extrapolation from the positive side.

    A zero node with a known neighbour A (and A' one step further along the
    same grid line) receives 2 u(A) - u(A'), averaged over such directions and
    kept only if negative.  ``layers`` rounds extend the signed field that many
    nodes outward, enough for central differences at the first layer.  The
    axis column, where u = 0 is a boundary condition, is left untouched.
    """
    out = np.array(values, dtype=float)
    known = out > 0.0
    frozen = out != 0.0
    if axis_column:
        frozen[:, 0] = True
    for _ in range(layers):
        total = np.zeros_like(out)
        count = np.zeros_like(out)
        ny, nx = out.shape
        for axis, step in ((0, 1), (0, -1), (1, 1), (1, -1)):
            # neighbour at offset `step` and the next one beyond it
            a = np.roll(out, -step, axis=axis)
            a2 = np.roll(out, -2 * step, axis=axis)
            ka = np.roll(known, -step, axis=axis) & np.roll(known, -2 * step, axis=axis)
            n = out.shape[axis]
            idx = np.arange(n)
            valid = (idx + 2 * step >= 0) & (idx + 2 * step < n)
            valid = valid[:, None] if axis == 0 else valid[None, :]
            cand = 2.0 * a - a2
            use = ka & valid & ~frozen & ~known & (a < a2) & (cand < 0.0)
            total += np.where(use, cand, 0.0)
            count += use
        new = count > 0
        if not np.any(new):
            break
        out[new] = total[new] / count[new]
        known = known | new
        frozen = frozen | new
    return out


def _point(p) -> tuple[float, float]:
    p1, p2 = (float(v) for v in p)
    return p1, p2


def eval_and_grad(field: Field, p) -> tuple[float, np.ndarray]:
    """Value and gradient at a point with p1 > 0."""
    p1, p2 = _point(p)
    if not p1 > 0.0:
        raise DomainError("evaluation requires x1 > 0")
    if not bool(field.contains(p1, p2)):
        raise DomainError(f"point {(p1, p2)} outside the field domain")
    u = float(field.value(p1, p2))
    g1, g2 = field.grad(p1, p2)
    return u, np.array([float(g1), float(g2)])


def _flux(field: Field, x1: float, x2: float) -> np.ndarray:
    g1, g2 = field.grad(x1, x2)
    w = float(field.weight(x1))
    return np.array([float(g1), float(g2)]) / w


def pde_residual(field: Field, p, step: float | None = None) -> float:
    """Central-difference div((1/x1) grad u) at p (frozen weight for frozen fields)."""
    p1, p2 = _point(p)
    if not p1 > 0.0:
        raise DomainError("PDE residual requires x1 > 0")
    h = step or field.fd_step
    if not bool(field.positive(p1, p2)):
        warnings.warn(f"point {(p1, p2)} is not in the positivity set", RuntimeWarning, stacklevel=2)
    for q in ((p1 + h, p2), (p1 - h, p2), (p1, p2 + h), (p1, p2 - h)):
        if not bool(field.contains(*q)) or q[0] <= 0.0:
            raise DomainError("finite-difference stencil leaves the field domain")
    d1 = (_flux(field, p1 + h, p2)[0] - _flux(field, p1 - h, p2)[0]) / (2 * h)
    d2 = (_flux(field, p1, p2 + h)[1] - _flux(field, p1, p2 - h)[1]) / (2 * h)
    return float(d1 + d2)


def positive_side_grad(field: Field, p, offset: float | None = None) -> np.ndarray:
    """Gradient at p taken from the adjacent positivity set.

    Analytic fields are probed a distance 1e-9 away; grid fields 1.5 grid
    spacings away so that the stencil does not straddle the boundary.
    """
    p1, p2 = _point(p)
    if isinstance(field, GridField):
        delta = offset or 1.5 * field.fd_step
    else:
        delta = offset or 1e-9 * max(1.0, math.hypot(p1, p2))
    if bool(field.positive(p1, p2)) and not isinstance(field, GridField):
        g1, g2 = field.grad(p1, p2)
        return np.array([float(g1), float(g2)])
    angles = np.linspace(0.0, 2 * math.pi, 64, endpoint=False)
    q1 = p1 + delta * np.sin(angles)
    q2 = p2 + delta * np.cos(angles)
    ok = (q1 > 0.0) & field.contains(q1, q2)
    if not np.any(ok):
        raise DomainError("no admissible probe points around the boundary point")
    vals = np.where(ok, field.value(np.where(ok, q1, p1), np.where(ok, q2, p2)), -np.inf)
    k = int(np.argmax(vals))
    if not vals[k] > 0.0:
        raise DomainError(f"point {(p1, p2)} has no adjacent positivity set")
    g1, g2 = field.grad(q1[k], q2[k])
    return np.array([float(g1), float(g2)])


def fb_residual(field: Field, p) -> float:
    """|grad u|^2 / x1^2 - x2 at a free-boundary point, gradient from the positive side."""
    p1, p2 = _point(p)
    if not p1 > 0.0:
        raise DomainError("free-boundary residual requires x1 > 0")
    if not bool(field.contains(p1, p2)):
        raise DomainError(f"point {(p1, p2)} outside the field domain")
    g = positive_side_grad(field, (p1, p2))
    w = float(field.weight(p1))
    return float(g @ g / (w * w) - p2)


def velocity_at(field: Field, X: float, Y: float, Z: float, eps: float | None = None) -> np.ndarray:
    """Physical velocity (-(1/x1) u_2 cos t, -(1/x1) u_2 sin t, (1/x1) u_1) at (X, Y, Z).

    Points closer than ``eps`` to the axis are evaluated one-sidedly at x1 = eps.
    """
    eps = eps if eps is not None else (field.fd_step if isinstance(field, GridField) else AXIS_EPS)
    x1 = math.hypot(X, Y)
    angle = math.atan2(Y, X) if x1 > 0.0 else 0.0
    if x1 < eps:
        warnings.warn(f"axis evaluation: x1 = {x1:.3g} < eps; using one-sided value at x1 = {eps:g}",
                      RuntimeWarning, stacklevel=2)
        x1 = eps
    _, g = eval_and_grad(field, (x1, Z))
    w = float(field.weight(x1))
    radial = -g[1] / w
    return np.array([radial * math.cos(angle), radial * math.sin(angle), g[0] / w])


@dataclass(frozen=True)
class BernsteinResidual:
    lhs: float
    rhs: float


def bernstein_residual(field: Field, p, step: float | None = None) -> BernsteinResidual:
    """Flat Laplacian of |grad u|^2/x1 - x1 x2 (lhs) and 2 sum_ij (d_ij u)^2 / x1 (rhs).

    Both sides are reported; no relation between them is asserted.
    """
    p1, p2 = _point(p)
    if not p1 > 0.0:
        raise DomainError("Bernstein residual requires x1 > 0")
    h = step or (1e-3 if not isinstance(field, GridField) else field.fd_step)
    if p1 - 2 * h <= 0.0:
        raise DomainError("stencil reaches the axis")

    def g(a, b):
        g1, g2 = field.grad(a, b)
        return (float(g1) ** 2 + float(g2) ** 2) / a - a * b

    lap = (g(p1 + h, p2) + g(p1 - h, p2) + g(p1, p2 + h) + g(p1, p2 - h) - 4 * g(p1, p2)) / (h * h)

    def grad_vec(a, b):
        g1, g2 = field.grad(a, b)
        return np.array([float(g1), float(g2)])

    d1 = (grad_vec(p1 + h, p2) - grad_vec(p1 - h, p2)) / (2 * h)
    d2 = (grad_vec(p1, p2 + h) - grad_vec(p1, p2 - h)) / (2 * h)
    u11, u22 = d1[0], d2[1]
    u12 = 0.5 * (d1[1] + d2[0])
    rhs = 2.0 * (u11 ** 2 + 2 * u12 ** 2 + u22 ** 2) / p1
    return BernsteinResidual(lhs=float(lap), rhs=float(rhs))


def sample_field(field: Field, nx: int, ny: int, extent: Sequence[float], name: str | None = None) -> GridField:
    """Sample any field on a node lattice (x1 fastest)."""
    x1min, x1max, x2min, x2max = (float(v) for v in extent)
    x1 = np.linspace(x1min, x1max, nx)
    x2 = np.linspace(x2min, x2max, ny)
    X1, X2 = np.meshgrid(x1, x2)
    vals = np.asarray(field.value(X1, X2), dtype=float)
    if x1min == 0.0:
        vals[:, 0] = 0.0
    return GridField(vals, (x1min, x1max, x2min, x2max), name=name or getattr(field, "name", "grid"))


def write_axifield(grid: GridField, path: str | Path) -> None:
    """Write the AXIFIELD 1 text format with 17 significant digits."""
    lines = [MAGIC, " ".join([str(grid.nx), str(grid.ny)] + [repr(float(v)) for v in grid.extent])]
    for row in grid.values:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_axifield(path: str | Path) -> GridField:
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise DomainError(f"{path}: missing '{MAGIC}' header")
    header = lines[1].split()
    if len(header) != 6:
        raise DomainError(f"{path}: header must be 'nx ny x1min x1max x2min x2max'")
    nx, ny = int(header[0]), int(header[1])
    extent = tuple(float(v) for v in header[2:])
    values = np.array(" ".join(lines[2:]).split(), dtype=float)
    if values.size != nx * ny:
        raise DomainError(f"{path}: expected {nx * ny} values, found {values.size}")
    return GridField(values.reshape(ny, nx), extent, name=Path(path).stem)
