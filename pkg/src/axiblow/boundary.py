"""Free-boundary polylines of grid fields: marching squares on {u > 0}.

Nodes are classified as positive (u > 0) or not.  Along an edge joining a
positive node to a negative one the crossing is linearly interpolated.  If
the outer node is exactly zero (the usual case: u vanishes identically
outside the water phase), the zero is instead extrapolated from the positive
side.  The line through the positive node and its inner neighbour on the
same grid line gives the crossing, clamped to the edge.  This keeps the
vertex placement second-order for boundaries along which u grows linearly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .field import GridField

# corner order: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1); edges: 0:c0-c1 1:c1-c2 2:c2-c3 3:c3-c0
_EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))
_CORNER_OFFSETS = ((0, 0), (1, 0), (1, 1), (0, 1))  # (di, dj) with i along x1, j along x2
# segments per corner bit pattern (bit k set if corner k positive); saddles resolved separately
_CASES = {
    0: (), 15: (),
    1: ((3, 0),), 14: ((3, 0),),
    2: ((0, 1),), 13: ((0, 1),),
    4: ((1, 2),), 11: ((1, 2),),
    8: ((2, 3),), 7: ((2, 3),),
    3: ((3, 1),), 12: ((3, 1),),
    6: ((0, 2),), 9: ((0, 2),),
}


@dataclass(frozen=True)
class FreeBoundaryCurve:
    vertices: np.ndarray   # (n, 2) points (x1, x2)
    segments: np.ndarray   # (m, 2) vertex indices
    components: int

    def __len__(self) -> int:
        return len(self.vertices)


def _positive_mask(grid: GridField) -> np.ndarray:
    pos = grid.values > 0.0
    if grid.extent[0] == 0.0:
        # u = 0 on the axis is a boundary condition, not a free boundary
        pos = pos.copy()
        pos[:, 0] = pos[:, 1]
    return pos


def _crossing(grid: GridField, pa, pb) -> float:
    """Fraction t in [0, 1] from node pa toward node pb where u changes sign (pa positive)."""
    v = grid.values
    ua = v[pa[1], pa[0]]
    ub = v[pb[1], pb[0]]
    if ub < 0.0:
        return float(ua / (ua - ub))
    # extrapolate from the positive side: inner neighbour one step beyond pa
    qi, qj = 2 * pa[0] - pb[0], 2 * pa[1] - pb[1]
    if 0 <= qi < grid.nx and 0 <= qj < grid.ny:
        uq = v[qj, qi]
        if uq > ua:
            return float(min(1.0, ua / (uq - ua)))
    return 0.5


def extract_free_boundary(grid: GridField) -> FreeBoundaryCurve:
    pos = _positive_mask(grid)
    bits = (pos[:-1, :-1].astype(int) | (pos[:-1, 1:] << 1) | (pos[1:, 1:] << 2) | (pos[1:, :-1] << 3))
    cells_j, cells_i = np.nonzero((bits != 0) & (bits != 15))
    x1n, x2n = grid.x1_nodes, grid.x2_nodes
    index: dict[tuple, int] = {}
    verts: list[tuple[float, float]] = []
    segs: list[tuple[int, int]] = []

    def vertex(i, j, edge):
        ca, cb = _EDGE_CORNERS[edge]
        a = (i + _CORNER_OFFSETS[ca][0], j + _CORNER_OFFSETS[ca][1])
        b = (i + _CORNER_OFFSETS[cb][0], j + _CORNER_OFFSETS[cb][1])
        key = (min(a, b), max(a, b))
        if key in index:
            return index[key]
        if not pos[a[1], a[0]]:
            a, b = b, a
        t = _crossing(grid, a, b)
        p = (x1n[a[0]] + t * (x1n[b[0]] - x1n[a[0]]), x2n[a[1]] + t * (x2n[b[1]] - x2n[a[1]]))
        index[key] = len(verts)
        verts.append(p)
        return index[key]

    v = grid.values
    for j, i in zip(cells_j.tolist(), cells_i.tolist()):
        code = int(bits[j, i])
        if code in (5, 10):
            center_pos = 0.25 * (v[j, i] + v[j, i + 1] + v[j + 1, i + 1] + v[j + 1, i]) > 0.0
            # connect the positive corners through the centre if it is positive
            if (code == 5) == center_pos:
                pairs = ((0, 1), (2, 3))
            else:
                pairs = ((3, 0), (1, 2))
        else:
            pairs = _CASES[code]
        for e1, e2 in pairs:
            segs.append((vertex(i, j, e1), vertex(i, j, e2)))

    vertices = np.array(verts, dtype=float).reshape(-1, 2)
    segments = np.array(segs, dtype=int).reshape(-1, 2)
    if len(vertices):
        n = len(vertices)
        adj = coo_matrix((np.ones(len(segments)), (segments[:, 0], segments[:, 1])), shape=(n, n))
        components = int(connected_components(adj, directed=False)[0])
    else:
        components = 0
    return FreeBoundaryCurve(vertices=vertices, segments=segments, components=components)
