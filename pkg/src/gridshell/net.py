"""
Tchebychev nets built by the compass method.

A net is stored as a dense signed lattice: node ``(i, j)`` lives at array
index ``(i + L, j + L)`` where ``L`` is the half size.  ``i`` runs along the
D1 family, ``j`` along D2, and ``(0, 0)`` is the seed point A.  Each slot is
absent, ``ok`` (inside the domain) or ``boundary`` (first node past the
domain edge; kept so that cells straddling the edge close up).

:func:`map_batch` maps many genomes at once.  Guidelines advance one step per
iteration for every branch of every genome, and quadrant cells are filled by
anti-diagonal wavefronts, so the Python loop count depends only on the
guideline length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from . import geomkernel as gk
from .genome import Genome
from .surface import SurfaceSpec, coverage_samples, eval_surface, lift_many

__all__ = [
    "ABSENT",
    "OK",
    "BOUNDARY",
    "MappingError",
    "TooFewNodesError",
    "Node",
    "TchebychevNet",
    "NetStats",
    "ValidityReport",
    "trace_guideline",
    "map_surface",
    "map_batch",
    "validate_net",
    "net_stats",
]

ABSENT, OK, BOUNDARY = 0, 1, 2
_STATUS = {OK: "ok", BOUNDARY: "boundary"}

# branch order: D1 right, D1 left, D2 top, D2 bottom
_BRANCH_DIR = ((1, 0), (-1, 0), (0, 1), (0, -1))
# quadrant signs (si, sj) and the branches bounding them
_QUADRANTS = ((1, 1), (-1, 1), (-1, -1), (1, -1))

COVERAGE_THRESHOLD = 0.95
PROXIMITY_FACTOR = 0.5
COVER_RADIUS = 0.75


class MappingError(RuntimeError):
    pass


class TooFewNodesError(ValueError):
    pass


class Node(NamedTuple):
    position: np.ndarray
    status: str


@dataclass
class TchebychevNet:
    positions: np.ndarray
    status: np.ndarray
    width: float

    @property
    def half(self) -> int:
        return (self.status.shape[0] - 1) // 2

    @property
    def nodes(self) -> dict:
        L = self.half
        out = {}
        for a, b in zip(*np.nonzero(self.status)):
            out[(int(a) - L, int(b) - L)] = Node(self.positions[a, b].copy(), _STATUS[int(self.status[a, b])])
        return out

    def index_set(self, include_boundary=True) -> set:
        L = self.half
        mask = self.status > 0 if include_boundary else self.status == OK
        return {(int(a) - L, int(b) - L) for a, b in zip(*np.nonzero(mask))}

    def __len__(self):
        return int(np.count_nonzero(self.status))

    def node_count(self, include_boundary=False):
        return int(np.count_nonzero(self.status > 0 if include_boundary else self.status == OK))

    @classmethod
    def from_polyline(cls, points, width, status=None):
        """Wrap a single polyline as a degenerate net along the D1 family."""
        pts = np.asarray(points, dtype=float)
        L = len(pts)
        n = 2 * L + 1
        pos = np.full((n, n, 3), np.nan)
        st = np.zeros((n, n), dtype=np.int8)
        pos[L : L + len(pts), L] = pts
        st[L : L + len(pts), L] = OK if status is None else status
        return cls(pos, st, float(width))

    @classmethod
    def from_nodes(cls, nodes: dict, width):
        """Build from an ``{(i, j): position}`` mapping (all nodes ``ok``)."""
        L = max(max(abs(i), abs(j)) for i, j in nodes)
        n = 2 * L + 1
        pos = np.full((n, n, 3), np.nan)
        st = np.zeros((n, n), dtype=np.int8)
        for (i, j), p in nodes.items():
            pos[i + L, j + L] = p
            st[i + L, j + L] = OK
        return cls(pos, st, float(width))


def is_staircase_closed(index_set) -> bool:
    for i, j in index_set:
        if i != 0 and j != 0:
            si, sj = (1 if i > 0 else -1), (1 if j > 0 else -1)
            if not {(i - si, j), (i, j - sj), (i - si, j - sj)} <= index_set:
                return False
    return True


# ---------------------------------------------------------------------------
# guidelines


def trace_guideline(spec: SurfaceSpec, start, start_azimuth: float, turns, w: float, max_steps: int,
                    n_samples: int = gk.N_SAMPLES):
    """Polyline from ``start`` taking guideline steps of length ``w``.

    Step ``k`` (0-based) uses azimuth ``start_azimuth + sum(turns[:k])``; at
    most ``min(max_steps, len(turns) + 1)`` steps are taken and tracing stops
    at the first step that is not found.
    """
    start = np.asarray(start, dtype=float)
    if abs(eval_surface(spec, start)) > spec.eval_tol:
        raise MappingError(f"start point {tuple(start)} is not on the surface")
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    turns = list(turns)
    n = min(max_steps, len(turns) + 1)
    pts = [start]
    h = float(start_azimuth)
    for k in range(n):
        if k:
            h += turns[k - 1]
        status, p = gk.guideline_step_batch(spec, pts[-1][None], np.array([gk.normalize_azimuth(h)]), w, n_samples)
        if status[0] != gk.FOUND:
            break
        pts.append(p[0])
    return np.array(pts)


def _headings(genomes, n_steps, L):
    """(G, 4, L) azimuth of step k+1 of each branch."""
    G = len(genomes)
    h = np.zeros((G, 4, L))
    for g, gen in enumerate(genomes):
        for b, (a0, turns) in enumerate(zip(gen.start_azimuths, gen.turns)):
            t = np.zeros(L)
            m = min(len(turns), L - 1)
            t[1 : m + 1] = turns[:m]
            h[g, b] = a0 + np.cumsum(t)
    return np.mod(h, gk.TWO_PI)


def map_batch(spec: SurfaceSpec, genomes, w: float, n_samples: int = gk.N_SAMPLES, max_steps: int | None = None):
    """Compass-method nets for a list of genomes.

    Returns ``(nets, lifted)`` where ``lifted[g]`` is False when seed point A
    could not be placed on the surface (the corresponding net is empty).
    """
    if not w > 0:
        raise ValueError("mesh width must be positive")
    genomes = list(genomes)
    G = len(genomes)
    n_steps = np.array([[len(t) + 1 for t in gen.turns] for gen in genomes], dtype=int).reshape(G, 4)
    if max_steps is not None:
        n_steps = np.minimum(n_steps, max_steps)
    L = int(n_steps.max()) if G else 1
    n = 2 * L + 1
    pos = np.full((G, n, n, 3), np.nan)
    st = np.zeros((G, n, n), dtype=np.int8)

    xa = np.array([gen.x_a for gen in genomes])
    ya = np.array([gen.y_a for gen in genomes])
    d = spec.domain
    inside_xy = (xa >= d.xmin) & (xa <= d.xmax) & (ya >= d.ymin) & (ya <= d.ymax)
    za = np.full(G, np.nan)
    if np.any(inside_xy):
        za[inside_xy] = lift_many(spec, xa[inside_xy], ya[inside_xy])
    lifted = np.isfinite(za)
    A = np.stack([xa, ya, za], axis=-1)
    pos[lifted, L, L] = A[lifted]
    st[lifted, L, L] = OK

    # guidelines: one step per iteration for every (genome, branch)
    heads = _headings(genomes, n_steps, L)
    cur = np.repeat(A[:, None, :], 4, axis=1)
    active = np.repeat(lifted[:, None], 4, axis=1)
    for k in range(1, L + 1):
        active &= k <= n_steps
        gi, bi = np.nonzero(active)
        if gi.size == 0:
            break
        status, pts = gk.guideline_step_batch(spec, cur[gi, bi], heads[gi, bi, k - 1], w, n_samples)
        di = np.array([_BRANCH_DIR[b][0] for b in range(4)])[bi]
        dj = np.array([_BRANCH_DIR[b][1] for b in range(4)])[bi]
        I, J = L + di * k, L + dj * k
        found = status == gk.FOUND
        out = status == gk.OUT_OF_DOMAIN
        placed = found | out
        pos[gi[placed], I[placed], J[placed]] = pts[placed]
        st[gi[found], I[found], J[found]] = OK
        st[gi[out], I[out], J[out]] = BOUNDARY
        cur[gi[found], bi[found]] = pts[found]
        active[gi[~found], bi[~found]] = False

    # quadrants by wavefront a + c = s
    for s in range(2, 2 * L + 1):
        cells = [(si, sj, a, s - a) for si, sj in _QUADRANTS for a in range(max(1, s - L), min(L, s - 1) + 1)]
        if not cells:
            continue
        cells = np.array(cells)
        si, sj, a, c = cells.T
        I, J = L + si * a, L + sj * c
        LI, LJ = L + si * (a - 1), J
        UI, UJ = I, L + sj * (c - 1)
        DI, DJ = LI, UJ
        s_left = st[:, LI, LJ]
        s_up = st[:, UI, UJ]
        s_diag = st[:, DI, DJ]
        go = (s_left > 0) & (s_up > 0) & (s_diag > 0) & ((s_left == OK) | (s_up == OK))
        gi, ci = np.nonzero(go)
        if gi.size == 0:
            continue
        status, pts = gk.compass_step_batch(
            spec, pos[gi, LI[ci], LJ[ci]], pos[gi, UI[ci], UJ[ci]], pos[gi, DI[ci], DJ[ci]], w, n_samples
        )
        found = status == gk.FOUND
        out = status == gk.OUT_OF_DOMAIN
        placed = found | out
        pos[gi[placed], I[ci[placed]], J[ci[placed]]] = pts[placed]
        st[gi[found], I[ci[found]], J[ci[found]]] = OK
        st[gi[out], I[ci[out]], J[ci[out]]] = BOUNDARY

    nets = [TchebychevNet(pos[g], st[g], float(w)) for g in range(G)]
    return nets, lifted


def map_surface(spec: SurfaceSpec, genome: Genome, w: float, n_samples: int = gk.N_SAMPLES,
                max_steps: int | None = None) -> TchebychevNet:
    """Map ``spec`` with the net grown from ``genome``'s guidelines."""
    nets, lifted = map_batch(spec, [genome], w, n_samples, max_steps)
    if not lifted[0]:
        raise MappingError(f"seed point ({genome.x_a}, {genome.y_a}) cannot be lifted onto {spec.name}")
    return nets[0]


# ---------------------------------------------------------------------------
# statistics


@dataclass
class NetStats:
    c_max: float
    c_mean: float
    node_count: int
    max_edge_error: float
    curvatures: np.ndarray = field(repr=False)

    def c_top_mean(self, p: float) -> float:
        """Mean of the largest ``ceil(p * n)`` curvature values."""
        if not 0 < p <= 1:
            raise ValueError("fraction must be in (0, 1]")
        vals = np.sort(self.curvatures)[::-1]
        k = max(1, int(np.ceil(p * vals.size - 1e-9)))
        return float(vals[:k].mean())


def _family_curvatures(pos, st):
    """Curvature at every ok node having both neighbours along D1 (axis 0) or D2 (axis 1)."""
    vals = []
    for axis in (0, 1):
        sl = [slice(None)] * 2
        prev_, mid_, next_ = list(sl), list(sl), list(sl)
        prev_[axis], mid_[axis], next_[axis] = slice(None, -2), slice(1, -1), slice(2, None)
        ok = (st[tuple(mid_)] == OK) & (st[tuple(prev_)] > 0) & (st[tuple(next_)] > 0)
        if np.any(ok):
            vals.append(gk.curvature_batch(pos[tuple(prev_)][ok], pos[tuple(mid_)][ok], pos[tuple(next_)][ok]))
    return np.concatenate(vals) if vals else np.zeros(0)


def _edge_error(pos, st, w):
    err = 0.0
    for axis in (0, 1):
        a = [slice(None)] * 2
        b = [slice(None)] * 2
        a[axis], b[axis] = slice(None, -1), slice(1, None)
        both = (st[tuple(a)] > 0) & (st[tuple(b)] > 0)
        if np.any(both):
            lens = np.linalg.norm(pos[tuple(a)][both] - pos[tuple(b)][both], axis=-1)
            err = max(err, float(np.max(np.abs(lens - w)) / w))
    return err


def net_stats(net: TchebychevNet) -> NetStats:
    curv = _family_curvatures(net.positions, net.status)
    if curv.size == 0:
        raise TooFewNodesError("no node has two neighbours along a bar")
    return NetStats(
        c_max=float(curv.max()),
        c_mean=float(curv.mean()),
        node_count=net.node_count(),
        max_edge_error=_edge_error(net.positions, net.status, net.width),
        curvatures=curv,
    )


# ---------------------------------------------------------------------------
# validity


@dataclass
class ValidityReport:
    complete: bool
    overlap_free: bool
    coverage_ratio: float
    messages: list = field(default_factory=list)

    @property
    def valid(self):
        return self.complete and self.overlap_free


def _signed_cell_areas(pos, st):
    """Projected (x, y) signed area of every cell whose four corners are ok."""
    p00, p10, p11, p01 = pos[:-1, :-1], pos[1:, :-1], pos[1:, 1:], pos[:-1, 1:]
    full = (st[:-1, :-1] == OK) & (st[1:, :-1] == OK) & (st[1:, 1:] == OK) & (st[:-1, 1:] == OK)
    quad = [p00[full], p10[full], p11[full], p01[full]]
    area = np.zeros(int(full.sum()))
    for k in range(4):
        p, q = quad[k], quad[(k + 1) % 4]
        area += p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    return 0.5 * area


def validate_net(net: TchebychevNet, spec: SurfaceSpec, w: float | None = None,
                 coverage_threshold: float = COVERAGE_THRESHOLD,
                 proximity: float = PROXIMITY_FACTOR,
                 cover_radius: float = COVER_RADIUS) -> ValidityReport:
    """Check that a net covers the surface and does not fold over itself.

    Coverage is the fraction of the lifted domain grid (see
    :func:`~gridshell.surface.coverage_samples`) lying within
    ``cover_radius * w`` of a net node; every point of a rhombic cell lies
    within ``w / sqrt(2)`` of one of its corners, so a closed net scores 1.
    Overlap is flagged when two ok nodes at least two lattice steps apart come
    closer than ``proximity * w`` or when the projected cells change
    orientation.
    """
    w = net.width if w is None else float(w)
    msgs = []
    pos, st = net.positions, net.status
    placed = st > 0
    if not np.any(placed):
        return ValidityReport(False, False, 0.0, ["empty net"])

    samples = coverage_samples(spec)
    if samples.shape[0] == 0:
        coverage = 0.0
        msgs.append("surface has no lifted samples inside the domain")
    else:
        tree = cKDTree(pos[placed])
        dist, _ = tree.query(samples, k=1, distance_upper_bound=cover_radius * w)
        coverage = float(np.mean(np.isfinite(dist)))
    complete = coverage >= coverage_threshold
    if not complete:
        msgs.append(f"coverage {coverage:.3f} below {coverage_threshold}")

    overlap_free = True
    L = net.half
    ok_idx = np.argwhere(st == OK)
    if ok_idx.shape[0] > 1:
        pairs = cKDTree(pos[st == OK]).query_pairs(proximity * w, output_type="ndarray")
        if pairs.size:
            gap = np.max(np.abs(ok_idx[pairs[:, 0]] - ok_idx[pairs[:, 1]]), axis=1)
            bad = pairs[gap >= 2]
            if bad.size:
                overlap_free = False
                i0, i1 = ok_idx[bad[0, 0]] - L, ok_idx[bad[0, 1]] - L
                msgs.append(f"{len(bad)} node pairs closer than {proximity}*w, e.g. {tuple(i0)} and {tuple(i1)}")
    areas = _signed_cell_areas(pos, st)
    if areas.size and not (np.all(areas > 0) or np.all(areas < 0)):
        overlap_free = False
        msgs.append(f"{int(min((areas > 0).sum(), (areas <= 0).sum()))} cells with flipped projected orientation")
    return ValidityReport(complete, overlap_free, coverage, msgs)
