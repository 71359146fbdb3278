"""
Compass-method primitives.

Step circles, radical circles of two spheres, circle/surface root finding and
the three-point bar curvature.  The ``*_batch`` functions work on stacks of
circles so that a whole wavefront of net nodes (across many genomes) costs a
handful of numpy calls; the scalar functions are thin wrappers over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .surface import SurfaceSpec, in_domain_many

__all__ = [
    "Circle3",
    "StepOutcome",
    "FOUND",
    "NO_INTERSECTION",
    "OUT_OF_DOMAIN",
    "AMBIGUOUS",
    "normalize_azimuth",
    "vertical_step_circle",
    "sphere_sphere_circle",
    "circle_surface_roots",
    "guideline_step",
    "compass_step",
    "polyline_curvature",
    "curvature_batch",
]

TWO_PI = 2.0 * math.pi
N_SAMPLES = 64
T_TOL = 1e-12

FOUND = 0
NO_INTERSECTION = 1
OUT_OF_DOMAIN = 2
AMBIGUOUS = 3
STATUS_NAMES = {FOUND: "found", NO_INTERSECTION: "no_intersection", OUT_OF_DOMAIN: "out_of_domain", AMBIGUOUS: "ambiguous"}


class CoincidentPointsError(ValueError):
    pass


@dataclass(frozen=True)
class Circle3:
    center: np.ndarray
    radius: float
    u_axis: np.ndarray
    v_axis: np.ndarray

    def point(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return self.center + self.radius * (np.cos(t) * self.u_axis + np.sin(t) * self.v_axis)

    @property
    def normal(self):
        return np.cross(self.u_axis, self.v_axis)


@dataclass
class StepOutcome:
    status: str
    point: np.ndarray | None = None
    candidates: list = field(default_factory=list)

    @property
    def found(self):
        return self.status == "found"


def normalize_azimuth(h):
    """Map an azimuth to ``[0, 2*pi)``."""
    h = np.mod(h, TWO_PI)
    return np.where(h >= TWO_PI, 0.0, h) if np.ndim(h) else (0.0 if h >= TWO_PI else float(h))


# ---------------------------------------------------------------------------
# circles


def vertical_step_circle(m, w: float, h: float) -> Circle3:
    """Vertical plane through ``m`` with horizontal azimuth ``h``, cut by sphere(m, w)."""
    if not w > 0:
        raise ValueError("mesh width must be positive")
    h = normalize_azimuth(h)
    u = np.array([math.cos(h), math.sin(h), 0.0])
    return Circle3(np.asarray(m, dtype=float).copy(), float(w), u, np.array([0.0, 0.0, 1.0]))


def _perp_basis(n):
    """Orthonormal (u, v) spanning the plane normal to each unit row of ``n``."""
    n = np.asarray(n, dtype=float)
    ax = np.argmin(np.abs(n), axis=-1)
    helper = np.zeros_like(n)
    np.put_along_axis(helper, ax[..., None], 1.0, axis=-1)
    u = helper - np.sum(helper * n, axis=-1, keepdims=True) * n
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    v = np.cross(n, u)
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return u, v


def radical_circle_batch(c1, r1, c2, r2):
    """Vectorised sphere/sphere intersection.

    Returns ``(ok, center, radius, u, v)``; rows with ``ok == False`` (disjoint,
    nested or tangent spheres) carry NaNs.
    """
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    delta = c2 - c1
    d = np.linalg.norm(delta, axis=-1)
    ok = (d > np.abs(r1 - r2)) & (d < r1 + r2)
    safe_d = np.where(d > 0, d, 1.0)
    n = delta / safe_d[..., None]
    a = (d * d + r1 * r1 - r2 * r2) / (2.0 * safe_d)
    rad = np.sqrt(np.where(ok, r1 * r1 - a * a, np.nan))
    center = c1 + a[..., None] * n
    n = np.where(ok[..., None], n, np.array([0.0, 0.0, 1.0]))
    u, v = _perp_basis(n)
    return ok, center, rad, u, v


def sphere_sphere_circle(c1, r1: float, c2, r2: float) -> Circle3 | None:
    if not (r1 > 0 and r2 > 0):
        raise ValueError("sphere radii must be positive")
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    if np.array_equal(c1, c2):
        raise CoincidentPointsError("sphere centres coincide")
    ok, center, rad, u, v = radical_circle_batch(c1[None], [r1], c2[None], [r2])
    if not ok[0]:
        return None
    return Circle3(center[0], float(rad[0]), u[0], v[0])


# ---------------------------------------------------------------------------
# root finding


def circle_roots_batch(spec: SurfaceSpec, center, radius, u, v, n_samples: int = N_SAMPLES):
    """All roots of F along a stack of circles.

    Parameters
    ----------
    center, u, v : (K, 3) arrays
    radius : (K,) array

    Returns
    -------
    owner : (M,) int array
        Index of the circle each root belongs to, ascending.
    t : (M,) array
        Circle parameter of each root.
    pts : (M, 3) array
        Root positions; every one satisfies ``|F| <= spec.eval_tol``.
    """
    center = np.asarray(center, dtype=float)
    radius = np.asarray(radius, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    K = center.shape[0]
    if K == 0:
        return np.zeros(0, dtype=int), np.zeros(0), np.zeros((0, 3))
    dt = TWO_PI / n_samples
    ts = np.arange(n_samples) * dt
    cs, sn = np.cos(ts), np.sin(ts)

    def at(idx, t):
        ct, st = np.cos(t)[:, None], np.sin(t)[:, None]
        return center[idx] + radius[idx, None] * (ct * u[idx] + st * v[idx])

    pts = center[:, None, :] + radius[:, None, None] * (cs[None, :, None] * u[:, None, :] + sn[None, :, None] * v[:, None, :])
    with np.errstate(all="ignore"):
        g = np.asarray(spec.func(pts[..., 0], pts[..., 1], pts[..., 2]), dtype=float)
    g = np.broadcast_to(g, (K, n_samples))
    finite = np.isfinite(g)
    g_next = np.roll(g, -1, axis=1)
    fin_next = np.roll(finite, -1, axis=1)
    zero = finite & (g == 0.0)
    change = finite & fin_next & (g * g_next < 0.0)

    zi, zk = np.nonzero(zero)
    bi, bk = np.nonzero(change)
    lo = bk * dt
    hi = lo + dt
    glo = g[bi, bk]
    n_iter = max(1, math.ceil(math.log2(dt / T_TOL)))
    for _ in range(n_iter):
        if bi.size == 0:
            break
        mid = 0.5 * (lo + hi)
        p = at(bi, mid)
        with np.errstate(all="ignore"):
            gm = np.asarray(spec.func(p[:, 0], p[:, 1], p[:, 2]), dtype=float) + 0.0 * mid
        same = np.sign(gm) == np.sign(glo)
        lo = np.where(same, mid, lo)
        glo = np.where(same, gm, glo)
        hi = np.where(same, hi, mid)
    if bi.size:
        plo, phi = at(bi, lo), at(bi, hi)
        with np.errstate(all="ignore"):
            flo = np.abs(np.asarray(spec.func(plo[:, 0], plo[:, 1], plo[:, 2]), dtype=float) + 0.0 * lo)
            fhi = np.abs(np.asarray(spec.func(phi[:, 0], phi[:, 1], phi[:, 2]), dtype=float) + 0.0 * hi)
        take_lo = flo <= fhi
        bt = np.mod(np.where(take_lo, lo, hi), TWO_PI)
        bp = np.where(take_lo[:, None], plo, phi)
        good = np.minimum(flo, fhi) <= spec.eval_tol
        bi, bt, bp = bi[good], bt[good], bp[good]
    else:
        bt = np.zeros(0)
        bp = np.zeros((0, 3))
    owner = np.concatenate([zi, bi])
    t = np.concatenate([zk * dt, bt])
    p = np.concatenate([pts[zi, zk], bp])
    order = np.lexsort((t, owner))
    return owner[order], t[order], p[order]


def circle_surface_roots(spec: SurfaceSpec, c: Circle3, n_samples: int = N_SAMPLES) -> list:
    """Surface points on circle ``c``, ordered by circle parameter, duplicates merged."""
    _, _, pts = circle_roots_batch(
        spec, c.center[None], np.array([c.radius]), c.u_axis[None], c.v_axis[None], n_samples
    )
    out = []
    for p in pts:
        if all(np.linalg.norm(p - q) > 1e-9 * c.radius for q in out):
            out.append(p)
    if len(out) > 1 and np.linalg.norm(out[0] - out[-1]) <= 1e-9 * c.radius:
        out.pop()
    return out


def _pick_best(K, owner, crit, keep, pts, tie_tol):
    """Per circle, the kept root maximising ``crit``; flags near-ties between distinct roots."""
    owner, crit, pts = owner[keep], crit[keep], pts[keep]
    best = np.full(K, -1)
    ambiguous = np.zeros(K, dtype=bool)
    if owner.size == 0:
        return best, ambiguous
    order = np.lexsort((-crit, owner))
    o = owner[order]
    first = np.ones(o.size, dtype=bool)
    first[1:] = o[1:] != o[:-1]
    idx = order[first]
    best[o[first]] = idx
    second = np.zeros(o.size, dtype=bool)
    second[1:] = (o[1:] == o[:-1]) & first[:-1]
    if np.any(second):
        s_idx = order[second]
        f_idx = order[np.flatnonzero(second) - 1]
        tie = (crit[f_idx] - crit[s_idx] <= tie_tol) & (np.linalg.norm(pts[f_idx] - pts[s_idx], axis=-1) > tie_tol)
        ambiguous[o[second][tie]] = True
    # map back to indices into the unfiltered arrays
    kept = np.flatnonzero(keep)
    best = np.where(best >= 0, kept[np.maximum(best, 0)], -1)
    return best, ambiguous


def _finish(spec, K, best, ambiguous, pts):
    status = np.full(K, NO_INTERSECTION, dtype=np.int8)
    out = np.full((K, 3), np.nan)
    has = best >= 0
    out[has] = pts[best[has]]
    status[has] = FOUND
    inside = in_domain_many(spec, out)
    status[has & ~inside] = OUT_OF_DOMAIN
    status[has & ambiguous] = AMBIGUOUS
    return status, out


def guideline_step_batch(spec: SurfaceSpec, prev, h, w: float, n_samples: int = N_SAMPLES):
    """Vectorised ``guideline_step``; returns ``(status, points)``."""
    prev = np.asarray(prev, dtype=float)
    h = np.asarray(h, dtype=float)
    K = prev.shape[0]
    dirs = np.stack([np.cos(h), np.sin(h), np.zeros_like(h)], axis=-1)
    up = np.broadcast_to(np.array([0.0, 0.0, 1.0]), dirs.shape)
    owner, _, pts = circle_roots_batch(spec, prev, np.full(K, float(w)), dirs, up, n_samples)
    adv = np.einsum("ij,ij->i", pts - prev[owner], dirs[owner]) if owner.size else np.zeros(0)
    best, amb = _pick_best(K, owner, adv, adv > 0.0, pts, 1e-9 * w)
    return _finish(spec, K, best, amb, pts)


def compass_step_batch(spec: SurfaceSpec, left, up, diag, w: float, n_samples: int = N_SAMPLES):
    """Vectorised ``compass_step``; returns ``(status, points)``."""
    left = np.asarray(left, dtype=float)
    up = np.asarray(up, dtype=float)
    diag = np.asarray(diag, dtype=float)
    K = left.shape[0]
    ww = np.full(K, float(w))
    ok, center, rad, u, v = radical_circle_batch(left, ww, up, ww)
    sel = np.flatnonzero(ok)
    owner, _, pts = circle_roots_batch(spec, center[sel], rad[sel], u[sel], v[sel], n_samples)
    owner = sel[owner]
    dist = np.linalg.norm(pts - diag[owner], axis=-1) if owner.size else np.zeros(0)
    best, amb = _pick_best(K, owner, dist, dist > 1e-6 * w, pts, 1e-9 * w)
    return _finish(spec, K, best, amb, pts)


def _outcome(status, point, candidates):
    s = STATUS_NAMES[int(status)]
    return StepOutcome(s, None if s == "no_intersection" else point, candidates)


def guideline_step(spec: SurfaceSpec, prev, h: float, w: float, n_samples: int = N_SAMPLES) -> StepOutcome:
    """Next guideline node: the forward-most root of the vertical step circle."""
    if not w > 0:
        raise ValueError("mesh width must be positive")
    prev = np.asarray(prev, dtype=float)
    status, pts = guideline_step_batch(spec, prev[None], np.array([normalize_azimuth(h)]), w, n_samples)
    cands = circle_surface_roots(spec, vertical_step_circle(prev, w, h), n_samples)
    return _outcome(status[0], pts[0], cands)


def compass_step(spec: SurfaceSpec, left, up, diag_prev, w: float, n_samples: int = N_SAMPLES) -> StepOutcome:
    """Fourth corner of a cell: the root of the radical circle farthest from ``diag_prev``."""
    left = np.asarray(left, dtype=float)
    up = np.asarray(up, dtype=float)
    diag_prev = np.asarray(diag_prev, dtype=float)
    if np.array_equal(left, up):
        raise CoincidentPointsError("left and up nodes coincide")
    status, pts = compass_step_batch(spec, left[None], up[None], diag_prev[None], w, n_samples)
    circ = sphere_sphere_circle(left, w, up, w)
    cands = [] if circ is None else circle_surface_roots(spec, circ, n_samples)
    return _outcome(status[0], pts[0], cands)


# ---------------------------------------------------------------------------
# curvature


COLLINEAR_SIN = 1e-10


def curvature_batch(p_prev, p_mid, p_next):
    """Three-point curvature 2 sin(turn) / |p_next - p_prev| for stacks of points.

    Equal to the inverse circumradius.  Triples with sin(turn) below
    ``COLLINEAR_SIN`` count as straight and give exactly 0; that is well under
    the angular noise left by the root bisection.
    """
    a = np.asarray(p_prev, dtype=float) - p_mid
    b = np.asarray(p_next, dtype=float) - p_mid
    la = np.linalg.norm(a, axis=-1)
    lb = np.linalg.norm(b, axis=-1)
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    chord = np.linalg.norm(np.asarray(p_next, dtype=float) - p_prev, axis=-1)
    with np.errstate(all="ignore"):
        sin_turn = cross / (la * lb)
        c = 2.0 * sin_turn / chord
    collinear = cross <= COLLINEAR_SIN * la * lb
    return np.where(collinear, 0.0, c)


def polyline_curvature(p_prev, p_mid, p_next) -> float:
    """Curvature of the circle through three points (0 for collinear points)."""
    ax, ay, az = (float(v) for v in p_prev)
    bx, by, bz = (float(v) for v in p_mid)
    cx, cy, cz = (float(v) for v in p_next)
    if (ax, ay, az) == (bx, by, bz) or (bx, by, bz) == (cx, cy, cz) or (ax, ay, az) == (cx, cy, cz):
        raise CoincidentPointsError("curvature needs three distinct points")
    ux, uy, uz = ax - bx, ay - by, az - bz
    vx, vy, vz = cx - bx, cy - by, cz - bz
    la = math.sqrt(ux * ux + uy * uy + uz * uz)
    lb = math.sqrt(vx * vx + vy * vy + vz * vz)
    wx, wy, wz = uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx
    cross = math.sqrt(wx * wx + wy * wy + wz * wz)
    if cross <= COLLINEAR_SIN * la * lb:
        return 0.0
    chord = math.sqrt((cx - ax) ** 2 + (cy - ay) ** 2 + (cz - az) ** 2)
    return 2.0 * (cross / (la * lb)) / chord
