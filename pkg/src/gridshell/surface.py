"""
Implicit surfaces F(x, y, z) = 0 clipped to an axis-aligned domain box.

Every surface, whether taken from the built-in catalog or parsed from text,
is canonicalised to the implicit form; height fields z = f(x, y) become
F = z - f(x, y).  All callables accept numpy arrays.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as _expr

__all__ = [
    "Box",
    "SurfaceSpec",
    "SurfaceEvaluationError",
    "NoRootError",
    "parse_surface_expr",
    "from_expression",
    "catalog",
    "CATALOG",
    "eval_surface",
    "gradient",
    "lift_to_surface",
    "lift_many",
    "in_domain",
]


class SurfaceEvaluationError(ArithmeticError):
    """F evaluated to a non-finite value."""


class NoRootError(ValueError):
    """F keeps a constant sign along the searched segment."""


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box ``[lo, hi]`` on each axis."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    zmin: float
    zmax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("domain must have positive extent on x and y")
        if self.zmax < self.zmin:
            raise ValueError("domain z range is reversed")

    @property
    def lo(self):
        return np.array([self.xmin, self.ymin, self.zmin])

    @property
    def hi(self):
        return np.array([self.xmax, self.ymax, self.zmax])

    @classmethod
    def from_ranges(cls, x, y, z):
        return cls(float(x[0]), float(x[1]), float(y[0]), float(y[1]), float(z[0]), float(z[1]))


@dataclass(frozen=True)
class SurfaceSpec:
    """An implicit surface with its domain box and on-surface tolerance.

    ``func`` is vectorised: ``func(x, y, z)`` broadcasts over arrays.
    ``text`` is an equivalent expression in the surface grammar.
    """

    name: str
    func: Callable = field(compare=False)
    text: str
    domain: Box
    eval_tol: float = 1e-8
    params: tuple = ()

    def __post_init__(self):
        if not self.eval_tol > 0:
            raise ValueError("eval_tol must be positive")

    def __call__(self, x, y, z):
        return self.func(x, y, z)


def parse_surface_expr(text: str) -> _expr.Expr:
    """Parse a surface equation F(x, y, z) written in the infix grammar."""
    return _expr.parse_expr(text)


def from_expression(text: str, domain: Box, eval_tol: float = 1e-8, name: str = "expr") -> SurfaceSpec:
    tree = parse_surface_expr(text)

    def func(x, y, z, _tree=tree):
        with np.errstate(all="ignore"):
            return _expr.evaluate(_tree, x, y, z)

    return SurfaceSpec(name=name, func=func, text=text, domain=domain, eval_tol=eval_tol)


# ---------------------------------------------------------------------------
# catalog


def _f(v):
    return repr(float(v))


def hemisphere(center=(0.0, 0.0, 0.0), radius=10.0, eval_tol=1e-8):
    cx, cy, cz = (float(c) for c in center)
    r = float(radius)

    def func(x, y, z):
        return (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2 - r * r

    text = f"(x - {_f(cx)})^2 + (y - {_f(cy)})^2 + (z - {_f(cz)})^2 - {_f(r)}*{_f(r)}"
    box = Box(cx - r, cx + r, cy - r, cy + r, cz, cz + r)
    return SurfaceSpec("hemisphere", func, text, box, eval_tol, (cx, cy, cz, r))


def sinusoid(eval_tol=1e-8):
    def func(x, y, z):
        return z - 0.05 * x * np.sin(x) - np.sin(y)

    text = "z - 0.05*x*sin(x) - sin(y)"
    return SurfaceSpec("sinusoid", func, text, Box(0.0, 10.0, 0.0, 4.0, -2.0, 2.0), eval_tol)


def hypar(half_width=1.0, eval_tol=1e-8):
    a = float(half_width)

    def func(x, y, z):
        return z - (x**2 - y**2)

    zr = 2.0 * a * a
    return SurfaceSpec("hypar", func, "z - (x^2 - y^2)", Box(-a, a, -a, a, -zr, zr), eval_tol, (a,))


def plane(half_width=10.0, eval_tol=1e-8):
    a = float(half_width)

    def func(x, y, z):
        return z + 0.0 * x

    return SurfaceSpec("plane", func, "z", Box(-a, a, -a, a, -1.0, 1.0), eval_tol, (a,))


def ellipsoid(a=12.0, b=8.0, c=6.0, eval_tol=1e-8):
    a, b, c = float(a), float(b), float(c)

    def func(x, y, z):
        return (x / a) ** 2 + (y / b) ** 2 + (z / c) ** 2 - 1.0

    text = f"(x/{_f(a)})^2 + (y/{_f(b)})^2 + (z/{_f(c)})^2 - 1.0"
    return SurfaceSpec("ellipsoid", func, text, Box(-a, a, -b, b, 0.0, c), eval_tol, (a, b, c))


def torus(major=8.0, minor=3.0, eval_tol=1e-8):
    big, r = float(major), float(minor)
    ext = big + r

    def func(x, y, z):
        return (np.sqrt(x * x + y * y) - big) ** 2 + z * z - r * r

    text = f"(sqrt(x^2 + y^2) - {_f(big)})^2 + z^2 - {_f(r)}*{_f(r)}"
    return SurfaceSpec("torus", func, text, Box(-ext, ext, -ext, ext, 0.0, r), eval_tol, (big, r))


def scherk(half_width=1.4, eval_tol=1e-8):
    """First Scherk surface exp(z) cos(x) = cos(y), for |x|, |y| < pi/2."""
    a = float(half_width)
    if not a < math.pi / 2:
        raise ValueError("scherk half_width must be below pi/2")
    zr = math.log(1.0 / math.cos(a)) + 0.5

    def func(x, y, z):
        return np.exp(z) * np.cos(x) - np.cos(y)

    return SurfaceSpec("scherk", func, "exp(z)*cos(x) - cos(y)", Box(-a, a, -a, a, -zr, zr), eval_tol, (a,))


CATALOG = {
    "hemisphere": hemisphere,
    "sinusoid": sinusoid,
    "hypar": hypar,
    "plane": plane,
    "ellipsoid": ellipsoid,
    "torus": torus,
    "scherk": scherk,
}


def catalog(name: str, **params) -> SurfaceSpec:
    """Build a catalog surface by name, e.g. ``catalog("hemisphere", radius=10)``."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog surface {name!r}; choose from {sorted(CATALOG)}") from None
    return factory(**params)


# ---------------------------------------------------------------------------
# evaluation


def eval_surface(spec: SurfaceSpec, p) -> float:
    x, y, z = (float(c) for c in p)
    with np.errstate(all="ignore"):
        value = float(spec.func(x, y, z))
    if not math.isfinite(value):
        raise SurfaceEvaluationError(f"F is not finite at {(x, y, z)}")
    return value


def gradient(spec: SurfaceSpec, p) -> np.ndarray:
    """Central finite-difference gradient of F, step ``1e-6 * max(1, |p|)``."""
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise SurfaceEvaluationError("gradient requested at a non-finite point")
    h = 1e-6 * max(1.0, float(np.linalg.norm(p)))
    pts = np.repeat(p[None, :], 6, axis=0)
    pts[[0, 2, 4], [0, 1, 2]] += h
    pts[[1, 3, 5], [0, 1, 2]] -= h
    with np.errstate(all="ignore"):
        vals = np.asarray(spec.func(pts[:, 0], pts[:, 1], pts[:, 2]), dtype=float)
    g = (vals[0::2] - vals[1::2]) / (2.0 * h)
    if not np.all(np.isfinite(g)):
        raise SurfaceEvaluationError(f"gradient is not finite at {tuple(p)}")
    return g


DOMAIN_SLACK = 1e-10


def _box_bounds(spec):
    # closed box widened by a relative 1e-10 so round-off on a face still counts as inside
    lo, hi = np.asarray(spec.domain.lo), np.asarray(spec.domain.hi)
    pad = DOMAIN_SLACK * np.maximum(hi - lo, 1.0)
    return lo - pad, hi + pad


def in_domain(spec: SurfaceSpec, p) -> bool:
    lo, hi = _box_bounds(spec)
    p = np.asarray(p, dtype=float)
    return bool(np.all(p >= lo) and np.all(p <= hi))


def in_domain_many(spec: SurfaceSpec, pts) -> np.ndarray:
    lo, hi = _box_bounds(spec)
    pts = np.asarray(pts, dtype=float)
    return np.all((pts >= lo) & (pts <= hi), axis=-1)


_LIFT_SAMPLES = 256
_BISECT_ITERS = 80


def lift_many(spec: SurfaceSpec, x, y, n_samples: int = _LIFT_SAMPLES) -> np.ndarray:
    """Highest root z of F(x, y, .) on the domain z range, NaN where there is none.

    Each (x, y) column is sampled at ``n_samples`` heights; the topmost sign
    change (or exact zero) is refined by bisection.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    x, y = np.broadcast_arrays(x, y)
    shape = x.shape
    x = x.ravel()
    y = y.ravel()
    zs = np.linspace(spec.domain.zmin, spec.domain.zmax, n_samples)
    with np.errstate(all="ignore"):
        g = np.asarray(spec.func(x[:, None], y[:, None], zs[None, :]), dtype=float)
    g = np.broadcast_to(g, (x.size, n_samples))
    finite = np.isfinite(g)
    exact = (g == 0.0) & finite
    change = np.zeros_like(exact)
    change[:, :-1] = (g[:, :-1] * g[:, 1:] < 0.0) & finite[:, :-1] & finite[:, 1:]
    # column index of the topmost event; an exact zero at k beats a change in [k-1, k]
    score = np.where(exact, 2 * np.arange(n_samples) + 1, -1)
    score = np.maximum(score, np.where(change, 2 * np.arange(n_samples), -1))
    best = score.max(axis=1)
    z = np.full(x.size, np.nan)
    has = best >= 0
    is_zero = has & (best % 2 == 1)
    z[is_zero] = zs[best[is_zero] // 2]
    todo = np.flatnonzero(has & ~is_zero)
    if todo.size:
        k = best[todo] // 2
        lo = zs[k].copy()
        hi = zs[k + 1].copy()
        glo = g[todo, k].copy()
        xt, yt = x[todo], y[todo]
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            with np.errstate(all="ignore"):
                gm = np.asarray(spec.func(xt, yt, mid), dtype=float) + 0.0 * mid
            # columns freeze once converged, so a result does not depend on its batch
            live = hi - lo > 4e-16 * np.maximum(1.0, np.abs(lo))
            if not np.any(live):
                break
            same = np.sign(gm) == np.sign(glo)
            lo = np.where(live & same, mid, lo)
            glo = np.where(live & same, gm, glo)
            hi = np.where(live & ~same, mid, hi)
        with np.errstate(all="ignore"):
            flo = np.abs(np.asarray(spec.func(xt, yt, lo), dtype=float) + 0.0 * lo)
            fhi = np.abs(np.asarray(spec.func(xt, yt, hi), dtype=float) + 0.0 * hi)
        zt = np.where(flo <= fhi, lo, hi)
        ft = np.minimum(flo, fhi)
        zt[~(ft <= spec.eval_tol)] = np.nan
        z[todo] = zt
    return z.reshape(shape)


def lift_to_surface(spec: SurfaceSpec, x: float, y: float) -> np.ndarray:
    """Point (x, y, z*) on the surface; the upper sheet wins when several roots exist."""
    d = spec.domain
    if not (d.xmin <= x <= d.xmax and d.ymin <= y <= d.ymax):
        raise ValueError(f"({x}, {y}) lies outside the domain's x, y ranges")
    z = float(lift_many(spec, x, y)[0])
    if math.isnan(z):
        raise NoRootError(f"no surface root above ({x}, {y}) for z in [{d.zmin}, {d.zmax}]")
    return np.array([float(x), float(y), z])


@functools.lru_cache(maxsize=32)
def coverage_samples(spec: SurfaceSpec, n: int = 64) -> np.ndarray:
    """Lifted points of an ``n`` x ``n`` cell-centred grid over the x, y domain.

    Only columns where the surface is present inside the domain are kept, so
    the returned set samples the domain intersected with the surface's
    projected extent.
    """
    d = spec.domain
    xs = d.xmin + (np.arange(n) + 0.5) * (d.xmax - d.xmin) / n
    ys = d.ymin + (np.arange(n) + 0.5) * (d.ymax - d.ymin) / n
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gz = lift_many(spec, gx, gy)
    pts = np.stack([gx, gy, gz], axis=-1).reshape(-1, 3)
    return pts[np.isfinite(pts[:, 2])]
