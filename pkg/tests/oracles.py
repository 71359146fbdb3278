"""Independent reference computations used by the tests."""

import math

import numpy as np


def circumradius(a, b, c):
    """Circumradius from the circumcentre, solved as a 2x2 system in the triangle's plane."""
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))
    u, v = b - a, c - a
    m = np.array([[u @ u, u @ v], [u @ v, v @ v]])
    s, t = np.linalg.solve(m, 0.5 * np.array([u @ u, v @ v]))
    return float(np.linalg.norm(s * u + t * v))


def circumradius_many(a, b, c):
    u, v = b - a, c - a
    uu = np.einsum("ij,ij->i", u, u)
    uv = np.einsum("ij,ij->i", u, v)
    vv = np.einsum("ij,ij->i", v, v)
    m = np.stack([np.stack([uu, uv], -1), np.stack([uv, vv], -1)], -2)
    st = np.linalg.solve(m, 0.5 * np.stack([uu, vv], -1)[..., None])[..., 0]
    return np.linalg.norm(st[:, :1] * u + st[:, 1:] * v, axis=1)


def sphere_circle_params(r, center, radius, u, v):
    """Parameters t in [0, 2pi) where a circle meets the sphere |p| = r, from the closed form."""
    center = np.asarray(center, dtype=float)
    A = 2 * radius * (center @ u)
    B = 2 * radius * (center @ v)
    D = r * r - center @ center - radius * radius
    amp = math.hypot(A, B)
    if amp == 0 or abs(D) > amp:
        return []
    phi = math.atan2(B, A)
    d = math.acos(D / amp)
    return sorted({(phi + d) % (2 * math.pi), (phi - d) % (2 * math.pi)})


def brute_force_forward_root(func, center, radius, u, v, heading, n=1_000_000):
    """Forward-most root on a circle by dense sampling and linear interpolation."""
    t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    p = center + radius * (np.cos(t)[:, None] * u + np.sin(t)[:, None] * v)
    g = func(p[:, 0], p[:, 1], p[:, 2])
    gn = np.roll(g, -1)
    k = np.flatnonzero(g * gn < 0)
    frac = g[k] / (g[k] - gn[k])
    tr = t[k] + frac * (2 * math.pi / n)
    roots = center + radius * (np.cos(tr)[:, None] * u + np.sin(tr)[:, None] * v)
    adv = (roots - center) @ heading
    return roots[np.argmax(adv)]


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
