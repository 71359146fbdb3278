"""Writers for nets, node tables, convergence histories and plots."""

from __future__ import annotations

import io
import json
import math

import numpy as np

from .net import OK, TchebychevNet

__all__ = ["export_obj", "bar_polylines", "nodes_csv", "history_csv", "values_csv", "history_svg", "dump_json"]


def bar_polylines(net: TchebychevNet):
    """Maximal runs of consecutive nodes, D1 family first, as lists of (i, j).

    D1 runs vary ``i`` at fixed ``j``; D2 runs vary ``j`` at fixed ``i``.
    Single isolated nodes do not form a bar.
    """
    L = net.half
    present = net.status > 0
    n = present.shape[0]
    runs = []
    for axis in (0, 1):
        for fixed in range(n):
            line = present[:, fixed] if axis == 0 else present[fixed, :]
            k = 0
            while k < n:
                if not line[k]:
                    k += 1
                    continue
                start = k
                while k < n and line[k]:
                    k += 1
                if k - start >= 2:
                    if axis == 0:
                        runs.append([(m - L, fixed - L) for m in range(start, k)])
                    else:
                        runs.append([(fixed - L, m - L) for m in range(start, k)])
    return runs


def export_obj(net: TchebychevNet, surface: str = "", genome_digest: str = "") -> bytes:
    """Wavefront OBJ with one ``v`` per node (sorted by (i, j)) and one ``l`` per bar."""
    nodes = net.nodes
    if not nodes:
        raise ValueError("cannot export an empty net")
    keys = sorted(nodes)
    index = {k: n + 1 for n, k in enumerate(keys)}
    n_boundary = sum(1 for k in keys if nodes[k].status != "ok")
    out = io.StringIO()
    out.write("# gridshell Tchebychev net\n")
    out.write(f"# w {net.width!r}\n")
    out.write(f"# surface {surface}\n")
    out.write(f"# genome {genome_digest}\n")
    out.write(f"# nodes {len(keys)} (boundary {n_boundary})\n")
    for k in keys:
        x, y, z = (float(c) for c in nodes[k].position)
        out.write(f"v {x!r} {y!r} {z!r}\n")
    for run in bar_polylines(net):
        out.write("l " + " ".join(str(index[k]) for k in run) + "\n")
    return out.getvalue().encode("ascii")


def nodes_csv(net: TchebychevNet) -> str:
    out = io.StringIO()
    out.write("i,j,x,y,z,status\n")
    nodes = net.nodes
    for k in sorted(nodes):
        x, y, z = (float(c) for c in nodes[k].position)
        out.write(f"{k[0]},{k[1]},{x!r},{y!r},{z!r},{nodes[k].status}\n")
    return out.getvalue()


def history_csv(history) -> str:
    out = io.StringIO()
    out.write("generation,best,mean\n")
    for g, (best, mean) in enumerate(history, start=1):
        out.write(f"{g},{float(best)!r},{float(mean)!r}\n")
    return out.getvalue()


def values_csv(header, rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(repr(float(v)) if not isinstance(v, int) else str(v) for v in row) + "\n")
    return out.getvalue()


def history_svg(history, width=640, height=400, margin=48) -> str:
    """Best and mean fitness per generation as two SVG polylines."""
    best = np.array([h[0] for h in history], dtype=float)
    mean = np.array([h[1] for h in history], dtype=float)
    vals = np.concatenate([best, mean])
    vals = vals[np.isfinite(vals)]
    lo, hi = (float(vals.min()), float(vals.max())) if vals.size else (0.0, 1.0)
    if hi - lo < 1e-12:
        hi = lo + 1.0
    n = max(len(history) - 1, 1)

    def pts(series):
        xs = margin + (width - 2 * margin) * np.arange(len(series)) / n
        ys = height - margin - (height - 2 * margin) * (series - lo) / (hi - lo)
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys) if math.isfinite(y))

    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>\n'
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>\n'
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">generation (1..{len(history)})</text>\n'
        f'<text x="4" y="{margin - 8}" font-size="12">{hi:.4g}</text>\n'
        f'<text x="4" y="{height - margin}" font-size="12">{lo:.4g}</text>\n'
        f'<polyline points="{pts(mean)}" fill="none" stroke="steelblue" stroke-width="1.5"/>\n'
        f'<polyline points="{pts(best)}" fill="none" stroke="firebrick" stroke-width="1.5"/>\n'
        f'<text x="{width - margin}" y="{margin}" text-anchor="end" font-size="12" fill="firebrick">best</text>\n'
        f'<text x="{width - margin}" y="{margin + 14}" text-anchor="end" font-size="12" fill="steelblue">mean</text>\n'
        "</svg>\n"
    )


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, (np.floating,)):
        return _jsonable(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"



