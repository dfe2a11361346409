"""Matplotlib figures for scans, boundedness probes and cylinder decompositions."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps repeated runs byte-identical
_META = {
    ".png": {"Software": None},
    ".svg": {"Date": None, "Creator": None},
    ".pdf": {"CreationDate": None, "Producer": None, "Creator": None},
}


def _save(fig, path):
    path = str(path)
    ext = path[path.rfind("."):].lower() if "." in path else ".png"
    kwargs = {"metadata": _META.get(ext, {})}
    if ext == ".svg":
        plt.rcParams["svg.hashsalt"] = "zcovers"
    fig.savefig(path, **kwargs)
    plt.close(fig)


def scan_figure(result, path, title="exceptional directions"):
    """Witness counts on the direction grid and the box-counting plot."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.8))
    n = result.grid
    theta = np.arange(n) * math.pi / n
    ax1.plot(theta, result.counts, lw=0.6, color="#335")
    ax1.set_xlabel("theta (rad, modulo pi)")
    ax1.set_ylabel("witnesses")
    ax1.set_title(f"{title}: excluded fraction {result.excluded_fraction:.4f}")
    pts = [(math.log(1 / s), math.log(o)) for s, o in result.box_counts if o > 0]
    if pts:
        xs, ys = zip(*pts)
        ax2.plot(xs, ys, "o-", color="#a33")
    ax2.set_xlabel("log(1 / box size)")
    ax2.set_ylabel("log(occupied boxes)")
    ax2.set_title(f"box-count slope {result.slope:.3f}")
    fig.tight_layout()
    _save(fig, path)


def probe_figure(rows, path, title="boundedness probe"):
    """Running maximum of ``|level|`` against time."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ts = [float(t) for t, _ in rows]
    ms = [m for _, m in rows]
    ax.step(ts, ms, where="post", color="#335")
    ax.set_xscale("log" if ts and min(ts) > 0 else "linear")
    ax.set_xlabel("t (multiples of the direction vector)")
    ax.set_ylabel("max |level| on [0, t]")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def _clip(poly, a, b, c):
    """Part of a convex polygon where ``a x + b y >= c``."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp >= 0:
            out.append(p)
        if (fp >= 0) != (fq >= 0):
            s = fp / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def cylinders_figure(surface, decomposition, path, title=None):
    """Polygons shaded by the cylinder each slab belongs to."""
    fig, ax = plt.subplots(figsize=(6, 6))
    cmap = plt.get_cmap("tab10")
    vx, vy = decomposition.direction.floats()
    levels = decomposition.float_levels()
    for p, poly in enumerate(surface.polygons):
        pts = [v.to_float() for v in poly.vertices]
        lv = levels[p]
        for j in range(len(lv) - 1):
            # normalized height -vy x + vx y between lv[j] and lv[j + 1]
            piece = _clip(pts, -vy, vx, lv[j])
            piece = _clip(piece, vy, -vx, -lv[j + 1])
            if len(piece) >= 3:
                cyl = decomposition.slab_cylinder[(p, j)]
                ax.fill(*zip(*piece), color=cmap(cyl % 10), alpha=0.6, lw=0)
        xs, ys = zip(*(pts + pts[:1]))
        ax.plot(xs, ys, color="#222", lw=0.8)
    handles = [
        plt.Rectangle((0, 0), 1, 1, color=cmap(i % 10), alpha=0.6)
        for i in range(len(decomposition.cylinders))
    ]
    labels = [f"C{i}: modulus {float(c.modulus):.4g}" for i, c in enumerate(decomposition.cylinders)]
    ax.legend(handles, labels, fontsize=8, loc="upper right")
    ax.set_aspect("equal")
    ax.set_title(title or f"cylinders in direction ({vx:.4g}, {vy:.4g})")
    fig.tight_layout()
    _save(fig, path)
