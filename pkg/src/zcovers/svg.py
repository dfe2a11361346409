"""Minimal SVG export of surfaces and trajectories (no external renderer)."""

from __future__ import annotations

from xml.sax.saxutils import escape


def _ramp(level, lo, hi):
    """Blue (lowest sheet) to red (highest sheet)."""
    s = 0.5 if hi == lo else (level - lo) / (hi - lo)
    r = int(round(40 + 200 * s))
    b = int(round(240 - 200 * s))
    return f"#{r:02x}40{b:02x}"


def surface_svg(surface, trajectory=None, *, size=600, title=None):
    polys = [[v.to_float() for v in p.vertices] for p in surface.polygons]
    xs = [x for p in polys for x, _ in p]
    ys = [y for p in polys for _, y in p]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0) or 1.0
    pad = 0.05 * span
    scale = size / (span + 2 * pad)

    def pt(x, y):
        return f"{(x - x0 + pad) * scale:.3f},{(y1 - y + pad) * scale:.3f}"

    w = (x1 - x0 + 2 * pad) * scale
    h = (y1 - y0 + 2 * pad) * scale
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.3f} {h:.3f}">'
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    for i, p in enumerate(polys):
        out.append(
            f'<polygon points="{" ".join(pt(x, y) for x, y in p)}" fill="#f4f4f4" '
            f'stroke="#333" stroke-width="1"/>'
        )
        cx = sum(x for x, _ in p) / len(p)
        cy = sum(y for _, y in p) / len(p)
        out.append(f'<text x="{pt(cx, cy).split(",")[0]}" y="{pt(cx, cy).split(",")[1]}" '
                   f'font-size="12" fill="#999">{i}</text>')
    for r in surface.edge_classes:
        for ref in (r, surface.gluing[r]):
            p, e = ref
            a = polys[p][e]
            b = polys[p][(e + 1) % len(polys[p])]
            mx, my = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
            sx, sy = pt(mx, my).split(",")
            out.append(f'<text x="{sx}" y="{sy}" font-size="9" fill="#06c">{surface.class_of[r]}</text>')
    if trajectory is not None and trajectory.segments:
        levels = [trajectory.start_level] + list(trajectory.levels)
        lo, hi = min(levels), max(levels)
        lvl = trajectory.start_level
        crossed = iter(trajectory.levels)
        for seg in trajectory.segments:
            a = seg.entry.to_float() if hasattr(seg.entry, "to_float") else seg.entry
            b = seg.exit.to_float() if hasattr(seg.exit, "to_float") else seg.exit
            out.append(
                f'<polyline points="{pt(*a)} {pt(*b)}" stroke="{_ramp(lvl, lo, hi)}" '
                f'stroke-width="1.2" fill="none"/>'
            )
            if seg.edge_class is not None:
                lvl = next(crossed, lvl)
    out.append("</svg>")
    return "\n".join(out) + "\n"
