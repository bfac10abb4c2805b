"""Planar embedding of three reconstructions and an SVG of their error disks."""

from __future__ import annotations

import math
from dataclasses import dataclass


class TriangleInequalityError(ValueError):
    pass


@dataclass(frozen=True)
class TriangleEmbedding:
    O: tuple[float, float]
    S: tuple[float, float]
    M: tuple[float, float]

    def points(self) -> dict[str, tuple[float, float]]:
        return {"O": self.O, "S": self.S, "M": self.M}

    def pairwise(self) -> dict[str, float]:
        return {
            "OS": math.dist(self.O, self.S),
            "OM": math.dist(self.O, self.M),
            "SM": math.dist(self.S, self.M),
        }


def embed_triangle(d_os: float, d_om: float, d_sm: float, tol: float = 1e-9) -> TriangleEmbedding:
    """O at the origin, S on the positive x axis, M in the upper half plane."""
    d = (d_os, d_om, d_sm)
    if min(d) < 0:
        raise ValueError(f"distances must be nonnegative, got {d}")
    for i in range(3):
        if d[i] > d[(i + 1) % 3] + d[(i + 2) % 3] + tol:
            raise TriangleInequalityError(f"distances {d} violate the triangle inequality")
    if d_os == 0.0:
        if abs(d_om - d_sm) > tol:
            raise TriangleInequalityError(f"O and S coincide but d_OM != d_SM: {d}")
        return TriangleEmbedding((0.0, 0.0), (0.0, 0.0), (0.0, d_om))
    mx = (d_os**2 + d_om**2 - d_sm**2) / (2 * d_os)
    my = math.sqrt(max(d_om**2 - mx**2, 0.0))
    return TriangleEmbedding((0.0, 0.0), (d_os, 0.0), (mx, my))


PX_PER_UNIT = 1000.0  # 0.1 trace-distance units = 100 px
_COLORS = {"O": "#1f77b4", "S": "#d62728", "M": "#2ca02c"}


def _f(v: float) -> str:
    return f"{v:.2f}"


def error_disks_svg(
    emb: TriangleEmbedding,
    radii: dict[str, float],
    half_radius: bool = True,
    title: str = "",
) -> str:
    """SVG string with a disk of radius R (solid) and R/2 (dashed) around each point.

    Output depends only on the arguments, so identical inputs give identical bytes.
    """
    pts = emb.points()
    reach = max(radii.get(k, 0.0) for k in pts)
    xs = [p[0] for p in pts.values()]
    ys = [p[1] for p in pts.values()]
    x0, x1 = min(xs) - reach, max(xs) + reach
    y0, y1 = min(ys) - reach, max(ys) + reach
    margin = 60.0
    w = (x1 - x0) * PX_PER_UNIT + 2 * margin
    h = (y1 - y0) * PX_PER_UNIT + 2 * margin

    def px(x, y):
        # flip y so that the upper half plane is drawn upward
        return margin + (x - x0) * PX_PER_UNIT, margin + (y1 - y) * PX_PER_UNIT

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(w)}" height="{_f(h)}" '
        f'viewBox="0 0 {_f(w)} {_f(h)}" font-family="sans-serif" font-size="12">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{_f(w / 2)}" y="18" text-anchor="middle">{title}</text>')
    # axes with ticks every 0.1
    ax_y = h - margin / 2
    ax_x = margin / 2
    out.append(f'<line x1="{_f(margin)}" y1="{_f(ax_y)}" x2="{_f(w - margin)}" y2="{_f(ax_y)}" stroke="black"/>')
    out.append(f'<line x1="{_f(ax_x)}" y1="{_f(margin)}" x2="{_f(ax_x)}" y2="{_f(h - margin)}" stroke="black"/>')
    t = math.ceil(x0 * 10 - 1e-9) / 10
    while t <= x1 + 1e-9:
        X, _ = px(t, 0.0)
        out.append(f'<line x1="{_f(X)}" y1="{_f(ax_y - 4)}" x2="{_f(X)}" y2="{_f(ax_y + 4)}" stroke="black"/>')
        out.append(f'<text x="{_f(X)}" y="{_f(ax_y + 16)}" text-anchor="middle">{t:.1f}</text>')
        t = round(t + 0.1, 10)
    t = math.ceil(y0 * 10 - 1e-9) / 10
    while t <= y1 + 1e-9:
        _, Y = px(0.0, t)
        out.append(f'<line x1="{_f(ax_x - 4)}" y1="{_f(Y)}" x2="{_f(ax_x + 4)}" y2="{_f(Y)}" stroke="black"/>')
        out.append(f'<text x="{_f(ax_x - 6)}" y="{_f(Y + 4)}" text-anchor="end">{t:.1f}</text>')
        t = round(t + 0.1, 10)
    out.append(f'<text x="{_f(w / 2)}" y="{_f(h - 2)}" text-anchor="middle">trace distance</text>')
    for name, (x, y) in pts.items():
        X, Y = px(x, y)
        c = _COLORS[name]
        r = radii.get(name)
        if r is not None:
            out.append(f'<circle cx="{_f(X)}" cy="{_f(Y)}" r="{_f(r * PX_PER_UNIT)}" '
                       f'fill="{c}" fill-opacity="0.08" stroke="{c}"/>')
            if half_radius:
                out.append(f'<circle cx="{_f(X)}" cy="{_f(Y)}" r="{_f(r * PX_PER_UNIT / 2)}" '
                           f'fill="none" stroke="{c}" stroke-dasharray="6 4"/>')
        out.append(f'<circle cx="{_f(X)}" cy="{_f(Y)}" r="3" fill="{c}"/>')
        out.append(f'<text x="{_f(X + 6)}" y="{_f(Y - 6)}" fill="{c}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
