"""Hand-written SVG timeline: one row per window length plus the union."""
from __future__ import annotations

from xml.sax.saxutils import escape

CELL = 14
ROW = 22
LEFT = 70
TOP = 28


def timeline_svg(timeline, title: str = "Struggle detections") -> str:
    rows = [(f"{m} s", [timeline.at(t, m) for t in range(1, timeline.seconds + 1)])
            for m in timeline.lengths]
    rows.append(("union", timeline.union_row()))
    n = timeline.seconds
    width = LEFT + n * CELL + 20
    height = TOP + len(rows) * ROW + 34
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{LEFT}" y="18" font-family="sans-serif" font-size="13">{escape(title)}</text>',
    ]
    for r, (label, marks) in enumerate(rows):
        y = TOP + r * ROW
        out.append(f'<text x="{LEFT - 8}" y="{y + 15}" font-family="sans-serif" font-size="11" '
                   f'text-anchor="end">{escape(label)}</text>')
        out.append(f'<rect x="{LEFT}" y="{y + 2}" width="{n * CELL}" height="{ROW - 4}" '
                   f'fill="none" stroke="#999" stroke-width="0.5"/>')
        for t, hit in enumerate(marks, start=1):
            if hit:
                out.append(f'<rect x="{LEFT + (t - 1) * CELL + 1}" y="{y + 4}" width="{CELL - 2}" '
                           f'height="{ROW - 8}" fill="red"/>')
    axis_y = TOP + len(rows) * ROW + 14
    step = 5 if n > 20 else 1
    for t in range(step, n + 1, step):
        x = LEFT + (t - 1) * CELL + CELL // 2
        out.append(f'<text x="{x}" y="{axis_y}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="middle">{t}</text>')
    out.append(f'<text x="{LEFT + n * CELL // 2}" y="{axis_y + 16}" font-family="sans-serif" '
               f'font-size="11" text-anchor="middle">second</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
