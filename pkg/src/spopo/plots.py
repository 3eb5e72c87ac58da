"""Minimal deterministic SVG line/marker charts for run reports."""

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=40, bottom=55)
COLORS = ("#c0392b", "#2471a3", "#1e8449", "#7d3c98", "#b9770e", "#555555")


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / count
    return [lo + k * step for k in range(count + 1)]


def line_chart(series, title, xlabel, ylabel, hline=None, errors=None):
    """SVG text for one or more ``(label, xs, ys)`` series.

    ``errors`` maps a series label to per-point error bars; ``hline`` draws
    a dashed reference level (e.g. shot noise or the entanglement boundary).
    """
    errors = errors or {}
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    for label, _, sy in series:
        for y, e in zip(sy, errors.get(label, [])):
            ys += [y - e, y + e]
    if hline is not None:
        ys.append(hline)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{_fmt(py(t) + 4)}" text-anchor="end">{t:.3g}</text>')
    for t in _ticks(x0, x1):
        out.append(f'<text x="{_fmt(px(t))}" y="{HEIGHT - MARGIN["bottom"] + 18}" text-anchor="middle">{t:.3g}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 16 {HEIGHT / 2})">{escape(ylabel)}</text>'
    )
    if hline is not None:
        out.append(
            f'<line x1="{MARGIN["left"]}" x2="{MARGIN["left"] + pw}" y1="{_fmt(py(hline))}" y2="{_fmt(py(hline))}" '
            'stroke="gray" stroke-dasharray="5,4"/>'
        )
    for k, (label, sx, sy) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(sx, sy))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in zip(sx, sy):
            out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="{color}"/>')
        for x, y, e in zip(sx, sy, errors.get(label, [])):
            out.append(
                f'<line x1="{_fmt(px(x))}" x2="{_fmt(px(x))}" y1="{_fmt(py(y - e))}" y2="{_fmt(py(y + e))}" stroke="{color}"/>'
            )
        out.append(
            f'<text x="{MARGIN["left"] + 10}" y="{MARGIN["top"] + 16 + 15 * k}" fill="{color}">{escape(label)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
