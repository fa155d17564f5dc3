"""Minimal SVG rendering of bifurcation diagrams (polyline + axes + fold marks)."""


def branch_svg(rows, folds, path, width=640, height=480,
               xlim=(0.0, 1.0), ylim=(0.0, 2.0)):
    """Write an SVG bifurcation diagram.

    rows: iterable of (lambda, norm2); folds: iterable of (lambda, norm2).
    Axes are lambda horizontal, ||u||_2^2 vertical.
    """
    ml, mr, mt, mb = 50, 15, 15, 40
    pw, ph = width - ml - mr, height - mt - mb

    def px(x):
        return ml + (x - xlim[0]) / (xlim[1] - xlim[0]) * pw

    def py(y):
        return mt + (ylim[1] - y) / (ylim[1] - ylim[0]) * ph

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in rows
                   if xlim[0] <= x <= xlim[1] and ylim[0] <= y <= ylim[1])
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" '
        'stroke="black" stroke-width="1"/>',
    ]
    nx, ny = 5, 4
    for i in range(nx + 1):
        xv = xlim[0] + i * (xlim[1] - xlim[0]) / nx
        parts.append(f'<line x1="{px(xv):.1f}" y1="{mt + ph}" x2="{px(xv):.1f}" '
                     f'y2="{mt + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{px(xv):.1f}" y="{mt + ph + 18}" font-size="11" '
                     f'text-anchor="middle">{xv:g}</text>')
    for i in range(ny + 1):
        yv = ylim[0] + i * (ylim[1] - ylim[0]) / ny
        parts.append(f'<line x1="{ml - 5}" y1="{py(yv):.1f}" x2="{ml}" '
                     f'y2="{py(yv):.1f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{py(yv) + 4:.1f}" font-size="11" '
                     f'text-anchor="end">{yv:g}</text>')
    parts.append(f'<text x="{ml + pw / 2:.0f}" y="{height - 8}" font-size="13" '
                 'text-anchor="middle">lambda</text>')
    parts.append(f'<text x="14" y="{mt + ph / 2:.0f}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 14 {mt + ph / 2:.0f})">'
                 '|u|^2</text>')
    if pts:
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f77b4" '
                     'stroke-width="1.5"/>')
    for x, y in folds:
        parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="4" '
                     'fill="none" stroke="red" stroke-width="1.5"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
