"""
Minimal SVG scatter plots of copula supports.

Output depends only on the points: fixed-precision coordinates, no
timestamps, no ids.
"""
from typing import Iterable, List, Tuple

PREAMBLE = """\
<?xml version="1.0" standalone="no"?>
<svg width="%(size)d" height="%(size)d" viewBox="0 0 %(size)d %(size)d" version="1.1" xmlns="http://www.w3.org/2000/svg">
<rect x="0" y="0" width="%(size)d" height="%(size)d" style="fill:#ffffff"/>
"""

POSTAMBLE = """\
</svg>
"""


class SVG:
    """Scatter plot on the unit square; y grows upwards."""

    def __init__(self, size: int = 400, margin: int = 40):
        self.size = size
        self.margin = margin
        self.commands: List[str] = []

    @property
    def span(self) -> float:
        return self.size - 2 * self.margin

    def to_canvas(self, x: float, y: float) -> Tuple[float, float]:
        return self.margin + x * self.span, self.size - self.margin - y * self.span

    def axes(self, ticks: Iterable[float] = (0.0, 0.5, 1.0)):
        x0, y0 = self.to_canvas(0.0, 0.0)
        x1, y1 = self.to_canvas(1.0, 1.0)
        self.commands.append(
            '<rect x="%.6f" y="%.6f" width="%.6f" height="%.6f" style="fill:none;stroke:#000000;stroke-width:1"/>'
            % (x0, y1, x1 - x0, y0 - y1)
        )
        for t in ticks:
            tx, _ = self.to_canvas(t, 0.0)
            _, ty = self.to_canvas(0.0, t)
            self.text(tx, y0 + 16, "%g" % t, anchor="middle")
            self.text(x0 - 6, ty + 4, "%g" % t, anchor="end")

    def circle(self, x: float, y: float, radius: float = 1.5, fill: str = "#1f4e79"):
        cx, cy = self.to_canvas(x, y)
        self.commands.append('<circle cx="%.6f" cy="%.6f" r="%.6f" style="fill:%s"/>' % (cx, cy, radius, fill))

    def text(self, x: float, y: float, text: str, anchor: str = "start", color: str = "#333333"):
        self.commands.append(
            '<text x="%.6f" y="%.6f" fill="%s" font-size="11" font-family="monospace" text-anchor="%s">%s</text>'
            % (x, y, color, anchor, text.replace("&", "&amp;").replace("<", "&lt;"))
        )

    def render(self) -> str:
        return PREAMBLE % {"size": self.size} + "".join(item + "\n" for item in self.commands) + POSTAMBLE


def support_plot(points, title: str = "", radius: float = 1.5) -> SVG:
    """Scatter of support points with unit-square axes."""
    svg = SVG()
    svg.axes()
    if title:
        svg.text(svg.margin, svg.margin / 2, title)
    for x, y in points:
        svg.circle(float(x), float(y), radius)
    return svg
