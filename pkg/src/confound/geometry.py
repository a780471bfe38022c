"""Vector picture of a stratified comparison, and its SVG rendering.

Each group's strata become 2D vectors ``(total, positive)``. Laid tip to
tail they form a cumulative path whose chords have the stratum rates as
slopes; the path ends at the pooled counts, so the origin-to-terminal chord
has the pooled rate as its slope. A reversal is then visible geometry: one
group's stratum chords are all steeper, yet its origin-to-terminal chord is
shallower.

Rendering is deterministic — identical diagram and options give identical
bytes. Stratum chords are dashed; each one is a single path holding the
chord from the origin plus (by default) its translated copy anchored at the
terminal point, completing the vector parallelogram. Aggregate chords are
solid lines. Coordinates are mapped affinely from data space; slope labels
always come from data coordinates, never canvas ones.
"""

from __future__ import annotations

import html
from dataclasses import dataclass

from .errors import DegenerateRange, ValidationError, ZeroTotal
from .tables import Counts, Direction, Rate, StratifiedComparison, aggregate, compare, rate


@dataclass(frozen=True)
class GroupPath:
    """One group's cumulative vector path.

    ``points`` starts at the origin and accumulates stratum counts, with x
    strictly increasing; ``segment_slopes[i]`` is the (unreduced) rate of
    the i-th stratum and equals the slope of the i-th chord.
    """

    label: str
    points: tuple[tuple[int, int], ...]
    segment_slopes: tuple[Rate, ...]
    terminal_slope: Rate

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(tuple(p) for p in self.points))
        object.__setattr__(self, "segment_slopes", tuple(self.segment_slopes))
        if len(self.points) < 2 or self.points[0] != (0, 0):
            raise ValidationError("a path starts at (0, 0) and has >= 1 segment")
        if len(self.segment_slopes) != len(self.points) - 1:
            raise ValidationError("one slope per segment required")
        for (x0, y0), (x1, y1), slope in zip(
            self.points, self.points[1:], self.segment_slopes
        ):
            if x1 <= x0:
                raise ValidationError("x must increase strictly along the path")
            if y1 < y0:
                raise ValidationError("y must not decrease along the path")
            if (slope.numerator, slope.denominator) != (y1 - y0, x1 - x0):
                raise ValidationError(
                    f"segment slope {slope} does not match step "
                    f"({x1 - x0}, {y1 - y0})"
                )
        tx, ty = self.points[-1]
        if (self.terminal_slope.numerator, self.terminal_slope.denominator) != (ty, tx):
            raise ValidationError("terminal slope must match the terminal point")

    @property
    def terminal(self) -> tuple[int, int]:
        return self.points[-1]

    @property
    def vectors(self) -> tuple[tuple[int, int], ...]:
        """Per-stratum steps (the fan endpoints when drawn from the origin)."""
        return tuple(
            (x1 - x0, y1 - y0)
            for (x0, y0), (x1, y1) in zip(self.points, self.points[1:])
        )


@dataclass(frozen=True)
class VectorDiagram:
    stratum_labels: tuple[str, ...]
    groups: tuple[GroupPath, ...]

    def __post_init__(self):
        object.__setattr__(self, "stratum_labels", tuple(self.stratum_labels))
        object.__setattr__(self, "groups", tuple(self.groups))
        for g in self.groups:
            if len(g.segment_slopes) != len(self.stratum_labels):
                raise ValidationError(
                    f"group {g.label!r} has {len(g.segment_slopes)} segments "
                    f"for {len(self.stratum_labels)} strata"
                )


def to_vectors(sc: StratifiedComparison) -> VectorDiagram:
    """Cumulative vector paths for both groups, in stratum order."""
    groups = []
    for side in ("first", "second"):
        points = [(0, 0)]
        slopes = []
        for s, c in zip(sc.strata, sc.counts(side)):
            if c.total == 0:
                raise ZeroTotal(
                    f"stratum {s.label!r} has no subjects for group "
                    f"{sc.group_label(side)!r}"
                )
            x, y = points[-1]
            points.append((x + c.total, y + c.positive))
            slopes.append(rate(c))
        tx, ty = points[-1]
        groups.append(
            GroupPath(
                label=sc.group_label(side),
                points=tuple(points),
                segment_slopes=tuple(slopes),
                terminal_slope=Rate(ty, tx),
            )
        )
    return VectorDiagram(sc.stratum_labels(), tuple(groups))


def slope_bounds(cells: list[Counts]) -> tuple[Rate, Rate, Rate]:
    """(min, max, aggregate) slope over a list of cells, compared exactly.

    The aggregate slope is the mediant of the cell rates and always lies
    weakly between the extremes.
    """
    rates = [rate(c) for c in cells]
    lo = hi = rates[0]
    for r in rates[1:]:
        if compare(r, lo) is Direction.SECOND_HIGHER:  # r below current min
            lo = r
        if compare(r, hi) is Direction.FIRST_HIGHER:  # r above current max
            hi = r
    return lo, hi, rate(aggregate(cells))


# ---------------------------------------------------------------------------
# SVG rendering


@dataclass(frozen=True)
class RenderOptions:
    width: int = 640
    height: int = 480
    margin: int = 48
    colors: tuple[str, ...] = ("#b22222", "#27408b")
    dash: str = "6,4"
    parallelogram: bool = True
    font_size: int = 12


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(d: VectorDiagram, options: RenderOptions = RenderOptions()) -> str:
    """Render a diagram as a standalone SVG 1.1 document (deterministic)."""
    span_x = max((g.terminal[0] for g in d.groups), default=0)
    span_y = max((g.terminal[1] for g in d.groups), default=0)
    if span_x == 0 and span_y == 0:
        raise DegenerateRange("all points coincide at the origin")

    ox, oy = float(options.margin), float(options.height - options.margin)
    plot_w = options.width - 2 * options.margin
    plot_h = options.height - 2 * options.margin
    sx = plot_w / max(span_x, 1)
    sy = plot_h / max(span_y, 1)

    def px(p: tuple[int, int]) -> tuple[float, float]:
        return ox + p[0] * sx, oy - p[1] * sy

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{options.width}" height="{options.height}" '
        f'viewBox="0 0 {options.width} {options.height}" '
        f'font-family="sans-serif" font-size="{options.font_size}">',
        f'<path class="axes" d="M {_fmt(ox)} {_fmt(oy)} L {_fmt(ox + plot_w)} '
        f'{_fmt(oy)} M {_fmt(ox)} {_fmt(oy)} L {_fmt(ox)} {_fmt(oy - plot_h)}" '
        f'stroke="#444444" stroke-width="1" fill="none"/>',
        f'<text class="axis-label" x="{_fmt(ox + plot_w)}" y="{_fmt(oy + 18)}" '
        f'text-anchor="end" fill="#444444">total</text>',
        f'<text class="axis-label" x="{_fmt(ox - 6)}" y="{_fmt(oy - plot_h - 8)}" '
        f'text-anchor="start" fill="#444444">positive</text>',
    ]

    for gi, g in enumerate(d.groups):
        color = options.colors[gi % len(options.colors)]
        tx, ty = px(g.terminal)
        for v in g.vectors:
            if v == g.terminal:  # single stratum: chord and aggregate coincide
                continue
            vx, vy = px(v)
            seg = f"M {_fmt(ox)} {_fmt(oy)} L {_fmt(vx)} {_fmt(vy)}"
            if options.parallelogram:
                ax, ay = px((g.terminal[0] - v[0], g.terminal[1] - v[1]))
                seg += f" M {_fmt(ax)} {_fmt(ay)} L {_fmt(tx)} {_fmt(ty)}"
            parts.append(
                f'<path class="stratum-chord" d="{seg}" stroke="{color}" '
                f'stroke-width="1.5" stroke-dasharray="{options.dash}" fill="none"/>'
            )
        parts.append(
            f'<line class="aggregate-chord" x1="{_fmt(ox)}" y1="{_fmt(oy)}" '
            f'x2="{_fmt(tx)}" y2="{_fmt(ty)}" stroke="{color}" stroke-width="2"/>'
        )

        marked = [(g.terminal, f"{g.label} {g.terminal} {g.terminal_slope.percent()}")]
        for v, slope in zip(g.vectors, g.segment_slopes):
            if all(v != p for p, _ in marked):
                marked.append((v, f"{v} {slope.percent()}"))
        for p, label in marked:
            cx, cy = px(p)
            parts.append(
                f'<circle class="marker" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3" '
                f'fill="{color}"/>'
            )
            parts.append(
                f'<text class="marker-label" x="{_fmt(cx + 6)}" y="{_fmt(cy - 6)}" '
                f'fill="{color}">{html.escape(label, quote=False)}</text>'
            )

    parts.append(
        f'<circle class="marker" cx="{_fmt(ox)}" cy="{_fmt(oy)}" r="3" fill="#000000"/>'
    )
    parts.append(
        f'<text class="marker-label" x="{_fmt(ox + 6)}" y="{_fmt(oy - 6)}" '
        f'fill="#000000">(0, 0)</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
