"""Bar charts from quantitative frames.

A frame's VALUE mentions become bar heights, one compared role supplies the
x categories and the shared content becomes the title.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .errors import NoComparedRole, NoNumberFound, UnitMismatchWithinSeries

AUTO = "AUTO"
TITLE_SEP = " \u2014 "
CURRENCY = "$€£¥"

_NUMBER = re.compile(r"(?P<sign>[-+−]?)(?P<num>\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?|\.\d+)")
_PREFIX = re.compile(rf"(?P<sym>[{re.escape(CURRENCY)}])\s*$")
_SUFFIX = re.compile(r"\s*(?P<pct>%)|\s*(?P<word>[^\W\d_]+)")


@dataclass(frozen=True)
class QuantityValue:
    magnitude: float
    unit: str
    raw: str

    def __post_init__(self):
        if not math.isfinite(self.magnitude):
            raise ValueError("magnitude must be finite")


def parse_value(text):
    """First numeric literal in ``text`` with its unit.

    The unit is a currency symbol right before the number if present, else a
    ``%`` right after it, else the alphabetic word that follows.
    """
    m = _NUMBER.search(text)
    if m is None:
        raise NoNumberFound(text)
    magnitude = float(m.group("num").replace(",", ""))
    if m.group("sign") in ("-", "−"):
        magnitude = -magnitude
    unit = ""
    before = _PREFIX.search(text[: m.start()])
    after = _SUFFIX.match(text, m.end())
    if before:
        unit = before.group("sym")
    elif after and after.group("pct"):
        unit = "%"
    elif after and after.group("word"):
        unit = after.group("word")
    return QuantityValue(magnitude, unit, text)


@dataclass(frozen=True)
class ChartSpec:
    title: str
    x_role: str
    categories: tuple
    series: tuple  # ((unit, (magnitude or None, ...)), ...)

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        object.__setattr__(self, "series", tuple((u, tuple(vals)) for u, vals in self.series))
        if not self.series:
            raise ValueError("a chart needs at least one series")
        if len(self.categories) < 2:
            raise ValueError("a chart needs at least two categories")
        for unit, vals in self.series:
            if len(vals) != len(self.categories):
                raise ValueError(f"series {unit!r} has {len(vals)} values for {len(self.categories)} categories")

    def to_dict(self):
        return {
            "title": self.title,
            "x_role": self.x_role,
            "categories": list(self.categories),
            "series": [{"unit": u, "values": list(v)} for u, v in self.series],
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(
            obj["title"],
            obj["x_role"],
            obj["categories"],
            [(s["unit"], s["values"]) for s in obj["series"]],
        )


def _role_slots(frame, role):
    """Per fact, the vertices of every compared entry with this role."""
    slots = [set() for _ in frame.facts]
    for r, entry in frame.compared:
        if r == role:
            for k, slot in enumerate(entry):
                slots[k].update(slot)
    return slots


def _pick_x_role(frame):
    value_role = frame.inventory.value_role
    best, best_count = None, 0
    for role in frame.inventory.roles:
        if role == value_role:
            continue
        slots = _role_slots(frame, role)
        count = len({frozenset(s) for s in slots if s})
        if count > best_count:
            best, best_count = role, count
    if best is None:
        raise NoComparedRole("frame has no compared content besides VALUE")
    return best


def frame_to_chart(frame, x_role=AUTO):
    if x_role == AUTO:
        x_role = _pick_x_role(frame)
    elif not any(r == x_role for r, _ in frame.compared):
        raise NoComparedRole(f"{x_role} is not compared content of this frame")
    categories = [frame.cluster_text(slot) for slot in _role_slots(frame, x_role)]
    values = [parse_value(frame.text(v)) for v in frame.values]
    units = sorted({q.unit for q in values if q.unit})
    if len(units) > 1:
        raise UnitMismatchWithinSeries(units)
    unit = units[0] if units else ""
    title = TITLE_SEP.join(frame.cluster_text(vs) for _, vs in frame.shared)
    return ChartSpec(title, x_role, categories, [(unit, [q.magnitude for q in values])])


def frames_to_charts(frames, x_role=AUTO):
    """Charts for frames of one sentence, ``[(frame index, ChartSpec), ...]``.

    Frames whose x role and categories coincide are drawn as series of one
    chart, named after the lowest frame index among them.
    """
    out = []
    for index, frame in enumerate(frames):
        spec = frame_to_chart(frame, x_role)
        for k, (first, other) in enumerate(out):
            if (other.x_role, other.categories) == (spec.x_role, spec.categories):
                out[k] = (first, ChartSpec(other.title, other.x_role, other.categories, other.series + spec.series))
                break
        else:
            out.append((index, spec))
    return out


def emit_chart_json(c):
    return json.dumps(c.to_dict(), sort_keys=True, ensure_ascii=False).encode("utf-8")


# -- SVG ---------------------------------------------------------------------------

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 50, 70
PALETTE = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948")


def _fmt(x):
    return f"{x:.2f}".rstrip("0").rstrip(".") if x != int(x) else str(int(x))


def _num(x):
    return f"{x:.3f}"


def y_range(c):
    vals = [v for _, vs in c.series for v in vs if v is not None]
    lo = min([0.0] + vals)
    hi = max([0.0] + vals)
    if hi > 0:
        hi *= 1.1
    if hi == lo:
        hi = lo + 1.0
    return lo, hi


def emit_svg(c):
    """Grouped bar chart over a shared linear y axis; deterministic bytes."""
    plot_w = WIDTH - LEFT - RIGHT
    plot_h = HEIGHT - TOP - BOTTOM
    lo, hi = y_range(c)
    scale = plot_h / (hi - lo)

    def y(v):
        return TOP + (hi - v) * scale

    n_cat, n_ser = len(c.categories), len(c.series)
    group_w = plot_w / n_cat
    bar_w = group_w * 0.8 / n_ser
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if c.title:
        parts.append(
            f'<text class="title" x="{WIDTH / 2:g}" y="24" text-anchor="middle" font-size="16">{escape(c.title)}</text>'
        )
    base = y(0.0)
    parts.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + plot_h}" stroke="black"/>')
    parts.append(f'<line x1="{LEFT}" y1="{_num(base)}" x2="{WIDTH - RIGHT}" y2="{_num(base)}" stroke="black"/>')
    for t in range(6):
        v = lo + (hi - lo) * t / 5
        parts.append(
            f'<text class="tick" x="{LEFT - 6}" y="{_num(y(v) + 4)}" text-anchor="end">{_fmt(round(v, 2))}</text>'
        )
    for s, (unit, vals) in enumerate(c.series):
        color = PALETTE[s % len(PALETTE)]
        for k, v in enumerate(vals):
            if v is None:
                continue
            x = LEFT + k * group_w + group_w * 0.1 + s * bar_w
            top = min(y(v), base)
            height = abs(v) * scale
            parts.append(
                f'<rect class="bar" data-series="{s}" data-category="{k}" x="{_num(x)}" y="{_num(top)}" '
                f'width="{_num(bar_w)}" height="{_num(height)}" fill="{color}"/>'
            )
            label_y = top - 4 if v >= 0 else top + height + 14
            parts.append(
                f'<text class="value" x="{_num(x + bar_w / 2)}" y="{_num(label_y)}" text-anchor="middle">'
                f"{escape(_fmt(v) + unit if unit == '%' else _fmt(v))}</text>"
            )
    for k, cat in enumerate(c.categories):
        cx = LEFT + (k + 0.5) * group_w
        parts.append(
            f'<text class="category" x="{_num(cx)}" y="{TOP + plot_h + 20}" text-anchor="middle">{escape(cat)}</text>'
        )
    for s, (unit, _) in enumerate(c.series):
        lx = LEFT + s * 110
        ly = HEIGHT - 22
        parts.append(f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" fill="{PALETTE[s % len(PALETTE)]}"/>')
        parts.append(f'<text class="legend" x="{lx + 16}" y="{ly}">{escape(unit or "value")}</text>')
    parts.append(f'<text class="axis" x="{WIDTH / 2:g}" y="{HEIGHT - 4}" text-anchor="middle">{escape(c.x_role)}</text>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")
