"""
Rendering experiment results as CSV, JSON and SVG.

CSV and JSON are lossless: parsing them gives back the result rows.
Floats are written with repr (shortest round-trip form), booleans as
true/false.
"""

import csv
import io
import json
import math
import os

import numpy as np
from jinja2 import Environment, FileSystemLoader

HERE = os.path.dirname(os.path.abspath(__file__))
TEMPLATE_PATH = os.path.join(HERE, "templates")

FORMATS = ("csv", "json", "svg")

# plot geometry, in svg user units
WIDTH = 640
HEIGHT = 400
MARGIN = 60
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]


class ReportError(ValueError):
    """Raised when a result cannot be rendered in the requested format"""

    def __init__(self, message, *, fmt):
        super().__init__(message)
        self.fmt = fmt


def plain(value):
    """numpy scalars to their Python counterparts"""
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def format_value(value):
    value = plain(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_value(text):
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def render_csv(result):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([format_value(v) for v in row])
    return out.getvalue()


def parse_csv(text):
    """Columns and typed rows of a CSV rendering"""
    reader = csv.reader(io.StringIO(text))
    try:
        columns = next(reader)
    except StopIteration:
        raise ReportError("empty csv document", fmt="csv")
    rows = [tuple(parse_value(cell) for cell in line) for line in reader]
    return columns, rows


def render_json(result):
    doc = {
        "name": result.name,
        "version": result.version,
        "config": result.config.to_dict(),
        "columns": list(result.columns),
        "rows": [[plain(v) for v in row] for row in result.rows],
        "notes": list(result.notes),
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_json(text):
    doc = json.loads(text)
    return doc["columns"], [tuple(row) for row in doc["rows"]]


def _is_number(value):
    value = plain(value)
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
    )


def _scale(values, lo, hi, size, flip=False):
    span = (hi - lo) or 1.0
    scaled = [(v - lo) / span * size for v in values]
    if flip:
        return [size - s for s in scaled]
    return scaled


# kinds whose rows stack one curve per value of a column
PLOT_GROUPS = {
    "motor-bench": "ry",
    "fitts": "ry",
    "adapt": "ry",
    "erasure": "code",
}


def _group_column(result):
    kind = getattr(result.config, "kind", None)
    group = PLOT_GROUPS.get(kind)
    if group in result.columns:
        return result.columns.index(group)
    return None


def plot_series(result):
    """x axis label and the numeric series plotted against it

    The first column is the x axis when it is numeric, the row index
    otherwise. Every other all-numeric column is one series, mapped to
    its (xs, ys). Kinds listed in PLOT_GROUPS get one series per value of
    their group column, named like ``max_error ry=2``.
    """
    columns = list(result.columns)
    rows = list(result.rows)
    group = _group_column(result)
    skip = {group}
    x_first = group != 0 and rows and all(_is_number(row[0]) for row in rows)
    if x_first:
        xlabel = columns[0]
        skip.add(0)
    else:
        xlabel = "row"
    numeric = [
        j
        for j in range(len(columns))
        if j not in skip and all(_is_number(row[j]) for row in rows)
    ]

    if group is None:
        groups = {None: list(enumerate(rows))}
    else:
        groups = {}
        for i, row in enumerate(rows):
            groups.setdefault(row[group], []).append((i, row))

    series = {}
    for value, members in groups.items():
        for j in numeric:
            name = columns[j] if value is None else f"{columns[j]} {columns[group]}={value}"
            series[name] = (
                [float(row[0]) if x_first else float(i) for i, row in members],
                [float(row[j]) for _, row in members],
            )
    return xlabel, series


def render_svg(result, template_path=TEMPLATE_PATH):
    """One polyline per numeric series against the first column"""
    if not result.rows:
        raise ReportError("cannot plot an empty result", fmt="svg")
    xlabel, series = plot_series(result)
    if not series:
        raise ReportError(
            f"result {result.name} has no numeric series to plot", fmt="svg"
        )

    inner_w = WIDTH - 2 * MARGIN
    inner_h = HEIGHT - 2 * MARGIN
    xs = [x for values, _ in series.values() for x in values]
    ys = [y for _, values in series.values() for y in values]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)

    lines = []
    for i, (name, (x_values, y_values)) in enumerate(series.items()):
        px = [MARGIN + x for x in _scale(x_values, x_lo, x_hi, inner_w)]
        py = [MARGIN + y for y in _scale(y_values, y_lo, y_hi, inner_h, flip=True)]
        lines.append(
            dict(
                name=name,
                color=PALETTE[i % len(PALETTE)],
                points=" ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py)),
                markers=list(zip(px, py)),
            )
        )

    env = Environment(loader=FileSystemLoader([template_path]), autoescape=True)
    template = env.get_template("plot.svg")
    return template.render(
        title=result.name,
        width=WIDTH,
        height=HEIGHT,
        margin=MARGIN,
        xlabel=xlabel,
        x_range=(f"{x_lo:g}", f"{x_hi:g}"),
        y_range=(f"{y_lo:.3g}", f"{y_hi:.3g}"),
        series=lines,
    )


RENDERERS = {
    "csv": render_csv,
    "json": render_json,
    "svg": render_svg,
}


def render(result, fmt):
    try:
        renderer = RENDERERS[fmt]
    except KeyError:
        raise ReportError(
            f"unsupported format {fmt!r}, expected one of {', '.join(FORMATS)}",
            fmt=fmt,
        )
    return renderer(result)
