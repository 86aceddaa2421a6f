"""Render sweep results to PNG files.

The delimited output remains the data contract; these plots are a quick
visual companion. Closed-form methods draw as lines, Monte Carlo methods
as error-bar markers, and axes switch to log scale when the data spans
many decades (always for error probabilities).
"""

import math
from collections import OrderedDict

_LINE_METHODS = {"integral_exact": "-", "integral_approx": "--", "simplified": ":"}
_MARKER_METHODS = {"mc_large_scale": "o", "mc_full": "s"}


def _grouped(rows):
    groups = OrderedDict()
    for r in rows:
        if not math.isfinite(r.value):
            continue
        groups.setdefault((r.quantity, r.method), []).append(r)
    return groups


def render_figure(result, path: str, title: str = None) -> str:
    """Draw one SweepResult to an image file; returns the path."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups = _grouped(result.rows)
    fig, ax = plt.subplots(figsize=(7.0, 4.6), dpi=130)
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    color_of = {}
    finite_vals = []
    bases = set()
    for (quantity, method), rows in groups.items():
        bases.add(quantity.split("@")[0])
        rows = sorted(rows, key=lambda r: r.axis_value)
        xs = [r.axis_value for r in rows]
        ys = [r.value for r in rows]
        errs = [r.uncertainty if math.isfinite(r.uncertainty) else 0.0
                for r in rows]
        finite_vals.extend(ys)
        if quantity not in color_of:
            color_of[quantity] = colors[len(color_of) % len(colors)]
        color = color_of[quantity]
        if method in _LINE_METHODS:
            ax.plot(xs, ys, _LINE_METHODS[method], color=color,
                    label=f"{quantity} [{method}]")
        else:
            ax.errorbar(xs, ys, yerr=errs, fmt=_MARKER_METHODS.get(method, "x"),
                        color=color, markersize=4, capsize=2.5, linestyle="none",
                        label=f"{quantity} [{method}]")

    positive = [v for v in finite_vals if v > 0.0]
    wide = (len(positive) == len(finite_vals) and positive
            and max(positive) / min(positive) > 1e3)
    if bases == {"bep"} or wide:
        ax.set_yscale("log")
    ax.set_xlabel(result.spec.axis)
    ax.set_ylabel(" / ".join(sorted(bases)))
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    if groups:
        ax.legend(fontsize=7, ncol=2 if len(groups) > 8 else 1)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
