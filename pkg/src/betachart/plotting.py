"""SVG rendering of control charts.

One figure: observations as a connected series, step-wise LCL/UCL lines per
chart kind, signalled points circled. SVG keeps the output self-contained
and diffable; the CSV tables carry the same numbers for replotting.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import DataError

_STYLE = {
    "BCC": {"color": "tab:red", "linestyle": "--"},
    "RCC": {"color": "tab:blue", "linestyle": ":"},
    "BRCC": {"color": "black", "linestyle": "-"},
    "BRCC_C": {"color": "tab:green", "linestyle": "-."},
}


def render_chart_svg(charts, path, title="Control chart"):
    """Write an SVG with the observations and every chart's limits."""
    if not charts:
        raise DataError("nothing to plot")
    fig, ax = plt.subplots(figsize=(9, 5))
    t = charts[0].t
    ax.plot(t, charts[0].y, marker="o", markersize=3.5, color="dimgray",
            linewidth=0.8, label="observations")
    any_signal = False
    for res in charts:
        style = _STYLE.get(res.kind, {})
        ax.step(res.t, res.lcl, where="mid", linewidth=1.2,
                label=f"{res.kind} limits", **style)
        ax.step(res.t, res.ucl, where="mid", linewidth=1.2, **style)
        if res.signal.any():
            any_signal = True
            ax.plot(res.t[res.signal], res.y[res.signal], "o", markersize=9,
                    markerfacecolor="none", markeredgecolor=style.get(
                        "color", "red"),
                    markeredgewidth=1.6, label=f"{res.kind} signals")
    if not any_signal:
        ax.plot([], [], " ", label="no signals")
    ax.set_xlabel("observation")
    ax.set_ylabel("fraction")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from None
    finally:
        plt.close(fig)
