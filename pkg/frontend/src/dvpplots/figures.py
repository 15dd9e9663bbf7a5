"""Figure construction from result CSVs.

Three figure kinds are supported:

* ``basis``       -- curve file with columns angle, j0, ..., j2n
* ``targets``     -- curve file with columns angle plus one column per curve
* ``loss-curves`` -- summary file from the harness's summarize stage, drawn
                     as mean-loss lines over alpha with vertical confidence
                     bars, one panel per sample size

Rendering is deterministic (fixed hash salt, no timestamps) and never
writes to its inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "dvpplots"

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("basis", "targets", "loss-curves")

SUMMARY_COLUMNS = (
    "family",
    "alpha",
    "sample_size",
    "method",
    "loss",
    "mean",
    "ci_lo",
    "ci_hi",
    "n_finite",
    "n_infinite",
)


class SchemaError(ValueError):
    """The input CSV does not match the expected column contract."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input path, figure kind, output path, options."""

    input_path: str
    kind: str
    output_path: str
    loss: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if self.kind == "loss-curves" and not self.loss:
            raise SchemaError("loss-curves figures need a loss name")


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path} is empty")
    return rows[0], rows[1:]


def _read_curves(path) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    header, body = _read_csv(path)
    if not header or header[0] != "angle":
        raise SchemaError(f"{path} must start with an 'angle' column")
    if len(header) < 2:
        raise SchemaError(f"{path} has no curve columns")
    try:
        data = np.array([[float(x) for x in row] for row in body])
    except ValueError as exc:
        raise SchemaError(f"{path} holds non-numeric values: {exc}") from exc
    return data[:, 0], {name: data[:, i + 1] for i, name in enumerate(header[1:])}


def _read_summary(path) -> list[dict]:
    header, body = _read_csv(path)
    missing = [c for c in SUMMARY_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path} is missing required column '{missing[0]}'")
    idx = {c: header.index(c) for c in SUMMARY_COLUMNS}
    out = []
    for row in body:
        try:
            out.append(
                {
                    "family": row[idx["family"]],
                    "alpha": float(row[idx["alpha"]]),
                    "sample_size": int(row[idx["sample_size"]]),
                    "method": row[idx["method"]],
                    "loss": row[idx["loss"]],
                    "mean": float(row[idx["mean"]]),
                    "ci_lo": float(row[idx["ci_lo"]]),
                    "ci_hi": float(row[idx["ci_hi"]]),
                }
            )
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"{path} holds a malformed row: {exc}") from exc
    return out


def _curve_figure(spec: FigureSpec):
    angles, curves = _read_curves(spec.input_path)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for name, values in curves.items():
        ax.plot(angles, values, label=name, linewidth=1.4)
    ax.set_xlabel("angle")
    ax.set_ylabel("density")
    ax.set_xlim(0.0, 2.0 * np.pi)
    title = "basis densities" if spec.kind == "basis" else "target densities"
    ax.set_title(title)
    if len(curves) <= 12:
        ax.legend(loc="upper right", fontsize=8)
    return fig


def _loss_figure(spec: FigureSpec):
    rows = [r for r in _read_summary(spec.input_path) if r["loss"] == spec.loss]
    if not rows:
        raise SchemaError(f"no rows with loss {spec.loss!r} in {spec.input_path}")
    sizes = sorted({r["sample_size"] for r in rows})
    methods = sorted({r["method"] for r in rows})
    fig, axes = plt.subplots(
        1, len(sizes), figsize=(5.5 * len(sizes), 4.2), squeeze=False, sharey=True
    )
    for ax, size in zip(axes[0], sizes):
        for method in methods:
            pts = sorted(
                (r for r in rows if r["sample_size"] == size and r["method"] == method),
                key=lambda r: r["alpha"],
            )
            if not pts:
                continue
            alphas = [r["alpha"] for r in pts]
            means = [r["mean"] for r in pts]
            lo = [r["mean"] - r["ci_lo"] for r in pts]
            hi = [r["ci_hi"] - r["mean"] for r in pts]
            ax.errorbar(
                alphas, means, yerr=[lo, hi], label=method,
                marker="o", markersize=3.5, capsize=2.5, linewidth=1.3,
            )
        ax.set_xlabel("alpha")
        ax.set_title(f"sample size {size}")
    axes[0][0].set_ylabel(f"mean {spec.loss} loss")
    axes[0][-1].legend(loc="best", fontsize=9)
    return fig


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure for a spec without writing it."""
    if spec.kind in ("basis", "targets"):
        return _curve_figure(spec)
    return _loss_figure(spec)


def render(spec: FigureSpec) -> str:
    """Render the figure to spec.output_path (SVG); returns the path."""
    if not str(spec.output_path).endswith(".svg"):
        raise SchemaError("output must be an .svg path")
    fig = build_figure(spec)
    try:
        fig.savefig(spec.output_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return str(spec.output_path)
