"""Render resonance-trajectory panels from CSV/JSON files on disk.

This package deliberately knows nothing about how the data was produced;
its whole interface to the solver is the trajectory CSV (columns t,
re_lambda, im_lambda, re_model, im_model, residual) and the decay-rate
report JSON (keys lambda_dot, im_lambda_ddot at minimum). One panel spec
lists several such file pairs; every panel is drawn with a single shared
color scale over t so the images can sit side by side.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

TRAJECTORY_COLUMNS = ("t", "re_lambda", "im_lambda", "re_model", "im_model",
                      "residual")


class PanelError(Exception):
    """Bad panel spec or unreadable data file."""


@dataclass(frozen=True)
class Panel:
    trajectory: str
    report: str | None = None
    title: str | None = None
    name: str | None = None


@dataclass(frozen=True)
class PanelSpec:
    panels: tuple[Panel, ...]
    base_dir: str = "."

    def resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


def load_spec(path: str) -> PanelSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise PanelError(f"cannot read panel spec {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PanelError(f"panel spec {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("panels"), list):
        raise PanelError("panel spec must be an object with a 'panels' list")
    if not raw["panels"]:
        raise PanelError("panel spec lists no panels")
    panels = []
    for i, entry in enumerate(raw["panels"]):
        if not isinstance(entry, dict) or "trajectory" not in entry:
            raise PanelError(f"panel {i} must be an object with a 'trajectory' path")
        unknown = set(entry) - {"trajectory", "report", "title", "name"}
        if unknown:
            raise PanelError(f"panel {i} has unknown keys {sorted(unknown)}")
        panels.append(Panel(
            trajectory=str(entry["trajectory"]),
            report=str(entry["report"]) if "report" in entry else None,
            title=str(entry["title"]) if "title" in entry else None,
            name=str(entry["name"]) if "name" in entry else None,
        ))
    return PanelSpec(tuple(panels), base_dir=os.path.dirname(os.path.abspath(path)))


def read_trajectory(path: str) -> dict[str, np.ndarray]:
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            rest = fh.read()
    except OSError as exc:
        raise PanelError(f"cannot read trajectory {path!r}: {exc}") from exc
    if tuple(header) != TRAJECTORY_COLUMNS:
        raise PanelError(
            f"trajectory {path!r} has columns {header}, expected "
            f"{list(TRAJECTORY_COLUMNS)}")
    if not rest.strip():
        raise PanelError(f"trajectory {path!r} has no rows")
    try:
        body = np.loadtxt(rest.splitlines(), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise PanelError(f"trajectory {path!r} is not numeric CSV: {exc}") from exc
    return {name: body[:, i] for i, name in enumerate(TRAJECTORY_COLUMNS)}


def read_report(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise PanelError(f"cannot read report {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PanelError(f"report {path!r} is not valid JSON: {exc}") from exc
    missing = {"lambda_dot", "im_lambda_ddot"} - set(raw)
    if missing:
        raise PanelError(f"report {path!r} lacks keys {sorted(missing)}")
    return raw


def _colored_path(ax, x, y, t, norm, cmap, linestyle):
    # one segment per consecutive pair, colored by the midpoint parameter
    from matplotlib.collections import LineCollection

    pts = np.column_stack([x, y]).reshape(-1, 1, 2)
    segs = np.concatenate([pts[:-1], pts[1:]], axis=1)
    lc = LineCollection(segs, cmap=cmap, norm=norm, linestyle=linestyle,
                        linewidth=1.6)
    lc.set_array(0.5 * (t[:-1] + t[1:]))
    ax.add_collection(lc)
    return lc


def render_panels(spec: PanelSpec, out_dir: str, dpi: int = 150):
    """Draw one image per panel; returns (paths, (t_min, t_max)).

    Solid curve: tracked resonance. Dashed: the quadratic model from the
    report columns. Both are colored by t against one normalization
    computed over every panel in the spec, and each image carries the
    same colorbar.
    """

    import matplotlib
    from matplotlib import colors as mcolors
    from matplotlib import pyplot as plt

    data = [read_trajectory(spec.resolve(p.trajectory)) for p in spec.panels]
    reports = [read_report(spec.resolve(p.report)) if p.report else None
               for p in spec.panels]
    t_min = min(float(d["t"].min()) for d in data)
    t_max = max(float(d["t"].max()) for d in data)
    if not t_min < t_max:
        raise PanelError("panels span no parameter range to color by")
    norm = mcolors.Normalize(t_min, t_max)
    cmap = matplotlib.colormaps["viridis"]

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i, (panel, d, rep) in enumerate(zip(spec.panels, data, reports)):
        fig, ax = plt.subplots(figsize=(5.0, 4.0), constrained_layout=True)
        lc = _colored_path(ax, d["re_lambda"], d["im_lambda"], d["t"], norm,
                           cmap, "solid")
        _colored_path(ax, d["re_model"], d["im_model"], d["t"], norm, cmap,
                      "dashed")
        ax.scatter(d["re_lambda"], d["im_lambda"], c=d["t"], cmap=cmap,
                   norm=norm, s=12, zorder=3)
        ax.update_datalim(np.column_stack(
            [np.r_[d["re_lambda"], d["re_model"]],
             np.r_[d["im_lambda"], d["im_model"]]]))
        ax.autoscale_view()
        ax.set_xlabel("Re lambda")
        ax.set_ylabel("Im lambda")
        title = panel.title or f"panel {i + 1}"
        if rep is not None:
            title += (f"\ndrift {rep['lambda_dot']:.4g}, "
                      f"decay curvature {rep['im_lambda_ddot']:.4g}")
        ax.set_title(title)
        fig.colorbar(lc, ax=ax, label="t")
        name = panel.name or f"panel_{i + 1}"
        path = os.path.join(out_dir, f"{name}.png")
        fig.savefig(path, dpi=dpi)
        plt.close(fig)
        paths.append(path)
    return paths, (t_min, t_max)
