"""Plot and CSV emission.

Renders the standard figures as static SVG files. Every plot writes its
backing data as a CSV twin next to it, so the numbers are always available
without parsing images. SVG output is deterministic for a fixed input:
the hash salt is pinned and the date metadata is stripped.
"""

from __future__ import annotations

import csv
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle

from armpa.env.currents import current_at_batch
from armpa.env.obstacles import collision_boundary

_HASH_SALT = "armpa"


def _save_fig(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _new_fig(width=7.0, height=5.0, n_axes=1):
    plt.rcParams["svg.hashsalt"] = _HASH_SALT
    fig, axes = plt.subplots(1, n_axes, figsize=(width, height))
    return fig, axes


def _write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else str(v)
                             for v in row])


# -- individual renderers --------------------------------------------------------


def plot_traces(traces, out_dir, name="trace") -> list[str]:
    """Cost-vs-iteration curves. `traces` is a list of (label, OptTrace)."""
    fig, ax = _new_fig()
    rows = []
    for label, trace in traces:
        ax.plot(trace.iteration, trace.best_cost, label=str(label))
        for k, c, ev, ms in zip(trace.iteration, trace.best_cost,
                                trace.evals, trace.elapsed_ms):
            rows.append([str(label), k, float(c), int(ev), float(ms)])
    ax.set_xlabel("iteration")
    ax.set_ylabel("best cost")
    ax.legend()
    svg = os.path.join(out_dir, f"{name}.svg")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    _save_fig(fig, svg)
    _write_csv(csv_path, ["series", "iteration", "best_cost", "evals",
                          "elapsed_ms"], rows)
    return [svg, csv_path]


def plot_boxes(records, metrics, out_dir, name="box") -> list[str]:
    """Side-by-side boxplots of the given record metrics."""
    fig, axes = _new_fig(width=3.0 * len(metrics), n_axes=len(metrics))
    if len(metrics) == 1:
        axes = [axes]
    rows = []
    for ax, metric in zip(axes, metrics):
        vals = [float(r[metric]) for r in records]
        ax.boxplot([vals], tick_labels=[metric])
        qs = np.quantile(np.array(vals), [0.0, 0.25, 0.5, 0.75, 1.0])
        rows.append([metric] + [float(q) for q in qs])
    svg = os.path.join(out_dir, f"{name}.svg")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    _save_fig(fig, svg)
    _write_csv(csv_path, ["metric", "min", "q25", "median", "q75", "max"],
               rows)
    return [svg, csv_path]


def plot_paths_on_map(env, solutions, out_dir, name="path_map",
                      labels=None) -> list[str]:
    """Top-down view: traversability map, obstacle clearance boundaries,
    vortex glyphs, current quiver and the planned path(s)."""
    grid = env.grid
    ex, ey = grid.extent
    fig, ax = _new_fig(width=7.0, height=7.0)
    ax.imshow(grid.values, origin="lower", extent=(0.0, ex, 0.0, ey),
              cmap="cividis", vmin=0.0, vmax=1.0, interpolation="nearest")

    if env.field is not None and env.field.layers:
        gx, gy = np.meshgrid(np.linspace(0.0, ex, 18),
                             np.linspace(0.0, ey, 18))
        pts = np.column_stack([gx.ravel(), gy.ravel(),
                               np.zeros(gx.size)])
        uv = current_at_batch(env.field, pts)
        ax.quiver(gx, gy, uv[:, 0].reshape(gx.shape),
                  uv[:, 1].reshape(gx.shape), color="white", alpha=0.6,
                  width=0.002)
        for v in env.field.layers[0].vortices:
            spin = "crimson" if v.strength >= 0 else "royalblue"
            ax.add_patch(Circle((v.x, v.y), v.radius, fill=False,
                                color=spin, linestyle=":", linewidth=1.2))
            ax.plot([v.x], [v.y], marker="+", color=spin, markersize=6)

    for ob in env.obstacles:
        bound = collision_boundary(ob, 0.0)
        ax.add_patch(Circle((ob.center[0], ob.center[1]), bound,
                            fill=False, color="red", linewidth=1.4))
        ax.add_patch(Circle((ob.center[0], ob.center[1]), ob.radius,
                            fill=True, color="red", alpha=0.35))

    rows = []
    for k, sol in enumerate(solutions):
        label = labels[k] if labels else f"path {k}"
        pos = sol.positions
        ax.plot(pos[:, 0], pos[:, 1], linewidth=1.8, label=str(label))
        for p in pos:
            rows.append([str(label), float(p[0]), float(p[1]), float(p[2])])
    if solutions:
        p0 = solutions[0].positions[0]
        p1 = solutions[0].positions[-1]
        ax.plot([p0[0]], [p0[1]], marker="^", color="lime", markersize=9)
        ax.plot([p1[0]], [p1[1]], marker="*", color="gold", markersize=12)
        ax.legend(loc="upper right")
    ax.set_xlim(0.0, ex)
    ax.set_ylim(0.0, ey)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")

    svg = os.path.join(out_dir, f"{name}.svg")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    _save_fig(fig, svg)
    _write_csv(csv_path, ["series", "x", "y", "z"], rows)
    return [svg, csv_path]


def plot_leg_times(legs, out_dir, name="leg_times") -> list[str]:
    """Per-leg comparison of the edge estimate against planned and realized
    leg times."""
    fig, ax = _new_fig(width=8.0)
    idx = np.arange(len(legs))
    t_eps = [leg.t_eps for leg in legs]
    t_planned = [leg.t_planned for leg in legs]
    t_actual = [leg.t_actual for leg in legs]
    width = 0.27
    ax.bar(idx - width, t_eps, width, label="estimate")
    ax.bar(idx, t_planned, width, label="planned")
    ax.bar(idx + width, t_actual, width, label="realized")
    ax.set_xticks(idx)
    ax.set_xticklabels([f"{leg.i}-{leg.j}" for leg in legs], rotation=45)
    ax.set_xlabel("leg")
    ax.set_ylabel("time (s)")
    ax.legend()
    rows = [[f"{leg.i}-{leg.j}", float(leg.t_eps), float(leg.t_planned),
             float(leg.t_actual)] for leg in legs]
    svg = os.path.join(out_dir, f"{name}.svg")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    _save_fig(fig, svg)
    _write_csv(csv_path, ["leg", "t_estimate", "t_planned", "t_realized"],
               rows)
    return [svg, csv_path]


def plot_timeline(report, out_dir, name="timeline") -> list[str]:
    """Mission timeline: remaining budget over simulated time, with one
    marker per planning event (initial plan and every re-plan)."""
    fig, ax = _new_fig(width=8.0)
    t = [0.0]
    budget = [report.t_v]
    acc = report.t_v
    for leg in report.legs:
        acc -= leg.duration
        t.append(leg.t_end)
        budget.append(acc)
    ax.step(t, budget, where="post", label="remaining budget")
    rows = []
    for k, ev in enumerate(report.plans):
        ax.axvline(ev.sim_time, color="crimson", linestyle="--",
                   linewidth=1.0)
        ax.plot([ev.sim_time], [ev.budget], marker="v", color="crimson",
                markersize=9)
        ax.annotate(f"plan {k + 1}", (ev.sim_time, ev.budget),
                    textcoords="offset points", xytext=(4, 6), fontsize=8)
        rows.append([k + 1, ev.kind, ev.reason, ev.at_node,
                     float(ev.sim_time), float(ev.budget), ev.stations,
                     float(ev.route_time), float(ev.route_cost)])
    ax.set_xlabel("simulated time (s)")
    ax.set_ylabel("remaining budget (s)")
    ax.legend()
    svg = os.path.join(out_dir, f"{name}.svg")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    _save_fig(fig, svg)
    _write_csv(csv_path, ["plan", "kind", "reason", "at_node", "sim_time",
                          "budget", "stations", "route_time", "route_cost"],
               rows)
    return [svg, csv_path]


def plot_scaling(records, out_dir, name="scaling") -> list[str]:
    """Planner CPU time against graph size, with the least-squares line."""
    from armpa.montecarlo import linear_fit_r2

    fig, ax = _new_fig()
    xs = np.array([float(r["n_nodes"]) for r in records])
    ys = np.array([float(r["cpu_s"]) for r in records])
    ax.plot(xs, ys, "o", label="runs")
    a, b, r2 = linear_fit_r2(xs, ys)
    grid_x = np.linspace(xs.min(), xs.max(), 50)
    ax.plot(grid_x, a * grid_x + b, "-",
            label=f"fit (R^2 = {r2:.3f})")
    ax.set_xlabel("graph nodes")
    ax.set_ylabel("planner CPU time (s)")
    ax.legend()
    rows = [[int(r["n_nodes"]), int(r["rep"]), float(r["cpu_s"])]
            for r in records]
    svg = os.path.join(out_dir, f"{name}.svg")
    csv_path = os.path.join(out_dir, f"{name}.csv")
    _save_fig(fig, svg)
    _write_csv(csv_path, ["n_nodes", "rep", "cpu_s"], rows)
    return [svg, csv_path]


# -- dispatcher ------------------------------------------------------------------


def emit_plots(records, kind: str, out, env=None, labels=None) -> list[str]:
    """Render one family of figures into directory `out`.

    kind = "trace"    records: list of (label, OptTrace)
    kind = "mission"  records: mission batch record dicts
    kind = "motion"   records: motion batch record dicts
    kind = "path"     records: list of PathSolution (needs env=)
    kind = "legs"     records: list of LegRecord
    kind = "armpa"    records: list of MissionReport
    kind = "scaling"  records: scaling-study record dicts
    """
    if not records:
        raise ValueError("records must be nonempty")
    os.makedirs(out, exist_ok=True)
    if kind == "trace":
        return plot_traces(records, out)
    if kind == "mission":
        return plot_boxes(records, ["cpu_s", "t_r", "weight", "tasks"], out,
                          name="mission_box")
    if kind == "motion":
        return plot_boxes(records, ["cost", "duration", "length"], out,
                          name="motion_box")
    if kind == "path":
        if env is None:
            raise ValueError("kind 'path' needs env=")
        return plot_paths_on_map(env, records, out, labels=labels)
    if kind == "legs":
        return plot_leg_times(records, out)
    if kind == "armpa":
        files = []
        for k, report in enumerate(records):
            files += plot_timeline(report, out, name=f"timeline_{k}")
            if report.legs:
                files += plot_leg_times(report.legs, out,
                                        name=f"leg_times_{k}")
        return files
    if kind == "scaling":
        return plot_scaling(records, out)
    raise ValueError(f"unknown plot kind {kind!r}")
