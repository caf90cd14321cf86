"""Artifact writer: summary CSV, per-scenario JSON, trajectories, figures.

All numeric text is written at 17 significant digits so reruns with the
same config and seed are byte-identical. Figures are static SVG with
text kept as literal strings (not paths), one file per scenario.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .analysis import ScenarioAnalysis, analyze_scenario
from .scenarios import RunConfig
from .systems import write_trajectory_csv

__all__ = ["run", "write_summary_csv", "write_figure"]

SUMMARY_COLUMNS = (
    "scenario,param,theta_star,mu,N,dA_norm,bu_inf,gt_energy_ode,gt_energy_fd,"
    "thm1,thm2,baseline,R_gt,R_thm1,R_baseline,flags"
)


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{float(x):.17g}"


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]", "_", name)


def summary_rows(analyses) -> list[str]:
    rows = [SUMMARY_COLUMNS]
    for an in analyses:
        r_gt = an.metrics["ground_truth"].R
        r_thm1 = an.metrics["theorem1"].R if "theorem1" in an.metrics else None
        r_base = (
            an.metrics["gramian_baseline"].R
            if "gramian_baseline" in an.metrics
            else None
        )
        for rep in an.reports:
            flags = ";".join(rep.flags) if rep.flags else "ok"
            rows.append(
                ",".join(
                    (
                        an.scenario.name,
                        str(rep.param_index),
                        _fmt(rep.theta_star),
                        _fmt(an.mu),
                        _fmt(an.N),
                        _fmt(rep.constants.dA_norm),
                        _fmt(an.bu_inf),
                        _fmt(rep.ground_truth_energy),
                        _fmt(rep.gt_energy_fd),
                        _fmt(rep.theorem1),
                        _fmt(rep.theorem2),
                        _fmt(rep.gramian_baseline),
                        _fmt(r_gt),
                        _fmt(r_thm1),
                        _fmt(r_base),
                        flags,
                    )
                )
            )
    return rows


def write_summary_csv(analyses, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(summary_rows(analyses)) + "\n")


def write_figure(an: ScenarioAnalysis, path) -> None:
    """One SVG per scenario: sensitivity traces plus an energy comparison."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.fonttype": "none", "svg.hashsalt": an.scenario.name}):
        fig, (ax_t, ax_b) = plt.subplots(1, 2, figsize=(11.0, 4.2))
        for i, pair in sorted(an.sensitivities.items()):
            for route, style in (("ode", "-"), ("fd", "--")):
                traj = pair[route]
                for col in range(traj.width):
                    label = f"s{i} {route}" if col == 0 else None
                    ax_t.plot(traj.times, traj.values[:, col], style, label=label)
        ax_t.set_xlabel("t")
        ax_t.set_ylabel("d ybar / d theta")
        ax_t.set_title(f"{an.scenario.name}: sensitivity of the error output")
        ax_t.legend(loc="best", fontsize=8)

        sources = ("ground_truth", "theorem1", "theorem2", "gramian_baseline")
        values = {
            "ground_truth": [r.ground_truth_energy for r in an.reports],
            "theorem1": [r.theorem1 for r in an.reports],
            "theorem2": [r.theorem2 for r in an.reports],
            "gramian_baseline": [r.gramian_baseline for r in an.reports],
        }
        idx = [r.param_index for r in an.reports]
        width = 0.2
        any_positive = False
        for k, source in enumerate(sources):
            xs, ys = [], []
            for j, v in enumerate(values[source]):
                if v is not None:
                    xs.append(j + (k - 1.5) * width)
                    ys.append(max(v, 0.0))
            if xs:
                ax_b.bar(xs, ys, width=width, label=source)
                any_positive = any_positive or any(y > 0.0 for y in ys)
        ax_b.set_xticks(range(len(idx)))
        ax_b.set_xticklabels([f"theta{i + 1}" for i in idx])
        if any_positive:
            ax_b.set_yscale("log")
        ax_b.set_ylabel("sensitivity energy and bounds")
        ax_b.set_title("ground truth vs bounds")
        ax_b.legend(loc="best", fontsize=8)

        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def run(config: RunConfig) -> list[ScenarioAnalysis]:
    """Analyze every scenario in the config and write all artifacts."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    analyses = [
        analyze_scenario(sc, mode=config.mode, dt=config.dt)
        for sc in config.scenarios
    ]
    write_summary_csv(analyses, out / "summary.csv")
    for an in analyses:
        name = _safe_name(an.scenario.name)
        with open(out / f"bounds_{name}.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(an.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        write_trajectory_csv(an.outputs, out / f"traj_{name}.csv")
        for i, pair in sorted(an.sensitivities.items()):
            write_trajectory_csv(
                pair["ode"].as_trajectory(),
                out / f"sens_{name}_p{i}.csv",
                prefix="ds_",
            )
        write_figure(an, out / f"fig_{name}.svg")
    return analyses
