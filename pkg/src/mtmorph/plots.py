"""Matplotlib rendering of check and regression reports.

Figures are written straight to files (Agg backend, no display).  A plain
check renders grouped expected-vs-observed delta bars per relation clause;
a regression report renders a model-by-relation outcome matrix.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .checker import MRReport

_OUTCOME_COLORS = {"pass": "#2a9d4e", "fail": "#d1352b", "skip": "#b0b0b0"}


def render_report_figure(reports: list[MRReport], path) -> None:
    if any(r.model_name for r in reports):
        _render_matrix(reports, path)
    else:
        _render_bars(reports, path)


def _outcome(report: MRReport) -> str:
    if report.skipped:
        return "skip"
    return "pass" if report.passed else "fail"


def _render_bars(reports: list[MRReport], path) -> None:
    labels, expected, observed = [], [], []
    for report in sorted(reports, key=lambda r: r.mr_id):
        if report.skipped:
            continue
        for verdict in report.verdicts:
            labels.append(f"{report.mr_id}\n{verdict.type_name}")
            expected.append(verdict.expected_delta)
            observed.append(verdict.observed_delta)

    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(labels)), 3.5))
    if labels:
        xs = range(len(labels))
        width = 0.38
        ax.bar([x - width / 2 for x in xs], expected, width,
               label="expected", color="#4878cf")
        bar_colors = ["#2a9d4e" if e == o else "#d1352b"
                      for e, o in zip(expected, observed)]
        ax.bar([x + width / 2 for x in xs], observed, width,
               label="observed", color=bar_colors)
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels, fontsize=7)
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "no clauses checked", ha="center", va="center")
        ax.set_axis_off()
    ax.set_ylabel("instance-count delta")
    ax.set_title("relation clause deltas")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _render_matrix(reports: list[MRReport], path) -> None:
    models = sorted({r.model_name or "" for r in reports})
    mrs = sorted({r.mr_id for r in reports})
    lookup = {(r.model_name or "", r.mr_id): _outcome(r) for r in reports}

    fig, ax = plt.subplots(
        figsize=(max(3.0, 0.8 * len(mrs) + 2), max(2.5, 0.5 * len(models) + 1.5)))
    for y, model in enumerate(models):
        for x, mr in enumerate(mrs):
            outcome = lookup.get((model, mr))
            color = _OUTCOME_COLORS.get(outcome, "#ffffff")
            ax.add_patch(plt.Rectangle((x, y), 1, 1, facecolor=color,
                                       edgecolor="white"))
    ax.set_xlim(0, max(len(mrs), 1))
    ax.set_ylim(0, max(len(models), 1))
    ax.set_xticks([x + 0.5 for x in range(len(mrs))])
    ax.set_xticklabels(mrs, fontsize=8, rotation=30, ha="right")
    ax.set_yticks([y + 0.5 for y in range(len(models))])
    ax.set_yticklabels(models, fontsize=8)
    ax.invert_yaxis()
    ax.set_title("regression outcomes (green pass, red fail, grey skip)",
                 fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
