"""Post-campaign analysis: summaries, correlation series, and comparisons.

Each mode reads a campaign archive (``results.csv`` plus ``traces/``) and
writes delimited report files, rendering companion figures alongside them
unless figures are disabled. Undefined correlations serialize as empty CSV
cells and as the word ``undefined`` in text reports.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import numpy as np

from .plotting import (save_compare_figure, save_convergence_figure, save_correlation_figure,
                       save_diversity_figure)
from .runner import RunOutcome, format_float, read_results_index, read_trace, trace_path
from .stats import (CheckpointSeries, StatsError, fitness_diversity_correlations,
                    rank_algorithms, summarize)

__all__ = ["AnalysisError", "MODES", "analyze", "load_checkpoint_series"]

MODES = ("summary", "correlation", "compare")

RANKING_NOTE = ("Ranking: algorithms sorted by mean; a neighbor joins the current group "
                "when its Welch test against the group leader has p >= significance, and "
                "group members share the leader's rank (simplified multiple-comparison "
                "procedure based on adjacent pairwise tests).")


class AnalysisError(RuntimeError):
    """Missing or malformed campaign archive, or unusable analysis input."""


def _load_outcomes(archive) -> list[RunOutcome]:
    archive = Path(archive)
    if not (archive / "results.csv").exists():
        raise AnalysisError(f"{archive} is not a campaign archive (no results.csv)")
    try:
        return read_results_index(archive)
    except ValueError as exc:
        raise AnalysisError(str(exc)) from None


def _ok_runs(outcomes) -> dict[str, list[RunOutcome]]:
    by_tag = defaultdict(list)
    for o in outcomes:
        if o.status == "ok":
            by_tag[o.tag].append(o)
    return by_tag


def load_checkpoint_series(archive, tag: str, runs) -> CheckpointSeries:
    """Stack the traces of the given runs into cross-run checkpoint matrices."""
    columns = []
    checkpoints = None
    for outcome in runs:
        try:
            records = read_trace(trace_path(archive, tag, outcome.run_index))
        except (OSError, ValueError) as exc:
            raise AnalysisError(f"trace for {tag} run {outcome.run_index}: {exc}") from None
        ns = np.array([r.n for r in records])
        if checkpoints is None:
            checkpoints = ns
        elif not np.array_equal(checkpoints, ns):
            raise AnalysisError(f"trace for {tag} run {outcome.run_index} has a different "
                                "checkpoint grid than its siblings")
        columns.append(records)
    if checkpoints is None:
        raise AnalysisError(f"no successful runs for {tag}")
    def matrix(field):
        return np.array([[getattr(r, field) for r in col] for col in columns]).T
    return CheckpointSeries(
        checkpoints=checkpoints,
        best_f=matrix("best_f"),
        d_X=matrix("d_X"),
        d_P=matrix("d_P"),
        s_X=matrix("s_X"),
        s_P=matrix("s_P"),
    )


def _fmt_cell(v) -> str:
    return "" if v is None else format_float(v)


def _fmt_text(v) -> str:
    return "undefined" if v is None else f"{v:+.4f}"


def _write(path: Path, lines) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _summary_mode(archive, out, by_tag, outcomes, figures) -> list[Path]:
    written = []
    failed = defaultdict(int)
    for o in outcomes:
        if o.status == "failed":
            failed[o.tag] += 1
    tags = []
    for o in outcomes:
        if o.tag not in tags:
            tags.append(o.tag)

    csv_lines = ["algorithm,runs_ok,runs_failed,mean_best,std_best"]
    txt_lines = ["final best fitness per algorithm: mean (std) over successful runs", ""]
    for tag in tags:
        finals = np.array([o.final_best for o in by_tag.get(tag, [])])
        if finals.size >= 2:
            mean, std = finals.mean(), finals.std(ddof=1)
            csv_lines.append(f"{tag},{finals.size},{failed[tag]},"
                             f"{format_float(mean)},{format_float(std)}")
            note = f" [{failed[tag]} failed]" if failed[tag] else ""
            txt_lines.append(f"{tag:<16} {mean:.6e} ({std:.6e}) over {finals.size} runs{note}")
        else:
            csv_lines.append(f"{tag},{finals.size},{failed[tag]},,")
            txt_lines.append(f"{tag:<16} incomplete ({finals.size} ok, {failed[tag]} failed)")
    written.append(_write(out / "summary.csv", csv_lines))
    written.append(_write(out / "summary.txt", txt_lines))

    if figures:
        curves = {}
        for tag in tags:
            runs = by_tag.get(tag, [])
            if len(runs) < 1:
                continue
            series = load_checkpoint_series(archive, tag, runs)
            curves[tag] = (series.checkpoints, series.best_f.mean(axis=1))
        if curves:
            fig_path = out / "fig_convergence.png"
            save_convergence_figure(fig_path, curves)
            written.append(fig_path)
    return written


def _correlation_mode(archive, out, by_tag, figures) -> list[Path]:
    if not by_tag:
        raise AnalysisError("no successful runs to correlate")
    written = []
    for tag in sorted(by_tag):
        series = load_checkpoint_series(archive, tag, by_tag[tag])
        records = fitness_diversity_correlations(series)
        lines = ["n,rho_d_X,rho_d_P,rho_s_X,rho_s_P"]
        for r in records:
            lines.append(f"{r.n},{_fmt_cell(r.rho_d_X)},{_fmt_cell(r.rho_d_P)},"
                         f"{_fmt_cell(r.rho_s_X)},{_fmt_cell(r.rho_s_P)}")
        written.append(_write(out / f"correlation_{tag}.csv", lines))
        if figures:
            fig_path = out / f"fig_correlation_{tag}.png"
            save_correlation_figure(fig_path, tag, series.checkpoints, {
                "d_X": [r.rho_d_X for r in records],
                "d_P": [r.rho_d_P for r in records],
                "s_X": [r.rho_s_X for r in records],
                "s_P": [r.rho_s_P for r in records],
            })
            written.append(fig_path)
            div_path = out / f"fig_diversity_{tag}.png"
            save_diversity_figure(div_path, tag, series.checkpoints,
                                  series.d_X.mean(axis=1), series.d_P.mean(axis=1),
                                  series.s_X.mean(axis=1), series.s_P.mean(axis=1))
            written.append(div_path)
    return written


def _compare_mode(out, by_tag, significance, figures) -> list[Path]:
    usable = {tag: [o.final_best for o in runs]
              for tag, runs in by_tag.items() if len(runs) >= 2}
    if len(usable) < 2:
        raise AnalysisError("compare mode needs at least two algorithms with two or more "
                            "successful runs each")
    try:
        report = summarize(usable)
        ranks = rank_algorithms(report, significance=significance)
    except StatsError as exc:
        raise AnalysisError(str(exc)) from None

    written = []
    csv_lines = ["algorithm_a,algorithm_b,t,p,se,df"]
    for (ta, tb), res in sorted(report.tests.items()):
        csv_lines.append(f"{ta},{tb},{format_float(res.t)},{format_float(res.p)},"
                         f"{format_float(res.se)},{format_float(res.df)}")
    written.append(_write(out / "compare.csv", csv_lines))

    rank_lines = ["algorithm,runs,mean_best,std_best,rank"]
    for s in sorted(report.summaries, key=lambda s: (ranks[s.tag], s.tag)):
        rank_lines.append(f"{s.tag},{s.n_runs},{format_float(s.mean)},"
                          f"{format_float(s.std)},{ranks[s.tag]}")
    written.append(_write(out / "ranks.csv", rank_lines))

    txt = [RANKING_NOTE, f"significance = {significance}", ""]
    for s in sorted(report.summaries, key=lambda s: (ranks[s.tag], s.tag)):
        txt.append(f"rank {ranks[s.tag]:<3} {s.tag:<16} {s.mean:.6e} ({s.std:.6e}) "
                   f"over {s.n_runs} runs")
    txt.append("")
    txt.append("pairwise Welch tests (two-sided):")
    for (ta, tb), res in sorted(report.tests.items()):
        txt.append(f"  {ta} vs {tb}: t={res.t:+.4f}, p={res.p:.6f}, se={res.se:.6e}")
    written.append(_write(out / "compare.txt", txt))

    if figures:
        fig_path = out / "fig_compare.png"
        save_compare_figure(fig_path, sorted(report.summaries, key=lambda s: s.mean), ranks)
        written.append(fig_path)
    return written


def analyze(archive, mode: str, out_dir=None, figures: bool = True,
            significance: float = 0.05) -> list[Path]:
    """Run one analysis mode over a campaign archive.

    Returns the list of report paths written (CSV, text, figures).
    """
    if mode not in MODES:
        raise AnalysisError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")
    archive = Path(archive)
    outcomes = _load_outcomes(archive)
    by_tag = _ok_runs(outcomes)
    out = Path(out_dir) if out_dir is not None else archive / "analysis"
    out.mkdir(parents=True, exist_ok=True)
    if mode == "summary":
        return _summary_mode(archive, out, by_tag, outcomes, figures)
    if mode == "correlation":
        return _correlation_mode(archive, out, by_tag, figures)
    return _compare_mode(out, by_tag, significance, figures)
