"""Rank treatments per project and render rank / median / IQR tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import mannwhitneyu

from .errors import EmptyGroup, EmptyInput

BAR_WIDTH = 30


def nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    """The ``q``-quantile (0 < q <= 1) by the nearest-rank method."""
    n = len(sorted_values)
    rank = max(1, math.ceil(q * n - 1e-12))
    return float(sorted_values[rank - 1])


def summarize(samples: Sequence[float]) -> tuple[float, float]:
    """(median, interquartile range), both by nearest rank."""
    if len(samples) == 0:
        raise EmptyInput("cannot summarize an empty sample")
    xs = sorted(float(x) for x in samples)
    return nearest_rank(xs, 0.5), nearest_rank(xs, 0.75) - nearest_rank(xs, 0.25)


def cliffs_delta(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[None, :]
    return float((np.sum(a > b) - np.sum(a < b)) / (a.size * b.size))


def mann_whitney_p(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Mann-Whitney U p-value; 1.0 when every value is tied."""
    if len(set(map(float, a)) | set(map(float, b))) == 1:
        return 1.0
    return float(mannwhitneyu(a, b, alternative="two-sided").pvalue)


def distinguishable(a, b, alpha: float = 0.05, effect_threshold: float = 0.147) -> bool:
    """Significant difference with a non-negligible effect size."""
    return mann_whitney_p(a, b) < alpha and abs(cliffs_delta(a, b)) >= effect_threshold


@dataclass(frozen=True)
class TreatmentSummary:
    treatment: str
    median: float
    iqr: float
    rank: int
    quantiles: tuple[float, ...] = ()  # 10th, 25th, 50th, 75th, 90th percentiles


def rank_treatments(
    groups: Mapping[str, Sequence[float]],
    alpha: float = 0.05,
    effect_threshold: float = 0.147,
) -> list[TreatmentSummary]:
    """Rank treatments, 1 = best (largest median).

    Treatments are walked in order of decreasing median. Each joins the
    current rank if it is indistinguishable from every treatment already
    holding that rank; otherwise it opens the next rank.
    """
    if not groups:
        raise EmptyGroup("no treatments to rank")
    for name, values in groups.items():
        if len(values) == 0:
            raise EmptyGroup(f"treatment {name!r} has no samples")
    stats = {name: summarize(values) for name, values in groups.items()}
    order = sorted(groups, key=lambda n: (-stats[n][0], n))

    out = []
    rank, members = 1, []
    for name in order:
        if members and any(distinguishable(groups[m], groups[name], alpha, effect_threshold) for m in members):
            rank += 1
            members = []
        members.append(name)
        xs = sorted(map(float, groups[name]))
        qs = tuple(nearest_rank(xs, q) for q in (0.1, 0.25, 0.5, 0.75, 0.9))
        out.append(TreatmentSummary(name, stats[name][0], stats[name][1], rank, qs))
    return out


def quartile_bar(quantiles: Sequence[float], lo: float, hi: float, width: int = BAR_WIDTH) -> str:
    """Text bar: dashes over the 10th-25th and 75th-90th percentiles, ``*`` at the median."""
    def pos(x):
        if hi <= lo:
            return width // 2
        return min(width - 1, max(0, int(round((x - lo) / (hi - lo) * (width - 1)))))

    p10, p25, p50, p75, p90 = (pos(q) for q in quantiles)
    cells = [" "] * width
    for i in range(p10, p25 + 1):
        cells[i] = "-"
    for i in range(p75, p90 + 1):
        cells[i] = "-"
    cells[p50] = "*"
    return "".join(cells)


def render_report(
    summaries: Mapping[str, Sequence[TreatmentSummary]],
    title: str = "Observed improvements R (%)",
) -> str:
    """One block per project: rank, treatment, median, IQR and a quartile bar."""
    lines = [title, "=" * len(title)]
    for project, rows in summaries.items():
        rows = sorted(rows, key=lambda s: (s.rank, -s.median, s.treatment))
        values = [q for s in rows for q in s.quantiles]
        lo, hi = (min(values), max(values)) if values else (0.0, 0.0)
        lines.append("")
        lines.append(f"{project}")
        lines.append(f"{'Rank':>4}  {'Treatment':<10} {'Median':>8} {'IQR':>8}  [{lo:.1f} .. {hi:.1f}]")
        for s in rows:
            bar = quartile_bar(s.quantiles, lo, hi) if s.quantiles else ""
            lines.append(f"{s.rank:>4}  {s.treatment:<10} {s.median:>8.1f} {s.iqr:>8.1f}  |{bar}|")
    return "\n".join(lines) + "\n"


def summaries_csv(summaries: Mapping[str, Sequence[TreatmentSummary]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["project", "rank", "treatment", "median", "iqr"])
    for project, rows in summaries.items():
        for s in sorted(rows, key=lambda s: (s.rank, -s.median, s.treatment)):
            writer.writerow([project, s.rank, s.treatment, repr(s.median), repr(s.iqr)])
    return buf.getvalue()
