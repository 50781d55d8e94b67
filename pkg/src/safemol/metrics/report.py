"""Metric reports, seed aggregation and Table-1-shaped output."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from safemol.metrics.scores import (
    Constraint,
    fragmented_pct,
    internal_diversity,
    match_constraint,
    mol_weight,
    moses_filter,
    novelty,
    uniqueness,
    validity,
)

# column order of the results table
TABLE_COLUMNS = ("validity", "uniqueness", "novelty", "int_div", "fragmented_pct")
CSV_HEADER = ("representation", "model", "validity", "uniqueness", "novelty", "int_div", "fragmented")
OPTIONAL_COLUMNS = ("match_constraint", "filter_pass")


@dataclass(frozen=True)
class MetricsReport:
    validity: float
    uniqueness: float
    novelty: float
    int_div: float
    fragmented_pct: float
    match_constraint: float | None
    filter_pass: float | None
    n_samples: int
    n_valid: int
    mol_weight_mean: float
    mol_weight_std: float
    int_div_power: int = 1
    int_div_n: int = 0
    int_div_subsampled: bool = False
    seed: int | None = None
    flags: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return d


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard deviation (``ddof=1``); a single value has std 0."""
    if not values:
        return 0.0, 0.0
    arr = np.asarray(values, dtype=np.float64)
    if len(arr) == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1))


def build_report(
    samples: Sequence[str],
    training_set: set[str],
    constraint: Constraint | None = None,
    int_div_cap: int | None = 10_000,
    seed: int | None = None,
) -> MetricsReport:
    """Score one batch of generated strings.

    ``training_set`` holds canonical SMILES. An empty batch yields a zeroed
    report flagged ``no_samples``.
    """
    flags: list[str] = []
    v = validity(samples)
    graphs = v.graphs
    if not samples:
        flags.append("no_samples")
    elif not graphs:
        flags.append("no_valid_samples")
    div = internal_diversity(graphs, int_div_cap, seed or 0)
    if div.subsampled:
        flags.append("int_div_subsampled")
    weights: list[float] = []
    passes = 0
    for g in graphs:
        ok, _ = moses_filter(g)
        passes += ok
        try:
            weights.append(mol_weight(g))
        except ValueError:
            flags.append("mass_unknown_element")
    w_mean, w_std = _mean_std(weights)
    return MetricsReport(
        validity=v.fraction,
        uniqueness=uniqueness(graphs),
        novelty=novelty(graphs, training_set),
        int_div=div.value,
        fragmented_pct=fragmented_pct(graphs),
        match_constraint=match_constraint(graphs, constraint) if constraint is not None else None,
        filter_pass=passes / len(graphs) if graphs else 0.0,
        n_samples=v.n_samples,
        n_valid=v.n_valid,
        mol_weight_mean=w_mean,
        mol_weight_std=w_std,
        int_div_n=div.n_used,
        int_div_subsampled=div.subsampled,
        seed=seed,
        flags=tuple(sorted(set(flags))),
    )


@dataclass(frozen=True)
class AggregateRow:
    representation: str
    model: str
    n_seeds: int
    stats: dict[str, tuple[float, float]]

    def cell(self, name: str, digits: int = 3) -> str:
        mean, std = self.stats[name]
        return f"{mean:.{digits}f} ± {std:.{digits}f}"

    def to_dict(self) -> dict:
        return {
            "representation": self.representation,
            "model": self.model,
            "n_seeds": self.n_seeds,
            "stats": {k: {"mean": m, "std": s} for k, (m, s) in sorted(self.stats.items())},
        }


def aggregate(reports: Sequence[MetricsReport], representation: str, model: str) -> AggregateRow:
    """Mean and sample std of every metric across seeds."""
    stats: dict[str, tuple[float, float]] = {}
    for name in TABLE_COLUMNS + OPTIONAL_COLUMNS + ("mol_weight_mean",):
        vals = [getattr(r, name) for r in reports]
        if any(x is None for x in vals):
            continue
        stats[name] = _mean_std([float(x) for x in vals])
    return AggregateRow(representation, model, len(reports), stats)


def rows_to_csv(rows: Iterable[AggregateRow], digits: int = 3, extra: Sequence[str] = ()) -> str:
    """Table rows as CSV; ``extra`` appends further metrics such as ``match_constraint``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER + tuple(extra))
    for row in rows:
        cols = TABLE_COLUMNS + tuple(extra)
        writer.writerow([row.representation, row.model] + [row.cell(c, digits) for c in cols])
    return buf.getvalue()


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def to_json(obj: dict) -> str:
    """Stable JSON: sorted keys, no NaN, trailing newline."""
    return json.dumps(_finite(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
