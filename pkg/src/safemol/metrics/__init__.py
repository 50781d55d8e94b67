"""Generation metrics: validity, uniqueness, novelty, diversity, fragmentation, constraints."""
from safemol.metrics.fingerprint import (
    Fingerprint,
    atom_environment_ids,
    fingerprint,
    mean_pairwise_tanimoto,
    tanimoto,
)
from safemol.metrics.report import (
    CSV_HEADER,
    TABLE_COLUMNS,
    AggregateRow,
    MetricsReport,
    aggregate,
    build_report,
    rows_to_csv,
    to_json,
)
from safemol.metrics.scores import (
    ALLOWED_ELEMENTS,
    ATOMIC_MASS,
    MAX_RING_SIZE,
    DiversityResult,
    ValidityResult,
    canonical_set,
    fragmented_pct,
    internal_diversity,
    match_constraint,
    mol_weight,
    moses_filter,
    novelty,
    uniqueness,
    validity,
)

__all__ = [
    "Fingerprint",
    "atom_environment_ids",
    "fingerprint",
    "mean_pairwise_tanimoto",
    "tanimoto",
    "CSV_HEADER",
    "TABLE_COLUMNS",
    "AggregateRow",
    "MetricsReport",
    "aggregate",
    "build_report",
    "rows_to_csv",
    "to_json",
    "ALLOWED_ELEMENTS",
    "ATOMIC_MASS",
    "MAX_RING_SIZE",
    "DiversityResult",
    "ValidityResult",
    "canonical_set",
    "fragmented_pct",
    "internal_diversity",
    "match_constraint",
    "mol_weight",
    "moses_filter",
    "novelty",
    "uniqueness",
    "validity",
]
