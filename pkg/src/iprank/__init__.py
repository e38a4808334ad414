"""Joint paper and institution impact ranking over institution-citation networks."""

__version__ = "0.1.0"

from .corpus import (
    CanonicalInstitution,
    CleanCorpus,
    CleanRecord,
    CorpusSlice,
    FilterReport,
    StatsSummary,
    TimeWindow,
    apply_filters,
    corpus_stats,
    load_clean_corpus,
    save_clean_corpus,
    slice_window,
)
from .metrics import (
    EvalCell,
    EvalReport,
    GroundTruthSet,
    compare_report,
    load_truth,
    precision_at_n,
    rank_lookup,
    recall_at_n,
    spearman_top_n,
)
from .network import (
    CitationGraph,
    GraphConstructionError,
    HeteroGraph,
    InstitutionGraph,
    StochasticOperator,
    build_citation_graph,
    build_hetero_graph,
    operator_from_adjacency,
    project_institution_graph,
    read_graph,
    transition_operator,
    write_graph,
)
from .normalize import AliasTable, normalize_institution
from .records import BibRecord, ParseError, parse_records, read_records, write_records
from .solver import (
    ConvergenceError,
    RankingTable,
    ScoreVector,
    SolverConfig,
    merge_institution_scores,
    pagerank,
    power_step,
    rank,
    split_scores,
)

__all__ = [
    "AliasTable",
    "BibRecord",
    "CanonicalInstitution",
    "CitationGraph",
    "CleanCorpus",
    "CleanRecord",
    "ConvergenceError",
    "CorpusSlice",
    "EvalCell",
    "EvalReport",
    "FilterReport",
    "GraphConstructionError",
    "GroundTruthSet",
    "HeteroGraph",
    "InstitutionGraph",
    "ParseError",
    "RankingTable",
    "ScoreVector",
    "SolverConfig",
    "StatsSummary",
    "StochasticOperator",
    "TimeWindow",
    "apply_filters",
    "build_citation_graph",
    "build_hetero_graph",
    "compare_report",
    "corpus_stats",
    "load_clean_corpus",
    "load_truth",
    "merge_institution_scores",
    "normalize_institution",
    "operator_from_adjacency",
    "pagerank",
    "parse_records",
    "power_step",
    "precision_at_n",
    "project_institution_graph",
    "rank",
    "rank_lookup",
    "read_graph",
    "read_records",
    "recall_at_n",
    "save_clean_corpus",
    "slice_window",
    "spearman_top_n",
    "split_scores",
    "transition_operator",
    "write_graph",
    "write_records",
]
