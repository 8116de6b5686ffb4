"""Synthesize mapping relationships (functional two-column tables) from a table corpus."""
from .corpus import TableRecord, load_corpus, normalize_cell
from .curate import SynthesizedMapping, evaluate, rank_and_filter, score_cases
from .extract import CandidateTable, ExtractConfig
from .compat import CompatibilityGraph, GraphConfig, build_graph
from .partition import greedy_partition, partition_graph
from .pipeline import PipelineConfig, run_pipeline
from .resolve import resolve_conflicts
from .strmatch import MatchConfig, SynonymStore, approx_match

__all__ = [
    "TableRecord", "load_corpus", "normalize_cell", "SynthesizedMapping", "evaluate",
    "rank_and_filter", "score_cases", "CandidateTable", "ExtractConfig", "CompatibilityGraph",
    "GraphConfig", "build_graph", "greedy_partition", "partition_graph", "PipelineConfig",
    "run_pipeline", "resolve_conflicts", "MatchConfig", "SynonymStore", "approx_match",
]
__version__ = "0.1.0"
