"""Semantic trajectory analysis for recorded task executions.

Typical flow: :func:`semtraj.ingest.read_episode` -> per-episode metrics
(:mod:`semtraj.metrics`) and semantic scoring against a template
(:func:`semtraj.distance.levenshtein`) -> within-group path similarity
(:func:`semtraj.distance.pairwise_matrix`) -> group comparison
(:func:`semtraj.stats.compare_groups`).
"""

from .distance import classify_edits, dfd, dtw, group_similarity, levenshtein, pairwise_matrix
from .ingest import TaskTemplate, load_template, parse_episode, read_episode, read_template, write_episode
from .model import Episode, SemanticSequence, Trajectory, validate_episode
from .segment import action_intervals, compress, segment_trajectory
from .stats import cliffs_delta, compare_groups, conover_holm, kruskal_wallis

__version__ = "0.1.0"

__all__ = [
    "Episode",
    "SemanticSequence",
    "TaskTemplate",
    "Trajectory",
    "action_intervals",
    "classify_edits",
    "cliffs_delta",
    "compare_groups",
    "compress",
    "conover_holm",
    "dfd",
    "dtw",
    "group_similarity",
    "kruskal_wallis",
    "levenshtein",
    "load_template",
    "pairwise_matrix",
    "parse_episode",
    "read_episode",
    "read_template",
    "segment_trajectory",
    "validate_episode",
    "write_episode",
]
