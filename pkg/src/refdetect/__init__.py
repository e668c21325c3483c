"""Detect refactorings between two revisions of a Java code base."""
from ._kernels import BACKEND
from .evaluation import (
    EvalReport,
    OracleEntry,
    calibrate_all,
    f1,
    precision_recall,
    read_oracle,
    sweep_thresholds,
)
from .lexer import TokenMultiset, tokenize_body
from .model import CodeEntity, CodeModel, EntityId, Kind, ParseError
from .relationships import CandidateTriple, Relationship, detect, refactorings, resolve_conflicts
from .repo_io import RevisionPair, list_commits, load_commit_pair, load_directory_pair
from .similarity import WeightIndex, build_weight_index, sim, sim_u, weight
from .source_model import build_field_virtual_body, parse_source_set
from .thresholds import RelationshipType, ThresholdConfig

__all__ = [
    "BACKEND", "CandidateTriple", "CodeEntity", "CodeModel", "EntityId", "EvalReport", "Kind",
    "OracleEntry", "ParseError", "Relationship", "RelationshipType", "RevisionPair",
    "ThresholdConfig", "TokenMultiset", "WeightIndex", "build_field_virtual_body",
    "build_weight_index", "calibrate_all", "detect", "f1", "list_commits", "load_commit_pair",
    "load_directory_pair", "parse_source_set", "precision_recall", "read_oracle", "refactorings",
    "resolve_conflicts", "sim", "sim_u", "sweep_thresholds", "tokenize_body", "weight",
]
