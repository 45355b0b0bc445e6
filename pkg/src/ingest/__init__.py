"""Raw observation streams to sample paths."""

from src.ingest.documents import cfidf_vectors, return_maximizers
from src.ingest.gps import (
    BoundingBox,
    CosineMode,
    GpsRecord,
    GridRegistry,
    grid_cell,
    gps_to_states,
)
from src.ingest.tokens import codons, concat_paths, tokenize

__all__ = [
    "BoundingBox",
    "CosineMode",
    "GpsRecord",
    "GridRegistry",
    "cfidf_vectors",
    "codons",
    "concat_paths",
    "gps_to_states",
    "grid_cell",
    "return_maximizers",
    "tokenize",
]
