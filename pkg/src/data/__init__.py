"""File readers and writers."""

from src.data.loader import (
    load_assignment,
    load_corpus,
    load_counts,
    load_gps,
    load_json,
    load_model,
    load_path,
    load_prices,
    load_text,
    load_tokens,
    read_header,
    save_counts,
    save_frame,
    save_json,
    save_path,
)

__all__ = [
    "load_assignment",
    "load_corpus",
    "load_counts",
    "load_gps",
    "load_json",
    "load_model",
    "load_path",
    "load_prices",
    "load_text",
    "load_tokens",
    "read_header",
    "save_counts",
    "save_frame",
    "save_json",
    "save_path",
]
