"""Readers and writers for paths, counts, models and raw observation files."""

import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp

from src.cli.models import AssignmentFile, ClusterModelFile
from src.cluster.models import ClusterAssignment
from src.core.models import ClusterModel, SamplePath, balanced_sigma
from src.counts.frequency import CountMatrix
from src.ingest.gps import GpsRecord

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"

_HEADER = re.compile(r"^#\s*(.*)$")


def _require(path: Path) -> Path:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")
    return path


def _vocab_path(path: Path) -> Path:
    return path.with_name(path.name + ".vocab")


def read_header(path: Path) -> Dict[str, int]:
    """Parse a ``# key=value ...`` first line into integers.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the first line is not a header
    """
    path = _require(path)
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
    match = _HEADER.match(first)
    if not match:
        raise ValueError(f"{path} has no '# key=value' header line")
    header = {}
    for field in match.group(1).split():
        key, _, value = field.partition("=")
        if not value:
            raise ValueError(f"Malformed header field '{field}' in {path}")
        header[key] = int(value)
    return header


def _read_rows(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", header=None, skip_blank_lines=True)


def load_path(path: Path) -> SamplePath:
    """Load a sample path: ``# n=<n> l=<l>`` then one id per line.

    A sibling ``<file>.vocab`` (one symbol per line) becomes the vocabulary.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the header and the body disagree
    """
    header = read_header(path)
    if "n" not in header:
        raise ValueError(f"Path file {path} does not declare n")
    symbols = _read_rows(path).iloc[:, 0].to_numpy(dtype=np.int64)
    if "l" in header and header["l"] != symbols.size:
        raise ValueError(f"Path file {path} declares l={header['l']} but holds {symbols.size} ids")
    vocabulary = None
    vocab_file = _vocab_path(Path(path))
    if vocab_file.exists():
        vocabulary = tuple(load_tokens(vocab_file, keep_blank=True))
    logger.info(f"Loaded path of length {symbols.size} over n={header['n']} from {path}")
    return SamplePath(n=header["n"], symbols=symbols, vocabulary=vocabulary)


def save_path(sample: SamplePath, path: Path) -> None:
    """Write a sample path and, when present, its vocabulary file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# n={sample.n} l={len(sample)}\n")
        f.write("\n".join(str(int(s)) for s in sample.symbols))
        f.write("\n")
    if sample.vocabulary is not None:
        with open(_vocab_path(path), "w", encoding="utf-8") as f:
            f.write("\n".join(sample.vocabulary))
            f.write("\n")


def load_counts(path: Path) -> CountMatrix:
    """Load counts: ``# n=<n>`` then ``i,j,count`` rows (column header optional).

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If entries are malformed
    """
    header = read_header(path)
    if "n" not in header:
        raise ValueError(f"Count file {path} does not declare n")
    n = header["n"]
    rows = _read_rows(path)
    if rows.shape[1] != 3:
        raise ValueError(f"Count file {path} must have three columns i,j,count")
    if len(rows) and str(rows.iloc[0, 0]).strip() == "i":
        rows = rows.iloc[1:].apply(pd.to_numeric)
    triplets = rows.to_numpy(dtype=np.int64).reshape(-1, 3)
    if np.any(triplets[:, :2] < 0) or np.any(triplets[:, :2] >= n) or np.any(triplets[:, 2] < 0):
        raise ValueError(f"Count file {path} has entries outside n={n} or negative counts")
    matrix = sp.csr_matrix((triplets[:, 2], (triplets[:, 0], triplets[:, 1])), shape=(n, n), dtype=np.int64)
    return CountMatrix(n=n, matrix=matrix)


def save_counts(counts: CountMatrix, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# n={counts.n}\n")
        f.write("i,j,count\n")
        for i, j, count in counts.triplets():
            f.write(f"{i},{j},{count}\n")


def load_json(path: Path):
    with open(_require(path), "r", encoding="utf-8") as f:
        return json.load(f)


def save_json(data, path: Path) -> None:
    """Write JSON with sorted keys and a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def load_model(path: Path, n: Optional[int] = None) -> ClusterModel:
    """Load a cluster model ``{"m", "sigma", "p"}``.

    Without ``sigma`` the model gets balanced clusters over ``n`` states.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the content is invalid or n is needed but missing
    """
    data = ClusterModelFile.model_validate(load_json(path))
    if data.sigma is None:
        if n is None:
            raise ValueError(f"Model file {path} has no sigma; pass the number of states")
        sigma = balanced_sigma(n, data.m)
    else:
        sigma = np.asarray(data.sigma, dtype=np.int64)
    return ClusterModel(m=data.m, sigma=sigma, p=np.asarray(data.p, dtype=float))


def load_assignment(path: Path) -> ClusterAssignment:
    data = AssignmentFile.model_validate(load_json(path))
    return ClusterAssignment.from_dict(data.model_dump())


def load_tokens(path: Path, keep_blank: bool = False) -> List[str]:
    """One token per line; surrounding whitespace is stripped."""
    with open(_require(path), "r", encoding="utf-8") as f:
        tokens = [line.strip() for line in f.read().splitlines()]
    return tokens if keep_blank else [token for token in tokens if token]


def load_text(path: Path) -> str:
    with open(_require(path), "r", encoding="utf-8") as f:
        return f.read()


def load_corpus(path: Path) -> List[List[str]]:
    """Documents as one JSON array of token arrays."""
    data = load_json(path)
    if not isinstance(data, list) or not all(isinstance(doc, list) for doc in data):
        raise ValueError(f"Corpus file {path} must hold an array of token arrays")
    return [[str(token) for token in doc] for doc in data]


def load_gps(path: Path) -> List[GpsRecord]:
    """GPS records from a ``lat,lon,timestamp`` CSV in file order.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If a column is missing
    """
    frame = pd.read_csv(_require(path), dtype={"timestamp": str}, keep_default_na=False)
    missing = {"lat", "lon"} - set(frame.columns)
    if missing:
        raise ValueError(f"GPS file {path} lacks columns {sorted(missing)}")
    stamps = frame["timestamp"] if "timestamp" in frame.columns else pd.Series([""] * len(frame))
    return [
        GpsRecord(lat=float(lat), lon=float(lon), timestamp=str(stamp))
        for lat, lon, stamp in zip(frame["lat"], frame["lon"], stamps)
    ]


def load_prices(path: Path) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Open and close tables (days × tickers) from a long ``date,ticker,open,close`` CSV.

    Days and tickers are sorted; missing quotes are NaN.
    """
    frame = pd.read_csv(_require(path), dtype={"date": str, "ticker": str})
    missing = {"date", "ticker", "open", "close"} - set(frame.columns)
    if missing:
        raise ValueError(f"Price file {path} lacks columns {sorted(missing)}")
    opens = frame.pivot_table(index="date", columns="ticker", values="open", aggfunc="first").sort_index()
    closes = frame.pivot_table(index="date", columns="ticker", values="close", aggfunc="first")
    closes = closes.reindex(index=opens.index, columns=opens.columns)
    opens = opens.reindex(columns=sorted(opens.columns))
    closes = closes.reindex(columns=opens.columns)
    return opens, closes


def save_frame(frame: pd.DataFrame, path: Path) -> None:
    """Write a table as CSV with fixed float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
