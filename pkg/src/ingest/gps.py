"""GPS traces to state sequences on a kilometer grid."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from src.core.errors import DegenerateCell, InvalidModel
from src.core.models import SamplePath

logger = logging.getLogger(__name__)

KM_PER_DEGREE_LAT = 110.574
KM_PER_DEGREE_LON = 111.320
MIN_COSINE = 1e-9


class CosineMode(str, Enum):
    """Latitude (in degrees) at which the longitude cell width is taken.

    ``listing`` uses j_lat * 110.574 / x, ``cell`` the lower latitude of the
    cell, j_lat * x / 110.574, and ``record`` the record's own latitude.
    """

    LISTING = "listing"
    CELL = "cell"
    RECORD = "record"


@dataclass(frozen=True)
class GpsRecord:
    """One observation: decimal-degree coordinates and an opaque ordering key."""

    lat: float
    lon: float
    timestamp: str = ""

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidModel(f"Latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise InvalidModel(f"Longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class BoundingBox:
    """Open latitude/longitude rectangle; records on the border are outside."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def contains(self, record: GpsRecord) -> bool:
        return self.lat_min < record.lat < self.lat_max and self.lon_min < record.lon < self.lon_max


@dataclass
class GridRegistry:
    """Cells in discovery order; ids are contiguous from 0."""

    cell_km: float
    cells: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def state_of(self, cell: Tuple[int, int]) -> int:
        """Id of a cell, registering it when new."""
        if cell not in self.cells:
            self.cells[cell] = len(self.cells)
        return self.cells[cell]

    def __len__(self) -> int:
        return len(self.cells)

    def to_dict(self) -> Dict[str, int]:
        """Registry JSON layout ``{"j_lat,j_long": id}``."""
        return {f"{j_lat},{j_long}": state for (j_lat, j_long), state in self.cells.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, int], cell_km: float) -> "GridRegistry":
        cells = {}
        for key, state in sorted(data.items(), key=lambda item: item[1]):
            j_lat, j_long = (int(part) for part in key.split(","))
            cells[(j_lat, j_long)] = int(state)
        if sorted(cells.values()) != list(range(len(cells))):
            raise InvalidModel("Registry ids must be contiguous from 0")
        return cls(cell_km=cell_km, cells=cells)


def grid_cell(
    record: GpsRecord, cell_km: float, cosine: Union[CosineMode, str] = CosineMode.LISTING
) -> Tuple[int, int]:
    """(j_lat, j_long) grid indices of one record.

    Raises:
        DegenerateCell: If the longitude scale vanishes
    """
    j_lat = int(np.floor(record.lat * KM_PER_DEGREE_LAT / cell_km))
    mode = CosineMode(cosine)
    if mode == CosineMode.LISTING:
        latitude = j_lat * KM_PER_DEGREE_LAT / cell_km
    elif mode == CosineMode.CELL:
        latitude = j_lat * cell_km / KM_PER_DEGREE_LAT
    else:
        latitude = record.lat
    scale = abs(np.cos(np.deg2rad(latitude)))
    if scale < MIN_COSINE:
        raise DegenerateCell(latitude, scale)
    j_long = int(np.floor(record.lon * KM_PER_DEGREE_LON * scale / cell_km))
    return j_lat, j_long


def gps_to_states(
    records: Iterable[GpsRecord],
    cell_km: float,
    bbox: Optional[BoundingBox] = None,
    cosine: Union[CosineMode, str] = CosineMode.LISTING,
    sort_by_timestamp: bool = False,
    registry: Optional[GridRegistry] = None,
) -> Tuple[SamplePath, GridRegistry]:
    """Map a time-ordered trace to grid-cell states.

    Records outside ``bbox`` are dropped first. Each remaining record is
    placed in its grid cell and new cells get the next free id.

    Args:
        records: Time-ordered GPS records
        cell_km: Cell side length x in kilometers
        bbox: Optional open bounding box
        cosine: Latitude used for the longitude cell width
        sort_by_timestamp: Sort records by timestamp string first
        registry: Registry to extend (a new one by default)

    Returns:
        ``(path, registry)``; the path vocabulary holds the registry keys

    Raises:
        DegenerateCell: Near the poles
        ValueError: If ``cell_km`` is not positive or no record remains
    """
    if not cell_km > 0:
        raise ValueError(f"Cell size must be positive, got {cell_km}")
    if registry is None:
        registry = GridRegistry(cell_km=cell_km)
    trace: List[GpsRecord] = list(records)
    if sort_by_timestamp:
        trace.sort(key=lambda record: record.timestamp)
    kept = [record for record in trace if bbox is None or bbox.contains(record)]
    if len(kept) < len(trace):
        logger.info(f"Dropped {len(trace) - len(kept)} records outside the bounding box")
    if not kept:
        raise ValueError("No GPS record left to convert")

    symbols = np.array([registry.state_of(grid_cell(r, cell_km, cosine)) for r in kept], dtype=np.int64)
    vocabulary = tuple(registry.to_dict())
    logger.info(f"Mapped {len(kept)} records onto {len(registry)} grid cells of {cell_km} km")
    return SamplePath(n=len(registry), symbols=symbols, vocabulary=vocabulary), registry
