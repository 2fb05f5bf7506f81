"""Per-entity emergence series and the normalization primitives."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np

from .ingest import EmergingDataset


@dataclass
class EmergenceSeries:
    """Daily document counts from first mention up to the day before
    page creation; index 0 is the first-mention day."""

    entity_id: str
    start_day: int
    values: np.ndarray
    news: np.ndarray | None = None
    social: np.ndarray | None = None

    @property
    def duration(self) -> int:
        return len(self.values)

    @property
    def volume(self) -> int:
        return int(self.values.sum())

    @property
    def velocity(self) -> float:
        return self.volume / self.duration


def build_series(
    dataset: EmergingDataset, entity_id: str, include_streams: bool = True
) -> EmergenceSeries:
    """Zero-filled daily count series for one entity in the dataset."""
    ent = dataset.entities.get(entity_id)
    if ent is None:
        raise KeyError(entity_id)
    start = ent.first_day
    length = ent.creation_day - start
    offsets = ent.days - start
    news = np.zeros(length, dtype=np.int64)
    social = np.zeros(length, dtype=np.int64)
    news[offsets] = ent.news
    social[offsets] = ent.social
    values = news + social
    if include_streams:
        return EmergenceSeries(entity_id, start, values, news, social)
    return EmergenceSeries(entity_id, start, values)


def iter_series(dataset: EmergingDataset, include_streams: bool = True) -> Iterator[EmergenceSeries]:
    for eid in dataset.entities:
        yield build_series(dataset, eid, include_streams)


def interpolate(series, length: int) -> np.ndarray:
    """Linearly resample onto ``length`` points with endpoints preserved.

    Source samples are mapped uniformly onto [0, length-1], so position i
    reads the piecewise-linear source at i*(n-1)/(length-1).
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("series must be a nonempty 1-d sequence")
    if length < 1:
        raise ValueError(f"target length must be >= 1, got {length}")
    n = x.size
    if n == 1:
        return np.full(length, x[0], dtype=np.float64)
    if length == 1:
        raise ValueError("target length 1 is only defined for length-1 input")
    positions = np.linspace(0.0, n - 1.0, length)
    return np.interp(positions, np.arange(n, dtype=np.float64), x)


def standardize(series) -> np.ndarray:
    """Z-score with population standard deviation; constant input maps to
    all zeros so degenerate entities stay usable downstream."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("series must be a nonempty 1-d sequence")
    centered = x - x.mean()
    std = np.sqrt(np.mean(centered * centered))
    if std == 0.0:
        return np.zeros_like(x)
    return centered / std


def write_series_csv(series_iter, fh: IO[str]) -> int:
    """CSV rows ``entity_id, start_day, v0, v1, ...``; returns row count."""
    writer = csv.writer(fh, lineterminator="\n")
    n = 0
    for s in series_iter:
        writer.writerow([s.entity_id, s.start_day] + [int(v) for v in s.values])
        n += 1
    return n


def series_to_dict(s: EmergenceSeries) -> dict:
    obj = {
        "entity_id": s.entity_id,
        "start_day": s.start_day,
        "values": [int(v) for v in s.values],
    }
    if s.news is not None:
        obj["news"] = [int(v) for v in s.news]
    if s.social is not None:
        obj["social"] = [int(v) for v in s.social]
    return obj


def write_series_json(series_iter, fh: IO[str]) -> int:
    items = [series_to_dict(s) for s in series_iter]
    json.dump(items, fh, sort_keys=True)
    fh.write("\n")
    return len(items)
