"""Burst detection via moving-average thresholding."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THRESHOLD_CENTERED = "centered"
THRESHOLD_BARE = "bare"


@dataclass(frozen=True)
class Burst:
    start: int
    end: int  # inclusive
    peak: float

    @property
    def width(self) -> int:
        return self.end - self.start + 1


@dataclass
class BurstSet:
    """Detected bursts of one series plus the detection parameters.

    ``source_total`` is the sum of the raw input series; burst peaks are
    taken on the smoothed series.
    """

    bursts: list[Burst]
    source_length: int
    window: int
    cutoff_sigma: float
    source_total: float

    def __len__(self) -> int:
        return len(self.bursts)


def moving_average(series, window: int) -> np.ndarray:
    """Trailing mean over up to ``window`` samples, truncated at the left
    boundary; output has the input's length."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("series must be a nonempty 1-d sequence")
    c = np.cumsum(x)
    n = x.size
    if n <= window:
        return c / np.arange(1, n + 1, dtype=np.float64)
    out = np.empty(n, dtype=np.float64)
    out[:window] = c[:window] / np.arange(1, window + 1, dtype=np.float64)
    out[window:] = (c[window:] - c[:-window]) / float(window)
    return out


def detect_bursts(
    series,
    window: int = 7,
    cutoff_sigma: float = 1.5,
    threshold_mode: str = THRESHOLD_CENTERED,
) -> BurstSet:
    """Maximal runs where the smoothed series strictly exceeds the cutoff.

    The default cutoff is mean(MA) + cutoff_sigma * std(MA); ``bare`` mode
    uses cutoff_sigma * std(MA) with no centering. Constant input has zero
    dispersion, so the strict comparison yields no bursts in the default
    mode.
    """
    if threshold_mode not in (THRESHOLD_CENTERED, THRESHOLD_BARE):
        raise ValueError(f"unknown threshold_mode {threshold_mode!r}")
    x = np.asarray(series, dtype=np.float64)
    ma = moving_average(x, window)
    sigma = float(ma.std())
    if threshold_mode == THRESHOLD_CENTERED:
        cutoff = float(ma.mean()) + cutoff_sigma * sigma
    else:
        cutoff = cutoff_sigma * sigma
    mask = ma > cutoff
    edges = np.flatnonzero(np.diff(np.concatenate(([0], mask.astype(np.int8), [0]))))
    starts = edges[0::2]
    ends = edges[1::2] - 1
    bursts = [
        Burst(int(s), int(e), float(ma[s : e + 1].max()))
        for s, e in zip(starts, ends)
    ]
    return BurstSet(
        bursts=bursts,
        source_length=int(x.size),
        window=window,
        cutoff_sigma=cutoff_sigma,
        source_total=float(x.sum()),
    )


def burst_stats(bs: BurstSet) -> tuple[int, float, float]:
    """(count, mean width / series length, mean peak / series total)."""
    if not bs.bursts:
        return 0, 0.0, 0.0
    widths = np.asarray([b.width for b in bs.bursts], dtype=np.float64)
    peaks = np.asarray([b.peak for b in bs.bursts], dtype=np.float64)
    mean_duration = float(widths.mean()) / bs.source_length
    if bs.source_total > 0:
        mean_value = float(peaks.mean()) / bs.source_total
    else:
        mean_value = 0.0
    return len(bs.bursts), mean_duration, mean_value


def burstset_to_dict(bs: BurstSet, entity_id: str | None = None) -> dict:
    """JSON shape with intervals both in absolute indices and relative
    [0, 1) coordinates."""
    length = bs.source_length
    obj = {
        "source_length": bs.source_length,
        "window": bs.window,
        "cutoff_sigma": bs.cutoff_sigma,
        "source_total": bs.source_total,
        "bursts": [[b.start, b.end, b.peak] for b in bs.bursts],
        "relative": [[b.start / length, (b.end + 1) / length] for b in bs.bursts],
    }
    if entity_id is not None:
        obj["entity_id"] = entity_id
    return obj


def burstset_from_dict(obj: dict) -> BurstSet:
    return BurstSet(
        bursts=[Burst(int(s), int(e), float(p)) for s, e, p in obj["bursts"]],
        source_length=int(obj["source_length"]),
        window=int(obj["window"]),
        cutoff_sigma=float(obj["cutoff_sigma"]),
        source_total=float(obj["source_total"]),
    )
