"""Group signatures, descriptive statistics, significance tests, stream
partitioning, and the entity-type report."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import chi2, norm

from .bursts import BurstSet, burst_stats
from .ingest import EmergingDataset
from .timeseries import EmergenceSeries, interpolate, standardize


@dataclass(frozen=True)
class TripleStat:
    mean: float
    std: float
    median: float


def _triple(values) -> TripleStat:
    x = np.asarray(values, dtype=np.float64)
    return TripleStat(float(x.mean()), float(x.std()), float(np.median(x)))


@dataclass(frozen=True)
class EntityFeatures:
    """Per-entity emergence features feeding the group statistics."""

    entity_id: str
    duration: int
    volume: int
    velocity: float
    n_bursts: int
    burst_duration: float
    burst_value: float


def entity_features(series: EmergenceSeries, bs: BurstSet) -> EntityFeatures:
    n, mean_dur, mean_val = burst_stats(bs)
    return EntityFeatures(
        entity_id=series.entity_id,
        duration=series.duration,
        volume=series.volume,
        velocity=series.volume / series.duration,
        n_bursts=n,
        burst_duration=mean_dur,
        burst_value=mean_val,
    )


@dataclass
class GroupStats:
    """Mean/std/median triples of the six emergence features for one group.

    Velocity statistics are computed from per-entity volume/duration
    ratios, not from ratios of the group means. Burst triples are None when
    burst detection results were not supplied.
    """

    name: str
    n: int
    duration: TripleStat
    volume: TripleStat
    velocity: TripleStat
    n_bursts: TripleStat | None = None
    burst_duration: TripleStat | None = None
    burst_value: TripleStat | None = None


def descriptive_stats(features: Sequence[EntityFeatures], name: str = "group",
                      with_bursts: bool = True) -> GroupStats:
    if not features:
        raise ValueError("empty group")
    return GroupStats(
        name=name,
        n=len(features),
        duration=_triple([f.duration for f in features]),
        volume=_triple([f.volume for f in features]),
        velocity=_triple([f.velocity for f in features]),
        n_bursts=_triple([f.n_bursts for f in features]) if with_bursts else None,
        burst_duration=_triple([f.burst_duration for f in features]) if with_bursts else None,
        burst_value=_triple([f.burst_value for f in features]) if with_bursts else None,
    )


@dataclass
class GroupSignature:
    """Pointwise mean and std of the standardized, length-normalized
    member series of a group."""

    length: int
    mean_curve: np.ndarray
    std_curve: np.ndarray
    n_members: int


def group_signature(series_list: Sequence, length: int | None = None) -> GroupSignature:
    """Standardize each member, stretch to a common length, then average.

    ``length`` defaults to the longest member duration, aligning first
    mention and incorporation at the two ends of the axis.
    """
    if not series_list:
        raise ValueError("empty group")
    arrays = [
        np.asarray(s.values if isinstance(s, EmergenceSeries) else s, dtype=np.float64)
        for s in series_list
    ]
    target = length if length is not None else max(a.size for a in arrays)
    if target < 2:
        target = 2
    mat = np.empty((len(arrays), target), dtype=np.float64)
    for i, a in enumerate(arrays):
        mat[i] = interpolate(standardize(a), target)
    return GroupSignature(
        length=target,
        mean_curve=mat.mean(axis=0),
        std_curve=mat.std(axis=0),
        n_members=len(arrays),
    )


def _midranks(pooled: np.ndarray) -> tuple[np.ndarray, float]:
    """1-based mid-ranks with the tie term sum(t^3 - t)."""
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(pooled.size, dtype=np.float64)
    tie_sum = 0.0
    i = 0
    sorted_vals = pooled[order]
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        t = j - i + 1
        avg_rank = 0.5 * (i + j) + 1.0
        ranks[order[i : j + 1]] = avg_rank
        if t > 1:
            tie_sum += t**3 - t
        i = j + 1
    return ranks, tie_sum


def _validate_groups(groups) -> list[np.ndarray]:
    if len(groups) < 2:
        raise ValueError("need at least 2 groups")
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    if any(a.size == 0 for a in arrays):
        raise ValueError("groups must be nonempty")
    if sum(a.size for a in arrays) < 3:
        raise ValueError("need at least 3 observations in total")
    return arrays


def kruskal_wallis(groups: Sequence) -> tuple[float, float]:
    """Rank-based one-way test across groups.

    H = 12/(N(N+1)) * sum R_i^2/n_i - 3(N+1), mid-ranked with the tie
    correction H / (1 - sum(t^3 - t)/(N^3 - N)); p from chi-square with
    len(groups)-1 degrees of freedom. If all pooled values are identical
    the statistic is undefined; returns (0.0, 1.0).
    """
    arrays = _validate_groups(groups)
    sizes = [a.size for a in arrays]
    pooled = np.concatenate(arrays)
    big_n = pooled.size
    ranks, tie_sum = _midranks(pooled)
    h = 0.0
    offset = 0
    for size in sizes:
        r = ranks[offset : offset + size].sum()
        h += r * r / size
        offset += size
    h = 12.0 / (big_n * (big_n + 1.0)) * h - 3.0 * (big_n + 1.0)
    denom = 1.0 - tie_sum / (big_n**3 - big_n)
    if denom <= 0.0:
        return 0.0, 1.0
    h /= denom
    p = float(chi2.sf(h, len(arrays) - 1))
    return float(h), p


def holm_bonferroni(pvals: Sequence[float]) -> list[float]:
    """Step-down family-wise adjustment; monotone and >= raw p-values."""
    m = len(pvals)
    order = sorted(range(m), key=lambda i: pvals[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, (m - rank) * pvals[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted


def dunn_posthoc(groups: Sequence) -> np.ndarray:
    """Pairwise rank-sum z-tests after a Kruskal-Wallis omnibus test.

    z = (Rbar_i - Rbar_j) / sqrt(sigma2 (1/n_i + 1/n_j)) with the tie-
    corrected sigma2 = N(N+1)/12 - sum(t^3 - t)/(12(N-1)). Two-sided
    p-values, Holm-adjusted; returns a symmetric matrix with unit
    diagonal. Fully tied input yields all-ones.
    """
    arrays = _validate_groups(groups)
    g = len(arrays)
    sizes = [a.size for a in arrays]
    pooled = np.concatenate(arrays)
    big_n = pooled.size
    ranks, tie_sum = _midranks(pooled)
    means = []
    offset = 0
    for size in sizes:
        means.append(ranks[offset : offset + size].mean())
        offset += size
    sigma2 = big_n * (big_n + 1.0) / 12.0 - tie_sum / (12.0 * (big_n - 1.0))
    out = np.ones((g, g), dtype=np.float64)
    if sigma2 <= 0.0:
        return out
    raw = []
    pairs = []
    for i in range(g):
        for j in range(i + 1, g):
            z = (means[i] - means[j]) / np.sqrt(sigma2 * (1.0 / sizes[i] + 1.0 / sizes[j]))
            raw.append(2.0 * float(norm.sf(abs(z))))
            pairs.append((i, j))
    adjusted = holm_bonferroni(raw)
    for (i, j), p in zip(pairs, adjusted):
        out[i, j] = p
        out[j, i] = p
    return out


@dataclass
class StreamPartition:
    """Exhaustive five-way split of the dataset by where entities first
    appear: in both streams (news first, social first, or same day), or in
    exactly one stream."""

    news_first: tuple[str, ...]
    social_first: tuple[str, ...]
    same_time: tuple[str, ...]
    only_news: tuple[str, ...]
    only_social: tuple[str, ...]

    def as_dict(self) -> dict[str, tuple[str, ...]]:
        return {
            "news_first": self.news_first,
            "social_first": self.social_first,
            "same_time": self.same_time,
            "only_news": self.only_news,
            "only_social": self.only_social,
        }

    def sizes(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.as_dict().items()}


def partition_by_stream(dataset: EmergingDataset) -> StreamPartition:
    news_first = []
    social_first = []
    same_time = []
    only_news = []
    only_social = []
    for eid, ent in dataset.entities.items():
        fn = ent.first_news_day
        fs = ent.first_social_day
        if fn is not None and fs is not None:
            if fn < fs:
                news_first.append(eid)
            elif fs < fn:
                social_first.append(eid)
            else:
                same_time.append(eid)
        elif fn is not None:
            only_news.append(eid)
        else:
            only_social.append(eid)
    return StreamPartition(
        news_first=tuple(news_first),
        social_first=tuple(social_first),
        same_time=tuple(same_time),
        only_news=tuple(only_news),
        only_social=tuple(only_social),
    )


def cross_stream_lag(dataset: EmergingDataset) -> tuple[float, float]:
    """Mean first-mention lag in days for entities present in both streams:
    (news-then-social, social-then-news). A direction with no entities
    yields nan."""
    news_to_social = []
    social_to_news = []
    seen_both = 0
    for ent in dataset.entities.values():
        fn = ent.first_news_day
        fs = ent.first_social_day
        if fn is None or fs is None:
            continue
        seen_both += 1
        if fn < fs:
            news_to_social.append(fs - fn)
        elif fs < fn:
            social_to_news.append(fn - fs)
    if seen_both == 0:
        raise ValueError("no entities present in both streams")
    mean_ns = float(np.mean(news_to_social)) if news_to_social else float("nan")
    mean_sn = float(np.mean(social_to_news)) if social_to_news else float("nan")
    return mean_ns, mean_sn


NULL_TYPE = "null"


@dataclass
class TypeRow:
    stats: GroupStats
    pageviews: TripleStat | None
    rank: int | None


@dataclass
class TypeReport:
    """Per-type emergence statistics plus a popularity ranking.

    An entity contributes to every type row it is labeled with; label-free
    entities form the null row, which is always reported and never ranked.
    Ranks over the labeled rows are a permutation 1..T by descending mean
    pageviews.
    """

    rows: list[TypeRow]
    min_count: int

    def row(self, type_name: str) -> TypeRow:
        for r in self.rows:
            if r.stats.name == type_name:
                return r
        raise KeyError(type_name)


def type_report(
    dataset: EmergingDataset,
    burst_map: Mapping[str, BurstSet] | None = None,
    min_count: int = 400,
) -> TypeReport:
    from .timeseries import build_series

    by_type: dict[str, list[str]] = {}
    null_members: list[str] = []
    for eid, ent in dataset.entities.items():
        if ent.type_labels:
            for label in ent.type_labels:
                by_type.setdefault(label, []).append(eid)
        else:
            null_members.append(eid)

    feature_cache: dict[str, EntityFeatures] = {}

    def features_of(eid: str) -> EntityFeatures:
        feat = feature_cache.get(eid)
        if feat is None:
            series = build_series(dataset, eid, include_streams=False)
            if burst_map is not None:
                feat = entity_features(series, burst_map[eid])
            else:
                feat = EntityFeatures(
                    entity_id=eid,
                    duration=series.duration,
                    volume=series.volume,
                    velocity=series.volume / series.duration,
                    n_bursts=0,
                    burst_duration=0.0,
                    burst_value=0.0,
                )
            feature_cache[eid] = feat
        return feat

    selected = [
        (label, members)
        for label, members in by_type.items()
        if len(members) >= min_count
    ]

    entries: list[tuple[str, list[str]]] = selected + [(NULL_TYPE, null_members)]
    rows: list[TypeRow] = []
    for label, members in entries:
        if not members:
            continue
        feats = [features_of(eid) for eid in members]
        stats = descriptive_stats(feats, name=label, with_bursts=burst_map is not None)
        pv = [
            dataset.entities[eid].pageviews
            for eid in members
            if dataset.entities[eid].pageviews is not None
        ]
        rows.append(TypeRow(stats=stats, pageviews=_triple(pv) if pv else None, rank=None))

    ranked = [r for r in rows if r.stats.name != NULL_TYPE]
    ranked.sort(
        key=lambda r: (
            -(r.pageviews.mean if r.pageviews else float("-inf")),
            r.stats.name,
        )
    )
    for pos, r in enumerate(ranked, start=1):
        r.rank = pos

    rows.sort(key=lambda r: (r.stats.name == NULL_TYPE, -r.stats.n, r.stats.name))
    return TypeReport(rows=rows, min_count=min_count)


def duration_in_stream_triple(
    dataset: EmergingDataset, members: Sequence[str], stream: str
) -> TripleStat | None:
    """Creation-relative duration measured from the first mention in one
    stream, over the members that appear in that stream."""
    values = []
    for eid in members:
        ent = dataset.entities[eid]
        first = ent.first_news_day if stream == "news" else ent.first_social_day
        if first is not None:
            values.append(ent.creation_day - first)
    return _triple(values) if values else None
