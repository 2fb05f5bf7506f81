"""Mention-stream ingestion: parsing, metadata join, and the filtering cascade.

Input files are newline-delimited UTF-8. The mention format is
``doc_day<TAB>doc_id<TAB>stream<TAB>entity_id`` (or JSON lines with the same
field names); the metadata format is
``entity_id<TAB>creation_day<TAB>type1,type2,...<TAB>pageviews`` where an
empty type field means the null class and an empty pageview field means the
value is unknown.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

import numpy as np

STREAM_NEWS = "news"
STREAM_SOCIAL = "social"
STREAMS = (STREAM_NEWS, STREAM_SOCIAL)

# Cascade stages, in order. Entity counts are nonincreasing from
# "with_metadata" onward; "parsed" may include entities without metadata.
STAGE_NAMES = ("parsed", "with_metadata", "pre_creation", "within_span", "min_docs")


class ParseError(ValueError):
    """Raised in strict mode on the first invalid input line."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class InputError(ValueError):
    """A required input is missing, unreadable, or inconsistent."""


@dataclass(frozen=True)
class MentionRecord:
    """One (document, entity) co-occurrence at day granularity."""

    doc_day: int
    doc_id: str
    stream: str
    entity_id: str


@dataclass(frozen=True)
class EntityMeta:
    """Knowledge-base facts for one entity.

    ``creation_day`` is the day index on which the entity's encyclopedia
    page was created; an empty ``type_labels`` set is the null class.
    """

    entity_id: str
    creation_day: int
    type_labels: frozenset[str] = frozenset()
    pageviews: int | None = None


@dataclass(frozen=True)
class StageCount:
    stage: str
    entities: int
    mentions: int
    documents: int


@dataclass
class FilterReport:
    """Per-stage survivor counts of the dataset-filtering cascade."""

    stages: list[StageCount]
    skipped: dict[str, int] = field(default_factory=dict)
    extras: dict[str, int] = field(default_factory=dict)

    def stage(self, name: str) -> StageCount:
        for s in self.stages:
            if s.stage == name:
                return s
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "stages": [
                {
                    "stage": s.stage,
                    "entities": s.entities,
                    "mentions": s.mentions,
                    "documents": s.documents,
                }
                for s in self.stages
            ],
            "skipped": {k: self.skipped[k] for k in sorted(self.skipped)},
            "extras": {k: self.extras[k] for k in sorted(self.extras)},
        }

    def to_csv_rows(self) -> list[list[str]]:
        """Rows shaped like the acquisition-statistics table: counts plus
        coverage over the preceding stage."""
        rows = [
            [
                "stage",
                "entities",
                "entities_pct",
                "mentions",
                "mentions_pct",
                "documents",
                "documents_pct",
            ]
        ]
        prev: StageCount | None = None
        for s in self.stages:
            def pct(cur: int, ref: int | None) -> str:
                if ref is None or ref == 0:
                    return ""
                return f"{100.0 * cur / ref:.1f}"

            rows.append(
                [
                    s.stage,
                    str(s.entities),
                    pct(s.entities, prev.entities if prev else None),
                    str(s.mentions),
                    pct(s.mentions, prev.mentions if prev else None),
                    str(s.documents),
                    pct(s.documents, prev.documents if prev else None),
                ]
            )
            prev = s
        return rows


@dataclass
class EntityData:
    """Aggregated pre-creation mention counts for one emerging entity.

    ``days`` holds the day indices with at least one counted mention,
    sorted ascending; ``news``/``social`` are the per-day counts aligned
    with ``days``.
    """

    entity_id: str
    creation_day: int
    days: np.ndarray
    news: np.ndarray
    social: np.ndarray
    type_labels: frozenset[str] = frozenset()
    pageviews: int | None = None

    @property
    def first_day(self) -> int:
        return int(self.days[0])

    @property
    def duration(self) -> int:
        return self.creation_day - self.first_day

    @property
    def volume(self) -> int:
        return int(self.news.sum() + self.social.sum())

    @property
    def velocity(self) -> float:
        return self.volume / self.duration

    @property
    def first_news_day(self) -> int | None:
        nz = self.days[self.news > 0]
        return int(nz[0]) if nz.size else None

    @property
    def first_social_day(self) -> int | None:
        nz = self.days[self.social > 0]
        return int(nz[0]) if nz.size else None


@dataclass
class EmergingDataset:
    """The filtered emerging-entity dataset, keyed by entity id (sorted)."""

    entities: dict[str, EntityData]
    span: tuple[int, int]
    count_mode: str = "documents"

    def __len__(self) -> int:
        return len(self.entities)

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self.entities

    def ids(self) -> list[str]:
        return list(self.entities)


def _decode(value) -> str:
    return value.decode("utf-8") if isinstance(value, bytes) else value


def parse_mentions(
    source: IO[bytes] | str,
    fmt: str = "tsv",
    strict: bool = False,
    stats: Counter | None = None,
) -> Iterator[MentionRecord]:
    """Yield mention records from a newline-delimited byte stream.

    Malformed lines are counted under ``stats["malformed_lines"]`` and
    skipped; in strict mode the first malformed line raises ParseError
    with its line number.
    """
    if fmt not in ("tsv", "jsonl"):
        raise ValueError(f"unknown mention format: {fmt}")
    close = False
    if isinstance(source, str):
        source = open(source, "rb")
        close = True
    try:
        for line_no, raw in enumerate(source, start=1):
            line = raw.rstrip(b"\r\n")
            if not line:
                continue
            rec = None
            reason = ""
            if fmt == "tsv":
                parts = line.split(b"\t")
                if len(parts) != 4:
                    reason = f"expected 4 tab-separated fields, got {len(parts)}"
                else:
                    day_b, doc_b, stream_b, ent_b = parts
                    try:
                        day = int(day_b)
                    except ValueError:
                        day = None
                        reason = f"bad day field {day_b!r}"
                    if day is not None:
                        stream = _decode(stream_b)
                        if stream not in STREAMS:
                            reason = f"unknown stream tag {stream!r}"
                        elif not doc_b or not ent_b:
                            reason = "empty doc_id or entity_id"
                        else:
                            rec = MentionRecord(day, _decode(doc_b), stream, _decode(ent_b))
            else:
                try:
                    obj = json.loads(line)
                    day = obj["doc_day"]
                    doc = obj["doc_id"]
                    stream = obj["stream"]
                    ent = obj["entity_id"]
                    if (
                        not isinstance(day, int)
                        or stream not in STREAMS
                        or not isinstance(doc, str)
                        or not isinstance(ent, str)
                        or not doc
                        or not ent
                    ):
                        reason = "bad field types or values"
                    else:
                        rec = MentionRecord(day, doc, stream, ent)
                except (json.JSONDecodeError, KeyError, TypeError, UnicodeDecodeError) as exc:
                    reason = f"bad json line: {exc}"
            if rec is None:
                if strict:
                    raise ParseError(line_no, reason)
                if stats is not None:
                    stats["malformed_lines"] += 1
                continue
            yield rec
    finally:
        if close:
            source.close()


def parse_metadata(
    source: IO[bytes] | str,
    strict: bool = False,
    stats: Counter | None = None,
) -> dict[str, EntityMeta]:
    """Load the entity metadata table; duplicate ids keep the first row."""
    close = False
    if isinstance(source, str):
        source = open(source, "rb")
        close = True
    metas: dict[str, EntityMeta] = {}
    try:
        for line_no, raw in enumerate(source, start=1):
            line = raw.rstrip(b"\r\n")
            if not line:
                continue
            parts = line.split(b"\t")
            reason = ""
            if len(parts) != 4:
                reason = f"expected 4 tab-separated fields, got {len(parts)}"
            else:
                ent_b, creation_b, types_b, pv_b = parts
                ent = _decode(ent_b)
                if not ent:
                    reason = "empty entity_id"
                elif ent in metas:
                    reason = f"duplicate entity_id {ent!r}"
                else:
                    try:
                        creation = int(creation_b)
                    except ValueError:
                        creation = None
                        reason = f"bad creation_day {creation_b!r}"
                    pv: int | None = None
                    if creation is not None and pv_b:
                        try:
                            pv = int(pv_b)
                        except ValueError:
                            reason = f"bad pageviews {pv_b!r}"
                        else:
                            if pv < 0:
                                reason = "negative pageviews"
                                pv = None
                    if creation is not None and not reason:
                        labels = frozenset(
                            t for t in _decode(types_b).split(",") if t
                        )
                        metas[ent] = EntityMeta(ent, creation, labels, pv)
                        continue
            if strict:
                raise ParseError(line_no, reason)
            if stats is not None:
                stats["malformed_metadata_lines"] += 1
    finally:
        if close:
            source.close()
    return metas


def is_emerging_mention(record: MentionRecord, meta: EntityMeta) -> bool:
    """True iff the mention predates the entity's page creation."""
    if record.entity_id != meta.entity_id:
        raise ValueError(
            f"entity mismatch: record {record.entity_id!r} vs meta {meta.entity_id!r}"
        )
    return record.doc_day < meta.creation_day


class _EntityAgg:
    __slots__ = ("news", "social", "occ_news", "occ_social", "records")

    def __init__(self):
        self.news: dict = {}
        self.social: dict = {}
        self.occ_news: dict = {}
        self.occ_social: dict = {}
        self.records = 0


class _CascadeAggregator:
    """Single-pass aggregation behind the filtering cascade.

    Per-entity merges are associative and commutative; identical inputs
    give identical reports regardless of record order.
    """

    def __init__(self, metas: Mapping, span: tuple[int, int], min_docs: int,
                 count_mode: str = "documents"):
        if min_docs < 1:
            raise ValueError("min_docs must be >= 1")
        if span[0] > span[1]:
            raise ValueError(f"malformed span {span}")
        if count_mode not in ("documents", "occurrences"):
            raise ValueError(f"unknown count_mode {count_mode!r}")
        self.metas = metas
        self.span = span
        self.min_docs = min_docs
        self.count_mode = count_mode
        self.occurrences = count_mode == "occurrences"
        self.per_entity: dict = {}
        self.docs_parsed: set = set()
        self.docs_meta: set = set()
        self.docs_pre: set = set()
        self.ents_parsed: set = set()
        self.ents_meta: set = set()
        self.m_parsed = 0
        self.m_meta = 0
        self.m_pre = 0
        self.skipped: Counter = Counter()

    def add(self, day: int, doc, stream_idx: int, ent) -> None:
        self.m_parsed += 1
        self.docs_parsed.add(doc)
        self.ents_parsed.add(ent)
        meta = self.metas.get(ent)
        if meta is None:
            self.skipped["mentions_without_metadata"] += 1
            return
        self.m_meta += 1
        self.docs_meta.add(doc)
        self.ents_meta.add(ent)
        if day >= meta.creation_day:
            self.skipped["post_creation_mentions"] += 1
            return
        self.m_pre += 1
        self.docs_pre.add(doc)
        agg = self.per_entity.get(ent)
        if agg is None:
            agg = self.per_entity[ent] = _EntityAgg()
        agg.records += 1
        docs = agg.news if stream_idx == 0 else agg.social
        if doc not in docs:
            docs[doc] = day
        if self.occurrences:
            occ = agg.occ_news if stream_idx == 0 else agg.occ_social
            occ[day] = occ.get(day, 0) + 1

    def finalize(self) -> tuple[EmergingDataset, FilterReport]:
        span_start, span_end = self.span
        survivors = []
        m4 = m5 = 0
        ents4 = 0
        docs4: set = set()
        docs5: set = set()
        for ent, agg in self.per_entity.items():
            meta = self.metas[ent]
            c = meta.creation_day
            if not (span_start < c <= span_end):
                continue
            ents4 += 1
            m4 += agg.records
            docs4.update(agg.news)
            docs4.update(agg.social)
            # Distinct documents across both streams; the same doc id in
            # both streams counts once toward min_docs.
            if agg.news and agg.social:
                small, big = (
                    (agg.news, agg.social)
                    if len(agg.news) <= len(agg.social)
                    else (agg.social, agg.news)
                )
                overlap = sum(1 for d in small if d in big)
            else:
                overlap = 0
            if len(agg.news) + len(agg.social) - overlap < self.min_docs:
                continue
            m5 += agg.records
            docs5.update(agg.news)
            docs5.update(agg.social)
            survivors.append((_decode(ent), agg, meta))

        survivors.sort(key=lambda t: t[0])
        entities: dict[str, EntityData] = {}
        n_news = n_social = 0
        for eid, agg, meta in survivors:
            if self.occurrences:
                cnt_news = agg.occ_news
                cnt_social = agg.occ_social
            else:
                cnt_news = Counter(agg.news.values())
                cnt_social = Counter(agg.social.values())
            days = sorted(set(cnt_news) | set(cnt_social))
            days_arr = np.asarray(days, dtype=np.int64)
            news_arr = np.fromiter(
                (cnt_news.get(d, 0) for d in days), dtype=np.int64, count=len(days)
            )
            social_arr = np.fromiter(
                (cnt_social.get(d, 0) for d in days), dtype=np.int64, count=len(days)
            )
            if cnt_news:
                n_news += 1
            if cnt_social:
                n_social += 1
            entities[eid] = EntityData(
                entity_id=eid,
                creation_day=meta.creation_day,
                days=days_arr,
                news=news_arr,
                social=social_arr,
                type_labels=meta.type_labels,
                pageviews=meta.pageviews,
            )

        stages = [
            StageCount("parsed", len(self.ents_parsed), self.m_parsed, len(self.docs_parsed)),
            StageCount("with_metadata", len(self.ents_meta), self.m_meta, len(self.docs_meta)),
            StageCount("pre_creation", len(self.per_entity), self.m_pre, len(self.docs_pre)),
            StageCount("within_span", ents4, m4, len(docs4)),
            StageCount("min_docs", len(entities), m5, len(docs5)),
        ]
        report = FilterReport(
            stages=stages,
            skipped=dict(self.skipped),
            extras={
                "final_entities_in_news": n_news,
                "final_entities_in_social": n_social,
            },
        )
        dataset = EmergingDataset(entities=entities, span=self.span, count_mode=self.count_mode)
        return dataset, report


def build_dataset(
    mentions: Iterable[MentionRecord],
    metas: Mapping[str, EntityMeta],
    span: tuple[int, int],
    min_docs: int = 5,
    count_mode: str = "documents",
    strict: bool = False,
    parse_stats: Counter | None = None,
) -> tuple[EmergingDataset, FilterReport]:
    """Join mention records with metadata and apply the filtering cascade.

    Retained entities have only pre-creation mentions counted, a creation
    day inside the corpus span, and at least ``min_docs`` distinct
    mentioning documents. Mentions dated outside the span are dropped and
    counted (strict mode aborts on them instead).
    """
    agg = _CascadeAggregator(metas, span, min_docs, count_mode)
    span_start, span_end = span
    add = agg.add
    for i, rec in enumerate(mentions, start=1):
        if not span_start <= rec.doc_day <= span_end:
            if strict:
                raise ParseError(i, f"doc_day {rec.doc_day} outside span {span}")
            agg.skipped["out_of_span_mentions"] += 1
            continue
        add(rec.doc_day, rec.doc_id, 0 if rec.stream == STREAM_NEWS else 1, rec.entity_id)
    dataset, report = agg.finalize()
    if parse_stats:
        for k, v in parse_stats.items():
            report.skipped[k] = report.skipped.get(k, 0) + v
    return dataset, report


def build_dataset_from_file(
    mention_path: str,
    metas: Mapping[str, EntityMeta],
    span: tuple[int, int],
    min_docs: int = 5,
    fmt: str = "tsv",
    count_mode: str = "documents",
    strict: bool = False,
) -> tuple[EmergingDataset, FilterReport]:
    """File-based fast path of :func:`build_dataset` with identical semantics.

    Avoids per-record object construction; parse errors are folded into the
    report's skipped counters.
    """
    if fmt == "jsonl":
        stats: Counter = Counter()
        with open(mention_path, "rb") as fh:
            dataset, report = build_dataset(
                parse_mentions(fh, fmt="jsonl", strict=strict, stats=stats),
                metas,
                span,
                min_docs,
                count_mode,
                strict,
            )
        for k, v in stats.items():
            report.skipped[k] = report.skipped.get(k, 0) + v
        return dataset, report

    agg = _CascadeAggregator(
        {k.encode("utf-8"): v for k, v in metas.items()}, span, min_docs, count_mode
    )
    span_start, span_end = span
    add = agg.add
    skipped = agg.skipped
    news_tag = b"news"
    social_tag = b"social"
    with open(mention_path, "rb") as fh:
        for line_no, raw in enumerate(fh, start=1):
            parts = raw.split(b"\t")
            if len(parts) != 4:
                if raw.rstrip(b"\r\n") == b"":
                    continue
                if strict:
                    raise ParseError(line_no, "expected 4 tab-separated fields")
                skipped["malformed_lines"] += 1
                continue
            day_b, doc, stream_b, ent = parts
            try:
                day = int(day_b)
            except ValueError:
                if strict:
                    raise ParseError(line_no, f"bad day field {day_b!r}")
                skipped["malformed_lines"] += 1
                continue
            if stream_b == news_tag:
                stream_idx = 0
            elif stream_b == social_tag:
                stream_idx = 1
            else:
                if strict:
                    raise ParseError(line_no, f"unknown stream tag {stream_b!r}")
                skipped["malformed_lines"] += 1
                continue
            ent = ent.rstrip(b"\r\n")
            if not doc or not ent:
                if strict:
                    raise ParseError(line_no, "empty doc_id or entity_id")
                skipped["malformed_lines"] += 1
                continue
            if not span_start <= day <= span_end:
                if strict:
                    raise ParseError(line_no, f"doc_day {day} outside span {span}")
                skipped["out_of_span_mentions"] += 1
                continue
            add(day, doc, stream_idx, ent)
    return agg.finalize()


def write_dataset_jsonl(dataset: EmergingDataset, fh: IO[str], config_hash: str = "") -> None:
    header = {
        "_header": {
            "span": list(dataset.span),
            "count_mode": dataset.count_mode,
            "config_hash": config_hash,
            "n_entities": len(dataset),
        }
    }
    fh.write(json.dumps(header, sort_keys=True) + "\n")
    for eid, ent in dataset.entities.items():
        obj = {
            "entity_id": eid,
            "creation_day": ent.creation_day,
            "days": ent.days.tolist(),
            "news": ent.news.tolist(),
            "social": ent.social.tolist(),
            "types": sorted(ent.type_labels),
            "pageviews": ent.pageviews,
        }
        fh.write(json.dumps(obj, sort_keys=True) + "\n")


def read_dataset_jsonl(fh: IO[str]) -> tuple[EmergingDataset, str]:
    """Returns the dataset and the config hash recorded in the header."""
    first = fh.readline()
    if not first:
        raise InputError("empty dataset file")
    header = json.loads(first).get("_header")
    if header is None:
        raise InputError("dataset file missing header line")
    entities: dict[str, EntityData] = {}
    for line in fh:
        if not line.strip():
            continue
        obj = json.loads(line)
        entities[obj["entity_id"]] = EntityData(
            entity_id=obj["entity_id"],
            creation_day=obj["creation_day"],
            days=np.asarray(obj["days"], dtype=np.int64),
            news=np.asarray(obj["news"], dtype=np.int64),
            social=np.asarray(obj["social"], dtype=np.int64),
            type_labels=frozenset(obj.get("types", [])),
            pageviews=obj.get("pageviews"),
        )
    dataset = EmergingDataset(
        entities=entities,
        span=tuple(header["span"]),
        count_mode=header.get("count_mode", "documents"),
    )
    return dataset, header.get("config_hash", "")
