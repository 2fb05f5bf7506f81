"""Synthetic corpus generators with ground-truth manifests.

The real mention corpora behind this pipeline are not redistributable, so
every desk-scale test runs against generated corpora. Each generator
writes ``mentions.tsv``, ``metadata.tsv``, and ``truth.json`` (the planted
ground truth, including exact expected filtering-cascade counts where the
preset plants violations).
"""
from __future__ import annotations

import json
import os
from collections import Counter

import numpy as np

PRESETS = ("cascade", "two-pop", "curiosity", "throughput")

_TYPE_POOL = (
    "Person",
    "Athlete",
    "Organization",
    "Place",
    "Device",
    "CreativeWork",
    "Software",
    "MusicalWork",
)


def _write_truth(out_dir: str, truth: dict) -> None:
    with open(os.path.join(out_dir, "truth.json"), "w", encoding="utf-8") as fh:
        json.dump(truth, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _meta_line(eid: str, creation: int, labels, pageviews) -> str:
    pv = "" if pageviews is None else str(pageviews)
    return f"{eid}\t{creation}\t{','.join(sorted(labels))}\t{pv}\n"


def planted_burst_series(rng: np.random.Generator, length: int | None = None):
    """A noisy series with 1..3 well-separated rectangular bursts.

    Background is Poisson(1); burst heights are at least 15x the
    background std. Returns (series, planted [start, end] index pairs).
    """
    n = int(length or rng.integers(200, 400))
    series = rng.poisson(1.0, n).astype(np.float64)
    k = int(rng.integers(1, 4))
    base_height = float(rng.uniform(15, 30))
    intervals = []
    cursor = int(rng.integers(5, 25))
    for _ in range(k):
        width = int(rng.integers(7, 13))
        if cursor + width + 30 >= n:
            break
        height = base_height * float(rng.uniform(0.9, 1.1))
        series[cursor : cursor + width] += height
        intervals.append((cursor, cursor + width - 1))
        cursor += width + int(rng.integers(25, 60))
    return series, intervals


def _eb_curve(rng: np.random.Generator, n: int):
    """Early-burst archetype: dominant spike near first mention plus a
    smaller one near incorporation."""
    v = (rng.random(n) < 0.12).astype(np.int64)
    v[0] += 1
    b1 = int(round(float(rng.uniform(0.0, 0.02)) * n))
    w1 = max(3, int(round(0.03 * n)))
    h1 = int(rng.integers(35, 60))
    e1 = min(n, b1 + w1)
    v[b1:e1] += rng.integers(max(1, int(h1 * 0.8)), int(h1 * 1.2) + 1, size=e1 - b1)
    b2 = int(round(0.94 * n))
    w2 = max(2, int(round(0.02 * n)))
    h2 = max(2, int(h1 * 0.3))
    e2 = min(n, b2 + w2)
    v[b2:e2] += rng.integers(max(1, int(h2 * 0.8)), int(h2 * 1.2) + 1, size=e2 - b2)
    return v, (b1, e1 - 1), (b2, e2 - 1)


def _lb_curve(rng: np.random.Generator, n: int):
    """Late-burst archetype: quiet start, mild buildup, dominant spike just
    before incorporation."""
    v = (rng.random(n) < 0.15).astype(np.int64)
    v[0] += int(rng.integers(1, 3))
    ramp = np.floor(np.linspace(0.0, 1.0, n) ** 2 * float(rng.uniform(1.0, 2.5))).astype(
        np.int64
    )
    v += ramp
    b2 = int(round(float(rng.uniform(0.92, 0.94)) * n))
    w2 = max(3, int(round(0.03 * n)))
    h2 = int(rng.integers(35, 60))
    e2 = min(n, b2 + w2)
    v[b2:e2] += rng.integers(max(1, int(h2 * 0.8)), int(h2 * 1.2) + 1, size=e2 - b2)
    return v, None, (b2, e2 - 1)


def gen_two_pop(
    out_dir: str,
    n_eb: int = 500,
    n_lb: int = 500,
    span: tuple[int, int] = (0, 600),
    seed: int = 0,
) -> dict:
    """Two-population corpus with known early/late-burst labels."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    span0, span1 = span
    doc_counter = 0
    entities = {}
    with open(os.path.join(out_dir, "mentions.tsv"), "w", encoding="utf-8") as mfh, open(
        os.path.join(out_dir, "metadata.tsv"), "w", encoding="utf-8"
    ) as tfh:
        for idx in range(n_eb + n_lb):
            label = "EB" if idx < n_eb else "LB"
            eid = f"e{idx:06d}"
            n = int(rng.integers(60, 400))
            creation = int(rng.integers(span0 + n, span1 + 1))
            start = creation - n
            if label == "EB":
                curve, init_b, final_b = _eb_curve(rng, n)
            else:
                curve, init_b, final_b = _lb_curve(rng, n)
            p_news = float(rng.uniform(0.2, 0.8))
            if rng.random() < 0.15:
                p_news = 0.0 if rng.random() < 0.5 else 1.0
            lines = []
            for offset in np.flatnonzero(curve):
                day = start + int(offset)
                for _ in range(int(curve[offset])):
                    doc = f"d{doc_counter:08d}"
                    doc_counter += 1
                    stream = "news" if rng.random() < p_news else "social"
                    lines.append(f"{day}\t{doc}\t{stream}\t{eid}\n")
            mfh.writelines(lines)
            if label == "EB":
                labels = list(rng.choice(["Device", "CreativeWork", "Software"], size=2, replace=False))
                pageviews = int(rng.integers(20_000, 120_000))
            else:
                labels = ["Person"] if rng.random() < 0.7 else []
                pageviews = int(rng.integers(500, 15_000)) if rng.random() < 0.8 else None
            tfh.write(_meta_line(eid, creation, labels, pageviews))
            entities[eid] = {
                "label": label,
                "creation_day": creation,
                "start_day": start,
                "duration": n,
                "volume": int(curve.sum()),
                "initial_burst_rel": [init_b[0] / n, (init_b[1] + 1) / n] if init_b else None,
                "final_burst_rel": [final_b[0] / n, (final_b[1] + 1) / n],
                "curve": curve.tolist(),
            }
    truth = {
        "preset": "two-pop",
        "seed": seed,
        "span": list(span),
        "n_eb": n_eb,
        "n_lb": n_lb,
        "n_records": doc_counter,
        "entities": entities,
    }
    _write_truth(out_dir, truth)
    return truth


def gen_curiosity(out_dir: str, span: tuple[int, int] = (0, 600), seed: int = 0) -> dict:
    """Single 300-day entity with planted spikes near relative positions
    0.1 and 0.95."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    span0, span1 = span
    n = 300
    creation = span0 + n + 20
    start = creation - n
    curve = np.zeros(n, dtype=np.int64)
    curve[0] = 1
    curve[30:35] = 50 + rng.integers(-5, 6, size=5)
    curve[285:290] = 80 + rng.integers(-5, 6, size=5)
    doc_counter = 0
    with open(os.path.join(out_dir, "mentions.tsv"), "w", encoding="utf-8") as mfh:
        for offset in np.flatnonzero(curve):
            day = start + int(offset)
            for _ in range(int(curve[offset])):
                doc = f"d{doc_counter:08d}"
                doc_counter += 1
                stream = "news" if doc_counter % 2 else "social"
                mfh.write(f"{day}\t{doc}\t{stream}\te000000\n")
    with open(os.path.join(out_dir, "metadata.tsv"), "w", encoding="utf-8") as tfh:
        tfh.write(_meta_line("e000000", creation, ["Device"], 250_000))
    truth = {
        "preset": "curiosity",
        "seed": seed,
        "span": list(span),
        "entities": {
            "e000000": {
                "creation_day": creation,
                "start_day": start,
                "duration": n,
                "bursts_rel": [[30 / n, 35 / n], [285 / n, 290 / n]],
                "curve": curve.tolist(),
            }
        },
    }
    _write_truth(out_dir, truth)
    return truth


def gen_cascade(
    out_dir: str,
    n_entities: int = 10_000,
    span: tuple[int, int] = (0, 600),
    min_docs: int = 5,
    seed: int = 0,
) -> dict:
    """Corpus with planted filtering violations and an exact expected
    cascade report.

    Categories: valid survivors; low_docs (fewer than min_docs distinct
    documents); late_creation (creation after the span end); post_only
    (all mentions on or after creation); no_meta (no metadata row). Also
    plants duplicate mentions, malformed lines, and out-of-span lines.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    span0, span1 = span

    n_valid = int(n_entities * 0.70)
    n_low = int(n_entities * 0.10)
    n_late = int(n_entities * 0.10)
    n_post = int(n_entities * 0.05)
    n_nometa = n_entities - n_valid - n_low - n_late - n_post

    categories = (
        ["valid"] * n_valid + ["low_docs"] * n_low + ["late_creation"] * n_late
        + ["post_only"] * n_post + ["no_meta"] * n_nometa
    )

    doc_counter = 0
    skipped = Counter()
    # Stage keys: parsed, with_metadata, pre_creation, within_span, min_docs
    mention_counts = Counter()
    doc_sets: dict[str, set] = {k: set() for k in
                                ("parsed", "with_metadata", "pre_creation", "within_span", "min_docs")}
    entity_sets: dict[str, set] = {k: set() for k in doc_sets}
    final_news: set = set()
    final_social: set = set()
    out_of_span_lines: list[str] = []

    def emit(lines, eid, day, doc, stream, has_meta, is_pre, within, final):
        lines.append(f"{day}\t{doc}\t{stream}\t{eid}\n")
        mention_counts["parsed"] += 1
        doc_sets["parsed"].add(doc)
        entity_sets["parsed"].add(eid)
        if not has_meta:
            skipped["mentions_without_metadata"] += 1
            return
        mention_counts["with_metadata"] += 1
        doc_sets["with_metadata"].add(doc)
        entity_sets["with_metadata"].add(eid)
        if not is_pre:
            skipped["post_creation_mentions"] += 1
            return
        mention_counts["pre_creation"] += 1
        doc_sets["pre_creation"].add(doc)
        entity_sets["pre_creation"].add(eid)
        if not within:
            return
        mention_counts["within_span"] += 1
        doc_sets["within_span"].add(doc)
        entity_sets["within_span"].add(eid)
        if not final:
            return
        mention_counts["min_docs"] += 1
        doc_sets["min_docs"].add(doc)
        entity_sets["min_docs"].add(eid)
        if stream == "news":
            final_news.add(eid)
        else:
            final_social.add(eid)

    with open(os.path.join(out_dir, "mentions.tsv"), "w", encoding="utf-8") as mfh, open(
        os.path.join(out_dir, "metadata.tsv"), "w", encoding="utf-8"
    ) as tfh:
        for idx, category in enumerate(categories):
            eid = f"e{idx:06d}"
            has_meta = category != "no_meta"
            within = category != "late_creation"
            final = category == "valid"

            if category == "late_creation":
                creation = int(rng.integers(span1 + 1, span1 + 200))
            elif category == "post_only":
                creation = int(rng.integers(span0 + 1, span1 - 10))
            else:
                creation = int(rng.integers(span0 + 30, span1 + 1))

            if category == "low_docs":
                n_docs = int(rng.integers(1, min_docs))
            elif category == "post_only":
                n_docs = 0
            else:
                n_docs = int(rng.integers(min_docs, min_docs + 25))

            lines: list[str] = []
            last_pre_day = min(creation - 1, span1)
            first_pre_day = max(span0, creation - 300)
            for _ in range(n_docs):
                day = int(rng.integers(first_pre_day, last_pre_day + 1))
                doc = f"d{doc_counter:08d}"
                doc_counter += 1
                stream = "news" if rng.random() < 0.5 else "social"
                emit(lines, eid, day, doc, stream, has_meta, True, within, final)
                if rng.random() < 0.10:  # duplicate mention of the same document
                    emit(lines, eid, day, doc, stream, has_meta, True, within, final)

            if category == "post_only" or (category == "valid" and rng.random() < 0.25):
                post_lo = max(creation, span0)
                k = int(rng.integers(1, 4)) if category == "post_only" else 1
                k = max(k, 3) if category == "post_only" else k
                for _ in range(k):
                    if post_lo > span1:
                        break
                    day = int(rng.integers(post_lo, span1 + 1))
                    doc = f"d{doc_counter:08d}"
                    doc_counter += 1
                    stream = "news" if rng.random() < 0.5 else "social"
                    emit(lines, eid, day, doc, stream, has_meta, False, within, final)

            if category == "valid" and rng.random() < 0.05:
                day = span1 + int(rng.integers(1, 50))
                doc = f"d{doc_counter:08d}"
                doc_counter += 1
                out_of_span_lines.append(f"{day}\t{doc}\tnews\t{eid}\n")
                skipped["out_of_span_mentions"] += 1

            mfh.writelines(lines)
            if has_meta:
                if rng.random() < 0.5:
                    k = int(rng.integers(1, 3))
                    labels = list(rng.choice(_TYPE_POOL, size=k, replace=False))
                else:
                    labels = []
                pageviews = int(rng.integers(100, 100_000)) if rng.random() < 0.6 else None
                tfh.write(_meta_line(eid, creation, labels, pageviews))

        mfh.writelines(out_of_span_lines)
        malformed = [
            "not_a_day\tdx0\tnews\tebad00\n",
            f"{span0 + 1}\tdx1\tblog\tebad01\n",
            f"{span0 + 1}\tdx2\tnews\n",
            f"{span0 + 2}\t\tnews\tebad03\n",
        ]
        mfh.writelines(malformed)
        skipped["malformed_lines"] += len(malformed)

    stages = [
        {
            "stage": name,
            "entities": len(entity_sets[name]),
            "mentions": mention_counts[name],
            "documents": len(doc_sets[name]),
        }
        for name in ("parsed", "with_metadata", "pre_creation", "within_span", "min_docs")
    ]
    truth = {
        "preset": "cascade",
        "seed": seed,
        "span": list(span),
        "min_docs": min_docs,
        "categories": {
            "valid": n_valid,
            "low_docs": n_low,
            "late_creation": n_late,
            "post_only": n_post,
            "no_meta": n_nometa,
        },
        "filter_report": {
            "stages": stages,
            "skipped": dict(sorted(skipped.items())),
            "extras": {
                "final_entities_in_news": len(final_news),
                "final_entities_in_social": len(final_social),
            },
        },
    }
    _write_truth(out_dir, truth)
    return truth


def gen_throughput(
    out_dir: str,
    n_records: int = 10_000_000,
    span: tuple[int, int] = (0, 600),
    seed: int = 0,
) -> dict:
    """Large flat corpus for ingest throughput measurement; every record
    has a unique document id."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    span0, span1 = span
    per_entity = 400
    n_entities = max(1, n_records // per_entity)
    doc_counter = 0
    with open(os.path.join(out_dir, "mentions.tsv"), "wb") as mfh, open(
        os.path.join(out_dir, "metadata.tsv"), "w", encoding="utf-8"
    ) as tfh:
        batch: list[bytes] = []
        for idx in range(n_entities):
            eid = b"e%07d" % idx
            dur = 500
            creation = int(rng.integers(span0 + dur, span1 + 1))
            start = creation - dur
            days = rng.integers(start, creation, size=per_entity).tolist()
            for day in days:
                tag = b"news" if doc_counter & 1 else b"social"
                batch.append(b"%d\td%09d\t%s\t%s\n" % (day, doc_counter, tag, eid))
                doc_counter += 1
            if len(batch) >= 200_000:
                mfh.writelines(batch)
                batch = []
            tfh.write(_meta_line(eid.decode(), creation, [], None))
        if batch:
            mfh.writelines(batch)
    truth = {
        "preset": "throughput",
        "seed": seed,
        "span": list(span),
        "n_records": doc_counter,
        "n_entities": n_entities,
    }
    _write_truth(out_dir, truth)
    return truth


def generate(preset: str, out_dir: str, seed: int = 0, **params) -> dict:
    if preset == "two-pop":
        return gen_two_pop(out_dir, seed=seed, **params)
    if preset == "cascade":
        return gen_cascade(out_dir, seed=seed, **params)
    if preset == "curiosity":
        return gen_curiosity(out_dir, seed=seed, **params)
    if preset == "throughput":
        return gen_throughput(out_dir, seed=seed, **params)
    raise ValueError(f"unknown preset {preset!r}; choose one of {PRESETS}")
