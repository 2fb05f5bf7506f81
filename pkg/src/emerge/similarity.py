"""Pairwise burst similarity and the normalized distance matrix.

Similarity between two entities is the Jaccard overlap of their burst
regions in relative time. The similarity matrix gets row-wise L2
normalization, symmetrization, and a diagonal-consistent conversion to a
distance matrix rescaled into [0, 1].
"""
from __future__ import annotations

import csv
import multiprocessing as mp
import os
import struct
import tempfile
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .bursts import BurstSet

TILE_MAGIC = b"EMDM"
TILE_VERSION = 1


@dataclass
class RelativeBurstProfile:
    """Disjoint, sorted burst intervals in relative time [0, 1].

    ``weights`` carries the burst peaks for the weighted similarity
    variant; unweighted similarity ignores it.
    """

    entity_id: str
    intervals: list[tuple[float, float]]
    weights: list[float] | None = None


def to_relative_profile(bs: BurstSet, entity_id: str = "") -> RelativeBurstProfile:
    """Map burst index ranges [s, e] onto intervals [s/L, (e+1)/L)."""
    if bs.source_length < 1:
        raise ValueError("source_length must be >= 1")
    length = float(bs.source_length)
    intervals = [(b.start / length, (b.end + 1) / length) for b in bs.bursts]
    weights = [b.peak for b in bs.bursts]
    return RelativeBurstProfile(entity_id=entity_id, intervals=intervals, weights=weights)


def _total_length(intervals) -> float:
    return sum(e - s for s, e in intervals)


def _intersection_length(a, b) -> float:
    total = 0.0
    i = j = 0
    while i < len(a) and j < len(b):
        s = max(a[i][0], b[j][0])
        e = min(a[i][1], b[j][1])
        if e > s:
            total += e - s
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return total


def _weight_at(profile: RelativeBurstProfile, t: float) -> float:
    weights = profile.weights
    for idx, (s, e) in enumerate(profile.intervals):
        if s > t:
            break
        if t < e:
            return weights[idx] if weights else 1.0
    return 0.0


def bsim(a: RelativeBurstProfile, b: RelativeBurstProfile, weighted: bool = False) -> float:
    """Burst similarity in [0, 1]: overlap of burst regions over their
    union. Two burst-free profiles are maximally similar (1.0); exactly one
    burst-free profile gives 0.0.

    The weighted variant treats each profile as a step function valued at
    its burst peaks and integrates min/max envelopes.
    """
    if not a.intervals and not b.intervals:
        return 1.0
    if not a.intervals or not b.intervals:
        return 0.0
    if not weighted:
        inter = _intersection_length(a.intervals, b.intervals)
        union = _total_length(a.intervals) + _total_length(b.intervals) - inter
        return inter / union
    points = sorted(
        {p for iv in a.intervals for p in iv} | {p for iv in b.intervals for p in iv}
    )
    num = den = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        wa = _weight_at(a, mid)
        wb = _weight_at(b, mid)
        seg = hi - lo
        num += seg * min(wa, wb)
        den += seg * max(wa, wb)
    return num / den if den > 0 else 0.0


@dataclass
class DistanceMatrix:
    """Condensed upper-triangular pairwise distances with zero diagonal.

    ``condensed`` may be a memmap when the builder spilled to disk under a
    memory budget. ``raw`` optionally holds the full unadjusted matrix
    (1 minus the symmetrized row-normalized similarity, nonzero diagonal)
    for diagnostics.
    """

    ids: list[str]
    condensed: np.ndarray
    raw: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("no condensed entry on the diagonal")
        if i > j:
            i, j = j, i
        n = self.n
        return n * i - (i * (i + 1)) // 2 + (j - i - 1)

    def get(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(self.condensed[self.index(i, j)])

    def to_square(self) -> np.ndarray:
        n = self.n
        square = np.zeros((n, n), dtype=np.float64)
        iu, ju = np.triu_indices(n, k=1)
        square[iu, ju] = self.condensed
        square[ju, iu] = self.condensed
        return square

    @classmethod
    def from_condensed(cls, ids: Sequence[str], condensed) -> "DistanceMatrix":
        vec = np.asarray(condensed, dtype=np.float64)
        n = len(ids)
        if vec.size != n * (n - 1) // 2:
            raise ValueError("condensed length does not match id count")
        return cls(ids=list(ids), condensed=vec)

    @classmethod
    def from_square(cls, ids: Sequence[str], square) -> "DistanceMatrix":
        sq = np.asarray(square, dtype=np.float64)
        n = len(ids)
        if sq.shape != (n, n):
            raise ValueError("square shape does not match id count")
        if not np.allclose(sq, sq.T, atol=1e-12):
            raise ValueError("matrix is not symmetric")
        iu, ju = np.triu_indices(n, k=1)
        return cls(ids=list(ids), condensed=sq[iu, ju].copy())


_WORKER_PROFILES: list[RelativeBurstProfile] = []
_WORKER_WEIGHTED = False


def _init_sim_worker(profiles, weighted):
    global _WORKER_PROFILES, _WORKER_WEIGHTED
    _WORKER_PROFILES = profiles
    _WORKER_WEIGHTED = weighted


def _sim_rows(rows: tuple[int, int]) -> bytes:
    lo, hi = rows
    profiles = _WORKER_PROFILES
    weighted = _WORKER_WEIGHTED
    n = len(profiles)
    out = []
    for i in range(lo, hi):
        pa = profiles[i]
        row = np.empty(n - i - 1, dtype=np.float64)
        for off, j in enumerate(range(i + 1, n)):
            row[off] = bsim(pa, profiles[j], weighted)
        out.append(row)
    return np.concatenate(out).tobytes() if out else b""


def _pair_similarities(
    profiles: Sequence[RelativeBurstProfile],
    weighted: bool,
    workers: int,
    out: np.ndarray,
) -> None:
    n = len(profiles)
    if workers <= 1 or n < 64:
        pos = 0
        for i in range(n):
            pa = profiles[i]
            for j in range(i + 1, n):
                out[pos] = bsim(pa, profiles[j], weighted)
                pos += 1
        return
    blocks = []
    step = max(1, n // (workers * 8))
    lo = 0
    while lo < n:
        blocks.append((lo, min(n, lo + step)))
        lo += step
    ctx = mp.get_context("fork")
    with ctx.Pool(workers, initializer=_init_sim_worker, initargs=(list(profiles), weighted)) as pool:
        pos = 0
        for chunk in pool.map(_sim_rows, blocks):
            arr = np.frombuffer(chunk, dtype=np.float64)
            out[pos : pos + arr.size] = arr
            pos += arr.size


def build_distance_matrix(
    profiles: Sequence[RelativeBurstProfile],
    weighted: bool = False,
    workers: int = 1,
    keep_raw: bool = False,
    mem_budget: int | None = None,
    spill_path: str | None = None,
) -> DistanceMatrix:
    """Assemble the normalized distance matrix over the given profiles.

    Steps: pairwise similarity; row-wise L2 normalization; symmetrization;
    diagonal-consistent distance d(i,j) = (s_ii + s_jj)/2 - s_ij, which is
    zero on the diagonal by construction; rescale by the maximum entry so
    values lie in [0, 1]. Identical profiles end at distance 0; disjoint
    profiles end at the matrix maximum.

    When ``mem_budget`` (bytes) is given and the condensed vector would
    exceed it, the vector is backed by a disk memmap under ``spill_path``.
    """
    n = len(profiles)
    if n < 2:
        raise ValueError(f"need at least 2 profiles, got {n}")
    m = n * (n - 1) // 2
    use_memmap = mem_budget is not None and 8 * m > mem_budget
    if use_memmap:
        if spill_path is None:
            fd, spill_path = tempfile.mkstemp(suffix=".sim.f64")
            os.close(fd)
        sims = np.memmap(spill_path, dtype=np.float64, mode="w+", shape=(m,))
    else:
        sims = np.empty(m, dtype=np.float64)

    _pair_similarities(profiles, weighted, workers, sims)

    # Row L2 norms include the unit self-similarity on the diagonal.
    sumsq = np.ones(n, dtype=np.float64)
    iu, ju = np.triu_indices(n, k=1)
    sq = np.asarray(sims) ** 2
    np.add.at(sumsq, iu, sq)
    np.add.at(sumsq, ju, sq)
    inv = 1.0 / np.sqrt(sumsq)

    pair_scale = 0.5 * (inv[iu] + inv[ju])
    dist = (1.0 - np.asarray(sims)) * pair_scale
    dmax = float(dist.max()) if dist.size else 0.0
    if dmax > 0:
        dist /= dmax

    raw = None
    if keep_raw:
        s_full = np.empty((n, n), dtype=np.float64)
        s_full[iu, ju] = np.asarray(sims) * pair_scale
        s_full[ju, iu] = s_full[iu, ju]
        np.fill_diagonal(s_full, inv)
        raw = 1.0 - s_full

    if use_memmap:
        mm = np.memmap(spill_path, dtype=np.float64, mode="w+", shape=(m,))
        mm[:] = dist
        mm.flush()
        dist = mm
    return DistanceMatrix(ids=[p.entity_id for p in profiles], condensed=dist, raw=raw)


def write_distance_csv(dm: DistanceMatrix, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["entity_id"] + dm.ids)
    square = dm.to_square()
    for i, eid in enumerate(dm.ids):
        writer.writerow([eid] + [repr(float(v)) for v in square[i]])


def write_distance_tiles(
    dm: DistanceMatrix, path: str, tile_size: int = 512, config_hash: str = ""
) -> None:
    """Binary export: header then upper-triangular blocks of the full
    symmetric matrix, row-major, each block zero-padded to tile_size
    squared little-endian float64."""
    if tile_size < 1:
        raise ValueError("tile_size must be >= 1")
    n = dm.n
    hash_b = config_hash.encode("utf-8")
    header = (
        TILE_MAGIC
        + struct.pack("<IQQH", TILE_VERSION, n, tile_size, len(hash_b))
        + hash_b
    )
    nb = (n + tile_size - 1) // tile_size
    condensed = np.asarray(dm.condensed)
    with open(path, "wb") as fh:
        fh.write(header)
        for bi in range(nb):
            r0 = bi * tile_size
            r1 = min(n, r0 + tile_size)
            for bj in range(bi, nb):
                c0 = bj * tile_size
                c1 = min(n, c0 + tile_size)
                tile = np.zeros((tile_size, tile_size), dtype="<f8")
                rows = np.arange(r0, r1)[:, None]
                cols = np.arange(c0, c1)[None, :]
                lo = np.minimum(rows, cols)
                hi = np.maximum(rows, cols)
                idx = n * lo - (lo * (lo + 1)) // 2 + (hi - lo - 1)
                off = rows != cols
                block = np.zeros((r1 - r0, c1 - c0), dtype=np.float64)
                block[off] = condensed[idx[off]]
                tile[: r1 - r0, : c1 - c0] = block
                fh.write(tile.tobytes())


def read_distance_tiles(path: str) -> tuple[DistanceMatrix, str]:
    """Reads a tile file back into an in-memory matrix; returns the matrix
    and the config hash stored in the header."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != TILE_MAGIC:
            raise ValueError("not a distance tile file")
        version, n, tile_size, hash_len = struct.unpack("<IQQH", fh.read(22))
        if version != TILE_VERSION:
            raise ValueError(f"unsupported tile version {version}")
        config_hash = fh.read(hash_len).decode("utf-8")
        nb = (n + tile_size - 1) // tile_size
        square = np.zeros((n, n), dtype=np.float64)
        tile_bytes = tile_size * tile_size * 8
        for bi in range(nb):
            r0 = bi * tile_size
            r1 = min(n, r0 + tile_size)
            for bj in range(bi, nb):
                c0 = bj * tile_size
                c1 = min(n, c0 + tile_size)
                tile = np.frombuffer(fh.read(tile_bytes), dtype="<f8").reshape(
                    tile_size, tile_size
                )
                square[r0:r1, c0:c1] = tile[: r1 - r0, : c1 - c0]
                square[c0:c1, r0:r1] = tile[: r1 - r0, : c1 - c0].T
    ids = [str(i) for i in range(n)]
    return DistanceMatrix.from_square(ids, square), config_hash
