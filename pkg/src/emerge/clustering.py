"""Agglomerative clustering with Ward linkage over a precomputed
dissimilarity, plus dendrogram cuts and truncation.

Ward formally assumes squared Euclidean input; here the Lance-Williams
recurrence is applied directly to the supplied distances, so heights are
meaningful only relative to that input.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .similarity import DistanceMatrix


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """Merge list in nondecreasing height order.

    Leaves are nodes 0..n-1 in ``ids`` order; merge t creates node n+t.
    """

    ids: list[str]
    merges: list[Merge]

    @property
    def n_leaves(self) -> int:
        return len(self.ids)

    def to_dict(self) -> dict:
        return {
            "ids": self.ids,
            "merges": [[m.left, m.right, m.height, m.size] for m in self.merges],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Dendrogram":
        return cls(
            ids=list(obj["ids"]),
            merges=[Merge(int(l), int(r), float(h), int(s)) for l, r, h, s in obj["merges"]],
        )


@dataclass
class FlatClustering:
    """Cluster labels aligned with the dendrogram's leaf order; labels are
    0..k-1 ordered by each cluster's smallest leaf index."""

    ids: list[str]
    labels: np.ndarray
    k: int


def hac_ward(dm: DistanceMatrix) -> Dendrogram:
    """Ward-linkage agglomeration via the nearest-neighbor chain.

    Works in squared distances with the recurrence
    d2(u, k) = ((n_i + n_k) d2(i,k) + (n_j + n_k) d2(j,k) - n_k d2(i,j))
               / (n_i + n_j + n_k).
    The chain restarts from the smallest active index and nearest-neighbor
    ties prefer the smallest index (the chain predecessor on exact ties),
    making the merge sequence deterministic. Merges are re-sorted by height
    and relabeled so node ids follow height order.
    """
    n = dm.n
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    condensed = np.asarray(dm.condensed, dtype=np.float64)
    if not np.all(np.isfinite(condensed)):
        raise ValueError("distance matrix contains non-finite entries")
    if condensed.size and float(condensed.min()) < 0:
        raise ValueError("distance matrix contains negative entries")

    square = dm.to_square()
    d2 = square * square
    np.fill_diagonal(d2, np.inf)
    sizes = np.ones(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)

    raw_merges: list[tuple[int, int, float]] = []
    chain: list[int] = []
    while len(raw_merges) < n - 1:
        if not chain:
            chain.append(int(np.flatnonzero(active)[0]))
        a = chain[-1]
        row = np.where(active, d2[a], np.inf)
        row[a] = np.inf
        b = int(np.argmin(row))
        if len(chain) >= 2:
            prev = chain[-2]
            if row[prev] == row[b]:
                b = prev
        if len(chain) >= 2 and b == chain[-2]:
            chain.pop()
            chain.pop()
            lo, hi = (a, b) if a < b else (b, a)
            d2_ab = float(d2[lo, hi])
            raw_merges.append((lo, hi, d2_ab))
            sa = sizes[lo]
            sb = sizes[hi]
            mask = active.copy()
            mask[lo] = mask[hi] = False
            others = np.flatnonzero(mask)
            if others.size:
                sk = sizes[others]
                new = (
                    (sa + sk) * d2[lo, others]
                    + (sb + sk) * d2[hi, others]
                    - sk * d2_ab
                ) / (sa + sb + sk)
                d2[lo, others] = new
                d2[others, lo] = new
            sizes[lo] = sa + sb
            active[hi] = False
        else:
            chain.append(b)

    order = sorted(range(n - 1), key=lambda t: raw_merges[t][2])
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    node_of = list(range(n))
    size_of = [1] * n
    merges: list[Merge] = []
    for new_node, t in enumerate(order, start=n):
        lo, hi, d2_ab = raw_merges[t]
        ra = find(lo)
        rb = find(hi)
        na = node_of[ra]
        nb = node_of[rb]
        left, right = (na, nb) if na < nb else (nb, na)
        size = size_of[ra] + size_of[rb]
        parent[rb] = ra
        node_of[ra] = new_node
        size_of[ra] = size
        merges.append(Merge(left, right, math.sqrt(d2_ab), size))
    return Dendrogram(ids=list(dm.ids), merges=merges)


def cut(dend: Dendrogram, k: int) -> FlatClustering:
    """Flat clustering from removing the k-1 highest merges."""
    n = dend.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    rep = {i: i for i in range(n)}
    for t, m in enumerate(dend.merges[: n - k]):
        ra = find(rep[m.left])
        rb = find(rep[m.right])
        parent[rb] = ra
        rep[n + t] = ra
    roots: dict[int, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for leaf in range(n):
        r = find(leaf)
        if r not in roots:
            roots[r] = len(roots)
        labels[leaf] = roots[r]
    return FlatClustering(ids=list(dend.ids), labels=labels, k=k)


def truncate(dend: Dendrogram, levels: int) -> dict:
    """Summary tree keeping the top ``levels`` merge generations; deeper
    subtrees collapse into groups annotated with member counts."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    n = dend.n_leaves

    def build(node: int, depth: int) -> dict:
        if node < n:
            return {"type": "leaf", "node": node, "entity_id": dend.ids[node], "size": 1}
        m = dend.merges[node - n]
        if depth >= levels:
            return {"type": "group", "node": node, "size": m.size, "height": m.height}
        return {
            "type": "merge",
            "node": node,
            "height": m.height,
            "size": m.size,
            "children": [build(m.left, depth + 1), build(m.right, depth + 1)],
        }

    root = build(2 * n - 2, 0)
    return {"n_leaves": n, "levels": levels, "root": root}


def clustering_to_csv_rows(fc: FlatClustering) -> list[list[str]]:
    rows = [["entity_id", "cluster"]]
    for eid, label in zip(fc.ids, fc.labels):
        rows.append([eid, str(int(label))])
    return rows


def dendrogram_to_json(dend: Dendrogram, fh) -> None:
    json.dump(dend.to_dict(), fh, sort_keys=True)
    fh.write("\n")
