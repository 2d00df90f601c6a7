"""Topic clustering and class-based TF-IDF keyword extraction.

K-means runs on cosine-normalized rows with squared Euclidean distance
(monotone in cosine distance on the unit sphere); centroids are
re-normalized after each update. Keyword weights follow
w = (tf_in_class / class_total) * ln(1 + A / f) with A the average token
count per class and f the term's total count across classes.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ._accel import njit
from .corpus import TokenizedDoc
from .embed import EmbeddingMatrix
from .errors import ConfigError

DEFAULT_K = 50
DEFAULT_EXCLUDED = frozenset(
    {"wildfire causes", "misinformation", "COVID-19 pandemic", "other"}
)


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray  # (k, d)
    assignments: dict[str, int]
    inertia: float
    seed: int


@njit(cache=True)
def _assign(data, centroids):
    n, d = data.shape
    k = centroids.shape[0]
    labels = np.empty(n, dtype=np.int64)
    inertia = 0.0
    for i in range(n):
        best = 0
        best_dist = np.inf
        for c in range(k):
            dist = 0.0
            for j in range(d):
                diff = data[i, j] - centroids[c, j]
                dist += diff * diff
            if dist < best_dist:
                best_dist = dist
                best = c
        labels[i] = best
        inertia += best_dist
    return labels, inertia


def _seed_centroids(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Distance-weighted (k-means++ style) seeding."""
    n = data.shape[0]
    centroids = np.empty((k, data.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = data[first]
    dist = np.sum((data - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = dist.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=dist / total))
        centroids[c] = data[idx]
        dist = np.minimum(dist, np.sum((data - centroids[c]) ** 2, axis=1))
    return centroids


def kmeans(matrix: EmbeddingMatrix, k: int, seed: int, max_iter: int = 300) -> ClusterModel:
    data = np.ascontiguousarray(matrix.vectors)
    n = data.shape[0]
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds {n} data rows")
    norms = np.linalg.norm(data, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("kmeans expects cosine-normalized rows (unit norm)")
    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(data, k, rng)

    labels, inertia = _assign(data, centroids)
    for _ in range(max_iter):
        # Deterministic reduction: accumulate rows in index order.
        sums = np.zeros_like(centroids)
        counts = np.zeros(k, dtype=np.int64)
        for i in range(n):
            sums[labels[i]] += data[i]
            counts[labels[i]] += 1
        new_centroids = centroids.copy()
        for c in range(k):
            if counts[c] > 0:
                cen = sums[c] / counts[c]
                norm = np.linalg.norm(cen)
                new_centroids[c] = cen / norm if norm > 0 else cen
        # Reseed empty clusters with the point farthest from its centroid.
        empties = [c for c in range(k) if counts[c] == 0]
        if empties:
            dists = np.sum((data - new_centroids[labels]) ** 2, axis=1)
            order = np.argsort(-dists, kind="stable")
            for c, idx in zip(empties, order):
                new_centroids[c] = data[idx]
        new_labels, new_inertia = _assign(data, new_centroids)
        if not empties and new_inertia > inertia + 1e-9 * max(1.0, inertia):
            raise AssertionError("k-means inertia increased")
        centroids = new_centroids
        if np.array_equal(new_labels, labels) and not empties:
            labels, inertia = new_labels, new_inertia
            break
        labels, inertia = new_labels, new_inertia

    assignments = {doc_id: int(lab) for doc_id, lab in zip(matrix.doc_ids, labels)}
    return ClusterModel(k=k, centroids=centroids, assignments=assignments,
                        inertia=float(inertia), seed=seed)


@dataclass
class TopicModel:
    k: int
    class_term_freq: dict[tuple[int, str], int]
    weights: dict[tuple[int, str], float]
    avg_words_per_class: float
    term_corpus_freq: dict[str, int]
    top_terms: dict[int, list[tuple[str, float]]] = field(default_factory=dict)
    label_map: dict[int, str] = field(default_factory=dict)
    excluded_categories: frozenset[str] = DEFAULT_EXCLUDED


def ctfidf(docs: list[TokenizedDoc], assignments: dict[str, int], k: int | None = None) -> TopicModel:
    """Class-based TF-IDF weights per (cluster, term)."""
    for doc in docs:
        if doc.event_id not in assignments:
            raise ValueError(f"doc {doc.event_id!r} has no cluster assignment")
    if k is None:
        k = max(assignments.values(), default=-1) + 1
    if k <= 0:
        raise ValueError("no clusters")

    class_term: dict[tuple[int, str], int] = Counter()
    class_totals = [0] * k
    corpus_freq: dict[str, int] = Counter()
    for doc in docs:
        c = assignments[doc.event_id]
        for tok in doc.tokens:
            class_term[(c, tok)] += 1
            corpus_freq[tok] += 1
        class_totals[c] += len(doc.tokens)

    total_tokens = sum(class_totals)
    if total_tokens == 0:
        raise ValueError("corpus has zero tokens")
    avg = total_tokens / k

    weights: dict[tuple[int, str], float] = {}
    for (c, term), tf in class_term.items():
        weights[(c, term)] = (tf / class_totals[c]) * math.log(1.0 + avg / corpus_freq[term])

    return TopicModel(
        k=k,
        class_term_freq=dict(class_term),
        weights=weights,
        avg_words_per_class=avg,
        term_corpus_freq=dict(corpus_freq),
    )


def top_terms(tm: TopicModel, n: int = 10) -> dict[int, list[tuple[str, float]]]:
    """Top-n terms per cluster by weight, ties broken lexicographically."""
    per_cluster: dict[int, list[tuple[str, float]]] = {c: [] for c in range(tm.k)}
    for (c, term), w in tm.weights.items():
        per_cluster[c].append((term, w))
    result = {}
    for c, items in per_cluster.items():
        items.sort(key=lambda tw: (-tw[1], tw[0]))
        result[c] = items[:n]
    tm.top_terms = result
    return result


def load_labels(path, k: int, delimiter: str = ",") -> dict[int, str]:
    labels: dict[int, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh, delimiter=delimiter):
            try:
                labels[int(row["cluster_index"])] = row["category"].strip()
            except (KeyError, ValueError, AttributeError) as exc:
                raise ConfigError(f"bad label row: {row!r}") from exc
    missing = sorted(set(range(k)) - set(labels))
    if missing:
        raise ConfigError(f"label file missing clusters: {missing}")
    return labels


def apply_labels(
    cm: ClusterModel,
    labels: dict[int, str],
    excluded: frozenset[str] = DEFAULT_EXCLUDED,
) -> tuple[dict[str, str], list[str]]:
    """Map each doc to its cluster's category; docs in excluded categories
    are dropped. Returns (doc_id -> category, dropped doc_ids)."""
    missing = sorted(set(range(cm.k)) - set(labels))
    if missing:
        raise ConfigError(f"label map missing clusters: {missing}")
    kept: dict[str, str] = {}
    dropped: list[str] = []
    for doc_id, c in cm.assignments.items():
        cat = labels[c]
        if cat in excluded:
            dropped.append(doc_id)
        else:
            kept[doc_id] = cat
    return kept, dropped
