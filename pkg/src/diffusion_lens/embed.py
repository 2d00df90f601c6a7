"""Embedding interchange I/O, cosine normalization, and PCA reduction.

The reduction is a deterministic principal-component analysis computed by
power iteration with deflation; no randomness, fixed sign convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputFormatError


@dataclass
class EmbeddingMatrix:
    doc_ids: list[str]
    vectors: np.ndarray  # (n, d) float64

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be 2-D")
        if len(self.doc_ids) != self.vectors.shape[0]:
            raise ValueError("doc_ids / vectors row mismatch")
        if self.vectors.size and not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding vectors contain non-finite entries")

    @property
    def dims(self) -> int:
        return self.vectors.shape[1]


def load_embeddings(path) -> EmbeddingMatrix:
    """Read the interchange format: 'dims=<d> count=<n>' header, then one
    '<doc_id>\\t<v1> <v2> ...' line per document."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read embeddings: {path}: {exc}") from exc
    with fh:
        header = fh.readline().strip()
        parts = dict(
            kv.split("=", 1) for kv in header.split() if "=" in kv
        )
        try:
            dims, count = int(parts["dims"]), int(parts["count"])
        except (KeyError, ValueError) as exc:
            raise InputFormatError(f"bad embeddings header: {header!r}") from exc
        ids: list[str] = []
        rows: list[list[float]] = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                doc_id, values = line.split("\t", 1)
                vec = [float(v) for v in values.split()]
            except ValueError as exc:
                raise InputFormatError(f"bad embedding row at line {lineno}") from exc
            if len(vec) != dims:
                raise InputFormatError(
                    f"row {doc_id!r} has {len(vec)} values, header says {dims}"
                )
            if not all(np.isfinite(vec)):
                raise InputFormatError(f"non-finite value in row {doc_id!r}")
            ids.append(doc_id)
            rows.append(vec)
    if len(ids) != count:
        raise InputFormatError(f"header count {count} != {len(ids)} rows")
    vectors = np.array(rows, dtype=np.float64) if rows else np.empty((0, dims))
    return EmbeddingMatrix(ids, vectors)


def write_embeddings(path, m: EmbeddingMatrix):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"dims={m.dims} count={len(m.doc_ids)}\n")
        for doc_id, row in zip(m.doc_ids, m.vectors):
            vals = " ".join(format(v, ".17g") for v in row)
            fh.write(f"{doc_id}\t{vals}\n")


def cosine_normalize(m: EmbeddingMatrix) -> tuple[EmbeddingMatrix, np.ndarray]:
    """Scale each row to unit norm. Zero rows stay zero; the returned mask
    flags them."""
    norms = np.linalg.norm(m.vectors, axis=1)
    zero = norms == 0.0
    scaled = m.vectors.copy()
    if scaled.size:
        scaled[~zero] /= norms[~zero, None]
    return EmbeddingMatrix(list(m.doc_ids), scaled), zero


@dataclass
class ReductionModel:
    mean: np.ndarray  # (d,)
    components: np.ndarray  # (d_out, d), orthonormal rows
    explained_variance: np.ndarray  # (d_out,), non-increasing

    @property
    def d_in(self) -> int:
        return self.components.shape[1]

    @property
    def d_out(self) -> int:
        return self.components.shape[0]


_POWER_TOL = 1e-10
_POWER_MAX_ITER = 10_000


def _orthogonalize(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    for b in basis:
        v = v - (v @ b) * b
    return v


def _fallback_direction(d: int, basis: list[np.ndarray]) -> np.ndarray:
    # Deterministic unit vector orthogonal to the basis (zero-variance case).
    for j in range(d):
        v = np.zeros(d)
        v[j] = 1.0
        v = _orthogonalize(v, basis)
        n = np.linalg.norm(v)
        if n > 1e-8:
            return v / n
    raise ValueError("cannot extend orthonormal basis")


def fit_reduction(m: EmbeddingMatrix, d_out: int) -> ReductionModel:
    """Principal components by power iteration with deflation.

    Deterministic: fixed start vectors and a fixed sign convention (first
    entry of each component with magnitude > 1e-12 is positive).
    """
    n, d = m.vectors.shape
    if n < 2:
        raise ValueError("need at least 2 rows to fit a reduction")
    if not (1 <= d_out <= min(n, d)):
        raise ValueError(f"d_out={d_out} out of range for {n}x{d} data")
    mean = m.vectors.mean(axis=0)
    centered = m.vectors - mean
    cov = centered.T @ centered / (n - 1)

    comps: list[np.ndarray] = []
    variances: list[float] = []
    A = cov.copy()
    for _ in range(d_out):
        diag = np.diag(A)
        if np.all(diag <= 1e-14):
            v = _fallback_direction(d, comps)
            eigval = 0.0
        else:
            v = np.zeros(d)
            v[int(np.argmax(diag))] = 1.0
            v = _orthogonalize(v, comps)
            nv = np.linalg.norm(v)
            v = v / nv if nv > 1e-12 else _fallback_direction(d, comps)
            for _ in range(_POWER_MAX_ITER):
                w = _orthogonalize(A @ v, comps)
                nw = np.linalg.norm(w)
                if nw < 1e-14:
                    break
                w /= nw
                if np.linalg.norm(w - v) < _POWER_TOL:
                    v = w
                    break
                v = w
            eigval = float(v @ A @ v)
            if eigval < 0.0:
                eigval = 0.0
        # Sign convention.
        for x in v:
            if abs(x) > 1e-12:
                if x < 0:
                    v = -v
                break
        comps.append(v)
        variances.append(eigval)
        A = A - eigval * np.outer(v, v)

    ev = np.array(variances)
    ev = np.minimum.accumulate(np.maximum(ev, 0.0))  # enforce non-increasing
    return ReductionModel(mean=mean, components=np.vstack(comps), explained_variance=ev)


def project(model: ReductionModel, m: EmbeddingMatrix) -> EmbeddingMatrix:
    if m.dims != model.d_in:
        raise ValueError(f"dimension mismatch: data d={m.dims}, model d={model.d_in}")
    return EmbeddingMatrix(list(m.doc_ids), (m.vectors - model.mean) @ model.components.T)


def reconstruct(model: ReductionModel, reduced: EmbeddingMatrix) -> EmbeddingMatrix:
    if reduced.dims != model.d_out:
        raise ValueError("reduced dimension mismatch")
    return EmbeddingMatrix(
        list(reduced.doc_ids), reduced.vectors @ model.components + model.mean
    )
