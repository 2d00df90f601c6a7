"""Synthetic data: ODE-sampled series, chain-binomial stochastic series,
and full synthetic event corpora for end-to-end runs.

The chain-binomial simulator is the stochastic validation oracle for the
deterministic SIR integrator: discrete substeps of 0.1 day with binomial
infection/recovery draws, whose replicate mean tracks the ODE.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import Optional

import numpy as np

from .errors import ConfigError
from .series import EngagementSeries
from .sir import SirParams, SirState, integrate, sample_daily

NOISE_KINDS = ("none", "uniform", "poisson")


@dataclass(frozen=True)
class SynthSpec:
    params: SirParams
    i0: float
    days: int
    noise: str = "none"
    noise_eps: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.i0 < 0:
            raise ConfigError("i0 must be non-negative")
        if self.i0 >= self.params.n:
            raise ConfigError(f"i0={self.i0} must be below the population {self.params.n}")
        if self.days < 2:
            raise ConfigError("days must be >= 2")
        if self.noise not in NOISE_KINDS:
            raise ConfigError(f"unknown noise kind: {self.noise}")
        if not 0.0 <= self.noise_eps < 1.0:
            raise ConfigError("noise_eps must lie in [0, 1)")


def ode_daily_samples(spec: SynthSpec, step: float = 0.01) -> np.ndarray:
    """Noise-free daily I(t) samples for the spec's parameters (float)."""
    init = SirState(s=spec.params.n - spec.i0, i=spec.i0, r=0.0)
    horizon = float(spec.days - 1) if spec.days > 1 else step
    traj = integrate(spec.params, init, horizon=horizon, step=step)
    return sample_daily(traj, spec.days)


def gen_ode_series(
    spec: SynthSpec,
    region: tuple[str, str] = ("synthville", "XX"),
    topic: str = "topic",
    step: float = 0.01,
) -> EngagementSeries:
    """Daily counts from the integrated model, noise applied per spec,
    rounded half-to-even to non-negative integers."""
    samples = ode_daily_samples(spec, step=step)
    rng = np.random.default_rng(spec.seed)
    if spec.noise == "uniform" and spec.noise_eps > 0.0:
        samples = samples * rng.uniform(1.0 - spec.noise_eps, 1.0 + spec.noise_eps, size=len(samples))
    elif spec.noise == "poisson":
        samples = rng.poisson(np.maximum(samples, 0.0)).astype(np.float64)
    counts = np.maximum(np.rint(samples), 0.0).astype(np.int64)
    return EngagementSeries(region=region, topic=topic, day_counts=counts,
                            n_users=int(round(spec.params.n)))


def gen_chain_binomial(
    spec: SynthSpec,
    region: tuple[str, str] = ("synthville", "XX"),
    topic: str = "topic",
    substep: float = 0.1,
) -> EngagementSeries:
    """Discrete-time stochastic SIR; reports I at integer days.

    Per substep h, each susceptible becomes infected with probability
    1 - exp(-beta*I*h/N) and each infected recovers with probability
    1 - exp(-gamma*h).
    """
    n = int(round(spec.params.n))
    rng = np.random.default_rng(spec.seed)
    per_day = round(1.0 / substep)
    i = int(round(spec.i0))
    s = n - i
    counts = np.empty(spec.days, dtype=np.int64)
    counts[0] = i
    p_rec = 1.0 - np.exp(-spec.params.gamma * substep)
    for day in range(1, spec.days):
        for _ in range(per_day):
            p_inf = 1.0 - np.exp(-spec.params.beta * i * substep / n)
            new_inf = rng.binomial(s, p_inf) if s > 0 else 0
            new_rec = rng.binomial(i, p_rec) if i > 0 else 0
            s -= new_inf
            i += new_inf - new_rec
        counts[day] = i
    return EngagementSeries(region=region, topic=topic, day_counts=counts, n_users=n)


@dataclass(frozen=True)
class RegionSpec:
    city: str
    state: str
    author_pool: int
    topics: dict[str, SynthSpec] = field(default_factory=dict)

    def __post_init__(self):
        for name, tspec in self.topics.items():
            if self.author_pool < tspec.params.n:
                raise ConfigError(
                    f"author_pool={self.author_pool} below N={tspec.params.n}"
                    f" for topic {name!r} in {self.city}"
                )


@dataclass(frozen=True)
class CorpusSpec:
    regions: tuple[RegionSpec, ...]
    vocab: dict[str, tuple[str, ...]]  # topic -> word list
    window_start: date
    seed: int = 0
    generator: str = "ode"  # or "chain_binomial"

    def __post_init__(self):
        for region in self.regions:
            for name in region.topics:
                if name not in self.vocab or not self.vocab[name]:
                    raise ConfigError(f"topic {name!r} has no vocabulary")


def _region_series(rspec: RegionSpec, cspec: CorpusSpec) -> dict[str, EngagementSeries]:
    gen = gen_chain_binomial if cspec.generator == "chain_binomial" else gen_ode_series
    return {
        name: gen(tspec, region=(rspec.city, rspec.state), topic=name)
        for name, tspec in sorted(rspec.topics.items())
    }


def gen_corpus(spec: CorpusSpec, out_path) -> dict:
    """Write a synthetic event file whose per-(region, topic) daily
    distinct-author counts equal the generated series.

    Authors rotate cyclically through a pool of exactly N ids per region,
    so the recomputed region population approaches N once the total count
    mass reaches N.
    """
    rng = np.random.default_rng(spec.seed)
    next_id = 0
    summary = {"events": 0, "regions": []}
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for rspec in spec.regions:
            series = _region_series(rspec, spec)
            pool = max(
                (int(round(t.params.n)) for t in rspec.topics.values()), default=0
            )
            ptr = 0
            for name, s in series.items():
                vocab = spec.vocab[name]
                for day, count in enumerate(s.day_counts):
                    count = int(count)
                    if count > pool:
                        raise ConfigError(
                            f"day count {count} exceeds author pool {pool}"
                            f" for {rspec.city}/{name}"
                        )
                    authors = [(ptr + j) % pool for j in range(count)]
                    ptr = (ptr + count) % pool if pool else 0
                    ts = datetime.combine(
                        spec.window_start + timedelta(days=day),
                        time(12, 0, 0),
                        tzinfo=timezone.utc,
                    )
                    for a in authors:
                        n_words = int(rng.integers(6, 13))
                        words = [vocab[int(w)] for w in rng.integers(0, len(vocab), n_words)]
                        record = {
                            "id": f"ev{next_id:07d}",
                            "author_id": f"{rspec.city.lower()}-u{a:05d}",
                            "timestamp": ts.isoformat().replace("+00:00", "Z"),
                            "text": " ".join(words),
                            "registration_location": f"{rspec.city}, {rspec.state}",
                            "content_location": None,
                            "is_original": True,
                        }
                        fh.write(json.dumps(record, sort_keys=True) + "\n")
                        next_id += 1
            summary["regions"].append(
                {
                    "city": rspec.city,
                    "state": rspec.state,
                    "author_pool": pool,
                    "series": {
                        name: [int(c) for c in s.day_counts] for name, s in series.items()
                    },
                }
            )
    summary["events"] = next_id
    return summary


def hash_embeddings(doc_ids: list[str], token_lists: list[tuple[str, ...]], dims: int = 32) -> np.ndarray:
    """Deterministic bag-of-tokens embeddings for fixtures and synthetic
    corpora: each token hashes to a fixed pseudo-random direction."""
    import hashlib

    cache: dict[str, np.ndarray] = {}

    def token_vec(tok: str) -> np.ndarray:
        v = cache.get(tok)
        if v is None:
            digest = hashlib.sha256(tok.encode("utf-8")).digest()
            tok_rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
            v = tok_rng.standard_normal(dims)
            cache[tok] = v
        return v

    out = np.zeros((len(doc_ids), dims))
    for row, tokens in enumerate(token_lists):
        for tok in tokens:
            out[row] += token_vec(tok)
    return out
