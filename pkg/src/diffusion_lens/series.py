"""Per-(region, topic) daily engagement series.

A day's count is the number of distinct authors posting that topic in that
region (a config switch counts posts instead). N is the number of distinct
authors in the region across all included topics over the window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import InputFormatError


@dataclass(frozen=True)
class LabeledEvent:
    author_id: str
    city: str
    state: str
    day_index: int
    topic: str


@dataclass
class EngagementSeries:
    region: tuple[str, str]  # (city, state); city == "" at state granularity
    topic: str
    day_counts: np.ndarray  # length == window length
    n_users: int

    def __post_init__(self):
        self.day_counts = np.asarray(self.day_counts)
        if np.any(self.day_counts < 0):
            raise ValueError("negative day count")
        if self.n_users < 1:
            raise ValueError("series population must be >= 1")


def build_series(
    events: Iterable[LabeledEvent],
    n_days: int,
    granularity: str = "city",
    engagement: str = "authors",
) -> list[EngagementSeries]:
    """One series per (region, topic) with at least one nonzero day."""
    if n_days < 1:
        raise ValueError("empty window")
    if granularity not in ("city", "state"):
        raise ValueError(f"unknown granularity: {granularity}")
    if engagement not in ("authors", "posts"):
        raise ValueError(f"unknown engagement mode: {engagement}")

    # (region, topic, day) -> author set (or post count)
    day_authors: dict[tuple[tuple[str, str], str, int], set[str]] = {}
    day_posts: dict[tuple[tuple[str, str], str, int], int] = {}
    region_authors: dict[tuple[str, str], set[str]] = {}
    for ev in events:
        if not 0 <= ev.day_index < n_days:
            raise ValueError(f"day index {ev.day_index} outside window of {n_days}")
        region = (ev.city, ev.state) if granularity == "city" else ("", ev.state)
        key = (region, ev.topic, ev.day_index)
        day_authors.setdefault(key, set()).add(ev.author_id)
        day_posts[key] = day_posts.get(key, 0) + 1
        region_authors.setdefault(region, set()).add(ev.author_id)

    counts_of = day_posts if engagement == "posts" else {
        k: len(v) for k, v in day_authors.items()
    }
    pairs = sorted({(region, topic) for region, topic, _ in counts_of})
    out = []
    for region, topic in pairs:
        counts = np.zeros(n_days, dtype=np.int64)
        for d in range(n_days):
            counts[d] = counts_of.get((region, topic, d), 0)
        out.append(
            EngagementSeries(
                region=region,
                topic=topic,
                day_counts=counts,
                n_users=len(region_authors[region]),
            )
        )
    return out


def spatial_rollup(
    series: list[EngagementSeries],
    events: Optional[Iterable[LabeledEvent]],
    n_days: int,
    engagement: str = "authors",
) -> list[EngagementSeries]:
    """Recompute series at state level from the underlying events.

    Summing city counts would double-count authors active in several
    cities, so the rollup goes back to the event stream.
    """
    if events is None:
        raise ValueError("state rollup needs the backing event stream")
    return build_series(events, n_days, granularity="state", engagement=engagement)


def region_name(region: tuple[str, str]) -> str:
    city, state = region
    return f"{city}, {state}" if city else state


def _parse_region(name: str) -> tuple[str, str]:
    if ", " in name:
        city, state = name.rsplit(", ", 1)
        return (city, state)
    return ("", name)


def write_series(series_path, regions_path, series: list[EngagementSeries]):
    with open(series_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["region", "topic", "day_index", "count"])
        for s in series:
            for d, c in enumerate(s.day_counts):
                w.writerow([region_name(s.region), s.topic, d, int(c)])
    regions = {}
    for s in series:
        regions[region_name(s.region)] = s.n_users
    with open(regions_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["region", "n_users"])
        for name in sorted(regions):
            w.writerow([name, regions[name]])


def read_series(series_path, regions_path) -> list[EngagementSeries]:
    populations: dict[str, int] = {}
    with open(regions_path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            try:
                populations[row["region"]] = int(row["n_users"])
            except (KeyError, ValueError, TypeError) as exc:
                raise InputFormatError(f"bad region row: {row!r}") from exc

    counts: dict[tuple[str, str], dict[int, int]] = {}
    with open(series_path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh, delimiter="\t"):
            try:
                key = (row["region"], row["topic"])
                counts.setdefault(key, {})[int(row["day_index"])] = int(row["count"])
            except (KeyError, ValueError, TypeError) as exc:
                raise InputFormatError(f"bad series row: {row!r}") from exc

    out = []
    for (region, topic), by_day in sorted(counts.items()):
        n_days = max(by_day) + 1
        arr = np.zeros(n_days, dtype=np.int64)
        for d, c in by_day.items():
            arr[d] = c
        if region not in populations:
            raise InputFormatError(f"region {region!r} missing from region table")
        out.append(
            EngagementSeries(
                region=_parse_region(region),
                topic=topic,
                day_counts=arr,
                n_users=populations[region],
            )
        )
    return out
