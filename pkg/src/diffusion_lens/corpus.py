"""Event ingestion: parsing, location resolution, tokenization, windowing.

Location resolution prefers the author's profile ("registration") location;
the place mentioned in the text ("content") is a fallback. Records that
resolve to neither are excluded from downstream analysis.
"""

from __future__ import annotations

import csv
import json
import re
import string
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, TextIO

from .errors import CorpusRejectedError, InputFormatError

EVENT_FIELDS = (
    "id",
    "author_id",
    "timestamp",
    "text",
    "registration_location",
    "content_location",
    "is_original",
)


@dataclass(frozen=True)
class EventRecord:
    id: str
    author_id: str
    timestamp: datetime
    text: str
    registration_location: Optional[str] = None
    content_location: Optional[str] = None
    is_original: bool = True


class LocationSource(Enum):
    REGISTRATION = "registration"
    CONTENT = "content"


@dataclass(frozen=True)
class LocatedEvent:
    event: EventRecord
    region: tuple[str, str]  # (city, state)
    location_source: LocationSource
    day_index: Optional[int] = None


@dataclass(frozen=True)
class TokenizedDoc:
    event_id: str
    tokens: tuple[str, ...]


_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})
_WS_RE = re.compile(r"\s+")


def normalize_place(raw: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace, trim."""
    s = raw.lower().translate(_PUNCT_TABLE)
    return _WS_RE.sub(" ", s).strip()


@dataclass
class Gazetteer:
    entries: dict[str, tuple[str, str]] = field(default_factory=dict)

    def add(self, alias: str, city: str, state: str):
        if not city or not state:
            raise InputFormatError(f"gazetteer entry {alias!r} missing city/state")
        self.entries[normalize_place(alias)] = (city, state)

    def lookup(self, place: Optional[str]) -> Optional[tuple[str, str]]:
        if not place:
            return None
        return self.entries.get(normalize_place(place))

    @classmethod
    def load(cls, path, delimiter: str = ",") -> "Gazetteer":
        gaz = cls()
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh, delimiter=delimiter):
                alias, city, state = row.get("alias"), row.get("city"), row.get("state")
                if not alias or not city or not state:
                    raise InputFormatError(f"bad gazetteer row: {row!r}")
                gaz.add(alias, city, state)
        return gaz


def load_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def _parse_timestamp(raw: str) -> datetime:
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, str):
        low = raw.strip().lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
    raise ValueError(f"not a boolean: {raw!r}")


def _record_from_mapping(row: dict) -> EventRecord:
    rec_id = str(row.get("id") or "").strip()
    author = str(row.get("author_id") or "").strip()
    if not rec_id or not author:
        raise ValueError("missing id/author_id")
    is_original = _parse_bool(row.get("is_original", True))
    text = row.get("text") or ""
    if is_original and not text:
        raise ValueError("original post without text")
    return EventRecord(
        id=rec_id,
        author_id=author,
        timestamp=_parse_timestamp(str(row["timestamp"])),
        text=text,
        registration_location=row.get("registration_location") or None,
        content_location=row.get("content_location") or None,
        is_original=is_original,
    )


def parse_events(source, fmt: str = "ndjson", delimiter: str = ",") -> tuple[list[EventRecord], int]:
    """Parse an event stream; returns (records, skipped_count).

    Malformed rows are counted and skipped. If more than half of the rows
    are malformed the whole corpus is rejected.
    """
    close = False
    if isinstance(source, (str, Path)):
        try:
            fh: TextIO = open(source, encoding="utf-8", newline="")
        except OSError as exc:
            raise InputFormatError(f"cannot read events: {source}: {exc}") from exc
        close = True
    else:
        fh = source
    try:
        if fmt == "ndjson":
            rows: Iterable[dict] = _iter_ndjson(fh)
        elif fmt == "csv":
            rows = csv.DictReader(fh, delimiter=delimiter)
        else:
            raise ValueError(f"unknown event format: {fmt}")
        records: list[EventRecord] = []
        skipped = 0
        total = 0
        seen: set[str] = set()
        for row in rows:
            total += 1
            if row is None:
                skipped += 1
                continue
            try:
                rec = _record_from_mapping(row)
            except (ValueError, KeyError, TypeError):
                skipped += 1
                continue
            if rec.id in seen:
                skipped += 1
                continue
            seen.add(rec.id)
            records.append(rec)
        if total > 0 and skipped * 2 > total:
            raise CorpusRejectedError(
                f"{skipped}/{total} rows malformed; corpus rejected"
            )
        return records, skipped
    finally:
        if close:
            fh.close()


def _iter_ndjson(fh):
    for line in fh:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            yield obj if isinstance(obj, dict) else None
        except json.JSONDecodeError:
            yield None


def resolve_location(record: EventRecord, gaz: Gazetteer) -> Optional[LocatedEvent]:
    """Registration location wins whenever it resolves; content is fallback."""
    region = gaz.lookup(record.registration_location)
    if region is not None:
        return LocatedEvent(record, region, LocationSource.REGISTRATION)
    region = gaz.lookup(record.content_location)
    if region is not None:
        return LocatedEvent(record, region, LocationSource.CONTENT)
    return None


_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_TOKEN_RE = re.compile(r"[a-z0-9]+")


def preprocess_text(text: str, stopwords: frozenset[str] | set[str] = frozenset()) -> tuple[str, ...]:
    """Clean and tokenize: URLs and @-mentions dropped, '#' marker stripped
    (the tag's word body is kept), lowercase alphanumeric tokens, stopwords
    removed."""
    cleaned = _URL_RE.sub(" ", text)
    cleaned = _MENTION_RE.sub(" ", cleaned)
    cleaned = cleaned.replace("#", " ")
    tokens = _TOKEN_RE.findall(cleaned.lower())
    return tuple(t for t in tokens if t not in stopwords)


def tokenize_events(events: Iterable[EventRecord], stopwords=frozenset()) -> list[TokenizedDoc]:
    return [TokenizedDoc(e.id, preprocess_text(e.text, stopwords)) for e in events]


def filter_window(records: list[LocatedEvent], start: date, end: date) -> list[LocatedEvent]:
    """Keep records whose UTC calendar day falls in [start, end]; annotate
    each with its day index (0 = start)."""
    if start > end:
        raise ValueError(f"window start {start} after end {end}")
    out = []
    for rec in records:
        day = rec.event.timestamp.astimezone(timezone.utc).date()
        if start <= day <= end:
            out.append(replace(rec, day_index=(day - start).days))
    return out


def window_length(start: date, end: date) -> int:
    if start > end:
        raise ValueError(f"window start {start} after end {end}")
    return (end - start).days + 1
