"""Command-line pipeline: ingest -> topics -> series -> fit -> report,
plus synthetic-data generation.

All commands take --config pointing at a single JSON document; individual
flags override config fields. Every random choice derives from the one
config seed via fixed labels, so identical inputs give byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import embed as embed_mod
from . import report as report_mod
from . import series as series_mod
from . import synth as synth_mod
from . import topics as topics_mod
from ._accel import apply_thread_cap
from .errors import ConfigError, DiffusionLensError
from .fit import FitConfig, fit_batch, model_trajectory
from .sir import SirParams, write_trajectory


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class PipelineConfig:
    events_path: str = ""
    events_format: str = ""  # inferred from extension when empty
    gazetteer_path: str = ""
    stopwords_path: str = ""
    labels_path: str = ""
    embeddings_path: str = ""
    window_start: str = "2020-09-02"
    window_end: str = "2020-10-03"
    granularity: str = "city"
    k: int = topics_mod.DEFAULT_K
    d_out: int = 5
    seed: int = 0
    out_dir: str = "out"
    excluded_categories: list[str] = field(
        default_factory=lambda: sorted(topics_mod.DEFAULT_EXCLUDED)
    )
    engagement: str = "authors"
    include_reposts: bool = False
    normalize_embeddings: bool = True
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError("k must be >= 2")
        if self.d_out < 1:
            raise ConfigError("d_out must be >= 1")

    @property
    def window(self) -> tuple[date, date]:
        start = date.fromisoformat(self.window_start)
        end = date.fromisoformat(self.window_end)
        if start > end:
            raise ConfigError(f"window start {start} after end {end}")
        return start, end

    @property
    def n_days(self) -> int:
        start, end = self.window
        return (end - start).days + 1

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {path}: {exc}") from exc
        if overrides:
            raw.update({k: v for k, v in overrides.items() if v is not None})
        fit_raw = raw.pop("fit", {})
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            cfg = cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        if fit_raw:
            try:
                cfg.fit = FitConfig(**fit_raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad fit config: {exc}") from exc
        return cfg


def _require_path(path: str, kind: str) -> Path:
    if not path:
        raise ConfigError(f"missing {kind} path in config")
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{kind} path does not exist: {p}")
    return p


def _events_format(cfg: PipelineConfig) -> str:
    if cfg.events_format:
        return cfg.events_format
    suffix = Path(cfg.events_path).suffix.lower()
    return "csv" if suffix in (".csv", ".tsv") else "ndjson"


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(cfg: PipelineConfig) -> dict:
    events_path = _require_path(cfg.events_path, "events")
    gaz = corpus_mod.Gazetteer.load(_require_path(cfg.gazetteer_path, "gazetteer"))
    records, skipped = corpus_mod.parse_events(events_path, _events_format(cfg))

    located = []
    for rec in records:
        loc = corpus_mod.resolve_location(rec, gaz)
        if loc is not None:
            located.append(loc)
    start, end = cfg.window
    windowed = corpus_mod.filter_window(located, start, end)

    out = _out_dir(cfg)
    with open(out / "located.ndjson", "w", encoding="utf-8", newline="\n") as fh:
        for loc in windowed:
            row = {
                "id": loc.event.id,
                "author_id": loc.event.author_id,
                "city": loc.region[0],
                "state": loc.region[1],
                "source": loc.location_source.value,
                "day_index": loc.day_index,
                "is_original": loc.event.is_original,
                "text": loc.event.text,
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    summary = {
        "total": len(records),
        "skipped_rows": skipped,
        "located": len(located),
        "located_by_registration": sum(
            1 for l in located
            if l.location_source is corpus_mod.LocationSource.REGISTRATION
        ),
        "located_by_content": sum(
            1 for l in located
            if l.location_source is corpus_mod.LocationSource.CONTENT
        ),
        "dropped": len(records) - len(located),
        "in_window": len(windowed),
        "originals": sum(1 for l in windowed if l.event.is_original),
    }
    with open(out / "ingest_summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _load_located(out: Path) -> list[dict]:
    path = out / "located.ndjson"
    if not path.exists():
        raise ConfigError(f"run ingest first: {path} missing")
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def cmd_topics(cfg: PipelineConfig) -> dict:
    out = _out_dir(cfg)
    located = _load_located(out)
    originals = [row for row in located if row["is_original"]]
    doc_ids = [row["id"] for row in originals]

    matrix = embed_mod.load_embeddings(_require_path(cfg.embeddings_path, "embeddings"))
    order = {doc_id: i for i, doc_id in enumerate(matrix.doc_ids)}
    missing = [d for d in doc_ids if d not in order]
    if missing:
        raise ConfigError(
            f"embeddings missing for {len(missing)} docs, first 10: {missing[:10]}"
        )
    aligned = embed_mod.EmbeddingMatrix(
        doc_ids, matrix.vectors[[order[d] for d in doc_ids]]
    )
    if cfg.k > len(doc_ids):
        raise ValueError(f"k={cfg.k} exceeds {len(doc_ids)} original docs")

    if cfg.normalize_embeddings:
        aligned, _ = embed_mod.cosine_normalize(aligned)
    model = embed_mod.fit_reduction(aligned, min(cfg.d_out, min(aligned.vectors.shape)))
    reduced = embed_mod.project(model, aligned)
    reduced, _ = embed_mod.cosine_normalize(reduced)

    cm = topics_mod.kmeans(reduced, cfg.k, seed=derive_seed(cfg.seed, "kmeans"))

    stopwords = (
        corpus_mod.load_stopwords(cfg.stopwords_path) if cfg.stopwords_path else frozenset()
    )
    docs = [
        corpus_mod.TokenizedDoc(row["id"], corpus_mod.preprocess_text(row["text"], stopwords))
        for row in originals
    ]
    tm = topics_mod.ctfidf(docs, cm.assignments, k=cfg.k)
    terms = topics_mod.top_terms(tm, n=10)

    labels = topics_mod.load_labels(_require_path(cfg.labels_path, "labels"), cfg.k)
    kept, dropped = topics_mod.apply_labels(
        cm, labels, frozenset(cfg.excluded_categories)
    )

    sizes = {c: 0 for c in range(cfg.k)}
    for c in cm.assignments.values():
        sizes[c] += 1
    with open(out / "topic_report.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for c in range(cfg.k):
            row = {
                "cluster": c,
                "category": labels[c],
                "size": sizes[c],
                "top_terms": [[t, round(w, 10)] for t, w in terms[c]],
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    with open(out / "doc_categories.ndjson", "w", encoding="utf-8", newline="\n") as fh:
        for doc_id in doc_ids:
            if doc_id in kept:
                fh.write(
                    json.dumps({"id": doc_id, "category": kept[doc_id]}, sort_keys=True)
                    + "\n"
                )
    return {"clusters": cfg.k, "kept_docs": len(kept), "dropped_docs": len(dropped),
            "inertia": cm.inertia}


def cmd_series(cfg: PipelineConfig) -> dict:
    out = _out_dir(cfg)
    located = _load_located(out)
    cat_path = out / "doc_categories.ndjson"
    if not cat_path.exists():
        raise ConfigError(f"run topics first: {cat_path} missing")
    with open(cat_path, encoding="utf-8") as fh:
        categories = {
            row["id"]: row["category"]
            for row in (json.loads(line) for line in fh if line.strip())
        }

    events = []
    for row in located:
        if not cfg.include_reposts and not row["is_original"]:
            continue
        cat = categories.get(row["id"])
        if cat is None:
            continue
        events.append(
            series_mod.LabeledEvent(
                author_id=row["author_id"],
                city=row["city"],
                state=row["state"],
                day_index=row["day_index"],
                topic=cat,
            )
        )
    series = series_mod.build_series(
        events, cfg.n_days, granularity=cfg.granularity, engagement=cfg.engagement
    )
    series_mod.write_series(out / "series.tsv", out / "regions.tsv", series)
    return {"series": len(series), "events": len(events)}


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name)


def cmd_fit(cfg: PipelineConfig) -> dict:
    out = _out_dir(cfg)
    series_path = out / "series.tsv"
    regions_path = out / "regions.tsv"
    if not series_path.exists() or not regions_path.exists():
        raise ConfigError(f"run series first: {series_path} missing")
    series = series_mod.read_series(series_path, regions_path)

    fit_cfg = cfg.fit
    if series and len(series[0].day_counts) != fit_cfg.horizon_days:
        fit_cfg = replace(fit_cfg, horizon_days=len(series[0].day_counts))
    results = fit_batch(series, fit_cfg)

    rows = [
        report_mod.result_row(res, n_users=s.n_users)
        for res, s in zip(results, series)
    ]
    report_mod.write_fit_report_jsonl(out / "fit_report.jsonl", rows)
    report_mod.write_fit_report_table(out / "fit_report.tsv", rows)

    traj_dir = out / "trajectories"
    traj_dir.mkdir(exist_ok=True)
    for res in results:
        traj = model_trajectory(res, fit_cfg)
        if traj is None:
            continue
        name = f"{_slug(series_mod.region_name(res.region))}__{_slug(res.topic)}.tsv"
        write_trajectory(traj_dir / name, traj, res.params)
    return {"series": len(series), "fitted": sum(1 for r in results if r.converged)}


def cmd_report(cfg: PipelineConfig) -> dict:
    out = _out_dir(cfg)
    path = out / "fit_report.jsonl"
    if not path.exists():
        raise ConfigError(f"run fit first: {path} missing")
    rows = report_mod.read_fit_report_jsonl(path)
    report_mod.write_fit_report_table(out / "fit_report.tsv", rows)
    header = "\t".join(report_mod.REPORT_COLUMNS)
    lines = [header]
    for row in rows:
        lines.append(
            "\t".join(report_mod._cell(row.get(col)) for col in report_mod.REPORT_COLUMNS)
        )
    print("\n".join(lines))
    return {"rows": len(rows)}


def _synth_spec_from_json(raw: dict) -> synth_mod.CorpusSpec:
    def topic_spec(t: dict) -> synth_mod.SynthSpec:
        try:
            return synth_mod.SynthSpec(
                params=SirParams(
                    beta=float(t["beta"]), gamma=float(t["gamma"]), n=float(t["n"])
                ),
                i0=float(t["i0"]),
                days=int(t["days"]),
                noise=t.get("noise", "none"),
                noise_eps=float(t.get("noise_eps", 0.0)),
                seed=int(t.get("seed", 0)),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad topic spec {t!r}: {exc}") from exc

    try:
        regions = tuple(
            synth_mod.RegionSpec(
                city=r["city"],
                state=r["state"],
                author_pool=int(r["author_pool"]),
                topics={name: topic_spec(t) for name, t in r["topics"].items()},
            )
            for r in raw["regions"]
        )
        vocab = {name: tuple(words) for name, words in raw.get("vocab", {}).items()}
        return synth_mod.CorpusSpec(
            regions=regions,
            vocab=vocab,
            window_start=date.fromisoformat(raw["window_start"]),
            seed=int(raw.get("seed", 0)),
            generator=raw.get("generator", "ode"),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid synth spec: missing/invalid field {exc}") from exc


def cmd_synth(spec_path, out_dir) -> dict:
    try:
        with open(spec_path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read synth spec: {spec_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"synth spec is not valid JSON: {exc}") from exc

    spec = _synth_spec_from_json(raw)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    summary = synth_mod.gen_corpus(spec, out / "corpus.ndjson")

    with open(out / "gazetteer.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("alias,city,state\n")
        for r in spec.regions:
            fh.write(f'"{r.city}, {r.state}",{r.city},{r.state}\n')
    (out / "stopwords.txt").write_text("", encoding="utf-8")

    # Deterministic hash embeddings so the pipeline runs with no external model.
    records, _ = corpus_mod.parse_events(out / "corpus.ndjson", "ndjson")
    originals = [r for r in records if r.is_original]
    ids = [r.id for r in originals]
    tokens = [corpus_mod.preprocess_text(r.text) for r in originals]
    dims = int(raw.get("embedding_dims", 32))
    vectors = synth_mod.hash_embeddings(ids, tokens, dims=dims)
    embed_mod.write_embeddings(
        out / "embeddings.txt", embed_mod.EmbeddingMatrix(ids, vectors)
    )

    # Spec-generated series, directly fittable without the corpus steps.
    all_series = []
    for rspec in spec.regions:
        all_series.extend(synth_mod._region_series(rspec, spec).values())
    series_mod.write_series(out / "synth_series.tsv", out / "synth_regions.tsv", all_series)

    with open(out / "corpus_summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


COMMANDS = ("ingest", "topics", "series", "fit", "synth", "report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffusion-lens",
        description="Engagement time series and SIR-style diffusion fitting",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "synth":
            p.add_argument("--spec", required=True, help="synth spec JSON")
            p.add_argument("--out", default="synth_out")
        else:
            p.add_argument("--config", required=True, help="pipeline config JSON")
            p.add_argument("--out", default=None)
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--k", type=int, default=None)
            p.add_argument("--window", default=None, help="START:END (ISO dates)")
            p.add_argument("--granularity", choices=("city", "state"), default=None)
    return parser


def main(argv=None) -> int:
    apply_thread_cap()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            summary = cmd_synth(args.spec, args.out)
        else:
            overrides = {
                "out_dir": args.out,
                "seed": args.seed,
                "k": args.k,
                "granularity": args.granularity,
            }
            if args.window:
                try:
                    start, end = args.window.split(":", 1)
                except ValueError:
                    raise ConfigError(f"bad --window value: {args.window!r}")
                overrides["window_start"] = start
                overrides["window_end"] = end
            cfg = PipelineConfig.load(args.config, overrides)
            handler = {
                "ingest": cmd_ingest,
                "topics": cmd_topics,
                "series": cmd_series,
                "fit": cmd_fit,
                "report": cmd_report,
            }[args.command]
            summary = handler(cfg)
        if args.command != "report":
            print(json.dumps(summary, sort_keys=True))
        return 0
    except DiffusionLensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():  # console-script shim
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
