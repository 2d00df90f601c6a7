import json

import pytest

from diffusion_lens.cli import PipelineConfig, derive_seed, main
from diffusion_lens.errors import ConfigError

SYNTH_SPEC = {
    "seed": 7,
    "window_start": "2020-09-02",
    "embedding_dims": 32,
    "regions": [
        {
            "city": "Synthville",
            "state": "OR",
            "author_pool": 120,
            "topics": {
                "health impact": {
                    "beta": 1.8, "gamma": 0.8, "n": 100, "i0": 2,
                    "days": 16, "seed": 1,
                },
                "evacuation": {
                    "beta": 2.5, "gamma": 1.6, "n": 100, "i0": 2,
                    "days": 16, "seed": 2,
                },
            },
        }
    ],
    "vocab": {
        "health impact": ["smoke", "health", "lung", "air", "ash", "sky"],
        "evacuation": ["evacuate", "firefighter", "rescue", "level", "order", "battle"],
    },
}

HEALTH_VOCAB = set(SYNTH_SPEC["vocab"]["health impact"])


def write_config(tmp_path, data_dir, out_dir, **extra):
    cfg = {
        "events_path": str(data_dir / "corpus.ndjson"),
        "gazetteer_path": str(data_dir / "gazetteer.csv"),
        "stopwords_path": str(data_dir / "stopwords.txt"),
        "embeddings_path": str(data_dir / "embeddings.txt"),
        "labels_path": str(tmp_path / "labels.csv"),
        "window_start": "2020-09-02",
        "window_end": "2020-09-17",
        "k": 2,
        "seed": 7,
        "out_dir": str(out_dir),
    }
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def write_labels(tmp_path, by_cluster):
    lines = ["cluster_index,category"]
    for c, cat in sorted(by_cluster.items()):
        lines.append(f"{c},{cat}")
    (tmp_path / "labels.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def label_clusters_from_report(out_dir):
    """Map each cluster to a topic by inspecting its keyword list."""
    by_cluster = {}
    with open(out_dir / "topic_report.jsonl", encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            terms = {t for t, _ in row["top_terms"]}
            topic = "health impact" if terms & HEALTH_VOCAB else "evacuation"
            by_cluster[row["cluster"]] = topic
    return by_cluster


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Full synth -> ingest -> topics -> series -> fit run, shared by tests."""
    tmp_path = tmp_path_factory.mktemp("cli")
    data_dir = tmp_path / "data"
    out_dir = tmp_path / "out"
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(SYNTH_SPEC), encoding="utf-8")
    assert main(["synth", "--spec", str(spec_path), "--out", str(data_dir)]) == 0

    config = write_config(tmp_path, data_dir, out_dir)
    write_labels(tmp_path, {0: "pending", 1: "pending"})
    assert main(["ingest", "--config", str(config)]) == 0
    assert main(["topics", "--config", str(config)]) == 0
    write_labels(tmp_path, label_clusters_from_report(out_dir))
    assert main(["topics", "--config", str(config)]) == 0
    assert main(["series", "--config", str(config)]) == 0
    assert main(["fit", "--config", str(config)]) == 0
    return tmp_path, data_dir, out_dir, config


class TestPipeline:
    def test_outputs_exist(self, pipeline):
        _, data_dir, out_dir, _ = pipeline
        for name in (
            "located.ndjson", "ingest_summary.json", "topic_report.jsonl",
            "doc_categories.ndjson", "series.tsv", "regions.tsv",
            "fit_report.jsonl", "fit_report.tsv",
        ):
            assert (out_dir / name).exists(), name
        assert any((out_dir / "trajectories").iterdir())

    def test_ingest_summary(self, pipeline):
        _, _, out_dir, _ = pipeline
        summary = json.loads((out_dir / "ingest_summary.json").read_text())
        assert summary["skipped_rows"] == 0
        assert summary["located"] == summary["total"]
        assert summary["located_by_registration"] == summary["located"]

    def test_series_counts_match_synth_spec(self, pipeline):
        _, data_dir, out_dir, _ = pipeline
        spec_series = json.loads((data_dir / "corpus_summary.json").read_text())
        expected = spec_series["regions"][0]["series"]
        counts = {}
        with open(out_dir / "series.tsv", encoding="utf-8") as fh:
            next(fh)
            for line in fh:
                _, topic, day, count = line.rstrip("\n").split("\t")
                counts.setdefault(topic, {})[int(day)] = int(count)
        for topic, days in expected.items():
            got = [counts[topic].get(d, 0) for d in range(len(days))]
            assert got == days, topic

    def test_fit_recovers_spec_params(self, pipeline):
        _, _, out_dir, _ = pipeline
        truth = {
            name: (t["beta"], t["gamma"])
            for name, t in SYNTH_SPEC["regions"][0]["topics"].items()
        }
        rows = [
            json.loads(line)
            for line in (out_dir / "fit_report.jsonl").read_text().splitlines()
        ]
        assert len(rows) == 2
        for row in rows:
            beta, gamma = truth[row["topic"]]
            assert row["converged"] is True
            assert abs(row["infection_rate"] - beta) / beta <= 0.05
            assert abs(row["recovery_rate"] - gamma) / gamma <= 0.05

    def test_report_command(self, pipeline, capsys):
        _, _, _, config = pipeline
        assert main(["report", "--config", str(config)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("location\ttopic")
        assert "Synthville, OR" in out

    def test_rerun_is_byte_identical(self, pipeline):
        tmp_path, data_dir, out_dir, _ = pipeline
        out2 = tmp_path / "out2"
        config2 = tmp_path / "config2.json"
        base = json.loads((tmp_path / "config.json").read_text())
        base["out_dir"] = str(out2)
        config2.write_text(json.dumps(base), encoding="utf-8")
        for cmd in ("ingest", "topics", "series", "fit"):
            assert main([cmd, "--config", str(config2)]) == 0
        for name in ("located.ndjson", "topic_report.jsonl", "series.tsv",
                     "fit_report.jsonl"):
            assert (out2 / name).read_bytes() == (out_dir / name).read_bytes(), name


class TestErrorPaths:
    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["ingest", "--config", str(tmp_path / "nope.json")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_unknown_config_field(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text('{"surprise": 1}', encoding="utf-8")
        assert main(["ingest", "--config", str(path)]) == 2
        assert "unknown config fields" in capsys.readouterr().err

    def test_malformed_events_exit_3(self, tmp_path, capsys):
        data = tmp_path / "data"
        data.mkdir()
        (data / "corpus.ndjson").write_text("not json\n{broken\n", encoding="utf-8")
        (data / "gazetteer.csv").write_text(
            "alias,city,state\n\"Synthville, OR\",Synthville,OR\n", encoding="utf-8"
        )
        for name in ("stopwords.txt", "embeddings.txt"):
            (data / name).write_text("", encoding="utf-8")
        write_labels(tmp_path, {0: "a", 1: "b"})
        config = write_config(tmp_path, data, tmp_path / "out")
        assert main(["ingest", "--config", str(config)]) == 3
        assert "error:" in capsys.readouterr().err

    def test_bad_window_flag(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text("{}", encoding="utf-8")
        assert main(["ingest", "--config", str(path), "--window", "2020-09-02"]) == 2
        capsys.readouterr()

    def test_topics_before_ingest(self, tmp_path, capsys):
        data = tmp_path / "data"
        data.mkdir()
        for name in ("corpus.ndjson", "gazetteer.csv", "stopwords.txt",
                     "embeddings.txt"):
            (data / name).write_text("", encoding="utf-8")
        write_labels(tmp_path, {0: "a", 1: "b"})
        config = write_config(tmp_path, data, tmp_path / "out")
        assert main(["topics", "--config", str(config)]) == 2
        assert "run ingest first" in capsys.readouterr().err

    def test_bad_synth_spec(self, tmp_path, capsys):
        spec = tmp_path / "spec.json"
        spec.write_text('{"regions": "oops"}', encoding="utf-8")
        assert main(["synth", "--spec", str(spec), "--out", str(tmp_path / "o")]) == 2
        capsys.readouterr()


class TestConfig:
    def test_seed_derivation_stable(self):
        assert derive_seed(7, "kmeans") == derive_seed(7, "kmeans")
        assert derive_seed(7, "kmeans") != derive_seed(8, "kmeans")
        assert derive_seed(7, "kmeans") != derive_seed(7, "other")

    def test_overrides_win(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"k": 3, "seed": 1}', encoding="utf-8")
        cfg = PipelineConfig.load(path, {"k": 5, "seed": None})
        assert cfg.k == 5
        assert cfg.seed == 1

    def test_window_validation(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(
            '{"window_start": "2020-10-03", "window_end": "2020-09-02"}',
            encoding="utf-8",
        )
        with pytest.raises(ConfigError):
            PipelineConfig.load(path).window

    def test_fit_subconfig(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"fit": {"horizon_days": 16, "i0_rule": "fit"}}',
                        encoding="utf-8")
        cfg = PipelineConfig.load(path)
        assert cfg.fit.horizon_days == 16
        assert cfg.fit.i0_rule == "fit"
