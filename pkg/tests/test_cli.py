from __future__ import annotations

from pathlib import Path

import pytest

import visquant
from visquant import Corpus, QuantifierLabel, file_digest, read_json, read_manifests
from visquant.cli import open_corpus, run

WORLD: list[str] = [
    "--objects", "12", "--properties", "6", "--mean-plausible", "4", "--dim", "8", "--slots", "8",
]  # fmt: skip


def ok(*argv: str | Path) -> None:
    assert run([str(a) for a in argv]) == 0


def pipeline(root: Path) -> Path:
    ok("generate", "--seed", 3, "--per-quantifier", 30, *WORLD, "--out", root / "corpus")
    ok("split", "--corpus", root / "corpus", "--seed", 3, "--out", root / "splits")

    for arch in ("bow", "qsan"):
        ok("train", "--split", root / "splits", "--arch", arch, "--d-hidden", 4, "--max-epochs", 2,
           "--out", root / "models")  # fmt: skip

    ok(
        "eval",
        "--split", root / "splits",
        "--checkpoint", root / "models" / "bow.vqck",
        "--checkpoint", root / "models" / "qsan.vqck",
        "--out", root / "reports",
    )  # fmt: skip

    for kind in ("ratio", "distractor", "span", "confusion"):
        ok("analyze", "--split", root / "splits", "--checkpoint", root / "models" / "qsan.vqck", "--kind", kind,
           "--out", root / "reports")  # fmt: skip

    ok("audit", "--corpus", root / "corpus", "--out", root / "audit")
    return root


@pytest.fixture(scope="module")
def first(tmp_path_factory: pytest.TempPathFactory) -> Path:
    return pipeline(tmp_path_factory.mktemp("first"))


@pytest.fixture(scope="module")
def second(tmp_path_factory: pytest.TempPathFactory) -> Path:
    return pipeline(tmp_path_factory.mktemp("second"))


class TestUsage:
    @pytest.mark.parametrize(
        "argv", [[], ["frobnicate"], ["train"], ["generate", "--bogus"], ["analyze", "--split", "x", "--kind", "nope"]]
    )
    def test_usage_errors(self, argv: list[str]) -> None:
        assert run(argv) == 2

    def test_help(self) -> None:
        assert run(["--help"]) == 0

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        assert run(["--version"]) == 0
        assert capsys.readouterr().out.startswith(f"visquant: {visquant.__version__}")

    def test_failures(self, tmp_path: Path, first: Path) -> None:
        assert run(["audit", "--corpus", str(tmp_path / "missing")]) == 1
        assert run(["eval", "--split", str(first / "splits"), "--checkpoint", str(tmp_path / "x.vqck")]) == 1
        assert run(["train", "--split", str(first / "splits"), "--arch", "dot-cnn", "--out", str(tmp_path)]) == 1
        assert run(["train", "--split", str(first / "splits"), "--out", str(tmp_path)]) == 1
        assert run(["repro", "sideways-qsan", "--out", str(tmp_path)]) == 1

    def test_bin_count(self, tmp_path: Path, first: Path) -> None:
        argv = ["analyze", "--split", str(first / "splits"), "--checkpoint", str(first / "models" / "qsan.vqck"),
                "--kind", "ratio", "--out", str(tmp_path)]  # fmt: skip
        config = tmp_path / "bins.conf"
        config.write_text("bins = 0\n")

        assert run([*argv, "--bins", "0"]) == 2
        assert run([*argv, "--bins", "-3"]) == 2
        assert run(["--config", str(config), *argv]) == 1

    def test_unwritable_output(self, tmp_path: Path) -> None:
        blocker = tmp_path / "blocker"
        blocker.write_text("")

        assert run(["generate", "--per-quantifier", "2", *WORLD, "--out", str(blocker / "corpus")]) == 1

    def test_config_file(self, tmp_path: Path) -> None:
        config = tmp_path / "world.conf"
        config.write_text("objects = 10\nproperties = 5\nmean_plausible = 3\nper_quantifier = 3\ndim = 6\nslots = 8\n")

        assert run(["--config", str(config), "generate", "--dim", "4", "--out", str(tmp_path / "corpus")]) == 0

        meta = read_json(tmp_path / "corpus" / "corpus.json")
        assert meta["dim"] == 4
        assert meta["count"] == 15
        assert meta["provenance"]["config"]["objects"] == 10

    def test_default_output_directory(self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("VISQUANT_OUTPUT_DIR", str(tmp_path / "env"))

        assert run(["generate", "--per-quantifier", "2", *WORLD]) == 0
        assert (tmp_path / "env" / "corpus.json").is_file()


class TestPipeline:
    def test_artifacts(self, first: Path) -> None:
        assert isinstance(open_corpus(first / "corpus"), Corpus)
        assert {p.name for p in (first / "splits").iterdir()} == {"train.txt", "val.txt", "test.txt"}
        assert {p.name for p in (first / "models").iterdir()} == {
            f"{arch}.{suffix}" for arch in ("bow", "qsan") for suffix in ("vqck", "history.json", "history.tsv")
        }
        assert (first / "reports" / "comparison.json").is_file()

        for kind in ("ratio", "distractor", "span", "confusion"):
            assert read_json(first / "reports" / f"qsan.{kind}.json")["kind"] == kind

    def test_reports_record_their_origin(self, first: Path) -> None:
        report = read_json(first / "reports" / "qsan.report.json")

        assert report["total"] == sum(report["support"].values())
        assert report["provenance"]["seed"] == 0
        assert report["provenance"]["checkpoint"] == "qsan.vqck"
        assert report["provenance"]["config"]["command"] == "eval"

        comparison = read_json(first / "reports" / "comparison.json")
        assert comparison["models"] == ["bow", "qsan"]

    def test_audit(self, first: Path) -> None:
        bias = read_json(first / "audit" / "bias.json")
        describe = read_json(first / "audit" / "describe.json")

        assert describe["datapoints"] == 150
        assert describe["queries"] == len(bias["queries"])
        assert 0 < bias["max_ratio"] <= 1.0
        assert (first / "audit" / "bias.tsv").is_file()

    def test_byte_identical_reruns(self, first: Path, second: Path) -> None:
        for directory in ("corpus", "models", "reports", "audit"):
            names = sorted(p.name for p in (first / directory).iterdir())

            assert names == sorted(p.name for p in (second / directory).iterdir())
            for name in names:
                assert file_digest(first / directory / name) == file_digest(second / directory / name), name


def test_skewed_audit(corpus: Corpus, tmp_path: Path) -> None:
    chosen: dict[tuple[int, int], QuantifierLabel] = {}
    kept = [d for d in corpus if chosen.setdefault(d.query, d.label) is d.label]
    skewed = Corpus(kept, catalog=corpus.catalog, tables=corpus.tables, config=corpus.config, seed=corpus.seed)
    skewed.save(tmp_path / "skewed")

    assert run(["audit", "--corpus", str(tmp_path / "skewed"), "--out", str(tmp_path / "audit")]) == 0
    assert read_json(tmp_path / "audit" / "bias.json")["max_ratio"] == 1.0
    assert all(max(q["ratios"].values()) == 1.0 for q in read_json(tmp_path / "audit" / "bias.json")["queries"])


class TestDots:
    def test_pipeline(self, tmp_path: Path) -> None:
        ok("dotsim", "--per-quantifier", 4, "--seed", 2, "--out", tmp_path / "dots")
        assert (tmp_path / "dots" / "dots.bin").is_file()

        ok("split", "--corpus", tmp_path / "dots", "--out", tmp_path / "splits")
        ok("train", "--split", tmp_path / "splits", "--arch", "dot-cnn", "--filters", 2, "--max-epochs", 1,
           "--out", tmp_path / "models")  # fmt: skip
        ok("eval", "--split", tmp_path / "splits", "--checkpoint", tmp_path / "models" / "dot-cnn.vqck",
           "--out", tmp_path / "reports")  # fmt: skip

        assert read_json(tmp_path / "reports" / "dot-cnn.report.json")["total"] == 5

    def test_dot_corpus_rejections(self, tmp_path: Path) -> None:
        ok("dotsim", "--per-quantifier", 3, "--out", tmp_path / "dots")

        assert run(["split", "--corpus", str(tmp_path / "dots"), "--setting", "unsobj", "--out", str(tmp_path)]) == 1
        assert run(["audit", "--corpus", str(tmp_path / "dots" / "dots.bin"), "--out", str(tmp_path)]) == 1


@pytest.mark.slow
def test_repro_dotworld(tmp_path: Path) -> None:
    ok("repro", "dotworld", "--out", tmp_path)
    root = tmp_path / "dotworld"
    manifest = read_json(root / "manifest.json")

    assert manifest["accuracy"] >= 0.90
    assert manifest["checkpoint"] == "dot-cnn.vqck"
    assert manifest["train"]["learning_rate"] == 0.5
    assert len(read_manifests(root / "splits")[0]["train"]) >= 7000
    assert read_json(root / "report.json")["accuracy"] == manifest["accuracy"]
    for name, digest in manifest["digests"].items():
        assert file_digest(root / name) == digest


@pytest.mark.slow
def test_blind_baseline_is_near_chance(tmp_path: Path) -> None:
    ok("repro", "unc-bow", "--seed", 1, "--out", tmp_path)
    root = tmp_path / "unc-bow"

    assert read_json(root / "corpus" / "corpus.json")["count"] == 2000
    assert 0.15 <= read_json(root / "manifest.json")["accuracy"] <= 0.30


@pytest.mark.slow
def test_blind_lstm_is_near_chance(tmp_path: Path) -> None:
    ok("repro", "unc-lstm", "--seed", 1, "--out", tmp_path)

    assert 0.15 <= read_json(tmp_path / "unc-lstm" / "manifest.json")["accuracy"] <= 0.30
