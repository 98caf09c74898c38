"""Tests for the hierbone command line."""

import json
from pathlib import Path

import pandas as pd
import pytest

from hierbone.artifacts import read_backbone, read_cooccurrence, sha256_file
from hierbone.cli import DEFAULT_ALPHA_GRID, build_config, build_parser, main
from hierbone.exceptions import ConfigError


@pytest.fixture
def toy_tsv(tmp_path: Path, toy_pairs: list[tuple[str, str]]) -> Path:
    """The toy pairs as a headerless object<TAB>tag file."""
    path = tmp_path / "toy.tsv"
    path.write_text("".join(f"{o}\t{t}\n" for o, t in toy_pairs), encoding="utf-8")
    return path


@pytest.fixture
def chain_tsv(tmp_path: Path) -> Path:
    """Reference animal -> mammal -> dog."""
    path = tmp_path / "reference.tsv"
    path.write_text("animal\tmammal\nmammal\tdog\n", encoding="utf-8")
    return path


@pytest.fixture
def out(tmp_path: Path) -> Path:
    return tmp_path / "out"


def run_pipeline(toy_tsv: Path, out: Path, *extra: str) -> int:
    return main(
        ["pipeline", "--input", str(toy_tsv), "--z-th", "2", "--out-dir", str(out), *extra]
    )


class TestParser:
    """Tests for argument parsing."""

    def test_no_command_prints_help(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Without a command, help is printed and nothing fails."""
        assert main([]) == 0
        assert "pipeline" in capsys.readouterr().out

    def test_version(self, capsys: pytest.CaptureFixture[str]) -> None:
        """--version prints the package version."""
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert "hierbone" in capsys.readouterr().out

    def test_alpha_options_exclusive(self) -> None:
        """Only one way of choosing alpha_th may be given."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["pipeline", "--alpha-th", "0.1", "--target-edges", "3"])

    def test_bad_planted_tree(self) -> None:
        """Planted trees are BRANCHING,DEPTH."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["benchgen", "--planted-tree", "3"])


class TestBuildConfig:
    """Tests for merging config files with flags."""

    def test_flags(self, toy_tsv: Path) -> None:
        """Flags map onto config fields; comma lists are parsed."""
        args = build_parser().parse_args(
            ["pipeline", "--input", str(toy_tsv), "--alpha-grid", "0.1,0.2", "--seed", "4"]
        )
        config = build_config(args)
        assert config.alpha_grid == (0.1, 0.2)
        assert config.seed == 4
        assert config.input is not None
        assert config.input.path == toy_tsv  # type: ignore[union-attr]

    def test_file_then_flags(self, tmp_path: Path) -> None:
        """Flags override the file, and any alpha flag replaces the file's alpha choice."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"z_th": 3.0, "alpha_th": 0.9, "n_ensembles": 4}))
        args = build_parser().parse_args(
            ["eval", "--config", str(path), "--alpha-grid", "0.1,0.3", "--ensembles", "2"]
        )
        config = build_config(args)
        assert config.z_th == 3.0
        assert config.alpha_th is None
        assert config.alpha_grid == (0.1, 0.3)
        assert config.n_ensembles == 2

    def test_unreadable_file(self, tmp_path: Path) -> None:
        """Broken JSON is a configuration error."""
        path = tmp_path / "config.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            build_config(build_parser().parse_args(["eval", "--config", str(path)]))

    def test_invalid_value(self) -> None:
        """Validation failures name the field."""
        args = build_parser().parse_args(["eval", "--alpha-th", "-1"])
        with pytest.raises(ConfigError, match="alpha_th"):
            build_config(args)

    def test_go_input(self, fixtures_dir: Path) -> None:
        """Several GAF inputs become one species -> path mapping."""
        args = build_parser().parse_args(
            [
                "project",
                "--format",
                "obo+gaf",
                "--input",
                str(fixtures_dir / "yeast.gaf"),
                "--input",
                str(fixtures_dir / "fly.gaf"),
                "--evidence-exclude",
                "IEA,ND",
            ]
        )
        spec = build_config(args).input
        assert spec is not None
        assert set(spec.gaf) == {"yeast", "fly"}  # type: ignore[union-attr]
        assert spec.evidence_exclude == {"IEA", "ND"}  # type: ignore[union-attr]

    def test_duplicate_species(self, fixtures_dir: Path, tmp_path: Path) -> None:
        """Two GAF files named alike cannot be told apart."""
        copy = tmp_path / "yeast.gaf.gz"
        copy.write_bytes(b"")
        args = build_parser().parse_args(
            [
                "project",
                "--format",
                "obo+gaf",
                "--input",
                str(fixtures_dir / "yeast.gaf"),
                "--input",
                str(copy),
            ]
        )
        with pytest.raises(ConfigError, match="species label"):
            build_config(args)


class TestPipeline:
    """Tests for end-to-end extraction."""

    def test_outputs(self, toy_tsv: Path, out: Path) -> None:
        """pipeline writes the pruned graph, the backbone and a manifest."""
        assert run_pipeline(toy_tsv, out, "--alpha-th", "0.55") == 0
        backbone = read_backbone(out / "backbone.tsv")
        assert backbone.edge_set() == {("animal", "dog"), ("mammal", "dog")}
        assert not (out / "removed.tsv").exists()

        manifest = json.loads((out / "pipeline.manifest.json").read_text())
        assert manifest["command"] == "pipeline"
        assert set(manifest["outputs"]) == {"pruned.tsv", "backbone.tsv"}
        for name, digest in manifest["outputs"].items():
            assert sha256_file(out / name) == digest
        assert manifest["inputs"] == {str(toy_tsv): sha256_file(toy_tsv)}
        assert manifest["config"]["z_th"] == 2.0
        assert set(manifest["libraries"]) >= {"numpy", "scipy", "networkx"}

    def test_parsimonious(self, toy_tsv: Path, out: Path) -> None:
        """Parsimonious runs drop the shortcut and keep an audit file."""
        assert run_pipeline(toy_tsv, out, "--alpha-th", "0.5", "--parsimonious") == 0
        assert read_backbone(out / "backbone.tsv").edge_set() == {
            ("animal", "mammal"),
            ("mammal", "dog"),
        }
        assert read_backbone(out / "removed.tsv").edge_set() == {("animal", "dog")}

    def test_target_edges(self, toy_tsv: Path, out: Path) -> None:
        """target-edges chooses the threshold."""
        assert run_pipeline(toy_tsv, out, "--target-edges", "2") == 0
        backbone = read_backbone(out / "backbone.tsv")
        assert backbone.n_edges == 2
        assert backbone.alpha_th == pytest.approx(0.6)

    def test_reruns_are_identical(self, toy_tsv: Path, out: Path) -> None:
        """Running twice produces byte-identical files."""
        assert run_pipeline(toy_tsv, out, "--alpha-th", "0.1") == 0
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        assert run_pipeline(toy_tsv, out, "--alpha-th", "0.1") == 0
        assert {p.name: p.read_bytes() for p in out.iterdir()} == first

    def test_config_file_input(self, toy_tsv: Path, tmp_path: Path, out: Path) -> None:
        """The input and thresholds may come from the config file."""
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps({"input": {"format": "tsv", "path": str(toy_tsv)}, "alpha_th": 0.7})
        )
        assert main(["pipeline", "--config", str(path), "--z-th", "2", "--out-dir", str(out)]) == 0
        assert read_backbone(out / "backbone.tsv").edge_set() == {("animal", "dog")}

    def test_empty_pruned_graph(self, toy_tsv: Path, out: Path) -> None:
        """Nothing significant gives an empty backbone file, a warning and success."""
        with pytest.warns(UserWarning, match="no pairs"):
            code = main(
                ["pipeline", "--input", str(toy_tsv), "--z-th", "100", "--alpha-th", "0.1",
                 "--out-dir", str(out)]
            )
        assert code == 0
        assert read_backbone(out / "backbone.tsv").n_edges == 0

    def test_missing_threshold(
        self, toy_tsv: Path, out: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Extraction needs a way to choose alpha_th; nothing is left behind."""
        assert run_pipeline(toy_tsv, out) == 1
        assert "Error:" in capsys.readouterr().err
        assert not any(out.rglob("*.tsv"))

    def test_missing_input(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """An unreadable input exits with status 1."""
        code = main(["pipeline", "--input", str(tmp_path / "nope.tsv"), "--alpha-th", "0.1"])
        assert code == 1
        assert "Error:" in capsys.readouterr().err

    def test_go_annotations(self, fixtures_dir: Path, out: Path) -> None:
        """GAF files of two species project into one co-occurrence graph."""
        argv = [
            "project",
            "--format",
            "obo+gaf",
            "--input",
            str(fixtures_dir / "yeast.gaf"),
            "--input",
            str(fixtures_dir / "fly.gaf"),
            "--obo",
            str(fixtures_dir / "mini.obo"),
            "--namespace",
            "MF",
            "--out-dir",
            str(out),
        ]
        with pytest.warns(UserWarning, match="contradicts"):
            assert main(argv) == 0
        g = read_cooccurrence(out / "cooccurrence.tsv")
        assert g.n_objects == 6
        assert g.weight("GO:0004386", "GO:0005515") == 1
        manifest = json.loads((out / "project.manifest.json").read_text())
        assert len(manifest["inputs"]) == 3


class TestStageCommands:
    """Tests for running the stages one at a time."""

    def test_chain_matches_pipeline(
        self, toy_tsv: Path, tmp_path: Path, chain_tsv: Path
    ) -> None:
        """project, prune, backbone, reduce and export reproduce the pipeline."""
        stages = tmp_path / "stages"
        directory = ["--out-dir", str(stages)]
        assert main(["project", "--input", str(toy_tsv), *directory]) == 0
        assert main(["prune", "--z-th", "2", *directory]) == 0
        assert main(["backbone", "--alpha-th", "0.5", *directory]) == 0
        assert main(["reduce", *directory]) == 0
        parsimonious = str(stages / "backbone.parsimonious.tsv")
        export = ["export", "--input", parsimonious, "--reference", str(chain_tsv)]
        assert main([*export, *directory]) == 0

        whole = tmp_path / "whole"
        assert run_pipeline(toy_tsv, whole, "--alpha-th", "0.5") == 0
        assert (
            read_backbone(stages / "backbone.tsv").edge_set()
            == read_backbone(whole / "backbone.tsv").edge_set()
        )
        assert read_backbone(stages / "backbone.parsimonious.tsv").edge_set() == {
            ("animal", "mammal"),
            ("mammal", "dog"),
        }
        dot = (stages / "backbone.dot").read_text()
        assert dot.count('status="documented"') == 2
        for command in ("project", "prune", "backbone", "reduce", "export"):
            assert (stages / f"{command}.manifest.json").exists()

    def test_missing_stage_file(self, out: Path) -> None:
        """A stage without its predecessor's file fails cleanly."""
        assert main(["prune", "--out-dir", str(out)]) == 1


class TestEvalCommand:
    """Tests for scoring and benchmarking."""

    def test_score_backbone(
        self, toy_tsv: Path, out: Path, chain_tsv: Path
    ) -> None:
        """eval --backbone scores one backbone in both modes."""
        assert run_pipeline(toy_tsv, out, "--alpha-th", "0.1") == 0
        code = main(
            [
                "eval",
                "--backbone",
                str(out / "backbone.tsv"),
                "--reference",
                str(chain_tsv),
                "--out-dir",
                str(out),
            ]
        )
        assert code == 0
        frame = pd.read_csv(out / "eval.csv").set_index("mode")
        assert frame.loc["path", "precision"] == 1.0
        assert frame.loc["edge", "precision"] == pytest.approx(2 / 3)
        assert len((out / "eval.jsonl").read_text().splitlines()) == 2

    def test_benchmark(self, out: Path) -> None:
        """Benchmark eval writes per-ensemble metrics and their aggregate."""
        code = main(
            [
                "eval",
                "--planted-tree",
                "2,2",
                "--n-products",
                "300",
                "--p-rw",
                "0.9",
                "--ensembles",
                "2",
                "--z-th",
                "2",
                "--alpha-grid",
                "0.05,0.2",
                "--out-dir",
                str(out),
            ]
        )
        assert code == 0
        setting = out / "N300_p0.9"
        assert sorted(p.name for p in setting.iterdir()) == [
            "aggregate.csv",
            "ensemble00.csv",
            "ensemble01.csv",
        ]
        assert len(pd.read_csv(setting / "ensemble00.csv")) == 4
        aggregate = pd.read_csv(setting / "aggregate.csv")
        assert len(aggregate) == 4
        assert set(aggregate["n"]) == {2}
        manifest = json.loads((out / "eval.manifest.json").read_text())
        assert "N300_p0.9/aggregate.csv" in manifest["outputs"]

    def test_settings_grid(self, out: Path) -> None:
        """Every (N, p_rw) combination gets its own directory."""
        argv = ["eval", "--planted-tree", "2,2", "--n-products", "100,200", "--p-rw", "0.5,0.9",
                "--ensembles", "1", "--alpha-th", "0.05", "--out-dir", str(out)]
        assert main(argv) == 0
        assert sorted(p.name for p in out.iterdir() if p.is_dir()) == [
            "N100_p0.5",
            "N100_p0.9",
            "N200_p0.5",
            "N200_p0.9",
        ]
        assert all((out / d / "aggregate.csv").exists() for d in ("N100_p0.5", "N200_p0.9"))

    def test_default_grid(self, out: Path) -> None:
        """Without thresholds the default grid is swept."""
        argv = ["eval", "--planted-tree", "2,2", "--n-products", "200", "--ensembles", "1",
                "--mode", "path", "--out-dir", str(out)]
        assert main(argv) == 0
        frame = pd.read_csv(out / "N200_p0.9" / "ensemble00.csv")
        assert list(frame["alpha_th"]) == pytest.approx(list(DEFAULT_ALPHA_GRID))

    def test_failure_rolls_back(self, out: Path) -> None:
        """A failing later setting removes the files of the earlier one."""
        argv = ["eval", "--planted-tree", "2,2", "--n-products", "200,1", "--ensembles", "1",
                "--alpha-th", "0.1", "--out-dir", str(out)]
        assert main(argv) == 1
        assert not any(out.rglob("*.csv"))

    def test_failure_keeps_earlier_run(self, out: Path) -> None:
        """A failing rerun into the same directory leaves the earlier outputs as they were."""
        base = ["eval", "--planted-tree", "2,2", "--ensembles", "1", "--alpha-th", "0.1",
                "--out-dir", str(out)]
        assert main([*base, "--n-products", "200", "--seed", "1"]) == 0
        before = {p: p.read_bytes() for p in out.rglob("*") if p.is_file()}
        assert main([*base, "--n-products", "200,1", "--seed", "2"]) == 1
        after = {p: p.read_bytes() for p in out.rglob("*") if p.is_file()}
        assert after == before

    def test_target_edges_rejected(
        self, out: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Benchmark sweeps take alpha thresholds, not an edge target."""
        argv = ["eval", "--planted-tree", "2,2", "--n-products", "200", "--ensembles", "1",
                "--target-edges", "3", "--out-dir", str(out)]
        assert main(argv) == 1
        assert "--target-edges" in capsys.readouterr().err
        assert not out.exists() or not any(out.rglob("*.csv"))

    def test_needs_reference(self, out: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Benchmarks need a reference or a planted tree."""
        assert main(["eval", "--out-dir", str(out)]) == 1
        assert "reference" in capsys.readouterr().err


class TestBenchgenCommand:
    """Tests for benchmark file generation."""

    def test_files(self, out: Path) -> None:
        """The reference and one bipartite file per ensemble member are written."""
        argv = ["benchgen", "--planted-tree", "3,2", "--n-products", "50", "--ensembles", "2",
                "--out-dir", str(out)]
        assert main(argv) == 0
        assert len((out / "reference.tsv").read_text().splitlines()) == 12
        lines = (out / "N50_p0.9" / "ensemble01.tsv").read_text().splitlines()
        assert len({line.split("\t")[0] for line in lines}) == 50

    def test_seeded(self, tmp_path: Path) -> None:
        """The same seed writes the same networks; another seed does not."""
        def run(name: str, seed: str) -> bytes:
            directory = tmp_path / name
            argv = ["benchgen", "--planted-tree", "3,2", "--n-products", "80", "--ensembles",
                    "1", "--seed", seed, "--out-dir", str(directory)]
            assert main(argv) == 0
            return (directory / "N80_p0.9" / "ensemble00.tsv").read_bytes()

        assert run("a", "1") == run("b", "1")
        assert run("a", "1") != run("c", "2")
