import json

import numpy as np
import pytest

from mbofs.harness import (
    CheckpointError,
    ExperimentConfig,
    MethodResult,
    PipelineError,
    RunReport,
    checkpoint_load,
    checkpoint_save,
    load_mask,
    mbo_snapshot_from_json,
    mbo_snapshot_to_json,
    render_report,
    run_experiment,
    save_mask,
    save_mask_sidecar,
)
from mbofs.corpus import CorpusStats
from mbofs.heuristic import FeatureMask, FitnessFn
from mbofs.mbo import MboConfig, mbo_select
from mbofs.synth import make_planted_matrix


class TestConfig:
    def test_parse_and_defaults(self, tmp_path):
        p = tmp_path / "exp.cfg"
        p.write_text(
            "# demo config\n"
            "corpus_path = data.tsv\n"
            "ig_cap = 100  # capped small\n"
            "seed = 7\n"
            "budget_seconds = 30\n"
        )
        cfg = ExperimentConfig.from_file(p)
        assert cfg.corpus_path == "data.tsv"
        assert cfg.ig_cap == 100
        assert cfg.seed == 7
        assert cfg.budget_seconds == 30.0
        assert cfg.folds == 5  # untouched default

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "exp.cfg"
        p.write_text("not_a_key = 1\n")
        with pytest.raises(PipelineError, match="unknown key"):
            ExperimentConfig.from_file(p)

    def test_validation(self):
        cfg = ExperimentConfig(folds=1)
        with pytest.raises(PipelineError, match="folds"):
            cfg.validate()


class TestMaskFiles:
    def test_roundtrip(self, tmp_path):
        mask = np.array([True, False, True, True, False])
        p = tmp_path / "m.txt"
        save_mask(p, mask)
        assert p.read_text().splitlines()[0] == "M=5"
        np.testing.assert_array_equal(load_mask(p), mask)

    def test_malformed(self, tmp_path):
        p = tmp_path / "m.txt"
        p.write_text("M=4\n101\n")
        with pytest.raises(PipelineError, match="mask bits"):
            load_mask(p)

    def test_sidecar(self, tmp_path):
        p = tmp_path / "side.csv"
        save_mask_sidecar(p, np.array([True, False, True]),
                          ["cat", "dog", "fish"], np.array([0.5, 0.1, 0.25]))
        rows = p.read_text().splitlines()
        assert rows[0] == "feature_index,term,ig_score"
        assert rows[1].startswith("0,cat,")
        assert rows[2].startswith("2,fish,")


class TestCheckpoint:
    def test_roundtrip(self, tmp_path):
        p = tmp_path / "ck.json"
        checkpoint_save(p, "mbo", "fp", {"x": 1})
        method, payload = checkpoint_load(p, "fp")
        assert method == "mbo"
        assert payload == {"x": 1}

    def test_fingerprint_mismatch(self, tmp_path):
        p = tmp_path / "ck.json"
        checkpoint_save(p, "mbo", "fp-a", {})
        with pytest.raises(CheckpointError, match="different corpus"):
            checkpoint_load(p, "fp-b")

    def test_version_mismatch(self, tmp_path):
        p = tmp_path / "ck.json"
        p.write_text(json.dumps({"format_version": 99, "fingerprint": "fp"}))
        with pytest.raises(CheckpointError, match="version"):
            checkpoint_load(p, "fp")

    def test_truncated(self, tmp_path):
        p = tmp_path / "ck.json"
        checkpoint_save(p, "mbo", "fp", {"x": 1})
        p.write_text(p.read_text()[:20])
        with pytest.raises(CheckpointError, match="unreadable"):
            checkpoint_load(p, "fp")

    def test_mbo_resume_matches_uninterrupted(self):
        matrix, _ = make_planted_matrix(n_docs=80, n_features=60, n_informative=10, seed=3)
        cfg = MboConfig(seed=5, flock_size=5, budget_seconds=120)
        mask = FeatureMask.ones(60)

        full_best, _, _ = mbo_select(matrix, mask, cfg, fitness=FitnessFn(matrix, seed=5))

        snaps = []

        class Stop(Exception):
            pass

        def on_tour(snap):
            snaps.append(mbo_snapshot_to_json(snap))  # serialize like the harness
            if len(snaps) == 2:
                raise Stop()

        with pytest.raises(Stop):
            mbo_select(matrix, mask, cfg, fitness=FitnessFn(matrix, seed=5),
                       on_tour=on_tour)
        resumed = mbo_snapshot_from_json(snaps[-1])
        res_best, _, _ = mbo_select(matrix, mask, cfg,
                                    fitness=FitnessFn(matrix, seed=5), resume=resumed)
        assert res_best == full_best


def _report():
    return RunReport(
        corpus=CorpusStats(10, 4, 2, 3.0, 4.5),
        methods=[
            MethodResult("raw", 10, 0.75, "nb", 1.0, "ok"),
            MethodResult("mbo", 6, 0.875, "nb", 2.0, "stagnation"),
            MethodResult("pso", 7, 0.8, "nb", 2.0, "budget"),
        ],
        seed=3,
        config={"seed": 3},
    )


class TestRenderReport:
    def test_json_roundtrip(self):
        r = _report()
        back = RunReport.from_dict(json.loads(render_report(r, "json")))
        assert back == r

    def test_table_budget_dash(self):
        text = render_report(_report(), "table")
        assert "-" in text
        assert "87.5" in text  # one decimal, percent

    def test_csv(self):
        rows = render_report(_report(), "csv").splitlines()
        assert rows[0].startswith("method,")
        assert len(rows) == 4

    def test_unknown_style(self):
        with pytest.raises(PipelineError):
            render_report(_report(), "xml")


class TestRunExperiment:
    def config(self, demo_tsv, tmp_path, **kw):
        base = dict(
            corpus_path=str(demo_tsv),
            corpus_format="tsv",
            ig_cap=30,
            method="all",
            folds=5,
            seed=0,
            budget_seconds=60.0,
            flock_size=5,
            swarm_size=8,
            pso_iterations=5,
            out_dir=str(tmp_path / "run"),
        )
        base.update(kw)
        return ExperimentConfig(**base)

    def test_ig_only(self, demo_tsv, tmp_path):
        report = run_experiment(self.config(demo_tsv, tmp_path, method="ig"))
        names = [m.name for m in report.methods]
        assert names == ["raw", "ig"]
        ig = report.methods[1]
        assert ig.m_prime <= 30
        assert (tmp_path / "run" / "mask_ig.txt").exists()
        assert (tmp_path / "run" / "report.json").exists()

    def test_all_methods_and_guarantee(self, demo_tsv, tmp_path):
        report = run_experiment(self.config(demo_tsv, tmp_path))
        by_name = {m.name: m for m in report.methods}
        assert set(by_name) == {"raw", "ig", "mbo", "pso"}
        ig_mask = load_mask(tmp_path / "run" / "mask_ig.txt")
        for engine in ("mbo", "pso"):
            mask = load_mask(tmp_path / "run" / f"mask_{engine}.txt")
            assert by_name[engine].m_prime == mask.sum()
            assert mask.sum() <= ig_mask.sum()
            assert np.all(ig_mask[mask])  # engines stay inside the IG universe

    def test_deterministic_reports(self, demo_tsv, tmp_path):
        r1 = run_experiment(self.config(demo_tsv, tmp_path, out_dir=str(tmp_path / "a")))
        r2 = run_experiment(self.config(demo_tsv, tmp_path, out_dir=str(tmp_path / "b")))
        for m1, m2 in zip(r1.methods, r2.methods):
            assert (m1.name, m1.m_prime, m1.accuracy, m1.classifier) == (
                m2.name, m2.m_prime, m2.accuracy, m2.classifier)
        a = (tmp_path / "a" / "mask_mbo.txt").read_bytes()
        b = (tmp_path / "b" / "mask_mbo.txt").read_bytes()
        assert a == b

    def test_missing_corpus_is_pipeline_error(self, tmp_path):
        cfg = ExperimentConfig(corpus_path=str(tmp_path / "nope.tsv"),
                               out_dir=str(tmp_path / "run"))
        with pytest.raises(PipelineError, match=r"\[load\]"):
            run_experiment(cfg)
