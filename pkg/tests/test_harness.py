import json
from dataclasses import asdict

import pytest

from curvecast.corpus import Corpus
from curvecast.errors import DomainError, FormatError
from curvecast.harness import (
    CONFIG_ENV,
    ExperimentConfig,
    RunSpec,
    actual_at,
    build_config,
    evaluate_collection,
    load_experiment,
    read_replay,
    resolve_controls,
    resolve_window,
)
from curvecast.levels import LevelConfig
from curvecast.model import PowerLawParams
from curvecast.observations import Observation, write_observations
from curvecast.simulator import SyntheticLearner, generate

from conftest import PUBLISHED_MAPE

GRID = tuple(range(5_000, 700_001, 5_000))


def write_run(tmp_path, name, truth, sigma=0.0, seed=0, grid=GRID, folds=None):
    path = tmp_path / f"{name}.csv"
    write_observations(generate(SyntheticLearner(truth, grid, sigma, seed), folds), path)
    return path


def write_ini(tmp_path, experiment, runs):
    lines = ["[experiment]"] + [f"{k} = {v}" for k, v in experiment.items()]
    for name, keys in runs.items():
        lines += ["", f"[run {name}]"] + [f"{k} = {v}" for k, v in keys.items()]
    path = tmp_path / "exp.ini"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_tagger_table_replay(tagger_table_config):
    report = evaluate_collection(load_experiment(tagger_table_config))
    assert report.controls == (300_000, 400_000, 500_000, 600_000, 700_000)
    assert [r.name for r in report.rows][:3] == ["fnTBL", "MaxEnt", "MBT"]
    for name, expected in PUBLISHED_MAPE.items():
        row = report.row(name)
        assert row.mape == pytest.approx(expected, abs=0.02)
        # Seven predicting peers: DMR is a multiple of 100/7.
        assert round(row.dmr * 7 / 100, 9).is_integer()
    assert report.row("Stanford").dmr == pytest.approx(600 / 7)
    assert report.row("TnT").tau == 2.0


def test_run_without_plevel_is_excluded(tagger_table_config):
    report = evaluate_collection(load_experiment(tagger_table_config))
    tree = report.row("TreeTagger")
    assert not tree.predicts
    assert (tree.mape, tree.dmr, tree.rr, tree.eac, tree.plevel_words) == (None, None, None, None, None)
    assert tree.ac == (93.36, 93.77, 94.02, 94.28, 94.42)
    assert "TreeTagger" not in report.rer
    assert all("TreeTagger" not in row for row in report.rer.values())
    assert all(len(row) == 7 for row in report.rer.values())


def test_replay_dash_means_no_estimate(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("x_words,ac,eac\n300000,90,--\n400000,91,\n", encoding="utf-8")
    assert read_replay(path) == {300_000: (90.0, None), 400_000: (91.0, None)}


def test_replay_bad_line(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("x_words,ac,eac\n300000,90,91\n400000,x,91\n", encoding="utf-8")
    with pytest.raises(FormatError, match=":3:"):
        read_replay(path)


def test_three_learner_fleet(tmp_path):
    runs = {
        f"c{c}": {"observations": write_run(tmp_path, f"c{c}", PowerLawParams(204.570017, 0.307277, c)).name}
        for c in (94, 95, 96)
    }
    report = evaluate_collection(load_experiment(write_ini(tmp_path, {"tau": "0.001"}, runs)))
    for row in report.rows:
        assert row.predicts
        assert row.dmr == 100.0
        assert row.mape < 0.1
        assert row.rr is not None and 0 < row.rr <= 100
        assert row.wlevel_words <= row.plevel_words <= row.clevel_words
    assert all(v == 100.0 for peers in report.rer.values() for v in peers.values())


def test_identical_runs_score_full_dmr(tmp_path):
    truth = PowerLawParams(100, 0.45, 96)
    path = write_run(tmp_path, "same", truth, sigma=0.02, seed=5)
    config = ExperimentConfig(runs=(RunSpec("a", observations=path), RunSpec("b", observations=path)))
    report = evaluate_collection(config)
    assert report.row("a").dmr == report.row("b").dmr == 100.0
    assert report.row("a").eac == report.row("b").eac


def test_single_predicting_run_has_no_dmr(tmp_path):
    path = write_run(tmp_path, "solo", PowerLawParams(100, 0.45, 96))
    report = evaluate_collection(ExperimentConfig(runs=(RunSpec("solo", observations=path),)))
    assert report.row("solo").predicts
    assert report.row("solo").dmr is None


def test_frozen_predictor_gives_eac(tmp_path):
    truth = PowerLawParams(204.570017, 0.307277, 95)
    path = write_run(tmp_path, "x", truth, sigma=0.02, seed=1)
    report = evaluate_collection(ExperimentConfig(runs=(RunSpec("x", observations=path),)))
    row = report.row("x")
    frozen = PowerLawParams(*row.predictor)
    assert row.eac == tuple(float(frozen.evaluate(float(x))) for x in report.controls)


def test_folds_are_averaged_before_evaluation(tmp_path):
    truth = PowerLawParams(204.570017, 0.307277, 95)
    path = write_run(tmp_path, "f", truth, sigma=0.05, seed=2, folds=3)
    report = evaluate_collection(ExperimentConfig(folds=3, runs=(RunSpec("f", observations=path),)))
    assert report.row("f").error is None
    bad = evaluate_collection(ExperimentConfig(folds=4, runs=(RunSpec("f", observations=path),)))
    assert "expected 4 folds" in bad.row("f").error


def test_errors_are_localised(tmp_path):
    good = write_run(tmp_path, "good", PowerLawParams(100, 0.45, 96))
    config = ExperimentConfig(
        runs=(RunSpec("good", observations=good), RunSpec("missing", observations=tmp_path / "nope.csv"))
    )
    report = evaluate_collection(config)
    assert report.row("good").predicts
    assert report.row("missing").error
    assert not report.row("missing").predicts


def test_deterministic(tmp_path):
    runs = {n: {"observations": write_run(tmp_path, n, PowerLawParams(150, 0.35, c), 0.03, i).name}
            for i, (n, c) in enumerate([("p", 95), ("q", 96)])}
    config = load_experiment(write_ini(tmp_path, {"tau": "0.01"}, runs))
    first, second = evaluate_collection(config), evaluate_collection(config)
    assert json.dumps(asdict(first)) == json.dumps(asdict(second))


def test_actual_at_interpolates_and_flags():
    stream = [Observation(1, 100, 90.0), Observation(2, 300, 94.0)]
    assert actual_at(stream, [100, 200, 300]) == ([90.0, 92.0, 94.0], [False, True, False])
    with pytest.raises(DomainError):
        actual_at(stream, [400])


def test_controls_are_sentence_ceilings():
    # Every sentence has 7 words, so ceilings are the next multiple of 7.
    corpus = Corpus.from_sentence_lengths([7] * 200_000)
    config = ExperimentConfig()
    assert resolve_controls(config, corpus) == (300_006, 400_001, 500_003, 600_005, 700_000)
    assert resolve_controls(config, None) == (300_000, 400_000, 500_000, 600_000, 700_000)
    assert resolve_window(LevelConfig(), corpus).window == (5_005, 700_000)


def test_build_config_aliases_and_overrides():
    config = build_config({
        "nu": "2e-5", "sigma_slowdown": "2", "lambda": "3", "tau": "0.5", "window": "1000:800000",
        "control_levels": "100000:500000:200000", "kernel": "100", "step": "200", "folds": "10",
        "max_iterations": "50",
    })
    assert (config.levels.nu, config.levels.sigma_slowdown, config.levels.lambda_lookahead) == (2e-5, 2, 3)
    assert config.levels.window == (1000, 800_000)
    assert config.nominal_controls == [100_000, 300_000, 500_000]
    assert (config.kernel, config.step, config.folds, config.fit.max_iterations) == (100, 200, 10, 50)
    assert build_config({"slowdown": "3", "lookahead": "1"}).levels.lambda_lookahead == 1


@pytest.mark.parametrize(
    "values",
    [{"bogus": "1"}, {"window": "5"}, {"controls": "1:2"}, {"nu": "abc"}, {"controls": "300000:800000:100000"},
     {"folds": "0"}],
)
def test_build_config_rejects(values):
    with pytest.raises((FormatError, DomainError)):
        build_config(values)


def test_experiment_file_and_env(tmp_path, monkeypatch):
    path = write_ini(tmp_path, {"tau": "0.2"}, {"x": {"observations": "x.csv", "tau": "0.7"}})
    monkeypatch.setenv(CONFIG_ENV, str(path))
    config = load_experiment(overrides={"nu": "1e-4"})
    assert config.levels.tau == 0.2 and config.levels.nu == 1e-4
    assert config.runs[0].observations == tmp_path / "x.csv"
    assert config.runs[0].tau == 0.7
    monkeypatch.delenv(CONFIG_ENV)
    with pytest.raises(FormatError):
        load_experiment()


@pytest.mark.parametrize(
    "runs",
    [{"x": {"observations": "a.csv", "replay": "b.csv"}}, {"x": {}}, {"x": {"observations": "a", "colour": "red"}}],
)
def test_bad_run_sections(tmp_path, runs):
    with pytest.raises((FormatError, DomainError)):
        load_experiment(write_ini(tmp_path, {}, runs))
