import subprocess
import sys

import pytest

from curvecast.cli import main
from curvecast.model import PowerLawParams
from curvecast.observations import read_observations, write_observations
from curvecast.simulator import SyntheticLearner, generate


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "curvecast.cli", *map(str, args)], capture_output=True, text=True)


def parse_fit(stdout):
    return dict(line.split() for line in stdout.splitlines())


def test_fit_three_points(tmp_path, capsys):
    path = tmp_path / "obs.csv"
    path.write_text("level,x_words,accuracy\n1,5000,90\n2,10000,93\n3,20000,94.5\n", encoding="utf-8")
    assert main(["fit", str(path)]) == 0
    out = parse_fit(capsys.readouterr().out)
    assert out["level"] == "3"
    assert float(out["rss"]) == 0.0
    assert out["converged"] == "true"
    assert len(out["a"].split(".")[1]) == 6


def test_fit_recovers_simulated_truth(tmp_path, capsys):
    path = tmp_path / "sim.csv"
    assert main(["simulate", "--a", "10", "--b", "0.5", "--c", "95", "--corpus-size", "60000", "-o", str(path)]) == 0
    assert main(["fit", str(path)]) == 0
    out = parse_fit(capsys.readouterr().out)
    assert float(out["a"]) == pytest.approx(10, rel=1e-6)
    assert float(out["b"]) == pytest.approx(0.5, rel=1e-6)
    assert float(out["c"]) == pytest.approx(95, rel=1e-6)


def test_malformed_csv_names_the_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("level,x_words,accuracy\n1,5000,90\n2,ten,91\n", encoding="utf-8")
    result = run_cli("fit", path)
    assert result.returncode != 0
    assert f"{path}:3" in result.stderr


def test_missing_file(tmp_path):
    assert run_cli("fit", tmp_path / "none.csv").returncode != 0


def test_trace_matches_library(tmp_path, capsys):
    path = tmp_path / "sim.csv"
    main(["simulate", "--noise", "0.05", "--seed", "3", "--corpus-size", "80000", "-o", str(path)])
    assert main(["trace", str(path), "--max-level", "6"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "level,x_words,a,b,c,rss,converged"
    assert [l.split(",")[0] for l in lines[1:]] == ["3", "4", "5", "6"]
    from curvecast.trace import build_trace

    trace = build_trace(read_observations(path), max_level=6)
    assert lines[-1].split(",")[4] == f"{trace.asymptote(6):.6f}"


def test_levels_command(tmp_path, capsys):
    obs = tmp_path / "sim.csv"
    write_observations(generate(SyntheticLearner(PowerLawParams(100, 0.45, 96), tuple(range(5000, 100_001, 5000)))), obs)
    assert main(["levels", str(obs), "--tau", "0.001", "--layers"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[:3] == ["wlevel 3 15000", "plevel 3 15000", "clevel 4 20000"]
    assert out[3].startswith("predictor a=100.000000 b=0.450000 c=96.000000")
    assert out[4] == "level,layer"


def test_evaluate_tagger_table(tagger_table_config, tmp_path, capsys):
    out = tmp_path / "report.csv"
    assert main(["evaluate", str(tagger_table_config), "--format", "csv", "-o", str(out)]) == 0
    summary = capsys.readouterr().out
    assert "TreeTagger: no prediction (no plevel)" in summary
    rows = {line.split(",")[0]: line.split(",") for line in out.read_text().splitlines()}
    assert rows["Stanford"][-4] == "0.01"
    assert rows["TreeTagger"][1] == "--"


def test_evaluate_uses_env_config(tagger_table_config, monkeypatch, capsys):
    monkeypatch.setenv("CURVECAST_CONFIG", str(tagger_table_config))
    assert main(["evaluate"]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("Run ")
    assert "Stanford: clevel=125001" in captured.err


def test_evaluate_missing_observations_fails(tmp_path, capsys):
    ini = tmp_path / "exp.ini"
    ini.write_text("[run ghost]\nobservations = ghost.csv\n", encoding="utf-8")
    assert main(["evaluate", str(ini)]) != 0
    assert "ghost: error" in capsys.readouterr().err


def test_flags_override_file(tmp_path, capsys):
    obs = tmp_path / "x.csv"
    write_observations(generate(SyntheticLearner(PowerLawParams(100, 0.45, 96), tuple(range(5000, 700_001, 5000)))), obs)
    ini = tmp_path / "exp.ini"
    ini.write_text("[experiment]\ncontrols = 300000:700000:100000\n\n[run x]\nobservations = x.csv\n", encoding="utf-8")
    assert main(["evaluate", str(ini), "--controls", "200000:400000:100000", "--format", "csv"]) == 0
    header = capsys.readouterr().out.splitlines()[0]
    assert "ac_200000" in header and "ac_700000" not in header


def test_report_round_trip(tagger_table_config, tmp_path, capsys):
    saved = tmp_path / "r.json"
    main(["evaluate", str(tagger_table_config), "--json", str(saved)])
    first = capsys.readouterr().out
    assert main(["report", str(saved)]) == 0
    assert capsys.readouterr().out == first


def test_bad_format_rejected(tagger_table_config):
    assert run_cli("evaluate", tagger_table_config, "--format", "pdf").returncode != 0


def test_simulate_with_folds_and_corpus(tmp_path):
    obs, corpus = tmp_path / "o.csv", tmp_path / "c.tsv"
    assert main(["simulate", "--corpus-size", "30000", "--folds", "2", "--noise", "0.1",
                 "-o", str(obs), "--corpus-out", str(corpus)]) == 0
    stream = read_observations(obs)
    assert {o.fold for o in stream} == {1, 2}
    assert main(["simulate", "--corpus", str(corpus), "-o", str(tmp_path / "again.csv")]) == 0
    again = read_observations(tmp_path / "again.csv")
    assert [o.x for o in again] == [o.x for o in stream if o.fold == 1]
