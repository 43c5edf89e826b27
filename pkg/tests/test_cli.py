import json
import subprocess
import sys

import pytest

from graphdp.harness.cli import main


@pytest.fixture
def graphs_on_disk(tmp_path):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    a.write_text("0 1\n1 2\n2 3\n3 0\n0 2\n")
    b.write_text("0 1\n1 2\n2 3\n")
    return a, b


def test_synth_writes_edge_list(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert main(["synth", "--spec", '{"generator": "er", "n": 10, "p": 1.0}', "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 45


def test_synth_spec_file(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"generator": "er", "n": 4, "p": 1.0}))
    assert main(["synth", "--spec", str(spec)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 6


def test_metrics_command(graphs_on_disk, capsys):
    a, b = graphs_on_disk
    assert main(["metrics", "--graph", str(a), "--graph", str(b), "--metric", "density", "--metric", "num_edges"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "metric,value,error_kind"
    vals = dict((l.split(",")[0], float(l.split(",")[1])) for l in lines[1:])
    assert vals["density"] == pytest.approx(5 / 6 - 3 / 6)
    assert vals["num_edges"] == pytest.approx(2 / 5)


def test_attack_command(graphs_on_disk, capsys):
    a, b = graphs_on_disk
    assert main(["attack", "--original", str(a), "--private", str(b), "--attack", "reconstruction"]) == 0
    name, value = capsys.readouterr().out.strip().split(",")
    assert name == "reconstruction_rae"
    assert float(value) == pytest.approx((2 / 5) ** 0.5)


def test_run_and_compare(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({
        "dataset": {"synthetic": {"generator": "er", "n": 30, "p": 0.2}},
        "mechanism": {"id": "edge-rr"}, "metrics": ["density"], "epsilons": [1, 2], "trials": 2,
    }))
    conf2 = tmp_path / "c2.json"
    conf2.write_text(conf.read_text().replace("edge-rr", "deg-lap-cl"))
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["run", "--config", str(conf), "--out", str(out1)]) == 0
    assert main(["run", "--config", str(conf2), "--out", str(out2), "--epsilons", "1", "2", "3", "--trials", "1", "--seed", "4"]) == 0
    assert len((out2 / "results.csv").read_text().splitlines()) == 1 + 3
    capsys.readouterr()
    assert main(["compare", str(out1), str(out2)]) == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0].startswith("dataset,metric")
    assert len(table) == 1 + 2 * 2  # two shared epsilons, two runs


def test_run_is_byte_identical(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({
        "dataset": {"synthetic": {"generator": "planted", "n": 30, "p_in": 0.3, "p_out": 0.05}},
        "mechanism": {"id": "deg-lap-cl"}, "preset": "descriptive", "epsilons": [1, 5], "trials": 2,
    }))
    for d in ("x", "y"):
        assert main(["run", "--config", str(conf), "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "x" / "results.csv").read_bytes() == (tmp_path / "y" / "results.csv").read_bytes()


@pytest.mark.parametrize(
    "argv,code",
    [
        (["bogus"], 1),
        (["run"], 1),
        (["metrics", "--graph", "a.txt"], 1),
        (["attack", "--original", "a", "--private", "b", "--attack", "nope"], 1),
        (["synth", "--spec", "{not json"], 1),
        (["synth", "--spec", '{"generator": "ba", "n": 5}'], 2),
        (["compare", "missing.csv"], 2),
        (["metrics", "--graph", "missing1", "--graph", "missing2"], 2),
    ],
)
def test_exit_codes(tmp_path, monkeypatch, argv, code):
    monkeypatch.chdir(tmp_path)
    try:
        rc = main(argv)
    except SystemExit as exc:
        rc = exc.code
    assert rc == code


def test_bad_config_is_usage_error(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"dataset": {"synthetic": {}}, "mechanism": {"id": "edge-rr"}, "epsilons": [2, 1]}))
    assert main(["run", "--config", str(conf)]) == 1


def test_bad_edge_list_is_data_error(tmp_path):
    conf = tmp_path / "c.json"
    (tmp_path / "g.txt").write_text("0 1 2\n")
    conf.write_text(json.dumps({"dataset": {"path": "g.txt"}, "mechanism": {"id": "edge-rr"}, "metrics": ["density"]}))
    assert main(["run", "--config", str(conf), "--out", str(tmp_path / "o")]) == 2


def test_console_script_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "graphdp.harness.cli", "bogus"], capture_output=True, text=True)
    assert r.returncode == 1
    r = subprocess.run([sys.executable, "-m", "graphdp.harness.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "synth" in r.stdout
