import csv
import io

import numpy as np
import pytest

from gnncolor.bench import (
    ColoringFailure, RunRecord, make_orderer, performance_profile, read_records, run_coloring, write_profile,
    write_records,
)
from gnncolor.cli import main
from gnncolor.coloring import Coloring
from gnncolor.corpus import GRAPH_SPECS, desk_corpus, make_graph, read_manifest, write_corpus
from gnncolor.gnn import GnnModel, load_model, save_model
from gnncolor.graph import erdos_renyi, load_graph


@pytest.fixture
def files(tmp_path):
    (tmp_path / "K3.col").write_text("p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n")
    (tmp_path / "P4.edges").write_text("0 1\n1 2\n2 3\n")
    (tmp_path / "bad.edges").write_text("0 1\n1 x\n")
    return tmp_path


def records_of(out: str):
    return list(csv.DictReader(io.StringIO(out)))


# ---- bench library ----

def test_run_coloring_records():
    g = erdos_renyi(200, 800, seed=0)
    recs, col = run_coloring(g, "er", "sl", "par", workers=4, reps=3, culberson=2)
    assert [r.heuristic for r in recs] == ["sl"] * 3 + ["sl+C1", "sl+C2"]
    assert all(r.seconds >= 0 and r.colors > 0 for r in recs)
    assert recs[0].workers == 4
    assert recs[-1].colors == col.num_colors <= recs[0].colors


def test_run_coloring_detects_invalid(monkeypatch):
    import gnncolor.bench as B
    monkeypatch.setattr(B, "greedy_color", lambda g, pm: Coloring.from_array(np.zeros(g.n, np.int64)))
    with pytest.raises(ColoringFailure):
        run_coloring(erdos_renyi(20, 30, seed=1), "x", "ff")


def test_make_orderer(tmp_path):
    with pytest.raises(ValueError):
        make_orderer("nope")
    with pytest.raises(OSError):
        make_orderer(f"gnn:{tmp_path}/missing.gsgc")
    save_model(GnnModel.zeros(2), tmp_path / "z.gsgc")
    g = erdos_renyi(10, 20, seed=0)
    assert np.all(make_orderer(f"gnn:{tmp_path}/z.gsgc")(g, 1).p == 0)


def test_records_round_trip(tmp_path):
    recs = [RunRecord("a", "sl", 1, 0, 0.25, 3), RunRecord("a", "lf", 2, 1, 1e-6, 4)]
    with open(tmp_path / "r.csv", "w", newline="") as fh:
        write_records(recs, fh)
    back = read_records(tmp_path / "r.csv")
    assert [(r.instance, r.heuristic, r.workers, r.rep, r.colors) for r in back] == [
        (r.instance, r.heuristic, r.workers, r.rep, r.colors) for r in recs]


def test_profile_examples():
    ks, fr = performance_profile([RunRecord("i", "a", 1, 0, 0.1, 5)])
    assert ks == [0] and fr == {"a": [1.0]}
    recs = [RunRecord("i", "a", 1, 0, 0.1, 3), RunRecord("i", "b", 1, 0, 0.1, 4)]
    ks, fr = performance_profile(recs)
    assert ks == [0, 1] and fr == {"a": [1.0, 1.0], "b": [0.0, 1.0]}


def test_profile_properties():
    rng = np.random.default_rng(0)
    recs = [RunRecord(f"g{i}", h, 1, 0, 0.0, int(rng.integers(3, 12))) for i in range(30) for h in "abcd"]
    ks, fr = performance_profile(recs)
    for h, vals in fr.items():
        assert all(0 <= v <= 1 for v in vals)
        assert all(x <= y for x, y in zip(vals, vals[1:]))
        assert vals[-1] == 1.0
    assert max(v[0] for v in fr.values()) > 0
    buf = io.StringIO()
    write_profile(ks, fr, buf)
    assert buf.getvalue().splitlines()[0] == "k,a,b,c,d"


def test_profile_mismatched_instances():
    recs = [RunRecord("i", "a", 1, 0, 0.1, 3), RunRecord("j", "b", 1, 0, 0.1, 4)]
    with pytest.raises(ValueError):
        performance_profile(recs)
    with pytest.raises(ValueError):
        performance_profile(recs[:1], ["a", "zz"])


# ---- CLI ----

def test_cli_color_k3(files, capsys):
    assert main(["color", str(files / "K3.col"), "--heuristic", "lf", "--mode", "seq"]) == 0
    rows = records_of(capsys.readouterr().out)
    assert len(rows) == 5 and {r["colors"] for r in rows} == {"3"}
    assert list(rows[0]) == ["instance", "heuristic", "workers", "rep", "seconds", "colors"]


def test_cli_color_par_matches_seq(files, capsys):
    assert main(["color", str(files / "P4.edges"), "--heuristic", "sl", "--mode", "par", "--workers", "4",
                 "--out", str(files / "par.txt")]) == 0
    assert main(["color", str(files / "P4.edges"), "--heuristic", "sl", "--out", str(files / "seq.txt")]) == 0
    capsys.readouterr()
    par, seq = Coloring.load(files / "par.txt"), Coloring.load(files / "seq.txt")
    assert par == seq and par.num_colors == 2


def test_cli_culberson_monotone(tmp_path, capsys):
    g = make_graph("ba-700-3")
    from gnncolor.graph import write_edge_list
    with open(tmp_path / "g.edges", "w") as fh:
        write_edge_list(g, fh)
    assert main(["color", str(tmp_path / "g.edges"), "--heuristic", "ff", "--reps", "1", "--culberson", "5"]) == 0
    colors = [int(r["colors"]) for r in records_of(capsys.readouterr().out)]
    assert len(colors) == 6 and all(b <= a for a, b in zip(colors, colors[1:]))


@pytest.mark.parametrize("argv", [
    ["color", "{d}/missing.edges"],
    ["color", "{d}/bad.edges"],
    ["color", "{d}/K3.col", "--heuristic", "magic"],
    ["color", "{d}/K3.col", "--heuristic", "gnn:{d}/none.gsgc"],
    ["color", "{d}/K3.col", "--workers", "0"],
    ["color", "{d}/K3.col", "--culberson", "-1"],
])
def test_cli_invalid_input_exits_1(files, capsys, argv):
    assert main([a.format(d=files) for a in argv]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_validation_failure_exits_2(files, capsys, monkeypatch):
    import gnncolor.bench as B
    monkeypatch.setattr(B, "validate", lambda g, c: False)
    assert main(["color", str(files / "K3.col")]) == 2


def test_cli_order(files, capsys):
    assert main(["order", str(files / "P4.edges"), "--heuristic", "sl", "--out", str(files / "p.txt")]) == 0
    from gnncolor.ordering import PriorityMap
    assert PriorityMap.load(files / "p.txt").p.tolist() == [0, 1, 1, 0]


@pytest.fixture
def tiny_manifest(tmp_path):
    lines = []
    for i, name in enumerate(["ba-300-3", "er-150-0.3", "queen-5", "mycielski-4"]):
        with open(tmp_path / f"{name}.edges", "w") as fh:
            from gnncolor.graph import write_edge_list
            write_edge_list(make_graph(name), fh)
        lines.append(f"{name}.edges {'test' if i == 3 else 'train'}")
    (tmp_path / "manifest.txt").write_text("\n".join(lines) + "\n")
    return tmp_path


def test_cli_train(tiny_manifest):
    d = tiny_manifest
    args = ["train", "--manifest", str(d / "manifest.txt"), "--labels", "sl", "--layers", "2", "--epochs", "10", "--seed", "3"]
    assert main(args + ["--out", str(d / "a.gsgc")]) == 0
    assert main(args + ["--out", str(d / "b.gsgc")]) == 0
    rows = (d / "a.gsgc.csv").read_text().splitlines()
    assert rows[0] == "epoch,loss,f1,holdout_colors" and len(rows) == 11
    assert (d / "a.gsgc.csv").read_text() == (d / "b.gsgc.csv").read_text()
    assert load_model(d / "a.gsgc") == load_model(d / "b.gsgc")
    assert main(args[:-6] + ["--epochs", "0", "--seed", "3", "--layers", "3", "--out", str(d / "z.gsgc")]) == 0
    from gnncolor.training import TrainConfig, parameter_init
    assert load_model(d / "z.gsgc") == parameter_init(TrainConfig(seed=3, layers=3))


def test_cli_train_bad_manifest(tmp_path, capsys):
    (tmp_path / "m.txt").write_text("a.edges somewhere\n")
    assert main(["train", "--manifest", str(tmp_path / "m.txt"), "--out", str(tmp_path / "x.gsgc")]) == 1
    (tmp_path / "m.txt").write_text("a.edges train\n")
    assert main(["train", "--manifest", str(tmp_path / "m.txt"), "--out", str(tmp_path / "x.gsgc")]) == 1


def test_cli_evolve(tiny_manifest):
    d = tiny_manifest
    m = str(d / "manifest.txt")
    assert main(["train", "--manifest", m, "--epochs", "3", "--out", str(d / "s.gsgc")]) == 0
    args = ["evolve", str(d / "s.gsgc"), "--manifest", m, "--population", "6", "--truncation", "2",
            "--generations", "5", "--seed", "1"]
    assert main(args + ["--out", str(d / "c1.gsgc")]) == 0
    assert main(args + ["--out", str(d / "c2.gsgc")]) == 0
    assert load_model(d / "c1.gsgc") == load_model(d / "c2.gsgc")
    hist = list(csv.DictReader(open(d / "c1.gsgc.csv")))
    keys = [(int(r["best_colors"]), int(r["best_tiebreak"])) for r in hist]
    assert len(keys) == 6 and all(b <= a for a, b in zip(keys, keys[1:]))

    assert main(["train", "--manifest", m, "--epochs", "1", "--layers", "3", "--out", str(d / "t.gsgc")]) == 0
    assert main(["evolve", str(d / "s.gsgc"), str(d / "t.gsgc"), "--manifest", m, "--population", "4",
                 "--truncation", "2", "--generations", "1", "--out", str(d / "x.gsgc")]) == 1


def test_cli_profile(tmp_path, capsys):
    recs = [RunRecord("i", "a", 1, 0, 0.1, 3), RunRecord("i", "b", 1, 0, 0.1, 4)]
    with open(tmp_path / "r.csv", "w", newline="") as fh:
        write_records(recs, fh)
    assert main(["profile", str(tmp_path / "r.csv")]) == 0
    assert capsys.readouterr().out.splitlines() == ["k,a,b", "0,1,0", "1,1,1"]
    with open(tmp_path / "s.csv", "w", newline="") as fh:
        write_records([RunRecord("j", "c", 1, 0, 0.1, 3)], fh)
    assert main(["profile", str(tmp_path / "r.csv"), str(tmp_path / "s.csv")]) == 1
    with open(tmp_path / "empty.csv", "w", newline="") as fh:
        write_records([], fh)
    assert main(["profile", str(tmp_path / "empty.csv")]) == 1


# ---- corpus ----

def test_corpus_is_deterministic_and_split():
    a = desk_corpus()
    b = desk_corpus()
    assert [n for n, _ in a["train"]] == [n for n, _ in b["train"]]
    assert all(x == y for (_, x), (_, y) in zip(a["test"], b["test"]))
    names = [n for items in a.values() for n, _ in items]
    assert sorted(names) == sorted(GRAPH_SPECS) and len(a["test"]) >= 10
    families = {n.split("-")[0] for n in GRAPH_SPECS}
    assert {n.split("-")[0] for n, _ in a["train"]} == families


def test_write_corpus_and_manifest(tmp_path):
    manifest = write_corpus(tmp_path)
    splits = read_manifest(manifest)
    assert sum(len(v) for v in splits.values()) == len(GRAPH_SPECS)
    p = splits["test"][0]
    assert load_graph(p) == make_graph(p.stem)
