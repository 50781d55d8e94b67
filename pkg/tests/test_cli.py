import json
import os
from pathlib import Path

import pytest

from safemol.cli import LOCK_NAME, main
from safemol.molgraph import canonical_smiles, parse_smiles

from conftest import BARICITINIB_SCAFFOLD, CYCLOTHIAZIDE_FRAGMENTS, moses_smiles


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("SAFEMOL_OUTPUT_ROOT", str(tmp_path / "out"))
    Path("train.smi").write_text("\n".join(moses_smiles(3000)) + "\n")
    return tmp_path


def _json(p):
    return json.loads(Path(p).read_text())


def test_convert_discards_bad_lines(work):
    Path("three.smi").write_text("CCO\nC(\nc1ccccc1 benzene\n")
    assert main(["convert", "three.smi", "--out-dir", "c"]) == 0
    out = work / "out" / "c"
    assert (out / "corpus.safe").read_text().splitlines() == ["CCO", "c1ccccc1"]
    m = _json(out / "manifest.json")
    assert m["n_discarded"] == 1 and m["discarded"][0]["line"] == 2
    assert m["discarded"][0]["reason"].startswith("parse_error")
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert main(["convert", "three.smi", "--out-dir", "c"]) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first
    assert not (out / LOCK_NAME).exists()


def test_outputs_have_no_absolute_paths(work):
    assert main(["convert", str(work / "train.smi"), "--out-dir", "c"]) == 0
    for p in (work / "out" / "c").iterdir():
        assert str(work) not in p.read_text()
    cfg = _json(work / "out" / "c" / "config.json")
    assert cfg["inputs"]["input"]["name"] == "train.smi"


def test_convert_corpus_discard_rate(work):
    assert main(["convert", "train.smi", "--out-dir", "c", "--scheme", "hr"]) == 0
    m = _json(work / "out" / "c" / "manifest.json")
    assert m["n_discarded"] / m["n_input"] < 0.01
    lines = (work / "out" / "c" / "corpus.safe").read_text().splitlines()
    src = moses_smiles(3000)
    for a, b in list(zip(src, lines))[:200]:
        assert canonical_smiles(parse_smiles(b)) == canonical_smiles(parse_smiles(a))


def test_convert_filter_and_smiles(work):
    Path("f.smi").write_text("CCO\nC[NH3+]\n")
    assert main(["convert", "f.smi", "--notation", "smiles", "--filter", "--out-dir", "f"]) == 0
    out = work / "out" / "f"
    assert (out / "corpus.smi").read_text() == "CCO\n"
    assert _json(out / "manifest.json")["discarded"][0]["reason"] == "filter:charge"


def test_augment(work):
    Path("h.smi").write_text("\n".join(moses_smiles(100)) + "\n")
    assert main(["augment", "h.smi", "-k", "5", "--out-dir", "a5"]) == 0
    lines = (work / "out" / "a5" / "corpus.safe").read_text().splitlines()
    assert len(lines) <= 500
    m = _json(work / "out" / "a5" / "manifest.json")
    assert m["k"] == 5 and m["seeds"] == [0, 1, 2, 3, 4]
    canon = {canonical_smiles(parse_smiles(s)) for s in moses_smiles(100)}
    assert {canonical_smiles(parse_smiles(s)) for s in lines} == canon
    # k=1 equals a randomized conversion with the same seed
    assert main(["augment", "h.smi", "-k", "1", "--seed", "7", "--out-dir", "a1"]) == 0
    assert main(["convert", "h.smi", "--order", "randomized", "--seed", "7", "--out-dir", "c1"]) == 0
    assert (work / "out" / "a1" / "corpus.safe").read_bytes() == (work / "out" / "c1" / "corpus.safe").read_bytes()


def test_train_sample_report(work):
    assert main(["convert", "train.smi", "--out-dir", "c"]) == 0
    assert main(["train", "out/c/corpus.safe", "--out-dir", "m"]) == 0
    model = "out/m/model.json.gz"
    assert (work / "out" / "m" / "vocab.txt").exists()
    args = ["sample", "--model", model, "--n-samples", "200", "--out-dir", "s"]
    assert main(args) == 0
    files = sorted(p.name for p in (work / "out" / "s").glob("samples_seed*.txt"))
    assert len(files) == 5
    first = {p.name: p.read_bytes() for p in (work / "out" / "s").iterdir()}
    assert main(args) == 0
    assert {p.name: p.read_bytes() for p in (work / "out" / "s").iterdir()} == first
    flags = _json(work / "out" / "s" / "samples_seed0.flags.json")
    assert flags["n_samples"] == 200
    group = ["SAFE", "ngram"] + [f"out/s/{f}" for f in files]
    assert main(["report", "--group", *group, "--training", "train.smi", "--out-dir", "r"]) == 0
    csv = (work / "out" / "r" / "report.csv").read_text().splitlines()
    assert csv[0] == "representation,model,validity,uniqueness,novelty,int_div,fragmented"
    assert csv[1].startswith("SAFE,ngram,") and csv[1].count("±") == 5
    # single-seed run has zero spread
    assert main(["report", "--group", "SAFE", "one", group[2], "--out-dir", "r1"]) == 0
    row = (work / "out" / "r1" / "report.csv").read_text().splitlines()[1]
    assert all(cell.endswith("± 0.000") for cell in row.split(",")[2:])


def test_greedy_single_string(work):
    Path("one.smi").write_text("CC\n")
    assert main(["train", "one.smi", "--order", "3", "--out-dir", "m1"]) == 0
    assert main(["sample", "--model", "out/m1/model.json.gz", "--greedy", "--seeds", "0", "--n-samples", "2", "--out-dir", "g"]) == 0
    assert (work / "out" / "g" / "samples_seed0.txt").read_text() == "CC\nCC\n"


def test_decorate_and_link(work):
    assert main(["convert", "train.smi", "--out-dir", "c"]) == 0
    assert main(["train", "out/c/corpus.safe", "--out-dir", "m"]) == 0
    Path("scaf.smi").write_text(f"{BARICITINIB_SCAFFOLD}\n[*]CBr\n[*]C(\n")
    Path("one.smi").write_text("CC\n")
    args = ["decorate", "scaf.smi", "--model", "out/m/model.json.gz", "--n-samples", "100", "--training", "train.smi"]
    assert main(args + ["--out-dir", "d"]) == 0
    rep = _json(work / "out" / "d" / "report.json")
    reasons = {e["line"]: e["reason"] for e in rep["excluded"]}
    assert reasons[3].startswith("parse_error")
    assert len(rep["constraints"]) + len(rep["excluded"]) == 3
    for entry in rep["constraints"]:
        assert len(entry["reports"]) == 1
        assert entry["reports"][0]["n_samples"] == 100
    csv = (work / "out" / "d" / "report.csv").read_text().splitlines()
    assert csv[0].endswith(",match_constraint")
    Path("pairs.tsv").write_text("\t".join(CYCLOTHIAZIDE_FRAGMENTS) + "\n[*]C\n")
    assert main(["link", "pairs.tsv", "--model", "out/m/model.json.gz", "--n-samples", "50", "--out-dir", "l"]) == 0
    rep = _json(work / "out" / "l" / "report.json")
    assert len(rep["constraints"]) == 1
    assert rep["excluded"][0]["reason"] == "bad_line:expected_two_fragments"


def test_oov_constraint_excluded(work):
    Path("one.smi").write_text("CC1.O1\nCC1.N1\n")
    assert main(["train", "one.smi", "--out-dir", "m"]) == 0
    Path("scaf.smi").write_text("[*]CCl\n[*]CO\n")
    assert main(["decorate", "scaf.smi", "--model", "out/m/model.json.gz", "--n-samples", "5", "--out-dir", "d"]) == 0
    rep = _json(work / "out" / "d" / "report.json")
    assert [e["reason"] for e in rep["excluded"]] == ["oov_tokens"]
    assert len(rep["constraints"]) == 1


def test_config_chain(work):
    Path("three.smi").write_text("CCO\nCCCC\n")
    Path("cfg.json").write_text(json.dumps({"convert": {"scheme": "hr", "notation": "safe"}}))
    assert main(["--config", "cfg.json", "convert", "three.smi", "--out-dir", "c"]) == 0
    assert _json(work / "out" / "c" / "config.json")["settings"]["scheme"] == "hr"
    assert main(["--config", "cfg.json", "convert", "three.smi", "--scheme", "mmpa", "--out-dir", "c2"]) == 0
    assert _json(work / "out" / "c2" / "config.json")["settings"]["scheme"] == "mmpa"


def test_output_root_flag(work, tmp_path):
    Path("x.smi").write_text("CCO\n")
    assert main(["--output-root", str(tmp_path / "elsewhere"), "convert", "x.smi", "--out-dir", "c"]) == 0
    assert (tmp_path / "elsewhere" / "c" / "corpus.safe").exists()


@pytest.mark.parametrize(
    "argv, code",
    [
        (["convert", "missing.smi"], 2),
        (["convert", "train.smi", "--scheme", "nope"], 1),
        (["convert"], 1),
        (["train", "empty.smi"], 2),
        (["sample", "--model", "train.smi"], 2),
        (["sample", "--model", "train.smi", "--seeds", "1", "1"], 1),
        (["report"], 1),
    ],
)
def test_exit_codes(work, argv, code):
    Path("empty.smi").write_text("")
    assert main(argv) == code


def test_bad_config_files(work):
    Path("bad.json").write_text("{not json")
    assert main(["--config", "bad.json", "convert", "train.smi"]) == 1
    Path("bad2.json").write_text(json.dumps({"bogus": 1}))
    assert main(["--config", "bad2.json", "convert", "train.smi"]) == 1
    assert main(["--config", "nope.json", "convert", "train.smi"]) == 1


def test_lock_blocks_second_run(work):
    run = work / "out" / "busy"
    run.mkdir(parents=True)
    (run / LOCK_NAME).write_text("123")
    assert main(["convert", "train.smi", "--out-dir", "busy"]) == 1
    assert (run / LOCK_NAME).exists()
