"""Acceptance checks, one test per criterion.

Each test prints a single ``criterion N PASS|FAIL`` line (outside pytest's
capture, so it shows up in plain ``pytest -v`` output) and then asserts.
"""
import random
import statistics
import time
from functools import lru_cache
from pathlib import Path

import pytest

from safemol.cli import main
from safemol.clm import SamplerConfig, decorate, link, split_tokens, train_ngram
from safemol.fragmenter import FragmentationFailure, FragmentationScheme, fragment_count_stats
from safemol.metrics import build_report, canonical_set, fingerprint, mol_weight
from safemol.molgraph import canonical_smiles, parse_smiles, randomize_smiles
from safemol.patterns import isomorphic, match_all, parse_pattern, query_from_mol
from safemol.safecodec import _assemble, decode, encode, safe_blocks

from conftest import BARICITINIB_FRAGMENTS, BARICITINIB_SCAFFOLD, CYCLOTHIAZIDE_FRAGMENTS, moses_smiles
import oracles

N_CORPUS = 10_000


@pytest.fixture
def emit(capsys):
    def _emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {n:2d} {'PASS' if ok else 'FAIL'}  {detail}")

    return _emit


@lru_cache(maxsize=None)
def _graphs(n: int = N_CORPUS):
    return tuple(parse_smiles(s) for s in moses_smiles(n))


@lru_cache(maxsize=None)
def _canon(n: int = N_CORPUS):
    return tuple(canonical_smiles(g) for g in _graphs(n))


@lru_cache(maxsize=None)
def _safe_corpus(scheme: str = "brics") -> tuple[str, ...]:
    out = []
    for g in _graphs():
        try:
            out.append(encode(g, scheme).text)
        except FragmentationFailure:
            pass
    return tuple(out)


def test_1_smiles_round_trip(emit):
    smiles = moses_smiles(N_CORPUS)
    t0 = time.perf_counter()
    pairs = []
    for s in smiles:
        g = parse_smiles(s)
        pairs.append((g, parse_smiles(canonical_smiles(g))))
    elapsed = time.perf_counter() - t0
    bad = sum(1 for a, b in pairs if not isomorphic(a, b))
    ok = bad == 0 and elapsed < 60.0
    emit(1, ok, f"{len(smiles) - bad}/{len(smiles)} isomorphic after parse->canonical->parse in {elapsed:.1f} s (< 60 s)")
    assert ok


def test_2_safe_codec_identity(emit):
    graphs, canon = _graphs(), _canon()
    worst_discard = 0.0
    details = []
    ok = True
    for scheme in FragmentationScheme:
        failed = mismatched = 0
        for g, c in zip(graphs, canon):
            try:
                s = encode(g, scheme)
            except FragmentationFailure:
                failed += 1
                continue
            if canonical_smiles(decode(s)) != c:
                mismatched += 1
        discard = failed / len(graphs)
        worst_discard = max(worst_discard, discard)
        ok &= mismatched == 0 and discard < 0.01
        details.append(f"{scheme.name}:{mismatched} mismatch/{failed} discarded")
    emit(2, ok, f"n={len(graphs)} " + ", ".join(details) + f"; max discard {worst_discard:.2%} (< 1%)")
    assert ok


def test_3_randomization_invariance(emit):
    graphs, canon = _graphs(1000), _canon(1000)
    rng = random.Random(0)
    seen: dict[str, str] = {}
    failures = trials = 0
    for g, c in zip(graphs, canon):
        blocks = safe_blocks(g, FragmentationScheme.BRICS)
        for _ in range(100):
            rng.shuffle(blocks)
            text = _assemble(blocks) if len(blocks) > 1 else c
            got = seen.get(text)
            if got is None:
                got = seen[text] = canonical_smiles(decode(text))
            trials += 1
            failures += got != c
    ok = failures == 0 and trials == 100_000
    emit(3, ok, f"{trials} shuffled decodes, {failures} failures, {len(seen)} distinct strings")
    assert ok


def test_4_fragment_counts(emit):
    graphs = _graphs()
    means = {s: fragment_count_stats(graphs, s).mean for s in ("hr", "brics", "recap", "mmpa")}
    ok = (
        4 <= means["brics"] <= 6
        and 4 <= means["recap"] <= 6
        and 7.5 <= means["hr"] <= 10.5
        and 6.5 <= means["mmpa"] <= 9.5
        and means["hr"] > means["mmpa"] > means["brics"]
    )
    text = " ".join(f"{k.upper()}={v:.2f}" for k, v in means.items())
    emit(4, ok, f"{text} (BRICS,RECAP in [4,6]; HR in [7.5,10.5]; MMPA in [6.5,9.5]; HR>MMPA>BRICS)")
    assert ok


@lru_cache(maxsize=None)
def _safe_model():
    return train_ngram([split_tokens(s) for s in _safe_corpus()], order=6)


def test_5_constraint_preservation(emit):
    model = _safe_model()
    cfg = SamplerConfig(seed=0)
    runs = [("decorate baricitinib", decorate(model, parse_smiles(BARICITINIB_SCAFFOLD), cfg, 5000))]
    pairs = {
        "cyclothiazide": CYCLOTHIAZIDE_FRAGMENTS,
        "baricitinib": BARICITINIB_FRAGMENTS,
        "methyl+methyl": ("[*]C", "[*]C"),
    }
    for name, (a, b) in pairs.items():
        runs.append((f"link {name}", link(model, parse_smiles(a), parse_smiles(b), cfg, 2000)))
    ok = True
    details = []
    for name, out in runs:
        if name.startswith("decorate"):
            pool = [s for s in out if s.valid]
        else:
            pool = [s for s in out if s.valid and not s.fragmented]
        miss = sum(1 for s in pool if not s.constraint_matched)
        ok &= miss == 0 and len(pool) > 0
        details.append(f"{name}: {len(pool) - miss}/{len(pool)}")
    emit(5, ok, "constraint held in " + "; ".join(details))
    assert ok


def _metric_fixture() -> tuple[list[str], list[str]]:
    rng = random.Random(5)
    base = list(moses_smiles(2000)[200:300])
    samples = base[:90]
    samples += [randomize_smiles(parse_smiles(s), rng.randrange(1 << 30)) for s in base[:30]]
    samples += ["C1CC", "c1cccc1", "C(", "[Xx]", "CC)C"]
    samples += [f"{a}.{b}" for a, b in zip(base[90:100], base[:10])]
    samples += list(moses_smiles(2000)[:20])  # training members, not novel
    rng.shuffle(samples)
    return samples, list(moses_smiles(2000)[:60])


def test_6_metrics_oracles(emit):
    samples, training = _metric_fixture()
    assert len(samples) <= 200
    tgraphs = [parse_smiles(s) for s in training]
    constraint = parse_smiles("[*]c1ccccc1")
    r = build_report(samples, canonical_set(tgraphs), constraint)
    v, graphs = oracles.oracle_validity(samples)
    bits = [set(fingerprint(g).on_bits()) for g in graphs]
    checks = {
        "validity": r.validity == v,
        "uniqueness": r.uniqueness == oracles.oracle_uniqueness(graphs),
        "novelty": r.novelty == oracles.oracle_novelty(graphs, tgraphs),
        "fragmented": r.fragmented_pct == oracles.oracle_fragmented(graphs),
        "match": r.match_constraint == oracles.oracle_match(graphs, [query_from_mol(constraint)]),
        "int_div": abs(r.int_div - oracles.oracle_int_div(bits)) < 1e-12,
    }
    ok = all(checks.values())
    bad = [k for k, good in checks.items() if not good]
    emit(6, ok, f"{len(samples)} samples, 6 metrics vs brute force" + (f"; differ: {bad}" if bad else ", all equal"))
    assert ok


def test_7_matcher_completeness(emit):
    family = oracles.small_graph_family(300, seed=11, max_atoms=8)
    queries = oracles.QUERY_FAMILY
    mismatches = 0
    parsed = [parse_pattern(q) for q in queries]
    for g in family:
        for q in parsed:
            found = match_all(q, g)
            if len(found) != len(set(found)) or set(found) != oracles.brute_force_matches(q, g):
                mismatches += 1
    pairs = len(family) * len(parsed)
    ok = mismatches == 0
    emit(7, ok, f"{pairs} (graph, query) pairs, graphs <= 8 atoms, {mismatches} mismatches")
    assert ok


def test_8_ngram_data_scaling(emit):
    pool = moses_smiles()
    assert len(pool) >= 110_000
    big = [split_tokens(s) for s in pool[:100_000]]
    held = [split_tokens(s) for s in pool[100_000:110_000]]
    model_100k = train_ngram(big, order=6)
    small, large = [], []
    for k in range(5):
        test = held[k * 2000:(k + 1) * 2000]
        model_10k = train_ngram(big[k * 10_000:(k + 1) * 10_000], order=6, vocab=model_100k.vocab)
        small.append(model_10k.perplexity(test))
        large.append(model_100k.perplexity(test))
    m_small, m_large = statistics.mean(small), statistics.mean(large)
    ok = m_small > m_large
    emit(8, ok, f"5-fold held-out perplexity 10k={m_small:.3f} > 100k={m_large:.3f}")
    assert ok


def test_9_report_protocol(emit, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("SAFEMOL_OUTPUT_ROOT", str(tmp_path / "out"))
    Path("train.smi").write_text("\n".join(moses_smiles(N_CORPUS)) + "\n")
    assert main(["train", "train.smi", "--out-dir", "m"]) == 0
    outputs = []
    for run in ("a", "b"):
        args = ["sample", "--model", "out/m/model.json.gz", "--seeds", "0", "1", "2", "3", "4"]
        assert main(args + ["--n-samples", "10000", "--out-dir", f"s{run}"]) == 0
        files = [f"out/s{run}/samples_seed{s}.txt" for s in range(5)]
        assert main(["report", "--group", "SMILES", "ngram", *files, "--training", "train.smi", "--out-dir", f"r{run}"]) == 0
        rdir = tmp_path / "out" / f"r{run}"
        outputs.append({n: (rdir / n).read_bytes() for n in ("report.csv", "report.json")})
        outputs[-1].update({Path(f).name: Path(f).read_bytes() for f in files})
    csv = outputs[0]["report.csv"].decode().splitlines()
    shaped = (
        csv[0] == "representation,model,validity,uniqueness,novelty,int_div,fragmented"
        and len(csv) == 2
        and csv[1].startswith("SMILES,ngram,")
        and all(" ± " in cell for cell in csv[1].split(",")[2:])
    )
    identical = outputs[0] == outputs[1]
    ok = shaped and identical
    emit(9, ok, f"5 seeds x 10000 samples; row: {csv[1]}; rerun byte-identical={identical}")
    assert ok


def test_10_mol_weight_scale(emit):
    weights = [mol_weight(g) for g in _graphs()]
    mean, std = statistics.mean(weights), statistics.stdev(weights)
    ok = abs(mean - 307.0) <= 15.0
    emit(10, ok, f"MW over {len(weights)} molecules {mean:.2f} ± {std:.2f} Da (target 307 ± 15)")
    assert ok
