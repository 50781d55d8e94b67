"""Benchmark command line: convert, augment, train, sample, decorate, link, report.

Settings resolve as built-in defaults < ``--config`` JSON < command-line flags.
Every command writes into a run directory under the output root (flag
``--output-root``, else ``$SAFEMOL_OUTPUT_ROOT``, else the working
directory), guarded by a lock file, next to a ``config.json`` holding the
resolved settings and a ``manifest.json`` listing every dropped item with a
reason code. Outputs carry no timestamps or absolute paths, so identical
inputs and settings give byte-identical files.

Exit codes: 0 success, 1 configuration error, 2 data error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence

from safemol.clm import (
    EmptyCorpus,
    NGramModel,
    OutOfVocabularyPrompt,
    SamplerConfig,
    TokenizeError,
    decorate,
    link,
    sample_batch,
    split_tokens,
    train_ngram,
)
from safemol.fragmenter import (
    FragmentationFailure,
    FragmentationScheme,
    RuleTableError,
    load_rule_table,
)
from safemol.metrics import aggregate, build_report, moses_filter, rows_to_csv, to_json
from safemol.molgraph import MolGraph, SmilesError, canonical_smiles, iter_smi, parse_smiles
from safemol.safecodec import BadAttachmentCount, NoAttachmentPoints, encode

log = logging.getLogger("safemol")

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2
LOCK_NAME = ".safemol.lock"
ENV_OUTPUT_ROOT = "SAFEMOL_OUTPUT_ROOT"


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


DEFAULTS: dict[str, dict[str, Any]] = {
    "convert": {
        "input": None,
        "out_dir": "convert",
        "notation": "safe",
        "scheme": "brics",
        "order": "canonical",
        "seed": 0,
        "rules": None,
        "filter": False,
    },
    "augment": {
        "input": None,
        "out_dir": "augment",
        "scheme": "brics",
        "k": 5,
        "seed": 0,
        "rules": None,
    },
    "train": {
        "corpus": None,
        "out_dir": "train",
        "order": 6,
        "discount": 0.75,
    },
    "sample": {
        "model": None,
        "out_dir": "sample",
        "seeds": [0, 1, 2, 3, 4],
        "n_samples": 10_000,
        "temperature": 1.0,
        "max_tokens": 256,
        "greedy": False,
    },
    "decorate": {
        "model": None,
        "constraints": None,
        "training": None,
        "out_dir": "decorate",
        "seeds": [0],
        "n_samples": 5_000,
        "temperature": 1.0,
        "max_tokens": 256,
        "representation": "SAFE",
        "int_div_cap": 10_000,
    },
    "report": {
        "group": None,
        "training": None,
        "out_dir": "report",
        "int_div_cap": 10_000,
    },
}
DEFAULTS["link"] = dict(DEFAULTS["decorate"], out_dir="link")

# settings that name input files; recorded by file name and content hash only
PATH_KEYS = ("input", "corpus", "model", "constraints", "training", "rules")


# --------------------------------------------------------------------------- plumbing


def _output_root(flag: str | None) -> Path:
    return Path(flag or os.environ.get(ENV_OUTPUT_ROOT) or ".")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_path(value: Any, key: str) -> Path:
    if not value:
        raise ConfigError(f"missing required setting '{key}'")
    p = Path(value)
    if not p.is_file():
        raise DataError(f"{key}: no such file '{value}'")
    return p


def _describe_inputs(cfg: dict[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key in PATH_KEYS:
        if cfg.get(key):
            p = Path(cfg[key])
            out[key] = {"name": p.name, "sha256": _sha256(p)} if p.is_file() else {"name": p.name}
    if cfg.get("group"):
        out["group"] = [
            {"representation": g[0], "model": g[1], "files": [{"name": Path(f).name, "sha256": _sha256(Path(f))} for f in g[2:]]}
            for g in cfg["group"]
        ]
    return out


def _public_config(command: str, cfg: dict[str, Any]) -> dict[str, Any]:
    shown = {k: v for k, v in cfg.items() if k not in PATH_KEYS and k not in ("group", "out_dir")}
    return {"command": command, "settings": shown, "inputs": _describe_inputs(cfg)}


@contextmanager
def _run_dir(root: Path, out_dir: str) -> Iterator[Path]:
    """Create the run directory and hold its lock file for the duration."""
    run = Path(out_dir) if Path(out_dir).is_absolute() else root / out_dir
    run.mkdir(parents=True, exist_ok=True)
    lock = run / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(f"run directory '{out_dir}' is locked by another process ({LOCK_NAME})") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield run
    finally:
        lock.unlink(missing_ok=True)


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _write_lines(path: Path, lines: Sequence[str]) -> None:
    _write_text(path, "".join(f"{line}\n" for line in lines))


def _write_json(path: Path, obj: Any) -> None:
    _write_text(path, to_json(obj))


def _finish(run: Path, command: str, cfg: dict[str, Any], manifest: dict[str, Any]) -> None:
    _write_json(run / "config.json", _public_config(command, cfg))
    _write_json(run / "manifest.json", dict(manifest, command=command))


def _scheme(value: str) -> FragmentationScheme:
    try:
        return FragmentationScheme.parse(value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _rules(cfg: dict[str, Any]):
    if not cfg.get("rules"):
        return None
    try:
        return load_rule_table(_input_path(cfg["rules"], "rules"))
    except RuleTableError as exc:
        raise ConfigError(f"rule table: {exc}") from None


def _read_molecules(path: Path) -> Iterator[tuple[int, str, MolGraph | None, str]]:
    """Yield ``(line, text, graph, reason)``; ``graph`` is None when parsing failed."""
    for lineno, text in iter_smi(path):
        try:
            yield lineno, text, parse_smiles(text), ""
        except SmilesError as exc:
            yield lineno, text, None, f"parse_error:{type(exc).__name__}"


def _load_model(cfg: dict[str, Any]) -> NGramModel:
    path = _input_path(cfg["model"], "model")
    try:
        return NGramModel.load(path)
    except (ValueError, KeyError, OSError) as exc:
        raise DataError(f"cannot load model '{path.name}': {exc}") from None


def _training_set(cfg: dict[str, Any]) -> tuple[set[str], list[dict[str, Any]]]:
    if not cfg.get("training"):
        return set(), []
    out: set[str] = set()
    dropped = []
    for lineno, text, g, reason in _read_molecules(_input_path(cfg["training"], "training")):
        if g is None:
            dropped.append({"line": lineno, "reason": reason})
        else:
            out.add(canonical_smiles(g))
    return out, dropped


def _sampler(cfg: dict[str, Any], seed: int) -> SamplerConfig:
    try:
        return SamplerConfig(
            temperature=float(cfg["temperature"]),
            max_tokens=int(cfg["max_tokens"]),
            seed=int(seed),
            greedy=bool(cfg.get("greedy", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sampler settings: {exc}") from None


# --------------------------------------------------------------------------- commands


def cmd_convert(cfg: dict[str, Any], root: Path) -> dict[str, Any]:
    src = _input_path(cfg["input"], "input")
    notation = cfg["notation"]
    if notation not in ("safe", "smiles"):
        raise ConfigError(f"notation must be 'safe' or 'smiles', not {notation!r}")
    if cfg["order"] not in ("canonical", "randomized"):
        raise ConfigError(f"order must be 'canonical' or 'randomized', not {cfg['order']!r}")
    scheme = _scheme(cfg["scheme"])
    rules = _rules(cfg)
    with _run_dir(root, cfg["out_dir"]) as run:
        lines: list[str] = []
        dropped: list[dict[str, Any]] = []
        n_in = 0
        for lineno, _text, g, reason in _read_molecules(src):
            n_in += 1
            if g is None:
                dropped.append({"line": lineno, "reason": reason})
                continue
            if cfg["filter"]:
                ok, why = moses_filter(g)
                if not ok:
                    dropped.append({"line": lineno, "reason": f"filter:{why}"})
                    continue
            if notation == "smiles":
                lines.append(canonical_smiles(g))
                continue
            try:
                lines.append(encode(g, scheme, cfg["order"], int(cfg["seed"]), rules).text)
            except FragmentationFailure as exc:
                dropped.append({"line": lineno, "reason": "fragmentation_failure", "detail": str(exc)})
        out = run / ("corpus.safe" if notation == "safe" else "corpus.smi")
        _write_lines(out, lines)
        manifest = {
            "output": out.name,
            "n_input": n_in,
            "n_written": len(lines),
            "n_discarded": len(dropped),
            "discarded": dropped,
        }
        _finish(run, "convert", cfg, manifest)
    log.info("convert: %d in, %d written, %d discarded", n_in, len(lines), len(dropped))
    return manifest


def cmd_augment(cfg: dict[str, Any], root: Path) -> dict[str, Any]:
    src = _input_path(cfg["input"], "input")
    k = int(cfg["k"])
    if k < 1:
        raise ConfigError("k must be >= 1")
    scheme = _scheme(cfg["scheme"])
    rules = _rules(cfg)
    seeds = [int(cfg["seed"]) + j for j in range(k)]
    with _run_dir(root, cfg["out_dir"]) as run:
        lines: list[str] = []
        dropped: list[dict[str, Any]] = []
        n_in = 0
        n_duplicates = 0
        for lineno, _text, g, reason in _read_molecules(src):
            n_in += 1
            if g is None:
                dropped.append({"line": lineno, "reason": reason})
                continue
            try:
                variants = [encode(g, scheme, "randomized", s, rules).text for s in seeds]
            except FragmentationFailure as exc:
                dropped.append({"line": lineno, "reason": "fragmentation_failure", "detail": str(exc)})
                continue
            # identical block orders collapse to one line per molecule
            kept = list(dict.fromkeys(variants))
            n_duplicates += len(variants) - len(kept)
            lines.extend(kept)
        out = run / "corpus.safe"
        _write_lines(out, lines)
        manifest = {
            "output": out.name,
            "k": k,
            "seeds": seeds,
            "n_input": n_in,
            "n_written": len(lines),
            "n_duplicate_variants": n_duplicates,
            "n_discarded": len(dropped),
            "discarded": dropped,
        }
        _finish(run, "augment", cfg, manifest)
    log.info("augment: %d in, %d written", n_in, len(lines))
    return manifest


def cmd_train(cfg: dict[str, Any], root: Path) -> dict[str, Any]:
    src = _input_path(cfg["corpus"], "corpus")
    order = int(cfg["order"])
    discount = float(cfg["discount"])
    if order < 2:
        raise ConfigError("order must be >= 2")
    if not 0.0 < discount < 1.0:
        raise ConfigError("discount must lie in (0, 1)")
    seqs: list[list[str]] = []
    dropped: list[dict[str, Any]] = []
    for lineno, text in iter_smi(src):
        try:
            seqs.append(split_tokens(text))
        except TokenizeError as exc:
            dropped.append({"line": lineno, "reason": "tokenize_error", "detail": str(exc)})
    try:
        model = train_ngram(seqs, order=order, discount=discount)
    except EmptyCorpus as exc:
        raise DataError(str(exc)) from None
    with _run_dir(root, cfg["out_dir"]) as run:
        model.save(run / "model.json.gz")
        model.vocab.save(run / "vocab.txt")
        manifest = {
            "output": "model.json.gz",
            "vocabulary_size": len(model.vocab),
            "n_sequences": len(seqs),
            "n_discarded": len(dropped),
            "discarded": dropped,
        }
        _finish(run, "train", cfg, manifest)
    log.info("train: %d sequences, vocabulary %d", len(seqs), len(model.vocab))
    return manifest


def _seeds(cfg: dict[str, Any]) -> list[int]:
    seeds = cfg["seeds"]
    if isinstance(seeds, int):
        seeds = [seeds]
    try:
        out = [int(s) for s in seeds]
    except (TypeError, ValueError):
        raise ConfigError("seeds must be a list of integers") from None
    if not out or len(set(out)) != len(out):
        raise ConfigError("seeds must be a non-empty list of distinct integers")
    return out


def cmd_sample(cfg: dict[str, Any], root: Path) -> dict[str, Any]:
    seeds = _seeds(cfg)
    n = int(cfg["n_samples"])
    if n < 1:
        raise ConfigError("n_samples must be >= 1")
    _sampler(cfg, 0)
    model = _load_model(cfg)
    with _run_dir(root, cfg["out_dir"]) as run:
        files = []
        for seed in seeds:
            gens = sample_batch(model, _sampler(cfg, seed), n)
            name = f"samples_seed{seed}.txt"
            _write_lines(run / name, [g.text for g in gens])
            flags = {
                "seed": seed,
                "n_samples": n,
                "truncated": [i for i, g in enumerate(gens) if g.truncated],
                "empty": [i for i, g in enumerate(gens) if not g.text],
            }
            _write_json(run / f"samples_seed{seed}.flags.json", flags)
            files.append(name)
            log.info("sample: seed %d, %d samples", seed, n)
        manifest = {"outputs": files, "seeds": seeds, "n_samples": n}
        _finish(run, "sample", cfg, manifest)
    return manifest


def _parse_constraint(line: str, task: str) -> tuple[Any, str]:
    """Return ``(constraint, "")`` or ``(None, reason)`` for one constraint line."""
    parts = line.split("\t") if task == "link" else [line.split()[0] if line.split() else ""]
    if task == "link" and len(parts) != 2:
        return None, "bad_line:expected_two_fragments"
    try:
        graphs = [parse_smiles(p.strip()) for p in parts]
    except SmilesError as exc:
        return None, f"parse_error:{type(exc).__name__}"
    return (graphs[0] if task == "decorate" else (graphs[0], graphs[1])), ""


def _constrained(cfg: dict[str, Any], root: Path, task: str) -> dict[str, Any]:
    seeds = _seeds(cfg)
    n = int(cfg["n_samples"])
    if n < 1:
        raise ConfigError("n_samples must be >= 1")
    _sampler(cfg, 0)
    model = _load_model(cfg)
    path = _input_path(cfg["constraints"], "constraints")
    lines = [ln.rstrip("\n") for ln in path.read_text(encoding="utf-8").splitlines()]
    training, training_dropped = _training_set(cfg)
    cap = cfg["int_div_cap"]
    run_fn: Callable = decorate if task == "decorate" else link
    with _run_dir(root, cfg["out_dir"]) as run:
        entries = []
        excluded = []
        rows = []
        for idx, line in enumerate(lines, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            constraint, reason = _parse_constraint(line, task)
            if constraint is None:
                excluded.append({"line": idx, "constraint": line, "reason": reason})
                continue
            parts = constraint if isinstance(constraint, tuple) else (constraint,)
            reports = []
            files = []
            try:
                for seed in seeds:
                    samples = run_fn(model, *parts, _sampler(cfg, seed), n)
                    name = f"constraint{idx:03d}_seed{seed}.txt"
                    _write_lines(run / name, [s.text for s in samples])
                    files.append(name)
                    reports.append(build_report([s.text for s in samples], training, constraint, cap, seed))
            except OutOfVocabularyPrompt as exc:
                for name in files:
                    (run / name).unlink(missing_ok=True)
                excluded.append({"line": idx, "constraint": line, "reason": "oov_tokens", "detail": str(exc)})
                continue
            except (NoAttachmentPoints, BadAttachmentCount) as exc:
                excluded.append({"line": idx, "constraint": line, "reason": type(exc).__name__, "detail": str(exc)})
                continue
            label = f"line{idx:03d}"
            agg = aggregate(reports, cfg["representation"], label)
            rows.append(agg)
            entries.append(
                {
                    "line": idx,
                    "constraint": line,
                    "files": files,
                    "reports": [r.to_dict() for r in reports],
                    "aggregate": agg.to_dict(),
                }
            )
            log.info("%s: line %d, match %.3f", task, idx, agg.stats["match_constraint"][0])
        _write_json(run / "report.json", {"task": task, "constraints": entries, "excluded": excluded})
        _write_text(run / "report.csv", rows_to_csv(rows, extra=("match_constraint",)))
        manifest = {
            "task": task,
            "seeds": seeds,
            "n_samples": n,
            "n_constraints": len(entries),
            "n_excluded": len(excluded),
            "excluded": excluded,
            "training_discarded": training_dropped,
        }
        _finish(run, task, cfg, manifest)
    return manifest


def cmd_decorate(cfg: dict[str, Any], root: Path) -> dict[str, Any]:
    return _constrained(cfg, root, "decorate")


def cmd_link(cfg: dict[str, Any], root: Path) -> dict[str, Any]:
    return _constrained(cfg, root, "link")


def cmd_report(cfg: dict[str, Any], root: Path) -> dict[str, Any]:
    groups = cfg["group"]
    if not groups:
        raise ConfigError("report needs at least one --group REPRESENTATION MODEL FILE [FILE ...]")
    for g in groups:
        if len(g) < 3:
            raise ConfigError("each group is REPRESENTATION MODEL FILE [FILE ...]")
    training, training_dropped = _training_set(cfg)
    with _run_dir(root, cfg["out_dir"]) as run:
        rows = []
        detail = []
        for rep, model_name, *files in groups:
            reports = []
            for f in files:
                p = _input_path(f, "group file")
                samples = p.read_text(encoding="utf-8").splitlines()
                reports.append(build_report(samples, training, None, cfg["int_div_cap"], None))
            agg = aggregate(reports, rep, model_name)
            rows.append(agg)
            detail.append(
                {
                    "representation": rep,
                    "model": model_name,
                    "files": [Path(f).name for f in files],
                    "reports": [r.to_dict() for r in reports],
                    "aggregate": agg.to_dict(),
                }
            )
        _write_text(run / "report.csv", rows_to_csv(rows))
        _write_json(run / "report.json", {"rows": detail})
        manifest = {"n_rows": len(rows), "training_discarded": training_dropped}
        _finish(run, "report", cfg, manifest)
    return manifest


COMMANDS: dict[str, Callable[[dict[str, Any], Path], dict[str, Any]]] = {
    "convert": cmd_convert,
    "augment": cmd_augment,
    "train": cmd_train,
    "sample": cmd_sample,
    "decorate": cmd_decorate,
    "link": cmd_link,
    "report": cmd_report,
}


# --------------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="safemol", description="SAFE molecular notation toolkit and benchmark runner.")
    parser.add_argument("--config", help="JSON settings file (flat, or keyed by command)")
    parser.add_argument("--output-root", help=f"base directory for run directories (env {ENV_OUTPUT_ROOT})")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out-dir", dest="out_dir", default=S, help="run directory, relative to the output root")

    def sampler(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", default=S, help="trained model file")
        p.add_argument("--seeds", type=int, nargs="+", default=S)
        p.add_argument("--n-samples", dest="n_samples", type=int, default=S)
        p.add_argument("--temperature", type=float, default=S)
        p.add_argument("--max-tokens", dest="max_tokens", type=int, default=S)

    p = sub.add_parser("convert", help="SMILES file to canonical SAFE (or canonical SMILES)")
    p.add_argument("input", nargs="?", default=S)
    p.add_argument("--notation", choices=["safe", "smiles"], default=S)
    p.add_argument("--scheme", default=S)
    p.add_argument("--order", choices=["canonical", "randomized"], default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--rules", default=S, help="custom rule table (TSV)")
    p.add_argument("--filter", action="store_true", default=S, help="drop molecules failing the curation filter")
    common(p)

    p = sub.add_parser("augment", help="k randomized SAFE strings per molecule")
    p.add_argument("input", nargs="?", default=S)
    p.add_argument("--scheme", default=S)
    p.add_argument("-k", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--rules", default=S)
    common(p)

    p = sub.add_parser("train", help="fit an n-gram model on one string per line")
    p.add_argument("corpus", nargs="?", default=S)
    p.add_argument("--order", type=int, default=S)
    p.add_argument("--discount", type=float, default=S)
    common(p)

    p = sub.add_parser("sample", help="unconditional samples, one file per seed")
    sampler(p)
    p.add_argument("--greedy", action="store_true", default=S)
    common(p)

    for name, what in (("decorate", "scaffolds, one SMILES with [*] per line"), ("link", "fragment pairs, tab-separated")):
        p = sub.add_parser(name, help=f"constrained completion over {what}")
        p.add_argument("constraints", nargs="?", default=S)
        sampler(p)
        p.add_argument("--training", default=S, help="training corpus for novelty")
        p.add_argument("--representation", default=S)
        p.add_argument("--int-div-cap", dest="int_div_cap", type=int, default=S)
        common(p)

    p = sub.add_parser("report", help="mean ± std rows across seed sample files")
    p.add_argument("--group", nargs="+", action="append", default=S, metavar="ITEM",
                   help="REPRESENTATION MODEL FILE [FILE ...]; repeatable")
    p.add_argument("--training", default=S)
    p.add_argument("--int-div-cap", dest="int_div_cap", type=int, default=S)
    common(p)
    return parser


def resolve_config(command: str, config_path: str | None, flags: dict[str, Any]) -> dict[str, Any]:
    """Merge defaults, the config file and explicit flags, in that order."""
    cfg = dict(DEFAULTS[command])
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        section = data.get(command, data) if isinstance(data.get(command), dict) else data
        section = {k: v for k, v in section.items() if k not in COMMANDS}
        unknown = sorted(set(section) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown settings for '{command}': {', '.join(unknown)}")
        cfg.update(section)
    cfg.update(flags)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "output_root", "verbose", "command")}
    try:
        cfg = resolve_config(args.command, args.config, flags)
        COMMANDS[args.command](cfg, _output_root(args.output_root))
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except DataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
