"""Seeded autoregressive sampling and prompt completion."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from safemol.clm.ngram import NGramModel
from safemol.clm.tokenizer import TokenizeError, split_tokens
from safemol.molgraph import MolGraph, SmilesError, parse_smiles
from safemol.patterns import has_substructure, query_from_mol
from safemol.safecodec import Prompt, linker_prompt, scaffold_prompt


class OutOfVocabularyPrompt(ValueError):
    """The prompt holds tokens the model has never seen."""


@dataclass(frozen=True)
class SamplerConfig:
    temperature: float = 1.0
    max_tokens: int = 256
    seed: int = 0
    stop_on_eos: bool = True
    # argmax decoding, the temperature -> 0 limit
    greedy: bool = False

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class Generation:
    text: str
    n_tokens: int
    truncated: bool


@dataclass(frozen=True)
class ConstrainedSample:
    text: str
    graph: MolGraph | None
    valid: bool
    fragmented: bool
    constraint_matched: bool
    truncated: bool


def _step_weights(model: NGramModel, history: Sequence[int], config: SamplerConfig) -> np.ndarray:
    p = model.distribution(history).copy()
    vocab = model.vocab
    p[vocab.bos] = 0.0
    p[vocab.unk] = 0.0
    if not config.stop_on_eos:
        p[vocab.eos] = 0.0
    if config.temperature != 1.0 and not config.greedy:
        nz = p > 0
        p[nz] = np.exp(np.log(p[nz]) / config.temperature)
    return p


def _generate(model: NGramModel, prefix: list[int], config: SamplerConfig, rng: np.random.Generator) -> Generation:
    vocab = model.vocab
    history = list(prefix)
    out: list[str] = []
    for _ in range(config.max_tokens):
        w = _step_weights(model, history, config)
        if config.greedy:
            nxt = int(np.argmax(w))
        else:
            cdf = np.cumsum(w)
            nxt = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            nxt = min(nxt, len(w) - 1)
        if nxt == vocab.eos:
            return Generation("".join(out), len(out), False)
        history.append(nxt)
        out.append(vocab.tokens[nxt])
    return Generation("".join(out), len(out), True)


def sample_batch(model: NGramModel, config: SamplerConfig, n: int) -> list[Generation]:
    """``n`` unconditional samples from one RNG stream seeded by ``config.seed``."""
    rng = np.random.default_rng(config.seed)
    start = [model.vocab.bos]
    return [_generate(model, start, config, rng) for _ in range(n)]


def sample(model: NGramModel, config: SamplerConfig) -> str:
    """One unconditional sample; a pure function of ``(model, config)``."""
    return sample_batch(model, config, 1)[0].text


def _prompt_ids(model: NGramModel, text: str) -> list[int]:
    try:
        toks = split_tokens(text)
    except TokenizeError as exc:
        raise OutOfVocabularyPrompt(str(exc)) from exc
    missing = model.vocab.missing(toks)
    if missing:
        raise OutOfVocabularyPrompt(f"tokens not in vocabulary: {sorted(set(missing))}")
    return [model.vocab.bos] + model.vocab.encode(toks)


def complete_batch(model: NGramModel, prompt: Prompt | str, config: SamplerConfig, n: int) -> list[Generation]:
    """``n`` completions; each text is the prompt followed by the continuation."""
    text = prompt.text if isinstance(prompt, Prompt) else prompt
    ids = _prompt_ids(model, text)
    rng = np.random.default_rng(config.seed)
    out = []
    for _ in range(n):
        g = _generate(model, ids, config, rng)
        out.append(Generation(text + g.text, g.n_tokens, g.truncated))
    return out


def complete(model: NGramModel, prompt: Prompt | str, config: SamplerConfig) -> str:
    """Emit the prompt verbatim, then sample until ``<eos>`` or ``max_tokens`` new tokens.

    Raises:
        OutOfVocabularyPrompt: A prompt token is outside the model vocabulary.
    """
    return complete_batch(model, prompt, config, 1)[0].text


def _score(gens: list[Generation], queries) -> list[ConstrainedSample]:
    out = []
    for gen in gens:
        try:
            g = parse_smiles(gen.text)
        except SmilesError:
            out.append(ConstrainedSample(gen.text, None, False, False, False, gen.truncated))
            continue
        matched = all(has_substructure(q, g) for q in queries)
        out.append(ConstrainedSample(gen.text, g, True, g.component_count > 1, matched, gen.truncated))
    return out


def decorate(model: NGramModel, scaffold: MolGraph, config: SamplerConfig, n_samples: int) -> list[ConstrainedSample]:
    """Complete a scaffold prompt ``n_samples`` times and flag every sample.

    Samples are never dropped; invalid ones carry ``graph=None``.
    """
    if n_samples <= 0:
        return []
    prompt = scaffold_prompt(scaffold)
    return _score(complete_batch(model, prompt, config, n_samples), [query_from_mol(scaffold)])


def link(
    model: NGramModel,
    frag_a: MolGraph,
    frag_b: MolGraph,
    config: SamplerConfig,
    n_samples: int,
) -> list[ConstrainedSample]:
    """Complete a linker prompt; a sample matches when it contains both fragments."""
    if n_samples <= 0:
        return []
    prompt = linker_prompt(frag_a, frag_b)
    return _score(
        complete_batch(model, prompt, config, n_samples),
        [query_from_mol(frag_a), query_from_mol(frag_b)],
    )
