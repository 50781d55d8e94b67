"""Lossless SMILES/SAFE tokenization and vocabularies."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"
SPECIALS = (BOS, EOS, UNK)

_TOKEN_RE = re.compile(r"\[[^\]]*\]|Cl|Br|%\d\d|.")
_ATOM_CHARS = set("BCNOSPFIbcnosp*")
_BOND_CHARS = set("-=#:/\\$~")

TokenKind = Literal[
    "atom", "bracket_atom", "bond", "digit", "percent_digit",
    "branch_open", "branch_close", "dot", "bos", "eos",
]


class TokenizeError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Token:
    surface: str
    kind: TokenKind


def _kind(tok: str) -> TokenKind:
    if tok[0] == "[":
        return "bracket_atom"
    if tok in ("Cl", "Br") or tok in _ATOM_CHARS:
        return "atom"
    if tok.isdigit():
        return "digit"
    if tok[0] == "%":
        return "percent_digit"
    if tok in _BOND_CHARS:
        return "bond"
    if tok == "(":
        return "branch_open"
    if tok == ")":
        return "branch_close"
    if tok == ".":
        return "dot"
    raise TokenizeError(f"unexpected character {tok!r}")


def split_tokens(text: str) -> list[str]:
    """Token surfaces only; the fast path used for training and sampling."""
    if not text:
        raise TokenizeError("empty input")
    toks = _TOKEN_RE.findall(text)
    for tok in toks:
        if tok == "[":
            raise TokenizeError("unterminated bracket atom")
        if len(tok) == 1 and tok not in _ATOM_CHARS and tok not in _BOND_CHARS and tok not in "().0123456789":
            raise TokenizeError(f"unexpected character {tok!r}")
        if tok == "%":
            raise TokenizeError("'%' must be followed by two digits")
    return toks


def tokenize(text: str, notation: Literal["smiles", "safe"] = "smiles") -> list[Token]:
    """Maximal-munch tokenization: bracket atoms, ``Cl``, ``Br`` and ``%nn`` are single tokens.

    SMILES and SAFE share the grammar; ``notation`` is validated and kept for
    callers that track it.

    Raises:
        TokenizeError: Unterminated bracket or a character outside the alphabet.
    """
    if notation not in ("smiles", "safe"):
        raise ValueError(f"unknown notation {notation!r}")
    return [Token(t, _kind(t)) for t in split_tokens(text)]


def detokenize(tokens: Iterable[Token | str]) -> str:
    return "".join(t.surface if isinstance(t, Token) else t for t in tokens if t not in SPECIALS)


class Vocabulary:
    """Specials first (``<bos>``, ``<eos>``, ``<unk>``), then sorted corpus tokens."""

    def __init__(self, tokens: Sequence[str]) -> None:
        tokens = list(tokens)
        if tokens[: len(SPECIALS)] != list(SPECIALS):
            raise ValueError("vocabulary must start with <bos>, <eos>, <unk>")
        if len(set(tokens)) != len(tokens):
            raise ValueError("duplicate tokens in vocabulary")
        self.tokens: tuple[str, ...] = tuple(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        self.bos = self.index[BOS]
        self.eos = self.index[EOS]
        self.unk = self.index[UNK]

    @classmethod
    def from_corpus(cls, sequences: Iterable[Sequence[str]]) -> "Vocabulary":
        seen: set[str] = set()
        for seq in sequences:
            seen.update(seq)
        seen.difference_update(SPECIALS)
        return cls(list(SPECIALS) + sorted(seen))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, tok: str) -> bool:
        return tok in self.index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"

    def encode(self, tokens: Iterable[str]) -> list[int]:
        idx = self.index
        unk = self.unk
        return [idx.get(t, unk) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]

    def missing(self, tokens: Iterable[str]) -> list[str]:
        return [t for t in tokens if t not in self.index]

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        return cls([line for line in Path(path).read_text(encoding="utf-8").split("\n") if line])
