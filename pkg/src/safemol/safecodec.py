"""SAFE strings: fragment blocks joined by ``.``, linked through shared ring digits.

A SAFE string is plain SMILES, so decoding is just parsing. Encoding cuts the
molecule with a fragmentation scheme, writes every fragment as its own block,
and turns each cut into a ring-closure digit opened in one block and closed
in another.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Literal, Sequence

from safemol.fragmenter import (
    DisconnectionRule,
    FragmentationFailure,
    FragmentationScheme,
    FragmentSet,
    eligible_bonds,
    fragment,
)
from safemol.molgraph import (
    MolGraph,
    canonical_ranks,
    canonical_smiles,
    parse_smiles,
    serialize,
)
from safemol.molgraph.smiles import ring_label

__all__ = [
    "SafeString",
    "Prompt",
    "NoAttachmentPoints",
    "BadAttachmentCount",
    "encode",
    "decode",
    "randomize_safe",
    "is_fragmented",
    "scaffold_prompt",
    "linker_prompt",
    "safe_blocks",
]

Order = Literal["canonical", "randomized"]

_LABEL_RE = re.compile(r"\[[^\]]*\]|%\d\d|\d|\.|.")
# placeholder for an attachment label while blocks are being ordered
_PH = "\x00{}\x00"
_PH_RE = re.compile("\x00(\\d+)\x00")


class NoAttachmentPoints(ValueError):
    pass


class BadAttachmentCount(ValueError):
    pass


@dataclass(frozen=True)
class SafeString:
    """A SAFE string with its blocks and cross-block attachment digits.

    ``attachment_digits`` maps each digit that is opened in one block and
    closed in another to ``((block, offset), (block, offset))``; offsets are
    character positions inside the block. ``open_digits`` lists labels still
    unpaired at the end of the string.
    """

    text: str
    blocks: tuple[str, ...] = field(init=False)
    attachment_digits: dict[int, tuple[tuple[int, int], tuple[int, int]]] = field(init=False, repr=False)
    open_digits: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        blocks = tuple(self.text.split("."))
        opened: dict[int, tuple[int, int]] = {}
        attach: dict[int, tuple[tuple[int, int], tuple[int, int]]] = {}
        for b, block in enumerate(blocks):
            for m in _LABEL_RE.finditer(block):
                tok = m.group()
                if not (tok.isdigit() or tok.startswith("%")):
                    continue
                d = int(tok.lstrip("%"))
                if d in opened:
                    site = opened.pop(d)
                    if site[0] != b:
                        attach[d] = (site, (b, m.start()))
                else:
                    opened[d] = (b, m.start())
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "attachment_digits", attach)
        object.__setattr__(self, "open_digits", tuple(sorted(opened)))

    @property
    def is_closed(self) -> bool:
        return not self.open_digits

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Prompt:
    text: str
    open_digits: tuple[int, ...]
    task: Literal["decorate", "link"]

    def __post_init__(self) -> None:
        if not self.open_digits:
            raise NoAttachmentPoints("a prompt needs at least one open attachment digit")


# --------------------------------------------------------------------------- blocks


@dataclass(frozen=True)
class _Block:
    heavy: int
    key: str  # block text with generic attachment marks
    tie: int
    text: str  # attachment labels as placeholders
    used: frozenset[int]


def _blocks(g: MolGraph, fs: FragmentSet) -> list[_Block]:
    granks = canonical_ranks(g)
    n = len(g.atoms)
    # the atom on the far side of each attachment, for tie-breaking wildcards
    partner_origin: dict[int, dict[int, int]] = {}
    for k, ((fa, wa), (fb, wb)) in fs.pairs.items():
        na = fs.fragments[fa].adjacency[wa][0][0]
        nb = fs.fragments[fb].adjacency[wb][0][0]
        partner_origin.setdefault(fa, {})[wa] = fs.origins[fb][nb]
        partner_origin.setdefault(fb, {})[wb] = fs.origins[fa][na]
    out = []
    for f, frag in enumerate(fs.fragments):
        origin = fs.origins[f]
        tb = [
            granks[o] if o >= 0 else n + granks[partner_origin[f][i]]
            for i, o in enumerate(origin)
        ]
        ranks = canonical_ranks(frag, tb)
        labels = {w: _PH.format(k) for w, k in fs.attachments[f]}
        text, used = serialize(frag, ranks, labels, tidy=True)
        out.append(
            _Block(
                heavy=frag.heavy_atom_count(),
                key=_PH_RE.sub("*", text),
                tie=min(granks[o] for o in origin if o >= 0),
                text=text,
                used=frozenset(used),
            )
        )
    return out


def _assemble(blocks: Sequence[_Block]) -> str:
    """Join blocks and replace placeholders by digits in order of appearance.

    Attachment digits start at the lowest digit no block uses internally and
    never collide with any internal ring digit.
    """
    reserved = set().union(*(b.used for b in blocks)) if blocks else set()
    text = ".".join(b.text for b in blocks)
    assigned: dict[str, int] = {}
    nxt = [1]

    def sub(m: re.Match) -> str:
        k = m.group(1)
        if k not in assigned:
            d = nxt[0]
            while d in reserved:
                d += 1
            if d > 99:
                raise FragmentationFailure("ran out of ring-closure labels")
            assigned[k] = d
            nxt[0] = d + 1
        return ring_label(assigned[k])

    return _PH_RE.sub(sub, text)


def safe_blocks(
    g: MolGraph,
    scheme: FragmentationScheme | str,
    rules: Sequence[DisconnectionRule] | None = None,
) -> list[_Block]:
    """Fragment ``g`` and return its blocks in canonical order."""
    if g.component_count != 1:
        raise FragmentationFailure("input molecule is disconnected")
    fs = fragment(g, eligible_bonds(g, scheme, rules))
    return sorted(_blocks(g, fs), key=lambda b: (-b.heavy, b.key, b.tie))


# --------------------------------------------------------------------------- codec


def encode(
    g: MolGraph,
    scheme: FragmentationScheme | str = FragmentationScheme.BRICS,
    order: Order = "canonical",
    seed: int = 0,
    rules: Sequence[DisconnectionRule] | None = None,
) -> SafeString:
    """Encode a connected molecule as SAFE.

    ``order="canonical"`` sorts blocks by heavy-atom count (descending), then
    canonical fragment SMILES; ``"randomized"`` shuffles them with ``seed``.

    Raises:
        FragmentationFailure: The molecule could not be fragmented.
    """
    if order not in ("canonical", "randomized"):
        raise ValueError(f"order must be 'canonical' or 'randomized', not {order!r}")
    blocks = safe_blocks(g, scheme, rules)
    if len(blocks) == 1:
        return SafeString(canonical_smiles(g))
    if order == "randomized":
        random.Random(seed).shuffle(blocks)
    return SafeString(_assemble(blocks))


def randomize_safe(
    g: MolGraph,
    scheme: FragmentationScheme | str = FragmentationScheme.BRICS,
    seed: int = 0,
    rules: Sequence[DisconnectionRule] | None = None,
) -> SafeString:
    """Same blocks as :func:`encode`, seeded random block order, fresh digits."""
    return encode(g, scheme, "randomized", seed, rules)


def decode(s: SafeString | str) -> MolGraph:
    """Parse SAFE text; unpaired or absent links show up as extra components."""
    return parse_smiles(s.text if isinstance(s, SafeString) else s)


def is_fragmented(g: MolGraph) -> bool:
    return g.component_count > 1


# --------------------------------------------------------------------------- prompts


def _labeled_block(g: MolGraph) -> tuple[str, set[int]]:
    wild = g.wildcard_atoms()
    for w in wild:
        if g.degree(w) != 1:
            raise BadAttachmentCount(f"attachment atom {w} must have exactly one neighbor")
    labels = {w: _PH.format(k) for k, w in enumerate(wild)}
    text, used = serialize(g, canonical_ranks(g), labels, tidy=True)
    return text, set(used)


def _fill(text: str, reserved: set[int], taken: list[int]) -> tuple[str, list[int]]:
    digits: list[int] = []
    mapping: dict[str, int] = {}

    def sub(m: re.Match) -> str:
        k = m.group(1)
        if k not in mapping:
            d = 1
            while d in reserved or d in taken:
                d += 1
            mapping[k] = d
            taken.append(d)
            digits.append(d)
        return ring_label(mapping[k])

    return _PH_RE.sub(sub, text), digits


def scaffold_prompt(scaffold: MolGraph) -> Prompt:
    """One block for the scaffold, its ``*`` atoms turned into open digits, then ``.``.

    Raises:
        NoAttachmentPoints: The scaffold has no ``*`` atom.
        BadAttachmentCount: A ``*`` atom is not singly connected.
    """
    if not scaffold.wildcard_atoms():
        raise NoAttachmentPoints("scaffold has no attachment points")
    text, used = _labeled_block(scaffold)
    filled, digits = _fill(text, used, [])
    return Prompt(filled + ".", tuple(digits), "decorate")


def linker_prompt(frag_a: MolGraph, frag_b: MolGraph) -> Prompt:
    """Two fragment blocks, each with one open digit; the completion links them.

    Raises:
        BadAttachmentCount: A fragment does not have exactly one ``*`` atom.
    """
    for name, frag in (("first", frag_a), ("second", frag_b)):
        if len(frag.wildcard_atoms()) != 1:
            raise BadAttachmentCount(
                f"{name} fragment has {len(frag.wildcard_atoms())} attachment points, expected 1"
            )
    text_a, used_a = _labeled_block(frag_a)
    text_b, used_b = _labeled_block(frag_b)
    reserved = used_a | used_b
    taken: list[int] = []
    filled_a, da = _fill(text_a, reserved, taken)
    filled_b, db = _fill(text_b, reserved, taken)
    return Prompt(f"{filled_a}.{filled_b}.", tuple(da + db), "link")
