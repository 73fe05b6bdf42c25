"""Span/length detection encoding and masked-infill input construction.

The detection representation labels every character of a sentence twice:

  * a chunk boundary tag from ``{B, I, E, S, O}``, and
  * an integer length value: ``-1`` for characters that need no
    normalization, ``0`` for characters of a chunk to delete, and ``k > 0``
    for characters of a chunk whose replacement has ``k`` tokens.

Under the ``full-seg`` scheme the boundary tags segment the whole sentence
into word chunks; under ``part-seg`` only normalization chunks are tagged
and every other character is ``O``.  ``full-seg-pos`` additionally carries
a per-character POS label.

Decoding is total: any pair of equally long tag/length sequences produced
by a model yields a result, with illegal tag transitions repaired locally
and repairs counted.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .corpus import NormInstance, SentenceAnnotation

FULL_SEG = "full-seg"
PART_SEG = "part-seg"
FULL_SEG_POS = "full-seg-pos"
SCHEMES = (FULL_SEG, PART_SEG, FULL_SEG_POS)

TAGS = ("B", "I", "E", "S", "O")


class TaggingError(ValueError):
    pass


@dataclass(frozen=True)
class DetectionEncoding:
    tags: tuple[str, ...]
    lengths: tuple[int, ...]
    scheme: str
    pos_tags: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Chunk:
    """A detected normalization chunk: span plus target token count."""

    begin: int
    end: int
    target_len: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.begin, self.end)


@dataclass(frozen=True)
class DetectionResult:
    chunks: tuple[Chunk, ...]
    repairs: int = 0  # illegal tag transitions repaired during decoding
    ties: int = 0     # majority votes decided by the smallest-value rule


PIECE_CHAR = "c"
PIECE_MASK = "mask"
PIECE_SEP = "sep"


@dataclass(frozen=True)
class Piece:
    kind: str
    char: str = ""


@dataclass(frozen=True)
class MaskedInput:
    """Masked source text plus the original chunk strings appended after
    one separator each, ready for a fill-mask model."""

    pieces: tuple[Piece, ...]
    mask_slots: tuple[tuple[int, ...], ...]  # per chunk: indices of its mask pieces
    extension: tuple[str, ...]               # per chunk: original characters


def _write_chunk_tags(tags: list[str], begin: int, end: int) -> None:
    if end - begin == 1:
        tags[begin] = "S"
    else:
        tags[begin] = "B"
        for i in range(begin + 1, end - 1):
            tags[i] = "I"
        tags[end - 1] = "E"


def _full_seg_segments(sent: SentenceAnnotation) -> list[tuple[int, int]]:
    """Word-chunk segmentation: gold spans are atomic chunks; tokens are
    clipped around them; uncovered runs (unvalidated input) become chunks."""
    n = sent.n
    key: list[tuple] = [("u",)] * n
    for ti, t in enumerate(sent.tokens or ()):
        for i in range(max(t.begin, 0), min(t.end, n)):
            key[i] = ("t", ti)
    for gi, g in enumerate(sent.gold):
        for i in range(g.begin, g.end):
            key[i] = ("g", gi)
    segments = []
    start = 0
    for i in range(1, n + 1):
        if i == n or key[i] != key[start]:
            segments.append((start, i))
            start = i
    return segments if n else []


def encode_detection(
    sent: SentenceAnnotation,
    scheme: str,
    form_tokenizer: Callable[[str], int] = len,
) -> DetectionEncoding:
    """Encode gold annotation into boundary tags and length values.

    ``form_tokenizer`` maps a standard form to its token count under the
    target model's vocabulary; the default counts characters.  Instances
    with several forms contribute their first form.
    """
    if scheme not in SCHEMES:
        raise TaggingError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    for g in sent.gold:
        if g.begin == g.end:
            raise TaggingError(
                f"insertion span at {g.begin} cannot be expressed as a character chunk")
    n = sent.n
    lengths = [-1] * n
    for g in sent.gold:
        value = form_tokenizer(g.first_form)
        if value < 0:
            raise TaggingError(f"form_tokenizer returned {value} for {g.first_form!r}")
        for i in range(g.begin, g.end):
            lengths[i] = value

    tags = ["O"] * n
    pos_tags: tuple[str, ...] | None = None
    if scheme == PART_SEG:
        for g in sent.gold:
            _write_chunk_tags(tags, g.begin, g.end)
    else:
        if sent.tokens is None:
            raise TaggingError(f"scheme {scheme!r} requires token annotation")
        for begin, end in _full_seg_segments(sent):
            _write_chunk_tags(tags, begin, end)
        if scheme == FULL_SEG_POS:
            pos = [""] * n
            for t in sent.tokens:
                for i in range(t.begin, t.end):
                    pos[i] = t.pos
            pos_tags = tuple(pos)
    return DetectionEncoding(tuple(tags), tuple(lengths), scheme, pos_tags)


def tag_spans(tags: Sequence[str]) -> tuple[list[tuple[int, int]], int]:
    """Segment a tag sequence into chunk spans, repairing illegal output.

    Repairs: ``I``/``E`` with no open chunk start one at that position; an
    open chunk is closed at its last position when ``B``/``S``/``O`` or the
    sequence end follows; unknown letters count as ``O``.  Returns the spans
    and the number of repairs.
    """
    spans: list[tuple[int, int]] = []
    start: int | None = None
    repairs = 0

    def close_open(at: int) -> None:
        nonlocal start, repairs
        if start is not None:
            spans.append((start, at))
            repairs += 1
            start = None

    for i, tag in enumerate(tags):
        if tag == "B":
            close_open(i)
            start = i
        elif tag == "I":
            if start is None:
                start = i
                repairs += 1
        elif tag == "E":
            if start is None:
                start = i
                repairs += 1
            spans.append((start, i + 1))
            start = None
        elif tag == "S":
            close_open(i)
            spans.append((i, i + 1))
        else:
            if tag != "O":
                repairs += 1
            close_open(i)
    close_open(len(tags))
    return spans, repairs


def _majority(values: Sequence[int]) -> tuple[int, bool]:
    counts = Counter(values)
    best = max(counts.values())
    tied = [v for v, c in counts.items() if c == best]
    return min(tied), len(tied) > 1


def decode_detection(n: int, tags: Sequence[str], lengths: Sequence[int]) -> DetectionResult:
    """Recover normalization chunks from model tag/length output.

    Each tagged chunk takes the majority vote of its length values (ties
    break toward the smallest value); chunks whose vote is ``-1`` are
    standard words and are dropped.
    """
    if len(tags) != n or len(lengths) != n:
        raise TaggingError(
            f"expected {n} tags and lengths, got {len(tags)} and {len(lengths)}")
    clamped = [v if v >= -1 else -1 for v in lengths]
    spans, repairs = tag_spans(tags)
    chunks = []
    ties = 0
    for begin, end in spans:
        value, tied = _majority(clamped[begin:end])
        if tied:
            ties += 1
        if value >= 0:
            chunks.append(Chunk(begin, end, value))
    return DetectionResult(tuple(chunks), repairs=repairs, ties=ties)


def build_masked_input(chars: str, det: DetectionResult) -> MaskedInput:
    """Replace each chunk by ``target_len`` mask pieces and append, after
    the sentence, one separator plus the chunk's original characters per
    chunk in order."""
    pos = 0
    for ch in det.chunks:
        if not (pos <= ch.begin <= ch.end <= len(chars)):
            raise TaggingError(f"chunk {ch.span} out of order or out of bounds")
        pos = ch.end
    pieces: list[Piece] = []
    mask_slots: list[tuple[int, ...]] = []
    pos = 0
    for ch in det.chunks:
        pieces.extend(Piece(PIECE_CHAR, c) for c in chars[pos:ch.begin])
        slot = []
        for _ in range(ch.target_len):
            slot.append(len(pieces))
            pieces.append(Piece(PIECE_MASK))
        mask_slots.append(tuple(slot))
        pos = ch.end
    pieces.extend(Piece(PIECE_CHAR, c) for c in chars[pos:])
    extension = []
    for ch in det.chunks:
        pieces.append(Piece(PIECE_SEP))
        original = chars[ch.begin:ch.end]
        extension.append(original)
        pieces.extend(Piece(PIECE_CHAR, c) for c in original)
    return MaskedInput(tuple(pieces), tuple(mask_slots), tuple(extension))


def assemble_predictions(det: DetectionResult, fills: Sequence[str]) -> list[NormInstance]:
    """Pair each chunk with its filled string (empty for deletions)."""
    if len(fills) != len(det.chunks):
        raise TaggingError(f"{len(det.chunks)} chunks but {len(fills)} fill strings")
    return [NormInstance(ch.begin, ch.end, fill) for ch, fill in zip(det.chunks, fills)]


# --- detection training-file serialization -------------------------------

def encoding_to_obj(sent: SentenceAnnotation, enc: DetectionEncoding) -> dict:
    obj = {
        "id": sent.id,
        "chars": list(sent.text),
        "tags": list(enc.tags),
        "lengths": list(enc.lengths),
    }
    if enc.pos_tags is not None:
        obj["pos"] = list(enc.pos_tags)
    return obj


def write_encodings(
    sentences: Iterable[SentenceAnnotation],
    path: str | Path,
    scheme: str,
    form_tokenizer: Callable[[str], int] = len,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            enc = encode_detection(sent, scheme, form_tokenizer)
            fh.write(json.dumps(encoding_to_obj(sent, enc), ensure_ascii=False) + "\n")


def read_encoding_obj(obj: dict) -> tuple[str, str, list[str], list[int], list[str] | None]:
    """Parse one detection JSONL object into (id, chars, tags, lengths, pos)."""
    chars = obj["chars"]
    text = "".join(chars) if isinstance(chars, list) else str(chars)
    tags = [str(t) for t in obj["tags"]]
    lengths = [int(v) for v in obj["lengths"]]
    if len(tags) != len(text) or len(lengths) != len(text):
        raise TaggingError(f"{obj.get('id')!r}: tag/length count does not match text length")
    pos = [str(p) for p in obj["pos"]] if "pos" in obj else None
    return str(obj["id"]), text, tags, lengths, pos
