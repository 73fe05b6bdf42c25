"""Generative target formats: rendering, robust parsing, prompt assembly.

Three target-text formats express a sentence's normalization:

  * ``plain``  — the normalized text itself.
  * ``struct`` — the full text with each rewrite embedded in place as
    ``[[before>>after]]``.
  * ``span``   — only the rewrites, as ``before>>after>>count`` records
    joined by ``||`` (``NONE`` when there is nothing to normalize).  The
    count says how many times ``before`` already occurred earlier in the
    source, which pins the record to an exact span without repeating the
    full text.

Parsers treat model output as untrusted: malformed or unresolvable records
are dropped and counted, never raised.  Occurrence counting includes
overlapping occurrences ("aaa" contains "aa" at 0 and 1).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from .corpus import NormInstance, SentenceAnnotation, apply_instances, gold_as_instances

PLAIN = "plain"
STRUCT = "struct"
SPAN = "span"
APPROACHES = (PLAIN, STRUCT, SPAN)

FIELD_SEP = ">>"
RECORD_SEP = "||"
BLOCK_OPEN = "[["
BLOCK_CLOSE = "]]"
NONE_OUTPUT = "NONE"

PROMPT_TEMPLATE = "Instruction:\n{inst}\n\nInput:\n{src}\n\nOutput:\n"

_COUNT_RE = re.compile(r"[0-9]+")


class GenFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SpanRecord:
    before: str
    after: str
    count: int


@dataclass(frozen=True)
class ParseOutcome:
    predictions: tuple[NormInstance, ...]
    dropped: int = 0
    notes: tuple[str, ...] = ()


@lru_cache(maxsize=1)
def _instructions() -> dict[str, str]:
    data = resources.files("lexnorm.resources").joinpath("instructions.json").read_text("utf-8")
    return json.loads(data)


def instruction_text(approach: str, language_name: str = "{lang}") -> str:
    if approach not in APPROACHES:
        raise GenFormatError(f"unknown approach {approach!r}; expected one of {APPROACHES}")
    return _instructions()[approach].replace("{lang}", language_name)


def build_prompt(source: str, approach: str, language_name: str) -> str:
    return PROMPT_TEMPLATE.format(inst=instruction_text(approach, language_name), src=source)


def occurrence_starts(source: str, sub: str) -> list[int]:
    """Start indices of every occurrence of ``sub``, overlaps included."""
    if not sub:
        raise GenFormatError("cannot enumerate occurrences of the empty string")
    starts = []
    i = source.find(sub)
    while i != -1:
        starts.append(i)
        i = source.find(sub, i + 1)
    return starts


_DELIMS = (FIELD_SEP, RECORD_SEP, BLOCK_OPEN, BLOCK_CLOSE)


def _contains_delimiter(text: str) -> bool:
    return any(d in text for d in _DELIMS)


def render_target(sent: SentenceAnnotation, approach: str) -> str:
    """Serialize the gold annotation (first forms) into one target text."""
    if approach not in APPROACHES:
        raise GenFormatError(f"unknown approach {approach!r}; expected one of {APPROACHES}")
    if approach == PLAIN:
        return apply_instances(sent.text, gold_as_instances(sent))
    text = sent.text
    for g in sent.gold:
        before = text[g.begin:g.end]
        if _contains_delimiter(before) or _contains_delimiter(g.first_form):
            raise GenFormatError(
                f"{sent.id}: span content {before!r}->{g.first_form!r} contains a format delimiter")
    if approach == STRUCT:
        out = []
        pos = 0
        for g in sent.gold:
            out.append(text[pos:g.begin])
            out.append(f"{BLOCK_OPEN}{text[g.begin:g.end]}{FIELD_SEP}{g.first_form}{BLOCK_CLOSE}")
            pos = g.end
        out.append(text[pos:])
        return "".join(out)
    # span format
    if not sent.gold:
        return NONE_OUTPUT
    records = []
    for g in sent.gold:
        if g.begin == g.end:
            raise GenFormatError(f"{sent.id}: insertion span at {g.begin} has no source substring")
        before = text[g.begin:g.end]
        count = sum(1 for s in occurrence_starts(text, before) if s < g.begin)
        records.append(f"{before}{FIELD_SEP}{g.first_form}{FIELD_SEP}{count}")
    return RECORD_SEP.join(records)


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1] or a == b


def parse_struct(source: str, generated: str) -> ParseOutcome:
    """Parse ``[[before>>after]]`` blocks out of a full-text generation.

    Outside text and before-strings are matched against the source left to
    right; once alignment is lost the remainder is dropped rather than
    guessed.  A reconstruction failure (outside text plus before parts not
    re-assembling the source) is reported in the notes.
    """
    preds: list[NormInstance] = []
    dropped = 0
    notes: list[str] = []
    pos = 0  # consumed source prefix
    g = 0    # consumed generation prefix

    def remaining_blocks(from_index: int) -> int:
        return max(1, generated.count(BLOCK_OPEN, from_index))

    while True:
        open_i = generated.find(BLOCK_OPEN, g)
        if open_i == -1:
            tail = generated[g:]
            if not (source.startswith(tail, pos) and pos + len(tail) == len(source)):
                notes.append("reconstruction mismatch: outside text plus before parts != source")
            break
        close_i = generated.find(BLOCK_CLOSE, open_i + len(BLOCK_OPEN))
        if close_i == -1:
            dropped += remaining_blocks(open_i)
            notes.append(f"unterminated block at output offset {open_i}")
            break
        outside = generated[g:open_i]
        body = generated[open_i + len(BLOCK_OPEN):close_i]
        next_g = close_i + len(BLOCK_CLOSE)
        if not source.startswith(outside, pos):
            dropped += remaining_blocks(open_i)
            notes.append(f"context mismatch before block at output offset {open_i}")
            break
        parts = body.split(FIELD_SEP)
        if len(parts) != 2 or BLOCK_OPEN in body:
            dropped += remaining_blocks(open_i)
            notes.append(f"malformed block {body!r}")
            break
        before, after = parts
        begin = pos + len(outside)
        if not source.startswith(before, begin):
            dropped += remaining_blocks(open_i)
            notes.append(f"before-string {before!r} does not match source at {begin}")
            break
        span = (begin, begin + len(before))
        if RECORD_SEP in before or RECORD_SEP in after:
            dropped += 1
            notes.append(f"record separator inside block {body!r}")
        elif preds and _overlaps(preds[-1].span, span):
            dropped += 1
            notes.append(f"duplicate span {span}")
        else:
            preds.append(NormInstance(span[0], span[1], after))
        pos = span[1]
        g = next_g
    return ParseOutcome(tuple(preds), dropped, tuple(notes))


def parse_span(source: str, generated: str) -> ParseOutcome:
    """Parse ``before>>after>>count`` records and resolve each count to the
    exact source span; unresolvable or conflicting records are dropped."""
    text = generated.strip()
    if text == NONE_OUTPUT:
        return ParseOutcome((), 0, ())
    preds: list[NormInstance] = []
    dropped = 0
    notes: list[str] = []
    for raw in text.split(RECORD_SEP):
        rec = raw.strip()
        parts = [p.strip() for p in rec.split(FIELD_SEP)]
        if len(parts) != 3:
            dropped += 1
            notes.append(f"wrong field count in record {rec!r}")
            continue
        before, after, count_s = parts
        if not before:
            dropped += 1
            notes.append(f"empty before-string in record {rec!r}")
            continue
        if BLOCK_OPEN in rec or BLOCK_CLOSE in rec:
            dropped += 1
            notes.append(f"bracket delimiter in record {rec!r}")
            continue
        if not _COUNT_RE.fullmatch(count_s):
            dropped += 1
            notes.append(f"non-integer count in record {rec!r}")
            continue
        count = int(count_s)
        starts = occurrence_starts(source, before)
        if count >= len(starts):
            dropped += 1
            notes.append(
                f"{before!r} occurs {len(starts)} time(s) in the source, need index {count}")
            continue
        begin = starts[count]
        span = (begin, begin + len(before))
        if any(_overlaps(p.span, span) for p in preds):
            dropped += 1
            notes.append(f"record {rec!r} overlaps an earlier accepted span")
            continue
        preds.append(NormInstance(span[0], span[1], after))
    preds.sort(key=lambda p: (p.begin, p.end))
    return ParseOutcome(tuple(preds), dropped, tuple(notes))


def parse_generated(source: str, generated: str, approach: str) -> ParseOutcome:
    if approach == STRUCT:
        return parse_struct(source, generated)
    if approach == SPAN:
        return parse_span(source, generated)
    raise GenFormatError(f"no span parser for approach {approach!r}")


# --- training-pair serialization ------------------------------------------

def write_training_pairs(
    sentences: Iterable[SentenceAnnotation],
    path: str | Path,
    approach: str,
    prompts: bool = False,
    language_name: str = "Japanese",
) -> None:
    """Write ``{"id","source","target","approach"}`` JSONL, or prompt pairs
    ``{"id","prompt","target"}`` when ``prompts`` is set."""
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            target = render_target(sent, approach)
            if prompts:
                obj = {"id": sent.id,
                       "prompt": build_prompt(sent.text, approach, language_name),
                       "target": target}
            else:
                obj = {"id": sent.id, "source": sent.text,
                       "target": target, "approach": approach}
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
