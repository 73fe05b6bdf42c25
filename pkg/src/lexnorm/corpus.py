"""Data model and JSONL I/O for span-annotated normalization corpora.

A corpus is a set of named splits, each a list of sentences.  A sentence
carries its source text (indexed by Unicode code point), optional word
tokens with POS information, and gold normalization instances: spans of
the source text paired with one or more acceptable standard forms.

Span semantics:
  * ``(b, e)`` with ``b < e`` covers ``text[b:e]``.
  * An empty replacement form means the span is deleted.
  * ``b == e`` marks an insertion point; every form must then be non-empty.

Texts are stored verbatim: no Unicode normalization, case folding, or
width conversion is applied at any point.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class CorpusError(ValueError):
    """A file or annotation violated the corpus format or an invariant."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = str(path)
        if line is not None:
            loc = f"{loc}:{line}" if loc else f"line {line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = str(path) if path is not None else None
        self.line = line


@dataclass(frozen=True)
class NormInstance:
    """A single predicted normalization: replace ``text[begin:end]`` by ``form``."""

    begin: int
    end: int
    form: str

    @property
    def span(self) -> tuple[int, int]:
        return (self.begin, self.end)


@dataclass(frozen=True)
class GoldInstance:
    """A gold normalization span with its set of acceptable standard forms.

    ``forms`` preserves file order; the first entry is the canonical form
    used wherever a single training target is needed.  Matching a
    prediction accepts any member.
    """

    begin: int
    end: int
    forms: tuple[str, ...]
    category: str | None = None

    @property
    def span(self) -> tuple[int, int]:
        return (self.begin, self.end)

    @property
    def first_form(self) -> str:
        return self.forms[0]


@dataclass(frozen=True)
class Token:
    begin: int
    end: int
    pos: str
    lemma: str | None = None
    categories: frozenset[str] = frozenset()

    @property
    def span(self) -> tuple[int, int]:
        return (self.begin, self.end)


@dataclass(frozen=True)
class SentenceAnnotation:
    id: str
    domain: str
    text: str
    tokens: tuple[Token, ...] | None = None
    gold: tuple[GoldInstance, ...] = ()

    @property
    def n(self) -> int:
        return len(self.text)

    def surfaces(self) -> list[str]:
        """Source substrings of the gold spans, in span order."""
        return [self.text[g.begin:g.end] for g in self.gold]


@dataclass
class Dataset:
    splits: dict[str, list[SentenceAnnotation]]
    provenance: dict[str, str] = field(default_factory=dict)

    def split(self, name: str) -> list[SentenceAnnotation]:
        if name not in self.splits:
            raise CorpusError(f"unknown split {name!r}; have {sorted(self.splits)}")
        return self.splits[name]


def _validate_sentence(sent: SentenceAnnotation, path=None, line=None) -> SentenceAnnotation:
    n = sent.n
    gold = tuple(sorted(sent.gold, key=lambda g: (g.begin, g.end)))
    for g in gold:
        if not (0 <= g.begin <= g.end <= n):
            raise CorpusError(f"gold span ({g.begin},{g.end}) out of bounds for length {n}", path, line)
        if not g.forms:
            raise CorpusError(f"gold span ({g.begin},{g.end}) has no forms", path, line)
        if g.begin == g.end and any(f == "" for f in g.forms):
            raise CorpusError(f"insertion at {g.begin} with an empty form", path, line)
    for prev, cur in zip(gold, gold[1:]):
        if cur.begin < prev.end or (prev.span == cur.span):
            raise CorpusError(f"overlapping spans {prev.span} and {cur.span}", path, line)
    # An insertion point may sit on another span's boundary but not inside it.
    for g in gold:
        if g.begin == g.end:
            for other in gold:
                if other is not g and other.begin < g.begin < other.end:
                    raise CorpusError(
                        f"insertion at {g.begin} lies inside span {other.span}", path, line)
    tokens = sent.tokens
    if tokens is not None:
        tokens = tuple(sorted(tokens, key=lambda t: (t.begin, t.end)))
        pos = 0
        for t in tokens:
            if t.begin != pos or t.end <= t.begin:
                raise CorpusError(
                    f"tokens do not partition the text: gap or overlap at {t.span}", path, line)
            pos = t.end
        if pos != n:
            raise CorpusError(f"tokens cover [0,{pos}) but text has length {n}", path, line)
    return replace(sent, gold=gold, tokens=tokens)


def _sentence_from_obj(obj: dict, path=None, line=None) -> SentenceAnnotation:
    try:
        sent_id = str(obj["id"])
        text = obj["text"]
        domain = str(obj.get("domain", ""))
    except KeyError as exc:
        raise CorpusError(f"missing required key {exc}", path, line) from None
    if not isinstance(text, str):
        raise CorpusError("'text' must be a string", path, line)
    gold = []
    for g in obj.get("gold", []):
        try:
            forms = tuple(str(f) for f in g["forms"])
            gold.append(GoldInstance(int(g["b"]), int(g["e"]), forms, g.get("category")))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"bad gold entry {g!r}: {exc}", path, line) from None
    tokens = None
    if "tokens" in obj and obj["tokens"] is not None:
        tokens = []
        for t in obj["tokens"]:
            try:
                tokens.append(Token(int(t["b"]), int(t["e"]), str(t.get("pos", "")),
                                    t.get("lemma"), frozenset(t.get("categories", []))))
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"bad token entry {t!r}: {exc}", path, line) from None
        tokens = tuple(tokens)
    sent = SentenceAnnotation(sent_id, domain, text, tokens, tuple(gold))
    return _validate_sentence(sent, path, line)


def sentence_to_obj(sent: SentenceAnnotation) -> dict:
    obj: dict = {"id": sent.id, "domain": sent.domain, "text": sent.text}
    if sent.tokens is not None:
        obj["tokens"] = [
            {"b": t.begin, "e": t.end, "pos": t.pos,
             **({"lemma": t.lemma} if t.lemma is not None else {}),
             **({"categories": sorted(t.categories)} if t.categories else {})}
            for t in sent.tokens
        ]
    obj["gold"] = [
        {"b": g.begin, "e": g.end, "forms": list(g.forms),
         **({"category": g.category} if g.category is not None else {})}
        for g in sent.gold
    ]
    return obj


def load_split(path: str | Path) -> list[SentenceAnnotation]:
    """Load and validate one JSONL annotation file (one sentence per line)."""
    sentences = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"malformed JSON: {exc.msg} (col {exc.colno})", path, lineno) from None
            sent = _sentence_from_obj(obj, path, lineno)
            if sent.id in seen_ids:
                raise CorpusError(f"duplicate sentence id {sent.id!r}", path, lineno)
            seen_ids.add(sent.id)
            sentences.append(sent)
    return sentences


def load_dataset(base: str | Path, split_spec: Mapping[str, str | Path]) -> Dataset:
    """Load several split files relative to ``base`` into one Dataset."""
    base = Path(base)
    splits = {}
    provenance = {}
    for name, rel in split_spec.items():
        p = Path(rel)
        if not p.is_absolute():
            p = base / p
        splits[name] = load_split(p)
        provenance[name] = str(p)
    return Dataset(splits, provenance)


def save_split(sentences: Iterable[SentenceAnnotation], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            fh.write(json.dumps(sentence_to_obj(sent), ensure_ascii=False) + "\n")


def apply_instances(text: str, instances: Sequence[NormInstance]) -> str:
    """Rewrite ``text`` by the given sorted, non-overlapping instances.

    Empty forms delete their span; ``begin == end`` inserts the form.
    """
    out = []
    pos = 0
    prev: NormInstance | None = None
    for inst in instances:
        if not (0 <= inst.begin <= inst.end <= len(text)):
            raise CorpusError(f"span ({inst.begin},{inst.end}) out of bounds for length {len(text)}")
        if inst.begin < pos or (prev is not None and prev.span == inst.span):
            raise CorpusError(f"instances must be sorted and non-overlapping (at {inst.span})")
        out.append(text[pos:inst.begin])
        out.append(inst.form)
        pos = inst.end
        prev = inst
    out.append(text[pos:])
    return "".join(out)


def gold_as_instances(sent: SentenceAnnotation) -> list[NormInstance]:
    """The gold annotation as predictions, taking each instance's first form."""
    return [NormInstance(g.begin, g.end, g.first_form) for g in sent.gold]


def gold_renderings(sent: SentenceAnnotation, limit: int = 256) -> set[str]:
    """Every normalized text reachable by choosing one form per instance.

    The cartesian product is capped at ``limit`` renderings; instances with
    many alternative forms are rare, so the cap is a combinatorial guard,
    not a practical restriction.
    """
    import itertools

    choices = itertools.product(*(g.forms for g in sent.gold))
    out = set()
    for combo in itertools.islice(choices, limit):
        instances = [NormInstance(g.begin, g.end, form)
                     for g, form in zip(sent.gold, combo)]
        out.add(apply_instances(sent.text, instances))
    return out


@dataclass(frozen=True)
class SplitStats:
    sentences: int
    words: int | None
    instances: int


@dataclass
class StatsReport:
    per_split: dict[str, SplitStats]
    per_domain: dict[str, dict[str, SplitStats]]  # split -> domain -> stats

    def to_json(self) -> dict:
        def enc(s: SplitStats) -> dict:
            return {"sentences": s.sentences, "words": s.words, "instances": s.instances}
        return {
            "splits": {k: enc(v) for k, v in self.per_split.items()},
            "domains": {
                split: {dom: enc(st) for dom, st in sorted(rows.items())}
                for split, rows in self.per_domain.items()
            },
        }


def _stats_for(sentences: Sequence[SentenceAnnotation]) -> SplitStats:
    words = sum(len(s.tokens) for s in sentences if s.tokens is not None)
    has_tokens = any(s.tokens is not None for s in sentences)
    return SplitStats(
        sentences=len(sentences),
        words=words if has_tokens else None,
        instances=sum(len(s.gold) for s in sentences),
    )


def dataset_stats(ds: Dataset) -> StatsReport:
    per_split = {}
    per_domain: dict[str, dict[str, SplitStats]] = {}
    for name, sentences in ds.splits.items():
        per_split[name] = _stats_for(sentences)
        by_dom: dict[str, list[SentenceAnnotation]] = {}
        for s in sentences:
            by_dom.setdefault(s.domain, []).append(s)
        per_domain[name] = {dom: _stats_for(group) for dom, group in sorted(by_dom.items())}
    return StatsReport(per_split, per_domain)


def sample_subset(ds: Dataset, split: str, n: int, seed: int) -> Dataset:
    """Uniform sample of ``n`` sentences without replacement, order preserved.

    Deterministic for a fixed seed.
    """
    sentences = ds.split(split)
    if n > len(sentences):
        raise CorpusError(f"cannot sample {n} sentences from a split of {len(sentences)}")
    indices = sorted(random.Random(seed).sample(range(len(sentences)), n))
    subset = [sentences[i] for i in indices]
    provenance = dict(ds.provenance)
    provenance[split] = f"{provenance.get(split, split)}#n={n},seed={seed}"
    return Dataset({split: subset}, provenance)


def dataset_fingerprint(sentences: Sequence[SentenceAnnotation]) -> str:
    h = hashlib.sha256()
    for s in sentences:
        h.update(s.id.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()[:12]


def load_lexicon(path: str | Path) -> frozenset[str]:
    """Read a lexicon file: one surface form per line, UTF-8."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.rstrip("\n") for line in fh if line.rstrip("\n"))
