"""Span-level scoring, sentence accuracy, chrF, and detection-step metrics.

A predicted instance is a true positive for the normalization task when its
span equals a gold span in the same sentence and its form is one of that
gold instance's acceptable forms; the detection task requires the span
match only.  Counts are micro-averaged over the whole sentence collection.

Precision is reported as ``None`` (not 0) when there are no predictions,
mirroring how such cells are usually left blank in result tables; the
F-score is defined as 0 in that case.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import GoldInstance, NormInstance, SentenceAnnotation
from .tagging import DetectionEncoding, tag_spans


class MetricsError(ValueError):
    pass


def f_beta(p: float, r: float, beta: float) -> float:
    """Weighted F measure; ``beta < 1`` favors precision."""
    if p == 0.0 and r == 0.0:
        return 0.0
    b2 = beta * beta
    return (1.0 + b2) * p * r / (b2 * p + r)


@dataclass(frozen=True)
class PRF:
    tp: int
    fp: int
    fn: int
    beta: float = 0.5

    @property
    def precision(self) -> float | None:
        if self.tp + self.fp == 0:
            return None
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float | None:
        if self.tp + self.fn == 0:
            return None
        return self.tp / (self.tp + self.fn)

    @property
    def f(self) -> float:
        p = self.precision or 0.0
        r = self.recall or 0.0
        return f_beta(p, r, self.beta)

    def to_json(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "beta": self.beta,
                "precision": self.precision, "recall": self.recall, "f": self.f}

    def __add__(self, other: "PRF") -> "PRF":
        if other.beta != self.beta:
            raise MetricsError("cannot add PRF counts with different beta")
        return PRF(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.beta)


def _dedupe(preds: Sequence[NormInstance]) -> list[NormInstance]:
    seen = set()
    out = []
    for p in preds:
        key = (p.begin, p.end, p.form)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def match_counts(
    gold: Sequence[GoldInstance],
    preds: Sequence[NormInstance],
    require_form: bool = True,
) -> tuple[int, int, int]:
    """(tp, fp, fn) for one sentence.  Exact duplicate predictions are
    deduplicated; each gold instance absorbs at most one prediction."""
    unique = _dedupe(preds)
    matched = [False] * len(gold)
    tp = 0
    for p in unique:
        for gi, g in enumerate(gold):
            if matched[gi] or g.span != p.span:
                continue
            if require_form and p.form not in g.forms:
                continue
            matched[gi] = True
            tp += 1
            break
    return tp, len(unique) - tp, len(gold) - tp


def _check_alignment(gold: Mapping[str, object], pred: Mapping[str, object]) -> None:
    if set(gold) != set(pred):
        missing = sorted(set(gold) - set(pred))[:3]
        extra = sorted(set(pred) - set(gold))[:3]
        raise MetricsError(
            f"gold/prediction id mismatch (missing from pred: {missing}, unknown: {extra})")


def score_normalization(
    gold: Mapping[str, Sequence[GoldInstance]],
    pred: Mapping[str, Sequence[NormInstance]],
    beta: float = 0.5,
) -> PRF:
    """Micro-averaged span+form scoring over id-aligned sentence maps."""
    _check_alignment(gold, pred)
    tp = fp = fn = 0
    for sid, g in gold.items():
        t, p, n = match_counts(g, pred[sid], require_form=True)
        tp, fp, fn = tp + t, fp + p, fn + n
    return PRF(tp, fp, fn, beta)


def score_detection(
    gold: Mapping[str, Sequence[GoldInstance]],
    pred: Mapping[str, Sequence[NormInstance]],
    beta: float = 0.5,
) -> PRF:
    """Like :func:`score_normalization` but a span match alone is a hit."""
    _check_alignment(gold, pred)
    tp = fp = fn = 0
    for sid, g in gold.items():
        t, p, n = match_counts(g, pred[sid], require_form=False)
        tp, fp, fn = tp + t, fp + p, fn + n
    return PRF(tp, fp, fn, beta)


@dataclass(frozen=True)
class SentenceAccuracy:
    s_acc_p: float | None
    s_acc_n: float | None
    positive: int
    negative: int

    def to_json(self) -> dict:
        return {"s_acc_p": self.s_acc_p, "s_acc_n": self.s_acc_n,
                "positive_sentences": self.positive, "negative_sentences": self.negative}


def sentence_accuracy(
    gold: Mapping[str, Sequence[GoldInstance]],
    pred: Mapping[str, Sequence[NormInstance]],
) -> SentenceAccuracy:
    """Exact-match accuracy per sentence, split by whether the sentence
    contains any gold instance.  A sentence is correct when every gold
    instance is matched and there is no spurious prediction."""
    _check_alignment(gold, pred)
    pos_total = pos_hit = neg_total = neg_hit = 0
    for sid, g in gold.items():
        tp, fp, fn = match_counts(g, pred[sid], require_form=True)
        correct = fp == 0 and fn == 0
        if g:
            pos_total += 1
            pos_hit += correct
        else:
            neg_total += 1
            neg_hit += correct
    return SentenceAccuracy(
        pos_hit / pos_total if pos_total else None,
        neg_hit / neg_total if neg_total else None,
        pos_total,
        neg_total,
    )


# --- chrF ------------------------------------------------------------------

CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 0
CHRF_BETA = 2


@dataclass(frozen=True)
class ChrfScore:
    score: float
    char_order: int = CHRF_CHAR_ORDER
    word_order: int = CHRF_WORD_ORDER
    beta: int = CHRF_BETA
    effective_order: bool = True
    note: str | None = None

    def to_json(self) -> dict:
        return {"chrf": self.score, "char_order": self.char_order,
                "word_order": self.word_order, "beta": self.beta,
                "effective_order": self.effective_order,
                **({"note": self.note} if self.note else {})}


def _char_ngrams(text: str, order: int) -> Counter:
    return Counter(text[i:i + order] for i in range(len(text) - order + 1))


def _chrf_statistics(reference: str, hypothesis: str) -> list[int]:
    """Flat [hyp, ref, match] counts per n-gram order, whitespace removed."""
    ref = "".join(reference.split())
    hyp = "".join(hypothesis.split())
    stats = []
    for order in range(1, CHRF_CHAR_ORDER + 1):
        ref_grams = _char_ngrams(ref, order)
        hyp_grams = _char_ngrams(hyp, order)
        match = sum(min(c, ref_grams[g]) for g, c in hyp_grams.items())
        stats.extend([sum(hyp_grams.values()), sum(ref_grams.values()), match])
    return stats


def _chrf_from_statistics(stats: Sequence[int]) -> float:
    prec_sum = 0.0
    rec_sum = 0.0
    effective = 0
    for i in range(CHRF_CHAR_ORDER):
        n_hyp, n_ref, n_match = stats[3 * i:3 * i + 3]
        # Orders absent from both sides are excluded so short strings are
        # scored over the orders they can actually realize.
        if n_hyp > 0 and n_ref > 0:
            prec_sum += n_match / n_hyp
            rec_sum += n_match / n_ref
            effective += 1
    if effective == 0:
        return 0.0
    p = prec_sum / effective
    r = rec_sum / effective
    if p + r == 0.0:
        return 0.0
    factor = CHRF_BETA * CHRF_BETA
    return 100.0 * (1 + factor) * p * r / (factor * p + r)


def chrf(reference: str, hypothesis: str) -> ChrfScore:
    """Character n-gram F-score (orders 1..6, beta 2) for a single pair."""
    if not reference.strip() and not hypothesis.strip():
        return ChrfScore(0.0, note="both strings empty")
    return ChrfScore(_chrf_from_statistics(_chrf_statistics(reference, hypothesis)))


def corpus_chrf(references: Sequence[str], hypotheses: Sequence[str]) -> ChrfScore:
    """Corpus-level chrF: statistics are summed over segments, then scored."""
    if len(references) != len(hypotheses):
        raise MetricsError(
            f"{len(references)} references but {len(hypotheses)} hypotheses")
    totals = [0] * (3 * CHRF_CHAR_ORDER)
    for ref, hyp in zip(references, hypotheses):
        for i, v in enumerate(_chrf_statistics(ref, hyp)):
            totals[i] += v
    return ChrfScore(_chrf_from_statistics(totals))


# --- detection-step tag metrics ---------------------------------------------

@dataclass(frozen=True)
class TagMetricsReport:
    seg_f1: float
    pos_f1: float | None
    len_pos_f1: float | None
    len_neg_f1: float | None

    def to_json(self) -> dict:
        return {"seg_f1": self.seg_f1, "pos_f1": self.pos_f1,
                "len_pos_f1": self.len_pos_f1, "len_neg_f1": self.len_neg_f1}


@dataclass
class _TagCounts:
    seg_common: int = 0
    seg_gold: int = 0
    seg_pred: int = 0
    pos_common: int = 0
    pos_gold: int = 0
    pos_pred: int = 0
    pos_scored: bool = False
    len_pos_hits: int = 0
    len_pos_total: int = 0
    len_neg_hits: int = 0
    len_neg_total: int = 0

    def add(self, other: "_TagCounts") -> None:
        self.seg_common += other.seg_common
        self.seg_gold += other.seg_gold
        self.seg_pred += other.seg_pred
        self.pos_common += other.pos_common
        self.pos_gold += other.pos_gold
        self.pos_pred += other.pos_pred
        self.pos_scored = self.pos_scored or other.pos_scored
        self.len_pos_hits += other.len_pos_hits
        self.len_pos_total += other.len_pos_total
        self.len_neg_hits += other.len_neg_hits
        self.len_neg_total += other.len_neg_total

    def report(self) -> TagMetricsReport:
        def f1(common, gold, pred):
            if gold + pred == 0:
                return 1.0
            return 2 * common / (gold + pred)

        def rate(hits, total):
            return hits / total if total else None

        return TagMetricsReport(
            seg_f1=f1(self.seg_common, self.seg_gold, self.seg_pred),
            pos_f1=f1(self.pos_common, self.pos_gold, self.pos_pred)
            if self.pos_scored else None,
            len_pos_f1=rate(self.len_pos_hits, self.len_pos_total),
            len_neg_f1=rate(self.len_neg_hits, self.len_neg_total),
        )


def _tag_counts(
    gold: DetectionEncoding,
    pred_tags: Sequence[str],
    pred_lengths: Sequence[int],
    pred_pos: Sequence[str] | None,
) -> _TagCounts:
    n = len(gold.tags)
    if len(pred_tags) != n or len(pred_lengths) != n:
        raise MetricsError(f"prediction length mismatch: expected {n} positions")
    gold_spans, _ = tag_spans(gold.tags)
    pred_spans, _ = tag_spans(pred_tags)
    counts = _TagCounts(
        seg_common=len(set(gold_spans) & set(pred_spans)),
        seg_gold=len(gold_spans),
        seg_pred=len(pred_spans),
    )
    if gold.pos_tags is not None and pred_pos is not None:
        if len(pred_pos) != n:
            raise MetricsError(f"POS prediction length mismatch: expected {n} positions")
        gold_pos = {(s, gold.pos_tags[s[0]]) for s in gold_spans}
        hyp_pos = {(s, pred_pos[s[0]]) for s in pred_spans}
        counts.pos_common = len(gold_pos & hyp_pos)
        counts.pos_gold = len(gold_pos)
        counts.pos_pred = len(hyp_pos)
        counts.pos_scored = True
    for i in range(n):
        if gold.lengths[i] >= 0:
            counts.len_pos_total += 1
            counts.len_pos_hits += pred_lengths[i] == gold.lengths[i]
        else:
            counts.len_neg_total += 1
            counts.len_neg_hits += pred_lengths[i] == gold.lengths[i]
    return counts


def tag_metrics(
    gold: DetectionEncoding,
    pred_tags: Sequence[str],
    pred_lengths: Sequence[int],
    pred_pos: Sequence[str] | None = None,
) -> TagMetricsReport:
    """Chunk-level segmentation/POS F1 plus per-position length agreement.

    Length agreement is micro-averaged exact match, reported separately for
    positions inside gold normalization chunks and for all other positions.
    """
    return _tag_counts(gold, pred_tags, pred_lengths, pred_pos).report()


def tag_metrics_corpus(
    pairs: Iterable[tuple[DetectionEncoding, Sequence[str], Sequence[int], Sequence[str] | None]],
) -> TagMetricsReport:
    """Micro-averaged tag metrics over (gold encoding, tags, lengths, pos)
    tuples for a whole corpus."""
    total = _TagCounts()
    for gold, pred_tags, pred_lengths, pred_pos in pairs:
        total.add(_tag_counts(gold, pred_tags, pred_lengths, pred_pos))
    return total.report()


# --- prediction-file helpers -------------------------------------------------

def gold_map(sentences: Iterable[SentenceAnnotation]) -> dict[str, tuple[GoldInstance, ...]]:
    return {s.id: s.gold for s in sentences}


def read_prediction_file(path: str | Path) -> tuple[dict[str, list[NormInstance]], dict[str, str]]:
    """Read a prediction JSONL file into (instances by id, texts by id)."""
    instances: dict[str, list[NormInstance]] = {}
    texts: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
                sid = str(obj["id"])
            except (json.JSONDecodeError, KeyError) as exc:
                raise MetricsError(f"{path}:{lineno}: bad prediction line: {exc}") from None
            instances[sid] = [
                NormInstance(int(i["b"]), int(i["e"]), str(i["form"]))
                for i in obj.get("instances", [])
            ]
            if "text" in obj and obj["text"] is not None:
                texts[sid] = str(obj["text"])
    return instances, texts
