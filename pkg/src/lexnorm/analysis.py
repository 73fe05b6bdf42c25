"""Difficulty indicators, correlation, and per-domain/category breakdowns.

The indicators relate accuracy to lexical coverage:

  * surf_outside_train — share of test-set non-standard surface tokens
    never seen among the training set's non-standard surfaces.
  * surf_in_train — complement view for an arbitrary group of surfaces
    (e.g. the surfaces behind a model's TP/FP/FN instances).
  * norm_in_lex — share of predicted forms found in an external lexicon.

All rates count tokens with multiplicity, and surfaces compare by exact
code-point equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import NormInstance, SentenceAnnotation
from .metrics import PRF, score_normalization


class AnalysisError(ValueError):
    pass


def surf_outside_train(train_surfaces: Iterable[str], test_surfaces: Sequence[str]) -> float | None:
    """Fraction of test surface tokens whose surface never occurs in training."""
    if not test_surfaces:
        return None
    known = set(train_surfaces)
    return sum(1 for s in test_surfaces if s not in known) / len(test_surfaces)


def surf_in_train(train_surfaces: Iterable[str], instance_surfaces: Sequence[str]) -> float | None:
    """Fraction of the given surface tokens that occur in training."""
    if not instance_surfaces:
        return None
    known = set(train_surfaces)
    return sum(1 for s in instance_surfaces if s in known) / len(instance_surfaces)


def norm_in_lex(predicted_forms: Sequence[str], lexicon: frozenset[str] | set[str]) -> float | None:
    """Fraction of predicted forms present in the lexicon.

    Empty forms (deletions) do not enter the denominator.
    """
    forms = [f for f in predicted_forms if f != ""]
    if not forms:
        return None
    return sum(1 for f in forms if f in lexicon) / len(forms)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise AnalysisError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise AnalysisError("need at least two points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    vx = math.fsum(a * a for a in dx)
    vy = math.fsum(b * b for b in dy)
    if vx == 0.0 or vy == 0.0:
        raise AnalysisError("zero variance in one of the variables")
    return math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(vx * vy)


@dataclass(frozen=True)
class CategoryRow:
    gold: int
    matched: int

    @property
    def recall(self) -> float | None:
        return self.matched / self.gold if self.gold else None


@dataclass
class BreakdownTable:
    key: str  # "domain" or "category"
    rows: dict[str, PRF] | dict[str, CategoryRow]

    def to_json(self) -> dict:
        if self.key == "domain":
            return {"key": self.key,
                    "rows": {k: v.to_json() for k, v in sorted(self.rows.items())}}
        return {"key": self.key,
                "rows": {k: {"gold": v.gold, "matched": v.matched, "recall": v.recall}
                         for k, v in sorted(self.rows.items())}}


UNCATEGORIZED = "(none)"


def breakdown(
    sentences: Sequence[SentenceAnnotation],
    pred: Mapping[str, Sequence[NormInstance]],
    key: str,
    beta: float = 0.5,
) -> BreakdownTable:
    """Per-domain PRF rows, or per-category recall rows.

    Domain rows partition the global TP/FP/FN counts exactly.  Category
    rows report recall only, since predictions carry no category labels.
    """
    if key == "domain":
        groups: dict[str, list[SentenceAnnotation]] = {}
        for s in sentences:
            groups.setdefault(s.domain, []).append(s)
        rows: dict[str, PRF] = {}
        for dom, group in groups.items():
            gold = {s.id: s.gold for s in group}
            sub_pred = {s.id: pred[s.id] for s in group}
            rows[dom] = score_normalization(gold, sub_pred, beta)
        return BreakdownTable("domain", rows)
    if key == "category":
        cat_rows: dict[str, CategoryRow] = {}
        counts: dict[str, list[int]] = {}
        for s in sentences:
            preds = pred[s.id]
            # Re-run per-gold matching so each gold instance knows its fate.
            matched = [False] * len(s.gold)
            seen = set()
            for p in preds:
                pkey = (p.begin, p.end, p.form)
                if pkey in seen:
                    continue
                seen.add(pkey)
                for gi, g in enumerate(s.gold):
                    if not matched[gi] and g.span == p.span and p.form in g.forms:
                        matched[gi] = True
                        break
            for gi, g in enumerate(s.gold):
                cat = g.category or UNCATEGORIZED
                row = counts.setdefault(cat, [0, 0])
                row[0] += 1
                row[1] += int(matched[gi])
        for cat, (total, hit) in counts.items():
            cat_rows[cat] = CategoryRow(total, hit)
        return BreakdownTable("category", cat_rows)
    raise AnalysisError(f"unknown breakdown key {key!r}; expected 'domain' or 'category'")


@dataclass
class IndicatorReport:
    surf_outside_train: float | None
    surf_in_train: float | None
    norm_in_lex: float | None
    denominators: dict[str, int]

    def to_json(self) -> dict:
        return {"surf_outside_train": self.surf_outside_train,
                "surf_in_train": self.surf_in_train,
                "norm_in_lex": self.norm_in_lex,
                "denominators": self.denominators}


def indicator_report(
    train_sentences: Sequence[SentenceAnnotation],
    test_sentences: Sequence[SentenceAnnotation],
    predicted_forms: Sequence[str] | None = None,
    lexicon: frozenset[str] | None = None,
) -> IndicatorReport:
    train_surfaces = [s for sent in train_sentences for s in sent.surfaces()]
    test_surfaces = [s for sent in test_sentences for s in sent.surfaces()]
    nil = None
    if predicted_forms is not None and lexicon is not None:
        nil = norm_in_lex(predicted_forms, lexicon)
    return IndicatorReport(
        surf_outside_train=surf_outside_train(train_surfaces, test_surfaces),
        surf_in_train=surf_in_train(train_surfaces, test_surfaces),
        norm_in_lex=nil,
        denominators={
            "train_surfaces": len(train_surfaces),
            "test_surfaces": len(test_surfaces),
            "predicted_forms": len([f for f in predicted_forms or [] if f != ""]),
        },
    )
