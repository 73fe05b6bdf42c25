"""Shared fixtures: deterministic random corpora for property suites."""

from __future__ import annotations

import random

import pytest

from lexnorm.corpus import GoldInstance, NormInstance, SentenceAnnotation, Token

# Deliberately free of the format delimiters (">>", "||", "[[", "]]").
ALPHABET = "abcdefghかきくけこさしすせそツイったみてるのにXYZ012"
POS_TAGS = ("名詞", "動詞", "助詞")


def random_tokens(rng: random.Random, n: int) -> tuple[Token, ...]:
    tokens = []
    pos = 0
    while pos < n:
        length = rng.randint(1, min(4, n - pos))
        tokens.append(Token(pos, pos + length, rng.choice(POS_TAGS)))
        pos += length
    return tuple(tokens)


def random_sentence(
    rng: random.Random,
    sid: str,
    max_len: int = 28,
    with_tokens: bool = False,
    allow_deletion: bool = True,
    multi_form: bool = False,
    domain: str = "",
    span_rate: float = 0.25,
) -> SentenceAnnotation:
    n = rng.randint(0, max_len)
    text = "".join(rng.choice(ALPHABET) for _ in range(n))
    gold = []
    i = 0
    while i < n:
        if rng.random() < span_rate:
            length = rng.randint(1, min(4, n - i))
            form_count = rng.randint(1, 2) if multi_form else 1
            forms = []
            for _ in range(form_count):
                flen = rng.randint(0 if allow_deletion else 1, 4)
                forms.append("".join(rng.choice(ALPHABET) for _ in range(flen)))
            forms = tuple(dict.fromkeys(forms))
            gold.append(GoldInstance(i, i + length, forms))
            i += length + rng.randint(0, 3)
        else:
            i += rng.randint(1, 3)
    return SentenceAnnotation(
        id=sid,
        domain=domain,
        text=text,
        tokens=random_tokens(rng, n) if with_tokens else None,
        gold=tuple(gold),
    )


def random_corpus(seed: int, count: int, **kwargs) -> list[SentenceAnnotation]:
    rng = random.Random(seed)
    return [random_sentence(rng, f"s{i:05d}", **kwargs) for i in range(count)]


def random_predictions(
    rng: random.Random, sent: SentenceAnnotation
) -> list[NormInstance]:
    """Plausible non-overlapping model output: a mix of correct instances,
    wrong-form instances, shifted spans, skips, and spurious spans."""
    preds: list[NormInstance] = []
    blocked: list[tuple[int, int]] = []

    def free(b: int, e: int) -> bool:
        return all(not (b < e2 and b2 < e) for b2, e2 in blocked)

    for g in sent.gold:
        roll = rng.random()
        if roll < 0.45 and free(g.begin, g.end):
            preds.append(NormInstance(g.begin, g.end, rng.choice(g.forms)))
            blocked.append(g.span)
        elif roll < 0.65 and free(g.begin, g.end):
            wrong = g.forms[0] + "劇"  # not in the generator alphabet
            preds.append(NormInstance(g.begin, g.end, wrong))
            blocked.append(g.span)
        elif roll < 0.8 and g.end + 1 <= sent.n and free(g.begin + 1, g.end + 1):
            preds.append(NormInstance(g.begin + 1, g.end + 1, g.forms[0]))
            blocked.append((g.begin + 1, g.end + 1))
        # else: miss (false negative)
    for _ in range(rng.randint(0, 2)):
        if sent.n == 0:
            break
        b = rng.randrange(sent.n)
        e = min(sent.n, b + rng.randint(1, 3))
        if free(b, e):
            preds.append(NormInstance(b, e, "よ"))
            blocked.append((b, e))
    return sorted(preds, key=lambda p: (p.begin, p.end))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(13)


@pytest.fixture
def table1_sentence() -> SentenceAnnotation:
    return SentenceAnnotation(
        id="s1",
        domain="11 TW",
        text="ついったみてる",
        tokens=(Token(0, 4, "名詞"), Token(4, 5, "動詞"), Token(5, 7, "助動詞")),
        gold=(GoldInstance(0, 4, ("ツイッター",)),),
    )


@pytest.fixture
def oracle_fixture() -> list[SentenceAnnotation]:
    """200 sentences, positives and negatives mixed, no insertion spans,
    single forms: every backend capability can answer them from gold."""
    sents = random_corpus(
        99, 200, with_tokens=True, allow_deletion=True, multi_form=False)
    assert any(s.gold for s in sents) and any(not s.gold for s in sents)
    return sents
