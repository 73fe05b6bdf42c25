"""Oracle responder: answers every request from a gold annotation file.

Reads the standard JSONL annotation format (``{"id", "text", "gold":
[{"b", "e", "forms": [...]}, ...]}``) and serves the encodings a perfect
model would produce: boundary tags and length values for ``detect``, the
annotated standard forms for ``infill``, and the rendered target text for
``generate``.  The generate branch picks the output format by recognizing
which instruction the prompt carries.
"""

from __future__ import annotations

import json
from pathlib import Path


class EchoError(ValueError):
    pass


class EchoResponder:
    def __init__(self, gold_path: str | Path):
        self._sentences: dict[str, dict] = {}
        with open(gold_path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    obj = json.loads(raw)
                    sid = str(obj["id"])
                    text = str(obj["text"])
                    gold = sorted(
                        ((int(g["b"]), int(g["e"]), [str(f) for f in g["forms"]])
                         for g in obj.get("gold", [])),
                        key=lambda g: (g[0], g[1]))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise EchoError(f"{gold_path}:{lineno}: bad gold line: {exc}") from None
                self._sentences[sid] = {"text": text, "gold": gold}

    def capabilities(self) -> list[str]:
        return ["detect", "infill", "generate"]

    def _lookup(self, sent_id: str) -> dict:
        sent = self._sentences.get(sent_id)
        if sent is None:
            raise EchoError(f"unknown sentence id {sent_id!r}")
        return sent

    def detect(self, sent_id: str, chars: list[str]) -> tuple[list[str], list[int]]:
        sent = self._lookup(sent_id)
        n = len(sent["text"])
        if len(chars) != n:
            raise EchoError(f"{sent_id}: got {len(chars)} chars, gold text has {n}")
        tags = ["O"] * n
        lengths = [-1] * n
        for b, e, forms in sent["gold"]:
            if b == e:
                raise EchoError(f"{sent_id}: insertion spans are not taggable")
            if e - b == 1:
                tags[b] = "S"
            else:
                tags[b] = "B"
                for i in range(b + 1, e - 1):
                    tags[i] = "I"
                tags[e - 1] = "E"
            for i in range(b, e):
                lengths[i] = len(forms[0])
        return tags, lengths

    def infill(self, sent_id: str, pieces: list[dict], chunks: list[list[int]]) -> list[str]:
        sent = self._lookup(sent_id)
        if len(chunks) != len(sent["gold"]):
            raise EchoError(
                f"{sent_id}: request has {len(chunks)} chunks, gold has {len(sent['gold'])}")
        return [forms[0] for _b, _e, forms in sent["gold"]]

    def generate(self, sent_id: str, prompt: str, max_new_tokens: int) -> str:
        sent = self._lookup(sent_id)
        return _render(sent["text"], sent["gold"], _sniff(prompt))

    def sentence_count(self) -> int:
        return len(self._sentences)


def _sniff(prompt: str) -> str:
    if 'output exactly "NONE"' in prompt:
        return "span"
    if "[[" in prompt:
        return "struct"
    return "plain"


def _render(text: str, gold: list, approach: str) -> str:
    if approach == "plain":
        out = []
        pos = 0
        for b, e, forms in gold:
            out.append(text[pos:b])
            out.append(forms[0])
            pos = e
        out.append(text[pos:])
        return "".join(out)
    if approach == "struct":
        out = []
        pos = 0
        for b, e, forms in gold:
            out.append(text[pos:b])
            out.append(f"[[{text[b:e]}>>{forms[0]}]]")
            pos = e
        out.append(text[pos:])
        return "".join(out)
    if not gold:
        return "NONE"
    records = []
    for b, e, forms in gold:
        before = text[b:e]
        count = 0
        start = text.find(before)
        while 0 <= start < b:
            count += 1
            start = text.find(before, start + 1)
        records.append(f"{before}>>{forms[0]}>>{count}")
    return "||".join(records)
