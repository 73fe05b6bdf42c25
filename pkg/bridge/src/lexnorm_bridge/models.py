"""Responder backed by pretrained models (optional extra).

Three independent checkpoints can be configured:

  * ``tagger``    — token classification over characters for ``detect``.
    Labels follow the convention ``TAG`` or ``TAG:LEN`` (e.g. ``O``,
    ``B:5``); a label without ``:LEN`` carries length -1.
  * ``mlm``       — fill-mask model for ``infill``.  Each mask position is
    predicted independently with the separator-extended context.
  * ``generator`` — causal LM for ``generate``.

Imports of torch/transformers happen on first use so the echo responder
and the protocol layer work without the heavy dependencies installed.
"""

from __future__ import annotations

from dataclasses import dataclass


class ModelError(RuntimeError):
    pass


@dataclass
class ServerConfig:
    tagger: str | None = None
    mlm: str | None = None
    generator: str | None = None
    echo_gold: str | None = None
    device: str = "cpu"
    max_batch: int = 8
    max_new_tokens_cap: int = 512

    def __post_init__(self):
        if not (self.tagger or self.mlm or self.generator or self.echo_gold):
            raise ModelError("configure at least one capability "
                             "(tagger, mlm, generator, or an echo gold file)")


def _import_transformers():
    try:
        import torch
        import transformers
    except ImportError as exc:
        raise ModelError(
            "model-backed serving requires the 'models' extra "
            "(pip install lexnorm-bridge[models])") from exc
    return torch, transformers


def parse_tagger_label(label: str) -> tuple[str, int]:
    if ":" in label:
        tag, _, raw = label.partition(":")
        try:
            return tag, int(raw)
        except ValueError:
            return tag, -1
    return label, -1


class ModelResponder:
    def __init__(self, config: ServerConfig):
        self.config = config
        self._torch = None
        self._tagger = None
        self._mlm = None
        self._generator = None

    def capabilities(self) -> list[str]:
        caps = []
        if self.config.tagger:
            caps.append("detect")
        if self.config.mlm:
            caps.append("infill")
        if self.config.generator:
            caps.append("generate")
        return caps

    # -- lazy loading ------------------------------------------------------

    def _ensure_torch(self):
        if self._torch is None:
            self._torch, self._transformers = _import_transformers()
        return self._torch

    def _load_tagger(self):
        if self._tagger is None:
            self._ensure_torch()
            tok = self._transformers.AutoTokenizer.from_pretrained(self.config.tagger)
            model = self._transformers.AutoModelForTokenClassification.from_pretrained(
                self.config.tagger).to(self.config.device).eval()
            self._tagger = (tok, model)
        return self._tagger

    def _load_mlm(self):
        if self._mlm is None:
            self._ensure_torch()
            tok = self._transformers.AutoTokenizer.from_pretrained(self.config.mlm)
            model = self._transformers.AutoModelForMaskedLM.from_pretrained(
                self.config.mlm).to(self.config.device).eval()
            self._mlm = (tok, model)
        return self._mlm

    def _load_generator(self):
        if self._generator is None:
            self._ensure_torch()
            tok = self._transformers.AutoTokenizer.from_pretrained(self.config.generator)
            model = self._transformers.AutoModelForCausalLM.from_pretrained(
                self.config.generator).to(self.config.device).eval()
            self._generator = (tok, model)
        return self._generator

    # -- operations --------------------------------------------------------

    def detect(self, sent_id: str, chars: list[str]) -> tuple[list[str], list[int]]:
        torch = self._ensure_torch()
        tok, model = self._load_tagger()
        encoded = tok(chars, is_split_into_words=True, return_tensors="pt",
                      truncation=True).to(self.config.device)
        with torch.no_grad():
            logits = model(**encoded).logits[0]
        label_ids = logits.argmax(dim=-1).tolist()
        id2label = model.config.id2label
        tags = ["O"] * len(chars)
        lengths = [-1] * len(chars)
        word_ids = encoded.word_ids(0)
        for position, word_id in enumerate(word_ids):
            if word_id is None or word_id >= len(chars):
                continue
            tag, length = parse_tagger_label(str(id2label[label_ids[position]]))
            tags[word_id] = tag
            lengths[word_id] = length
        return tags, lengths

    def infill(self, sent_id: str, pieces: list[dict], chunks: list[list[int]]) -> list[str]:
        torch = self._ensure_torch()
        tok, model = self._load_mlm()
        words = []
        mask_word_index: dict[int, int] = {}  # piece index -> word position
        for i, piece in enumerate(pieces):
            kind = piece.get("t")
            if kind == "c":
                words.append(str(piece.get("v", "")))
            elif kind == "mask":
                mask_word_index[i] = len(words)
                words.append(tok.mask_token)
            elif kind == "sep":
                words.append(tok.sep_token or tok.eos_token or "")
            else:
                raise ModelError(f"unknown piece kind {kind!r}")
        encoded = tok(words, is_split_into_words=True, return_tensors="pt",
                      truncation=True).to(self.config.device)
        with torch.no_grad():
            logits = model(**encoded).logits[0]
        input_ids = encoded["input_ids"][0].tolist()
        word_ids = encoded.word_ids(0)
        # each mask position is filled independently from its own logits
        predicted_by_word: dict[int, str] = {}
        for position, (token_id, word_id) in enumerate(zip(input_ids, word_ids)):
            if word_id is None or token_id != tok.mask_token_id:
                continue
            best = int(logits[position].argmax())
            predicted_by_word[word_id] = tok.decode([best]).strip().replace("##", "")
        fills = []
        for chunk in chunks:
            parts = []
            for piece_index in chunk:
                word_id = mask_word_index.get(piece_index)
                parts.append(predicted_by_word.get(word_id, ""))
            fills.append("".join(parts))
        return fills

    def generate(self, sent_id: str, prompt: str, max_new_tokens: int) -> str:
        torch = self._ensure_torch()
        tok, model = self._load_generator()
        encoded = tok(prompt, return_tensors="pt").to(self.config.device)
        with torch.no_grad():
            output = model.generate(
                **encoded,
                max_new_tokens=min(max_new_tokens, self.config.max_new_tokens_cap),
                do_sample=False,
                pad_token_id=tok.pad_token_id or tok.eos_token_id,
            )
        continuation = output[0][encoded["input_ids"].shape[1]:]
        return tok.decode(continuation, skip_special_tokens=True).strip()
