"""Normalizer backends: deterministic baselines and the model-bridge client.

A backend exposes up to three capabilities behind one synchronous
interface:

  * ``detect``   — per-character boundary tags and length values,
  * ``infill``   — one filled string per masked chunk,
  * ``generate`` — free text continuation of a prompt.

Neural models live behind the wire protocol (newline-delimited JSON over a
subprocess pipe, or HTTP POST); :class:`BridgeBackend` is the client side
and validates every response shape before returning it.  The deterministic
backends here (leave-as-is, dictionary, gold echo) make pipelines testable
end to end without any model.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import genformat, tagging
from .corpus import Dataset, NormInstance, SentenceAnnotation, dataset_fingerprint
from .tagging import MaskedInput, PIECE_CHAR, PIECE_MASK, PIECE_SEP

DETECT = "detect"
INFILL = "infill"
GENERATE = "generate"

BRIDGE_ENV_VAR = "LEXNORM_BRIDGE"


class BackendError(RuntimeError):
    """A backend could not serve a request."""


class BridgeTransportError(BackendError):
    """The bridge endpoint was unreachable or the stream broke."""


class BridgeSchemaError(BackendError):
    """The bridge replied with a malformed or mis-shaped message."""


class BridgeServerError(BackendError):
    """The bridge reported an error for this request."""


class Backend:
    """Base class; subclasses override the methods they can serve."""

    capabilities: frozenset[str] = frozenset()

    def detect(self, sent_id: str, chars: str) -> tuple[list[str], list[int]]:
        raise BackendError(f"{type(self).__name__} does not support detect")

    def infill(self, sent_id: str, masked: MaskedInput) -> list[str]:
        raise BackendError(f"{type(self).__name__} does not support infill")

    def generate(self, sent_id: str, prompt: str, max_new_tokens: int) -> str:
        raise BackendError(f"{type(self).__name__} does not support generate")

    def for_worker(self) -> "Backend":
        """A backend instance safe to use from one additional worker."""
        return self

    def close(self) -> None:
        pass


# --- baselines ---------------------------------------------------------------

def leave_as_is(chars: str) -> list[NormInstance]:
    """The do-nothing baseline: no sentence is ever touched."""
    return []


@dataclass(frozen=True)
class DictEntry:
    form: str
    freq: int


@dataclass
class DictModel:
    """Surface-to-form lookup trained by frequency counting.

    Each surface maps to its most frequent first-listed form; frequency
    ties break toward the lexicographically smaller form so training is
    reproducible.
    """

    entries: dict[str, DictEntry] = field(default_factory=dict)
    built_from: str = ""

    def max_surface_len(self) -> int:
        return max((len(s) for s in self.entries), default=0)


def dict_train(ds: Dataset, split: str) -> DictModel:
    sentences = ds.split(split)
    counts: dict[tuple[str, str], int] = {}
    for sent in sentences:
        for g in sent.gold:
            surface = sent.text[g.begin:g.end]
            if not surface:
                continue  # insertion points have no matchable surface
            key = (surface, g.first_form)
            counts[key] = counts.get(key, 0) + 1
    entries: dict[str, DictEntry] = {}
    for (surface, form), freq in counts.items():
        cur = entries.get(surface)
        if cur is None or freq > cur.freq or (freq == cur.freq and form < cur.form):
            entries[surface] = DictEntry(form, freq)
    return DictModel(entries, built_from=f"{split}:{dataset_fingerprint(sentences)}")


def dict_normalize(model: DictModel, chars: str) -> list[NormInstance]:
    """Greedy longest-match scan; matched spans never overlap."""
    out: list[NormInstance] = []
    limit = model.max_surface_len()
    i = 0
    n = len(chars)
    while i < n:
        hit = None
        for length in range(min(limit, n - i), 0, -1):
            surface = chars[i:i + length]
            entry = model.entries.get(surface)
            if entry is not None:
                hit = (length, entry.form)
                break
        if hit is None:
            i += 1
        else:
            out.append(NormInstance(i, i + hit[0], hit[1]))
            i += hit[0]
    return out


def save_dict_model(model: DictModel, path: str | Path) -> None:
    obj = {"entries": {s: {"form": e.form, "freq": e.freq} for s, e in sorted(model.entries.items())},
           "built_from": model.built_from}
    Path(path).write_text(json.dumps(obj, ensure_ascii=False, indent=2), encoding="utf-8")


def load_dict_model(path: str | Path) -> DictModel:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = {s: DictEntry(str(e["form"]), int(e["freq"])) for s, e in obj["entries"].items()}
    return DictModel(entries, built_from=str(obj.get("built_from", "")))


# --- gold echo ----------------------------------------------------------------

class GoldEchoBackend(Backend):
    """Oracle test double: answers every request from the gold annotation.

    Lets a full pipeline run be verified without any model; a correct
    pipeline scores perfectly against the same gold file.
    """

    capabilities = frozenset({DETECT, INFILL, GENERATE})

    def __init__(self, sentences: Sequence[SentenceAnnotation]):
        self._by_id = {s.id: s for s in sentences}

    def _sent(self, sent_id: str) -> SentenceAnnotation:
        sent = self._by_id.get(sent_id)
        if sent is None:
            raise BackendError(f"unknown sentence id {sent_id!r}")
        return sent

    def detect(self, sent_id: str, chars: str) -> tuple[list[str], list[int]]:
        enc = tagging.encode_detection(self._sent(sent_id), tagging.PART_SEG)
        return list(enc.tags), list(enc.lengths)

    def infill(self, sent_id: str, masked: MaskedInput) -> list[str]:
        sent = self._sent(sent_id)
        if len(masked.mask_slots) != len(sent.gold):
            raise BackendError(
                f"{sent_id}: {len(masked.mask_slots)} chunks but {len(sent.gold)} gold instances")
        return [g.first_form for g in sent.gold]

    def generate(self, sent_id: str, prompt: str, max_new_tokens: int) -> str:
        sent = self._sent(sent_id)
        return genformat.render_target(sent, sniff_approach(prompt))


def sniff_approach(prompt: str) -> str:
    """Identify which instruction a prompt carries by its distinctive text."""
    if f'output exactly "{genformat.NONE_OUTPUT}"' in prompt:
        return genformat.SPAN
    if genformat.BLOCK_OPEN in prompt:
        return genformat.STRUCT
    return genformat.PLAIN


# --- wire protocol client -------------------------------------------------------

def masked_to_wire(masked: MaskedInput) -> tuple[list[dict], list[list[int]]]:
    pieces = []
    for piece in masked.pieces:
        if piece.kind == PIECE_CHAR:
            pieces.append({"t": "c", "v": piece.char})
        elif piece.kind == PIECE_MASK:
            pieces.append({"t": "mask"})
        elif piece.kind == PIECE_SEP:
            pieces.append({"t": "sep"})
        else:
            raise BridgeSchemaError(f"unknown piece kind {piece.kind!r}")
    return pieces, [list(slot) for slot in masked.mask_slots]


class _HttpTransport:
    def __init__(self, url: str, timeout: float):
        if urllib.parse.urlsplit(url).path in ("", "/"):
            url = url.rstrip("/") + "/v1/op"
        self.url = url
        self.timeout = timeout

    def send(self, request: dict) -> dict:
        data = json.dumps(request, ensure_ascii=False).encode("utf-8")
        req = urllib.request.Request(
            self.url, data=data, headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = resp.read()
        except (urllib.error.URLError, OSError) as exc:
            raise BridgeTransportError(f"bridge request failed: {exc}") from None
        try:
            return json.loads(body)
        except json.JSONDecodeError as exc:
            raise BridgeSchemaError(f"bridge sent invalid JSON: {exc}") from None

    def close(self) -> None:
        pass


class _StdioTransport:
    def __init__(self, argv: list[str]):
        try:
            self.proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
        except OSError as exc:
            raise BridgeTransportError(f"cannot start bridge process: {exc}") from None

    def send(self, request: dict) -> dict:
        if self.proc.poll() is not None:
            raise BridgeTransportError("bridge process has exited")
        try:
            self.proc.stdin.write(json.dumps(request, ensure_ascii=False) + "\n")
            self.proc.stdin.flush()
            line = self.proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeTransportError(f"bridge stream broke: {exc}") from None
        if not line:
            raise BridgeTransportError("bridge closed the stream")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeSchemaError(f"bridge sent invalid JSON: {exc}") from None

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()


def _open_transport(endpoint: str, timeout: float):
    if endpoint.startswith(("http://", "https://")):
        return _HttpTransport(endpoint, timeout)
    if endpoint.startswith("stdio:"):
        return _StdioTransport(shlex.split(endpoint[len("stdio:"):]))
    raise BridgeTransportError(
        f"endpoint {endpoint!r} must start with http://, https://, or stdio:")


def validate_response(request: dict, response: dict) -> dict:
    """Reject any bridge reply that does not match the wire schema."""
    if not isinstance(response, dict):
        raise BridgeSchemaError(f"response is not an object: {response!r}")
    if "error" in response:
        raise BridgeServerError(str(response["error"]))
    if response.get("id") != request.get("id"):
        raise BridgeSchemaError(
            f"response id {response.get('id')!r} does not match request id {request.get('id')!r}")
    op = request["op"]
    if op == "detect":
        tags = response.get("tags")
        lengths = response.get("lengths")
        n = len(request["chars"])
        if (not isinstance(tags, list) or not isinstance(lengths, list)
                or len(tags) != n or len(lengths) != n
                or not all(isinstance(t, str) for t in tags)
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in lengths)):
            raise BridgeSchemaError(f"detect reply must carry {n} string tags and {n} integer lengths")
    elif op == "infill":
        fills = response.get("fills")
        want = len(request["chunks"])
        if not isinstance(fills, list) or len(fills) != want \
                or not all(isinstance(f, str) for f in fills):
            raise BridgeSchemaError(f"infill reply must carry exactly {want} fill strings")
    elif op == "generate":
        if not isinstance(response.get("text"), str):
            raise BridgeSchemaError("generate reply must carry a 'text' string")
    elif op == "hello":
        caps = response.get("capabilities")
        if not isinstance(caps, list) or not all(isinstance(c, str) for c in caps):
            raise BridgeSchemaError("hello reply must carry a list of capability strings")
    return response


def bridge_call(endpoint: str, request: dict, timeout: float = 60.0) -> dict:
    """One-shot request against an endpoint, response validated."""
    transport = _open_transport(endpoint, timeout)
    try:
        return validate_response(request, transport.send(request))
    finally:
        transport.close()


class BridgeBackend(Backend):
    """Client for a running bridge server.

    One instance holds one connection; :meth:`for_worker` opens another so
    worker pools never share a stream.
    """

    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self._transport = _open_transport(endpoint, timeout)
        self.capabilities = frozenset(self.hello())

    def _call(self, request: dict) -> dict:
        return validate_response(request, self._transport.send(request))

    def hello(self) -> list[str]:
        reply = self._call({"op": "hello", "id": "hello"})
        return list(reply["capabilities"])

    def detect(self, sent_id: str, chars: str) -> tuple[list[str], list[int]]:
        reply = self._call({"op": "detect", "id": sent_id, "chars": list(chars)})
        return list(reply["tags"]), list(reply["lengths"])

    def infill(self, sent_id: str, masked: MaskedInput) -> list[str]:
        pieces, chunks = masked_to_wire(masked)
        reply = self._call({"op": "infill", "id": sent_id, "pieces": pieces, "chunks": chunks})
        return list(reply["fills"])

    def generate(self, sent_id: str, prompt: str, max_new_tokens: int) -> str:
        reply = self._call({"op": "generate", "id": sent_id, "prompt": prompt,
                            "max_new_tokens": max_new_tokens})
        return reply["text"]

    def for_worker(self) -> "BridgeBackend":
        return BridgeBackend(self.endpoint, self.timeout)

    def close(self) -> None:
        self._transport.close()
