"""Request dispatch for the wire protocol.

Every reply is a single JSON object.  Application-level problems (unknown
op, missing fields, responder errors) come back as ``{"id", "error"}``
replies; they never terminate the connection.
"""

from __future__ import annotations

import json
from typing import Protocol


class Responder(Protocol):
    def capabilities(self) -> list[str]: ...

    def detect(self, sent_id: str, chars: list[str]) -> tuple[list[str], list[int]]: ...

    def infill(self, sent_id: str, pieces: list[dict], chunks: list[list[int]]) -> list[str]: ...

    def generate(self, sent_id: str, prompt: str, max_new_tokens: int) -> str: ...


def _error(rid, message: str) -> dict:
    return {"id": rid, "error": message}


def handle_request(req: object, responder: Responder) -> dict:
    if not isinstance(req, dict):
        return _error(None, "request must be a JSON object")
    rid = req.get("id")
    op = req.get("op")
    try:
        if op == "hello":
            return {"id": rid, "capabilities": responder.capabilities()}
        if op == "detect":
            chars = req["chars"]
            if not isinstance(chars, list) or not all(isinstance(c, str) for c in chars):
                return _error(rid, "'chars' must be a list of strings")
            if "detect" not in responder.capabilities():
                return _error(rid, "detect not supported by this server")
            tags, lengths = responder.detect(str(rid), chars)
            return {"id": rid, "tags": tags, "lengths": lengths}
        if op == "infill":
            pieces = req["pieces"]
            chunks = req["chunks"]
            if not isinstance(pieces, list) or not isinstance(chunks, list):
                return _error(rid, "'pieces' and 'chunks' must be lists")
            if "infill" not in responder.capabilities():
                return _error(rid, "infill not supported by this server")
            fills = responder.infill(str(rid), pieces, chunks)
            return {"id": rid, "fills": fills}
        if op == "generate":
            prompt = req["prompt"]
            if not isinstance(prompt, str):
                return _error(rid, "'prompt' must be a string")
            if "generate" not in responder.capabilities():
                return _error(rid, "generate not supported by this server")
            max_new = req.get("max_new_tokens", 256)
            if not isinstance(max_new, int) or max_new < 1:
                return _error(rid, "'max_new_tokens' must be a positive integer")
            text = responder.generate(str(rid), prompt, max_new)
            return {"id": rid, "text": text}
        return _error(rid, f"unknown op {op!r}")
    except KeyError as exc:
        return _error(rid, f"missing field {exc}")
    except Exception as exc:  # per-request failure, connection survives
        return _error(rid, str(exc))


def handle_line(line: str, responder: Responder) -> dict:
    try:
        req = json.loads(line)
    except json.JSONDecodeError as exc:
        return _error(None, f"malformed JSON: {exc.msg}")
    return handle_request(req, responder)
