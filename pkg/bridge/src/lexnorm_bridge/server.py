"""Transports: newline-delimited JSON over stdio, or HTTP POST /v1/op.

Both transports funnel every request through the same dispatch; a request
that cannot be served produces an error reply on the same connection, so a
misbehaving client can never take the server down.
"""

from __future__ import annotations

import json
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .protocol import Responder, handle_line


def serve_stdio(responder: Responder, stdin=None, stdout=None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        reply = handle_line(line, responder)
        stdout.write(json.dumps(reply, ensure_ascii=False) + "\n")
        stdout.flush()


class _OpHandler(BaseHTTPRequestHandler):
    responder: Responder = None  # set by make_http_server

    def do_POST(self):
        if self.path not in ("/v1/op", "/"):
            self.send_error(404)
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = self.rfile.read(length).decode("utf-8")
        except (TypeError, ValueError, UnicodeDecodeError):
            body = ""
        reply = handle_line(body, self.responder)
        data = json.dumps(reply, ensure_ascii=False).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):  # keep the protocol channel quiet
        pass


def make_http_server(responder: Responder, host: str = "127.0.0.1",
                     port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundOpHandler", (_OpHandler,), {"responder": responder})
    return ThreadingHTTPServer((host, port), handler)


def serve_http(responder: Responder, host: str, port: int,
               announce=None) -> None:
    server = make_http_server(responder, host, port)
    if announce is not None:
        announce(server.server_address)
    try:
        server.serve_forever()
    finally:
        server.server_close()
