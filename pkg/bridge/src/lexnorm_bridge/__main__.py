"""Entry point: ``python -m lexnorm_bridge`` or the ``lexnorm-bridge`` script."""

from __future__ import annotations

import argparse
import json
import sys

from .echo import EchoResponder
from .models import ModelError, ModelResponder, ServerConfig
from .server import serve_http, serve_stdio


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexnorm-bridge",
        description="Reference server for the normalization wire protocol")
    parser.add_argument("--echo", metavar="GOLD_JSONL",
                        help="serve oracle answers derived from a gold annotation file")
    parser.add_argument("--tagger", help="token-classification model id for detect")
    parser.add_argument("--mlm", help="fill-mask model id for infill")
    parser.add_argument("--generator", help="text-generation model id for generate")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-new-tokens-cap", type=int, default=512)
    parser.add_argument("--http", type=int, metavar="PORT",
                        help="serve HTTP on this port (0 picks a free one); "
                             "default is newline-delimited JSON on stdio")
    parser.add_argument("--host", default="127.0.0.1")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.echo:
            responder = EchoResponder(args.echo)
            print(f"echo mode: {responder.sentence_count()} sentences loaded",
                  file=sys.stderr)
        else:
            config = ServerConfig(
                tagger=args.tagger, mlm=args.mlm, generator=args.generator,
                device=args.device, max_new_tokens_cap=args.max_new_tokens_cap)
            responder = ModelResponder(config)
        if args.http is not None:
            def announce(address):
                print(json.dumps({"listening": f"http://{address[0]}:{address[1]}/v1/op"}),
                      flush=True)
            serve_http(responder, args.host, args.http, announce=announce)
        else:
            serve_stdio(responder)
        return 0
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 0


if __name__ == "__main__":
    sys.exit(main())
