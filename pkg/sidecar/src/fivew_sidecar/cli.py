"""Command-line entry point: load a server config and serve.

Config file (JSON)::

    {
      "queue_depth": 32,
      "bindings": [
        {"role": "qa", "model_id": "echo", "device": "cpu", "max_batch": 8},
        {"role": "nli", "model_id": "echo"}
      ]
    }

Roles left out of the binding list answer 503.  With no --config at all the
server comes up with echo bindings on every role, which needs no model
weights and is what integration tests run against.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .bindings import ModelBinding, default_bindings
from .service import DEFAULT_QUEUE_DEPTH, create_app

log = logging.getLogger(__name__)

_BINDING_KEYS = {"role", "model_id", "device", "max_batch"}


class ServerConfigError(ValueError):
    """The server config file could not be used."""


@dataclass(frozen=True)
class ServerConfig:
    bindings: list[ModelBinding] = field(default_factory=default_bindings)
    queue_depth: int = DEFAULT_QUEUE_DEPTH


def parse_server_config(text: str) -> ServerConfig:
    try:
        raw = json.loads(text)
    except ValueError as exc:
        raise ServerConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ServerConfigError("config root must be an object")
    unknown = set(raw) - {"bindings", "queue_depth"}
    if unknown:
        raise ServerConfigError(f"unknown config fields: {sorted(unknown)}")

    queue_depth = raw.get("queue_depth", DEFAULT_QUEUE_DEPTH)
    if not isinstance(queue_depth, int) or isinstance(queue_depth, bool) or queue_depth < 0:
        raise ServerConfigError("queue_depth must be a non-negative integer")

    raw_bindings = raw.get("bindings")
    if raw_bindings is None:
        return ServerConfig(queue_depth=queue_depth)
    if not isinstance(raw_bindings, list):
        raise ServerConfigError("bindings must be a list")
    bindings = []
    for i, item in enumerate(raw_bindings):
        if not isinstance(item, dict):
            raise ServerConfigError(f"binding {i} must be an object")
        extra = set(item) - _BINDING_KEYS
        if extra:
            raise ServerConfigError(f"binding {i} has unknown fields: {sorted(extra)}")
        if "role" not in item or "model_id" not in item:
            raise ServerConfigError(f"binding {i} needs 'role' and 'model_id'")
        try:
            bindings.append(ModelBinding(**item))
        except (TypeError, ValueError) as exc:
            raise ServerConfigError(f"binding {i} is invalid: {exc}") from exc
    return ServerConfig(bindings=bindings, queue_depth=queue_depth)


def load_server_config(path: Path) -> ServerConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ServerConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_server_config(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fivew-sidecar",
        description="Serve model roles over HTTP for the fivew pipeline.",
    )
    parser.add_argument("--config", type=Path, default=None, help="server config JSON")
    parser.add_argument("--host", default="127.0.0.1", help="bind address")
    parser.add_argument("--port", type=int, default=8100, help="bind port")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_server_config(args.config) if args.config else ServerConfig()
    except ServerConfigError as exc:
        log.error("%s", exc)
        return 2
    try:
        app = create_app(config.bindings, queue_depth=config.queue_depth)
    except ValueError as exc:
        log.error("%s", exc)
        return 2

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
