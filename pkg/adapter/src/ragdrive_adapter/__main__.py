"""Run the adapter: `python -m ragdrive_adapter --port 8900`."""

from __future__ import annotations

import argparse

import uvicorn

from .config import AdapterConfig
from .service import create_app


def main() -> None:
    parser = argparse.ArgumentParser(prog="ragdrive-adapter")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8900)
    parser.add_argument("--embed-model", help="hash-v1 or a model id")
    parser.add_argument("--chat-model", help="echo-v1 or a model id")
    parser.add_argument("--device")
    parser.add_argument("--embed-dim", type=int)
    args = parser.parse_args()

    cfg = AdapterConfig.from_env()
    overrides = {
        name: getattr(args, name)
        for name in ("embed_model", "chat_model", "device", "embed_dim")
        if getattr(args, name) is not None
    }
    if overrides:
        import dataclasses

        cfg = dataclasses.replace(cfg, **overrides)

    uvicorn.run(create_app(cfg), host=args.host, port=args.port, log_level="info")


if __name__ == "__main__":
    main()
