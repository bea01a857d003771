"""Command line entry points: train a job spec, serve a checkpoint.

Exit codes: 0 on success, 1 on runtime failure (unreadable inputs,
bad checkpoints, diverged training), 64 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .config import load_job_spec
from .errors import ModelServerError
from .server import serve_checkpoint
from .train import train


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(64, f"{self.prog}: error: {message}\n")


def cmd_train(args) -> int:
    spec = load_job_spec(args.config)
    result = train(spec, args.outdir)
    print(f"checkpoint: {result.checkpoint}")
    print(f"curve: {result.curve}")
    print(f"final loss: {result.final_loss!r}")
    return 0


def cmd_serve(args) -> int:
    service = serve_checkpoint(args.checkpoint, host=args.host,
                               port=args.port)
    try:
        print(f"serving {service.kind} at {service.url}", flush=True)
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        return 0
    finally:
        service.close()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="model-server",
                     description="Train and serve imputation models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("train", help="train a model from a job spec file")
    p.add_argument("--config", required=True,
                   help="job spec file (.json, .yaml, or .yml)")
    p.add_argument("--outdir", default="model_out",
                   help="where to write checkpoint.pt and "
                        "training_curve.csv")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="serve a trained checkpoint over HTTP")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0,
                   help="0 picks a free port")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 64
    try:
        return args.func(args)
    except ModelServerError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
