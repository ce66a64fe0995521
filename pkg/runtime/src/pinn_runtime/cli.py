"""Command line: render a bundle, execute a rendered tree."""

from __future__ import annotations

import argparse
import sys

from .execute import RuntimeFailure, execute
from .render import ManifestInvalid, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pinn-runtime")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render a bundle directory into a script tree")
    p.add_argument("bundle_dir")
    p.add_argument("out_dir")

    p = sub.add_parser("execute", help="run a rendered tree and write its trace")
    p.add_argument("tree_dir")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", default="trace.jsonl")

    args = parser.parse_args(argv)
    try:
        if args.command == "render":
            print(render(args.bundle_dir, args.out_dir))
        else:
            print(execute(args.tree_dir, args.steps, args.out))
    except ManifestInvalid as err:
        print(f"manifest invalid: {err}", file=sys.stderr)
        return 1
    except RuntimeFailure as err:
        print(err.diagnostic, file=sys.stderr)
        return err.returncode or 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
