"""Command-line entry: ``quenchfigs render --spec PATH``.

The spec file is JSON: {"kind": ..., "csv_paths": [...], "output": ...,
"style": {...}}.  Exits nonzero on schema mismatch, leaving no output
file behind.
"""

import argparse
import json
import sys

from .csvio import EmptyData, MissingColumn
from .figures import render


def main(argv=None):
    parser = argparse.ArgumentParser(prog="quenchfigs")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render")
    p_render.add_argument("--spec", required=True)
    args = parser.parse_args(argv)

    try:
        with open(args.spec) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read spec: {exc}", file=sys.stderr)
        return 1
    try:
        meta = render(spec)
    except (MissingColumn, EmptyData, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(meta))
    return 0


if __name__ == "__main__":
    sys.exit(main())
