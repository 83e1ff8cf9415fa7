"""CLI: convert public MAT-file datasets, verify converted output."""

import argparse
import json
import sys

from .convert import ConvertError, convert, verify_roundtrip
from .recipes import recipe_for


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssvep-convert",
        description="Convert public SSVEP MAT datasets to manifest + flat binary")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert a dataset directory")
    p.add_argument("--dataset", required=True, choices=("ucsd", "benchmark", "beta"))
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("verify", help="round-trip check converted output")
    p.add_argument("--out", required=True, help="converted dataset directory")
    p.add_argument("--dataset", choices=("ucsd", "benchmark", "beta"),
                   help="enable source spot-checks (with --in)")
    p.add_argument("--in", dest="in_dir", help="original source directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)
    return parser


def _cmd_convert(args) -> int:
    recipe = recipe_for(args.dataset)
    manifest = convert(recipe, args.in_dir, args.out)
    print(f"converted {len(manifest['subjects'])} subjects "
          f"({len(manifest['stimuli'])} stimuli, "
          f"{manifest['blocks_per_subject']} blocks) -> {args.out}")
    return 0


def _cmd_verify(args) -> int:
    recipe = recipe_for(args.dataset) if args.dataset else None
    source_dir = args.in_dir if args.in_dir and recipe else None
    report = verify_roundtrip(args.out, source_dir=source_dir, recipe=recipe,
                              seed=args.seed)
    print(report)
    if not report.passed:
        print(json.dumps({"error": "verification-failure",
                          "detail": f"{len(report.issues)} issue(s)"}),
              file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvertError as exc:
        print(json.dumps({"error": exc.code, "detail": str(exc)}), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": "internal", "detail": repr(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
