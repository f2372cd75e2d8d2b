"""Command-line interface: ``figpipe render ...``.

Exit codes: 0 success, 1 bad arguments or schema violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import SchemaError
from .render import FigureSpec, render_figure


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="figpipe",
                description="Render figures from kicked-ring simulation CSVs.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="four-panel divergence figure")
    r.add_argument("--series", required=True, metavar="FILE")
    r.add_argument("--snap-early", required=True, metavar="FILE,FILE",
                   help="density pair at the earlier kick")
    r.add_argument("--snap-late", required=True, metavar="FILE,FILE",
                   help="density pair at the later kick")
    r.add_argument("--out", required=True, metavar="FILE")
    r.add_argument("--log-y", action="store_true", dest="log_y")
    return p


def _pair(text: str) -> tuple[Path, Path]:
    parts = [Path(t) for t in text.split(",") if t]
    if len(parts) != 2:
        raise SchemaError(f"expected two comma-separated files, got {text!r}")
    return parts[0], parts[1]


def cli_main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        early = _pair(args.snap_early)
        late = _pair(args.snap_late)
        spec = FigureSpec(
            series_csv=Path(args.series),
            snapshot_paths=(early[0], early[1], late[0], late[1]),
            output_image=Path(args.out),
            log_y=args.log_y,
        )
        out = render_figure(spec)
    except (SchemaError, OSError) as err:
        print(f"figpipe: {err}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
