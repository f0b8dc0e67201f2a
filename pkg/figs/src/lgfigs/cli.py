import argparse
import sys

from .render import render_heatmap, render_sweep


def build_parser():
    parser = argparse.ArgumentParser(prog="lgfigs", description="Render lgpairs CSV outputs")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one CSV as an image")
    p.add_argument("--kind", choices=("heatmap", "sweep"), required=True)
    p.add_argument("--in", dest="input", required=True, help="input CSV path")
    p.add_argument("--out", dest="output", required=True, help="output image path")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    render = render_heatmap if args.kind == "heatmap" else render_sweep
    try:
        info = render(args.input, args.output)
    except (ValueError, OSError) as exc:
        print(f"lgfigs: {exc}", file=sys.stderr)
        return 1
    print(info["out"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
