"""Command-line interface.

    fsolink run --config low.json [--seed N] [--out DIR]
    fsolink serve --config low.json --listen 127.0.0.1:8080 [--ui DIR]
    fsolink scenarios [--write DIR]
    fsolink make-source --out DIR [--frames N --width W --height H]

Exit codes: 0 success, 1 validation/usage error, 2 I/O error.
"""

import argparse
import dataclasses
import json
import sys

from . import config as cfgmod
from .video import make_gradient_frames, save_frame_sequence

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def build_parser() -> _Parser:
    parser = _Parser(prog="fsolink", description="Free-space optical link emulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_p = sub.add_parser("run", help="run a scenario to completion (batch)")
    run_p.add_argument("--config", required=True, help="scenario JSON file")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--out", default=None, help="output directory for report and frames")
    run_p.add_argument("--table-cache", default=None, help="directory for cached quantile tables")

    serve_p = sub.add_parser("serve", help="run live with the HTTP/WebSocket control endpoint")
    serve_p.add_argument("--config", required=True)
    serve_p.add_argument("--listen", default="127.0.0.1:8080", help="host:port (port 0 = ephemeral)")
    serve_p.add_argument("--ui", default=None, help="serve a built dashboard from this directory at /ui")
    serve_p.add_argument("--table-cache", default=None)

    scen_p = sub.add_parser("scenarios", help="print the two canonical channel-emulator scenarios")
    scen_p.add_argument("--write", default=None, help="also write low.json/high.json to this directory")

    src_p = sub.add_parser("make-source", help="generate a deterministic PGM test source")
    src_p.add_argument("--out", required=True, help="output directory")
    src_p.add_argument("--frames", type=int, default=600)
    src_p.add_argument("--width", type=int, default=cfgmod.DESK_WIDTH)
    src_p.add_argument("--height", type=int, default=cfgmod.DESK_HEIGHT)

    return parser


def _load_config(path, seed_override=None):
    try:
        cfg = cfgmod.load_config(path)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    if seed_override is not None:
        try:
            cfg = dataclasses.replace(cfg, seed=seed_override)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            raise SystemExit(EXIT_VALIDATION)
    return cfg


def cmd_run(args) -> int:
    from .runtime import run_scenario

    cfg = _load_config(args.config, args.seed)
    try:
        engine = run_scenario(cfg, out_dir=args.out, table_cache_dir=args.table_cache)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps({"summary": engine.summary}, indent=2))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .control import serve_control
    from .runtime import LinkEngine

    cfg = _load_config(args.config)
    host, _, port_s = args.listen.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_s)
    except ValueError:
        print(f"error: bad --listen address {args.listen!r}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        engine = LinkEngine(cfg, table_cache_dir=args.table_cache)
        return serve_control(engine, host, port, ui_dir=args.ui)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def cmd_scenarios(args) -> int:
    import os

    out = {}
    for name in ("low", "high"):
        cfg = cfgmod.canonical_scenario(name)
        out[name] = cfg.to_dict()
        print(f"--- {name}: cn2={cfg.channel.cn2:g} m^-2/3, wind {cfg.channel.wind_speed:g} m/s ---")
        print(cfg.to_json())
    if args.write:
        try:
            os.makedirs(args.write, exist_ok=True)
            for name, data in out.items():
                with open(os.path.join(args.write, f"{name}.json"), "w", encoding="utf-8") as fh:
                    json.dump(data, fh, indent=2)
                    fh.write("\n")
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


def cmd_make_source(args) -> int:
    if args.frames < 1 or args.width < 1 or args.height < 1:
        print("error: frames, width and height must be positive", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        frames = make_gradient_frames(args.frames, args.width, args.height)
        save_frame_sequence(args.out, frames)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {args.frames} frames ({args.width}x{args.height}) to {args.out}")
    return EXIT_OK


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "run": cmd_run,
        "serve": cmd_serve,
        "scenarios": cmd_scenarios,
        "make-source": cmd_make_source,
    }
    try:
        return handlers[args.command](args)
    except SystemExit as exc:
        return int(exc.code or 0)


def main() -> None:
    sys.exit(cli_main())
