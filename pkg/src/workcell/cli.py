"""Command line entry points: serve a live cell or replay a scenario."""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from workcell.cell import Workcell, WorkcellConfig
from workcell.errors import ScriptStuck
from workcell.harness import ScenarioRunner, load_scenario, render_trace


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="workcell",
                                     description="worker-robot cooperative workcell")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="boot the cell and the operator gateway")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--bridge-ports", default="10002,10005,10011",
                       help="record,execute,display bridge ports")
    serve.add_argument("--data-dir", default="./workcell-data")
    serve.add_argument("--tcp", action="store_true",
                       help="run worker and robot platforms over TCP")
    serve.add_argument("--ui", default=None, help="static UI directory to mount")
    clock = serve.add_mutually_exclusive_group()
    clock.add_argument("--real-time", dest="realtime", action="store_true", default=True)
    clock.add_argument("--fast-clock", dest="realtime", action="store_false")

    run = sub.add_parser("run-scenario", help="replay a scenario file deterministically")
    run.add_argument("scenario", help="scenario file path")
    run.add_argument("--tcp", action="store_true",
                     help="two-platform mode over loopback TCP")
    run.add_argument("--trace-out", default=None, help="write the rendered trace here")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "serve":
        return _serve(args)
    return _run_scenario(args)


def _serve(args) -> int:
    import uvicorn

    from workcell.gateway import create_app

    record, execute, display = (int(p) for p in args.bridge_ports.split(","))
    config = WorkcellConfig(Path(args.data_dir), realtime=args.realtime,
                            two_platform=args.tcp, record_port=record,
                            execute_port=execute, display_port=display)
    cell = Workcell(config).boot()
    ui_dir = args.ui
    if ui_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(cell, static_dir=ui_dir)
    print(f"workcell gateway on http://{args.host}:{args.port} "
          f"(bridge {record}/{execute}/{display}, "
          f"{'tcp two-platform' if args.tcp else 'in-process'}, "
          f"{'real-time' if args.realtime else 'fast'} clock)")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        cell.shutdown()
    return 0


def _run_scenario(args) -> int:
    scenario = load_scenario(args.scenario)
    try:
        result = ScenarioRunner(scenario, two_platform=args.tcp).run()
    except ScriptStuck as exc:
        print(f"{scenario.name}: stuck - {exc}")
        return 2
    if args.trace_out:
        Path(args.trace_out).write_text(render_trace(result.records), encoding="utf-8")
    counts = Counter(r.message.performative.value for r in result.records)
    summary = " ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    print(f"{scenario.name}: {result.verdict} ({len(result.records)} messages: {summary})")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
