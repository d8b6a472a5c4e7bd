"""Command-line entry points.

Machine-readable results go to stdout (JSON by default, CSV via
``--format csv``); diagnostics go to stderr. Exit codes: 0 success,
1 usage error, 2 data error. The warehouse path defaults to the
``SAFETYCUBE_WAREHOUSE`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import Config, DEFAULT_CONFIG
from .cube import CellRef, CubeQuery, QueryError, StaleCellError
from .dsl import parse_script, run_script
from .features import FeatureExtractionError, SceneValidationError, extract_features
from .predictors import (
    ConstantVelocityPredictor,
    Hyperparams,
    TrainingError,
    load_predictor,
    train_predictor,
)
from .reports import ReportError, report_scenario1, report_scenario2
from .synthetic import generate_corpus, load_corpus_spec
from .warehouse import (
    Warehouse,
    WarehouseError,
    bundled_data_path,
    export_result,
    load_scene_file,
)

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    p = _Parser(prog="safetycube", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(sp):
        sp.add_argument(
            "--warehouse",
            default=os.environ.get("SAFETYCUBE_WAREHOUSE"),
            help="warehouse root (default: $SAFETYCUBE_WAREHOUSE)",
        )
        sp.add_argument("--config", help="config file (TOML or JSON)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("ingest", help="ingest scene JSONL files into a warehouse")
    add_common(sp)
    sp.add_argument("--sites", help="sites.json to install on first init")
    sp.add_argument("files", nargs="+", help="scene JSONL files")

    sp = sub.add_parser("extract", help="extract features and write facts")
    add_common(sp)
    sp.add_argument("--predictor", help="serialized predictor file (default: constant velocity)")

    sp = sub.add_parser("train-predictor", help="train a trajectory predictor")
    add_common(sp)
    sp.add_argument("--kind", choices=("constant_velocity", "lstm"), default="lstm")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--out", help="output path (default: <warehouse>/predictors/<kind>.json)")

    sp = sub.add_parser("query", help="run an OLAP script or a JSON query")
    add_common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--script", help="OLAP script file")
    g.add_argument("--query", help="CubeQuery JSON (inline or @file)")
    sp.add_argument("--lazy", action="store_true", help="bypass the materialized cuboid")

    sp = sub.add_parser("drill-through", help="list scene codes behind a grid cell")
    add_common(sp)
    sp.add_argument("--cell", required=True, help="CellRef JSON (inline or @file)")

    sp = sub.add_parser("report", help="run a scripted scenario report")
    add_common(sp)
    sp.add_argument("--scenario", type=int, choices=(1, 2), required=True)

    sp = sub.add_parser("generate", help="generate a synthetic corpus from a spec")
    add_common(sp)
    sp.add_argument("--spec", help="corpus spec JSON (default: bundled scenario corpus)")
    sp.add_argument("--out", required=True, help="output scene JSONL path")
    sp.add_argument("--seed", type=int, help="override the spec's seed")
    sp.add_argument("--n", type=int, help="override the spec's corpus size")

    sp = sub.add_parser("serve", help="serve the read-only HTTP JSON API")
    add_common(sp)
    sp.add_argument("--listen", default="127.0.0.1:8765", help="host:port")
    sp.add_argument("--ui", help="built explorer directory to serve at /ui (optional)")
    return p


def _warehouse(args) -> Warehouse:
    if not args.warehouse:
        raise WarehouseError(
            "no warehouse given: pass --warehouse or set SAFETYCUBE_WAREHOUSE"
        )
    return Warehouse(args.warehouse)


def _config(args, wh: Warehouse | None) -> Config:
    if args.config:
        return Config.from_file(args.config)
    if wh is not None:
        return wh.load_config()
    return DEFAULT_CONFIG


def _json_arg(value: str) -> dict:
    if value.startswith("@"):
        return json.loads(Path(value[1:]).read_text())
    return json.loads(value)


def _emit(obj, fmt: str = "json") -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        raise QueryError("CSV output is only available for grid results")


def _emit_grid(grid, fmt: str) -> None:
    data = export_result(grid, fmt)
    sys.stdout.buffer.write(data)
    if fmt == "json":
        sys.stdout.buffer.write(b"\n")
    sys.stdout.buffer.flush()


# ---------------------------------------------------------------------------
# commands


def _cmd_ingest(args) -> int:
    wh = _warehouse(args)
    wh.init(sites_source=args.sites)
    total = 0
    for f in args.files:
        scenes = load_scene_file(f)
        added = wh.ingest_scenes(scenes)
        print(f"{f}: {len(scenes)} scenes, {added} new", file=sys.stderr)
        total += added
    _emit({"ingested": total, "stored_scenes": len(wh.load_scenes())}, args.format)
    return 0


def _cmd_extract(args) -> int:
    wh = _warehouse(args)
    wh.check()
    config = _config(args, wh)
    sites = wh.load_sites()
    predictor = load_predictor(args.predictor) if args.predictor else ConstantVelocityPredictor(
        window=config.state_window
    )
    records = []
    for scene in wh.load_scenes():
        if scene.spot_id not in sites:
            raise WarehouseError(f"scene {scene.scene_code!r}: unknown spot {scene.spot_id!r}")
        meta, geom = sites[scene.spot_id]
        records.append(extract_features(scene, geom, meta, config, predictor))
    wh.write_features(records)
    facts_added = wh.write_facts(records)
    _emit({"extracted": len(records), "facts_added": facts_added}, args.format)
    return 0


def _cmd_train(args) -> int:
    wh = _warehouse(args)
    wh.check()
    config = _config(args, wh)
    hyper = Hyperparams.from_config(config, kind=args.kind)
    if args.epochs:
        import dataclasses

        hyper = dataclasses.replace(hyper, epochs=args.epochs)
    scenes = wh.load_scenes()
    dataset = [tr for s in scenes for tr in s.tracks]
    predictor = train_predictor(dataset, hyper, seed=args.seed)
    out = Path(args.out) if args.out else wh.predictors_dir / f"{args.kind}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    predictor.save(out)
    losses = getattr(predictor, "loss_history", [])
    _emit(
        {
            "kind": args.kind,
            "path": str(out),
            "initial_loss": losses[0] if losses else None,
            "final_loss": losses[-1] if losses else None,
        },
        args.format,
    )
    return 0


def _cmd_query(args) -> int:
    wh = _warehouse(args)
    wh.check()
    cube = wh.build_cube(_config(args, wh), materialize=not args.lazy)
    if args.script:
        result = run_script(parse_script(Path(args.script).read_text()), cube)
        grid = result.grid
    else:
        q = CubeQuery.from_dict(_json_arg(args.query))
        grid = cube.aggregate(q, use_materialized=False if args.lazy else None)
    _emit_grid(grid, args.format)
    return 0


def _cmd_drill_through(args) -> int:
    wh = _warehouse(args)
    wh.check()
    cube = wh.build_cube(_config(args, wh))
    cell = CellRef.from_dict(_json_arg(args.cell))
    codes = cube.drill_through(cell)
    _emit({"scene_codes": codes, "count": len(codes)}, args.format)
    return 0


def _cmd_report(args) -> int:
    wh = _warehouse(args)
    wh.check()
    config = _config(args, wh)
    bundle = report_scenario1(wh, config) if args.scenario == 1 else report_scenario2(wh, config)
    _emit(bundle, args.format)
    return 0


def _cmd_generate(args) -> int:
    spec_path = Path(args.spec) if args.spec else bundled_data_path("scenario_corpus.json")
    doc = json.loads(spec_path.read_text())
    components = load_corpus_spec(spec_path)
    n = args.n or int(doc["n"])
    seed = args.seed if args.seed is not None else int(doc["seed"])
    sites_path = None
    if args.warehouse and (Path(args.warehouse) / "sites.json").exists():
        sites_path = Path(args.warehouse) / "sites.json"
    from .warehouse import load_site_metadata, write_scene_file

    sites = load_site_metadata(sites_path)
    geometries = {spot: geom for spot, (meta, geom) in sites.items()}
    scenes = generate_corpus(components, n, seed, geometries)
    write_scene_file(args.out, scenes)
    _emit({"generated": len(scenes), "out": args.out, "seed": seed}, args.format)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    wh = _warehouse(args)
    wh.check()
    host, _, port = args.listen.partition(":")
    app = create_app(wh.root, _config(args, wh), ui_dir=args.ui)
    print(f"serving warehouse {wh.root} on http://{args.listen}", file=sys.stderr)
    if args.ui:
        print(f"explorer at http://{args.listen}/ui/", file=sys.stderr)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8765), log_level="warning")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "extract": _cmd_extract,
    "train-predictor": _cmd_train,
    "query": _cmd_query,
    "drill-through": _cmd_drill_through,
    "report": _cmd_report,
    "generate": _cmd_generate,
    "serve": _cmd_serve,
}

_DATA_ERRORS = (
    WarehouseError,
    QueryError,
    StaleCellError,
    ReportError,
    TrainingError,
    SceneValidationError,
    FeatureExtractionError,
    FileNotFoundError,
    json.JSONDecodeError,
    ValueError,
)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _DATA_ERRORS as e:
        print(f"safetycube {args.command}: error: {e}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
