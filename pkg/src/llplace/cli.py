"""Command-line entry points: generate, edit, build-dataset, eval, serve.

Exit codes: 0 success, 1 I/O or usage error, 2 retrieval failure,
3 backend transport failure, 4 generation/edit parse failure,
5 unknown removal target.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .catalog import DesignRequest, RequestItem, load_catalog_file
from .dataset import BuilderConfig, build_corpus
from .errors import (
    BackendError,
    CatalogLoadError,
    EditFailed,
    GenerationFailed,
    PlacementInfeasible,
    RetrievalError,
    UnknownTarget,
)
from .geometry import RoomBounds, layout_from_dict, layout_to_dict
from .metrics import evaluate_layout
from .prompts import EditKind, EditRequest, PromptTemplates, default_templates
from .errors import SessionPhaseError
from .session import (
    ENV_ENDPOINT,
    ENV_MODEL,
    BackendConfig,
    BackendKind,
    Phase,
    Session,
    create_session,
    default_bounds_for,
    run_edit,
    run_generation,
)
from .svg import RenderStyle, render_layout

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_RETRIEVAL = 2
EXIT_BACKEND = 3
EXIT_PARSE = 4
EXIT_UNKNOWN_TARGET = 5


def _load_templates(path: str | None) -> PromptTemplates:
    if path:
        return PromptTemplates.load(Path(path))
    return default_templates()


def _default_catalog_path() -> Path:
    return Path(str(resources.files("llplace") / "data" / "demo_catalog.jsonl"))


def _backend_config(args) -> BackendConfig:
    kind = BackendKind(args.backend)
    if kind is BackendKind.REPLAY:
        script = tuple(json.loads(Path(args.replay_script).read_text(encoding="utf-8")))
        return BackendConfig(kind=kind, replay_script=script, seed=args.seed)
    if kind is BackendKind.REMOTE:
        endpoint = args.endpoint or os.environ.get(ENV_ENDPOINT, "")
        model = args.model or os.environ.get(ENV_MODEL, "")
        return BackendConfig(kind=kind, endpoint=endpoint, model=model, seed=args.seed)
    return BackendConfig(kind=kind, seed=args.seed)


def _bounds_from(data: dict | None, room_type: str) -> RoomBounds:
    if data:
        return RoomBounds(float(data["half_x"]), float(data["half_z"]), float(data["height"]))
    return default_bounds_for(room_type)


def _request_from_file(path: str) -> tuple[DesignRequest, RoomBounds]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    request = DesignRequest(
        room_type=str(data["room_type"]),
        items=tuple(
            RequestItem(int(i.get("quantity", 1)), str(i["description"]))
            for i in data["items"]
        ),
    )
    return request, _bounds_from(data.get("bounds"), request.room_type)


def _write_json(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _session_snapshot(session: Session, backend_args: dict) -> dict:
    return {
        "request": {
            "room_type": session.request.room_type,
            "items": [
                {"quantity": i.quantity, "description": i.description}
                for i in session.request.items
            ],
        },
        "bounds": {
            "half_x": session.bounds.half_x,
            "half_z": session.bounds.half_z,
            "height": session.bounds.height,
        },
        "instances": [
            {
                "name": name,
                "record": {
                    "id": rec.id,
                    "description": rec.description,
                    "category": rec.category,
                    "bbox": {"h": rec.dims.h, "w": rec.dims.w, "d": rec.dims.d},
                    "path": rec.path,
                },
            }
            for name, rec in session.instances
        ],
        "history": [list(turn) for turn in session.history],
        "layout": layout_to_dict(session.layout) if session.layout else None,
        "phase": session.phase.value,
        "backend": backend_args,
    }


def _session_from_snapshot(data: dict, backend_config: BackendConfig,
                           templates: PromptTemplates) -> Session:
    from .catalog import AssetRecord
    from .geometry import BBoxDims
    from .session import build_backend

    request = DesignRequest(
        room_type=data["request"]["room_type"],
        items=tuple(
            RequestItem(int(i["quantity"]), i["description"])
            for i in data["request"]["items"]
        ),
    )
    bounds = RoomBounds(**data["bounds"])
    instances = [
        (
            entry["name"],
            AssetRecord(
                id=entry["record"]["id"],
                description=entry["record"]["description"],
                category=entry["record"]["category"],
                dims=BBoxDims(**entry["record"]["bbox"]),
                path=entry["record"]["path"],
            ),
        )
        for entry in data["instances"]
    ]
    session = Session(
        request=request,
        bounds=bounds,
        instances=instances,
        backend=build_backend(backend_config, bounds),
        templates=templates,
        max_history_chars=backend_config.max_history_chars,
        history=[tuple(t) for t in data["history"]],
        layout=layout_from_dict(data["layout"]) if data.get("layout") else None,
        phase=Phase(data["phase"]),
    )
    return session


def cmd_generate(args) -> int:
    try:
        request, bounds = _request_from_file(args.request)
        catalog = load_catalog_file(args.catalog or _default_catalog_path())
        templates = _load_templates(args.templates)
        backend_config = _backend_config(args)
    except (OSError, json.JSONDecodeError, CatalogLoadError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    try:
        session = create_session(request, catalog, backend_config, bounds, templates)
    except RetrievalError as exc:
        print(f"retrieval error: {exc}", file=sys.stderr)
        return EXIT_RETRIEVAL
    try:
        layout = run_generation(session)
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (GenerationFailed, PlacementInfeasible) as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_PARSE

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "layout.json", layout_to_dict(layout))
    _write_json(out_dir / "metrics.json", evaluate_layout(layout).to_dict())
    _write_json(
        out_dir / "session.json",
        _session_snapshot(session, {"backend": args.backend, "seed": args.seed}),
    )
    if args.svg:
        (out_dir / "layout.svg").write_text(render_layout(layout, RenderStyle()), encoding="utf-8")
    print(f"layout written to {out_dir / 'layout.json'}")
    return EXIT_OK


def cmd_edit(args) -> int:
    session_path = Path(args.session)
    try:
        data = json.loads(session_path.read_text(encoding="utf-8"))
        templates = _load_templates(args.templates)
        backend_config = _backend_config(args)
        catalog = load_catalog_file(args.catalog or _default_catalog_path())
        session = _session_from_snapshot(data, backend_config, templates)
    except (OSError, json.JSONDecodeError, CatalogLoadError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    try:
        if args.add:
            items = _items_from_file(args.add)
            edit = EditRequest(EditKind.ADD, tuple(items))
        else:
            items = _items_from_file(args.remove)
            edit = EditRequest(EditKind.REMOVE, tuple(items))
        layout = run_edit(session, edit, catalog)
    except SessionPhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RetrievalError as exc:
        print(f"retrieval error: {exc}", file=sys.stderr)
        return EXIT_RETRIEVAL
    except UnknownTarget as exc:
        print(f"unknown target: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_TARGET
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (EditFailed, PlacementInfeasible) as exc:
        print(f"edit failed: {exc}", file=sys.stderr)
        return EXIT_PARSE

    out_dir = session_path.parent
    _write_json(out_dir / "layout.json", layout_to_dict(layout))
    _write_json(out_dir / "metrics.json", evaluate_layout(layout).to_dict())
    _write_json(
        session_path, _session_snapshot(session, {"backend": args.backend, "seed": args.seed})
    )
    if args.svg:
        (out_dir / "layout.svg").write_text(render_layout(layout, RenderStyle()), encoding="utf-8")
    print(f"layout updated at {out_dir / 'layout.json'}")
    return EXIT_OK


def _items_from_file(path: str) -> list[RequestItem]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("items", [])
    items = []
    for entry in data:
        if isinstance(entry, str):
            items.append(RequestItem(1, entry))
        else:
            items.append(RequestItem(int(entry.get("quantity", 1)), str(entry["description"])))
    return items


def cmd_build_dataset(args) -> int:
    try:
        templates = _load_templates(args.templates)
        config = BuilderConfig(
            seed=args.seed,
            emit_add=not args.no_add,
            emit_remove=not args.no_remove,
        )
        with open(args.scenes, "r", encoding="utf-8") as handle:
            stats = build_corpus(handle, templates, config, Path(args.out))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(json.dumps(stats, indent=2))
    return EXIT_OK


def cmd_eval(args) -> int:
    paths: list[Path] = []
    for target in args.paths:
        p = Path(target)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.json")))
        else:
            paths.append(p)
    if not paths:
        print("error: no layout files found", file=sys.stderr)
        return EXIT_ERROR

    reports = {}
    failures = []
    for path in paths:
        try:
            layout = layout_from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            failures.append(f"{path}: {exc}")
            continue
        reports[str(path)] = evaluate_layout(layout).to_dict()

    macro = {}
    if reports:
        keys = ("oor_mean", "oor_max", "oob_rate", "alignment_rate")
        macro = {k: sum(r[k] for r in reports.values()) / len(reports) for k in keys}
    result = {"layouts": reports, "macro_average": macro, "failures": failures}
    text = json.dumps(result, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if failures:
        for failure in failures:
            print(f"error: {failure}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, make_app

    config = ServiceConfig(
        catalog_path=Path(args.catalog) if args.catalog else _default_catalog_path(),
        templates_path=Path(args.templates) if args.templates else None,
        backend=_backend_config(args),
        session_ttl=args.ttl,
    )
    app = make_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llplace", description="Indoor layout designer")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_backend(p):
        p.add_argument("--backend", choices=[k.value for k in BackendKind],
                       default=BackendKind.HEURISTIC.value)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--catalog", default=None, help="catalog JSONL path")
        p.add_argument("--templates", default=None, help="templates directory")
        p.add_argument("--endpoint", default=None, help="remote backend URL")
        p.add_argument("--model", default=None, help="remote model name")
        p.add_argument("--replay-script", default=None,
                       help="JSON array file of canned responses")

    gen = sub.add_parser("generate", help="run one design generation")
    gen.add_argument("request", help="request JSON file")
    gen.add_argument("--out", default="out", help="output directory")
    gen.add_argument("--svg", action="store_true", help="also render layout.svg")
    common_backend(gen)
    gen.set_defaults(func=cmd_generate)

    edit = sub.add_parser("edit", help="apply one add/remove edit to a session")
    edit.add_argument("session", help="session JSON file from a prior generate")
    group = edit.add_mutually_exclusive_group(required=True)
    group.add_argument("--add", default=None, help="items JSON file to add")
    group.add_argument("--remove", default=None, help="descriptions JSON file to remove")
    edit.add_argument("--svg", action="store_true")
    common_backend(edit)
    edit.set_defaults(func=cmd_edit)

    build = sub.add_parser("build-dataset", help="construct dialogue training data")
    build.add_argument("scenes", help="scene records JSONL file")
    build.add_argument("--out", default="dataset", help="output directory")
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--templates", default=None)
    build.add_argument("--no-add", action="store_true")
    build.add_argument("--no-remove", action="store_true")
    build.set_defaults(func=cmd_build_dataset)

    ev = sub.add_parser("eval", help="compute metrics for layout files")
    ev.add_argument("paths", nargs="+", help="layout JSON files or directories")
    ev.add_argument("--out", default=None, help="write report JSON here")
    ev.set_defaults(func=cmd_eval)

    serve = sub.add_parser("serve", help="run the HTTP design service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--ttl", type=int, default=3600)
    common_backend(serve)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
