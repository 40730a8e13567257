"""Command-line entry points: infer, map, render, graph, serve.

Exit codes are a compatibility contract: 0 ok, 1 usage, 2 validation,
3 backend failure, 4 io. Human-readable summaries go to stdout, diagnostics
to stderr; file outputs are the machine-readable surface.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .agents import load_inferred, make_backend, serialize_inferred
from .audio_assets import CorpusManifest, adapters_from_env
from .contact_graph import ContactGraph, build_graph, to_dot
from .dsp import RenderConfig
from .errors import (
    BackendError,
    DecodeError,
    DegenerateSize,
    DomainError,
    EstimationUnavailable,
    InvariantViolation,
    MalformedResponse,
    MissingAudio,
    MissingMaterial,
    NoPath,
    ParseError,
    ResolutionFailed,
    SelfLoop,
    UnknownMaterial,
    UnknownNode,
    UnsupportedFormat,
    ValidationError,
)
from .geometry import derive_geometry, load_scene
from .pipeline import attach_assets, run_inference, validate_inferred_matches
from .propagation import PropagationMode, attenuation_map
from .session import load_script, render_session

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_BACKEND = 3
EXIT_IO = 4

_VALIDATION_ERRORS = (
    ParseError, ValidationError, DegenerateSize, DomainError, UnknownNode,
    SelfLoop, NoPath, UnknownMaterial, MissingMaterial, MissingAudio, ValueError,
)
_BACKEND_ERRORS = (
    BackendError, MalformedResponse, EstimationUnavailable, InvariantViolation,
    ResolutionFailed,
)
_IO_ERRORS = (OSError, DecodeError, UnsupportedFormat)


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # unknown flags and friends: exit 1, not 2
        print(f"error: {message}", file=sys.stderr)
        print(self.format_usage(), file=sys.stderr, end="")
        raise _UsageExit


def _read_bytes(path: str) -> bytes:
    return Path(path).read_bytes()


def _load_scene_file(path: str):
    scene = load_scene(_read_bytes(path))
    return scene, derive_geometry(scene)


def _load_corpus(path: str | None):
    if path is None:
        return None
    p = Path(path)
    if not p.is_file():
        return None
    return CorpusManifest.load(p)


def cmd_infer(args) -> int:
    scene, derived = _load_scene_file(args.scene)
    backend = make_backend(args.backend, replay_file=args.replay_file)
    corpus = _load_corpus(args.corpus)
    inferred, _assets = run_inference(
        scene, derived, backend, corpus, adapters_from_env(),
        max_workers=args.workers,
    )
    document = serialize_inferred(inferred)
    if args.out:
        Path(args.out).write_bytes(document)
    header = f"{'object':<20} {'category':<20} {'material':<14} vibrates"
    print(header)
    print("-" * len(header))
    for oid, info in inferred.objects.items():
        print(f"{oid:<20} {info.analysis.object_category:<20} "
              f"{info.analysis.material_category:<14} "
              f"{'yes' if info.analysis.should_vibrate else 'no'}")
    if not args.out:
        sys.stdout.flush()
        sys.stderr.write("note: no --out given, document not written\n")
    return EXIT_OK


def cmd_map(args) -> int:
    scene, derived = _load_scene_file(args.scene)
    inferred = load_inferred(_read_bytes(args.inferred))
    validate_inferred_matches(scene, inferred)
    graph = build_graph(scene, derived, inferred)
    amap = attenuation_map(
        scene, derived, graph, inferred, args.object, args.resolution,
        PropagationMode.parse(args.mode),
        2.0 * math.pi * args.frequency,
    )
    grid = amap.combined()
    lines = [",".join(repr(v) for v in row) for row in grid]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, "utf-8")
        print(f"wrote {args.resolution}x{args.resolution} map for "
              f"{args.object!r} to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_render(args) -> int:
    scene, derived = _load_scene_file(args.scene)
    inferred = load_inferred(_read_bytes(args.inferred))
    validate_inferred_matches(scene, inferred)
    graph = build_graph(scene, derived, inferred)
    corpus = _load_corpus(args.corpus)
    assets = attach_assets(scene, inferred, corpus, adapters_from_env())
    script = load_script(_read_bytes(args.script))
    result = render_session(
        scene, derived, graph, inferred, assets, script,
        RenderConfig(), PropagationMode.parse(args.mode),
    )
    Path(args.out).write_bytes(result.wav_bytes)
    print(f"{'touch':<24} {'start':>7} {'end':>7} {'rms':>12}")
    for seg in result.segments:
        label = f"{seg.client}:{seg.object_id}"
        print(f"{label:<24} {seg.start:>7.2f} {seg.end:>7.2f} {seg.rms:>12.6f}")
    print(f"clipped: {'yes' if result.clipped else 'no'}")
    return EXIT_OK


def cmd_graph(args) -> int:
    scene, derived = _load_scene_file(args.scene)
    if args.inferred:
        inferred = load_inferred(_read_bytes(args.inferred))
        validate_inferred_matches(scene, inferred)
        graph = build_graph(scene, derived, inferred)
    else:
        graph = ContactGraph(
            nodes=frozenset(scene.object_ids()),
            edges=frozenset(derived.contacts),
            sources=frozenset(),
        )
    dot = to_dot(graph)
    if args.out:
        Path(args.out).write_text(dot, "utf-8")
        print(f"wrote graph to {args.out}")
    else:
        sys.stdout.write(dot)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import make_app

    app = make_app(corpus_path=args.corpus, state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="vibroscene",
                     description="scene-to-vibrotactile rendering engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", parents=[], help="run inference agents on a scene")
    p.add_argument("scene", help="scene manifest JSON path")
    p.add_argument("--backend", default="mock", choices=["mock", "replay", "http"])
    p.add_argument("--replay-file", default=None, help="recording for --backend replay")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--corpus", default="corpus/manifest.json")
    p.add_argument("--out", default=None, help="write the inferred document here")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("map", help="sample an attenuation map over an object face")
    p.add_argument("scene")
    p.add_argument("inferred", help="inferred document JSON path")
    p.add_argument("--object", required=True)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--mode", default="attenuated")
    p.add_argument("--frequency", type=float, default=250.0,
                   help="drive frequency in Hz for the wavenumber")
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("render", help="render a touch script to WAV")
    p.add_argument("scene")
    p.add_argument("inferred")
    p.add_argument("--script", required=True)
    p.add_argument("--mode", default="attenuated")
    p.add_argument("--corpus", default="corpus/manifest.json")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("graph", help="export the contact graph as DOT")
    p.add_argument("scene")
    p.add_argument("inferred", nargs="?", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--corpus", default="corpus/manifest.json")
    p.add_argument("--state-dir", default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit:
        return EXIT_USAGE
    try:
        return args.func(args)
    except _BACKEND_ERRORS as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except _IO_ERRORS as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
