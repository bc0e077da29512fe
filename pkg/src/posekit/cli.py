"""Command-line surface: one deterministic pipeline stage per invocation.

Subcommands:
  match            two annotation files -> frame-mapping JSONL
  pairs            two annotation files -> pair-manifest JSONL
  render-skeleton  annotation file -> skeleton PNG directory
  align            frame directory + annotation file -> aligned frame directory
  assemble         frame mapping + frame directory -> output frames with crossfades
  validate         schema-check an annotation file

Exit codes: 0 success, 1 usage error, 2 data/schema error.  Errors go to
stderr with an ERROR:<kind>: prefix.  POSEKIT_THREADS caps frame-parallel
worker threads.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence

from .annotations import load_document, load_pose_sequence, validate_document
from .config import PipelineConfig, load_config
from .errors import ConfigError, PosekitError, SchemaError
from .manifests import read_frame_mapping, write_frame_mapping, write_pair_manifest
from .pose import CandidatePolicy, PoseSequence, impute_missing_joints
from .raster import FaceAnnotation, RasterImage, align_sequence, blend_frames, frame_path, list_frames, load_frame, render_skeleton, save_frame
from .transfer import build_pairs_manifest, interpolate_plan, match_sequence


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


_POLICY_FLAGS = {
    "min-distance": CandidatePolicy.MIN_DISTANCE,
    "nearest-prev": CandidatePolicy.NEAREST_PREV_INDEX,
}


def worker_count() -> int:
    """Worker threads for frame-parallel stages; POSEKIT_THREADS caps it."""
    limit = os.environ.get("POSEKIT_THREADS", "").strip()
    if not limit:
        return os.cpu_count() or 1
    try:
        value = int(limit)
    except ValueError:
        raise ConfigError("POSEKIT_THREADS", f"expected an integer, got {limit!r}") from None
    return max(1, value)


def _parallel_map(fn: Callable, items: Sequence) -> list:
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise UsageError(message)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="flat JSON config file; flags override it")
    p.add_argument("--k", type=int, default=None, help="number of nearest neighbors to consider")
    p.add_argument("--lambda", dest="min_improvement", type=float, default=None,
                   help="required pose-distance improvement before switching frames")
    p.add_argument("--no-normalize", action="store_const", const=True, default=None,
                   help="compare raw pixel coordinates instead of width/height-normalized ones")
    p.add_argument("--policy", choices=sorted(_POLICY_FLAGS), default=None,
                   help="how to pick one frame from the k nearest")


def build_parser() -> _Parser:
    parser = _Parser(prog="posekit", description="Pose-matched frame mapping and training-pair dataset tooling")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("match", help="map every frame of A onto a frame of B")
    p.add_argument("a", type=Path, help="annotation JSON for the input video A")
    p.add_argument("b", type=Path, help="annotation JSON for the output video B")
    _add_common_flags(p)
    p.add_argument("-o", "--output", type=Path, required=True, help="frame-mapping JSONL to write")
    p.set_defaults(handler=_cmd_match)

    p = sub.add_parser("pairs", help="build a nearest-pose training-pair manifest")
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)
    _add_common_flags(p)
    p.add_argument("--max-distance", type=float, default=None, help="drop pairs farther apart than this")
    p.add_argument("-o", "--output", type=Path, required=True, help="pair-manifest JSONL to write")
    p.set_defaults(handler=_cmd_pairs)

    p = sub.add_parser("render-skeleton", help="rasterize annotation frames to skeleton PNGs")
    p.add_argument("document", type=Path)
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--joint-radius", type=int, default=None)
    p.add_argument("--line-thickness", type=int, default=None)
    p.add_argument("-o", "--output", type=Path, required=True, help="directory for frame_%%06d.png files")
    p.set_defaults(handler=_cmd_render_skeleton)

    p = sub.add_parser("align", help="shift frames so face centers match the first frame")
    p.add_argument("frames", type=Path, help="directory of frame_%%06d.png files")
    p.add_argument("document", type=Path, help="annotation JSON carrying per-frame face boxes")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(handler=_cmd_align)

    p = sub.add_parser("assemble", help="emit mapped frames with crossfades at switches")
    p.add_argument("mapping", type=Path, help="frame-mapping JSONL from `match`")
    p.add_argument("frames", type=Path, help="directory of B's frame_%%06d.png files")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--interp", type=int, default=None, help="interpolation factor n (n-1 blends per switch)")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(handler=_cmd_assemble)

    p = sub.add_parser("validate", help="schema-check an annotation file")
    p.add_argument("document", type=Path)
    p.set_defaults(handler=_cmd_validate)

    return parser


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    overrides = {}
    if getattr(args, "k", None) is not None:
        if args.k < 1:
            raise UsageError("--k must be >= 1")
        overrides["k"] = args.k
    if getattr(args, "min_improvement", None) is not None:
        if args.min_improvement < 0:
            raise UsageError("--lambda must be >= 0")
        overrides["min_improvement"] = args.min_improvement
    if getattr(args, "no_normalize", None):
        overrides["normalize"] = False
    if getattr(args, "policy", None) is not None:
        overrides["candidate_policy"] = _POLICY_FLAGS[args.policy]
    if getattr(args, "max_distance", None) is not None:
        if args.max_distance < 0:
            raise UsageError("--max-distance must be >= 0")
        overrides["max_distance"] = args.max_distance
    if getattr(args, "interp", None) is not None:
        if args.interp < 1:
            raise UsageError("--interp must be >= 1")
        overrides["interpolation_factor"] = args.interp
    if getattr(args, "joint_radius", None) is not None:
        if args.joint_radius < 1:
            raise UsageError("--joint-radius must be >= 1")
        overrides["joint_radius"] = args.joint_radius
    if getattr(args, "line_thickness", None) is not None:
        if args.line_thickness < 1:
            raise UsageError("--line-thickness must be >= 1")
        overrides["line_thickness"] = args.line_thickness
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _load_imputed(path: Path) -> PoseSequence:
    seq, _ = load_pose_sequence(load_document(path))
    return impute_missing_joints(seq)


def _cmd_match(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    a = _load_imputed(args.a)
    b = _load_imputed(args.b)
    mapping = match_sequence(a, b, cfg.match_params())
    write_frame_mapping(mapping, args.output)
    print(f"wrote {len(mapping)} entries ({mapping.switch_count()} switches) -> {args.output}")
    return 0


def _cmd_pairs(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    a = _load_imputed(args.a)
    b = _load_imputed(args.b)
    manifest = build_pairs_manifest(a, b, cfg.match_params(), cfg.max_distance, workers=worker_count())
    write_pair_manifest(manifest, args.output)
    print(f"wrote {len(manifest)} pairs -> {args.output}")
    return 0


def _cmd_render_skeleton(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    # Rendered as detected: missing joints stay missing so dropped limbs are visible.
    seq, faces = load_pose_sequence(load_document(args.document))
    dims = (int(seq.width), int(seq.height))
    style = cfg.style_for(seq.height)
    args.output.mkdir(parents=True, exist_ok=True)

    def render_one(t: int) -> None:
        img = render_skeleton(seq.frames[t], faces[t], dims, style)
        save_frame(img, frame_path(args.output, t))

    _parallel_map(render_one, range(len(seq.frames)))
    print(f"rendered {len(seq.frames)} frames -> {args.output}")
    return 0


def _cmd_align(args: argparse.Namespace) -> int:
    files = list_frames(args.frames)
    if not files:
        raise PosekitError(f"no frame_*.png files in {args.frames}")
    _, faces = load_pose_sequence(load_document(args.document))
    if len(files) != len(faces):
        raise PosekitError(f"{len(files)} frames on disk but {len(faces)} annotated frames")
    missing = [t for t, face in enumerate(faces) if face is None]
    if missing:
        raise PosekitError(f"frame {missing[0]} has no face annotation; alignment needs one per frame")
    images = _parallel_map(load_frame, files)
    aligned = align_sequence(images, [f for f in faces if f is not None])
    args.output.mkdir(parents=True, exist_ok=True)

    def save_one(t: int) -> None:
        save_frame(aligned[t], frame_path(args.output, t))

    _parallel_map(save_one, range(len(aligned)))
    print(f"aligned {len(aligned)} frames -> {args.output}")
    return 0


def _cmd_assemble(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    mapping = read_frame_mapping(args.mapping)
    if not mapping.entries:
        raise PosekitError(f"mapping {args.mapping} is empty")
    plan = interpolate_plan(mapping, cfg.interpolation_factor)
    files = list_frames(args.frames)
    referenced = sorted({i for instr in plan for i in (instr.b_left, instr.b_right)})
    if referenced and referenced[-1] >= len(files):
        raise PosekitError(f"mapping references frame {referenced[-1]} but {args.frames} holds {len(files)} frames")
    cache = {i: load_frame(files[i]) for i in referenced if any(p.kind == "blend" and i in (p.b_left, p.b_right) for p in plan)}
    args.output.mkdir(parents=True, exist_ok=True)

    def emit(t: int) -> None:
        instr = plan[t]
        out = frame_path(args.output, t)
        if instr.kind == "real":
            shutil.copyfile(files[instr.b_left], out)
        else:
            save_frame(blend_frames(cache[instr.b_left], cache[instr.b_right], instr.alpha), out)

    _parallel_map(emit, range(len(plan)))
    print(f"assembled {len(plan)} frames ({mapping.switch_count()} switches, interp {cfg.interpolation_factor}) -> {args.output}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    validate_document(load_document(args.document))
    print(f"{args.document}: OK")
    return 0


def cli_run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"ERROR:usage: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"ERROR:usage: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"ERROR:config: {exc}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"ERROR:schema: {exc}", file=sys.stderr)
        return 2
    except (PosekitError, ValueError) as exc:
        print(f"ERROR:data: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ERROR:io: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_run())


if __name__ == "__main__":
    main()
