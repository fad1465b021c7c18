"""Command-line entry point.

Subcommands wire the full pipeline together:

    extract   frames -> similarity -> segmentation -> key-frame images
    simmat    frames -> similarity matrix image + binary cache
    curve     frames -> entropy-vs-shot-count CSV
    eval      score a predicted key-frame file against ground truth

Exit codes: 0 success, 2 bad flags or malformed/ill-schemed input files,
3 I/O problems (missing paths, unreadable images, empty inputs), 4
decoder failures, 5 internal errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from PIL import Image

from . import __version__
from .entropy import EntropyConfig
from .errors import (
    CorruptCacheError,
    DecodeFailedError,
    DecoderNotFoundError,
    EmptyDirectoryError,
    EmptySequenceError,
    EmptyVideoError,
    GroundTruthParseError,
    InvalidRangeError,
    SchemaViolationError,
    UnreadableImageError,
    VnshotError,
)
from .evaluation import score_external
from .ingest import SamplingConfig, sample_from_decoder, sample_from_directory
from .segmentation import (
    SearchConfig,
    StopRule,
    beam_search_segment,
    emit_curve,
    key_frames,
    segment_entropy,
    segmentation_payload,
)
from .simmatrix import build_similarity_matrix, load_cache, render_grayscale, save_cache

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DECODE = 4
EXIT_INTERNAL = 5

# n below which the auto entropy method stays exact; above it the
# stochastic backend takes over.
AUTO_EXACT_LIMIT = 512

_IO_ERRORS = (
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
    EmptyDirectoryError,
    UnreadableImageError,
    EmptySequenceError,
    CorruptCacheError,
    OSError,
)
_DECODE_ERRORS = (DecoderNotFoundError, DecodeFailedError, EmptyVideoError)
_USAGE_ERRORS = (GroundTruthParseError, SchemaViolationError, InvalidRangeError, ValueError)


@dataclass
class RunManifest:
    """Everything needed to reproduce a run bit-exactly.

    The resolved configuration (after auto-selection) plus a content
    digest of the sampled frame sequence; timings are informational and
    vary between runs.
    """

    version: str
    command: str
    config: dict
    input_digest: str
    frame_count: int
    timings: dict = field(default_factory=dict)

    def write(self, path: Path):
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def frames_digest(frames) -> str:
    digest = hashlib.sha256()
    for frame in frames:
        digest.update(f"{frame.index}:{frame.height}x{frame.width}:".encode())
        digest.update(frame.pixels.tobytes())
    return digest.hexdigest()


def _load_frames(input_path: str, cfg: SamplingConfig):
    path = Path(input_path)
    if path.is_dir():
        return sample_from_directory(path, cfg)
    return sample_from_decoder(path, cfg)


def _resolve_entropy_method(requested: str, n: int) -> str:
    if requested != "auto":
        return requested
    return "exact" if n < AUTO_EXACT_LIMIT else "taylor-stochastic"


def _search_config(args, n: int) -> tuple[SearchConfig, EntropyConfig]:
    method = _resolve_entropy_method(args.entropy, n)
    entropy_cfg = EntropyConfig(
        method=method, c=args.taylor_c, probes=args.probes, seed=args.seed
    )
    # a fixed shot count disables the knee rule so the cap is hit exactly
    stop_rule = None if args.max_shots else StopRule(
        window=args.stop_window, rel_threshold=args.stop_alpha
    )
    search_cfg = SearchConfig(
        beam_size=args.beam,
        stop_rule=stop_rule,
        max_shots=args.max_shots,
        entropy_cfg=entropy_cfg,
    )
    return search_cfg, entropy_cfg


def _config_payload(args, method: str) -> dict:
    return {
        "fps": args.fps,
        "beam": args.beam,
        "entropy_method": method,
        "taylor_c": args.taylor_c,
        "probes": args.probes,
        "seed": args.seed,
        "stop_window": args.stop_window,
        "stop_alpha": args.stop_alpha,
        "max_shots": args.max_shots,
        "threads": args.threads,
    }


def cmd_extract(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    frames = _load_frames(args.input, SamplingConfig(fps=args.fps))
    timings["ingest_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    matrix = build_similarity_matrix(frames, threads=args.threads)
    timings["similarity_s"] = time.perf_counter() - t0

    search_cfg, entropy_cfg = _search_config(args, matrix.n)
    t0 = time.perf_counter()
    cache: dict = {}
    seg, curve = beam_search_segment(matrix, search_cfg, cache)
    total = sum(
        segment_entropy(matrix, a, b, entropy_cfg, cache)
        for a, b in zip(seg.boundaries[:-1], seg.boundaries[1:])
    )
    timings["segmentation_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    for idx in key_frames(seg):
        frame = frames[idx]
        Image.fromarray(frame.pixels, mode="L").save(
            out_dir / f"kf_{idx:05d}.png", format="PNG"
        )
    (out_dir / "segmentation.json").write_text(
        json.dumps(segmentation_payload(seg, total), indent=2, sort_keys=True) + "\n"
    )
    emit_curve(curve, out_dir / "curve.csv")
    timings["output_s"] = time.perf_counter() - t0

    manifest = RunManifest(
        version=__version__,
        command="extract",
        config=_config_payload(args, entropy_cfg.method),
        input_digest=frames_digest(frames),
        frame_count=len(frames),
        timings=timings,
    )
    manifest.write(out_dir / "manifest.json")
    print(
        f"{seg.num_shots} shots, {len(key_frames(seg))} key frames -> {out_dir}",
        file=sys.stderr,
    )
    print(str(out_dir))
    return EXIT_OK


def cmd_simmat(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_path = out_dir / "simmatrix.vnsm"
    if args.from_cache:
        matrix = load_cache(cache_path)
    else:
        frames = _load_frames(args.input, SamplingConfig(fps=args.fps))
        matrix = build_similarity_matrix(frames, threads=args.threads)
        save_cache(matrix, cache_path)
    image_path = out_dir / f"simmatrix.{args.image_format}"
    render_grayscale(matrix, image_path)
    print(str(image_path))
    return EXIT_OK


def cmd_curve(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = _load_frames(args.input, SamplingConfig(fps=args.fps))
    matrix = build_similarity_matrix(frames, threads=args.threads)
    search_cfg, _ = _search_config(args, matrix.n)
    _, curve = beam_search_segment(matrix, search_cfg)
    path = emit_curve(curve, out_dir / "curve.csv")
    print(str(path))
    return EXIT_OK


def cmd_eval(args) -> int:
    result = score_external(args.pred, args.gt)
    print(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _add_pipeline_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--input", required=True, help="video file or image directory")
    parser.add_argument("--fps", type=float, default=2.0, help="sampling rate (default 2)")
    parser.add_argument("--beam", type=int, default=5, help="beam width (default 5)")
    parser.add_argument(
        "--entropy",
        choices=["auto", "exact", "taylor-dense", "taylor-stochastic"],
        default="auto",
        help="entropy backend; auto = exact below n=512, else taylor-stochastic",
    )
    parser.add_argument("--taylor-c", type=int, default=64, help="series truncation index")
    parser.add_argument("--probes", type=int, default=32, help="stochastic probe count")
    parser.add_argument("--seed", type=int, default=0, help="seed for stochastic probes")
    parser.add_argument("--stop-window", type=int, default=5, help="stop-rule baseline window")
    parser.add_argument("--stop-alpha", type=float, default=0.1, help="stop-rule drop fraction")
    parser.add_argument(
        "--max-shots",
        type=int,
        default=None,
        help="run to exactly this many shots instead of using the stop rule",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker threads for per-frame hashing (results are thread-count independent)",
    )
    parser.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vnshot",
        description="Shot segmentation and key-frame extraction driven by "
        "the entropy of frame-similarity matrices.",
    )
    parser.add_argument("--version", action="version", version=f"vnshot {__version__}")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="extract key frames from a video or directory")
    _add_pipeline_flags(p_extract)
    p_extract.set_defaults(handler=cmd_extract)

    p_simmat = sub.add_parser("simmat", help="render and cache the similarity matrix")
    _add_pipeline_flags(p_simmat)
    p_simmat.add_argument(
        "--from-cache",
        action="store_true",
        help="reuse <out>/simmatrix.vnsm instead of recomputing",
    )
    p_simmat.add_argument(
        "--image-format", choices=["png", "pgm"], default="png", help="rendered image format"
    )
    p_simmat.set_defaults(handler=cmd_simmat)

    p_curve = sub.add_parser("curve", help="emit the entropy curve CSV")
    _add_pipeline_flags(p_curve)
    p_curve.set_defaults(handler=cmd_curve)

    p_eval = sub.add_parser("eval", help="score predicted key frames against ground truth")
    p_eval.add_argument("--gt", required=True, help="ground-truth JSON file")
    p_eval.add_argument("--pred", required=True, help="predicted key-frames JSON file")
    p_eval.set_defaults(handler=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except _DECODE_ERRORS as exc:
        print(f"vnshot: decode error: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except _IO_ERRORS as exc:
        print(f"vnshot: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _USAGE_ERRORS as exc:
        print(f"vnshot: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VnshotError as exc:
        print(f"vnshot: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # anything unanticipated still exits cleanly
        logger.debug("unhandled exception", exc_info=True)
        print(f"vnshot: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
