"""Frame acquisition: external-decoder sampling and directory ingestion.

Video files are decoded by an external ffmpeg-compatible executable that
writes raw 8-bit grayscale frames to stdout at the requested sampling
rate; frame dimensions are probed beforehand with an ffprobe-compatible
tool. The package never links a decoding library. Directories of images
(PNG/JPEG/PGM) are the decoder-free ingestion path used in tests and CI.
"""

from __future__ import annotations

import logging
import os
import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DecodeFailedError,
    DecoderNotFoundError,
    DimensionMismatchError,
    EmptyDirectoryError,
    EmptyVideoError,
    UnreadableImageError,
)

logger = logging.getLogger(__name__)

DECODER_ENV = "VNSHOT_FFMPEG"
PROBE_ENV = "VNSHOT_FFPROBE"
DEFAULT_DECODER = "ffmpeg"
DEFAULT_PROBE = "ffprobe"

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".pgm"}

# BT.709 luma weights; they sum to 1 so grayscale input is a fixed point.
_LUMA_R = 0.2126
_LUMA_G = 0.7152
_LUMA_B = 0.0722


@dataclass(frozen=True)
class SamplingConfig:
    """Sampling rate in frames per second, with an optional frame cap."""

    fps: float = 2.0
    max_frames: int | None = None

    def __post_init__(self):
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps!r}")
        if self.max_frames is not None and self.max_frames < 1:
            raise ValueError(f"max_frames must be >= 1, got {self.max_frames!r}")


@dataclass(frozen=True)
class SampledFrame:
    """One grayscale frame with its position in the sampled sequence.

    index runs 0, 1, 2, ... in temporal order; source_timestamp is seconds
    into the source. pixels is a 2-D uint8 array, row-major.
    """

    index: int
    source_timestamp: float
    pixels: np.ndarray

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """BT.709 luma conversion of an (h, w, 3) raster, rounded to uint8."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise DimensionMismatchError(f"expected an (h, w, 3) raster, got {rgb.shape}")
    rgb = rgb.astype(np.float64)
    luma = _LUMA_R * rgb[:, :, 0] + _LUMA_G * rgb[:, :, 1] + _LUMA_B * rgb[:, :, 2]
    return np.clip(np.rint(luma), 0, 255).astype(np.uint8)


def _load_image_gray(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            if img.mode == "L":
                return np.asarray(img, dtype=np.uint8)
            rgb = img.convert("RGB")
            return to_grayscale(np.asarray(rgb, dtype=np.uint8))
    except (UnidentifiedImageError, OSError) as exc:
        raise UnreadableImageError(f"cannot read image {path}: {exc}") from exc


def sample_from_directory(dir_path, cfg: SamplingConfig) -> list[SampledFrame]:
    """Load a directory of images as a frame sequence.

    Files are taken in byte-wise filename order (reproducible across
    platforms and locales) and timestamped at index / cfg.fps. Grayscale
    images pass through unchanged; color images get the BT.709 conversion.
    """
    directory = Path(dir_path)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    names = [
        p for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    names.sort(key=lambda p: os.fsencode(p.name))
    if not names:
        raise EmptyDirectoryError(f"no image files in {directory}")
    if cfg.max_frames is not None:
        names = names[: cfg.max_frames]
    frames = []
    for idx, path in enumerate(names):
        frames.append(
            SampledFrame(index=idx, source_timestamp=idx / cfg.fps, pixels=_load_image_gray(path))
        )
    return frames


def decoder_executable() -> str:
    return os.environ.get(DECODER_ENV, DEFAULT_DECODER)


def probe_executable() -> str:
    return os.environ.get(PROBE_ENV, DEFAULT_PROBE)


def probe_dimensions(video_path) -> tuple[int, int]:
    """Ask the probe tool for the video stream's width and height."""
    argv = [
        probe_executable(),
        "-v", "error",
        "-select_streams", "v:0",
        "-show_entries", "stream=width,height",
        "-of", "csv=p=0",
        str(video_path),
    ]
    try:
        result = subprocess.run(argv, capture_output=True, text=True)
    except FileNotFoundError as exc:
        raise DecoderNotFoundError(f"probe executable not found: {argv[0]}") from exc
    if result.returncode != 0:
        raise DecodeFailedError(
            f"probe failed on {video_path}: {result.stderr.strip() or 'no diagnostic'}"
        )
    try:
        width, height = (int(v) for v in result.stdout.strip().split(",")[:2])
    except ValueError as exc:
        raise DecodeFailedError(
            f"probe produced unparseable dimensions: {result.stdout!r}"
        ) from exc
    if width < 1 or height < 1:
        raise DecodeFailedError(f"probe reported empty dimensions {width}x{height}")
    return width, height


def decoder_args(video_path, fps: float) -> list[str]:
    """Argument vector requesting raw grayscale frames at `fps` on stdout."""
    return [
        decoder_executable(),
        "-v", "error",
        "-nostdin",
        "-i", str(video_path),
        "-vf", f"fps={fps:g}",
        "-pix_fmt", "gray",
        "-f", "rawvideo",
        "pipe:1",
    ]


def _read_exact(stream, size: int) -> bytes:
    chunks = []
    remaining = size
    while remaining > 0:
        chunk = stream.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def sample_from_decoder(video_path, cfg: SamplingConfig) -> list[SampledFrame]:
    """Decode a video through the external decoder at cfg.fps.

    The decoder's own rate filter picks the source frame nearest each
    target instant k / fps; frames arrive as raw grayscale rasters on its
    stdout and are timestamped k / fps here.
    """
    path = Path(video_path)
    if not path.exists():
        raise FileNotFoundError(f"video not found: {path}")
    width, height = probe_dimensions(path)
    frame_size = width * height
    argv = decoder_args(path, cfg.fps)
    logger.debug("decoder argv: %s", argv)
    try:
        proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    except FileNotFoundError as exc:
        raise DecoderNotFoundError(f"decoder executable not found: {argv[0]}") from exc
    frames = []
    stopped_early = False
    try:
        while True:
            if cfg.max_frames is not None and len(frames) >= cfg.max_frames:
                stopped_early = True
                break
            raw = _read_exact(proc.stdout, frame_size)
            if len(raw) < frame_size:
                if raw:
                    raise DecodeFailedError(
                        f"decoder emitted a truncated frame ({len(raw)} of {frame_size} bytes)"
                    )
                break
            idx = len(frames)
            pixels = np.frombuffer(raw, dtype=np.uint8).reshape((height, width))
            frames.append(
                SampledFrame(index=idx, source_timestamp=idx / cfg.fps, pixels=pixels)
            )
    finally:
        if stopped_early:
            proc.kill()
        stderr = proc.communicate()[1]
    if not stopped_early and proc.returncode not in (0, None):
        raise DecodeFailedError(
            f"decoder exited with status {proc.returncode}: "
            f"{stderr.decode(errors='replace').strip() or 'no diagnostic'}"
        )
    if not frames:
        raise EmptyVideoError(f"decoder produced no frames for {path}")
    return frames
