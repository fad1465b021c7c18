"""Build, render, and cache the N x N frame-similarity matrix."""

from __future__ import annotations

import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import phash
from .errors import CorruptCacheError, EmptySequenceError

CACHE_MAGIC = b"VNSM"
CACHE_VERSION = 1


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric matrix of pairwise frame similarities.

    Every entry is k/64 for an integer k, the diagonal is all ones, and
    values[i][j] == values[j][i].
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"similarity matrix must be square, got shape {values.shape}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def validate(self):
        """Check the structural invariants; raises ValueError on violation."""
        v = self.values
        if not np.array_equal(v, v.T):
            raise ValueError("similarity matrix is not symmetric")
        if not np.array_equal(np.diag(v), np.ones(self.n)):
            raise ValueError("similarity matrix diagonal is not all ones")
        scaled = v * phash.HASH_BITS
        if not np.array_equal(scaled, np.rint(scaled)) or v.min() < 0 or v.max() > 1:
            raise ValueError("similarity entries must be k/64 within [0, 1]")


def build_similarity_matrix(
    frames, exclude_dc: bool = False, threads: int | None = None
) -> SimilarityMatrix:
    """Hash every frame and form all pairwise similarities.

    Only the upper triangle is computed (Hamming distance is symmetric);
    the lower triangle mirrors it. Per-frame hashing is embarrassingly
    parallel, so `threads` > 1 fans it out over a thread pool; results are
    assembled in frame order either way, so the output does not depend on
    the thread count.
    """
    frames = list(frames)
    if not frames:
        raise EmptySequenceError("cannot build a similarity matrix from zero frames")

    def hash_one(frame):
        return phash.perceptual_hash(frame.pixels, exclude_dc=exclude_dc).bits

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            words = list(pool.map(hash_one, frames))
    else:
        words = [hash_one(f) for f in frames]
    hashes = np.array(words, dtype=np.uint64)
    n = len(hashes)
    values = np.ones((n, n))
    if n > 1:
        rows, cols = np.triu_indices(n, k=1)
        distance = np.bitwise_count(hashes[rows] ^ hashes[cols]).astype(np.float64)
        values[rows, cols] = values[cols, rows] = 1.0 - distance / phash.HASH_BITS
    return SimilarityMatrix(values)


def _write_pgm(pixels: np.ndarray, path: Path):
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + pixels.tobytes())


def render_grayscale(m: SimilarityMatrix, out_path) -> Path:
    """Render the matrix as an n x n 8-bit image.

    Pixel value is round(255 * (1 - S)), so identical frames (S = 1) are
    black and fully dissimilar ones white. The output format follows the
    file extension: .pgm writes a binary P5 file, .png a PNG.
    """
    out_path = Path(out_path)
    pixels = np.rint(255.0 * (1.0 - m.values)).astype(np.uint8)
    suffix = out_path.suffix.lower()
    if suffix == ".pgm":
        _write_pgm(pixels, out_path)
    elif suffix == ".png":
        Image.fromarray(pixels, mode="L").save(out_path, format="PNG")
    else:
        raise ValueError(f"unsupported image extension {suffix!r}; use .pgm or .png")
    return out_path


def save_cache(m: SimilarityMatrix, path) -> Path:
    """Write the matrix to a compact binary cache.

    Layout: magic "VNSM", one version byte, little-endian u32 n, then the
    n(n+1)/2 upper-triangle entries as single bytes k (the numerator of
    k/64, which stores every legal entry losslessly), then a little-endian
    u32 CRC32 of everything before it.
    """
    path = Path(path)
    n = m.n
    numerators = np.rint(m.values * phash.HASH_BITS).astype(np.uint8)
    triangle = numerators[np.triu_indices(n)]
    body = CACHE_MAGIC + bytes([CACHE_VERSION]) + struct.pack("<I", n) + triangle.tobytes()
    path.write_bytes(body + struct.pack("<I", zlib.crc32(body)))
    return path


def load_cache(path) -> SimilarityMatrix:
    """Read a cache written by save_cache; round-trips bit-exactly."""
    data = Path(path).read_bytes()
    header_len = len(CACHE_MAGIC) + 1 + 4
    if len(data) < header_len + 4:
        raise CorruptCacheError(f"cache file too short ({len(data)} bytes)")
    if data[: len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise CorruptCacheError("bad magic bytes; not a similarity cache")
    version = data[len(CACHE_MAGIC)]
    if version != CACHE_VERSION:
        raise CorruptCacheError(f"unsupported cache version {version}")
    (n,) = struct.unpack_from("<I", data, len(CACHE_MAGIC) + 1)
    expected = header_len + n * (n + 1) // 2 + 4
    if len(data) != expected:
        raise CorruptCacheError(
            f"cache length {len(data)} does not match n={n} (expected {expected})"
        )
    body, (checksum,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != checksum:
        raise CorruptCacheError("cache checksum mismatch")
    triangle = np.frombuffer(body[header_len:], dtype=np.uint8)
    numerators = np.zeros((n, n), dtype=np.float64)
    numerators[np.triu_indices(n)] = triangle
    numerators = numerators + np.triu(numerators, 1).T
    return SimilarityMatrix(numerators / phash.HASH_BITS)
