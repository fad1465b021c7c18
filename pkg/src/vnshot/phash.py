"""64-bit perceptual hashing of grayscale frames.

A frame is area-resized to 32x32, transformed with an orthonormal type-II
2-D DCT, and the upper-left 8x8 coefficient block is thresholded at its own
mean (>= maps to 1). The result is a 64-bit fingerprint; frame similarity
is derived from the Hamming distance between fingerprints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyRasterError

DCT_SIZE = 32
HASH_SIZE = 8
HASH_BITS = HASH_SIZE * HASH_SIZE


def _dct_basis(n: int) -> np.ndarray:
    """Orthonormal type-II DCT basis matrix (rows are basis vectors)."""
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    basis = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * m + 1) * k / (2 * n))
    basis[0, :] = np.sqrt(1.0 / n)
    return basis


_BASIS = _dct_basis(DCT_SIZE)


@dataclass(frozen=True)
class HashMatrix:
    """An 8x8 bit grid packed row-major into one 64-bit word.

    Bit (i, j) occupies position 8*i + j counted from the most significant
    bit, so bit (0, 0) is the MSB and the hex form is stable across
    platforms.
    """

    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << HASH_BITS):
            raise ValueError(f"hash word out of range: {self.bits!r}")

    def bit(self, i: int, j: int) -> int:
        if not (0 <= i < HASH_SIZE and 0 <= j < HASH_SIZE):
            raise IndexError((i, j))
        return (self.bits >> (HASH_BITS - 1 - (HASH_SIZE * i + j))) & 1

    def to_grid(self) -> np.ndarray:
        grid = np.zeros((HASH_SIZE, HASH_SIZE), dtype=np.uint8)
        for i in range(HASH_SIZE):
            for j in range(HASH_SIZE):
                grid[i, j] = self.bit(i, j)
        return grid

    @classmethod
    def from_grid(cls, grid) -> "HashMatrix":
        arr = np.asarray(grid)
        if arr.shape != (HASH_SIZE, HASH_SIZE):
            raise DimensionMismatchError(f"expected 8x8 grid, got {arr.shape}")
        word = 0
        for v in arr.ravel():
            word = (word << 1) | (1 if v else 0)
        return cls(word)

    def to_hex(self) -> str:
        return f"{self.bits:016x}"

    @classmethod
    def from_hex(cls, text: str) -> "HashMatrix":
        if len(text) != 16:
            raise ValueError(f"hash hex must be 16 characters, got {len(text)}")
        return cls(int(text, 16))


def dct2d(block: np.ndarray) -> np.ndarray:
    """2-D orthonormal type-II DCT of a 32x32 block.

    Computed by direct basis-matrix multiplication; coefficient (0, 0) is
    the DC term and equals 32 * mean(block) under this normalization.
    """
    block = np.asarray(block, dtype=np.float64)
    if block.shape != (DCT_SIZE, DCT_SIZE):
        raise DimensionMismatchError(
            f"dct2d expects a {DCT_SIZE}x{DCT_SIZE} block, got {block.shape}"
        )
    return _BASIS @ block @ _BASIS.T


def idct2d(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of dct2d (the basis is orthonormal, so the transpose inverts)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (DCT_SIZE, DCT_SIZE):
        raise DimensionMismatchError(
            f"idct2d expects a {DCT_SIZE}x{DCT_SIZE} block, got {coeffs.shape}"
        )
    return _BASIS.T @ coeffs @ _BASIS


def _axis_weights(src: int, dst: int) -> np.ndarray:
    """Area-overlap weight matrix mapping src samples onto dst bins.

    Each output bin averages the source cells it covers, with fractional
    cells weighted by overlap; every row sums to 1 so constants are fixed
    points of the resize.
    """
    weights = np.zeros((dst, src))
    scale = src / dst
    for t in range(dst):
        lo = t * scale
        hi = lo + scale
        first = int(np.floor(lo))
        last = min(int(np.ceil(hi)), src)
        for m in range(first, last):
            overlap = min(m + 1, hi) - max(m, lo)
            if overlap > 0:
                weights[t, m] = overlap / scale
    return weights


def resize_area(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Area-averaging resize of a 2-D raster to out_h x out_w (float64)."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D raster, got shape {pixels.shape}")
    h, w = pixels.shape
    return _axis_weights(h, out_h) @ pixels @ _axis_weights(w, out_w).T


def perceptual_hash(frame: np.ndarray, exclude_dc: bool = False) -> HashMatrix:
    """Hash a grayscale raster of any size into a HashMatrix.

    The threshold is the mean of the 8x8 low-frequency block. With
    ``exclude_dc`` the DC coefficient is left out of that mean (the
    convention of most published implementations, and the variant that is
    exactly invariant under global brightness shifts); all 64 positions are
    thresholded either way.
    """
    frame = np.asarray(frame)
    if frame.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D raster, got shape {frame.shape}")
    if frame.size == 0:
        raise EmptyRasterError("cannot hash an empty raster")
    coeffs = dct2d(resize_area(frame, DCT_SIZE, DCT_SIZE))
    block = coeffs[:HASH_SIZE, :HASH_SIZE]
    if exclude_dc:
        mean = (block.sum() - block[0, 0]) / (HASH_BITS - 1)
    else:
        mean = block.sum() / HASH_BITS
    return HashMatrix.from_grid(block >= mean)


def hamming(h1: HashMatrix, h2: HashMatrix) -> int:
    """Number of differing bits between two hashes (0..64)."""
    return (h1.bits ^ h2.bits).bit_count()


def similarity(h1: HashMatrix, h2: HashMatrix) -> float:
    """Similarity 1 - D/64; takes only the 65 values k/64."""
    return 1.0 - hamming(h1, h2) / HASH_BITS
