"""Shared fixture helpers: synthetic shot videos and a fake decoder pair."""

import stat
import sys
import textwrap

import numpy as np
import pytest
from PIL import Image

from vnshot import ingest, phash
from vnshot.ingest import SampledFrame


def frames_from_arrays(arrays, fps=2.0):
    return [
        SampledFrame(index=i, source_timestamp=i / fps, pixels=np.asarray(a, dtype=np.uint8))
        for i, a in enumerate(arrays)
    ]


def coefficient_margin(img):
    """Distance of the closest 8x8 DCT coefficient to the hash threshold."""
    coeffs = phash.dct2d(phash.resize_area(img, phash.DCT_SIZE, phash.DCT_SIZE))
    block = coeffs[: phash.HASH_SIZE, : phash.HASH_SIZE]
    return float(np.abs(block - block.mean()).min())


def coarse_pattern(rng, height=96, width=128, cells=8, min_margin=30.0):
    """A random high-contrast block pattern whose hash is stable under noise.

    Patterns with any DCT coefficient close to the hash threshold are
    rejected so that mild pixel noise cannot flip hash bits; accepted
    patterns hash identically across noisy copies.
    """
    while True:
        grid = rng.integers(0, 2, size=(cells, cells)) * 205 + 25
        tile = np.ones((height // cells + 1, width // cells + 1))
        pattern = np.kron(grid, tile)[:height, :width].astype(np.float64)
        if coefficient_margin(pattern) >= min_margin:
            return pattern


def noisy_copy(rng, pattern, sigma=3.0):
    return np.clip(np.round(pattern + rng.normal(0.0, sigma, pattern.shape)), 0, 255).astype(
        np.uint8
    )


def shot_video(rng, shot_sizes, height=96, width=128, sigma=3.0):
    """Frames for a synthetic multi-shot video plus its boundary list."""
    frames = []
    edges = [0]
    for size in shot_sizes:
        pattern = coarse_pattern(rng, height, width)
        frames.extend(noisy_copy(rng, pattern, sigma) for _ in range(size))
        edges.append(edges[-1] + size)
    return frames_from_arrays(frames), edges


def write_frames_dir(frames, directory):
    directory.mkdir(parents=True, exist_ok=True)
    for frame in frames:
        Image.fromarray(frame.pixels, mode="L").save(
            directory / f"frame_{frame.index:04d}.png", format="PNG"
        )
    return directory


def random_similarity_values(rng, n):
    """A random matrix satisfying the similarity-matrix invariants."""
    numerators = rng.integers(0, 65, size=(n, n))
    numerators = np.minimum(numerators, numerators.T)
    np.fill_diagonal(numerators, 64)
    return numerators / 64.0


def image_corpus(height=96, width=128):
    """Twenty deterministic synthetic photos: gradients, checkers, blobs,
    bands, sinusoid textures, and quadrant splits."""
    rng = np.random.default_rng(7)
    yy, xx = np.mgrid[0:height, 0:width]
    images = []
    for _ in range(4):
        angle = rng.uniform(0, np.pi)
        g = np.cos(angle) * xx / width + np.sin(angle) * yy / height
        span = np.ptp(g) + 1e-9
        images.append(40 + 170 * (g - g.min()) / span)
    for period in (8, 16, 24, 48):
        images.append((((xx // period) + (yy // period)) % 2) * 200 + 20)
    for _ in range(4):
        cx, cy = rng.uniform(20, width - 20), rng.uniform(20, height - 20)
        s = rng.uniform(10, 30)
        images.append(30 + 220 * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * s * s)))
    images.append(np.where(np.abs(xx - width / 2) < width / 6, 240, 20))
    images.append(np.where(np.abs(yy - height / 2) < height / 6, 240, 20))
    for _ in range(4):
        fx, fy = rng.uniform(0.5, 4), rng.uniform(0.5, 4)
        images.append(
            128 + 100 * np.sin(2 * np.pi * fx * xx / width) * np.cos(2 * np.pi * fy * yy / height)
        )
    images.append(np.where((xx < width / 2) ^ (yy < height / 2), 230, 25))
    images.append((((xx // 12) ^ (yy // 20)) % 2) * 210 + 25)
    return [np.clip(np.round(img), 0, 255).astype(np.uint8) for img in images]


def upscale_nearest_2x(img):
    return np.repeat(np.repeat(img, 2, axis=0), 2, axis=1)


def upscale_bilinear_2x(img):
    h, w = img.shape
    ys = (np.arange(2 * h) + 0.5) / 2 - 0.5
    xs = (np.arange(2 * w) + 0.5) / 2 - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    y1 = np.clip(y0 + 1, 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    x1 = np.clip(x0 + 1, 0, w - 1)
    wy = np.clip(ys - y0, 0, 1)[:, None]
    wx = np.clip(xs - x0, 0, 1)[None, :]
    out = (
        img[np.ix_(y0, x0)] * (1 - wy) * (1 - wx)
        + img[np.ix_(y0, x1)] * (1 - wy) * wx
        + img[np.ix_(y1, x0)] * wy * (1 - wx)
        + img[np.ix_(y1, x1)] * wy * wx
    )
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


_FAKE_PROBE = textwrap.dedent(
    """\
    #!{python}
    import json, sys
    path = sys.argv[-1]
    try:
        with open(path) as fh:
            desc = json.load(fh)
        print(f"{{desc['width']}},{{desc['height']}}")
    except Exception as exc:
        print(f"probe failed: {{exc}}", file=sys.stderr)
        sys.exit(1)
    """
)

_FAKE_DECODER = textwrap.dedent(
    """\
    #!{python}
    import json, sys
    args = sys.argv[1:]
    path = args[args.index("-i") + 1]
    filt = args[args.index("-vf") + 1]
    rate = float(filt.split("=", 1)[1])
    with open(path) as fh:
        desc = json.load(fh)
    if desc.get("mode") == "fail":
        sys.stdout.buffer.write(b"\\x00" * 7)
        sys.stdout.buffer.flush()
        print("simulated decode failure", file=sys.stderr)
        sys.exit(1)
    size = desc["width"] * desc["height"]
    count = int(desc["duration"] * rate)
    for k in range(count):
        sys.stdout.buffer.write(bytes([k % 256]) * size)
    sys.stdout.buffer.flush()
    """
)


class FakeDecoder:
    """Writes ffmpeg/ffprobe-compatible stand-ins and synthetic video files."""

    def __init__(self, tmp_path):
        self.root = tmp_path
        self.decoder = self._script("fake_ffmpeg", _FAKE_DECODER)
        self.probe = self._script("fake_ffprobe", _FAKE_PROBE)

    def _script(self, name, template):
        path = self.root / name
        path.write_text(template.format(python=sys.executable))
        path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
        return path

    def make_video(self, name, duration, native_fps=25, width=32, height=24, mode="counter"):
        path = self.root / name
        path.write_text(
            '{"duration": %s, "native_fps": %s, "width": %d, "height": %d, "mode": "%s"}'
            % (duration, native_fps, width, height, mode)
        )
        return path


@pytest.fixture
def fake_decoder(tmp_path, monkeypatch):
    fake = FakeDecoder(tmp_path)
    monkeypatch.setenv(ingest.DECODER_ENV, str(fake.decoder))
    monkeypatch.setenv(ingest.PROBE_ENV, str(fake.probe))
    return fake


@pytest.fixture
def rng():
    return np.random.default_rng(0)


# one status line per acceptance criterion, printed in the run summary
_ACCEPTANCE_RESULTS = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.name.startswith("test_criterion"):
        if hasattr(report, "wasxfail"):
            status = "XFAIL" if report.outcome == "skipped" else "XPASS"
        else:
            status = report.outcome.upper()
        _ACCEPTANCE_RESULTS.append((item.name, status))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, status in sorted(_ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{status:<8s} {name}")
