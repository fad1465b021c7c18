"""Entropy-minimizing shot segmentation by beam search.

A segmentation is a strictly increasing boundary list [0, ..., N] over
sampled-frame indices; shot i spans the half-open range
[boundaries[i], boundaries[i+1]). The search grows segmentations one
boundary at a time, keeping the K candidates with the lowest total
per-segment entropy, and stops once the total stops falling meaningfully
(the knee of the entropy curve). The first frame of each shot is a key
frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .entropy import DensityMatrix, EntropyConfig, von_neumann
from .errors import EmptySequenceError, InvalidRangeError
from .simmatrix import SimilarityMatrix

# (num_shots, best total entropy) per search iteration
EntropyCurve = list[tuple[int, float]]

# (start, end) -> entropy of that segment's normalized submatrix
EntropyCache = dict[tuple[int, int], float]


@dataclass(frozen=True)
class Segmentation:
    """Sorted boundary indices with 0 and N as sentinels."""

    boundaries: tuple[int, ...]

    def __post_init__(self):
        b = tuple(int(x) for x in self.boundaries)
        object.__setattr__(self, "boundaries", b)
        if len(b) < 2 or b[0] != 0:
            raise ValueError(f"boundaries must start at 0 and include the end, got {b}")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise ValueError(f"boundaries must be strictly increasing, got {b}")

    @property
    def n(self) -> int:
        return self.boundaries[-1]

    @property
    def num_shots(self) -> int:
        return len(self.boundaries) - 1


@dataclass(frozen=True)
class StopRule:
    """Stop once the latest entropy drop falls below a fraction of the
    mean of the first `window` drops (or the entropy fails to drop at all)."""

    window: int = 5
    rel_threshold: float = 0.1

    def __post_init__(self):
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if not 0.0 < self.rel_threshold < 1.0:
            raise ValueError(f"rel_threshold must lie in (0, 1), got {self.rel_threshold}")


@dataclass(frozen=True)
class SearchConfig:
    """Beam width, stopping behavior, and the entropy backend to score with.

    When max_shots is set the search runs to exactly that many shots
    (fixed-count mode for like-for-like comparisons); otherwise stop_rule
    picks the knee.
    """

    beam_size: int = 5
    stop_rule: StopRule | None = field(default_factory=StopRule)
    max_shots: int | None = None
    entropy_cfg: EntropyConfig = field(default_factory=EntropyConfig)

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError(f"beam_size must be >= 1, got {self.beam_size}")
        if self.max_shots is not None and self.max_shots < 1:
            raise ValueError(f"max_shots must be >= 1, got {self.max_shots}")


def segment_entropy(
    m: SimilarityMatrix,
    a: int,
    b: int,
    cfg: EntropyConfig | None = None,
    cache: EntropyCache | None = None,
) -> float:
    """Entropy of the trace-normalized principal submatrix [a:b, a:b].

    Values are memoized under (a, b); the entropy depends only on the
    submatrix, so the cache is valid across candidates and iterations.
    """
    if not 0 <= a < b <= m.n:
        raise InvalidRangeError(f"invalid segment [{a}, {b}) for n={m.n}")
    if cache is not None and (a, b) in cache:
        return cache[(a, b)]
    length = b - a
    if length == 1:
        value = 0.0
    else:
        sub = m.values[a:b, a:b]
        value = von_neumann(DensityMatrix(sub / length), cfg or EntropyConfig())
    if cache is not None:
        cache[(a, b)] = value
    return value


def _total_entropy(m, bounds, cfg, cache) -> float:
    # full left-to-right re-sum: identical floats with or without a cache
    total = 0.0
    for a, b in zip(bounds[:-1], bounds[1:]):
        total += segment_entropy(m, a, b, cfg, cache)
    return total


def detect_stop(curve: EntropyCurve, rule: StopRule) -> bool:
    """Decide whether the latest curve entry sits past the knee.

    Fires when the newest drop is <= 0, or smaller than rel_threshold
    times the mean of the first `window` drops.
    """
    if len(curve) < 2:
        raise ValueError("stop detection needs at least two curve entries")
    drops = [curve[i][1] - curve[i + 1][1] for i in range(len(curve) - 1)]
    latest = drops[-1]
    if latest <= 0.0:
        return True
    baseline = drops[: rule.window]
    return latest < rule.rel_threshold * (sum(baseline) / len(baseline))


def beam_search_segment(
    m: SimilarityMatrix,
    cfg: SearchConfig | None = None,
    cache: EntropyCache | None = None,
) -> tuple[Segmentation, EntropyCurve]:
    """Search for the entropy-minimizing segmentation.

    Each iteration expands every beam candidate by every unused interior
    index, dedupes identical boundary sets, and keeps the beam_size
    lowest-total candidates; ties break on the lexicographic order of the
    boundary tuple, so runs are deterministic. The returned segmentation
    is the best candidate of the last iteration before the stop rule
    fired (or of the capped/final iteration), together with the full
    (num_shots, entropy) curve including the iteration that triggered the
    stop.
    """
    cfg = cfg or SearchConfig()
    n = m.n
    if n < 1:
        raise EmptySequenceError("cannot segment an empty sequence")
    if cache is None:
        cache = {}
    ecfg = cfg.entropy_cfg

    start = (0, n)
    beam = [(_total_entropy(m, start, ecfg, cache), start)]
    curve: EntropyCurve = [(1, beam[0][0])]
    previous_best = beam[0]

    while True:
        best_total, best_bounds = beam[0]
        if cfg.max_shots is not None and len(best_bounds) - 1 >= cfg.max_shots:
            return Segmentation(best_bounds), curve
        if len(best_bounds) - 1 >= n:
            # every frame is its own shot; nothing left to expand
            return Segmentation(best_bounds), curve

        seen: set[tuple[int, ...]] = set()
        candidates = []
        for _, bounds in beam:
            used = set(bounds)
            for idx in range(1, n):
                if idx in used:
                    continue
                expanded = tuple(sorted(bounds + (idx,)))
                if expanded in seen:
                    continue
                seen.add(expanded)
                candidates.append((_total_entropy(m, expanded, ecfg, cache), expanded))
        candidates.sort(key=lambda item: (item[0], item[1]))
        beam = candidates[: cfg.beam_size]
        curve.append((len(beam[0][1]) - 1, beam[0][0]))

        if cfg.stop_rule is not None and detect_stop(curve, cfg.stop_rule):
            return Segmentation(previous_best[1]), curve
        previous_best = beam[0]


def key_frames(seg: Segmentation) -> list[int]:
    """First sampled-frame index of each shot (the boundary list minus its
    terminal sentinel)."""
    return list(seg.boundaries[:-1])


def emit_curve(curve: EntropyCurve, path) -> Path:
    """Write the entropy curve as two-column CSV with a header row.

    Entropy values are formatted at 12 significant digits, enough to
    round-trip through the CSV for plotting and regression checks.
    """
    if not curve:
        raise EmptySequenceError("cannot emit an empty entropy curve")
    path = Path(path)
    lines = ["num_shots,total_entropy"]
    for num_shots, total in curve:
        lines.append(f"{num_shots},{total:.12g}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def segmentation_payload(seg: Segmentation, total_entropy: float) -> dict:
    """JSON-ready dict matching the on-disk segmentation schema."""
    return {
        "boundaries": list(seg.boundaries),
        "key_frames": key_frames(seg),
        "total_entropy": total_entropy,
    }
