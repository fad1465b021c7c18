"""Scoring extracted key frames against manually annotated ground truth.

Matching is by shot membership, not frame equality: an extracted frame
matches a ground-truth shot if it falls inside that shot's index range.
The first extracted frame landing in a shot counts as matched (N_et);
every further frame in an already-matched shot counts as a repeat (N_ee).

    effective information rate  R = N_et / N_gt
    redundancy rate             P = N_ee / (N_ee + N_et)   (0 when nothing
                                                            was extracted)
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

from .errors import GroundTruthParseError, InvalidRangeError, SchemaViolationError


@dataclass(frozen=True)
class GroundTruth:
    """Reference shot boundaries (with sentinel n) and one key frame per shot."""

    n: int
    shot_boundaries: tuple[int, ...]
    key_frames: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "shot_boundaries", tuple(int(x) for x in self.shot_boundaries))
        object.__setattr__(self, "key_frames", tuple(int(x) for x in self.key_frames))
        b = self.shot_boundaries
        if self.n < 1:
            raise SchemaViolationError(f"field 'n': must be >= 1, got {self.n}")
        if len(b) < 2 or b[0] != 0 or b[-1] != self.n:
            raise SchemaViolationError(
                f"field 'shot_boundaries': must run from 0 to n={self.n}, got {list(b)}"
            )
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise SchemaViolationError(
                f"field 'shot_boundaries': must be strictly increasing, got {list(b)}"
            )
        if len(self.key_frames) != self.num_shots:
            raise SchemaViolationError(
                f"field 'key_frames': expected one per shot ({self.num_shots}), "
                f"got {len(self.key_frames)}"
            )
        for shot, kf in enumerate(self.key_frames):
            if not b[shot] <= kf < b[shot + 1]:
                raise SchemaViolationError(
                    f"field 'key_frames[{shot}]': index {kf} lies outside shot "
                    f"[{b[shot]}, {b[shot + 1]})"
                )

    @property
    def num_shots(self) -> int:
        return len(self.shot_boundaries) - 1

    def shot_of(self, frame_index: int) -> int:
        if not 0 <= frame_index < self.n:
            raise InvalidRangeError(
                f"extracted index {frame_index} outside [0, {self.n})"
            )
        return bisect_right(self.shot_boundaries, frame_index) - 1


@dataclass(frozen=True)
class MatchResult:
    """Counts and rates from matching one extraction against ground truth."""

    n_et: int
    n_ee: int
    n_gt: int
    r: float
    p: float
    per_shot: tuple[tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "N_et": self.n_et,
            "N_ee": self.n_ee,
            "N_gt": self.n_gt,
            "R": self.r,
            "P": self.p,
            "per_shot": [list(group) for group in self.per_shot],
        }


def match_keyframes(extracted, gt: GroundTruth) -> MatchResult:
    """Assign extracted frames to ground-truth shots and compute R and P.

    Extracted indices are processed in ascending order so "first frame in
    a shot" is well defined regardless of input ordering.
    """
    per_shot: list[list[int]] = [[] for _ in range(gt.num_shots)]
    for idx in sorted(int(i) for i in extracted):
        per_shot[gt.shot_of(idx)].append(idx)
    n_et = sum(1 for group in per_shot if group)
    n_ee = sum(len(group) - 1 for group in per_shot if group)
    r = n_et / gt.num_shots
    p = n_ee / (n_ee + n_et) if (n_ee + n_et) > 0 else 0.0
    return MatchResult(
        n_et=n_et,
        n_ee=n_ee,
        n_gt=gt.num_shots,
        r=r,
        p=p,
        per_shot=tuple(tuple(group) for group in per_shot),
    )


def _load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise GroundTruthParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroundTruthParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaViolationError(f"{path}: top level must be a JSON object")
    return data


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _int_list(data: dict, key: str, path) -> list[int]:
    value = data.get(key)
    if not isinstance(value, list) or not all(_is_int(v) for v in value):
        raise SchemaViolationError(f"{path}: field {key!r} must be a list of integers")
    return value


def load_ground_truth(path) -> GroundTruth:
    """Read and validate {"n": int, "shot_boundaries": [...], "key_frames": [...]}."""
    data = _load_json(path)
    n = data.get("n")
    if not _is_int(n):
        raise SchemaViolationError(f"{path}: field 'n' must be an integer")
    return GroundTruth(
        n=n,
        shot_boundaries=tuple(_int_list(data, "shot_boundaries", path)),
        key_frames=tuple(_int_list(data, "key_frames", path)),
    )


def load_predicted(path) -> list[int]:
    """Read a predicted key-frame list: {"key_frames": [...]}."""
    data = _load_json(path)
    return _int_list(data, "key_frames", path)


def score_external(predicted_path, gt_path) -> MatchResult:
    """Score an externally produced key-frame file against a ground-truth file.

    This is the hook for side-by-side comparisons with other extractors:
    any tool that emits {"key_frames": [...]} can be scored identically.
    """
    gt = load_ground_truth(gt_path)
    predicted = load_predicted(predicted_path)
    return match_keyframes(predicted, gt)
