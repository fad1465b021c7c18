"""Shot segmentation and key-frame extraction from frame-similarity entropy."""

__version__ = "0.1.0"

from .entropy import (
    DensityMatrix,
    EntropyConfig,
    normalize,
    trace_powers_dense,
    trace_powers_stochastic,
    von_neumann,
    von_neumann_approx,
    von_neumann_exact,
    xlnx_taylor,
)
from .evaluation import GroundTruth, MatchResult, load_ground_truth, match_keyframes, score_external
from .ingest import SampledFrame, SamplingConfig, sample_from_decoder, sample_from_directory, to_grayscale
from .phash import HashMatrix, dct2d, hamming, idct2d, perceptual_hash, similarity
from .segmentation import (
    SearchConfig,
    Segmentation,
    StopRule,
    beam_search_segment,
    detect_stop,
    emit_curve,
    key_frames,
    segment_entropy,
)
from .simmatrix import SimilarityMatrix, build_similarity_matrix, load_cache, render_grayscale, save_cache

__all__ = [
    "__version__",
    "DensityMatrix",
    "EntropyConfig",
    "GroundTruth",
    "HashMatrix",
    "MatchResult",
    "SampledFrame",
    "SamplingConfig",
    "SearchConfig",
    "Segmentation",
    "SimilarityMatrix",
    "StopRule",
    "beam_search_segment",
    "build_similarity_matrix",
    "dct2d",
    "detect_stop",
    "emit_curve",
    "hamming",
    "idct2d",
    "key_frames",
    "load_cache",
    "load_ground_truth",
    "match_keyframes",
    "normalize",
    "perceptual_hash",
    "render_grayscale",
    "sample_from_decoder",
    "sample_from_directory",
    "save_cache",
    "score_external",
    "segment_entropy",
    "similarity",
    "to_grayscale",
    "trace_powers_dense",
    "trace_powers_stochastic",
    "von_neumann",
    "von_neumann_approx",
    "von_neumann_exact",
    "xlnx_taylor",
]
