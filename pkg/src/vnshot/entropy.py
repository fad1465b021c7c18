"""Von Neumann entropy of trace-normalized similarity matrices.

Three backends are provided:

* ``exact`` - eigendecomposition, O(n^3). The reference.
* ``taylor-dense`` - a truncated series in (I - rho) evaluated through
  exact traces of matrix powers, O(c * n^3). Same polynomial as the fast
  backend, used to validate it.
* ``taylor-stochastic`` - the same series with Hutchinson trace
  estimation (Rademacher probes), O(c * s * n^2). This is the backend
  that scales quadratically with matrix size.

Inputs below 33 rows always take the exact path regardless of
configuration: at that size the eigensolve is both faster and exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import EntropyDomainError

logger = logging.getLogger(__name__)

METHODS = ("exact", "taylor-dense", "taylor-stochastic")

# Below this dimension every entropy request is served by the exact backend.
EXACT_SIZE_CEILING = 32


@dataclass(frozen=True)
class EntropyConfig:
    """Backend selection and tuning knobs.

    c is the series truncation index, probes the Hutchinson probe count.
    eig_clamp is the floor under which eigenvalues are treated as zero in
    the exact backend.
    """

    method: str = "exact"
    c: int = 64
    probes: int = 32
    seed: int = 0
    eig_clamp: float = 1e-12

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown entropy method {self.method!r}; expected one of {METHODS}")
        if self.c < 3:
            raise ValueError(f"truncation index must be >= 3, got {self.c}")
        if self.probes < 1:
            raise ValueError(f"probe count must be >= 1, got {self.probes}")
        if self.eig_clamp < 0:
            raise ValueError(f"eigenvalue clamp must be >= 0, got {self.eig_clamp}")


@dataclass(frozen=True)
class DensityMatrix:
    """A symmetric matrix with unit trace (within 1e-9)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {values.shape}")
        if not np.allclose(values, values.T, atol=1e-9):
            raise ValueError("density matrix must be symmetric")
        trace = float(np.trace(values))
        if abs(trace - 1.0) > 1e-9:
            raise ValueError(f"density matrix trace must be 1, got {trace!r}")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def normalize(m) -> DensityMatrix:
    """Divide a similarity matrix by its trace (= n, the diagonal is all ones).

    Accepts a SimilarityMatrix or any square array whose diagonal is 1.
    """
    values = np.asarray(getattr(m, "values", m), dtype=np.float64)
    n = values.shape[0]
    return DensityMatrix(values / n)


def von_neumann_exact(rho: DensityMatrix, cfg: EntropyConfig | None = None) -> float:
    """Entropy -sum(lambda * ln lambda) over the eigenvalues of rho.

    Eigenvalues at or below cfg.eig_clamp (including any negative ones,
    which a similarity matrix can produce) contribute zero, the continuous
    extension of x*ln(x) at 0. A non-converging eigensolve surfaces as
    numpy.linalg.LinAlgError.
    """
    cfg = cfg or EntropyConfig()
    eigs = np.linalg.eigvalsh(rho.values)
    live = eigs[eigs > cfg.eig_clamp]
    if live.size == 0:
        return 0.0
    return float(-(live * np.log(live)).sum())


def negative_eigenvalue_count(rho: DensityMatrix, cfg: EntropyConfig | None = None) -> int:
    """Diagnostic: how many eigenvalues the exact backend clamped from below 0."""
    eigs = np.linalg.eigvalsh(rho.values)
    return int((eigs < 0.0).sum())


def xlnx_taylor(x: float, c: int = 64) -> float:
    """Series approximation of x*ln(x) on [0, 2], truncated at index c.

    The expansion about x=1 is
        x - 1 + sum_{k=2}^{c-1} (1-x)^k / (k(k-1)) + (1-x)^c / (c-1),
    where the last term collapses the series tail. Evaluation groups the
    linear term with the sum, (y^k - y)/(k(k-1)), which is algebraically
    identical but makes the telescoping cancellation exact in floating
    point: the result is exactly 0.0 at both x=0 and x=1 for every c.
    """
    if c < 3:
        raise ValueError(f"truncation index must be >= 3, got {c}")
    if not 0.0 <= x <= 2.0:
        raise EntropyDomainError(f"series argument must lie in [0, 2], got {x!r}")
    y = 1.0 - x
    total = 0.0
    y_pow = y
    for k in range(2, c):
        y_pow *= y
        total += (y_pow - y) / (k * (k - 1))
    y_pow *= y  # y^c
    total += (y_pow - y) / (c - 1)
    return total


def trace_powers_dense(a: np.ndarray, c: int) -> np.ndarray:
    """Exact traces [tr(a^2), ..., tr(a^c)] via repeated matrix products."""
    a = np.asarray(a, dtype=np.float64)
    if c < 2:
        raise ValueError(f"need c >= 2, got {c}")
    traces = np.empty(c - 1)
    power = a
    for k in range(2, c + 1):
        power = power @ a
        traces[k - 2] = np.trace(power)
    return traces


def trace_powers_stochastic(a: np.ndarray, c: int, probes: int, seed: int) -> np.ndarray:
    """Hutchinson estimates of [tr(a^2), ..., tr(a^c)].

    Each estimate averages z^T a^k z over `probes` Rademacher vectors z,
    built from k matrix-vector products per probe. The probe matrix and
    the reduction order are fixed by the seed, so results are bit-stable
    for a given seed.
    """
    a = np.asarray(a, dtype=np.float64)
    if c < 2:
        raise ValueError(f"need c >= 2, got {c}")
    if probes < 1:
        raise ValueError(f"need probes >= 1, got {probes}")
    n = a.shape[0]
    rng = np.random.default_rng(seed)
    z = (rng.integers(0, 2, size=(n, probes)) * 2 - 1).astype(np.float64)
    w = a @ z
    estimates = np.empty(c - 1)
    for k in range(2, c + 1):
        w = a @ w
        # per-probe quadratic forms, summed in probe order
        estimates[k - 2] = float((z * w).sum(axis=0).sum()) / probes
    return estimates


def gershgorin_interval(values: np.ndarray) -> tuple[float, float]:
    """Disc-theorem enclosure [lo, hi] of a symmetric matrix's spectrum."""
    values = np.asarray(values, dtype=np.float64)
    diag = np.diag(values)
    radii = np.abs(values).sum(axis=1) - np.abs(diag)
    return float((diag - radii).min()), float((diag + radii).max())


def von_neumann_approx(rho: DensityMatrix, cfg: EntropyConfig | None = None) -> float:
    """Series entropy through a trace backend.

    Spectrally, sum_q f(lambda_q) for the truncated series f equals
        (tr(rho) - n) + sum_{k=2}^{c-1} tr(B^k)/(k(k-1)) + tr(B^c)/(c-1)
    with B = I - rho; the entropy is the negative of that. The linear term
    uses tr(rho) = 1 exactly, never an estimate. Traces of B powers come
    from the dense backend unless cfg.method is taylor-stochastic.

    The series needs eigenvalues in [0, 2]; violations that the diagonal
    proves outright (a Rayleigh bound) raise EntropyDomainError. Negative
    eigenvalues that no cheap bound can rule out degrade accuracy
    silently, which is inherent to trace-only evaluation.
    """
    cfg = cfg or EntropyConfig(method="taylor-dense")
    n = rho.n
    diag = np.diag(rho.values)
    if diag.min() < -1e-9:
        raise EntropyDomainError(
            f"diagonal entry {diag.min()!r} proves a negative eigenvalue"
        )
    if diag.max() > 2.0 + 1e-9:
        raise EntropyDomainError(
            f"diagonal entry {diag.max()!r} proves an eigenvalue above 2"
        )
    b = np.eye(n) - rho.values
    if cfg.method == "taylor-stochastic":
        logger.debug(
            "stochastic backend: eigenvalue range of the %dx%d input not verified", n, n
        )
        traces = trace_powers_stochastic(b, cfg.c, cfg.probes, cfg.seed)
    else:
        lo, hi = gershgorin_interval(b)
        if lo < -1.0 - 1e-9 or hi > 1.0 + 1e-9:
            logger.debug(
                "Gershgorin interval [%g, %g] of I-rho not certified inside [-1, 1]",
                lo,
                hi,
            )
        traces = trace_powers_dense(b, cfg.c)
    total = 1.0 - n
    for k in range(2, cfg.c):
        total += traces[k - 2] / (k * (k - 1))
    total += traces[cfg.c - 2] / (cfg.c - 1)
    return -total


def von_neumann(rho: DensityMatrix, cfg: EntropyConfig | None = None) -> float:
    """Route to a backend: exact when configured or when n <= 32, else series."""
    cfg = cfg or EntropyConfig()
    if cfg.method == "exact" or rho.n <= EXACT_SIZE_CEILING:
        return von_neumann_exact(rho, cfg)
    return von_neumann_approx(rho, cfg)
