"""Closed-form amplitude estimation and normalized similarity.

A template ``f`` is assumed to appear in data ``m`` as ``alpha * f`` plus
independent Gaussian fluctuations with per-sample standard deviation
``sigma_j``.  The amplitude maximizing the Gaussian-weighted correlation is
the weighted least-squares scale

    alpha = sum(m_j f_j / sigma_j**2) / sum(f_j**2 / sigma_j**2)

with one-sigma uncertainty ``1 / sqrt(sum(f_j**2 / sigma_j**2))``.  Dividing
both sequences by their Euclidean norms turns ``alpha`` into the cosine of
the angle between them (``alpha_normalized``), a scale-free similarity in
[-1, 1].

All sums go through :func:`math.fsum`, which is correctly rounded, so the
1e-9 identities below hold for windows of any practical length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, DegenerateSequenceError, DegenerateTemplateError

__all__ = [
    "TimeSeries",
    "Template",
    "AlphaEstimate",
    "NormalizedSequence",
    "alpha_estimate",
    "normalization_factor",
    "normalize",
    "alpha_normalized",
    "detection_threshold",
    "cross_correlation_oracle",
    "as_samples",
]


def as_samples(values, name: str = "samples", allow_empty: bool = False) -> np.ndarray:
    """Return ``values`` as a read-only 1-D float64 array, rejecting NaN/inf."""
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0 and not allow_empty:
        raise ContractError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ContractError(f"{name}[{bad}] is not a finite number")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Measured data: a finite, non-empty run of real samples.

    ``sample_rate`` (Hz) is metadata only; nothing numeric depends on it.
    """

    samples: np.ndarray
    sample_rate: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "samples", as_samples(self.samples))
        if self.sample_rate is not None:
            rate = float(self.sample_rate)
            if not (math.isfinite(rate) and rate > 0):
                raise ContractError(f"sample_rate must be positive and finite, got {self.sample_rate!r}")
            object.__setattr__(self, "sample_rate", rate)

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass(frozen=True)
class Template:
    """The sought function plus per-sample noise standard deviations.

    ``sigmas`` defaults to 1 everywhere, which makes the amplitude estimate
    the ordinary least-squares scale.
    """

    samples: np.ndarray
    sigmas: Optional[np.ndarray] = None

    def __post_init__(self):
        samples = as_samples(self.samples)
        if self.sigmas is None:
            sigmas = np.ones_like(samples)
            sigmas.setflags(write=False)
        else:
            sigmas = as_samples(self.sigmas, name="sigmas")
        if sigmas.shape != samples.shape:
            raise ContractError(
                f"samples and sigmas differ in length ({samples.size} vs {sigmas.size})"
            )
        if np.any(sigmas <= 0):
            raise ContractError("every sigma must be strictly positive")
        if not np.any(samples):
            raise DegenerateTemplateError("template is all zeros; alpha is undefined")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sigmas", sigmas)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def weighted_energy(self) -> float:
        """``sum(f_j**2 / sigma_j**2)``, the denominator of the estimate."""
        return math.fsum((self.samples / self.sigmas) ** 2)

    @property
    def delta_alpha(self) -> float:
        return 1.0 / math.sqrt(self.weighted_energy)

    __hash__ = None


@dataclass(frozen=True)
class AlphaEstimate:
    alpha: float
    delta_alpha: float
    lag: int = 0

    @property
    def interval(self) -> tuple[float, float]:
        """One-sigma confidence interval ``(alpha - delta, alpha + delta)``."""
        return (self.alpha - self.delta_alpha, self.alpha + self.delta_alpha)


@dataclass(frozen=True)
class NormalizedSequence:
    samples: np.ndarray
    original_norm: float = field(default=1.0)

    def __len__(self) -> int:
        return self.samples.size

    __hash__ = None


def alpha_estimate(template: Template, data_window: TimeSeries, lag: int = 0) -> AlphaEstimate:
    """Estimate the amplitude of ``template`` in ``data_window`` at ``lag``.

    The template is held fixed and the data is read from ``lag`` onward, so
    ``delta_alpha`` is the same at every lag.

    Raises
    ------
    ContractError
        If ``lag`` is negative or the data is shorter than
        ``len(template) + lag``.
    """
    if isinstance(lag, bool) or int(lag) != lag or lag < 0:
        raise ContractError(f"lag must be a non-negative integer, got {lag!r}")
    lag = int(lag)
    k = len(template)
    m = data_window.samples if isinstance(data_window, TimeSeries) else as_samples(data_window)
    if m.size < k + lag:
        raise ContractError(
            f"data window of length {m.size} cannot hold a template of length {k} at lag {lag}"
        )
    weights = 1.0 / template.sigmas**2
    energy = math.fsum(template.samples**2 * weights)
    if energy == 0.0:
        raise DegenerateTemplateError("template energy underflows to zero")
    numerator = math.fsum(m[lag : lag + k] * template.samples * weights)
    return AlphaEstimate(alpha=numerator / energy, delta_alpha=1.0 / math.sqrt(energy), lag=lag)


def normalization_factor(samples: Sequence[float]) -> float:
    """Euclidean norm of ``samples`` (0.0 for an all-zero sequence)."""
    arr = samples if isinstance(samples, np.ndarray) else as_samples(samples)
    if arr.size == 0:
        raise ContractError("cannot take the norm of an empty sequence")
    peak = float(np.max(np.abs(arr)))
    if peak == 0.0:
        return 0.0
    # rescale first so squares of tiny/huge samples neither underflow nor overflow
    scaled = arr / peak
    return peak * math.sqrt(math.fsum(scaled * scaled))


def normalize(samples: Sequence[float]) -> NormalizedSequence:
    """Divide ``samples`` by their Euclidean norm.

    >>> normalize([3, 4]).samples.tolist()
    [0.6, 0.8]
    """
    arr = as_samples(samples)
    zeta = normalization_factor(arr)
    if zeta == 0.0:
        raise DegenerateSequenceError("sequence has zero norm and cannot be normalized")
    out = arr / zeta
    out.setflags(write=False)
    return NormalizedSequence(samples=out, original_norm=zeta)


def alpha_normalized(template_window: Sequence[float], data_window: Sequence[float]) -> float:
    """Cosine similarity between two equal-length sequences.

    This is the amplitude estimate between the unit-norm versions of both
    sequences with unit sigmas; ``+1``/``-1`` iff one is a positive/negative
    multiple of the other.
    """
    f = normalize(template_window).samples
    m = normalize(data_window).samples
    if f.size != m.size:
        raise ContractError(f"windows differ in length ({f.size} vs {m.size})")
    return math.fsum(f * m)


def detection_threshold(template: Template) -> float:
    """Smallest amplitude counted as a detection: three times ``delta_alpha``."""
    energy = template.weighted_energy
    if energy == 0.0:
        raise DegenerateTemplateError("template energy underflows to zero")
    return 3.0 / math.sqrt(energy)


def cross_correlation_oracle(f: Sequence[float], g: Sequence[float], lag: int) -> float:
    """Plain discrete cross-correlation ``sum_j f[j] * g[j + lag]``.

    Indices falling outside ``g`` contribute zero.  Deliberately written as a
    loop over Python floats; it exists to cross-check the vectorized code.
    """
    f = [float(x) for x in f]
    g = [float(x) for x in g]
    terms = []
    for j, fj in enumerate(f):
        i = j + lag
        if 0 <= i < len(g):
            terms.append(fj * g[i])
    return math.fsum(terms)
