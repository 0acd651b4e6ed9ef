"""Synthetic signals and the 3-sigma detection-limit experiment.

Randomness comes from numpy's ``PCG64`` bit generator seeded with a plain
integer (``numpy.random.default_rng(seed)``); normal deviates use numpy's
ziggurat sampler.  Both are stable across platforms for a given numpy
release, so seeded outputs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import Template, TimeSeries, alpha_estimate, as_samples, detection_threshold
from .errors import ContractError

__all__ = [
    "SynthesisSpec",
    "gaussian_noise",
    "inject",
    "synthesize",
    "periodic_surrogate",
    "limit_template",
    "coverage_experiment",
    "CoverageResult",
    "HARMONICS",
    "SURROGATE_RATE",
]

SURROGATE_RATE = 11250.0

# Relative amplitudes of harmonics 1..8 per surrogate class.  Each class
# emphasizes a different pair of harmonics, a crude stand-in for formants;
# the tables were checked so that aligned 64-sample windows of different
# classes have |cosine| well below 0.9.
HARMONICS = {
    1: (1.00, 0.55, 0.80, 0.20, 0.35, 0.10, 0.25, 0.05),
    2: (0.60, 1.00, 0.15, 0.45, 0.10, 0.40, 0.05, 0.20),
    3: (1.00, 0.15, 0.30, 0.90, 0.05, 0.20, 0.45, 0.10),
    4: (0.45, 0.70, 1.00, 0.10, 0.50, 0.05, 0.15, 0.35),
    5: (1.00, 0.90, 0.05, 0.30, 0.60, 0.35, 0.10, 0.15),
}
VIBRATO_HZ = 5.0
VIBRATO_DEPTH = 0.3  # radians of phase excursion
JITTER = 0.01  # noise std as a fraction of the clean waveform's rms
PEAK = 0.8  # clean waveform peak, leaves PCM16 headroom for the jitter


def _harmonic_phases(class_id: int) -> np.ndarray:
    return np.arange(8) * (2 * np.pi / 8) * (((class_id * 7) % 5 + 1) / 3)


@dataclass(frozen=True)
class SynthesisSpec:
    """Recipe for a noise series with an optional injected template."""

    length: int
    noise_sigma: float = 1.0
    seed: int = 0
    template: Optional[Sequence[float]] = None
    alpha: float = 0.0
    offset: int = 0

    def __post_init__(self):
        if self.length < 1:
            raise ContractError("length must be >= 1")
        if not self.noise_sigma > 0:
            raise ContractError("noise_sigma must be positive")
        if self.template is not None and self.offset + len(self.template) > self.length:
            raise ContractError("injected template does not fit inside the series")


def gaussian_noise(length: int, sigma: float = 1.0, seed: int = 0, sample_rate: Optional[float] = None) -> TimeSeries:
    """``length`` i.i.d. Normal(0, sigma**2) samples, deterministic in ``seed``.

    Samples for different sigmas and the same seed are exact multiples of
    each other.
    """
    if isinstance(length, bool) or int(length) != length or length < 1:
        raise ContractError(f"length must be a positive integer, got {length!r}")
    if not (math.isfinite(sigma) and sigma > 0):
        raise ContractError(f"sigma must be positive, got {sigma!r}")
    z = np.random.default_rng(seed).standard_normal(int(length))
    return TimeSeries(z * sigma, sample_rate)


def inject(noise: TimeSeries, template: Sequence[float], alpha: float, offset: int = 0) -> TimeSeries:
    """Return ``noise`` with ``alpha * template`` added starting at ``offset``."""
    f = as_samples(template, name="template")
    if offset < 0 or offset + f.size > len(noise):
        raise ContractError(
            f"template of length {f.size} at offset {offset} overruns series of length {len(noise)}"
        )
    out = noise.samples.copy()
    if alpha != 0:
        out[offset : offset + f.size] += alpha * f
    return TimeSeries(out, noise.sample_rate)


def synthesize(spec: SynthesisSpec, sample_rate: Optional[float] = None) -> TimeSeries:
    series = gaussian_noise(spec.length, spec.noise_sigma, spec.seed, sample_rate)
    if spec.template is None:
        return series
    return inject(series, spec.template, spec.alpha, spec.offset)


def periodic_surrogate(class_id: int, length: int, sample_rate: float = SURROGATE_RATE, seed: int = 0) -> TimeSeries:
    """Vowel-like quasi-periodic waveform for one of five classes.

    Class ``c`` has fundamental ``100 + 30 c`` Hz, eight harmonics weighted
    by ``HARMONICS[c]``, a slow 5 Hz vibrato, and additive Gaussian jitter
    of 1% of the clean rms drawn from ``seed``.  The clean waveform peaks at
    0.8 so the series survives a PCM16 round trip unclipped.
    """
    if class_id not in HARMONICS:
        raise ContractError(f"class_id must be one of 1..5, got {class_id!r}")
    if length < 1:
        raise ContractError("length must be >= 1")
    if not sample_rate > 0:
        raise ContractError("sample_rate must be positive")
    t = np.arange(length) / sample_rate
    f0 = 100.0 + 30.0 * class_id
    phase = 2 * np.pi * f0 * t + VIBRATO_DEPTH * np.sin(2 * np.pi * VIBRATO_HZ * t)
    phases = _harmonic_phases(class_id)
    clean = np.zeros(length)
    for h, amp in enumerate(HARMONICS[class_id]):
        clean += amp * np.sin((h + 1) * phase + phases[h])
    clean *= PEAK / float(np.max(np.abs(clean)))
    rms = math.sqrt(float(np.mean(clean**2)))
    jitter = np.random.default_rng(seed).standard_normal(length) * (JITTER * rms)
    return TimeSeries(clean + jitter, sample_rate)


def limit_template(delta_alpha: float = 0.045, length: int = 64, sigma: float = 1.0) -> Template:
    """A smooth pulse scaled so its amplitude uncertainty equals ``delta_alpha``.

    The shape is one period of a Hann-windowed sine; only its energy
    ``sum(f**2) / sigma**2 = 1 / delta_alpha**2`` matters.
    """
    if not delta_alpha > 0:
        raise ContractError("delta_alpha must be positive")
    if length < 2:
        raise ContractError("length must be >= 2")
    x = np.arange(length)
    shape = np.hanning(length + 2)[1:-1] * np.sin(2 * np.pi * x / length + 0.5)
    shape /= math.sqrt(math.fsum(shape**2))
    samples = shape * (sigma / delta_alpha)
    return Template(samples, np.full(length, float(sigma)))


@dataclass(frozen=True)
class CoverageResult:
    delta_alpha: float
    threshold: float
    coverage_1sigma: float
    coverage_3sigma: float
    mean_alpha: float
    trials: int
    alpha: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "delta_alpha": self.delta_alpha,
            "threshold": self.threshold,
            "coverage_1sigma": self.coverage_1sigma,
            "coverage_3sigma": self.coverage_3sigma,
            "mean_alpha": self.mean_alpha,
            "trials": self.trials,
        }


def coverage_experiment(
    template: Template,
    alpha: float = 0.14,
    trials: int = 1000,
    seed: int = 0,
    sigma: float = 1.0,
    length: Optional[int] = None,
    offset: Optional[int] = None,
) -> CoverageResult:
    """Inject ``alpha * template`` into noise and re-estimate it ``trials`` times.

    Trial ``i`` draws its noise with seed ``seed + i``.  The estimate is
    taken at the true offset, so the estimator is exactly Normal(alpha,
    delta_alpha**2) under the noise model.
    """
    if trials < 1:
        raise ContractError("trials must be >= 1")
    k = len(template)
    if length is None:
        length = 4 * k
    if offset is None:
        offset = (length - k) // 2
    estimates = np.empty(trials)
    for i in range(trials):
        noise = gaussian_noise(length, sigma, seed + i)
        data = inject(noise, template.samples, alpha, offset)
        estimates[i] = alpha_estimate(template, data, offset).alpha
    delta = template.delta_alpha
    err = np.abs(estimates - alpha)
    return CoverageResult(
        delta_alpha=delta,
        threshold=detection_threshold(template),
        coverage_1sigma=float(np.mean(err <= delta)),
        coverage_3sigma=float(np.mean(err <= 3 * delta)),
        mean_alpha=float(np.mean(estimates)),
        trials=trials,
        alpha=alpha,
    )
