"""Slide a template across a series and count strong matches.

For a template of length ``k`` and data of length ``l`` there are ``l - k``
lags (``0 .. l-k-1``); at each one the template is compared with the data
window of the same length by :func:`alphamatch.core.alpha_normalized`.

A single profile is computed block-wise from the lag-by-sample product
matrix.  Growing the template one sample at a time (the prefix family
``f[:1], f[:2], ...``) lets every lag's dot product and window energy be
extended by a single term instead of recomputed, so a whole count-vs-length
curve costs ``O(l * max_len)`` flops in vectorized numpy.  Window energies
are only ever *added to*, never differenced, so an all-zero window keeps an
energy of exactly 0.0 and is reliably marked as skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import TimeSeries, as_samples
from .errors import ContractError, DegenerateTemplateError, TemplateTooLongError

__all__ = [
    "AlphaProfile",
    "MatchCurve",
    "DEFAULT_THRESHOLD",
    "alpha_profile",
    "count_matches",
    "match_curve",
]

DEFAULT_THRESHOLD = 0.98
_CHUNK = 1 << 20  # elements per block of window products


@dataclass(frozen=True)
class AlphaProfile:
    """Normalized alpha at every lag; NaN marks a skipped (zero-norm) window."""

    values: np.ndarray
    template_length: int
    data_length: int

    def __post_init__(self):
        if self.values.size != self.data_length - self.template_length:
            raise ContractError(
                f"profile has {self.values.size} entries, expected "
                f"{self.data_length - self.template_length}"
            )

    def __len__(self) -> int:
        return self.values.size

    @property
    def skipped(self) -> np.ndarray:
        return np.isnan(self.values)

    __hash__ = None


@dataclass(frozen=True)
class MatchCurve:
    """Match count as a function of template length.

    ``skipped`` lists template lengths whose prefix had zero norm; their
    count is recorded as 0.
    """

    points: tuple[tuple[int, int], ...]
    threshold: float
    source_label: str = "template"
    data_label: str = "data"
    skipped: tuple[int, ...] = field(default=())

    def __post_init__(self):
        points = tuple((int(k), int(c)) for k, c in self.points)
        lengths = [k for k, _ in points]
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise ContractError("template lengths must be strictly increasing")
        if any(c < 0 for _, c in points):
            raise ContractError("match counts must be non-negative")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "skipped", tuple(int(k) for k in self.skipped))

    @property
    def lengths(self) -> list[int]:
        return [k for k, _ in self.points]

    @property
    def counts(self) -> list[int]:
        return [c for _, c in self.points]

    @property
    def label(self) -> str:
        return f"{self.source_label}→{self.data_label}"

    def to_dict(self) -> dict:
        return {
            "source": self.source_label,
            "data": self.data_label,
            "threshold": self.threshold,
            "points": [[k, c] for k, c in self.points],
            "skipped": list(self.skipped),
        }


class _Neumaier:
    """Element-wise compensated running sums over a fixed number of slots."""

    def __init__(self, n: int):
        self.total = np.zeros(n)
        self.comp = np.zeros(n)

    def add(self, x: np.ndarray) -> None:
        # x updates the first len(x) slots only
        n = x.size
        s = self.total[:n]
        t = s + x
        self.comp[:n] += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
        self.total[:n] = t

    def value(self, n: int) -> np.ndarray:
        return self.total[:n] + self.comp[:n]


def _grow(template: np.ndarray, data: np.ndarray, max_len: int) -> Iterator[tuple[int, float, np.ndarray, np.ndarray]]:
    """Yield ``(k, template_energy, dots, window_energies)`` for k = 1..max_len.

    ``dots[t]`` and ``window_energies[t]`` cover lags ``t = 0 .. l-k-1``.
    """
    l = data.size
    squares = data * data
    dots = _Neumaier(l - 1)
    energy = _Neumaier(l - 1)
    f_terms = []
    for k in range(1, max_len + 1):
        fk = template[k - 1]
        n = l - k
        dots.add(fk * data[k - 1 : k - 1 + n])
        energy.add(squares[k - 1 : k - 1 + n])
        f_terms.append(fk * fk)
        yield k, math.fsum(f_terms), dots.value(n), energy.value(n)


def _normalized(template_energy: float, dots: np.ndarray, window_energy: np.ndarray) -> np.ndarray:
    out = np.full(dots.shape, np.nan)
    ok = window_energy > 0.0
    out[ok] = dots[ok] / (math.sqrt(template_energy) * np.sqrt(window_energy[ok]))
    return out


def _data_array(data) -> np.ndarray:
    return data.samples if isinstance(data, TimeSeries) else as_samples(data, name="data")


def _pow2_scaled(x: np.ndarray) -> np.ndarray:
    """Rescale by a power of two so the peak is in [0.5, 1); exact, and the cosine is unchanged."""
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    if peak == 0.0:
        return x
    return np.ldexp(x, -math.frexp(peak)[1])


def alpha_profile(template_samples: Sequence[float], data) -> AlphaProfile:
    """Normalized alpha of ``template_samples`` at every lag of ``data``.

    Parameters
    ----------
    template_samples : sequence of float
        Template of length ``k``; must have nonzero norm.
    data : TimeSeries or sequence of float
        Data of length ``l > k``.

    Returns
    -------
    AlphaProfile
        ``l - k`` values; windows with zero norm are NaN.
    """
    f = as_samples(template_samples, name="template")
    m = _data_array(data)
    k, l = f.size, m.size
    if k >= l:
        raise TemplateTooLongError(f"template length {k} must be shorter than data length {l}")
    if not np.any(f):
        raise DegenerateTemplateError("template has zero norm")
    f = _pow2_scaled(f)
    m = _pow2_scaled(m)
    windows = sliding_window_view(m, k)[: l - k]
    dots = np.empty(l - k)
    energy = np.empty(l - k)
    # row sums of a contiguous block use numpy's pairwise summation
    rows = max(1, _CHUNK // k)
    for start in range(0, l - k, rows):
        block = windows[start : start + rows]
        dots[start : start + rows] = (block * f).sum(axis=1)
        energy[start : start + rows] = (block * block).sum(axis=1)
    values = _normalized(math.fsum(f * f), dots, energy)
    values.setflags(write=False)
    return AlphaProfile(values=values, template_length=k, data_length=l)


def count_matches(profile, threshold: float = DEFAULT_THRESHOLD) -> int:
    """Number of non-skipped lags with ``|alpha_N| >= threshold``.

    ``>=`` rather than ``>``: exact self-matches land on 1.0 only up to
    rounding, so the boundary is not meaningful either way.
    """
    values = profile.values if isinstance(profile, AlphaProfile) else np.asarray(profile, dtype=float)
    with np.errstate(invalid="ignore"):
        return int(np.count_nonzero(np.abs(values) >= threshold))


def _check_threshold(threshold: float) -> float:
    threshold = float(threshold)
    if not (0.0 < threshold <= 1.0):
        raise ContractError(f"threshold must lie in (0, 1], got {threshold}")
    return threshold


def length_grid(min_len: int, max_len: int, step: int = 1) -> list[int]:
    for name, v in (("min_len", min_len), ("max_len", max_len), ("step", step)):
        if isinstance(v, bool) or int(v) != v:
            raise ContractError(f"{name} must be an integer, got {v!r}")
    if step < 1:
        raise ContractError(f"step must be >= 1, got {step}")
    if not 1 <= min_len <= max_len:
        raise ContractError(f"need 1 <= min_len <= max_len, got {min_len}, {max_len}")
    return list(range(int(min_len), int(max_len) + 1, int(step)))


def match_curve(
    template_source: Sequence[float],
    data,
    min_len: int = 10,
    max_len: Optional[int] = None,
    step: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
    source_label: str = "template",
    data_label: str = "data",
) -> MatchCurve:
    """Count matches of every prefix ``template_source[:k]`` along ``data``.

    ``k`` runs over ``min_len, min_len + step, ... <= max_len``
    (``max_len`` defaults to ``min(len(template_source), 200)``).
    """
    f = as_samples(template_source, name="template_source")
    m = _data_array(data)
    if max_len is None:
        max_len = min(f.size, 200)
    grid = length_grid(min_len, max_len, step)
    threshold = _check_threshold(threshold)
    if max_len > f.size:
        raise ContractError(f"max_len {max_len} exceeds template source length {f.size}")
    if max_len >= m.size:
        raise TemplateTooLongError(f"max_len {max_len} must be shorter than data length {m.size}")

    wanted = set(grid)
    points, skipped = [], []
    for k, f_energy, dots, w_energy in _grow(_pow2_scaled(f[:max_len]), _pow2_scaled(m), max_len):
        if k not in wanted:
            continue
        if f_energy == 0.0:
            points.append((k, 0))
            skipped.append(k)
            continue
        values = _normalized(f_energy, dots, w_energy)
        points.append((k, count_matches(values, threshold)))
    return MatchCurve(
        points=tuple(points),
        threshold=threshold,
        source_label=source_label,
        data_label=data_label,
        skipped=tuple(skipped),
    )
