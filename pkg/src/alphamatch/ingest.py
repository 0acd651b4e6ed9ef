"""Reading and writing series and match-curve files.

Supported series formats:

``wav_pcm16_mono``
    RIFF/WAVE, PCM, one channel, 16 bits, little endian.  Samples map to
    ``int16 / 32768`` in [-1, 1).  Writing rounds to the nearest code and
    saturates, so 1.0 is stored as 32767 (i.e. 32767/32768 on read-back).
``csv_scalar``
    One number per line, ``.`` as decimal separator, optional ``sample``
    header line.  Written with 17 significant digits (exact round trip).
``json_series``
    ``{"samples": [...], "sample_rate": <optional number>}``.

Every writer goes through a temporary file in the destination directory and
an atomic rename, so a failed write never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import json
import os
import struct
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .core import TimeSeries
from .errors import ContractError, ParseError, UnsupportedFormatError
from .matcher import MatchCurve

__all__ = [
    "SeriesFile",
    "FORMATS",
    "read_series",
    "write_series",
    "write_curves",
    "curves_to_json",
    "atomic_write",
]

FORMATS = ("wav_pcm16_mono", "csv_scalar", "json_series")
_EXTENSIONS = {".wav": "wav_pcm16_mono", ".csv": "csv_scalar", ".json": "json_series"}

PathLike = Union[str, os.PathLike]


@dataclass(frozen=True)
class SeriesFile:
    path: Path
    format: str

    @classmethod
    def of(cls, path: PathLike, format: Optional[str] = None) -> "SeriesFile":
        path = Path(path)
        if format is None:
            format = _EXTENSIONS.get(path.suffix.lower())
            if format is None:
                raise UnsupportedFormatError(
                    f"cannot infer series format from extension {path.suffix!r} of {path}"
                )
        elif format not in FORMATS:
            raise UnsupportedFormatError(f"unknown series format {format!r}")
        return cls(path, format)


def _as_file(file, format=None) -> SeriesFile:
    return file if isinstance(file, SeriesFile) else SeriesFile.of(file, format)


@contextmanager
def atomic_write(path: PathLike, mode: str = "w"):
    """Open a temp file next to ``path``; rename it over ``path`` on success."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        kwargs = {} if "b" in mode else {"encoding": "utf-8", "newline": ""}
        with os.fdopen(fd, mode, **kwargs) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


# -- WAV ----------------------------------------------------------------------

def _parse_wav(raw: bytes, path) -> TimeSeries:
    if len(raw) < 12:
        raise ParseError("file too short for a RIFF header", path, len(raw))
    if raw[0:4] != b"RIFF":
        raise ParseError("missing 'RIFF' tag", path, 0)
    if raw[8:12] != b"WAVE":
        raise ParseError("missing 'WAVE' form type", path, 8)

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = pos + 8
        if chunk_id == b"fmt ":
            if size < 16 or body + 16 > len(raw):
                raise ParseError("truncated fmt chunk", path, pos)
            fmt = struct.unpack_from("<HHIIHH", raw, body)
            fmt_offset = pos
        elif chunk_id == b"data":
            if body + size > len(raw):
                raise ParseError(
                    f"data chunk declares {size} bytes but only {len(raw) - body} remain",
                    path,
                    body,
                )
            data = (body, size)
            break
        # other chunks (LIST, fact, ...) are skipped; bodies are word aligned
        pos = body + size + (size & 1)

    if fmt is None:
        raise ParseError("no fmt chunk found", path, pos)
    if data is None:
        raise ParseError("no data chunk found", path, pos)
    tag, channels, rate, _, block_align, bits = fmt
    if tag != 1:
        raise UnsupportedFormatError(f"{path}: only PCM (format tag 1) is supported, got {tag}")
    if channels != 1:
        raise UnsupportedFormatError(f"{path}: only mono WAV is supported, got {channels} channels")
    if bits != 16:
        raise UnsupportedFormatError(f"{path}: only 16-bit PCM is supported, got {bits} bits")
    if block_align != 2:
        raise ParseError(f"block_align {block_align} inconsistent with mono PCM16", path, fmt_offset + 20)
    body, size = data
    if size % 2:
        raise ParseError("odd-sized PCM16 data chunk", path, body + size - 1)
    if size == 0:
        raise ContractError(f"{path}: WAV file contains no samples")
    pcm = np.frombuffer(raw, dtype="<i2", count=size // 2, offset=body)
    return TimeSeries(pcm.astype(np.float64) / 32768.0, float(rate) if rate else None)


def _wav_bytes(series: TimeSeries) -> bytes:
    codes = np.clip(np.round(series.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = codes.tobytes()
    rate = int(round(series.sample_rate)) if series.sample_rate else 44100
    fmt = struct.pack("<HHIIHH", 1, 1, rate, rate * 2, 2, 16)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", len(body)) + body


# -- text formats ---------------------------------------------------------------

def _parse_csv(text: str, path) -> TimeSeries:
    values = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        if lineno == 1 and line.lower() == "sample":
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ParseError(f"not a number: {line!r}", path, lineno, unit="line") from None
    if not values:
        raise ContractError(f"{path}: series is empty")
    try:
        return TimeSeries(values)
    except ContractError as exc:
        raise ParseError(str(exc), path) from None


def _parse_json(text: str, path) -> TimeSeries:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, unit="line") from None
    if not isinstance(obj, dict) or "samples" not in obj:
        raise ParseError("expected an object with a 'samples' field", path)
    samples = obj["samples"]
    if not isinstance(samples, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in samples
    ):
        raise ParseError("'samples' must be an array of numbers", path)
    if not samples:
        raise ContractError(f"{path}: series is empty")
    return TimeSeries(samples, obj.get("sample_rate"))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_series(file, format: Optional[str] = None) -> TimeSeries:
    """Read a series from ``file`` (a path or :class:`SeriesFile`)."""
    sf = _as_file(file, format)
    if sf.format == "wav_pcm16_mono":
        return _parse_wav(sf.path.read_bytes(), sf.path)
    text = sf.path.read_text(encoding="utf-8")
    if sf.format == "csv_scalar":
        return _parse_csv(text, sf.path)
    return _parse_json(text, sf.path)


def write_series(series: TimeSeries, file, format: Optional[str] = None) -> None:
    """Write ``series`` to ``file``; see the module docstring for formats."""
    sf = _as_file(file, format)
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    if sf.format == "wav_pcm16_mono":
        with atomic_write(sf.path, "wb") as fh:
            fh.write(_wav_bytes(series))
    elif sf.format == "csv_scalar":
        with atomic_write(sf.path) as fh:
            fh.write("sample\n")
            fh.writelines(_fmt(x) + "\n" for x in series.samples)
    else:
        obj = {"samples": [float(x) for x in series.samples]}
        if series.sample_rate is not None:
            obj["sample_rate"] = series.sample_rate
        with atomic_write(sf.path) as fh:
            json.dump(obj, fh)
            fh.write("\n")


def curves_to_json(curves: Sequence[MatchCurve]) -> list:
    return [c.to_dict() for c in curves]


def write_curves(curves: Iterable[MatchCurve], path: PathLike, format: Optional[str] = None) -> None:
    """Write match curves as CSV (shared length grid, one column per curve) or JSON.

    ``format`` is ``"csv"`` or ``"json"``; by default it follows the file
    extension.
    """
    curves = list(curves)
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format == "json":
        with atomic_write(path) as fh:
            json.dump(curves_to_json(curves), fh, indent=1)
            fh.write("\n")
        return
    if format != "csv":
        raise ContractError(f"curve format must be 'csv' or 'json', got {format!r}")
    grid = curves[0].lengths if curves else []
    for c in curves[1:]:
        if c.lengths != grid:
            raise ContractError(f"curve {c.label} does not share the length grid; use JSON")
    with atomic_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["length"] + [c.label for c in curves])
        for i, k in enumerate(grid):
            writer.writerow([k] + [c.counts[i] for c in curves])
