"""On-disk measurement container and raw-recording conversion.

The "RVC1" container is a text header followed by a binary payload of
little-endian float64 pairs (real, imag) in row-major [slow time, step,
channel] order. Raw recordings arrive as per-antenna-pair range profiles
and are converted to stepped-frequency cubes by digital down-conversion
and symmetric spectral truncation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .core import RadarConfig, derive_params, radar_config_from_entries, radar_config_to_entries
from .kvfile import format_kv, parse_kv, read_kv
from .simulate import MeasurementCube, Scene, scene_from_entries, scene_to_entries

RVC_MAGIC = "RVC1"
_HEADER_END = b"end_header\n"


class DataError(Exception):
    """Recording data is structurally unusable."""


class RVCFormatError(DataError):
    """Malformed measurement container."""


def write_container(
    cube: MeasurementCube,
    path: str | os.PathLike,
    meta: Mapping[str, str] | None = None,
) -> None:
    """Write a cube (and its ground truth, when present) losslessly.

    ``meta`` entries (e.g. a scenario id) are stored under ``meta.`` keys.
    """
    entries: dict[str, str] = {}
    l, k, m = cube.samples.shape
    entries["l"] = str(l)
    entries["m"] = str(m)
    entries.update(radar_config_to_entries(cube.config))
    entries["slow_time"] = ",".join(repr(float(t)) for t in cube.slow_time)
    if cube.ground_truth is not None:
        for key, value in scene_to_entries(cube.ground_truth).items():
            entries[f"truth.{key}"] = value
    for key in sorted(meta or {}):
        entries[f"meta.{key}"] = str(meta[key])
    header = RVC_MAGIC + "\n" + format_kv(entries)
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(_HEADER_END)
        fh.write(np.ascontiguousarray(cube.samples, dtype="<c16").tobytes())


def _split_header(data: bytes, path) -> tuple[dict[str, str], int]:
    head_end = data.find(_HEADER_END)
    if head_end < 0:
        raise RVCFormatError(f"{path}: missing end_header marker")
    header_text = data[:head_end].decode("utf-8", errors="replace")
    first, _, rest = header_text.partition("\n")
    if first.strip() != RVC_MAGIC:
        raise RVCFormatError(f"{path}: bad magic {first.strip()!r}, expected {RVC_MAGIC!r}")
    try:
        entries = parse_kv(rest)
    except ValueError as exc:
        raise RVCFormatError(f"{path}: malformed header: {exc}") from exc
    return entries, head_end + len(_HEADER_END)


def read_header(path: str | os.PathLike) -> dict[str, str]:
    """Header entries only (cheap way to get meta/ground-truth keys)."""
    entries, _ = _split_header(Path(path).read_bytes(), path)
    return entries


def read_container(path: str | os.PathLike) -> MeasurementCube:
    """Read and strictly validate an "RVC1" container."""
    data = Path(path).read_bytes()
    entries, payload_offset = _split_header(data, path)
    try:
        l = int(entries["l"])
        m = int(entries["m"])
        cfg = radar_config_from_entries(entries)
    except (KeyError, ValueError) as exc:
        raise RVCFormatError(f"{path}: bad or missing header field: {exc}") from exc
    if m != cfg.m_r * cfg.m_t:
        raise RVCFormatError(
            f"{path}: header m={m} inconsistent with m_r*m_t={cfg.m_r * cfg.m_t}"
        )
    expected = l * cfg.k * m * 16
    actual = len(data) - payload_offset
    if actual != expected:
        raise RVCFormatError(
            f"{path}: payload holds {actual} bytes but the header promises "
            f"{expected} (l*k*m complex128) starting at byte offset {payload_offset}"
        )
    samples = (
        np.frombuffer(data, dtype="<c16", count=l * cfg.k * m, offset=payload_offset)
        .reshape(l, cfg.k, m)
        .copy()
    )
    if "slow_time" not in entries:
        raise RVCFormatError(f"{path}: header lacks the slow_time vector")
    slow_time = np.array([float(v) for v in entries["slow_time"].split(",")])
    if slow_time.size != l:
        raise RVCFormatError(
            f"{path}: slow_time has {slow_time.size} entries, header promises {l}"
        )
    truth = _truth_from_entries(entries)
    return MeasurementCube(samples, slow_time, cfg, ground_truth=truth)


def _truth_from_entries(entries: dict[str, str]) -> Scene | None:
    truth_entries = {
        key[len("truth.") :]: value
        for key, value in entries.items()
        if key.startswith("truth.")
    }
    if not truth_entries:
        return None
    scene, _ = scene_from_entries(truth_entries)
    return scene


def downconvert_decimate(
    profiles: np.ndarray, cfg: RadarConfig, f_s_ft: float
) -> np.ndarray:
    """Recover stepped-frequency samples from fast-time range profiles.

    Mixes the profile down by the center frequency, Fourier transforms over
    fast time and keeps the ``k`` bins inside [-b/2, b/2], symmetric about
    DC with the extra bin on the positive side when the count is even. The
    output is ordered by ascending frequency so index k maps to the tone
    f0 + k * delta_f. Works on any leading batch shape; the profile axis is
    the last one.
    """
    profiles = np.asarray(profiles)
    n = cfg.n
    if profiles.shape[-1] != n:
        raise ValueError(
            f"profile length {profiles.shape[-1]} does not match n={n}"
        )
    if f_s_ft <= cfg.b:
        raise ValueError("fast-time rate f_s_ft must exceed the bandwidth b")
    derived = derive_params(cfg)
    carrier = np.exp(-2j * np.pi * derived.f_c * np.arange(n) / f_s_ft)
    spectrum = np.fft.fft(profiles * carrier, axis=-1)
    k = cfg.k
    n_pos = k // 2
    n_neg = k - 1 - n_pos
    spacing = f_s_ft / n
    half_band = cfg.b / 2 * (1 + 1e-9)
    if n_pos * spacing > half_band or n_neg * spacing > half_band:
        raise ValueError(
            f"[-b/2, b/2] holds fewer than k={k} bins at spacing {spacing:.4g} Hz"
        )
    offsets = np.arange(-n_neg, n_pos + 1)
    return spectrum[..., offsets % n] / n


def assemble_virtual_array(
    per_pair: Mapping[tuple[int, int], np.ndarray], cfg: RadarConfig
) -> np.ndarray:
    """Stack per-(tx, rx) signals into virtual channel order.

    Channel m = tx * m_r + rx, i.e. the signals of the second transmit
    antenna are appended to those of the first. Pure reindexing; any common
    leading shape is allowed and channels land on a new last axis.
    """
    channels = []
    for tx in range(cfg.m_t):
        for rx in range(cfg.m_r):
            try:
                channels.append(np.asarray(per_pair[(tx, rx)]))
            except KeyError:
                raise DataError(
                    f"missing signal for antenna pair (tx={tx}, rx={rx})"
                ) from None
    return np.stack(channels, axis=-1)


@dataclass
class RawRecording:
    """Per-antenna-pair range profiles straight off a recording.

    ``profiles`` is indexed [slow time, pair, fast time]; ``pair_table``
    names the (tx index, rx index) of each pair column. Hardware profiles
    are real; synthetic analytic profiles may be complex.
    """

    profiles: np.ndarray
    pair_table: tuple[tuple[int, int], ...]
    f_s_ft: float
    slow_time: np.ndarray

    def __post_init__(self) -> None:
        self.profiles = np.asarray(self.profiles)
        self.slow_time = np.asarray(self.slow_time, dtype=np.float64)
        if self.profiles.ndim != 3:
            raise DataError("profiles must be indexed [slow time, pair, fast time]")
        if len(set(self.pair_table)) != len(self.pair_table):
            raise DataError("pair_table entries must be unique")
        if self.profiles.shape[1] != len(self.pair_table):
            raise DataError(
                f"{self.profiles.shape[1]} profile columns but "
                f"{len(self.pair_table)} pair_table entries"
            )
        if self.slow_time.size != self.profiles.shape[0]:
            raise DataError("slow_time length does not match the profile count")


def convert_recording(raw: RawRecording, cfg: RadarConfig) -> MeasurementCube:
    """Down-convert every pair and assemble the virtual-array cube."""
    per_pair = {}
    for col, pair in enumerate(raw.pair_table):
        tx, rx = pair
        if not (0 <= tx < cfg.m_t and 0 <= rx < cfg.m_r):
            raise DataError(f"pair {pair} outside the {cfg.m_t} x {cfg.m_r} array")
        per_pair[pair] = downconvert_decimate(
            raw.profiles[:, col, :], cfg, raw.f_s_ft
        )
    samples = assemble_virtual_array(per_pair, cfg)
    return MeasurementCube(samples, raw.slow_time, cfg)


def read_raw_dir(path: str | os.PathLike) -> tuple[RawRecording, RadarConfig]:
    """Load the on-disk raw layout: ``raw.kv`` metadata plus npy payloads.

    ``raw.kv`` carries the radar config keys, ``f_s_ft`` and the pair table
    (``pair.<i>.tx`` / ``pair.<i>.rx``); ``profiles.npy`` and
    ``slow_time.npy`` hold the arrays.
    """
    root = Path(path)
    try:
        meta = read_kv(root / "raw.kv")
    except OSError as exc:
        raise DataError(f"{root}: cannot read raw.kv: {exc}") from exc
    cfg = radar_config_from_entries(meta)
    if "f_s_ft" not in meta:
        raise DataError(f"{root}: raw.kv lacks f_s_ft")
    pairs = []
    i = 0
    while f"pair.{i}.tx" in meta:
        pairs.append((int(meta[f"pair.{i}.tx"]), int(meta[f"pair.{i}.rx"])))
        i += 1
    if not pairs:
        raise DataError(f"{root}: raw.kv names no antenna pairs")
    try:
        profiles = np.load(root / "profiles.npy")
        slow_time = np.load(root / "slow_time.npy")
    except OSError as exc:
        raise DataError(f"{root}: cannot load raw arrays: {exc}") from exc
    raw = RawRecording(profiles, tuple(pairs), float(meta["f_s_ft"]), slow_time)
    return raw, cfg


def write_raw_dir(
    path: str | os.PathLike,
    raw: RawRecording,
    cfg: RadarConfig,
    extra: Mapping[str, str] | None = None,
) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = dict(radar_config_to_entries(cfg))
    meta["f_s_ft"] = repr(float(raw.f_s_ft))
    for i, (tx, rx) in enumerate(raw.pair_table):
        meta[f"pair.{i}.tx"] = str(tx)
        meta[f"pair.{i}.rx"] = str(rx)
    for key in sorted(extra or {}):
        meta[key] = str(extra[key])
    (root / "raw.kv").write_text(format_kv(meta), encoding="utf-8")
    np.save(root / "profiles.npy", raw.profiles)
    np.save(root / "slow_time.npy", raw.slow_time)
