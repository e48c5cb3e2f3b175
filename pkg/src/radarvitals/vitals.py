"""Spatial filtering, chest-displacement extraction and breathing estimation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import DerivedParams, PolarLocation, RadarConfig, derive_params
from .localize import steering_matrix
from .simulate import MeasurementCube

_WINDOWS = {
    "hann": np.hanning,
    "rect": np.ones,
}

_MAG_FLOOR = float(np.sqrt(np.finfo(np.float64).tiny))


@dataclass
class SpatialFilter:
    """Windowed steering matrix pointed at one location.

    The modulus of every weight is the product of the two taper values,
    since the steering entries have unit modulus.
    """

    h: np.ndarray  # (k0, m) complex
    target: PolarLocation
    window: str = "hann"


@dataclass
class VitalSeries:
    """Chest displacement in meters per slow-time sample of one segment.

    ``f_st_actual`` is derived from the slow-time stamps of the segment the
    series was extracted from; ``unreliable`` flags samples whose beamformer
    output underflowed and which repeat the previous reliable value.
    """

    eta: np.ndarray
    f_st_actual: float
    label: int | None = None
    unreliable: np.ndarray | None = None


def build_filter(
    target: PolarLocation,
    cfg: RadarConfig,
    derived: DerivedParams | None = None,
    window: str = "hann",
) -> SpatialFilter:
    """Non-adaptive beamformer for a location, tapered for side-lobe control.

    Only the ``k0`` lowest frequency steps are used: the half-wavelength
    spatial-sampling bound tightens with frequency, so the retained steps
    are exactly the ones free of grating lobes.
    """
    if window not in _WINDOWS:
        raise ValueError(f"unknown window {window!r}; choose from {sorted(_WINDOWS)}")
    if derived is None:
        derived = derive_params(cfg)
    a = steering_matrix(target.d, target.theta, derived.k0, derived.m, cfg)
    taper = np.outer(_WINDOWS[window](derived.k0), _WINDOWS[window](derived.m))
    return SpatialFilter(taper * a, target, window)


def extract_displacement(
    filt: SpatialFilter,
    cube: MeasurementCube,
    f_c: float | None = None,
    label: int | None = None,
) -> VitalSeries:
    """Beamform every snapshot and convert the output phase to displacement.

    The filter output y(l) is the inner product of the (conjugated) filter
    weights with the first k0 rows of each snapshot. Its phase, unwrapped
    over slow time, scales to displacement by -c / (4 pi f_c). Samples with
    vanishing |y| are flagged and repeat the previous reliable sample.
    """
    k0, m = filt.h.shape
    l_len, k_len, m_len = cube.samples.shape
    if k_len < k0 or m_len != m:
        raise ValueError(
            f"cube of shape {cube.samples.shape} incompatible with a "
            f"{k0} x {m} spatial filter"
        )
    if f_c is None:
        f_c = derive_params(cube.config).f_c
    y = np.tensordot(cube.samples[:, :k0, :], filt.h.conj(), axes=([1, 2], [0, 1]))
    bad = np.abs(y) < _MAG_FLOOR
    if bad.all():
        warnings.warn("beamformer output vanished over the whole segment", stacklevel=2)
        eta = np.zeros(l_len)
    else:
        last_good = np.maximum.accumulate(np.where(bad, -1, np.arange(l_len)))
        first_good = int(np.nonzero(~bad)[0][0])
        last_good[last_good < 0] = first_good
        phi = np.unwrap(np.angle(y[last_good]))
        eta = -cube.config.c / (4 * np.pi * f_c) * phi
    t = cube.slow_time
    f_st_actual = (t.size - 1) / (t[-1] - t[0]) if t.size > 1 else cube.config.f_st
    return VitalSeries(eta, float(f_st_actual), label, bad)


def averaged_periodogram(
    series: list[VitalSeries], pad_factor: int = 8
) -> tuple[np.ndarray, np.ndarray]:
    """Mean-detrended periodogram, zero padded and averaged over segments."""
    if not series:
        raise ValueError("need at least one displacement series")
    length = series[0].eta.size
    if any(s.eta.size != length for s in series):
        raise ValueError("all segments must have the same length")
    if length < 2:
        raise ValueError("series too short for a spectral estimate")
    fs = float(np.mean([s.f_st_actual for s in series]))
    nfft = pad_factor * length
    power = np.zeros(nfft // 2 + 1)
    for s in series:
        x = s.eta - s.eta.mean()
        power += np.abs(np.fft.rfft(x, nfft)) ** 2 / length
    power /= len(series)
    freqs = np.fft.rfftfreq(nfft, d=1.0 / fs)
    return freqs, power


def breathing_frequency(
    series: list[VitalSeries] | VitalSeries,
    band: tuple[float, float] = (0.1, 0.8),
    pad_factor: int = 8,
) -> float:
    """Strongest averaged-periodogram peak inside the breathing band, Hz.

    The band excludes the DC residue left by detrending and any heartbeat
    component.
    """
    if isinstance(series, VitalSeries):
        series = [series]
    lo, hi = band
    if not 0 <= lo < hi:
        raise ValueError(f"invalid search band {band}")
    freqs, power = averaged_periodogram(series, pad_factor)
    mask = (freqs >= lo) & (freqs <= hi)
    if not mask.any():
        raise ValueError(f"search band {band} contains no frequency bins")
    sel = np.nonzero(mask)[0]
    return float(freqs[sel[np.argmax(power[sel])]])
