"""Radar parameterization, derived scalar quantities and scene geometry.

Everything in this module is an immutable value type or a pure function,
so instances can be shared freely across threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

SPEED_OF_LIGHT = 2.99792458e8
"""Propagation speed in m/s (exact SI definition)."""


class ConfigError(ValueError):
    """Invalid radar, scene or pipeline configuration."""


@dataclass(frozen=True)
class RadarConfig:
    """Frequency plan and array geometry of a stepped-frequency MIMO radar.

    SI units throughout (Hz, m, s).

    Attributes:
        f0: start frequency of the sweep.
        k: number of frequency steps per sweep.
        b: swept bandwidth.
        n: range-profile length (inverse-DFT size), n >= k.
        delta: receive inter-antenna spacing.
        m_r: number of physical receive antennas.
        m_t: number of transmit antennas.
        f_st: nominal slow-time sampling rate.
        delta_t: transmit inter-antenna spacing. ``m_r * delta`` produces a
            gap-free virtual uniform linear array and is the default; any
            other value is tolerated with a warning.
        c: propagation speed, configurable for tests.
        t_tone: single-tone duration. Metadata only, never consumed.
        t_sweep: full-sweep duration. Metadata only, never consumed.
    """

    f0: float
    k: int
    b: float
    n: int
    delta: float
    m_r: int
    m_t: int
    f_st: float
    delta_t: float | None = None
    c: float = SPEED_OF_LIGHT
    t_tone: float | None = None
    t_sweep: float | None = None

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ConfigError(f"at least 2 frequency steps required, got k={self.k}")
        if self.f0 <= 0 or self.b <= 0:
            raise ConfigError("f0 and b must be positive")
        if self.n < self.k:
            raise ConfigError(f"range-profile length n={self.n} must be >= k={self.k}")
        if self.delta <= 0:
            raise ConfigError("antenna spacing delta must be positive")
        if self.m_r < 1 or self.m_t < 1:
            raise ConfigError("antenna counts m_r and m_t must be >= 1")
        if self.f_st <= 0:
            raise ConfigError("slow-time rate f_st must be positive")
        if self.c <= 0:
            raise ConfigError("propagation speed c must be positive")
        if self.delta_t is None:
            object.__setattr__(self, "delta_t", self.m_r * self.delta)
        elif not math.isclose(self.delta_t, self.m_r * self.delta, rel_tol=1e-9):
            warnings.warn(
                "delta_t != m_r * delta: the virtual array is not a uniform ULA",
                stacklevel=2,
            )


@dataclass(frozen=True)
class DerivedParams:
    """Scalar quantities derived from a :class:`RadarConfig`.

    Attributes:
        delta_f: frequency step, ``b / k``.
        f_c: center frequency, ``f0 + (k - 1) / 2 * delta_f``.
        m: virtual channel count, ``m_r * m_t``.
        d_max: maximum unambiguous range, ``c / (2 delta_f)``.
        range_resolution: minimum separation of two resolvable targets,
            ``c / (2 b)``.
        profile_granularity: range-profile bin spacing, ``c / (2 delta_f n)``.
        k0: number of low frequency steps whose wavelength still satisfies
            the half-wavelength spatial sampling bound for spacing ``delta``,
            clamped to ``[1, k]``.
    """

    delta_f: float
    f_c: float
    m: int
    d_max: float
    range_resolution: float
    profile_granularity: float
    k0: int


def derive_params(cfg: RadarConfig) -> DerivedParams:
    """Compute all derived scalars for a configuration.

    Deterministic and pure: repeated calls yield bit-identical results.
    """
    delta_f = cfg.b / cfg.k
    f_c = cfg.f0 + (cfg.k - 1) / 2 * delta_f
    k0_raw = math.floor(cfg.c / (2 * cfg.delta * delta_f) - cfg.f0 / delta_f)
    return DerivedParams(
        delta_f=delta_f,
        f_c=f_c,
        m=cfg.m_r * cfg.m_t,
        d_max=cfg.c / (2 * delta_f),
        range_resolution=cfg.c / (2 * cfg.b),
        profile_granularity=cfg.c / (2 * delta_f * cfg.n),
        k0=max(1, min(cfg.k, k0_raw)),
    )


def walabot_config(f_st: float = 10.5) -> RadarConfig:
    """Parameters of the commercial sensor this pipeline was tuned for."""
    return RadarConfig(
        f0=6.3e9,
        k=137,
        b=1.7e9,
        n=8192,
        delta=0.02,
        m_r=4,
        m_t=2,
        f_st=f_st,
        t_tone=14.3e-6 / 137,
        t_sweep=14.3e-6,
    )


@dataclass(frozen=True)
class PolarLocation:
    """Range/azimuth position. ``theta`` is measured from boresight, rad."""

    d: float
    theta: float

    def __post_init__(self) -> None:
        if self.d < 0:
            raise ValueError(f"range must be non-negative, got {self.d}")
        if abs(self.theta) >= math.pi / 2:
            raise ValueError(f"azimuth must lie in (-pi/2, pi/2), got {self.theta}")


@dataclass(frozen=True)
class CartesianLocation:
    """Position with x along the array axis and y along boresight, m."""

    x: float
    y: float


def polar_to_cartesian(loc: PolarLocation) -> CartesianLocation:
    return CartesianLocation(loc.d * math.sin(loc.theta), loc.d * math.cos(loc.theta))


def cartesian_to_polar(loc: CartesianLocation) -> PolarLocation:
    return PolarLocation(math.hypot(loc.x, loc.y), math.atan2(loc.x, loc.y))


_CONFIG_REQUIRED = ("f0", "k", "b", "n", "delta", "m_r", "m_t", "f_st")
_CONFIG_INT = ("k", "n", "m_r", "m_t")
_CONFIG_OPTIONAL = ("delta_t", "c", "t_tone", "t_sweep")


def radar_config_from_entries(entries: dict[str, str]) -> RadarConfig:
    """Build a config from parsed key/value entries (keys mirror fields)."""
    missing = [key for key in _CONFIG_REQUIRED if key not in entries]
    if missing:
        raise ConfigError(f"missing radar config keys: {', '.join(missing)}")
    kwargs: dict[str, float | int] = {}
    for key in _CONFIG_REQUIRED + _CONFIG_OPTIONAL:
        if key not in entries:
            continue
        try:
            kwargs[key] = int(entries[key]) if key in _CONFIG_INT else float(entries[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for radar config key {key!r}: {entries[key]!r}") from exc
    return RadarConfig(**kwargs)


def radar_config_to_entries(cfg: RadarConfig) -> dict[str, str]:
    entries: dict[str, str] = {}
    for key in _CONFIG_REQUIRED + _CONFIG_OPTIONAL:
        value = getattr(cfg, key)
        if value is None:
            continue
        entries[key] = str(value) if key in _CONFIG_INT else repr(float(value))
    return entries
