"""Scene-driven synthesis of stepped-frequency measurement cubes.

The generator realizes a narrowband point-scatterer receive model: every
person contributes, per frequency step and virtual channel, a complex
exponential whose delay encodes range, angle and chest motion. Static
reflectors add slow-time-constant terms and measurement noise is i.i.d.
circularly symmetric complex Gaussian. Simulated cubes carry their scene as
ground truth, which makes them the oracle for end-to-end checks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, PolarLocation, RadarConfig, derive_params


@dataclass(frozen=True)
class PersonModel:
    """Point target with sinusoidal chest motion.

    ``amplitude`` is the complex scattering gain, constant across channels.
    Displacement amplitudes are in meters; a displacement x is converted to
    a two-way delay 2 x / c internally.
    """

    location: PolarLocation
    amplitude: complex = 1.0
    breath_freq: float = 0.3
    breath_amp: float = 0.004
    breath_phase: float = 0.0
    heart_freq: float = 0.0
    heart_amp: float = 0.0
    heart_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.breath_freq <= 0:
            raise ConfigError("breath_freq must be positive")
        if self.breath_amp < 0 or self.heart_amp < 0:
            raise ConfigError("displacement amplitudes must be non-negative")
        if self.heart_freq < 0:
            raise ConfigError("heart_freq must be non-negative")


@dataclass(frozen=True)
class ClutterModel:
    """Static reflectors plus white circular complex noise."""

    static_reflectors: tuple[tuple[PolarLocation, complex], ...] = ()
    noise_std: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.noise_std < 0:
            raise ConfigError("noise_std must be non-negative")


@dataclass(frozen=True)
class Scene:
    """Ground-truth description of one recording."""

    persons: tuple[PersonModel, ...] = ()
    clutter: ClutterModel = field(default_factory=ClutterModel)
    l: int = 200
    f_st: float = 10.0
    slow_time_jitter: float = 0.0  # std of the per-sample interval jitter, s

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ConfigError("slow-time length l must be >= 1")
        if self.f_st <= 0:
            raise ConfigError("f_st must be positive")
        if self.slow_time_jitter < 0:
            raise ConfigError("slow_time_jitter must be non-negative")


@dataclass
class MeasurementCube:
    """Complex stepped-frequency samples indexed [slow time, step, channel]."""

    samples: np.ndarray
    slow_time: np.ndarray
    config: RadarConfig
    ground_truth: Scene | None = None

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        self.slow_time = np.asarray(self.slow_time, dtype=np.float64)
        expected = (self.slow_time.size, self.config.k, self.config.m_r * self.config.m_t)
        if self.samples.shape != expected:
            raise ValueError(
                f"samples shape {self.samples.shape} inconsistent with "
                f"(l, k, m) = {expected}"
            )
        if self.slow_time.size > 1 and np.any(np.diff(self.slow_time) <= 0):
            raise ValueError("slow_time must be strictly increasing")

    @property
    def l(self) -> int:
        return self.samples.shape[0]


def simulate(scene: Scene, cfg: RadarConfig) -> MeasurementCube:
    """Synthesize a measurement cube with the scene attached as ground truth.

    Deterministic for a fixed ``scene.clutter.seed``. The slow-time jitter
    stream (when enabled) is drawn before the noise stream, so either can be
    reproduced independently of the scene content.
    """
    derived = derive_params(cfg)
    rng = np.random.default_rng(scene.clutter.seed)
    l, k, m = scene.l, cfg.k, derived.m

    if scene.slow_time_jitter > 0 and l > 1:
        dt = 1.0 / scene.f_st + scene.slow_time_jitter * rng.standard_normal(l - 1)
        dt = np.maximum(dt, 1e-3 / scene.f_st)
        t = np.concatenate(([0.0], np.cumsum(dt)))
    else:
        t = np.arange(l) / scene.f_st

    freqs = cfg.f0 + derived.delta_f * np.arange(k)
    chan = cfg.delta * np.arange(m)
    cube = np.zeros((l, k, m), dtype=np.complex128)

    for person in scene.persons:
        if person.breath_freq >= scene.f_st / 2:
            raise ConfigError(
                f"breath_freq {person.breath_freq} Hz is not below the "
                f"Nyquist rate {scene.f_st / 2} Hz"
            )
        if person.location.d > derived.d_max:
            warnings.warn(
                f"person at {person.location.d} m lies beyond the unambiguous "
                f"range {derived.d_max:.2f} m; expect range aliasing",
                stacklevel=2,
            )
        if person.breath_amp > derived.range_resolution / 10:
            warnings.warn(
                "breath_amp is not small against the range resolution; the "
                "narrowband phase model degrades",
                stacklevel=2,
            )
        disp = person.breath_amp * np.sin(
            2 * np.pi * person.breath_freq * t + person.breath_phase
        )
        if person.heart_amp > 0 and person.heart_freq > 0:
            disp = disp + person.heart_amp * np.sin(
                2 * np.pi * person.heart_freq * t + person.heart_phase
            )
        base = (2.0 * person.location.d + chan * np.sin(person.location.theta)) / cfg.c
        tau = base[None, :] + (2.0 / cfg.c) * disp[:, None]  # (l, m)
        cube += person.amplitude * np.exp(
            -2j * np.pi * freqs[None, :, None] * tau[:, None, :]
        )

    for loc, gain in scene.clutter.static_reflectors:
        tau_m = (2.0 * loc.d + chan * np.sin(loc.theta)) / cfg.c
        cube += gain * np.exp(-2j * np.pi * np.outer(freqs, tau_m))[None, :, :]

    if scene.clutter.noise_std > 0:
        scale = scene.clutter.noise_std / np.sqrt(2.0)
        cube += scale * (
            rng.standard_normal((l, k, m)) + 1j * rng.standard_normal((l, k, m))
        )

    return MeasurementCube(cube, t, cfg, ground_truth=scene)


def range_profile(snapshot: np.ndarray, n: int) -> np.ndarray:
    """Magnitude range profile of one stepped-frequency snapshot.

    Computes the length-``n`` inverse DFT of the ``k`` recorded steps,
    scaled by 1/k, and returns its absolute value. Choosing ``n > k``
    oversamples the profile envelope without adding information.
    """
    snapshot = np.asarray(snapshot)
    if snapshot.ndim != 1:
        raise ValueError("snapshot must be a 1-d vector over frequency steps")
    k = snapshot.shape[0]
    if n < k:
        raise ValueError(f"profile length n={n} must be >= snapshot length k={k}")
    return np.abs(np.fft.ifft(snapshot, n=n) * (n / k))


_PERSON_KEYS = (
    "d",
    "theta",
    "amplitude",
    "amplitude_phase",
    "breath_freq",
    "breath_amp",
    "breath_phase",
    "heart_freq",
    "heart_amp",
    "heart_phase",
)
_REFLECTOR_KEYS = ("d", "theta", "gain", "gain_phase")
_SCENE_KEYS = ("l", "f_st", "noise_std", "seed", "slow_time_jitter")


def _person_from_fields(fields: dict[str, str]) -> PersonModel:
    unknown = set(fields) - set(_PERSON_KEYS)
    if unknown:
        raise ConfigError(f"unknown person keys: {sorted(unknown)}")
    get = lambda key, default: float(fields.get(key, default))
    amplitude = get("amplitude", 1.0) * np.exp(1j * get("amplitude_phase", 0.0))
    return PersonModel(
        location=PolarLocation(float(fields["d"]), float(fields["theta"])),
        amplitude=complex(amplitude),
        breath_freq=get("breath_freq", 0.3),
        breath_amp=get("breath_amp", 0.004),
        breath_phase=get("breath_phase", 0.0),
        heart_freq=get("heart_freq", 0.0),
        heart_amp=get("heart_amp", 0.0),
        heart_phase=get("heart_phase", 0.0),
    )


def _collect_indexed(entries: dict[str, str], prefix: str) -> list[dict[str, str]]:
    groups: dict[int, dict[str, str]] = {}
    for key, value in entries.items():
        if not key.startswith(prefix + "."):
            continue
        rest = key[len(prefix) + 1 :]
        idx_text, _, fieldname = rest.partition(".")
        if not fieldname:
            raise ConfigError(f"malformed key {key!r}")
        try:
            idx = int(idx_text)
        except ValueError as exc:
            raise ConfigError(f"malformed key {key!r}") from exc
        groups.setdefault(idx, {})[fieldname] = value
    return [groups[idx] for idx in sorted(groups)]


def scene_from_entries(entries: dict[str, str]) -> tuple[Scene, dict[str, str]]:
    """Build a scene from key/value entries.

    Returns the scene plus any leftover entries (``id``, ``obstacle`` and
    ``meta.*`` passthrough keys); anything else unknown is an error.
    """
    persons = tuple(_person_from_fields(f) for f in _collect_indexed(entries, "person"))
    reflectors = []
    for fields in _collect_indexed(entries, "reflector"):
        unknown = set(fields) - set(_REFLECTOR_KEYS)
        if unknown:
            raise ConfigError(f"unknown reflector keys: {sorted(unknown)}")
        gain = float(fields.get("gain", 1.0)) * np.exp(
            1j * float(fields.get("gain_phase", 0.0))
        )
        reflectors.append(
            (PolarLocation(float(fields["d"]), float(fields["theta"])), complex(gain))
        )

    extras: dict[str, str] = {}
    for key, value in entries.items():
        if key.startswith(("person.", "reflector.")) or key in _SCENE_KEYS:
            continue
        if key in ("id", "obstacle") or key.startswith("meta."):
            extras[key] = value
        else:
            raise ConfigError(f"unknown scene key {key!r}")

    scene = Scene(
        persons=persons,
        clutter=ClutterModel(
            static_reflectors=tuple(reflectors),
            noise_std=float(entries.get("noise_std", 0.0)),
            seed=int(entries.get("seed", 0)),
        ),
        l=int(entries.get("l", 200)),
        f_st=float(entries.get("f_st", 10.0)),
        slow_time_jitter=float(entries.get("slow_time_jitter", 0.0)),
    )
    return scene, extras


def scene_to_entries(scene: Scene) -> dict[str, str]:
    fmt = lambda x: repr(float(x))
    entries = {
        "l": str(scene.l),
        "f_st": fmt(scene.f_st),
        "noise_std": fmt(scene.clutter.noise_std),
        "seed": str(scene.clutter.seed),
        "slow_time_jitter": fmt(scene.slow_time_jitter),
    }
    for i, person in enumerate(scene.persons):
        prefix = f"person.{i}"
        entries[f"{prefix}.d"] = fmt(person.location.d)
        entries[f"{prefix}.theta"] = fmt(person.location.theta)
        entries[f"{prefix}.amplitude"] = fmt(abs(person.amplitude))
        entries[f"{prefix}.amplitude_phase"] = fmt(np.angle(person.amplitude))
        entries[f"{prefix}.breath_freq"] = fmt(person.breath_freq)
        entries[f"{prefix}.breath_amp"] = fmt(person.breath_amp)
        entries[f"{prefix}.breath_phase"] = fmt(person.breath_phase)
        entries[f"{prefix}.heart_freq"] = fmt(person.heart_freq)
        entries[f"{prefix}.heart_amp"] = fmt(person.heart_amp)
        entries[f"{prefix}.heart_phase"] = fmt(person.heart_phase)
    for i, (loc, gain) in enumerate(scene.clutter.static_reflectors):
        prefix = f"reflector.{i}"
        entries[f"{prefix}.d"] = fmt(loc.d)
        entries[f"{prefix}.theta"] = fmt(loc.theta)
        entries[f"{prefix}.gain"] = fmt(abs(gain))
        entries[f"{prefix}.gain_phase"] = fmt(np.angle(gain))
    return entries
