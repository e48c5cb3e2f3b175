import numpy as np
import pytest

import radarvitals as rv
from helpers import breather, scene_of, small_config


def test_empty_scene_gives_zero_cube(walabot):
    cube = rv.simulate(scene_of([], l=5), walabot)
    assert cube.samples.shape == (5, 137, 8)
    assert np.all(cube.samples == 0)


def test_static_person_first_cell_phase(walabot):
    person = breather(1.5, 0.0, amp=0.0)
    cube = rv.simulate(scene_of([person], l=8), walabot)
    expected = np.exp(-2j * np.pi * walabot.f0 * 2 * 1.5 / walabot.c)
    np.testing.assert_allclose(cube.samples[:, 0, 0], expected, rtol=1e-12)


def test_static_person_matches_delay_model(walabot, derived):
    # every cell follows exp(-2j pi f_k (2 d + m delta sin theta) / c)
    person = breather(2.2, -35.0, amp=0.0)
    cube = rv.simulate(scene_of([person], l=3), walabot)
    freqs = walabot.f0 + derived.delta_f * np.arange(walabot.k)
    chan = walabot.delta * np.arange(derived.m)
    tau = (2 * 2.2 + chan * np.sin(np.deg2rad(-35.0))) / walabot.c
    expected = np.exp(-2j * np.pi * freqs[:, None] * tau[None, :])
    np.testing.assert_allclose(cube.samples[0], expected, rtol=1e-12)


def test_breathing_phase_oscillation(walabot):
    # the first-cell phase follows the chest displacement analytically
    f_b, amp, l = 0.3, 0.004, 1000
    person = breather(1.5, 0.0, f_b=f_b, amp=amp)
    cube = rv.simulate(scene_of([person], l=l), walabot)
    t = cube.slow_time
    disp = amp * np.sin(2 * np.pi * f_b * t)
    expected_phase = -2 * np.pi * walabot.f0 * (2 * 1.5 + 2 * disp) / walabot.c
    np.testing.assert_allclose(
        cube.samples[:, 0, 0], np.exp(1j * expected_phase), rtol=1e-10
    )
    measured = np.unwrap(np.angle(cube.samples[:, 0, 0]))
    peak_to_peak = measured.max() - measured.min()
    assert peak_to_peak == pytest.approx(2 * (4 * np.pi * walabot.f0 / walabot.c) * amp, rel=1e-2)


def test_superposition_of_persons(walabot):
    a = breather(1.2, 10.0, f_b=0.25, phase=0.3)
    b = breather(2.8, -25.0, f_b=0.4, phase=1.1)
    both = rv.simulate(scene_of([a, b], l=16), walabot)
    only_a = rv.simulate(scene_of([a], l=16), walabot)
    only_b = rv.simulate(scene_of([b], l=16), walabot)
    np.testing.assert_allclose(
        both.samples, only_a.samples + only_b.samples, rtol=0, atol=1e-12
    )


def test_seeded_noise_reproducible(walabot):
    scene = scene_of([breather(2.0, 0.0)], l=12, noise_std=0.5, seed=42)
    a = rv.simulate(scene, walabot)
    b = rv.simulate(scene, walabot)
    assert np.array_equal(a.samples, b.samples)
    assert np.array_equal(a.slow_time, b.slow_time)


def test_noise_level_scales(walabot):
    scene = scene_of([], l=400, noise_std=0.3, seed=1)
    cube = rv.simulate(scene, walabot)
    measured = np.sqrt(np.mean(np.abs(cube.samples) ** 2))
    assert measured == pytest.approx(0.3, rel=0.01)


def test_person_beyond_unambiguous_range_warns(walabot):
    with pytest.warns(UserWarning, match="aliasing"):
        rv.simulate(scene_of([breather(15.0, 0.0)], l=2), walabot)


def test_breath_freq_above_nyquist_rejected(walabot):
    person = breather(2.0, 0.0, f_b=6.0)
    with pytest.raises(rv.ConfigError, match="Nyquist"):
        rv.simulate(scene_of([person], l=4), walabot)


def test_static_reflector_constant_over_slow_time(walabot):
    refl = (rv.PolarLocation(3.0, np.deg2rad(20.0)), 0.7 + 0.1j)
    scene = rv.Scene(persons=(), clutter=rv.ClutterModel(static_reflectors=(refl,)),
                     l=6, f_st=10.0)
    cube = rv.simulate(scene, walabot)
    for l in range(1, 6):
        np.testing.assert_array_equal(cube.samples[l], cube.samples[0])


def test_slow_time_jitter_monotonic(walabot):
    scene = rv.Scene(persons=(), clutter=rv.ClutterModel(seed=5), l=200,
                     f_st=10.0, slow_time_jitter=0.02)
    cube = rv.simulate(scene, walabot)
    assert np.all(np.diff(cube.slow_time) > 0)
    assert cube.slow_time[0] == 0.0


def test_range_profile_zero_snapshot():
    assert np.all(rv.range_profile(np.zeros(8, dtype=complex), 32) == 0)


def test_range_profile_rejects_short_transform():
    with pytest.raises(ValueError):
        rv.range_profile(np.ones(8, dtype=complex), 4)


def test_range_profile_single_target_peak_index(walabot, derived):
    # tau = 20 ns lands between profile bins 2033 and 2034; the envelope
    # argmax computed by direct evaluation of the sum picks 2033
    tau = 20e-9
    freqs = walabot.f0 + derived.delta_f * np.arange(walabot.k)
    snapshot = np.exp(-2j * np.pi * freqs * tau)
    profile = rv.range_profile(snapshot, walabot.n)
    n_axis = np.arange(walabot.n)
    brute = np.abs(
        np.exp(2j * np.pi * np.outer(n_axis, np.arange(walabot.k)) / walabot.n)
        @ snapshot / walabot.k
    )
    assert np.argmax(brute) == 2033
    assert np.argmax(profile) == 2033


def test_range_profile_matches_brute_force_property():
    rng = np.random.default_rng(3)
    for _ in range(100):
        k = int(rng.integers(2, 16))
        n = int(rng.integers(k, 48))
        snapshot = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        profile = rv.range_profile(snapshot, n)
        brute = np.abs(
            np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(k)) / n)
            @ snapshot / k
        )
        np.testing.assert_allclose(profile, brute, atol=1e-9, rtol=1e-9)


def test_envelope_peak_tracks_delay(walabot, derived):
    rng = np.random.default_rng(9)
    freqs = walabot.f0 + derived.delta_f * np.arange(walabot.k)
    for _ in range(10):
        d = float(rng.uniform(0.5, 10.0))
        tau = 2 * d / walabot.c
        profile = rv.range_profile(np.exp(-2j * np.pi * freqs * tau), walabot.n)
        assert abs(int(np.argmax(profile)) - walabot.n * derived.delta_f * tau) <= 1.0


def test_cube_validation(walabot):
    with pytest.raises(ValueError, match="inconsistent"):
        rv.MeasurementCube(np.zeros((4, 10, 8), dtype=complex), np.arange(4.0), walabot)
    with pytest.raises(ValueError, match="increasing"):
        rv.MeasurementCube(
            np.zeros((3, 137, 8), dtype=complex), np.array([0.0, 0.0, 1.0]), walabot
        )


def test_scene_entries_roundtrip():
    scene = rv.Scene(
        persons=(breather(1.5, -60.0, f_b=0.27, amp=0.003, phase=0.4),
                 breather(2.5, 10.0, gain=0.5)),
        clutter=rv.ClutterModel(
            static_reflectors=((rv.PolarLocation(4.0, 0.1), 0.3 - 0.2j),),
            noise_std=0.07,
            seed=9,
        ),
        l=321,
        f_st=10.5,
        slow_time_jitter=0.001,
    )
    entries = rv.scene_to_entries(scene)
    back, extras = rv.scene_from_entries(entries)
    assert extras == {}
    assert back.l == scene.l and back.f_st == scene.f_st
    assert back.clutter.noise_std == scene.clutter.noise_std
    assert back.clutter.seed == scene.clutter.seed
    assert len(back.persons) == 2
    p0, q0 = back.persons[0], scene.persons[0]
    assert p0.location == q0.location
    assert p0.breath_freq == q0.breath_freq
    assert p0.amplitude == pytest.approx(q0.amplitude)
    r_loc, r_gain = back.clutter.static_reflectors[0]
    assert r_loc == rv.PolarLocation(4.0, 0.1)
    assert r_gain == pytest.approx(0.3 - 0.2j)


def test_scene_unknown_key_rejected():
    with pytest.raises(rv.ConfigError, match="unknown scene key"):
        rv.scene_from_entries({"l": "10", "bogus": "1"})
