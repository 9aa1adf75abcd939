"""Unit tests for the pattern generator and double-pass modulator model."""

import cmath
import io
import math

import numpy as np
import pytest

from plugplay_qkd import (
    CODE_LEVELS,
    PhasePattern,
    PolarizedAmplitude,
    Pulse,
    RandomizerTiming,
    ValidationError,
    apply_phase,
    code_to_phase,
    faraday_swap,
    generate_pattern,
    interfere,
    load_pattern,
    modulate_pi,
    phase_at,
    save_pattern,
)

CHI2_P999_DF255 = 330.51974363400586  # 0.999 quantile of chi-square, 255 dof


def test_generate_pattern_length_and_range():
    pattern = generate_pattern(np.random.default_rng(1), frame_len=504)
    assert len(pattern) == 504
    assert pattern.codes.min() >= 0
    assert pattern.codes.max() < CODE_LEVELS


def test_generate_pattern_deterministic():
    a = generate_pattern(np.random.default_rng(7), 504)
    b = generate_pattern(np.random.default_rng(7), 504)
    c = generate_pattern(np.random.default_rng(8), 504)
    assert a == b
    assert a != c


def test_generate_pattern_rejects_empty_frame():
    with pytest.raises(ValidationError):
        generate_pattern(np.random.default_rng(0), 0)


def test_generate_pattern_uniformity_chisq():
    # 1e6 codes, 256 equal bins; statistic concentrates near 255 and must stay
    # under the 0.999 quantile for this pinned seed
    rng = np.random.default_rng(20240321)
    codes = np.concatenate([generate_pattern(rng, 504).codes for _ in range(1985)])[:1_000_000]
    counts = np.bincount(codes // 16, minlength=256)
    expected = codes.size / 256
    statistic = float(((counts - expected) ** 2 / expected).sum())
    assert 150.0 < statistic < CHI2_P999_DF255


def test_code_to_phase_reference_points():
    assert code_to_phase(0) == 0.0
    assert code_to_phase(2048) == math.pi
    assert code_to_phase(1024) == math.pi / 2.0


def test_code_to_phase_affine_and_monotone():
    phases = code_to_phase(np.arange(CODE_LEVELS))
    gaps = np.diff(phases)
    assert np.all(gaps > 0)
    step = 2.0 * math.pi / CODE_LEVELS
    assert np.allclose(gaps, step, rtol=0, atol=1e-15)
    assert gaps.max() <= step + 1e-15
    assert phases[-1] < 2.0 * math.pi


def test_code_to_phase_validates_range():
    with pytest.raises(ValidationError):
        code_to_phase(-1)
    with pytest.raises(ValidationError):
        code_to_phase(CODE_LEVELS)
    with pytest.raises(ValidationError):
        code_to_phase(np.array([0, 5000]))
    with pytest.raises(ValidationError):
        code_to_phase(2048.0)  # non-integer


def test_phase_at_slot_boundaries():
    pattern = PhasePattern([100, 200, 300])
    timing = RandomizerTiming(period_ns=200.0, delay_ns=40.0)
    assert phase_at(40.0, pattern, timing) == code_to_phase(100)
    assert phase_at(240.0, pattern, timing) == code_to_phase(200)
    assert phase_at(39.0, pattern, timing) == 0.0  # pre-trigger hold
    assert phase_at(40.0 + 3 * 200.0, pattern, timing) == 0.0  # past the end


def test_phase_at_piecewise_constant():
    rng = np.random.default_rng(5)
    pattern = generate_pattern(rng, 8)
    timing = RandomizerTiming(period_ns=200.0, delay_ns=-35.0)
    for slot in range(8):
        start = -35.0 + slot * 200.0
        expected = code_to_phase(int(pattern.codes[slot]))
        for offset in (0.0, 1e-6, 100.0, 199.999999):
            assert phase_at(start + offset, pattern, timing) == expected


def test_phase_at_translation_by_one_period():
    pattern = generate_pattern(np.random.default_rng(6), 16)
    base = RandomizerTiming(period_ns=200.0, delay_ns=10.0)
    shifted = RandomizerTiming(period_ns=200.0, delay_ns=210.0)
    for t in np.linspace(-300.0, 3600.0, 131):
        assert phase_at(float(t) + 200.0, pattern, shifted) == phase_at(float(t), pattern, base)


def test_modulate_common_phase_equals_swap_plus_phase():
    """Whenever both passes sample the same slot the modulator reduces to a
    polarization swap plus one common phase. Exhaustive over transition
    placements on a small frame."""
    pattern = PhasePattern([111, 2222, 3333])
    rt = 20.0
    amp = PolarizedAmplitude(0.6, 0.8j)
    for delay in np.arange(-250.0, 650.0, 7.0):
        timing = RandomizerTiming(period_ns=200.0, delay_ns=float(delay), roundtrip_ns=rt)
        for t in np.arange(0.0, 600.0, 13.0):
            phi_fwd = phase_at(float(t), pattern, timing)
            phi_ret = phase_at(float(t) + rt, pattern, timing)
            if phi_fwd != phi_ret:
                continue  # transition inside the window, not the common case
            out = modulate_pi(Pulse(amp, float(t)), pattern, timing)
            ref = faraday_swap(apply_phase(amp, phi_fwd, phi_fwd))
            assert out.amplitude == ref
            assert math.isclose(out.photon_number, amp.photon_number, rel_tol=1e-12)


def test_modulate_pure_h_takes_forward_phase_then_swaps():
    pattern = PhasePattern([1024, 0])  # code 1024 -> pi/2
    timing = RandomizerTiming(period_ns=200.0, delay_ns=0.0, roundtrip_ns=20.0)
    out = modulate_pi(Pulse(PolarizedAmplitude(1.0, 0.0), 50.0), pattern, timing)
    assert out.amplitude.h == 0.0
    assert abs(out.amplitude.v - cmath.exp(1j * math.pi / 2.0)) < 1e-12


def test_modulate_split_window_visibility_oracle():
    """A transition between the two passes degrades interference by exactly
    the power fraction of the mismatched component: wrong-port fraction is
    f * sin^2(delta/2)."""
    rng = np.random.default_rng(90)
    timing = RandomizerTiming(period_ns=200.0, delay_ns=0.0, roundtrip_ns=20.0)
    for _ in range(200):
        code_a, code_b = (int(c) for c in rng.integers(0, CODE_LEVELS, size=2))
        pattern = PhasePattern([code_a, code_b])
        z = rng.normal(size=4)
        norm = math.sqrt((z**2).sum())
        amp = PolarizedAmplitude(complex(z[0], z[1]) / norm, complex(z[2], z[3]) / norm)
        # reference: both passes inside slot 0; signal: passes straddle slots
        ref = modulate_pi(Pulse(amp, 100.0), pattern, timing)
        sig = modulate_pi(Pulse(amp, 190.0), pattern, timing)
        mu0, mu1 = interfere(sig.amplitude, ref.amplitude)
        delta = code_to_phase(code_b) - code_to_phase(code_a)
        f_mismatch = abs(amp.v) ** 2  # swapped onto H, phased on the return pass
        expected = f_mismatch * math.sin(delta / 2.0) ** 2
        assert math.isclose(mu1 / (mu0 + mu1), expected, rel_tol=1e-11, abs_tol=1e-12)


def test_pattern_file_roundtrip():
    pattern = generate_pattern(np.random.default_rng(77), 504)
    buf = io.StringIO()
    save_pattern(pattern, buf)
    loaded = load_pattern(io.StringIO(buf.getvalue()), expected_frame_len=504)
    assert loaded == pattern


def test_pattern_file_validation():
    with pytest.raises(ValidationError):
        load_pattern(io.StringIO("12\nnot_a_code\n"))
    with pytest.raises(ValidationError):
        load_pattern(io.StringIO("4096\n"))
    with pytest.raises(ValidationError):
        load_pattern(io.StringIO(""))
    with pytest.raises(ValidationError):
        load_pattern(io.StringIO("1\n2\n3\n"), expected_frame_len=4)


def test_pattern_constructor_validation():
    with pytest.raises(ValidationError):
        PhasePattern([])
    with pytest.raises(ValidationError):
        PhasePattern([1.5, 2.5])
    with pytest.raises(ValidationError):
        PhasePattern([0, 4096])
    with pytest.raises(ValidationError):
        PhasePattern([-1, 0])
    pattern = PhasePattern([0, 1, 2])
    assert not pattern.codes.flags.writeable


def test_timing_validation():
    with pytest.raises(ValidationError):
        RandomizerTiming(period_ns=0.0)
    with pytest.raises(ValidationError):
        RandomizerTiming(period_ns=-200.0)
    with pytest.raises(ValidationError):
        RandomizerTiming(roundtrip_ns=-1.0)
    with pytest.raises(ValidationError):
        RandomizerTiming(delay_ns=math.inf)
