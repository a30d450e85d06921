import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhfloquet.model import (PRESETS, SIGMA_X, SIGMA_Z, DrivingProfile, Harmonic, ModelError,
                             RationalAlpha, TwoLevelModel, drive_derivative, eval_drive,
                             farey_alphas, hamiltonian_at, make_preset, preset_profile)

import oracles

ALPHAS = ["1/2", "1/3", "2/3", "3/7", "5/11", "1/1"]


def _preset_args(name):
    return ("2/5",) if name in ("H3", "H4") else ()


def test_h1_basic_values():
    m = make_preset("H1", 1.0, 2.0)
    assert m.period == 1.0
    assert m.a == 1.0
    assert eval_drive(m, 0.0) == pytest.approx(2.0, abs=1e-15)
    assert abs(eval_drive(m, 0.25)) < 1e-14
    assert drive_derivative(m, 0.0) == pytest.approx(8 * np.pi, abs=1e-12)


def test_h1_zero_drive_is_static():
    m = make_preset("H1", 1.0, 0.0)
    t = np.linspace(0, 1, 17)
    assert np.all(eval_drive(m, t) == 0)
    np.testing.assert_allclose(hamiltonian_at(m, 0.37), SIGMA_Z, atol=0)


def test_h2_values():
    m = make_preset("H2", 1.0, 4.0)
    assert eval_drive(m, 0.0) == pytest.approx(4j, abs=1e-15)
    assert drive_derivative(m, 0.0) == pytest.approx(8 * np.pi, abs=1e-12)
    np.testing.assert_allclose(hamiltonian_at(m, 0.0), SIGMA_Z - 4 * SIGMA_X, atol=1e-14)


def test_hamiltonian_examples():
    np.testing.assert_allclose(hamiltonian_at(make_preset("H1", 1.0, 2.0), 0.25), SIGMA_Z, atol=1e-14)
    np.testing.assert_allclose(hamiltonian_at(make_preset("H1", 0.0, 2.0), 0.0), 2j * SIGMA_X, atol=1e-14)


def test_h3_period_bookkeeping():
    m = make_preset("H3", 1.0, 2.0, "1/2")
    assert m.period == 2.0
    h = {x.m: x for x in m.profile.harmonics}
    assert set(h) == {1, 2}
    assert h[2].cos_amp == 2.0 and h[1].cos_amp == 2.0


def test_h3_alpha_one_merges_harmonics():
    m = make_preset("H3", 1.0, 1.5, "1/1")
    assert len(m.profile.harmonics) == 1
    t = np.linspace(0, 1, 101)
    np.testing.assert_allclose(eval_drive(m, t), 3.0 * np.cos(2 * np.pi * t), atol=1e-13)


def test_presets_match_closed_forms():
    t = np.linspace(-0.7, 3.3, 211)
    for mu in (0.5, 2.0):
        b, db = oracles.drive_h1(mu)
        m = make_preset("H1", 1.0, mu)
        np.testing.assert_allclose(eval_drive(m, t), b(t), atol=1e-12)
        np.testing.assert_allclose(drive_derivative(m, t), db(t), atol=1e-11)
        b, db = oracles.drive_h2(mu)
        m = make_preset("H2", 1.0, mu)
        np.testing.assert_allclose(eval_drive(m, t), b(t), atol=1e-12)
        np.testing.assert_allclose(drive_derivative(m, t), db(t), atol=1e-11)
        for a in ("1/2", "3/7", "1/1"):
            al = RationalAlpha.parse(a)
            b, db = oracles.drive_h3(mu, al.p, al.q)
            m = make_preset("H3", 1.0, mu, a)
            np.testing.assert_allclose(eval_drive(m, t), b(t), atol=1e-12)
            np.testing.assert_allclose(drive_derivative(m, t), db(t), atol=1e-10)


def test_h4_and_h1b_closed_forms():
    t = np.linspace(0, 7, 301)
    mu = 1.3
    m = make_preset("H4", 1.0, mu, "3/7")
    np.testing.assert_allclose(eval_drive(m, t), mu * (1j * np.cos(2 * np.pi * t) + np.sin(2 * np.pi * 3 / 7 * t)),
                               atol=1e-12)
    m = make_preset("H1b", 1.0, mu)
    np.testing.assert_allclose(eval_drive(m, t), mu * (np.sin(2 * np.pi * t) + np.cos(4 * np.pi * t)), atol=1e-12)


@pytest.mark.parametrize("name", PRESETS)
def test_hamiltonian_traceless(name):
    m = make_preset(name, 0.8, 1.7, *_preset_args(name))
    for t in np.linspace(0, m.period, 23):
        assert np.trace(hamiltonian_at(m, t)) == 0


@settings(max_examples=40, deadline=None)
@given(name=st.sampled_from(PRESETS), mu=st.floats(-5, 5), t=st.floats(-50, 50))
def test_drive_periodic(name, mu, t):
    m = make_preset(name, 1.0, mu, *_preset_args(name))
    assert abs(eval_drive(m, t + m.period) - eval_drive(m, t)) <= 1e-12 * max(1, abs(mu)) * (1 + abs(t))


@settings(max_examples=40, deadline=None)
@given(alpha=st.sampled_from(ALPHAS), t=st.floats(0, 20), mu=st.floats(0.1, 4))
def test_two_frequency_period_is_q(alpha, t, mu):
    q = RationalAlpha.parse(alpha).q
    for name in ("H3", "H4"):
        m = make_preset(name, 1.0, mu, alpha)
        assert m.period == q
        assert abs(eval_drive(m, t + q) - eval_drive(m, t)) <= 1e-11


@settings(max_examples=50, deadline=None)
@given(
    T=st.floats(0.3, 5),
    amps=st.lists(st.tuples(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3)),
                  min_size=1, max_size=4),
    t=st.floats(-3, 3),
)
def test_derivative_matches_finite_difference(T, amps, t):
    prof = DrivingProfile(T, tuple(Harmonic(m, c, s) for m, (c, s) in enumerate(amps)))
    h = 1e-5
    fd = (prof(t + h) - prof(t - h)) / (2 * h)
    assert abs(prof.derivative(t) - fd) <= 1e-5 * (1 + sum(abs(c) + abs(s) for c, s in amps)) * (1 + 1 / T ** 3)


@settings(max_examples=50, deadline=None)
@given(
    amps=st.lists(st.tuples(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3)),
                  min_size=1, max_size=4),
    t=st.floats(-3, 3),
)
def test_exponential_coefficients_reconstruct(amps, t):
    prof = DrivingProfile(1.7, tuple(Harmonic(m, c, s) for m, (c, s) in enumerate(amps)))
    c = prof.exponential_coefficients()
    val = sum(v * np.exp(2j * np.pi * n * t / 1.7) for n, v in c.items())
    assert abs(val - prof(t)) < 1e-12 * (1 + sum(abs(a) + abs(b) for a, b in amps))


def test_gamma_branches():
    m = make_preset("H2", 2j, 1.0)
    assert m.branch == "imaginary" and m.a_sq == -4.0 and m.a == 2j
    m = make_preset("H2", -1.5j, 1.0)
    assert m.a == -1.5j and m.a_sq == -2.25
    m = make_preset("H1", -0.5, 1.0)
    assert m.a == -0.5 and m.a_sq == 0.25
    with pytest.raises(ModelError):
        make_preset("H1", 1 + 1j, 1.0)


@settings(max_examples=60, deadline=None)
@given(gsq=st.floats(-100, 100))
def test_a_squared_exactly_real(gsq):
    m = TwoLevelModel.from_gamma_sq(gsq, preset_profile("H1", 1.0))
    a2 = m.a * m.a
    assert a2.imag == 0
    assert a2.real == pytest.approx(gsq, rel=1e-15, abs=1e-300)


def test_alpha_required_iff_two_frequency():
    with pytest.raises(ModelError, match="alpha"):
        make_preset("H3", 1.0, 2.0)
    with pytest.raises(ModelError, match="alpha"):
        make_preset("H4", 1.0, 2.0)
    with pytest.raises(ModelError):
        make_preset("H1", 1.0, 2.0, "1/2")
    with pytest.raises(ModelError):
        make_preset("H5", 1.0, 2.0)


def test_rational_alpha():
    assert str(RationalAlpha.parse("3/7")) == "3/7"
    assert RationalAlpha.parse("2").q == 1
    with pytest.raises(ModelError):
        RationalAlpha(2, 4)
    with pytest.raises(ModelError):
        RationalAlpha(0, 3)


def test_farey_enumeration():
    al = farey_alphas(4)
    assert [str(a) for a in al] == ["1/4", "1/3", "1/2", "2/3", "3/4", "1/1"]
    assert len(farey_alphas(12)) == 46
    assert all(np.gcd(a.p, a.q) == 1 and a.q <= 12 for a in farey_alphas(12))


def test_profile_validation():
    with pytest.raises(ModelError):
        DrivingProfile(0.0, ())
    with pytest.raises(ModelError):
        DrivingProfile(1.0, (Harmonic(1, 1), Harmonic(1, 2)))
    with pytest.raises(ModelError):
        Harmonic(-1, 1.0)
    assert Harmonic(0, 1.0, 5.0).sin_amp == 0


def test_frame_validation_and_rotated_frame():
    prof = preset_profile("H1", 1.0)
    with pytest.raises(ModelError, match="orthonormal"):
        TwoLevelModel(1.0, prof, n1=(1, 1, 0))
    with pytest.raises(ModelError, match="right-handed"):
        TwoLevelModel(1.0, prof, n1=(0, 1, 0), n2=(1, 0, 0), n3=(0, 0, 1))
    c, s = np.cos(0.3), np.sin(0.3)
    m = TwoLevelModel(1.0, prof, n1=(c, s, 0), n2=(-s, c, 0), n3=(0, 0, 1))
    assert np.trace(hamiltonian_at(m, 0.1)) == 0


def test_hermitian_counterpart_is_hermitian():
    for name in PRESETS:
        m = make_preset(name, 0.7, 1.9, *_preset_args(name)).hermitian_counterpart()
        for t in np.linspace(0, m.period, 13):
            H = hamiltonian_at(m, t)
            np.testing.assert_allclose(H, H.conj().T, atol=1e-13)
    with pytest.raises(ModelError):
        make_preset("H2", 1j, 1.0).hermitian_counterpart()
