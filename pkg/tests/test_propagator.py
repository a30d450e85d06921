import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import simpson

from nhfloquet.integrators import IntegrationError, dormand_prince, expm_traceless, ordered_product
from nhfloquet.model import PRESETS, TwoLevelModel, make_preset, preset_profile
from nhfloquet.propagator import (IntegratorSettings, floquet_operators, floquet_u0, intra_period_spectrum,
                                  matrix_to_pauli, pauli_to_matrix, propagate_batch, propagate_matrix,
                                  propagate_pauli, split_events)

# U(T) from the exponential midpoint rule with 10^6 steps per period (tests/oracles.py)
ORACLE_UT = {
    ("H1", 1.0, 2.0): np.array([
        [0.41054007444534546 - 0.997425089882078j, -0.22978524103177878 - 0.33256383696382324j],
        [-0.22978524103180797 + 0.33256383696377334j, 0.41054007444526824 + 0.9974250898821201j]]),
    ("H1", 0.1, 4.0): np.array([
        [0.987337793676829 - 0.20363711913418153j, -0.00830416980575106 - 0.12741678019616637j],
        [-0.00830416980599921 + 0.12741678019615627j, 0.987337793676495 + 0.20363711913414895j]]),
    ("H2", 1.0, 4.0): np.array([
        [-7.4075122879619093e-01 - 0.738896772004447j, 1.2493764713420276e-13 - 2.046880300599566j],
        [5.5604402137543017e-14 + 0.04625615997898557j, -7.4075122879614763e-01 + 0.7388967720044902j]]),
    ("H2", 2j, 4.0): np.array([
        [2.8458765200287113 + 3.075760781198454e-13j, 2.838244365056515 + 6.301935645116815e-01j],
        [-2.838244365056697 + 6.301935645117016e-01j, -2.618797741939887 + 6.300152615848987e-14j]]),
}

DENSE = IntegratorSettings(dense_samples=1000)


def _alpha(name):
    return ("2/3",) if name in ("H3", "H4") else ()


def _det(U):
    return U[..., 0, 0] * U[..., 1, 1] - U[..., 0, 1] * U[..., 1, 0]


def _det_scale(U):
    # rounding floor of the 2x2 determinant is eps times this
    return np.maximum(1.0, np.abs(U[..., 0, 0] * U[..., 1, 1]) + np.abs(U[..., 0, 1] * U[..., 1, 0]))


def _random_frame(rng):
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(Q) < 0:
        Q[:, 2] *= -1
    return Q[:, 0], Q[:, 1], Q[:, 2]


@pytest.mark.parametrize("key", list(ORACLE_UT))
def test_floquet_operator_matches_oracle(key):
    U = propagate_matrix(make_preset(*key)).final
    np.testing.assert_allclose(U, ORACLE_UT[key], atol=1e-9)


def test_initial_identity_exact():
    tr = propagate_matrix(make_preset("H2", 1.0, 4.0), settings=IntegratorSettings(dense_samples=11))
    assert np.array_equal(tr.matrices[0], np.eye(2))
    pc = propagate_pauli(make_preset("H2", 1.0, 4.0), IntegratorSettings(dense_samples=11))
    assert np.array_equal(pc.components[0], [1, 0, 0, 0])


def test_static_evolution():
    tr = propagate_matrix(make_preset("H1", 1.0, 0.0), 1.0)
    np.testing.assert_allclose(tr.final, np.diag([np.exp(-1j), np.exp(1j)]), atol=1e-11)
    pc = propagate_pauli(make_preset("H1", 1.0, 0.0), IntegratorSettings(dense_samples=51))
    t = pc.times
    np.testing.assert_allclose(pc.u0, np.cos(t), atol=1e-11)
    np.testing.assert_allclose(pc.components[:, 3], -1j * np.sin(t), atol=1e-11)
    np.testing.assert_allclose(pc.components[:, 1:3], 0, atol=1e-14)


def test_commuting_drive_closed_form():
    mu = 2.0
    m = make_preset("H1", 0.0, mu)
    np.testing.assert_allclose(propagate_matrix(m).final, np.eye(2), atol=1e-11)
    pc = propagate_pauli(m, IntegratorSettings(dense_samples=101))
    t = pc.times
    B = mu * (np.sin(2 * np.pi * t) / (2 * np.pi) + (1 - np.cos(4 * np.pi * t)) / (4 * np.pi))
    np.testing.assert_allclose(pc.u0, np.cosh(B), atol=1e-10)
    np.testing.assert_allclose(pc.components[:, 1], np.sinh(B), atol=1e-10)
    assert abs(pc.u0[-1] - 1) < 1e-10


def test_h1_reference_u0_inside_unit_interval():
    u0 = propagate_pauli(make_preset("H1", 1.0, 2.0)).u0[-1]
    assert abs(u0.imag) < 1e-10 and -1 <= u0.real <= 1
    assert u0.real == pytest.approx(0.41054007444530, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(name=st.sampled_from(PRESETS), g=st.floats(-4, 4), mu=st.floats(-4, 4), imag=st.booleans())
def test_det_one_at_dense_samples(name, g, mu, imag):
    m = make_preset(name, 1j * g if imag else g, mu, *_alpha(name))
    tr = propagate_matrix(m, settings=IntegratorSettings(dense_samples=200))
    assert np.max(np.abs(_det(tr.matrices) - 1) / _det_scale(tr.matrices)) <= 1e-9


@pytest.mark.parametrize("name,g,mu", [("H1", 1.0, 2.0), ("H1", 3.7, 3.9), ("H2", 2.5, 5.5), ("H2", 0.3j, 4.0)])
def test_det_one_absolute_for_bounded_growth(name, g, mu):
    tr = propagate_matrix(make_preset(name, g, mu))
    assert np.max(np.abs(_det(tr.matrices) - 1)) <= 1e-9


def test_pauli_matrix_equivalence_random_models():
    rng = np.random.default_rng(11)
    for _ in range(20):
        name = rng.choice(PRESETS)
        g = rng.uniform(-5, 5) * (1j if rng.random() < 0.3 else 1)
        prof = preset_profile(name, rng.uniform(-5, 5), *_alpha(name))
        m = TwoLevelModel.from_gamma(g, prof, frame=_random_frame(rng))
        s = IntegratorSettings(dense_samples=2)
        Up = propagate_pauli(m, s).matrices()[-1]
        Um = propagate_matrix(m, settings=s).final
        assert np.max(np.abs(Up - Um)) <= 1e-8 * max(1.0, np.max(np.abs(Um)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10), min_size=4, max_size=4))
def test_pauli_roundtrip(comps):
    rng = np.random.default_rng(len(comps))
    frame = _random_frame(rng)
    u = np.array(comps)
    np.testing.assert_allclose(matrix_to_pauli(pauli_to_matrix(u, frame), frame), u, atol=1e-12)


def test_pauli_norm_identity():
    pc = propagate_pauli(make_preset("H2", 1.3, 2.5), IntegratorSettings(dense_samples=300))
    u = pc.components
    q = u[:, 0] ** 2 - u[:, 1] ** 2 - u[:, 2] ** 2 - u[:, 3] ** 2
    assert np.max(np.abs(q - 1)) <= 1e-9 * np.max(np.abs(u) ** 2)


@pytest.mark.parametrize("key", [("H1", 1.0, 2.0), ("H2", 0.8, 1.5), ("H1b", 2.0, 1.0)])
def test_second_order_weak_residual(key):
    """psi = u0 +- u1 solves -psi'' + (b^2 +- b') psi = a^2 psi in weak form.

    With chi = u2 +- i u3 the first-order system gives psi' = +-(b psi - a chi), so
    psi' is exact at every sample and no differencing enters.
    """
    m = make_preset(*key)
    pc = propagate_pauli(m, IntegratorSettings(dense_samples=2001))
    t, u = pc.times, pc.components
    a, b, db = m.a, m.profile(t), m.profile.derivative(t)
    T = m.period
    for sgn in (1, -1):
        psi = u[:, 0] + sgn * u[:, 1]
        chi = u[:, 2] + sgn * 1j * u[:, 3]
        dpsi = sgn * (b * psi - a * chi)
        V = b * b + sgn * db
        for j in (1, 2, 3, 5):
            phi = np.sin(np.pi * j * t / T)
            dphi = np.pi * j / T * np.cos(np.pi * j * t / T)
            terms = dpsi * dphi + (V - a * a) * psi * phi
            scale = simpson(np.abs(dpsi * dphi), x=t) + simpson(np.abs((V - a * a) * psi * phi), x=t)
            assert abs(simpson(terms, x=t)) <= 1e-6 * scale


def test_error_estimate_sanity():
    m = make_preset("H1", 1.0, 2.0)
    loose = IntegratorSettings(rel_tol=1e-8, abs_tol=1e-10, dense_samples=2)
    tight = IntegratorSettings(rel_tol=5e-9, abs_tol=5e-11, dense_samples=2)
    t1 = propagate_matrix(m, settings=loose)
    t2 = propagate_matrix(m, settings=tight)
    du0 = abs(0.5 * np.trace(t1.final - t2.final))
    assert t1.error_estimate > 0
    assert du0 < 10 * t1.error_estimate


def test_midpoint_method_agrees():
    m = make_preset("H1", 1.0, 2.0)
    mid = propagate_matrix(m, settings=IntegratorSettings(method="midpoint-exponential", midpoint_steps=100_000,
                                                          dense_samples=5))
    ada = propagate_matrix(m, settings=IntegratorSettings(dense_samples=5))
    np.testing.assert_allclose(mid.matrices, ada.matrices, atol=1e-8)
    np.testing.assert_allclose(mid.times, ada.times, atol=0)


def test_batch_matches_single():
    models = [make_preset("H1", g, mu) for g, mu in [(0.3, 1.0), (2.0, 3.5), (1.0, 2.0)]]
    models.append(make_preset("H3", 1.0, 2.0, "2/5"))
    Ub = floquet_operators(models)
    u0 = floquet_u0(models)
    for m, U, u in zip(models, Ub, u0):
        Us = propagate_matrix(m, settings=IntegratorSettings(dense_samples=2)).final
        scale = max(1.0, np.max(np.abs(Us)))
        assert np.max(np.abs(U - Us)) < 1e-8 * scale
        assert abs(u - 0.5 * np.trace(Us)) < 1e-8 * scale


def test_batch_times_use_each_period():
    models = [make_preset("H3", 1.0, 1.0, "1/2"), make_preset("H3", 1.0, 1.0, "1/3")]
    times, ys, err = propagate_batch(models, IntegratorSettings(dense_samples=3))
    np.testing.assert_array_equal(times[-1], [2.0, 3.0])
    assert ys.shape == (3, 2, 2, 2) and err.shape == (2,)


def test_intra_period_spectrum_static():
    t, ev = intra_period_spectrum(make_preset("H1", 1.0, 0.0), IntegratorSettings(dense_samples=101))
    np.testing.assert_allclose(ev.real, np.cos(t)[:, None].repeat(2, axis=1), atol=1e-10)


def test_intra_period_spectrum_split_and_recombine():
    for g, mu in [(1.0, 2.0), (0.1, 4.0)]:
        t, ev = intra_period_spectrum(make_preset("H1", g, mu))
        np.testing.assert_allclose(ev[:, 0] * ev[:, 1], 1, atol=1e-9)
        assert abs(ev[0, 0].real - ev[0, 1].real) < 1e-9
        assert abs(ev[-1, 0].real - ev[-1, 1].real) < 1e-6
        assert len(split_events(t, ev)) >= 1


def test_intra_period_continuity():
    t, ev = intra_period_spectrum(make_preset("H2", 1.0, 4.0))
    jumps = np.abs(np.diff(ev, axis=0))
    # each branch moves continuously: steps stay far below the eigenvalue separation scale
    assert np.max(jumps) < 0.1


def test_split_events_bookkeeping():
    t = np.linspace(0, 1, 11)
    ev = np.zeros((11, 2), dtype=complex)
    ev[3:6, 0] = 0.5
    ev[8:, 0] = 0.5
    assert split_events(t, ev) == [(t[2], t[6])]


def test_settings_validation():
    with pytest.raises(ValueError):
        IntegratorSettings(method="rk4")
    with pytest.raises(ValueError):
        IntegratorSettings(rel_tol=0)
    with pytest.raises(ValueError):
        IntegratorSettings(dense_samples=1)
    with pytest.raises(ValueError):
        propagate_matrix(make_preset("H1", 1.0, 1.0), -1.0)
    with pytest.raises(ValueError):
        propagate_pauli(make_preset("H1", 1.0, 1.0), IntegratorSettings(method="midpoint-exponential"))


def test_blowup_reports_failure_time():
    with pytest.raises(IntegrationError) as info:
        dormand_prince(lambda s, y: y * y, np.ones((1, 1)), [0.0, 2.0])
    assert 0.9 < np.max(info.value.time) <= 1.0 + 1e-6


def test_dormand_prince_exponential():
    ys, err, n = dormand_prince(lambda s, y: 1j * y, np.ones((2, 1)), np.linspace(0, 3, 7))
    np.testing.assert_allclose(ys[:, 0, 0], np.exp(1j * np.linspace(0, 3, 7)), atol=1e-10)
    # the accumulated estimate uses the embedded 5th-order error, so it is conservative
    assert n > 0 and np.all(err < 1e-6) and np.all(err > 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3), min_size=3, max_size=3))
def test_expm_traceless_matches_scipy(v):
    from scipy.linalg import expm
    X = np.array([[v[0], v[1]], [v[2], -v[0]]])
    np.testing.assert_allclose(expm_traceless(X), expm(X), atol=1e-10 * np.exp(2 * np.abs(X).sum()))


def test_ordered_product_order():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(7, 2, 2)) + 1j * rng.normal(size=(7, 2, 2))
    ref = np.eye(2)
    for m in M:
        ref = m @ ref
    np.testing.assert_allclose(ordered_product(M), ref, rtol=1e-12)
