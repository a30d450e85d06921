"""Quick invariant checks run by ``nhfloquet selftest`` (a few seconds)."""

from __future__ import annotations

import numpy as np

from .floquet import Stability, classify_stability, floquet_decompose, population_trace
from .lattice import (LatticePotential, bands_at_k, map_to_potential, nearest_band_distance, pair_by_distance,
                      susy_pair_spectra)
from .model import TwoLevelModel, make_preset, preset_profile
from .propagator import IntegratorSettings, floquet_operators, propagate_matrix, propagate_pauli

# u0(T) of H1 at gamma=1, mu=2 from the fixed-step exponential oracle
_H1_U0 = 0.41054007444


def _det_one():
    tr = propagate_matrix(make_preset("H1", 1.0, 2.0), settings=IntegratorSettings(dense_samples=200))
    d = tr.matrices[:, 0, 0] * tr.matrices[:, 1, 1] - tr.matrices[:, 0, 1] * tr.matrices[:, 1, 0]
    err = float(np.max(np.abs(d - 1)))
    return err < 1e-8, f"max |det U - 1| = {err:.2e}"


def _u0_reference():
    U = propagate_matrix(make_preset("H1", 1.0, 2.0), settings=IntegratorSettings(dense_samples=2)).final
    u0 = 0.5 * np.trace(U)
    return abs(u0 - _H1_U0) < 1e-9, f"u0 = {u0!r}"


def _pauli_matches_matrix():
    m = make_preset("H2", 0.7, 1.3)
    s = IntegratorSettings(dense_samples=50)
    dev = float(np.max(np.abs(propagate_pauli(m, s).matrices() - propagate_matrix(m, settings=s).matrices)))
    return dev < 1e-8, f"max deviation = {dev:.2e}"


def _population_difference():
    tr = population_trace(make_preset("H1", 1.0, 2.0), n_periods=2,
                          settings=IntegratorSettings(dense_samples=200))
    dev = float(np.max(np.abs(tr.p_up - tr.p_down - 1)))
    return dev < 1e-8, f"max |P_up - P_down - 1| = {dev:.2e}"


def _classify_agrees():
    rng = np.random.default_rng(7)
    models = [make_preset("H1", g, m) for g, m in rng.uniform(0.05, 4.0, size=(40, 2))]
    Us = floquet_operators(models, IntegratorSettings(dense_samples=2))
    bad = 0
    for U in Us:
        a = classify_stability(0.5 * np.trace(U)).stability
        b = floquet_decompose(U).stability
        bad += a != b and Stability.MARGINAL not in (a, b)
    return bad == 0, f"{bad} disagreements"


def _mapping_identity():
    prof = preset_profile("H1", 2.0)
    pot = map_to_potential(TwoLevelModel.from_gamma_sq(0.0, prof), "plus")
    worst = 0.0
    for gsq in (1.5, 9.0, 20.0, 33.0):
        U = propagate_matrix(TwoLevelModel.from_gamma_sq(gsq, prof), settings=IntegratorSettings(dense_samples=2)).final
        c = classify_stability(0.5 * np.trace(U))
        if c.stability is Stability.EXTENDED_UNITARY:
            worst = max(worst, nearest_band_distance(pot, c.beta, gsq))
    return worst < 1e-6, f"worst band distance = {worst:.2e}"


def _susy_pair():
    plus, minus = susy_pair_spectra(make_preset("H1", 1.0, 2.0), 0.4)
    dev = float(np.max(pair_by_distance(plus.eigenvalues[:6], minus.eigenvalues[:12])))
    return dev < 1e-8, f"max |E+ - E-| over 6 bands = {dev:.2e}"


def _hermitian_unitary():
    m = make_preset("H1", 1.0, 2.0).hermitian_counterpart()
    U = propagate_matrix(m, settings=IntegratorSettings(dense_samples=2)).final
    dev = float(np.max(np.abs(U.conj().T @ U - np.eye(2))))
    return dev < 1e-8, f"max |U^+ U - 1| = {dev:.2e}"


def _real_potential_bands():
    pot = LatticePotential(1.0, {0: 1.0, 1: 0.5, -1: 0.5})
    sol = bands_at_k(pot, 0.3)
    return bool(np.all(sol.real_flags[:5])), "lowest five bands real"


CHECKS = (
    ("det_one", _det_one),
    ("u0_reference", _u0_reference),
    ("pauli_matches_matrix", _pauli_matches_matrix),
    ("population_difference", _population_difference),
    ("classify_agrees", _classify_agrees),
    ("mapping_identity", _mapping_identity),
    ("susy_pair", _susy_pair),
    ("hermitian_unitary", _hermitian_unitary),
    ("real_potential_bands", _real_potential_bands),
)


def run_selftest():
    """Run every check; returns ``[(name, passed, message)]``."""
    out = []
    for name, func in CHECKS:
        try:
            ok, msg = func()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, msg = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), msg))
    return out
