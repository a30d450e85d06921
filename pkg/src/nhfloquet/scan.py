"""Parameter sweeps: phase diagrams, Floquet-side dispersion and butterfly spectra.

Every sweep is split into fixed work units (a row of the phase diagram, a
column of the butterfly, ...). A unit integrates all its cells as one batch, so
results depend only on the unit contents, never on how units are scheduled.
"""

from __future__ import annotations

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .floquet import TOL_EDGE, TOL_PHASE, Classification, Stability, classify_stability
from .integrators import IntegrationError
from .lattice import bands_at_k, default_truncation, map_to_potential, nearest_band_distance
from .model import RationalAlpha, TwoLevelModel, farey_alphas, preset_profile
from .propagator import IntegratorSettings, floquet_u0

log = logging.getLogger(__name__)

WORKERS_ENV = "NHFLOQUET_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Tolerances:
    tol_phase: float = TOL_PHASE
    tol_edge: float = TOL_EDGE


def _pmap(func, units, workers: int):
    if workers <= 1 or len(units) <= 1:
        return [func(u) for u in units]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, units))


def classify_models(models: Sequence[TwoLevelModel], settings: IntegratorSettings,
                    tol: Tolerances) -> list:
    """Classify each model from its ``u0(T)``; integration failures become ``FAILED``.

    The whole list is integrated as one batch; if that fails, each model is
    retried on its own so a single bad cell does not sink its neighbours.
    """
    try:
        u0 = floquet_u0(models, settings)
        return [classify_stability(u, tol.tol_phase, tol.tol_edge) for u in u0]
    except IntegrationError:
        if len(models) == 1:
            return [Classification(Stability.FAILED, float("nan"), float("nan"))]
    out = []
    for m in models:
        try:
            out.append(classify_stability(floquet_u0([m], settings)[0], tol.tol_phase, tol.tol_edge))
        except IntegrationError as exc:
            log.warning("integration failed for a_sq=%r: %s", m.a_sq, exc)
            out.append(Classification(Stability.FAILED, float("nan"), float("nan")))
    return out


def _unpack(cls_list):
    stab = np.array([c.stability.value for c in cls_list], dtype=object)
    beta = np.array([c.beta for c in cls_list])
    imb = np.array([c.im_beta for c in cls_list])
    return stab, beta, imb


def _gamma_sq(g: complex) -> float:
    g = complex(g)
    return g.real * g.real - g.imag * g.imag


# phase diagram -------------------------------------------------------------

@dataclass(frozen=True)
class PhaseDiagram:
    family: str
    gammas: np.ndarray
    mus: np.ndarray
    stability: np.ndarray  # (n_mu, n_gamma) of class names
    beta: np.ndarray
    im_beta: np.ndarray
    alpha: Optional[str] = None

    columns = ("gamma_sq", "mu", "class", "beta", "im_beta")

    def rows(self):
        for i, mu in enumerate(self.mus):
            for j, g in enumerate(self.gammas):
                yield (_gamma_sq(g), float(mu), self.stability[i, j], self.beta[i, j], self.im_beta[i, j])

    def cell(self, gamma, mu) -> str:
        i = int(np.argmin(np.abs(self.mus - mu)))
        j = int(np.argmin(np.abs(self.gammas - gamma)))
        return self.stability[i, j]


def _phase_row(unit):
    family, alpha, mu, gammas, settings, tol = unit
    profile = preset_profile(family, mu, alpha)
    models = [TwoLevelModel.from_gamma(g, profile, label=family) for g in gammas]
    return _unpack(classify_models(models, settings, tol))


def phase_diagram(family: str, gammas, mus, alpha=None,
                  settings: IntegratorSettings = IntegratorSettings(dense_samples=2),
                  tol: Tolerances = Tolerances(), workers: int = 1) -> PhaseDiagram:
    """Classify every ``(gamma, mu)`` cell; ``gamma`` may be real or purely imaginary."""
    gammas = np.asarray(gammas)
    mus = np.asarray(mus, dtype=float)
    if gammas.ndim != 1 or mus.ndim != 1 or len(gammas) < 1 or len(mus) < 1:
        raise ValueError("gamma and mu grids must be non-empty 1-d arrays")
    if not (np.all(np.isfinite(gammas)) and np.all(np.isfinite(mus))):
        raise ValueError("grids must be finite")
    alpha = None if alpha is None else str(RationalAlpha.parse(alpha))
    units = [(family, alpha, float(mu), tuple(gammas.tolist()), settings, tol) for mu in mus]
    res = _pmap(_phase_row, units, workers)
    stab = np.array([r[0] for r in res], dtype=object)
    beta = np.array([r[1] for r in res])
    imb = np.array([r[2] for r in res])
    return PhaseDiagram(family, gammas, mus, stab, beta, imb, alpha)


# dispersion ----------------------------------------------------------------

@dataclass(frozen=True)
class FloquetDispersion:
    family: str
    mu: float
    gamma_sq: np.ndarray
    stability: np.ndarray
    beta: np.ndarray
    im_beta: np.ndarray
    period: float

    def stable_points(self):
        """``(beta, gamma_sq)`` pairs where extended unitarity holds."""
        sel = self.stability == Stability.EXTENDED_UNITARY.value
        return self.beta[sel], self.gamma_sq[sel]


def _chunks(seq, size):
    return [tuple(seq[i:i + size]) for i in range(0, len(seq), size)]


def _dispersion_unit(unit):
    family, alpha, mu, gsq, settings, tol = unit
    profile = preset_profile(family, mu, alpha)
    models = [TwoLevelModel.from_gamma_sq(g, profile, label=family) for g in gsq]
    return _unpack(classify_models(models, settings, tol))


def floquet_dispersion(family: str, mu: float, gamma_sq_grid, alpha=None,
                       settings: IntegratorSettings = IntegratorSettings(dense_samples=2),
                       tol: Tolerances = Tolerances(), workers: int = 1,
                       chunk: int = 100) -> FloquetDispersion:
    """Scan ``gamma**2`` at fixed ``mu``; negative values use ``gamma = i sqrt(-gamma**2)``."""
    gsq = np.asarray(gamma_sq_grid, dtype=float)
    alpha = None if alpha is None else str(RationalAlpha.parse(alpha))
    units = [(family, alpha, float(mu), c, settings, tol) for c in _chunks(gsq.tolist(), chunk)]
    res = _pmap(_dispersion_unit, units, workers)
    stab = np.concatenate([r[0] for r in res])
    beta = np.concatenate([r[1] for r in res])
    imb = np.concatenate([r[2] for r in res])
    period = preset_profile(family, mu, alpha).base_period
    return FloquetDispersion(family, float(mu), gsq, stab, beta, imb, period)


@dataclass(frozen=True)
class DispersionComparison:
    mu: float
    floquet: FloquetDispersion
    band_k: np.ndarray  # k * L on [0, pi]
    band_energies: np.ndarray  # (n_k, n_bands), complex
    discrepancies: np.ndarray  # per stable Floquet point
    truncation: int

    @property
    def max_discrepancy(self) -> float:
        return float(np.max(self.discrepancies)) if len(self.discrepancies) else 0.0


def _band_unit(unit):
    pot, kL, M = unit
    L = pot.lattice_constant
    return [bands_at_k(pot, x / L, M).eigenvalues for x in kL]


def compare_dispersion(family: str, mu: float, gamma_sq_grid, alpha=None, n_k: int = 101,
                       n_bands: int = 5, M: Optional[int] = None,
                       settings: IntegratorSettings = IntegratorSettings(dense_samples=2),
                       tol: Tolerances = Tolerances(), workers: int = 1) -> DispersionComparison:
    """Floquet points against band curves of the mapped ``V+``.

    Each stable point ``(beta, gamma**2)`` is checked at its own ``k = beta/T``
    (no interpolation between band-curve samples).
    """
    fd = floquet_dispersion(family, mu, gamma_sq_grid, alpha, settings, tol, workers)
    profile = preset_profile(family, mu, None if alpha is None else alpha)
    model = TwoLevelModel.from_gamma_sq(0.0, profile)
    pot = map_to_potential(model, "plus")
    M = default_truncation(pot) if M is None else int(M)
    kL = np.linspace(0.0, np.pi, int(n_k))
    bands = np.concatenate(_pmap(_band_unit, [(pot, c, M) for c in _chunks(kL.tolist(), 25)], workers))
    E = bands[:, :n_bands]
    beta, gsq = fd.stable_points()
    L = pot.lattice_constant
    disc = np.array([nearest_band_distance(pot, b / L, g, M) for b, g in zip(beta, gsq)])
    return DispersionComparison(float(mu), fd, kL, E, disc, M)


# butterfly -----------------------------------------------------------------

@dataclass(frozen=True)
class ButterflyData:
    family: str
    mu: float
    q_max: int
    gamma_sq: np.ndarray
    alphas: tuple
    stability: np.ndarray  # (n_alpha, n_gamma)
    beta: np.ndarray
    im_beta: np.ndarray

    columns = ("p", "q", "alpha", "gamma_sq", "class", "beta")

    def rows(self):
        for i, a in enumerate(self.alphas):
            for j, g in enumerate(self.gamma_sq):
                yield (a.p, a.q, a.value, float(g), self.stability[i, j], self.beta[i, j])

    def column(self, alpha) -> int:
        alpha = RationalAlpha.parse(alpha)
        return self.alphas.index(alpha)

    def stable_mask(self) -> np.ndarray:
        return self.stability == Stability.EXTENDED_UNITARY.value

    def gap_count(self, alpha) -> int:
        """Interior runs of non-stable ``gamma**2`` cells at fixed ``alpha``.

        A gap is a maximal run of non-stable grid cells with stable cells on both
        sides; unbounded runs below the first or above the last band do not count.
        """
        col = self.stable_mask()[self.column(alpha)]
        groups = [k for k, _ in itertools.groupby(col)]
        return sum(1 for i, k in enumerate(groups) if not k and 0 < i < len(groups) - 1)


def _butterfly_unit(unit):
    family, alpha, mu, gsq, settings, tol = unit
    profile = preset_profile(family, mu, alpha)
    models = [TwoLevelModel.from_gamma_sq(g, profile, label=family) for g in gsq]
    return _unpack(classify_models(models, settings, tol))


def butterfly(family: str, mu: float, q_max: int, gamma_sq_grid, alpha_range=(0.0, 1.0),
              settings: IntegratorSettings = IntegratorSettings(dense_samples=2),
              tol: Tolerances = Tolerances(), workers: int = 1) -> ButterflyData:
    """Stability over co-prime ``alpha = p/q`` in ``(lo, hi]`` with ``q <= q_max``.

    Each ``alpha`` uses the combined period ``q``.
    """
    if family not in ("H3", "H4"):
        raise ValueError("butterfly scans need a two-frequency preset (H3 or H4)")
    if int(q_max) < 1:
        raise ValueError("q_max must be >= 1")
    gsq = np.asarray(gamma_sq_grid, dtype=float)
    alphas = tuple(farey_alphas(int(q_max), *alpha_range))
    units = [(family, str(a), float(mu), tuple(gsq.tolist()), settings, tol) for a in alphas]
    res = _pmap(_butterfly_unit, units, workers)
    stab = np.array([r[0] for r in res], dtype=object).reshape(len(alphas), len(gsq))
    beta = np.array([r[1] for r in res]).reshape(len(alphas), len(gsq))
    imb = np.array([r[2] for r in res]).reshape(len(alphas), len(gsq))
    return ButterflyData(family, float(mu), int(q_max), gsq, alphas, stab, beta, imb)


def _cross_unit(unit):
    family, mu, alpha, points, M = unit
    profile = preset_profile(family, mu, alpha)
    pot = map_to_potential(TwoLevelModel.from_gamma_sq(0.0, profile), "plus")
    L = pot.lattice_constant
    return [nearest_band_distance(pot, b / L, g, M) for b, g in points]


@dataclass(frozen=True)
class CrossCheck:
    alphas: tuple
    gamma_sq: np.ndarray
    beta: np.ndarray
    distance: np.ndarray
    threshold: float

    @property
    def passed(self) -> np.ndarray:
        return self.distance <= self.threshold

    @property
    def pass_fraction(self) -> float:
        return float(np.mean(self.passed)) if len(self.distance) else 1.0


def butterfly_cross_check(data: ButterflyData, threshold: float = 1e-4, M: Optional[int] = None,
                          workers: int = 1) -> CrossCheck:
    """Lattice-side check of every stable butterfly point at ``k = beta / q``."""
    units = []
    al, gs, bs = [], [], []
    mask = data.stable_mask()
    for i, a in enumerate(data.alphas):
        pts = [(float(data.beta[i, j]), float(data.gamma_sq[j])) for j in np.nonzero(mask[i])[0]]
        if not pts:
            continue
        units.append((data.family, data.mu, str(a), tuple(pts), M))
        al.extend([a] * len(pts))
        bs.extend(p[0] for p in pts)
        gs.extend(p[1] for p in pts)
    dist = np.concatenate(_pmap(_cross_unit, units, workers)) if units else np.zeros(0)
    chk = CrossCheck(tuple(al), np.array(gs), np.array(bs), dist, threshold)
    for a, g, b, d in zip(chk.alphas, chk.gamma_sq, chk.beta, chk.distance):
        if d > threshold:
            log.warning("cross-check miss: alpha=%s gamma_sq=%r beta=%r distance=%.3e", a, g, b, d)
    return chk
