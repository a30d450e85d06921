"""Floquet decomposition of ``U(T)``, stability classes and stroboscopic dynamics."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .model import TwoLevelModel
from .propagator import IntegratorSettings, propagate_matrix

TOL_PHASE = 1e-6
TOL_EDGE = 1e-8
# S with a larger condition number is treated as (numerically) defective
DEFECTIVE_COND = 1e8


class Stability(str, Enum):
    EXTENDED_UNITARY = "extended_unitary"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"
    FAILED = "failed"

    def __str__(self):
        return self.value


class MarginalPowerError(ValueError):
    """Powers of a (possibly defective) marginal Floquet operator were requested."""


@dataclass(frozen=True)
class Classification:
    stability: Stability
    beta: float
    im_beta: float


def classify_stability(u0_T, tol_phase: float = TOL_PHASE, tol_edge: float = TOL_EDGE) -> Classification:
    """Classify from the half-trace ``u0(T)`` of a unit-determinant ``U(T)``.

    Stable iff ``u0(T)`` is real with ``|u0(T)| <= 1``; points within ``tol_edge``
    of ``+-1`` are marginal. ``beta = arccos(u0)`` lies in ``[0, pi]`` when real;
    otherwise ``im_beta = |Im arccos(u0)|``.
    """
    u = complex(u0_T)
    if not (np.isfinite(u.real) and np.isfinite(u.imag)):
        return Classification(Stability.FAILED, float("nan"), float("nan"))
    if abs(u.imag) <= tol_phase:
        x = u.real
        if abs(x) <= 1.0 - tol_edge:
            return Classification(Stability.EXTENDED_UNITARY, float(np.arccos(x)), 0.0)
        if abs(x) <= 1.0 + tol_edge:
            return Classification(Stability.MARGINAL, 0.0 if x > 0 else float(np.pi), 0.0)
    beta = np.arccos(u + 0j)
    return Classification(Stability.UNSTABLE, float("nan"), float(abs(beta.imag)))


@dataclass(frozen=True)
class FloquetDecomposition:
    """``U(T) = S D S^-1`` with ``D = diag(exp(i beta))``."""

    U: np.ndarray
    eigenvalues: np.ndarray
    eigenphases: np.ndarray
    S: np.ndarray
    condition: float
    stability: Stability
    defective: bool

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.eigenvalues)

    @property
    def max_im_beta(self) -> float:
        return float(np.max(np.abs(self.eigenphases.imag)))

    def reconstruct(self) -> np.ndarray:
        return self.S @ self.D @ np.linalg.inv(self.S)


def floquet_decompose(U_T, tol_phase: float = TOL_PHASE, tol_edge: float = TOL_EDGE) -> FloquetDecomposition:
    """Eigen-decompose a 2x2 Floquet operator and assign a stability class.

    Eigenphases satisfy ``lambda = exp(i beta)`` with ``Re beta`` in ``(-pi, pi]``.
    Coinciding eigenvalues (``u0`` within ``tol_edge`` of ``+-1``) are classed
    marginal and never treated as safely diagonalizable.
    """
    U = np.asarray(U_T, dtype=complex)
    lam, S = np.linalg.eig(U)
    beta = -1j * np.log(lam)
    cond = float(np.linalg.cond(S))
    defective = not np.isfinite(cond) or cond > DEFECTIVE_COND
    # |l1 - l2| = 2 |sin beta| ~ 2 sqrt(2 delta) at u0 = 1 - delta
    coincide = abs(lam[0] - lam[1]) <= 2.0 * np.sqrt(2.0 * tol_edge) * max(1.0, abs(lam[0]))
    if coincide or defective:
        stab = Stability.MARGINAL
    elif np.max(np.abs(beta.imag)) <= tol_phase:
        stab = Stability.EXTENDED_UNITARY
    else:
        stab = Stability.UNSTABLE
    return FloquetDecomposition(U, lam, beta, S, cond, stab, defective)


def stroboscopic_power(dec: FloquetDecomposition, N: int) -> np.ndarray:
    """``U(NT) = S D^N S^-1``.

    For the extended-unitary class the eigenphases are taken as exactly real.
    """
    N = int(N)
    if N < 0:
        raise ValueError("N must be non-negative")
    if dec.stability == Stability.MARGINAL:
        raise MarginalPowerError("marginal Floquet operator: S D^N S^-1 is not reliable (may grow linearly)")
    if N == 0:
        return np.eye(2, dtype=complex)
    beta = dec.eigenphases
    if dec.stability == Stability.EXTENDED_UNITARY:
        # residual |Im beta| <= tol_phase is integration error; dropping it keeps
        # U(NT) bounded uniformly in N, as the class asserts
        beta = beta.real
    DN = np.exp(1j * N * beta)
    return dec.S @ np.diag(DN) @ np.linalg.inv(dec.S)


def floquet_of(model: TwoLevelModel, settings: IntegratorSettings = IntegratorSettings(),
               tol_phase: float = TOL_PHASE, tol_edge: float = TOL_EDGE) -> FloquetDecomposition:
    traj = propagate_matrix(model, settings=IntegratorSettings(
        settings.method, settings.rel_tol, settings.abs_tol, settings.max_step, 2, settings.midpoint_steps))
    return floquet_decompose(traj.final, tol_phase, tol_edge)


@dataclass(frozen=True)
class PopulationTrace:
    times: np.ndarray
    amplitudes: np.ndarray

    @property
    def p_up(self) -> np.ndarray:
        return np.abs(self.amplitudes[:, 0]) ** 2

    @property
    def p_down(self) -> np.ndarray:
        return np.abs(self.amplitudes[:, 1]) ** 2


def population_trace(model: TwoLevelModel, initial=(1.0, 0.0), n_periods: int = 1,
                     settings: IntegratorSettings = IntegratorSettings()) -> PopulationTrace:
    """Amplitudes ``c(t) = U(t) c(0)`` over ``n_periods`` periods.

    Later periods reuse the first one: ``U(NT + t) = U(t) U(T)^N``.
    """
    c0 = np.asarray(initial, dtype=complex)
    if c0.shape != (2,) or not np.any(c0):
        raise ValueError("initial state must be a nonzero 2-vector")
    if int(n_periods) < 1:
        raise ValueError("n_periods must be >= 1")
    traj = propagate_matrix(model, settings=settings)
    T = model.period
    times = [traj.times]
    amps = [traj.matrices @ c0]
    UT = traj.final
    stro = np.eye(2, dtype=complex)
    for N in range(1, int(n_periods)):
        stro = UT @ stro
        times.append(N * T + traj.times[1:])
        amps.append(traj.matrices[1:] @ (stro @ c0))
    return PopulationTrace(np.concatenate(times), np.concatenate(amps))
