"""Time propagation of ``i dU/dt = H(t) U`` and of its Pauli components."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .integrators import IntegrationError, dormand_prince, midpoint_exponential
from .model import PAULI, TWO_PI, TwoLevelModel, hamiltonian_at

__all__ = [
    "IntegratorSettings",
    "IntegrationError",
    "PropagatorTrajectory",
    "PauliComponents",
    "propagate_matrix",
    "propagate_pauli",
    "propagate_batch",
    "floquet_u0",
    "pauli_to_matrix",
    "matrix_to_pauli",
    "intra_period_spectrum",
]

ADAPTIVE = "adaptive"
MIDPOINT = "midpoint-exponential"


@dataclass(frozen=True)
class IntegratorSettings:
    """Integrator choice and tolerances.

    ``dense_samples`` counts sample points per period including both ends;
    ``midpoint_steps`` is the step count per period of the fixed-step oracle.
    """

    method: str = ADAPTIVE
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf
    dense_samples: int = 1000
    midpoint_steps: int = 1_000_000

    def __post_init__(self):
        if self.method not in (ADAPTIVE, MIDPOINT):
            raise ValueError(f"unknown method {self.method!r}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if int(self.dense_samples) < 2:
            raise ValueError("dense_samples must be >= 2")
        if int(self.midpoint_steps) < 1:
            raise ValueError("midpoint_steps must be >= 1")


@dataclass(frozen=True)
class PropagatorTrajectory:
    times: np.ndarray
    matrices: np.ndarray
    error_estimate: float

    @property
    def final(self) -> np.ndarray:
        return self.matrices[-1]


@dataclass(frozen=True)
class PauliComponents:
    """``U(t) = u0 + sum_i u_i (n_i . sigma)``; ``components[:, 0]`` is ``u0``."""

    times: np.ndarray
    components: np.ndarray
    error_estimate: float
    frame: tuple

    @property
    def u0(self):
        return self.components[:, 0]

    def matrices(self) -> np.ndarray:
        return pauli_to_matrix(self.components, self.frame)


def _frame_sigma(frame):
    return np.stack([np.tensordot(np.asarray(n), PAULI, axes=1) for n in frame])


def pauli_to_matrix(components, frame) -> np.ndarray:
    comps = np.asarray(components)
    N = _frame_sigma(frame)
    out = np.einsum("...i,ijk->...jk", comps[..., 1:], N)
    out[..., 0, 0] += comps[..., 0]
    out[..., 1, 1] += comps[..., 0]
    return out


def matrix_to_pauli(U, frame) -> np.ndarray:
    """Components with respect to ``frame`` via ``u_i = tr(U n_i.sigma) / 2``."""
    U = np.asarray(U)
    N = _frame_sigma(frame)
    u0 = 0.5 * (U[..., 0, 0] + U[..., 1, 1])
    ui = 0.5 * np.einsum("...jk,ikj->...i", U, N)
    return np.concatenate([u0[..., None], ui], axis=-1)


class _Batch:
    """Stacked harmonic tables for a batch of models, on the unit ``s``-interval."""

    def __init__(self, models: Sequence[TwoLevelModel], t_end):
        B = len(models)
        K = max(1, max(len(m.profile.harmonics) for m in models))
        self.t_end = np.broadcast_to(np.asarray(t_end, dtype=float), (B,)).copy()
        self.omega = np.zeros((B, K))
        self.ca = np.zeros((B, K), dtype=complex)
        self.sa = np.zeros((B, K), dtype=complex)
        for i, mdl in enumerate(models):
            m, c, s = mdl.profile.arrays()
            self.omega[i, : len(m)] = TWO_PI * m / mdl.period
            self.ca[i, : len(m)] = c
            self.sa[i, : len(m)] = s
        self.a = np.array([m.a for m in models], dtype=complex)
        frames = [(m.n1, m.n2, m.n3) for m in models]
        self.frames = frames
        sig = np.stack([_frame_sigma(f) for f in frames])  # (B, 3, 2, 2)
        self.N1 = sig[:, 0]
        self.N3 = sig[:, 2]

    def drive(self, t):
        ph = self.omega * t[:, None]
        return np.sum(self.ca * np.cos(ph) + self.sa * np.sin(ph), axis=1)

    def matrix_rhs(self, s, U):
        t = s * self.t_end
        b = self.drive(t)
        G = (-1j * self.a)[:, None, None] * self.N3 + b[:, None, None] * self.N1
        return self.t_end[:, None, None] * (G @ U)

    def pauli_rhs(self, s, u):
        t = s * self.t_end
        b = self.drive(t)
        a = self.a
        u0, u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2], u[:, 3]
        du = np.stack([
            b * u1 - 1j * a * u3,
            b * u0 - a * u2,
            a * u1 - 1j * b * u3,
            -1j * a * u0 + 1j * b * u2,
        ], axis=1)
        return self.t_end[:, None] * du


def _sample_grid(n):
    return np.linspace(0.0, 1.0, int(n))


def propagate_batch(models: Sequence[TwoLevelModel], settings: IntegratorSettings = IntegratorSettings(),
                    form: str = "matrix", t_end=None, n_samples: Optional[int] = None):
    """Adaptive propagation of several models with one shared step sequence.

    Each member runs on its own ``[0, t_end_i]`` (default: its period), rescaled
    to a common unit interval. Results depend on the batch composition only
    through the shared step sequence, which is at least as fine as any member
    needs for the requested tolerance.

    Returns ``(times (n, B), states (n, B, ...), error (B,))``.
    """
    if settings.method != ADAPTIVE:
        raise ValueError("batched propagation uses the adaptive method")
    batch = _Batch(models, [m.period for m in models] if t_end is None else t_end)
    n = settings.dense_samples if n_samples is None else n_samples
    s_grid = _sample_grid(n)
    B = len(models)
    if form == "matrix":
        y0 = np.broadcast_to(np.eye(2, dtype=complex), (B, 2, 2)).copy()
        rhs = batch.matrix_rhs
    elif form == "pauli":
        y0 = np.zeros((B, 4), dtype=complex)
        y0[:, 0] = 1.0
        rhs = batch.pauli_rhs
    else:
        raise ValueError(f"unknown form {form!r}")
    max_step = settings.max_step / np.max(batch.t_end)
    ys, err, _ = dormand_prince(rhs, y0, s_grid, settings.rel_tol, settings.abs_tol,
                                max_step, time_scale=batch.t_end)
    times = np.multiply.outer(s_grid, batch.t_end)
    return times, ys, err


def _n_samples(model, t_end, settings):
    return max(2, int(round((settings.dense_samples - 1) * t_end / model.period)) + 1)


def propagate_matrix(model: TwoLevelModel, t_end: Optional[float] = None,
                     settings: IntegratorSettings = IntegratorSettings()) -> PropagatorTrajectory:
    """Propagator ``U(t)`` on a uniform grid over ``[0, t_end]`` (default one period).

    ``U(0)`` is the identity exactly. The adaptive method restarts at every
    sample point instead of interpolating.
    """
    t_end = model.period if t_end is None else float(t_end)
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    n = _n_samples(model, t_end, settings)
    if settings.method == MIDPOINT:
        times = np.linspace(0.0, t_end, n)
        N1, _, N3 = model.frame_matrices()
        a = model.a

        def H(t):
            b = model.profile(t)
            return a * N3[None] + (1j * b)[:, None, None] * N1[None]

        steps = int(np.ceil(settings.midpoint_steps * t_end / model.period))
        Us = midpoint_exponential(H, times, steps)
        return PropagatorTrajectory(times, Us, float("nan"))
    times, ys, err = propagate_batch([model], settings, "matrix", t_end, n)
    return PropagatorTrajectory(times[:, 0], ys[:, 0], float(err[0]))


def propagate_pauli(model: TwoLevelModel, settings: IntegratorSettings = IntegratorSettings(),
                    t_end: Optional[float] = None) -> PauliComponents:
    """Components ``(u0, u1, u2, u3)(t)`` from the first-order component system."""
    if settings.method != ADAPTIVE:
        raise ValueError("the component system is integrated with the adaptive method only")
    t_end = model.period if t_end is None else float(t_end)
    n = _n_samples(model, t_end, settings)
    times, ys, err = propagate_batch([model], settings, "pauli", t_end, n)
    return PauliComponents(times[:, 0], ys[:, 0], float(err[0]), (model.n1, model.n2, model.n3))


def floquet_u0(models: Sequence[TwoLevelModel], settings: IntegratorSettings = IntegratorSettings()):
    """Half-trace ``u0(T)`` of the one-period propagator for each model (batched)."""
    _, ys, _ = propagate_batch(models, settings, "pauli", n_samples=2)
    return ys[-1, :, 0]


def floquet_operators(models: Sequence[TwoLevelModel], settings: IntegratorSettings = IntegratorSettings()):
    """``U(T)`` for each model (batched), shape ``(B, 2, 2)``."""
    _, ys, _ = propagate_batch(models, settings, "matrix", n_samples=2)
    return ys[-1]


def _match_pairs(ev):
    """Reorder eigenvalue pairs so each sample continues the previous one."""
    out = ev.copy()
    for j in range(1, len(out)):
        prev = out[j - 1]
        cur = out[j]
        keep = abs(cur[0] - prev[0]) + abs(cur[1] - prev[1])
        swap = abs(cur[1] - prev[0]) + abs(cur[0] - prev[1])
        if swap < keep:
            out[j] = cur[::-1]
    return out


def intra_period_spectrum(model: TwoLevelModel, settings: IntegratorSettings = IntegratorSettings(),
                          trajectory: Optional[PropagatorTrajectory] = None):
    """Eigenvalues of ``U(t)`` at the dense samples of one period.

    Returns ``(times, eigenvalues)`` with ``eigenvalues`` of shape ``(n, 2)``,
    ordered continuously in ``t`` by nearest-neighbour matching.
    """
    traj = propagate_matrix(model, settings=settings) if trajectory is None else trajectory
    ev = np.linalg.eigvals(traj.matrices)
    return traj.times, _match_pairs(ev)


def split_events(times, eigenvalues, tol=1e-6):
    """Intervals where the two real parts differ, bounded by coincidence on both sides.

    Returns a list of ``(t_split, t_recombine)`` for runs strictly inside the
    sampled interval.
    """
    d = np.abs(eigenvalues[:, 0].real - eigenvalues[:, 1].real)
    split = d > tol
    events = []
    j = 0
    n = len(split)
    while j < n:
        if split[j]:
            k = j
            while k < n and split[k]:
                k += 1
            if j > 0 and k < n:
                events.append((times[j - 1], times[k]))
            j = k
        else:
            j += 1
    return events


def hamiltonian_samples(model: TwoLevelModel, times) -> np.ndarray:
    return np.stack([hamiltonian_at(model, t) for t in times])
