"""Mapped periodic potentials ``V(x) = b(x)**2 +- b'(x)`` and their Bloch bands.

Bands come from the plane-wave matrix
``H_nm = (k + 2 pi n / L)**2 delta_nm + V_{n-m}``, ``|n|, |m| <= M``,
solved with a general complex eigensolver so complex (PT-symmetric) potentials
are handled on the same path as real ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .model import TWO_PI, TwoLevelModel

DEFAULT_TRUNCATION = 32
TOL_ENERGY = 1e-8


class TruncationError(ValueError):
    """Plane-wave truncation too small for the potential's Fourier support."""


@dataclass(frozen=True)
class LatticePotential:
    """``V(x) = sum_n fourier[n] exp(2 pi i n x / L)``."""

    lattice_constant: float
    fourier: dict
    sign: str = "plus"

    def __post_init__(self):
        if not self.lattice_constant > 0:
            raise ValueError("lattice constant must be positive")
        if self.sign not in ("plus", "minus"):
            raise ValueError(f"sign must be 'plus' or 'minus', got {self.sign!r}")
        object.__setattr__(self, "lattice_constant", float(self.lattice_constant))
        object.__setattr__(self, "fourier", {int(n): complex(v) for n, v in sorted(self.fourier.items())})

    @property
    def support(self) -> int:
        return max((abs(n) for n, v in self.fourier.items() if v != 0), default=0)

    def coefficient(self, n: int) -> complex:
        return self.fourier.get(int(n), 0j)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for n, v in self.fourier.items():
            out = out + v * np.exp(1j * TWO_PI * n * x / self.lattice_constant)
        return complex(out) if out.ndim == 0 else out

    def is_real(self, tol: float = 1e-12) -> bool:
        """True when ``V(x)`` is real, i.e. ``V_{-n} = conj(V_n)``."""
        return all(abs(self.coefficient(-n) - np.conj(v)) <= tol * max(1.0, abs(v))
                   for n, v in self.fourier.items())


def map_to_potential(model: TwoLevelModel, sign: str = "plus") -> LatticePotential:
    """Exact Fourier coefficients of ``b**2 +- b'`` for the model's drive.

    ``b**2`` is a discrete convolution of the drive's exponential coefficients;
    ``b'`` multiplies coefficient ``n`` by ``2 pi i n / T``. No quadrature.
    """
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    T = model.period
    c = model.profile.exponential_coefficients()
    out = {}
    for n1, v1 in c.items():
        for n2, v2 in c.items():
            out[n1 + n2] = out.get(n1 + n2, 0j) + v1 * v2
    s = 1.0 if sign == "plus" else -1.0
    for n, v in c.items():
        out[n] = out.get(n, 0j) + s * (1j * TWO_PI * n / T) * v
    return LatticePotential(T, {n: v for n, v in out.items() if v != 0}, sign)


def default_truncation(pot: LatticePotential) -> int:
    """``M = 32`` per started 4 units of lattice constant, and at least twice the support."""
    return int(max(DEFAULT_TRUNCATION * np.ceil(pot.lattice_constant / 4.0),
                   2 * pot.support, DEFAULT_TRUNCATION))


def plane_wave_matrix(pot: LatticePotential, k: float, M: int) -> np.ndarray:
    n = np.arange(-M, M + 1)
    G = TWO_PI * n / pot.lattice_constant
    H = np.zeros((2 * M + 1, 2 * M + 1), dtype=complex)
    diff = n[:, None] - n[None, :]
    for d, v in pot.fourier.items():
        H[diff == d] = v
    H[np.diag_indices_from(H)] += (k + G) ** 2
    return H


def sort_spectrum(E, tie_tol: float = 1e-9) -> np.ndarray:
    """Sort by real part, ties by imaginary part.

    Real parts within ``tie_tol`` (relative) count as tied so conjugate pairs come
    out in a stable order despite rounding.
    """
    E = np.asarray(E)
    E = E[np.lexsort((E.imag, E.real))]
    out = []
    i = 0
    while i < len(E):
        j = i + 1
        while j < len(E) and E[j].real - E[j - 1].real <= tie_tol * max(1.0, abs(E[j].real)):
            j += 1
        group = E[i:j]
        out.extend(group[np.argsort(group.imag, kind="stable")])
        i = j
    return np.array(out, dtype=E.dtype)


def realness_flags(E, tol_energy: float = TOL_ENERGY) -> np.ndarray:
    E = np.asarray(E)
    return np.abs(E.imag) <= tol_energy * np.maximum(1.0, np.abs(E))


@dataclass(frozen=True)
class BandSolution:
    k: float
    truncation: int
    eigenvalues: np.ndarray
    real_flags: np.ndarray

    def nearest(self, energy: complex) -> complex:
        return self.eigenvalues[np.argmin(np.abs(self.eigenvalues - energy))]


def bands_at_k(pot: LatticePotential, k: float, M: Optional[int] = None,
               tol_energy: float = TOL_ENERGY, hermitian: bool = False) -> BandSolution:
    """All ``2M+1`` plane-wave eigenvalues at quasi-momentum ``k``.

    ``hermitian=True`` switches to the Hermitian solver; it is a cross-check for
    real potentials and refuses complex ones.
    """
    L = pot.lattice_constant
    if abs(k) > np.pi / L * (1 + 1e-12):
        raise ValueError(f"k={k!r} outside the first Brillouin zone |k| <= pi/L")
    M = default_truncation(pot) if M is None else int(M)
    if M < pot.support:
        raise TruncationError(f"truncation M={M} smaller than the potential support {pot.support}")
    H = plane_wave_matrix(pot, k, M)
    if hermitian:
        if not pot.is_real():
            raise ValueError("Hermitian path requires a real potential")
        E = scipy.linalg.eigvalsh(H).astype(complex)
    else:
        E = scipy.linalg.eigvals(H, check_finite=False)
    E = sort_spectrum(E)
    return BandSolution(float(k), M, E, realness_flags(E, tol_energy))


@dataclass(frozen=True)
class Dispersion:
    k: np.ndarray
    energies: np.ndarray
    real_flags: np.ndarray
    truncation: int

    def pt_breaking_onset(self, band: int = 0) -> Optional[float]:
        """First grid ``k`` whose band ``band`` fails the realness test."""
        bad = np.nonzero(~self.real_flags[:, band])[0]
        return float(self.k[bad[0]]) if len(bad) else None


def dispersion(pot: LatticePotential, k_grid: Sequence[float], n_bands: int = 5,
               M: Optional[int] = None, tol_energy: float = TOL_ENERGY) -> Dispersion:
    """Lowest ``n_bands`` eigenvalues (by real part) for each ``k`` in ``k_grid``."""
    M = default_truncation(pot) if M is None else int(M)
    ks = np.asarray(k_grid, dtype=float)
    E = np.empty((len(ks), n_bands), dtype=complex)
    for i, k in enumerate(ks):
        E[i] = bands_at_k(pot, k, M, tol_energy).eigenvalues[:n_bands]
    return Dispersion(ks, E, realness_flags(E, tol_energy), M)


@dataclass(frozen=True)
class PTCheck:
    symmetric: bool
    center: Optional[float]


def pt_check(pot: LatticePotential, centers: Optional[Sequence[float]] = None, tol: float = 1e-10) -> PTCheck:
    """Search shifts ``x0`` making every ``V_n exp(2 pi i n x0 / L)`` real.

    A hit means ``conj(V(x0 - x)) = V(x0 + x)``. The default candidates are 64
    equally spaced shifts per period, which covers the presets but is not a
    general PT detector.
    """
    L = pot.lattice_constant
    if centers is None:
        centers = np.arange(64) * L / 64
    ns = np.array(list(pot.fourier), dtype=float)
    vs = np.array(list(pot.fourier.values()), dtype=complex)
    for x0 in centers:
        shifted = vs * np.exp(1j * TWO_PI * ns * x0 / L)
        if np.all(np.abs(shifted.imag) <= tol * np.maximum(1.0, np.abs(vs))):
            return PTCheck(True, float(x0))
    return PTCheck(False, None)


def susy_pair_spectra(model: TwoLevelModel, k: float, M: Optional[int] = None):
    """Band solutions of the partner potentials ``V+`` and ``V-`` at ``k``."""
    plus = map_to_potential(model, "plus")
    minus = map_to_potential(model, "minus")
    if M is None:
        M = max(default_truncation(plus), default_truncation(minus))
    return bands_at_k(plus, k, M), bands_at_k(minus, k, M)


def pair_by_distance(E1, E2) -> np.ndarray:
    """Greedy nearest complex-distance pairing; returns ``|E1_i - E2_match(i)|``."""
    E2 = list(np.asarray(E2))
    d = []
    for e in np.asarray(E1):
        j = int(np.argmin(np.abs(np.asarray(E2) - e)))
        d.append(abs(E2.pop(j) - e))
    return np.array(d)


def nearest_band_distance(pot: LatticePotential, k: float, energy: float, M: Optional[int] = None) -> float:
    """``min_n |E_n(k) - energy|``."""
    sol = bands_at_k(pot, k, M)
    return float(np.min(np.abs(sol.eigenvalues - energy)))
