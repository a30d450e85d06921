"""Driving profiles and the traceless two-level Hamiltonian family.

The Hamiltonian is ``H(t) = a (n3 . sigma) + i b(t) (n1 . sigma)`` where ``a**2`` is
real and ``b`` is a complex, periodic harmonic series.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence, Union

import numpy as np

TWO_PI = 2.0 * np.pi

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

PRESETS = ("H1", "H1b", "H2", "H3", "H4")


class ModelError(ValueError):
    """Invalid model construction."""


@dataclass(frozen=True)
class Harmonic:
    """One term ``cos_amp*cos(2 pi m t/T) + sin_amp*sin(2 pi m t/T)``."""

    m: int
    cos_amp: complex = 0j
    sin_amp: complex = 0j

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ModelError(f"harmonic index must be a non-negative integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "cos_amp", complex(self.cos_amp))
        # sin(0) vanishes identically
        object.__setattr__(self, "sin_amp", complex(self.sin_amp) if self.m else 0j)


@dataclass(frozen=True)
class DrivingProfile:
    """Finite harmonic series ``b(t)`` with base period ``base_period``.

    Evaluation and differentiation accept scalars or numpy arrays of times.
    """

    base_period: float
    harmonics: tuple = ()

    def __post_init__(self):
        T = float(self.base_period)
        if not np.isfinite(T) or T <= 0:
            raise ModelError(f"base_period must be positive, got {self.base_period!r}")
        object.__setattr__(self, "base_period", T)
        hs = tuple(h if isinstance(h, Harmonic) else Harmonic(*h) for h in self.harmonics)
        idx = [h.m for h in hs]
        if len(set(idx)) != len(idx):
            raise ModelError(f"harmonic indices must be unique, got {idx}")
        object.__setattr__(self, "harmonics", tuple(sorted(hs, key=lambda h: h.m)))

    @classmethod
    def zero(cls, base_period: float = 1.0) -> "DrivingProfile":
        return cls(base_period, ())

    @property
    def max_harmonic(self) -> int:
        return max((h.m for h in self.harmonics), default=0)

    def arrays(self):
        """Return ``(m, cos_amp, sin_amp)`` as numpy arrays."""
        m = np.array([h.m for h in self.harmonics], dtype=float)
        c = np.array([h.cos_amp for h in self.harmonics], dtype=complex)
        s = np.array([h.sin_amp for h in self.harmonics], dtype=complex)
        return m, c, s

    def __call__(self, t):
        m, c, s = self.arrays()
        t = np.asarray(t, dtype=float)
        phase = TWO_PI / self.base_period * np.multiply.outer(t, m)
        out = np.cos(phase) @ c + np.sin(phase) @ s
        return complex(out) if out.ndim == 0 else out

    def derivative(self, t):
        """Exact derivative of the series."""
        m, c, s = self.arrays()
        w = TWO_PI * m / self.base_period
        t = np.asarray(t, dtype=float)
        phase = TWO_PI / self.base_period * np.multiply.outer(t, m)
        out = np.cos(phase) @ (w * s) - np.sin(phase) @ (w * c)
        return complex(out) if out.ndim == 0 else out

    def exponential_coefficients(self) -> dict:
        """Coefficients ``c_n`` with ``b(t) = sum_n c_n exp(2 pi i n t/T)``."""
        coeffs = {}
        for h in self.harmonics:
            if h.m == 0:
                coeffs[0] = coeffs.get(0, 0j) + h.cos_amp
                continue
            coeffs[h.m] = coeffs.get(h.m, 0j) + 0.5 * (h.cos_amp - 1j * h.sin_amp)
            coeffs[-h.m] = coeffs.get(-h.m, 0j) + 0.5 * (h.cos_amp + 1j * h.sin_amp)
        return {n: v for n, v in sorted(coeffs.items()) if v != 0}

    def scaled(self, factor: complex) -> "DrivingProfile":
        return DrivingProfile(
            self.base_period,
            tuple(Harmonic(h.m, factor * h.cos_amp, factor * h.sin_amp) for h in self.harmonics),
        )

    def hermitian_counterpart(self) -> "DrivingProfile":
        """Profile ``b_h`` for which ``i*b_h(t)`` is real at every ``t``.

        Each amplitude ``c`` is replaced by ``-i (Re c + Im c)``, i.e. every explicit
        ``i`` in the drive is replaced by ``1`` and the overall anti-Hermitian ``i`` is
        cancelled.
        """
        def h(z):
            return -1j * (z.real + z.imag)

        return DrivingProfile(
            self.base_period,
            tuple(Harmonic(x.m, h(x.cos_amp), h(x.sin_amp)) for x in self.harmonics),
        )


@dataclass(frozen=True)
class RationalAlpha:
    """Frequency ratio ``p/q`` of the two-frequency presets."""

    p: int
    q: int

    def __post_init__(self):
        if int(self.p) != self.p or int(self.q) != self.q or self.p <= 0 or self.q <= 0:
            raise ModelError(f"alpha needs positive integers, got {self.p}/{self.q}")
        if gcd(int(self.p), int(self.q)) != 1:
            raise ModelError(f"alpha = {self.p}/{self.q} is not in lowest terms")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "q", int(self.q))

    @classmethod
    def parse(cls, value: Union[str, "RationalAlpha", Fraction, tuple]) -> "RationalAlpha":
        if isinstance(value, RationalAlpha):
            return value
        if isinstance(value, tuple):
            return cls(*value)
        if isinstance(value, Fraction):
            return cls(value.numerator, value.denominator)
        text = str(value).strip()
        if "/" in text:
            p, q = text.split("/", 1)
            return cls(int(p), int(q))
        return cls(int(text), 1)

    @property
    def value(self) -> float:
        return self.p / self.q

    def __str__(self):
        return f"{self.p}/{self.q}"


_CANONICAL_FRAME = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


def _check_frame(n1, n2, n3):
    F = np.array([n1, n2, n3], dtype=float)
    if F.shape != (3, 3):
        raise ModelError("frame vectors must be three real 3-vectors")
    if np.max(np.abs(F @ F.T - np.eye(3))) > 1e-12:
        raise ModelError("frame is not orthonormal")
    if np.max(np.abs(np.cross(F[0], F[1]) - F[2])) > 1e-12:
        raise ModelError("frame is not right-handed (n1 x n2 != n3)")


@dataclass(frozen=True)
class TwoLevelModel:
    """``H(t) = a (n3 . sigma) + i b(t) (n1 . sigma)``.

    ``a`` is stored through its real square ``a_sq`` and a branch, so ``a**2`` is
    real by construction. ``branch='real'`` needs ``a_sq >= 0`` and gives
    ``a = a_sign*sqrt(a_sq)``; ``branch='imaginary'`` needs ``a_sq <= 0`` and gives
    ``a = a_sign*1j*sqrt(-a_sq)``.
    """

    a_sq: float
    profile: DrivingProfile
    branch: str = "real"
    a_sign: int = 1
    n1: tuple = _CANONICAL_FRAME[0]
    n2: tuple = _CANONICAL_FRAME[1]
    n3: tuple = _CANONICAL_FRAME[2]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        a_sq = float(self.a_sq)
        if not np.isfinite(a_sq):
            raise ModelError("a_sq must be finite")
        if self.branch not in ("real", "imaginary"):
            raise ModelError(f"branch must be 'real' or 'imaginary', got {self.branch!r}")
        if self.branch == "real" and a_sq < 0:
            raise ModelError("real branch requires a_sq >= 0")
        if self.branch == "imaginary" and a_sq > 0:
            raise ModelError("imaginary branch requires a_sq <= 0")
        if self.a_sign not in (1, -1):
            raise ModelError("a_sign must be +1 or -1")
        object.__setattr__(self, "a_sq", a_sq)
        for name in ("n1", "n2", "n3"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        _check_frame(self.n1, self.n2, self.n3)

    @classmethod
    def from_gamma(cls, gamma, profile: DrivingProfile, frame: Optional[Sequence] = None,
                   label: str = "") -> "TwoLevelModel":
        """Build from a static amplitude that is real or purely imaginary."""
        g = complex(gamma)
        if g.real != 0 and g.imag != 0:
            raise ModelError(f"gamma must be real or purely imaginary (Im gamma^2 != 0): {gamma!r}")
        if g.imag != 0:
            kw = dict(a_sq=-g.imag * g.imag, branch="imaginary", a_sign=1 if g.imag > 0 else -1)
        else:
            kw = dict(a_sq=g.real * g.real, branch="real", a_sign=-1 if g.real < 0 else 1)
        if frame is not None:
            n1, n2, n3 = frame
            kw.update(n1=tuple(n1), n2=tuple(n2), n3=tuple(n3))
        return cls(profile=profile, label=label, **kw)

    @classmethod
    def from_gamma_sq(cls, gamma_sq: float, profile: DrivingProfile, label: str = "") -> "TwoLevelModel":
        """Negative ``gamma_sq`` selects the purely imaginary branch."""
        gamma_sq = float(gamma_sq)
        return cls(a_sq=gamma_sq, profile=profile, label=label,
                   branch="real" if gamma_sq >= 0 else "imaginary")

    @property
    def a(self) -> complex:
        r = np.sqrt(abs(self.a_sq))
        return complex(self.a_sign * r) if self.branch == "real" else complex(0.0, self.a_sign * r)

    @property
    def period(self) -> float:
        return self.profile.base_period

    def frame_matrices(self):
        """``(n1.sigma, n2.sigma, n3.sigma)`` as 2x2 arrays."""
        return tuple(np.tensordot(np.asarray(n), PAULI, axes=1) for n in (self.n1, self.n2, self.n3))

    def with_profile(self, profile: DrivingProfile) -> "TwoLevelModel":
        return TwoLevelModel(self.a_sq, profile, self.branch, self.a_sign,
                             self.n1, self.n2, self.n3, self.label)

    def with_gamma_sq(self, gamma_sq: float) -> "TwoLevelModel":
        gamma_sq = float(gamma_sq)
        return TwoLevelModel(gamma_sq, self.profile, "real" if gamma_sq >= 0 else "imaginary",
                             1, self.n1, self.n2, self.n3, self.label)

    def hermitian_counterpart(self) -> "TwoLevelModel":
        if self.branch != "real":
            raise ModelError("a Hermitian counterpart needs a real static amplitude")
        return self.with_profile(self.profile.hermitian_counterpart())


def preset_profile(name: str, mu: float, alpha=None) -> DrivingProfile:
    """Driving profile ``b(t)`` of a named preset."""
    mu = float(mu)
    if name in ("H3", "H4"):
        if alpha is None:
            raise ModelError(f"preset {name} requires alpha")
        alpha = RationalAlpha.parse(alpha)
        p, q = alpha.p, alpha.q
        # in units of the combined period T = q: cos(2 pi t) -> m = q, alpha term -> m = p
        if name == "H3":
            terms = [(q, mu, 0), (p, mu, 0)]
        else:
            terms = [(q, 1j * mu, 0), (p, 0, mu)]
        merged = {}
        for m, c, s in terms:
            c0, s0 = merged.get(m, (0j, 0j))
            merged[m] = (c0 + c, s0 + s)
        return DrivingProfile(float(q), tuple(Harmonic(m, c, s) for m, (c, s) in merged.items()))
    if alpha is not None:
        raise ModelError(f"preset {name} takes no alpha")
    if name == "H1":
        return DrivingProfile(1.0, (Harmonic(1, mu, 0), Harmonic(2, 0, mu)))
    if name == "H1b":
        return DrivingProfile(1.0, (Harmonic(1, 0, mu), Harmonic(2, mu, 0)))
    if name == "H2":
        return DrivingProfile(1.0, (Harmonic(0, 1j * mu), Harmonic(1, 0, mu)))
    raise ModelError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


def make_preset(name: str, gamma, mu: float, alpha=None) -> TwoLevelModel:
    """Preset models with ``H = gamma sigma_z + i b(t) sigma_x``.

    ========  =====================================  ======
    name      b(t)                                   period
    ========  =====================================  ======
    H1        mu [cos 2 pi t + sin 4 pi t]           1
    H1b       mu [sin 2 pi t + cos 4 pi t]           1
    H2        mu [sin 2 pi t + i]                    1
    H3        mu [cos 2 pi t + cos 2 pi alpha t]     q
    H4        mu [i cos 2 pi t + sin 2 pi alpha t]   q
    ========  =====================================  ======
    """
    profile = preset_profile(name, mu, alpha)
    return TwoLevelModel.from_gamma(gamma, profile, label=name)


def eval_drive(model: TwoLevelModel, t):
    return model.profile(t)


def drive_derivative(model: TwoLevelModel, t):
    return model.profile.derivative(t)


def hamiltonian_at(model: TwoLevelModel, t: float) -> np.ndarray:
    N1, _, N3 = model.frame_matrices()
    return model.a * N3 + 1j * model.profile(float(t)) * N1


def farey_alphas(q_max: int, lo: float = 0.0, hi: float = 1.0) -> list:
    """Reduced fractions ``p/q`` with ``q <= q_max`` in ``(lo, hi]``, ascending."""
    if q_max < 1:
        raise ModelError("q_max must be >= 1")
    out = set()
    for q in range(1, q_max + 1):
        for p in range(1, int(np.floor(hi * q)) + 1):
            if gcd(p, q) == 1 and lo < p / q <= hi:
                out.add(Fraction(p, q))
    return [RationalAlpha(f.numerator, f.denominator) for f in sorted(out)]
