"""Floquet analysis of periodically driven non-Hermitian two-level systems.

The stroboscopic stability of ``H(t) = a (n3 . sigma) + i b(t) (n1 . sigma)`` is
read off ``u0(T) = tr U(T) / 2`` and compared with the Bloch bands of the
lattice potentials ``V(x) = b(x)**2 +- b'(x)``.
"""

from ._version import __version__
from .floquet import (Classification, FloquetDecomposition, Stability, classify_stability,
                      floquet_decompose, floquet_of, population_trace, stroboscopic_power)
from .integrators import IntegrationError
from .lattice import (LatticePotential, bands_at_k, default_truncation, dispersion,
                      map_to_potential, nearest_band_distance, pt_check, susy_pair_spectra)
from .model import (PRESETS, DrivingProfile, Harmonic, ModelError, RationalAlpha, TwoLevelModel,
                    farey_alphas, make_preset, preset_profile)
from .propagator import (IntegratorSettings, floquet_u0, intra_period_spectrum, propagate_batch,
                         propagate_matrix, propagate_pauli, split_events)
from .scan import (Tolerances, butterfly, butterfly_cross_check, compare_dispersion,
                   floquet_dispersion, phase_diagram)

__all__ = [
    "__version__",
    "Classification", "FloquetDecomposition", "Stability", "classify_stability",
    "floquet_decompose", "floquet_of", "population_trace", "stroboscopic_power",
    "IntegrationError",
    "LatticePotential", "bands_at_k", "default_truncation", "dispersion", "map_to_potential",
    "nearest_band_distance", "pt_check", "susy_pair_spectra",
    "PRESETS", "DrivingProfile", "Harmonic", "ModelError", "RationalAlpha", "TwoLevelModel",
    "farey_alphas", "make_preset", "preset_profile",
    "IntegratorSettings", "floquet_u0", "intra_period_spectrum", "propagate_batch",
    "propagate_matrix", "propagate_pauli", "split_events",
    "Tolerances", "butterfly", "butterfly_cross_check", "compare_dispersion",
    "floquet_dispersion", "phase_diagram",
]
