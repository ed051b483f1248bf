"""Driven qubit in a thermal bath: Bloch and Floquet master equations and their thermodynamics."""
from .core import (DensityMatrix2, DressedBasis, FourierComponents, SystemParams,
                   bloch_views, dressed_basis, fourier_components, from_bloch_views,
                   rabi_frequency, thermal_occupation, thermal_state)
from .bath import BathSpec, FlatBand, kms_ratio, lamb_light_shift, spectral_density
from .generators import (FmeRates, Liouvillian, coarse_grain_obe, fme_generator,
                         fme_rates, gbe_generator, obe_generator, secular_average)
from .dynamics import (RegimeReport, Trajectory, bloch_rhs, deviation_first_order,
                       evolve, steady_state_fme_analytic, steady_state_numeric,
                       steady_state_obe_analytic, validity_check)
from .thermo import (CoherenceSplit, ThermoFlows, coherence_split, energy_split,
                     entropy, fme_flows, first_law_audit, obe_flows, relative_entropy)
from .cascade import (CascadeParams, CascadeState, build_jc, coherent_state,
                      evolve_cascade, mollow_frequencies, uq_identity)
from .kernels import BACKEND

__version__ = "0.1.0"
