"""Transitionless driving for non-Hermitian two-level systems.

Biorthogonal eigen-decomposition, counterdiabatic terms (exact, first-order
and power-series forms), adiabatic references, time evolution and fidelity
sweeps. Units: hbar = 1, time in ns, frequencies in rad/ns.
"""

from .adiabatic import (adiabatic_reference, adiabaticity_condition, adiabaticity_profile,
                        geometric_phase, imaginary_gap, imaginary_gap_profile)
from .config import RunConfig, dump_config, load_config, parse_config
from .counterterm import (CounterTerm, PerturbationSplit, convergence_radius, exact_counterterm,
                          model_counterterm, perturbative_counterterm, series_counterterm,
                          series_expansion)
from .dynamics import (ExperimentSpec, IntegratorConfig, Trajectory, fidelity, integrate,
                       run_experiment)
from .errors import (ConfigError, ConfigInvalid, DegenerateSpectrum, DerivativeMismatch,
                     ExceptionalPoint, ExpansionInvalid, NHSTAError, OutsideConvergenceRadius,
                     ParseError, StepSizeUnderflow, ValidationError, ZeroVector)
from .hamiltonians import (AtomLightParams, HamiltonianModel, PulseParams, Scatterer,
                           WhisperingGalleryParams, atom_light_model, build_preset,
                           gaussian_chirped_model, general_model, rwa_model,
                           whispering_gallery_matrix)
from .linalg import EigenSystem, eigendecompose, projectors
from .sweeps import AxisRange, FidelityGrid, SweepSpec, emit_grid, load_grid, run_sweep

__version__ = "0.1.0"
