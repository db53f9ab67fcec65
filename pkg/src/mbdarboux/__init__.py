"""Exact solutions of the degenerate two-level Maxwell-Bloch system.

Seeds are dressed by binary Darboux transformations; every result can be
checked by finite-difference residuals of the field equations and of the
zero-curvature condition.
"""
from .broadening import Discrete, Gaussian, Lorentzian, Nodes, SharpLine, average, materialize
from .closedforms import (ClosedFormState, DressedPeriodicParams, ErrataEntry, TwoSolitonParams,
                          dressed_periodic_fields, reconcile, two_soliton_fields)
from .darboux import (DressedState, DressingChain, DressingStep, dress_once, dress_once_general,
                      dress_pure, evaluate_chain)
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .model import (BlochComponents, CorruptedState, DetuningModel, Grid2D, ResidualReport,
                    alpha, build_A, build_U, conservation_report, residual_mb, residual_pure,
                    residual_zcr, residual_zcr_state)
from .perturbation import (ContourSpec, PerturbationField, finite_difference_validation,
                           infinitesimal_dt, linearized_residual, superpose_symmetries)
from .seeds import (NlsPeriodicSeed, PeriodicPumpSeed, PopulationsSeed, SeedState, ZeroSeed,
                    seed_state, seed_wavefunction, seed_wavefunction_left)

__version__ = "0.1.0"
