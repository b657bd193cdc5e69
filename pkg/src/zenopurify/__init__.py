"""Purification of an unmeasured oscillator by repeated projective measurements on its partner."""

from .errors import ZenoError
from .hilbert import annihilation_op, fidelity_pure, tensor_product, trace_distance
from .model import (
    CoherentState,
    Custom,
    ModelParams,
    NumberState,
    build_hamiltonian,
    coherent_state,
    delta,
    number_state,
    thermal_state,
)
from .protocol import Trajectory, asymptotic_prediction, convergence_step, run_protocol
from .spectral import SpectralDecomposition, decompose, dominant, spectral_power
from .tuning import TuneRecord, best_tau, resonant_tau, sweep_tau
from .veff import (
    EffectiveOperator,
    abc_coefficients,
    beta_fixed_point,
    effective_operator,
    v_coherent_analytic,
    v_number_analytic,
    v_numeric,
    verify_truncation,
)

__version__ = "0.1.0"
