"""Charge qubits ultrastrongly coupled to LC oscillators: circuit reduction,
spectra, parameter search and dressed-basis state-transfer dynamics."""

from . import constants
from .circuit import (
    CircuitSpec,
    DerivedParams,
    Topology,
    build_capacitance_matrix,
    cpb_transition_frequency,
    derive_effective_params,
    oscillator_bound,
    scale_impedance,
)
from .hilbert import Operator, eigensystem, tensor

__version__ = "0.1.0"
