"""Linear-inversion tomography of two-qubit polarization states."""

from .noise import ErrorReport, error_band, error_radius, error_report
from .protocols import Protocol, build_protocol, all_protocols, condition_number
from .qmetrics import fidelity, trace_distance, unvec_density, vec_density
from .reconstruct import CountTable, ObservationVector, assemble_observations, reconstruct_state
from .simulate import SimulationConfig, run_trials

__all__ = [
    "CountTable", "ErrorReport", "ObservationVector", "Protocol", "SimulationConfig",
    "all_protocols", "assemble_observations", "build_protocol", "condition_number",
    "error_band", "error_radius", "error_report", "fidelity", "reconstruct_state",
    "run_trials", "trace_distance", "unvec_density", "vec_density",
]
