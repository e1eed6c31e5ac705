"""Hierarchical equations of motion for two qubits coupled to Drude baths."""

from qheom.bath import BathExpansion, DrudeParams, build_expansion, correlation_function, spectral_density
from qheom.entangle import (
    concurrence,
    detect_death_revival,
    entanglement_of_formation,
    gibbs_concurrence_closed_form,
)
from qheom.heom import (
    HierarchyState,
    SystemModel,
    apply_pulse,
    enumerate_indices,
    equilibrate,
    factorize,
    propagate,
    rhs,
)
from qheom.trajectory import Trajectory

__all__ = [
    "BathExpansion",
    "DrudeParams",
    "HierarchyState",
    "SystemModel",
    "Trajectory",
    "apply_pulse",
    "build_expansion",
    "concurrence",
    "correlation_function",
    "detect_death_revival",
    "entanglement_of_formation",
    "enumerate_indices",
    "equilibrate",
    "factorize",
    "gibbs_concurrence_closed_form",
    "propagate",
    "rhs",
    "spectral_density",
]
