"""Mean-field analysis of the ferromagnetic Potts model under the zero-hot encoding."""

from zerohot.meanfield.saddle import (
    INIT_FAMILIES,
    MFParams,
    OrderParams,
    SaddleSolution,
    build_effective_hamiltonian,
    conjugate_params,
    effective_fields,
    free_energy,
    free_energy_of_m,
    initial_order_params,
    iterate_saddle,
    local_expectations,
    site_free_energy,
    symmetrize,
)
from zerohot.meanfield.transitions import (
    SWEEP_COLUMNS,
    Branch,
    PhaseBoundary,
    SymmetryClasses,
    TransitionReport,
    classify_symmetry,
    default_gamma_grid,
    default_temperature_grid,
    detect_first_order,
    gamma_first_order,
    gamma_T_boundary,
    region_contains,
    rho1_threshold,
    standard_branches,
    sweep_control,
    sweep_rows,
)

__all__ = [name for name in dir() if not name.startswith("_")]
