"""Candidate-anchored ("zero-hot") Ising encodings of integer optimization problems.

Subpackages and modules:

* :mod:`zerohot.potts` for instances, candidates and the brute-force oracle,
* :mod:`zerohot.encoding` for the one-hot and zero-hot Ising encodings,
* :mod:`zerohot.exact_qa` for exact transverse-field spectra of small models,
* :mod:`zerohot.meanfield` for the mean-field phase analysis.
"""

from zerohot.encoding import (
    ONE_HOT,
    ZERO_HOT,
    Infeasible,
    IsingModel,
    decode,
    encode_assignment,
    encode_one_hot,
    encode_zero_hot,
    ising_energy,
    lambda_big,
    verify_energy_consistency,
)
from zerohot.estimators import MeanFieldPotts, OneHotIsingEncoder, ZeroHotIsingEncoder
from zerohot.exact_qa import (
    adiabatic_solution,
    build_qa_hamiltonian,
    eigensolve_lowest,
    min_gap,
    penalty_probability_sweep,
)
from zerohot.exceptions import AnalysisError, BracketError, InputError, SizeError
from zerohot.potts import (
    CandidateSolution,
    Edge,
    PottsInstance,
    brute_force_optima,
    make_fc_ferro_potts,
    make_partitioned_candidate,
    overlap,
    potts_energy,
)

__version__ = "0.1.0"
