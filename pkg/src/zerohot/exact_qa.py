"""Exact diagonalization of small transverse-field annealing Hamiltonians.

The basis is lexicographic over the model's spin order: basis index ``k``
has bit ``b`` (most significant first) equal to 1 when spin ``b`` is down,
matching the binary indicator ``x = 1``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg

from zerohot._validation import check_count, check_grid, check_real
from zerohot.encoding import (
    ZERO_HOT,
    Infeasible,
    all_spin_configurations,
    decode,
    encode_zero_hot,
)
from zerohot.exceptions import AnalysisError, InputError, SizeError
from zerohot.potts import CandidateSolution, PottsInstance

MAX_DENSE_SPINS = 14
DEGENERACY_RTOL = 1e-10
SWEEP_COLUMNS = ("gamma", "p_zero_hot", "p_one_hot", "p_infeasible", "gap", "ground_energy")


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Real symmetric operator on ``2^n`` basis states of the listed spins."""

    matrix: np.ndarray
    spins: tuple

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_tol: float
    spectral_range: float

    def clusters(self):
        """Index lists of eigenvalues equal within ``degeneracy_tol``."""
        out, current = [], [0]
        for k in range(1, len(self.eigenvalues)):
            if self.eigenvalues[k] - self.eigenvalues[current[0]] <= self.degeneracy_tol:
                current.append(k)
            else:
                out.append(current)
                current = [k]
        out.append(current)
        return out

    @property
    def ground_multiplicity(self):
        return len(self.clusters()[0])

    def ground_projector_diagonal(self):
        """Basis probabilities averaged over the degenerate ground subspace."""
        k = self.ground_multiplicity
        return np.sum(self.eigenvectors[:, :k] ** 2, axis=1) / k

    def gap(self):
        """First eigenvalue above the ground cluster minus the ground energy."""
        k = self.ground_multiplicity
        if k >= len(self.eigenvalues):
            return np.nan
        return float(self.eigenvalues[k] - self.eigenvalues[0])


@dataclass
class SweepCurve:
    """Observables sampled along a strictly monotone grid of transverse fields."""

    gamma: np.ndarray
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        self.gamma = check_grid(self.gamma, "gamma grid")

    def __getitem__(self, name):
        return self.columns[name]

    def rows(self, names=SWEEP_COLUMNS):
        n = len(self.gamma)
        cols = [self.gamma if c == "gamma" else self.columns.get(c, np.full(n, np.nan)) for c in names]
        return [tuple(float(col[k]) for col in cols) for k in range(n)]


@lru_cache(maxsize=None)
def spin_basis(n):
    """``(2^n, n)`` array of ``sigma^z`` values in basis order."""
    z = all_spin_configurations(n).astype(float)
    z.setflags(write=False)
    return z


@lru_cache(maxsize=None)
def transverse_sum(n):
    """Matrix of ``sum_b sigma^x_b``: a single bit flip per term."""
    dim = 1 << n
    X = np.zeros((dim, dim))
    k = np.arange(dim)
    for b in range(n):
        X[k, k ^ (1 << (n - 1 - b))] = 1.0
    X.setflags(write=False)
    return X


def _check_dense(n):
    if n > MAX_DENSE_SPINS:
        raise SizeError(f"{n} spins exceeds the dense bound of {MAX_DENSE_SPINS}")
    if n < 1:
        raise InputError("model has no spins")


def build_qa_hamiltonian(model, gamma):
    """``H_problem`` on the diagonal minus ``gamma * sum sigma^x``."""
    n = model.n_spins
    _check_dense(n)
    gamma = check_real(gamma, "gamma")
    if gamma < 0:
        warnings.warn("negative gamma: using |gamma| (the spectrum is sign-symmetric)")
        gamma = -gamma
    H = np.diag(model.energies(spin_basis(n)))
    if gamma:
        H = H - gamma * transverse_sum(n)
    return DenseOperator(H, tuple(model.spins))


def eigensolve_lowest(H, k=1):
    """``k`` lowest eigenpairs of a dense symmetric operator."""
    A = H.matrix if isinstance(H, DenseOperator) else np.asarray(H, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("operator must be a square matrix")
    scale = max(1.0, float(np.abs(A).max())) if A.size else 1.0
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * scale):
        raise InputError("operator is not symmetric")
    dim = A.shape[0]
    k = check_count(k, "k", 1)
    if k > dim:
        raise InputError(f"k={k} exceeds the dimension {dim}")
    w, v = linalg.eigh(A)
    rng = float(w[-1] - w[0])
    tol = DEGENERACY_RTOL * max(rng, 1e-300)
    # keep the whole cluster straddling the cut so degeneracy is never split
    kk = k
    while kk < dim and w[kk] - w[kk - 1] <= tol:
        kk += 1
    return SpectrumResult(w[:kk], v[:, :kk], tol, rng)


def penalty_model(Q, lam, r=1):
    """Single-variable zero-hot model whose energy is the penalty term alone."""
    Q = check_count(Q, "Q", 2)
    instance = PottsInstance(1, Q)
    return encode_zero_hot(instance, CandidateSolution(np.array([r]), Q), lam)


def _probability_columns(model, probs):
    """Candidate, best competitor and infeasible mass for a zero-hot model."""
    sig = spin_basis(model.n_spins).astype(np.int64)
    p_cand = np.nan
    p_other = 0.0
    p_bad = 0.0
    for k, p in enumerate(probs):
        s = decode(model, sig[k])
        if isinstance(s, Infeasible):
            p_bad += p
        elif model.kind == ZERO_HOT and np.array_equal(s, model.anchor.r):
            p_cand = p
        else:
            p_other = max(p_other, p)
    return p_cand, p_other, p_bad


def penalty_probability_sweep(Q, lam=1.0, grid=None):
    """Zero-hot and one-hot ground-state probabilities of the isolated penalty term."""
    Q = check_count(Q, "Q", 2)
    if grid is None or len(grid) == 0:
        raise InputError("gamma grid must be non-empty")
    grid = check_grid(grid, "gamma grid")
    model = penalty_model(Q, lam)
    n = model.n_spins
    _check_dense(n)
    all_up = 0
    one_down = [1 << (n - 1 - b) for b in range(n)]
    infeasible = spin_basis(n).sum(axis=1) < n - 2.5
    cols = {c: np.empty(len(grid)) for c in SWEEP_COLUMNS[1:]}
    for t, g in enumerate(grid):
        spec = eigensolve_lowest(build_qa_hamiltonian(model, g), 1 << n)
        p = spec.ground_projector_diagonal()
        p_one = p[one_down]
        if np.ptp(p_one) > 1e-8:
            raise AnalysisError(f"one-hot probabilities differ by {np.ptp(p_one):.3g} at gamma={g}")
        cols["p_zero_hot"][t] = p[all_up]
        cols["p_one_hot"][t] = p_one.mean()
        cols["p_infeasible"][t] = p[infeasible].sum()
        cols["gap"][t] = spec.gap()
        cols["ground_energy"][t] = spec.eigenvalues[0]
    return SweepCurve(grid, cols)


def min_gap(model, grid):
    """Minimum over ``grid`` of the gap above the (possibly degenerate) ground level."""
    _check_dense(model.n_spins)
    grid = check_grid(grid, "gamma grid")
    cols = {c: np.empty(len(grid)) for c in SWEEP_COLUMNS[1:]}
    for t, g in enumerate(grid):
        spec = eigensolve_lowest(build_qa_hamiltonian(model, g), 1 << model.n_spins)
        p_cand, p_other, p_bad = _probability_columns(model, spec.ground_projector_diagonal())
        cols["p_zero_hot"][t] = p_cand
        cols["p_one_hot"][t] = p_other
        cols["p_infeasible"][t] = p_bad
        cols["gap"][t] = spec.gap()
        cols["ground_energy"][t] = spec.eigenvalues[0]
    curve = SweepCurve(grid, cols)
    gaps = cols["gap"]
    if np.all(np.isnan(gaps)):
        raise AnalysisError("no excited level found on the grid")
    k = int(np.nanargmin(gaps))
    return float(grid[k]), float(gaps[k]), curve


def adiabatic_ground_state(model, gamma_final=1e-6, gamma_start=None, steps=80):
    """Instantaneous ground state tracked from large ``gamma`` down to ``gamma_final``.

    Near-degenerate levels at small ``gamma`` are resolved by projecting the
    previous step's vector onto the current ground cluster.
    """
    _check_dense(model.n_spins)
    gamma_final = check_real(gamma_final, "gamma_final", minimum=0.0, strict=True)
    diag = model.energies(spin_basis(model.n_spins))
    if gamma_start is None:
        gamma_start = max(1.0, float(np.ptp(diag)))
    ladder = np.geomspace(gamma_start, gamma_final, steps) if gamma_start > gamma_final else [gamma_final]
    psi = None
    for g in ladder:
        spec = eigensolve_lowest(build_qa_hamiltonian(model, g), 1)
        V = spec.eigenvectors
        if psi is None or V.shape[1] == 1:
            new = V[:, 0]
        else:
            new = V @ (V.T @ psi)
            norm = np.linalg.norm(new)
            new = V[:, 0] if norm < 1e-8 else new / norm
        if psi is not None and new @ psi < 0:
            new = -new
        psi = new
    return psi


def adiabatic_solution(model, gamma_final=1e-6, threshold=1e-9):
    """Decoded most-probable feasible basis state of the tracked ground state."""
    psi = adiabatic_ground_state(model, gamma_final)
    probs = psi**2
    sig = spin_basis(model.n_spins).astype(np.int64)
    bad_sites = set()
    for k in np.argsort(-probs, kind="stable"):
        if probs[k] <= threshold:
            break
        s = decode(model, sig[k])
        if isinstance(s, Infeasible):
            bad_sites.update(s.sites)
            continue
        return s
    return Infeasible(tuple(sorted(bad_sites)))
