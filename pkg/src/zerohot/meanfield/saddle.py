"""Mean-field free energy and saddle-point iteration for the ferromagnetic Potts model.

Energies are in units of ``J``. Order parameters ``m[q, xi]`` are indexed by
pairs of 1-based labels with ``rho_xi > 0`` and ``q != xi``, ordered by
``xi`` and then ``q``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from zerohot._validation import check_count, check_fractions, check_real
from zerohot.exact_qa import (
    DEGENERACY_RTOL,
    MAX_DENSE_SPINS,
    DenseOperator,
    spin_basis,
    transverse_sum,
)
from zerohot.exceptions import InputError, SizeError
from zerohot.meanfield.collective import ClassSiteSolver

SYMMETRY_ATOL = 1e-12
INIT_FAMILIES = ("aligned", "ferro", "anti-aligned", "zero", "random")
_INIT_AMPLITUDE = 0.95


@dataclass(frozen=True, eq=False)
class MFParams:
    """Model parameters with ``J = 1``; ``rho`` holds the candidate group fractions."""

    Q: int
    rho: np.ndarray
    lambda_over_J: float
    gamma_over_J: float = 0.0
    temperature_over_J: float = 0.0

    def __post_init__(self):
        Q = check_count(self.Q, "Q", 2)
        if Q - 1 > MAX_DENSE_SPINS:
            raise SizeError(f"Q={Q} gives {Q - 1} site spins, above the dense bound")
        rho = check_fractions(self.rho, Q)
        # snap rounding noise so zero-weight groups are dropped consistently
        rho = np.where(rho < 1e-15, 0.0, rho)
        rho.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "lambda_over_J", check_real(self.lambda_over_J, "lambda", minimum=0.0))
        object.__setattr__(self, "gamma_over_J", check_real(self.gamma_over_J, "gamma", minimum=0.0))
        object.__setattr__(
            self, "temperature_over_J", check_real(self.temperature_over_J, "temperature", minimum=0.0)
        )

    @classmethod
    def symmetric(cls, Q, rho1, lambda_over_J, gamma_over_J=0.0, temperature_over_J=0.0):
        """Fractions ``(rho1, (1 - rho1)/(Q - 1), ...)``."""
        Q = check_count(Q, "Q", 2)
        rho1 = check_real(rho1, "rho1", minimum=0.0)
        if rho1 > 1.0:
            raise InputError(f"rho1 must lie in [0, 1], got {rho1}")
        rho = np.full(Q, (1.0 - rho1) / (Q - 1))
        rho[0] = rho1
        return cls(Q, rho, lambda_over_J, gamma_over_J, temperature_over_J)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @property
    def beta(self):
        T = self.temperature_over_J
        return np.inf if T == 0 else 1.0 / T

    @property
    def is_symmetric(self):
        """True when every group ``xi >= 2`` carries the same fraction."""
        return bool(np.ptp(self.rho[1:]) <= SYMMETRY_ATOL)

    @cached_property
    def layout(self):
        return _Layout.build(self.Q, tuple(float(r) for r in self.rho))


@dataclass(frozen=True, eq=False)
class _Layout:
    Q: int
    rho: np.ndarray
    index: tuple
    q0: np.ndarray  # 0-based q for each entry
    xi0: np.ndarray  # 0-based xi for each entry
    weight: np.ndarray  # rho_xi for each entry
    groups: tuple  # (xi0, slice) for every group with rho > 0
    sym_class: np.ndarray  # 0: m0, 1: m_minus, 2: m_plus

    @classmethod
    def build(cls, Q, rho):
        rho = np.asarray(rho)
        index, groups = [], []
        for xi in range(Q):
            if rho[xi] <= 0:
                continue
            start = len(index)
            index.extend((q + 1, xi + 1) for q in range(Q) if q != xi)
            groups.append((xi, slice(start, len(index))))
        q0 = np.array([q - 1 for q, _ in index], dtype=np.int64)
        xi0 = np.array([x - 1 for _, x in index], dtype=np.int64)
        sym = np.where(xi0 == 0, 0, np.where(q0 == 0, 1, 2))
        return cls(Q, rho, tuple(index), q0, xi0, rho[xi0], tuple(groups), sym)

    def group_vector(self, m):
        """``V = sum_eta rho_eta sum_q' m[q', eta] (e_q' - e_eta)``."""
        wm = self.weight * m
        return np.bincount(self.q0, wm, self.Q) - np.bincount(self.xi0, wm, self.Q)

    def coupling_matrix(self):
        """Dense ``J~`` between order-parameter entries."""
        q, x = self.q0, self.xi0
        d = lambda a, b: (a[:, None] == b[None, :]).astype(float)  # noqa: E731
        return d(q, q) - d(q, x) - d(x, q) + d(x, x)


@dataclass(frozen=True, eq=False)
class OrderParams:
    """Order parameters ``m`` and, when known, their conjugates ``m_tilde``."""

    index: tuple
    m: np.ndarray
    m_tilde: np.ndarray | None = None

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(-1)
        if m.shape[0] != len(self.index):
            raise InputError(f"expected {len(self.index)} order parameters, got {m.shape[0]}")
        if not np.all(np.isfinite(m)) or np.abs(m).max(initial=0.0) > 1.0 + 1e-12:
            raise InputError("order parameters must be finite and lie in [-1, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)
        if self.m_tilde is not None:
            mt = np.array(self.m_tilde, dtype=float).reshape(-1)
            if mt.shape != m.shape:
                raise InputError("m_tilde must match the index set of m")
            mt.setflags(write=False)
            object.__setattr__(self, "m_tilde", mt)

    def __getitem__(self, key):
        return float(self.m[self.index.index(tuple(key))])

    def as_dict(self):
        return {k: float(v) for k, v in zip(self.index, self.m)}


@dataclass(frozen=True, eq=False)
class SaddleSolution:
    params: MFParams
    order: OrderParams
    free_energy: float
    iterations: int
    converged: bool
    residual: float

    @property
    def m(self):
        return self.order.m

    @cached_property
    def symmetry(self):
        from zerohot.meanfield.transitions import classify_symmetry

        return classify_symmetry(self.order)

    @property
    def m0(self):
        return self.symmetry.m0


def _as_m(m, layout):
    if isinstance(m, OrderParams):
        if m.index != layout.index:
            raise InputError("order parameters do not match the rho support")
        return m.m
    arr = np.asarray(m, dtype=float).reshape(-1)
    if arr.shape[0] != len(layout.index):
        raise InputError(f"expected {len(layout.index)} order parameters, got {arr.shape[0]}")
    return arr


def conjugate_params(m, p):
    """``m~[q, xi] = sum_eta rho_eta sum_{q' != eta} J~_{xi eta}(q, q') m[q', eta]``.

    ``J~`` factorizes as ``(e_q - e_xi) . (e_q' - e_eta)``, so the double sum
    collapses to a difference of one group vector.
    """
    lay = p.layout
    V = lay.group_vector(_as_m(m, lay))
    return V[lay.q0] - V[lay.xi0]


def effective_fields(xi, m_tilde_group, p):
    """``h~_xi(q) = m~[q, xi] + (Q - 2)(rho_q - rho_xi + lambda)`` for ``q != xi``."""
    Q = p.Q
    qs = np.array([q for q in range(1, Q + 1) if q != xi])
    mt = np.asarray(m_tilde_group, dtype=float)
    if mt.shape != (Q - 1,):
        raise InputError(f"group {xi} needs {Q - 1} conjugate values")
    return mt + (Q - 2) * (p.rho[qs - 1] - p.rho[xi - 1] + p.lambda_over_J)


def build_effective_hamiltonian(xi, m_tilde, p):
    """``(lambda/2)(sum sigma^z)^2 - sum h~ sigma^z - gamma sum sigma^x`` on ``Q - 1`` spins."""
    xi = check_count(xi, "xi", 1)
    if xi > p.Q:
        raise InputError(f"group {xi} exceeds Q={p.Q}")
    h = effective_fields(xi, m_tilde, p)
    n = p.Q - 1
    z = spin_basis(n)
    s = z.sum(axis=1)
    H = np.diag(0.5 * p.lambda_over_J * s**2 - z @ h)
    if p.gamma_over_J:
        H = H - p.gamma_over_J * transverse_sum(n)
    spins = tuple(q for q in range(1, p.Q + 1) if q != xi)
    return DenseOperator(H, spins)


def _spectral_site(A, T, z):
    """Expectations of ``z`` columns and ``-T log Tr e^{-H/T}`` (ground energy at T=0)."""
    w, v = np.linalg.eigh(A)
    e0 = w[0]
    if T == 0:
        tol = DEGENERACY_RTOL * max(float(w[-1] - e0), 1e-300)
        k = int(np.count_nonzero(w - e0 <= tol))
        p = np.sum(v[:, :k] ** 2, axis=1) / k
        return p @ z, float(e0)
    b = np.exp(-(w - e0) / T)
    p = (v**2) @ b / b.sum()
    return p @ z, float(e0 - T * np.log(b.sum()))


def local_expectations(H, T):
    """Per-spin ``<sigma^z>`` in the thermal (or degeneracy-averaged ground) state."""
    T = check_real(T, "T", minimum=0.0)
    return _spectral_site(H.matrix, T, spin_basis(len(H.spins)))[0]


def site_free_energy(H, T):
    """``-T log Tr exp(-H/T)``, stabilized by the lowest eigenvalue; ``E0`` at ``T = 0``."""
    T = check_real(T, "T", minimum=0.0)
    return _spectral_site(H.matrix, T, spin_basis(len(H.spins)))[1]


def _site_terms(m_tilde, p):
    """Updated ``m`` from every group's effective problem plus the weighted site free energy."""
    lay = p.layout
    new = np.empty(len(lay.index))
    F = 0.0
    for xi0, sl in lay.groups:
        H = build_effective_hamiltonian(xi0 + 1, m_tilde[sl], p)
        e, f = _spectral_site(H.matrix, p.temperature_over_J, spin_basis(p.Q - 1))
        new[sl] = e
        F += lay.rho[xi0] * f
    return new, F


def free_energy(m, m_tilde, p):
    """``-1/2 sum rho rho J~ m m + sum rho m~ m - T sum rho log Tr exp(-H_eff / T)``."""
    lay = p.layout
    m = _as_m(m, lay)
    mt = np.asarray(m_tilde, dtype=float).reshape(-1)
    if mt.shape != m.shape:
        raise InputError("m_tilde must match the index set of m")
    wm = lay.weight * m
    quad = float(wm @ conjugate_params(m, p))
    _, F = _site_terms(mt, p)
    return -0.5 * quad + float(wm @ mt) + F


def free_energy_of_m(m, p):
    """Free energy with ``m~`` eliminated through the conjugate equation."""
    return free_energy(m, conjugate_params(m, p), p)


# -- initial conditions ------------------------------------------------------


def initial_order_params(p, family="zero", seed=0):
    """Named starting points for branch discovery.

    ``aligned`` points every spin up (the candidate itself), ``ferro`` encodes
    the uniform assignment ``S = 1`` whatever the candidate, ``anti-aligned``
    flips the candidate group down and keeps the other groups as ``ferro``,
    ``zero`` is the origin and ``random`` draws from ``U(-1, 1)``.
    """
    lay = p.layout
    n = len(lay.index)
    a = _INIT_AMPLITUDE
    if family == "aligned":
        m = np.full(n, a)
    elif family == "ferro":
        m = np.where(lay.sym_class == 1, -a, a)
    elif family == "anti-aligned":
        m = np.where(lay.sym_class == 2, a, -a)
    elif family == "zero":
        m = np.zeros(n)
    elif family == "random":
        m = np.random.default_rng(seed).uniform(-1.0, 1.0, n)
    else:
        raise InputError(f"unknown init family {family!r}; choose from {', '.join(INIT_FAMILIES)}")
    return OrderParams(lay.index, m)


def _coerce_init(m_init, p, seed):
    lay = p.layout
    if m_init is None:
        m_init = "zero"
    if isinstance(m_init, str):
        return initial_order_params(p, m_init, seed).m.copy()
    if np.isscalar(m_init):
        v = check_real(m_init, "m_init")
        if abs(v) > 1:
            raise InputError("m_init must lie in [-1, 1]")
        return np.full(len(lay.index), v)
    return np.clip(_as_m(m_init, lay), -1.0, 1.0).astype(float)


# -- fixed-point iteration ---------------------------------------------------


def _symmetric_map(p):
    """Fixed-point map on the classes ``(m0, m_minus, m_plus)`` of a symmetric fraction vector.

    With ``V`` the group vector, the class fields are ``V_2 - V_1`` for the
    candidate group and ``V_1 - V_2`` or ``V_3 - V_2`` for groups ``xi >= 2``.
    """
    lay = p.layout
    Q = p.Q
    lam, gam, T = p.lambda_over_J, p.gamma_over_J, p.temperature_over_J
    r1, r2 = p.rho[0], p.rho[1]
    has_first = r1 > 0
    has_rest = r2 > 0
    has_plus = has_rest and Q > 2
    shift = (Q - 2) * lam
    solve_first = ClassSiteSolver((Q - 1,), lam, gam, T) if has_first else None
    if has_plus:
        solve_rest = ClassSiteSolver((1, Q - 2), lam, gam, T)
    elif has_rest:
        solve_rest = ClassSiteSolver((1,), lam, gam, T)
    cls = lay.sym_class
    out = np.zeros(3)

    def step(m):
        V = lay.group_vector(m)
        F = 0.0
        if has_first:
            e, f = solve_first((V[1] - V[0] + (Q - 2) * (r2 - r1) + shift,))
            out[0] = e[0]
            F += r1 * f
        if has_rest:
            h_minus = V[0] - V[1] + (Q - 2) * (r1 - r2) + shift
            if has_plus:
                e, f = solve_rest((h_minus, V[2] - V[1] + shift))
                out[1], out[2] = e
            else:
                e, f = solve_rest((h_minus,))
                out[1] = e[0]
            F += (1.0 - r1) * f
        return out[cls], F

    return step


def _general_map(p):
    def step(m):
        return _site_terms(conjugate_params(m, p), p)

    return step


def symmetrize(m, p):
    """Replace each entry by the mean of its symmetry class."""
    lay = p.layout
    m = np.asarray(m, dtype=float)
    out = m.copy()
    for c in range(3):
        mask = lay.sym_class == c
        if mask.any():
            out[mask] = m[mask].mean()
    return out


def iterate_saddle(p, m_init=None, damping=0.5, tol=1e-10, max_iter=100_000, symmetric=False, seed=0):
    """Damped fixed-point iteration ``m <- (1 - a) m + a <sigma^z>_{H_eff(m~(m))}``.

    ``m_init`` is an :class:`OrderParams`, an array, a scalar or the name of an
    init family. With ``symmetric=True`` the iterate is restricted to the
    three symmetry classes (requires equal ``rho_xi`` for ``xi >= 2``) and each
    site problem is solved in its collective-spin blocks.

    The loop stops when the undamped residual ``max |F(m) - m|`` is at most
    ``tol``; the returned ``m`` is the iterate that residual belongs to.
    """
    damping = check_real(damping, "damping", minimum=0.0, strict=True)
    if damping > 1:
        raise InputError("damping must lie in (0, 1]")
    tol = check_real(tol, "tol", minimum=0.0, strict=True)
    max_iter = check_count(max_iter, "max_iter", 1)
    m = _coerce_init(m_init, p, seed)
    if symmetric:
        if not p.is_symmetric:
            raise InputError("symmetric iteration needs rho_xi equal for all xi >= 2")
        m = symmetrize(m, p)
        step = _symmetric_map(p)
    else:
        step = _general_map(p)
    residual = np.inf
    converged = False
    it = 0
    while it < max_iter:
        new, _ = step(m)
        it += 1
        residual = float(np.max(np.abs(new - m), initial=0.0))
        if residual <= tol:
            converged = True
            break
        m = (1.0 - damping) * m + damping * new
    mt = conjugate_params(m, p)
    f = free_energy(m, mt, p)
    return SaddleSolution(p, OrderParams(p.layout.index, m, mt), f, it, converged, residual)
