"""Ising encodings of integer optimization problems.

Two encodings are supported:

* ``one-hot``: ``Q`` spins per variable, feasible blocks have exactly one
  spin down (``x = 1``).
* ``zero-hot``: the spin for the candidate value ``r_i`` is removed, leaving
  ``Q - 1`` spins per variable. The all-up block encodes ``S_i = r_i`` and a
  block with one spin down at ``q`` encodes ``S_i = q``.

Binary variables map to spins through ``x = (1 - sigma) / 2``, so ``sigma = -1``
means the indicator is set. Encoded energies follow
``-sum J sigma sigma - sum h sigma + (lam / 2) sum_i (sum_q sigma_qi - (Q - 2))^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from zerohot._validation import check_assignment, check_real, check_spins
from zerohot.exceptions import InputError, SizeError
from zerohot.potts import CandidateSolution, potts_energy

ONE_HOT = "one-hot"
ZERO_HOT = "zero-hot"


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Encoded spin Hamiltonian; treat as immutable once built.

    ``spins`` holds 1-based ``(q, i)`` ids ordered by variable then value.
    ``couplings`` has one entry per unordered pair, keyed in spin order.
    ``energy_offset`` is the constant with
    ``potts_energy(s) == ising_energy(encode(s)) + energy_offset`` on feasible
    configurations.
    """

    spins: tuple
    couplings: dict
    local_fields: dict
    penalty: float
    kind: str
    n_vars: int
    q_values: int
    anchor: CandidateSolution | None = None
    energy_offset: float = 0.0

    @property
    def n_spins(self):
        return len(self.spins)

    @cached_property
    def index(self):
        return {sid: k for k, sid in enumerate(self.spins)}

    @cached_property
    def coupling_matrix(self):
        """Strictly upper-triangular ``J`` in spin order."""
        J = np.zeros((self.n_spins, self.n_spins))
        for (a, b), v in self.couplings.items():
            J[self.index[a], self.index[b]] = v
        return J

    @cached_property
    def field_vector(self):
        h = np.zeros(self.n_spins)
        for a, v in self.local_fields.items():
            h[self.index[a]] = v
        return h

    @cached_property
    def blocks(self):
        """Site membership matrix of shape ``(n_spins, n_vars)``."""
        B = np.zeros((self.n_spins, self.n_vars))
        for k, (_, i) in enumerate(self.spins):
            B[k, i - 1] = 1.0
        return B

    @property
    def penalty_target(self):
        return self.q_values - 2

    def site_spins(self, i):
        """Values ``q`` carried by the spins of variable ``i``, in spin order."""
        return [q for q, site in self.spins if site == i]

    def energies(self, sigma):
        """Vectorized :func:`ising_energy` for an ``(M, n_spins)`` array."""
        s = np.asarray(sigma, dtype=float)
        prob = -np.einsum("ma,ab,mb->m", s, self.coupling_matrix, s) - s @ self.field_vector
        excess = s @ self.blocks - self.penalty_target
        return prob + 0.5 * self.penalty * np.sum(excess**2, axis=1)


@dataclass(frozen=True)
class Infeasible:
    """Decoding failure; ``sites`` lists the 1-based variables whose block is invalid."""

    sites: tuple


@dataclass(frozen=True)
class ConsistencyReport:
    trials: int
    max_deviation: float
    tolerance: float
    passed: bool


def _check_penalty(lam):
    return check_real(lam, "penalty", minimum=0.0)


def _spin_order(n_vars, allowed):
    return tuple((q, i) for i in range(1, n_vars + 1) for q in allowed(i))


def encode_one_hot(instance, lam):
    lam = _check_penalty(lam)
    N, Q = instance.n_vars, instance.q_values
    spins = _spin_order(N, lambda i: range(1, Q + 1))
    couplings = {}
    h = {sid: 0.0 for sid in spins}
    const = 0.0
    for e in instance.edges:
        f = e.f
        for q in range(1, Q + 1):
            for qq in range(1, Q + 1):
                couplings[((q, e.i), (qq, e.j))] = f[q - 1, qq - 1] / 4.0
        rows, cols = f.sum(axis=1), f.sum(axis=0)
        for q in range(1, Q + 1):
            h[(q, e.i)] -= rows[q - 1] / 4.0
            h[(q, e.j)] -= cols[q - 1] / 4.0
        const -= f.sum() / 4.0
    for i in range(1, N + 1):
        for q in range(1, Q + 1):
            h[(q, i)] -= instance.fields[i - 1, q - 1] / 2.0
    const -= instance.fields.sum() / 2.0
    return IsingModel(spins, couplings, h, lam, ONE_HOT, N, Q, None, const)


def zero_hot_tables(instance, candidate):
    """Quadratic and linear tables of the reduced binary problem.

    Returns ``(quad, lin, const)`` where ``quad[(i, j)]`` is the full ``Q x Q``
    table ``f(q,q') - f(q,r_j) - f(r_i,q') + f(r_i,r_j)`` (rows ``q = r_i`` and
    columns ``q' = r_j`` are identically zero), ``lin`` is the ``N x Q`` array
    of linear coefficients and ``const`` is the energy of the candidate.
    """
    r = candidate.r - 1
    N, Q = instance.n_vars, instance.q_values
    g = instance.fields
    quad = {}
    lin = np.zeros((N, Q))
    const = 0.0
    for e in instance.edges:
        i, j = e.i - 1, e.j - 1
        f = e.f
        ri, rj = r[i], r[j]
        quad[(e.i, e.j)] = f - f[:, [rj]] - f[[ri], :] + f[ri, rj]
        lin[i] += f[:, rj] - f[ri, rj]
        lin[j] += f[ri, :] - f[ri, rj]
        const += f[ri, rj]
    lin += g - g[np.arange(N), r][:, None]
    const += g[np.arange(N), r].sum()
    return quad, lin, const


def encode_zero_hot(instance, candidate, lam):
    lam = _check_penalty(lam)
    if not isinstance(candidate, CandidateSolution):
        candidate = CandidateSolution(np.asarray(candidate), instance.q_values)
    N, Q = instance.n_vars, instance.q_values
    if candidate.n_vars != N or candidate.q_values != Q:
        raise InputError(
            f"candidate has N={candidate.n_vars}, Q={candidate.q_values}; "
            f"instance has N={N}, Q={Q}"
        )
    r = candidate.r
    spins = _spin_order(N, lambda i: [q for q in range(1, Q + 1) if q != r[i - 1]])
    quad, lin, cand_energy = zero_hot_tables(instance, candidate)

    couplings = {}
    h = {sid: 0.0 for sid in spins}
    const = -cand_energy
    for (i, j), Qt in quad.items():
        ri, rj = r[i - 1], r[j - 1]
        qs = [q for q in range(1, Q + 1) if q != ri]
        qqs = [q for q in range(1, Q + 1) if q != rj]
        block = Qt[np.ix_(np.array(qs) - 1, np.array(qqs) - 1)]
        for a, q in enumerate(qs):
            for b, qq in enumerate(qqs):
                couplings[((q, i), (qq, j))] = block[a, b] / 4.0
        for a, q in enumerate(qs):
            h[(q, i)] -= block[a].sum() / 4.0
        for b, qq in enumerate(qqs):
            h[(qq, j)] -= block[:, b].sum() / 4.0
        const -= block.sum() / 4.0
    for q, i in spins:
        h[(q, i)] -= lin[i - 1, q - 1] / 2.0
        const -= lin[i - 1, q - 1] / 2.0
    # every feasible block sits at distance 1 from the penalty target
    const -= 0.5 * lam * N
    return IsingModel(spins, couplings, h, lam, ZERO_HOT, N, Q, candidate, const)


def ising_energy(model, spins):
    s = check_spins(spins, model.n_spins)
    if s.ndim != 1:
        raise InputError("ising_energy expects a single spin vector")
    return float(model.energies(s[None, :])[0])


def encode_assignment(model, s):
    """Spin vector representing the integer assignment ``s`` under ``model``."""
    s = check_assignment(s, model.n_vars, model.q_values)
    return np.array([-1 if s[i - 1] == q else 1 for q, i in model.spins], dtype=np.int64)


def decode(model, spins):
    s = check_spins(spins, model.n_spins)
    out = np.zeros(model.n_vars, dtype=np.int64)
    bad = []
    for i in range(1, model.n_vars + 1):
        qs = [(q, s[model.index[(q, i)]]) for q in model.site_spins(i)]
        down = [q for q, v in qs if v == -1]
        if len(down) == 1:
            out[i - 1] = down[0]
        elif not down and model.kind == ZERO_HOT:
            out[i - 1] = model.anchor.r[i - 1]
        else:
            bad.append(i)
    if bad:
        return Infeasible(tuple(bad))
    return out


def is_feasible(model, spins):
    return not isinstance(decode(model, spins), Infeasible)


def verify_energy_consistency(instance, model, trials=100, seed=0, tol=1e-10):
    """Compare Ising and Potts energy gaps over random feasible assignment pairs."""
    rng = np.random.default_rng(seed)
    N, Q = instance.n_vars, instance.q_values
    worst = 0.0
    for _ in range(int(trials)):
        s = rng.integers(1, Q + 1, size=N)
        t = rng.integers(1, Q + 1, size=N)
        d_ising = ising_energy(model, encode_assignment(model, s)) - ising_energy(
            model, encode_assignment(model, t)
        )
        d_potts = potts_energy(instance, s) - potts_energy(instance, t)
        worst = max(worst, abs(d_ising - d_potts))
    return ConsistencyReport(int(trials), worst, tol, worst <= tol)


def lambda_big(instance):
    """Penalty weight used in tests as a candidate for exact ground-state encoding."""
    return 2.0 * instance.q_values * instance.max_abs_f() + 2.0 * instance.max_abs_g() + 1.0


def all_spin_configurations(n):
    """Every ``+-1`` vector of length ``n``; row ``k`` has bit ``b`` set -> ``sigma = -1``."""
    codes = np.arange(2**n)[:, None]
    bits = (codes >> np.arange(n - 1, -1, -1)) & 1
    return 1 - 2 * bits


def spin_ground_states(model, atol=1e-9):
    """Exhaustive minimum over all ``2^n`` spin configurations."""
    if model.n_spins > 22:
        raise SizeError(f"{model.n_spins} spins is too many for exhaustive search")
    sig = all_spin_configurations(model.n_spins)
    e = model.energies(sig)
    lo = e.min()
    return float(lo), sig[e <= lo + atol]


def to_quadratic(model):
    """Fold the penalty into plain couplings, fields and a constant.

    Returns ``(couplings, fields, constant)`` such that
    ``-sum J' s s - sum h' s + constant`` equals :func:`ising_energy`.
    """
    lam, c = model.penalty, model.penalty_target
    J = dict(model.couplings)
    h = {k: v + lam * c for k, v in model.local_fields.items()}
    constant = 0.0
    for i in range(1, model.n_vars + 1):
        members = [(q, i) for q in model.site_spins(i)]
        constant += 0.5 * lam * (len(members) + c * c)
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                key = (members[a], members[b])
                J[key] = J.get(key, 0.0) - lam
    return J, h, constant


def model_to_dict(model):
    J, h, const = to_quadratic(model)

    def sid(s):
        return [int(s[0]), int(s[1])]

    return {
        "kind": model.kind,
        "n": model.n_vars,
        "q": model.q_values,
        "lambda": model.penalty,
        "penalty_target": model.penalty_target,
        "anchor": None if model.anchor is None else model.anchor.r.tolist(),
        "offset": model.energy_offset,
        "spins": [sid(s) for s in model.spins],
        "couplings": [[sid(a), sid(b), float(v)] for (a, b), v in model.couplings.items()],
        "fields": [[sid(a), float(v)] for a, v in model.local_fields.items()],
        "folded": {
            "couplings": [[sid(a), sid(b), float(v)] for (a, b), v in J.items()],
            "fields": [[sid(a), float(v)] for a, v in h.items()],
            "constant": const,
        },
    }


def model_from_dict(data):
    try:
        anchor = data.get("anchor")
        q = int(data["q"])
        spins = tuple((int(a), int(b)) for a, b in data["spins"])
        couplings = {
            ((int(a[0]), int(a[1])), (int(b[0]), int(b[1]))): float(v)
            for a, b, v in data["couplings"]
        }
        fields = {(int(a[0]), int(a[1])): float(v) for a, v in data["fields"]}
        return IsingModel(
            spins,
            couplings,
            fields,
            float(data["lambda"]),
            data["kind"],
            int(data["n"]),
            q,
            None if anchor is None else CandidateSolution(np.asarray(anchor), q),
            float(data.get("offset", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model JSON: {exc}") from None
