"""Integer optimization instances, candidate solutions and a brute-force oracle.

Values and variable indices are 1-based at every public boundary; the
interaction tables are stored as 0-based numpy arrays.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from zerohot._validation import (
    check_assignment,
    check_count,
    check_fractions,
    check_real,
)
from zerohot.exceptions import InputError, SizeError

ENUMERATION_LIMIT = 10**7
_CHUNK = 1 << 18


@dataclass(frozen=True, eq=False)
class Edge:
    """Pairwise interaction ``f_ij(q, q')`` between variables ``i < j`` (1-based)."""

    i: int
    j: int
    f: np.ndarray


@dataclass(frozen=True, eq=False)
class PottsInstance:
    """Cost ``-sum_(ij) f_ij(S_i, S_j) - sum_i g_i(S_i)`` over ``S in {1..Q}^N``."""

    n_vars: int
    q_values: int
    edges: tuple[Edge, ...] = ()
    fields: np.ndarray | None = None
    coupling: float | None = None

    def __post_init__(self):
        n = check_count(self.n_vars, "n_vars", 1)
        q = check_count(self.q_values, "q_values", 2)
        seen = set()
        edges = []
        for e in self.edges:
            i, j = int(e.i), int(e.j)
            if not 1 <= i < j <= n:
                raise InputError(f"edge ({i}, {j}) must satisfy 1 <= i < j <= {n}")
            if (i, j) in seen:
                raise InputError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            f = np.array(e.f, dtype=float)
            if f.shape != (q, q):
                raise InputError(f"edge ({i}, {j}) table must be {q}x{q}, got {f.shape}")
            f.setflags(write=False)
            edges.append(Edge(i, j, f))
        if self.fields is None:
            g = np.zeros((n, q))
        else:
            g = np.array(self.fields, dtype=float)
            if g.shape != (n, q):
                raise InputError(f"fields must have shape ({n}, {q}), got {g.shape}")
        g.setflags(write=False)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "fields", g)

    def neighbors(self, i):
        """Indices ``j`` interacting with variable ``i``."""
        out = []
        for e in self.edges:
            if e.i == i:
                out.append(e.j)
            elif e.j == i:
                out.append(e.i)
        return sorted(out)

    def max_abs_f(self):
        return max((float(np.abs(e.f).max()) for e in self.edges), default=0.0)

    def max_abs_g(self):
        return float(np.abs(self.fields).max()) if self.fields.size else 0.0


@dataclass(frozen=True, eq=False)
class CandidateSolution:
    """Reference assignment ``r`` and its partition into value groups."""

    r: np.ndarray
    q_values: int
    group_sizes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q = check_count(self.q_values, "q_values", 2)
        r = np.asarray(self.r)
        r = check_assignment(r, r.shape[0] if r.ndim == 1 else -1, q, "candidate")
        r.setflags(write=False)
        sizes = np.bincount(r - 1, minlength=q)
        sizes.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "group_sizes", sizes)

    @property
    def n_vars(self):
        return int(self.r.shape[0])

    @property
    def groups(self):
        """Mapping value -> tuple of 1-based variable indices carrying it."""
        return {
            xi: tuple(int(i) + 1 for i in np.flatnonzero(self.r == xi))
            for xi in range(1, self.q_values + 1)
        }

    @property
    def fractions(self):
        return self.group_sizes / self.n_vars


def potts_energy(instance, s):
    s = check_assignment(s, instance.n_vars, instance.q_values) - 1
    e = 0.0
    for edge in instance.edges:
        e -= edge.f[s[edge.i - 1], s[edge.j - 1]]
    e -= instance.fields[np.arange(instance.n_vars), s].sum()
    return float(e)


def _energies(instance, S0):
    """Vectorized energies for a block of 0-based assignments, shape (M, N)."""
    e = -instance.fields[np.arange(instance.n_vars), S0].sum(axis=1)
    for edge in instance.edges:
        e = e - edge.f[S0[:, edge.i - 1], S0[:, edge.j - 1]]
    return e


def make_fc_ferro_potts(N, Q, J=1.0):
    """Fully connected ferromagnetic Potts model, ``f_ij(q, q') = (4J/N) [q == q']``."""
    N = check_count(N, "N", 2)
    Q = check_count(Q, "Q", 2)
    J = check_real(J, "J", minimum=0.0, strict=True)
    table = (4.0 * J / N) * np.eye(Q)
    edges = tuple(Edge(i, j, table) for i in range(1, N + 1) for j in range(i + 1, N + 1))
    return PottsInstance(N, Q, edges, None, J)


def largest_remainder(rho, N):
    """Integer group sizes summing to ``N`` that best match ``rho * N``."""
    exact = np.asarray(rho, dtype=float) * N
    rounded = np.rint(exact)
    if rounded.sum() == N and np.allclose(rounded, exact, atol=1e-9):
        return rounded.astype(np.int64)
    sizes = np.floor(exact + 1e-9).astype(np.int64)
    remainder = exact - sizes
    short = N - int(sizes.sum())
    # stable sort keeps ties in favour of the lower value label
    order = np.argsort(-remainder, kind="stable")
    sizes[order[:short]] += 1
    return sizes


def make_partitioned_candidate(N, Q, rho):
    """Candidate with ``r_i = xi`` on consecutive blocks of sizes ``~ rho_xi * N``."""
    N = check_count(N, "N", 1)
    Q = check_count(Q, "Q", 2)
    rho = check_fractions(rho, Q)
    sizes = largest_remainder(rho, N)
    r = np.repeat(np.arange(1, Q + 1), sizes)
    return CandidateSolution(r, Q)


def brute_force_optima(instance, atol=1e-12):
    """Exhaustive minimum of :func:`potts_energy` and every assignment attaining it."""
    N, Q = instance.n_vars, instance.q_values
    total = Q**N
    if total > ENUMERATION_LIMIT:
        raise SizeError(f"Q^N = {total} exceeds the enumeration bound {ENUMERATION_LIMIT}")
    powers = Q ** np.arange(N - 1, -1, -1)
    best = np.inf
    optima = []
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total))
        S0 = (codes[:, None] // powers) % Q
        e = _energies(instance, S0)
        lo = e.min()
        if lo < best - atol:
            best = lo
            optima = []
        if lo <= best + atol:
            optima.extend(tuple(int(v) + 1 for v in row) for row in S0[e <= best + atol])
    return float(best), set(optima)


def overlap(candidate, s):
    r = candidate.r
    s = np.asarray(s)
    if s.shape != r.shape:
        raise InputError(f"assignment length {s.shape} does not match candidate {r.shape}")
    return float(np.mean(r == s))


def iter_assignments(N, Q):
    """All assignments in lexicographic order, 1-based tuples."""
    return itertools.product(range(1, Q + 1), repeat=N)


def random_instance(N, Q, rng, low=-1.0, high=1.0, with_fields=True):
    """Complete-graph instance with tables drawn uniformly from ``[low, high]``."""
    edges = tuple(
        Edge(i, j, rng.uniform(low, high, size=(Q, Q)))
        for i in range(1, N + 1)
        for j in range(i + 1, N + 1)
    )
    g = rng.uniform(low, high, size=(N, Q)) if with_fields else None
    return PottsInstance(N, Q, edges, g)


# -- JSON I/O ---------------------------------------------------------------


def instance_from_dict(data):
    """Parse the instance schema; returns ``(instance, candidate_or_None)``."""
    if not isinstance(data, dict):
        raise InputError("instance JSON must be an object")
    try:
        n = data["n"]
        q = data["q"]
    except KeyError as exc:
        raise InputError(f"instance JSON missing key {exc}") from None
    J = data.get("J")
    raw_edges = data.get("edges") or []
    if not raw_edges and J is not None:
        instance = make_fc_ferro_potts(n, q, J)
    else:
        edges = []
        for k, e in enumerate(raw_edges):
            try:
                edges.append(Edge(int(e["i"]), int(e["j"]), np.asarray(e["f"], dtype=float)))
            except (KeyError, TypeError, ValueError) as exc:
                raise InputError(f"malformed edge #{k}: {exc}") from None
        g = data.get("g")
        try:
            g = None if g is None else np.asarray(g, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError(f"malformed g: {exc}") from None
        instance = PottsInstance(n, q, tuple(edges), g, None if J is None else float(J))
    cand = data.get("candidate")
    candidate = None
    if cand is not None:
        cand = check_assignment(cand, instance.n_vars, instance.q_values, "candidate")
        candidate = CandidateSolution(cand, instance.q_values)
    return instance, candidate


def instance_to_dict(instance, candidate=None):
    out = {"n": instance.n_vars, "q": instance.q_values}
    if instance.coupling is not None:
        out["J"] = instance.coupling
    out["edges"] = [{"i": e.i, "j": e.j, "f": e.f.tolist()} for e in instance.edges]
    out["g"] = instance.fields.tolist()
    if candidate is not None:
        out["candidate"] = candidate.r.tolist()
    return out


def load_instance(path):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno})") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return instance_from_dict(data)
