"""Continuation sweeps, symmetry classes and first-order transition detection."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from zerohot._validation import check_grid, check_real
from zerohot.exceptions import AnalysisError, BracketError, InputError
from zerohot.meanfield.saddle import (
    MFParams,
    OrderParams,
    iterate_saddle,
)

CONTROLS = {"gamma": "gamma_over_J", "temperature": "temperature_over_J"}
JUMP_TOL = 0.05
DISTINCT_TOL = 1e-3
MIN_SPACINGS = 2
SWEEP_COLUMNS = (
    "control_value",
    "branch_id",
    "m0",
    "m_minus",
    "m_plus",
    "free_energy",
    "converged",
    "residual",
    "iterations",
)


def default_gamma_grid():
    return np.linspace(0.0, 3.0, 301)


def default_temperature_grid():
    return np.linspace(0.0, 2.0, 202)[1:]


@dataclass(frozen=True)
class SymmetryClasses:
    m0: float | None
    m_minus: float | None
    m_plus: float | None
    max_spread: float


def classify_symmetry(m):
    """Class means of ``m[q, 1]``, ``m[1, xi]`` and ``m[q, xi]`` (``q, xi >= 2``)."""
    if not isinstance(m, OrderParams):
        raise InputError("classify_symmetry expects OrderParams")
    q = np.array([k[0] for k in m.index])
    xi = np.array([k[1] for k in m.index])
    masks = (xi == 1, (xi != 1) & (q == 1), (xi != 1) & (q != 1))
    means, spread = [], 0.0
    for mask in masks:
        if mask.any():
            vals = m.m[mask]
            means.append(float(vals.mean()))
            spread = max(spread, float(np.ptp(vals)))
        else:
            means.append(None)
    return SymmetryClasses(*means, spread)


@dataclass
class Branch:
    """Solutions along an ascending grid, traversed in ``direction`` from ``init``."""

    control: str
    grid: np.ndarray
    direction: str
    init: str
    solutions: list = field(default_factory=list)

    def _column(self, name):
        out = []
        for s in self.solutions:
            v = getattr(s.symmetry, name)
            out.append(np.nan if v is None else v)
        return np.array(out)

    @property
    def m0(self):
        return self._column("m0")

    @property
    def free_energy(self):
        return np.array([s.free_energy for s in self.solutions])

    @property
    def converged(self):
        return np.array([s.converged for s in self.solutions], dtype=bool)

    def matrix(self):
        return np.array([s.m for s in self.solutions])


@dataclass
class TransitionReport:
    first_order: bool
    jump_size: float
    hysteresis_interval: tuple
    crossing_point: float | None
    selected_m0: np.ndarray
    selected_branch: np.ndarray
    jump_at: float | None = None


def _auto_symmetric(p, init):
    return p.is_symmetric and init != "random"


def sweep_control(
    p_base,
    control,
    grid,
    direction="down",
    inits=("zero",),
    damping=0.5,
    tol=1e-10,
    max_iter=100_000,
    symmetric=None,
    seed=0,
):
    """Warm-started continuation along ``grid``; one :class:`Branch` per init label.

    ``symmetric=None`` uses the three-class reduction whenever the fractions
    allow it, except for ``random`` starts which are meant to probe broken
    symmetry. Metastable solutions are kept as found.
    """
    if control not in CONTROLS:
        raise InputError(f"control must be one of {sorted(CONTROLS)}, got {control!r}")
    if direction not in ("down", "up"):
        raise InputError(f"direction must be 'down' or 'up', got {direction!r}")
    grid = np.sort(check_grid(grid, f"{control} grid"))
    if grid[0] < 0:
        raise InputError(f"{control} grid must be non-negative")
    order = range(len(grid)) if direction == "up" else range(len(grid) - 1, -1, -1)
    attr = CONTROLS[control]
    branches = []
    for init in inits:
        sym = _auto_symmetric(p_base, init) if symmetric is None else symmetric
        sols = [None] * len(grid)
        start = init
        for k in order:
            p = p_base.replace(**{attr: float(grid[k])})
            sol = iterate_saddle(p, start, damping, tol, max_iter, sym, seed)
            sols[k] = sol
            start = sol.m
        branches.append(Branch(control, grid, direction, str(init), sols))
    return branches


def standard_branches(p_base, control, grid, extra_zero_up=False, **kwargs):
    """Down-sweep from ``zero`` at the high end and up-sweep from ``ferro`` at the low end."""
    out = sweep_control(p_base, control, grid, "down", ("zero",), **kwargs)
    inits = ("ferro", "zero") if extra_zero_up else ("ferro",)
    out += sweep_control(p_base, control, grid, "up", inits, **kwargs)
    return out


def _runs(mask):
    """``(start, stop)`` index pairs of maximal True runs, stop inclusive."""
    runs, k, n = [], 0, len(mask)
    while k < n:
        if mask[k]:
            j = k
            while j + 1 < n and mask[j + 1]:
                j += 1
            runs.append((k, j))
            k = j + 1
        else:
            k += 1
    return runs


def detect_first_order(
    branches, grid=None, jump_tol=JUMP_TOL, min_spacings=MIN_SPACINGS, distinct_tol=DISTINCT_TOL
):
    """First-order signature from a set of branches on a common grid.

    Either the free-energy-minimizing ``m0`` jumps by more than ``jump_tol``
    between neighbouring points, or two converged branches stay distinct
    over at least ``min_spacings`` grid spacings while their free-energy
    difference changes sign.
    """
    if not branches:
        raise InputError("need at least one branch")
    ref = branches[0].grid if grid is None else np.asarray(grid, dtype=float)
    for b in branches:
        if len(b.solutions) != len(ref) or not np.allclose(b.grid, ref, rtol=0, atol=1e-12):
            raise InputError("branch grid does not match the sweep grid")
    conv = np.array([b.converged for b in branches])
    if not conv.any():
        raise AnalysisError("no converged solution on any branch")
    f = np.where(conv, np.array([b.free_energy for b in branches]), np.inf)
    m0 = np.array([b.m0 for b in branches])
    n = len(ref)
    sel = np.full(n, -1)
    chosen = np.full(n, np.nan)
    for k in range(n):
        if conv[:, k].any():
            sel[k] = int(np.argmin(f[:, k]))
            chosen[k] = m0[sel[k], k]
    jumps = np.abs(np.diff(chosen))
    jumps = np.where(np.isnan(jumps), 0.0, jumps)
    jump = float(jumps.max(initial=0.0))
    jump_at = float(0.5 * (ref[np.argmax(jumps)] + ref[np.argmax(jumps) + 1])) if n > 1 else None

    lo, hi, crossing = np.inf, -np.inf, None
    mats = [b.matrix() for b in branches]
    for a in range(len(branches)):
        for c in range(a + 1, len(branches)):
            both = conv[a] & conv[c]
            dist = np.max(np.abs(mats[a] - mats[c]), axis=1)
            for s, e in _runs(both & (dist > distinct_tol)):
                if e - s < min_spacings:
                    continue
                df = f[a, s : e + 1] - f[c, s : e + 1]
                flips = np.flatnonzero(df[:-1] * df[1:] < 0)
                if flips.size == 0:
                    continue
                lo, hi = min(lo, ref[s]), max(hi, ref[e])
                k = s + int(flips[0])
                x0, x1 = ref[k], ref[k + 1]
                d0, d1 = df[flips[0]], df[flips[0] + 1]
                crossing = float(x0 - d0 * (x1 - x0) / (d1 - d0))
    coexist = lo <= hi
    return TransitionReport(
        first_order=bool(jump > jump_tol or coexist),
        jump_size=jump,
        hysteresis_interval=(float(lo), float(hi)) if coexist else (),
        crossing_point=crossing,
        selected_m0=chosen,
        selected_branch=sel,
        jump_at=jump_at if jump > jump_tol else None,
    )


def sweep_rows(branches):
    """Records for the sweep CSV, grid order within each branch."""
    rows = []
    for bid, b in enumerate(branches):
        for x, s in zip(b.grid, b.solutions):
            c = s.symmetry
            rows.append(
                {
                    "control_value": float(x),
                    "branch_id": bid,
                    "m0": c.m0,
                    "m_minus": c.m_minus,
                    "m_plus": c.m_plus,
                    "free_energy": s.free_energy,
                    "converged": bool(s.converged),
                    "residual": s.residual,
                    "iterations": s.iterations,
                }
            )
    return rows


def gamma_first_order(Q, lambda_over_J, rho1, temperature_over_J=0.0, gamma_grid=None, **kwargs):
    """Report for the standard pair of Gamma sweeps at fixed temperature."""
    grid = default_gamma_grid() if gamma_grid is None else gamma_grid
    p = MFParams.symmetric(Q, rho1, lambda_over_J, 0.0, temperature_over_J)
    return detect_first_order(standard_branches(p, "gamma", grid, **kwargs))


def rho1_threshold(Q, lambda_over_J, tol=1e-3, gamma_grid=None, jobs=1, **kwargs):
    """Bisection for the ``rho1`` above which the ``T = 0`` Gamma sweep is continuous.

    The bracket ``[1/Q, 1]`` must show a first-order sweep at its low end and
    a continuous one at its high end.
    """
    tol = check_real(tol, "tol", minimum=1e-4)
    lam = check_real(lambda_over_J, "lambda", minimum=0.0)

    def first_order(r):
        return gamma_first_order(Q, lam, r, 0.0, gamma_grid, **kwargs).first_order

    lo, hi = 1.0 / Q, 1.0
    if not first_order(lo) or first_order(hi):
        raise BracketError(f"first-order predicate does not change sign on [1/{Q}, 1] at lambda={lam}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if first_order(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class PhaseBoundary:
    """Per temperature, the Gamma extent of first-order behaviour (NaN when absent)."""

    temperature: np.ndarray
    gamma_low: np.ndarray
    gamma_high: np.ndarray
    crossing: np.ndarray
    unconverged: np.ndarray

    def rows(self):
        return [
            {"T": float(t), "gamma_low": float(a), "gamma_high": float(b)}
            for t, a, b in zip(self.temperature, self.gamma_low, self.gamma_high)
        ]

    def region(self):
        """Mapping ``T -> (gamma_low, gamma_high)`` over temperatures with first-order points."""
        return {
            float(t): (float(a), float(b))
            for t, a, b in zip(self.temperature, self.gamma_low, self.gamma_high)
            if not np.isnan(a)
        }


def parallel_map(fn, items, jobs=1):
    """Order-preserving map, across processes when ``jobs > 1``."""
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=int(jobs)) as pool:
        return list(pool.map(fn, items))


def _boundary_point(task):
    Q, lam, rho1, T, grid, kwargs = task
    p = MFParams.symmetric(Q, rho1, lam, 0.0, T)
    branches = standard_branches(p, "gamma", grid, extra_zero_up=True, **kwargs)
    bad = not all(b.converged.all() for b in branches)
    try:
        rep = detect_first_order(branches)
    except AnalysisError:
        return np.nan, np.nan, np.nan, True
    if not rep.first_order:
        return np.nan, np.nan, np.nan, bad
    if rep.hysteresis_interval:
        lo, hi = rep.hysteresis_interval
    else:
        lo = hi = rep.jump_at
    cross = np.nan if rep.crossing_point is None else rep.crossing_point
    return lo, hi, cross, bad


def gamma_T_boundary(Q, lambda_over_J, rho1, T_grid, gamma_grid=None, jobs=1, **kwargs):
    """First-order Gamma interval at each temperature of ``T_grid``.

    Each temperature runs the standard sweeps plus an extra up-sweep from the
    origin, which reaches the paramagnetic branch at small Gamma. When the
    sweep is first order but no coexistence interval is resolved, the
    interval collapses onto the location of the jump.
    """
    T_grid = check_grid(T_grid, "T grid")
    grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    tasks = [(Q, lambda_over_J, rho1, float(T), grid, kwargs) for T in T_grid]
    out = np.array(parallel_map(_boundary_point, tasks, jobs), dtype=float).reshape(-1, 4)
    return PhaseBoundary(
        np.asarray(T_grid, dtype=float), out[:, 0], out[:, 1], out[:, 2], out[:, 3].astype(bool)
    )


def region_contains(outer, inner, atol=1e-12):
    """True when every first-order point of ``inner`` lies inside ``outer`` at the same T."""
    A, B = outer.region(), inner.region()
    for T, (a, b) in B.items():
        if T not in A:
            return False
        c, d = A[T]
        if a < c - atol or b > d + atol:
            return False
    return True
