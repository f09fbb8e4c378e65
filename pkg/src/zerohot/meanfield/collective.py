"""Site problems whose spins split into classes sharing one longitudinal field.

Within a class of ``n`` spins the operator only involves the collective spin,
so the ``2^n`` space decomposes into total-spin blocks ``j`` of multiplicity
``C(n, n/2 - j) - C(n, n/2 - j - 1)``. Traces are sums over blocks weighted
by these multiplicities, which keeps the result exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.linalg import lapack

from zerohot.exact_qa import DEGENERACY_RTOL
from zerohot.exceptions import AnalysisError


@dataclass(frozen=True, eq=False)
class _Block:
    multiplicity: int
    mag: np.ndarray  # (dim, n_classes): 2 m_c per basis state
    flip: np.ndarray  # collective sum of sigma^x in this block


def _multiplicity(n, twice_j):
    k = (n - twice_j) // 2
    return comb(n, k) - (comb(n, k - 1) if k >= 1 else 0)


@lru_cache(maxsize=None)
def _blocks(sizes):
    """Total-spin blocks for class sizes ``sizes``, top block first."""
    per_class = [list(range(n, -1, -2)) for n in sizes]
    out = []
    for tj in itertools.product(*per_class):
        mult = 1
        for n, t in zip(sizes, tj):
            mult *= _multiplicity(n, t)
        # 2m runs over t, t-2, ..., -t in every class
        ladders = [np.arange(t, -t - 1, -2) for t in tj]
        mag = np.array(list(itertools.product(*ladders)), dtype=float).reshape(-1, len(sizes))
        dim = mag.shape[0]
        flip = np.zeros((dim, dim))
        index = {tuple(row): k for k, row in enumerate(mag.astype(int))}
        for k, row in enumerate(mag.astype(int)):
            for c, t in enumerate(tj):
                two_m = row[c]
                if two_m - 2 < -t:
                    continue
                # <m-1| 2 S^x |m> = sqrt(j(j+1) - m(m-1)) with j = t/2
                j, m = t / 2.0, two_m / 2.0
                other = list(row)
                other[c] -= 2
                kk = index[tuple(other)]
                val = np.sqrt(j * (j + 1) - m * (m - 1))
                flip[k, kk] = flip[kk, k] = val
        mag.setflags(write=False)
        flip.setflags(write=False)
        out.append(_Block(mult, mag, flip))
    return tuple(out)


@lru_cache(maxsize=None)
def _diagonal_levels(sizes):
    """Classical levels: per class down-counts and their basis multiplicities."""
    ranges = [range(n + 1) for n in sizes]
    k = np.array(list(itertools.product(*ranges)), dtype=float).reshape(-1, len(sizes))
    mult = np.ones(len(k))
    for c, n in enumerate(sizes):
        mult *= np.array([comb(n, int(v)) for v in k[:, c]], dtype=float)
    mag = np.asarray(sizes, dtype=float) - 2.0 * k
    mag.setflags(write=False)
    mult.setflags(write=False)
    return mag, mult


def _eigh(A):
    w, v, info = lapack.dsyevd(A)
    if info != 0:
        raise AnalysisError(f"symmetric eigensolver failed (info={info})")
    return w, v


class ClassSiteSolver:
    """Precomputed class-reduced site problem at fixed ``lam``, ``gamma`` and ``T``.

    The operator is ``(lam/2)(sum sigma^z)^2 - sum_c h_c sum_{i in c} sigma^z_i
    - gamma sum sigma^x``. Calling the solver with the class fields returns
    the class-mean ``<sigma^z>`` and the site free energy ``-T log Tr e^{-H/T}``
    (the ground energy at ``T = 0``, with degenerate classical levels
    averaged by multiplicity).
    """

    def __init__(self, sizes, lam, gamma, T):
        self.sizes = tuple(int(n) for n in sizes)
        self.n = np.asarray(self.sizes, dtype=float)
        self.lam, self.gamma, self.T = float(lam), float(gamma), float(T)
        if self.gamma == 0.0:
            self.mag, self.mult = _diagonal_levels(self.sizes)
            self.base = 0.5 * self.lam * self.mag.sum(axis=1) ** 2
            return
        blocks = _blocks(self.sizes)
        # a stoquastic operator connected by the flips has a unique ground
        # state with positive amplitudes, hence totally symmetric: top block
        if self.T == 0.0:
            blocks = blocks[:1]
        self.blocks = [
            (b.multiplicity, b.mag, np.diag(0.5 * self.lam * b.mag.sum(axis=1) ** 2) - self.gamma * b.flip)
            for b in blocks
        ]

    def __call__(self, fields):
        h = np.asarray(fields, dtype=float)
        T = self.T
        if self.gamma == 0.0:
            e = self.base - self.mag @ h
            e0 = e.min()
            if T == 0.0:
                tol = DEGENERACY_RTOL * max(float(e.max() - e0), 1e-300)
                w = self.mult * (e - e0 <= tol)
                return (w @ self.mag) / w.sum() / self.n, float(e0)
            w = self.mult * np.exp(-(e - e0) / T)
            return (w @ self.mag) / w.sum() / self.n, float(e0 - T * np.log(w.sum()))
        spectra = []
        for mult, mag, H0 in self.blocks:
            H = H0.copy()
            H[np.diag_indices_from(H)] -= mag @ h
            w, v = _eigh(H)
            spectra.append((mult, mag, w, v))
        if T == 0.0:
            _, mag, w, v = spectra[0]
            return (v[:, 0] ** 2 @ mag) / self.n, float(w[0])
        e0 = min(w[0] for _, _, w, _ in spectra)
        Z = 0.0
        acc = np.zeros(len(self.sizes))
        for mult, mag, w, v in spectra:
            weight = mult * np.exp(-(w - e0) / T)
            Z += weight.sum()
            acc += ((v**2) @ weight) @ mag
        return acc / Z / self.n, float(e0 - T * np.log(Z))


def class_site_solve(sizes, fields, lam, gamma, T):
    """One-off evaluation of :class:`ClassSiteSolver`."""
    return ClassSiteSolver(sizes, lam, gamma, T)(fields)
