"""scikit-learn style wrappers around the encoders and the mean-field solver.

The encoders are transformers between integer assignments (rows of ``X``)
and spin configurations. ``fit`` takes a :class:`PottsInstance` in place of a
data matrix, since the instance is what the encoding is learned from.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from zerohot._validation import check_assignments_2d, check_spins
from zerohot.encoding import (
    Infeasible,
    decode,
    encode_assignment,
    encode_one_hot,
    encode_zero_hot,
)
from zerohot.exceptions import InputError
from zerohot.meanfield.saddle import MFParams, iterate_saddle
from zerohot.potts import CandidateSolution, PottsInstance


class _IsingEncoder(TransformerMixin, BaseEstimator):
    def _encode(self, instance):
        raise NotImplementedError

    def fit(self, instance, y=None):
        if not isinstance(instance, PottsInstance):
            raise InputError("fit expects a PottsInstance")
        self.model_ = self._encode(instance)
        self.n_spins_ = self.model_.n_spins
        self.n_vars_ = instance.n_vars
        return self

    def transform(self, X):
        """Spin matrix ``(n_samples, n_spins)`` for integer assignments ``X``."""
        check_is_fitted(self, "model_")
        X = check_assignments_2d(X, self.n_vars_, self.model_.q_values)
        return np.array([encode_assignment(self.model_, s) for s in X])

    def inverse_transform(self, S):
        """Decoded assignments; infeasible sites are reported as 0."""
        check_is_fitted(self, "model_")
        S = np.atleast_2d(check_spins(S, self.n_spins_))
        return np.array([decode_partial(self.model_, row) for row in S])

    def feasible(self, S):
        check_is_fitted(self, "model_")
        S = np.atleast_2d(check_spins(S, self.n_spins_))
        return np.array([not isinstance(decode(self.model_, row), Infeasible) for row in S])

    def energy(self, S):
        check_is_fitted(self, "model_")
        return self.model_.energies(np.atleast_2d(check_spins(S, self.n_spins_)))


def decode_partial(model, spins):
    """Per-site decode with 0 at infeasible sites."""
    s = np.asarray(spins)
    out = np.zeros(model.n_vars, dtype=np.int64)
    for i in range(1, model.n_vars + 1):
        qs = model.site_spins(i)
        down = [q for q in qs if s[model.index[(q, i)]] == -1]
        if len(down) == 1:
            out[i - 1] = down[0]
        elif not down and model.anchor is not None:
            out[i - 1] = model.anchor.r[i - 1]
    return out


class OneHotIsingEncoder(_IsingEncoder):
    def __init__(self, penalty=1.0):
        self.penalty = penalty

    def _encode(self, instance):
        return encode_one_hot(instance, self.penalty)


class ZeroHotIsingEncoder(_IsingEncoder):
    """Zero-hot encoder anchored at ``candidate`` (an assignment or CandidateSolution)."""

    def __init__(self, penalty=1.0, candidate=None):
        self.penalty = penalty
        self.candidate = candidate

    def _encode(self, instance):
        if self.candidate is None:
            raise InputError("zero-hot encoding needs a candidate solution")
        cand = self.candidate
        if not isinstance(cand, CandidateSolution):
            cand = CandidateSolution(np.asarray(cand), instance.q_values)
        return encode_zero_hot(instance, cand, self.penalty)


class MeanFieldPotts(BaseEstimator):
    """Saddle-point solution of the mean-field free energy for symmetric fractions.

    There is no data to learn from; ``fit`` solves for the order parameters
    at the configured parameters and stores the result.
    """

    def __init__(
        self,
        q=4,
        rho1=1.0,
        lambda_over_J=1.5,
        gamma_over_J=0.0,
        temperature_over_J=0.0,
        init="ferro",
        damping=0.5,
        tol=1e-10,
        max_iter=100_000,
        symmetric=True,
        seed=0,
    ):
        self.q = q
        self.rho1 = rho1
        self.lambda_over_J = lambda_over_J
        self.gamma_over_J = gamma_over_J
        self.temperature_over_J = temperature_over_J
        self.init = init
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter
        self.symmetric = symmetric
        self.seed = seed

    def fit(self, X=None, y=None):
        p = MFParams.symmetric(
            self.q, self.rho1, self.lambda_over_J, self.gamma_over_J, self.temperature_over_J
        )
        sol = iterate_saddle(p, self.init, self.damping, self.tol, self.max_iter, self.symmetric, self.seed)
        self.params_ = p
        self.solution_ = sol
        self.order_params_ = sol.order
        self.free_energy_ = sol.free_energy
        self.converged_ = sol.converged
        self.m0_ = sol.symmetry.m0
        return self
