"""scikit-learn style wrappers around the preparation machinery.

The "data" each estimator sees is a quantum state: ``fit`` takes a density
operator (an :class:`~prepsim.tensor.Operator` or a square array together
with ``dims``), stores results in trailing-underscore attributes and
returns ``self``.  Hyper-parameters are the events and unitaries, so
``get_params``/``set_params``/``clone`` work as for any estimator.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .collapse import conditional_state, luders_collapse, reduced_state
from .raio import RaioInstance, VERIFIED, check_raio_equality, evolve_prepared_two_routes
from .tensor import DEFAULT_TOLERANCES, Operator, as_operator, conjugate, identity


def _state(X, dims, tol) -> Operator:
    if isinstance(X, Operator):
        return X if X.kind == "density" else X.with_kind("density", tol.validation_eps)
    return Operator(np.asarray(X), dims, "density", tol.validation_eps)


def _event(f, dims, kind):
    if f is None or isinstance(f, Operator):
        return f
    return as_operator(np.asarray(f), dims, kind)


class LudersCollapse(TransformerMixin, BaseEstimator):
    """Selective Lüders update by a fixed projector.

    Parameters
    ----------
    event : Operator or array
        Projector on the full space, or on factor ``subsystem``.
    subsystem : int, optional
        Factor the event acts on; ``None`` means the whole space.
    dims : sequence of int, optional
        Subsystem dimensions used when states are passed as plain arrays.
    tol : Tolerances, optional
    """

    def __init__(self, event=None, subsystem=None, dims=None, tol=None):
        self.event = event
        self.subsystem = subsystem
        self.dims = dims
        self.tol = tol

    def fit(self, X, y=None):
        tol = self.tol or DEFAULT_TOLERANCES
        result = luders_collapse(_state(X, self.dims, tol), _event(self.event, None, "projector"),
                                 self.subsystem, tol)
        self.probability_ = result.probability
        self.state_ = result.state
        return self

    def transform(self, X):
        tol = self.tol or DEFAULT_TOLERANCES
        event = _event(self.event, None, "projector")
        return luders_collapse(_state(X, self.dims, tol), event, self.subsystem, tol).state.matrix


class Preparator(TransformerMixin, BaseEstimator):
    """Prepared and evolved object state of a bipartite composite state.

    ``fit`` computes the triggering probability, the conditional prepared
    state of factor I and its evolution under ``U_I``; ``transform``
    returns the evolved object state for a given composite state.
    ``trigger=None`` is the certain event (reduced state).
    """

    def __init__(self, trigger=None, U_I=None, U_II=None, dims=None, tol=None):
        self.trigger = trigger
        self.U_I = U_I
        self.U_II = U_II
        self.dims = dims
        self.tol = tol

    def _parts(self, X):
        tol = self.tol or DEFAULT_TOLERANCES
        rho = _state(X, self.dims, tol)
        d_i, d_ii = rho.dims
        u_i = _event(self.U_I, [d_i], "unitary") or identity([d_i]).with_kind("unitary")
        u_ii = _event(self.U_II, [d_ii], "unitary") or identity([d_ii]).with_kind("unitary")
        trigger = _event(self.trigger, [d_ii], "projector")
        return tol, rho, trigger, u_i, u_ii

    def _prepare(self, tol, rho, trigger):
        if trigger is None:
            return 1.0, reduced_state(rho, 0, tol)
        cond = conditional_state(rho, trigger, 1, tol)
        return cond.probability, cond.state

    def fit(self, X, y=None):
        tol, rho, trigger, u_i, u_ii = self._parts(X)
        self.probability_, self.prepared_state_ = self._prepare(tol, rho, trigger)
        self.evolved_state_ = conjugate(self.prepared_state_, u_i)
        q = trigger if trigger is not None else identity([rho.dims[1]])
        self.two_route_residual_ = evolve_prepared_two_routes(rho, q, u_i, u_ii, tol).residual
        return self

    def transform(self, X):
        tol, rho, trigger, u_i, _ = self._parts(X)
        return conjugate(self._prepare(tol, rho, trigger)[1], u_i).matrix

    def predict_proba(self, X):
        """Probability of the triggering event in each given composite state."""
        tol, rho, trigger, _, _ = self._parts(X)
        return self._prepare(tol, rho, trigger)[0]


class RaioVerifier(BaseEstimator):
    """Checks the RAIO equality for fixed Q, P and U on a given initial state."""

    def __init__(self, Q=None, P=None, U=None, tol=None):
        self.Q = Q
        self.P = P
        self.U = U
        self.tol = tol

    def _instance(self, X) -> RaioInstance:
        tol = self.tol or DEFAULT_TOLERANCES
        rho = _state(X, None, tol)
        sig = rho.signature
        q = _event(self.Q, sig, "projector")
        p = _event(self.P, sig, "projector")
        u = _event(self.U, sig, "unitary")
        return RaioInstance(rho, q, p, u)

    def fit(self, X, y=None):
        self.report_ = check_raio_equality(self._instance(X), self.tol)
        return self

    def predict(self, X):
        """Verdict string for the initial state ``X``."""
        return check_raio_equality(self._instance(X), self.tol).verdict

    def score(self, X, y=None):
        """1.0 when the equality is verified for ``X``, else 0.0."""
        return float(self.predict(X) == VERIFIED)

    @property
    def residual_(self):
        check_is_fitted(self, "report_")
        return self.report_.equality_residual
