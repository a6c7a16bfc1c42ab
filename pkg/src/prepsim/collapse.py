"""Event probabilities, the selective Lüders update and conditional states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, ImpossibleEventError
from .tensor import (
    DEFAULT_TOLERANCES,
    Operator,
    Tolerances,
    as_operator,
    embed,
    expectation,
    partial_trace,
    tensor_product,
)
from .validation import check_probability


@dataclass(frozen=True)
class ConditionalStateResult:
    """Outcome of conditioning a state on an event.

    ``probability`` is clamped into [0, 1]; ``raw_probability`` keeps the
    value exactly as computed so drift can be detected.
    """

    probability: float
    state: Operator
    raw_probability: float


def _tol(tol) -> Tolerances:
    return DEFAULT_TOLERANCES if tol is None else tol


def _as_density(rho, tol: Tolerances) -> Operator:
    rho = as_operator(rho)
    if rho.kind != "density":
        rho = rho.with_kind("density", tol.validation_eps)
    return rho


def _as_projector(f, tol: Tolerances) -> Operator:
    f = as_operator(f)
    if f.kind != "projector":
        f = f.with_kind("projector", tol.validation_eps)
    return f


def _lift(f: Operator, rho: Operator, subsystem) -> Operator:
    if subsystem is None:
        if f.signature != rho.signature:
            if f.dim == rho.dim:
                return Operator(f.matrix, rho.signature, f.kind, f.eps)
            raise DimensionError(
                f"event on {list(f.dims)} does not match state on {list(rho.dims)}"
            )
        return f
    return embed(f, rho.signature, subsystem)


def _hermitize(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def event_probability(rho, f, subsystem=None, tol=None, full_output=False):
    """Probability tr(rho F) of the event ``f`` in the state ``rho``.

    Parameters
    ----------
    rho : Operator
        Density operator.
    f : Operator
        Projector, either on the full space or, with ``subsystem`` given,
        on that single factor (it is embedded first).
    subsystem : int, optional
        Factor on which ``f`` acts.
    tol : Tolerances, optional
    full_output : bool
        Also return the unclamped value.

    Returns
    -------
    float, or (float, float) when ``full_output`` is set
        The probability clamped into [0, 1] (and the raw value).
    """
    tol = _tol(tol)
    rho = _as_density(rho, tol)
    f = _lift(_as_projector(f, tol), rho, subsystem)
    raw = float(np.real(expectation(rho, f)))
    clamped = check_probability(raw, tol.validation_eps, "event probability")
    return (clamped, raw) if full_output else clamped


def luders_collapse(rho, f, subsystem=None, tol=None) -> ConditionalStateResult:
    """Selective Lüders update rho -> F rho F / tr(rho F).

    Raises
    ------
    ImpossibleEventError
        If tr(rho F) <= ``tol.certainty_eps``.
    """
    tol = _tol(tol)
    rho = _as_density(rho, tol)
    f = _lift(_as_projector(f, tol), rho, subsystem)
    prob, raw = event_probability(rho, f, tol=tol, full_output=True)
    if raw <= tol.certainty_eps:
        raise ImpossibleEventError(f"event has probability {raw:.3e}; cannot condition on it")
    fm = f.matrix
    state = _hermitize(fm @ rho.matrix @ fm) / raw
    return ConditionalStateResult(
        prob, Operator(state, rho.signature, "density", tol.validation_eps), raw
    )


def conditional_state(rho, q, subsystem=1, tol=None) -> ConditionalStateResult:
    """State of the remaining factors after ``q`` occurred on ``subsystem``.

    Computes tr_q(rho Q) / tr(rho Q) with Q embedded on ``subsystem`` and the
    partial trace taken over that same factor.  Mixed composite states are
    accepted.  The occurrence need not be ideal.
    """
    tol = _tol(tol)
    rho = _as_density(rho, tol)
    if len(rho.signature) < 2:
        raise DimensionError("conditional_state needs a composite state (>= 2 factors)")
    n = len(rho.signature)
    subsystem %= n
    q_full = embed(_as_projector(q, tol), rho.signature, subsystem)
    prob, raw = event_probability(rho, q_full, tol=tol, full_output=True)
    if raw <= tol.certainty_eps:
        raise ImpossibleEventError(f"condition has probability {raw:.3e}; cannot condition on it")
    keep = [i for i in range(n) if i != subsystem]
    reduced = partial_trace(Operator(rho.matrix @ q_full.matrix, rho.signature), keep)
    state = _hermitize(reduced.matrix) / raw
    return ConditionalStateResult(
        prob, Operator(state, reduced.signature, "density", tol.validation_eps), raw
    )


def reduced_state(rho, keep=0, tol=None) -> Operator:
    """Reduced density operator, the conditional state for the certain event."""
    tol = _tol(tol)
    rho = _as_density(rho, tol)
    m = partial_trace(rho, keep)
    return Operator(_hermitize(m.matrix), m.signature, "density", tol.validation_eps)


def verify_coincidence_factorization(rho, p, q, tol=None) -> float:
    """|tr(rho (P x Q)) - tr(rho Q) tr(rho_bar P)| for a bipartite state.

    ``p`` acts on factor 0 and ``q`` on factor 1; ``rho_bar`` is the
    conditional state of factor 0 given ``q``.
    """
    tol = _tol(tol)
    rho = _as_density(rho, tol)
    if len(rho.signature) != 2:
        raise DimensionError("coincidence factorization is defined for bipartite states")
    p = _as_projector(p, tol)
    q = _as_projector(q, tol)
    cond = conditional_state(rho, q, 1, tol)
    pq = tensor_product(p, q)
    lhs = float(np.real(expectation(rho, Operator(pq.matrix, rho.signature))))
    rhs = cond.raw_probability * float(np.real(expectation(cond.state, p)))
    return abs(lhs - rhs)
