"""Retroactive apparent ideal occurrence (RAIO) and evolution after preparation.

The functions here check numerically that

* an event F contained in a localization event P_R factorizes as
  tr(F rho) = tr(P_R rho) tr(F rho'), rho' the Lüders-collapsed state;
* under the three RAIO conditions, collapsing on P after the evolution U
  gives the same state as collapsing on Q before it;
* for factorized evolution U_I x U_II the object state after preparation
  evolves by U_I alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .collapse import _as_density, _as_projector, _tol, luders_collapse
from .exceptions import DimensionError, ImpossibleEventError, ImplicationError
from .sampling import (
    random_density,
    random_projector,
    random_unitary,
    random_unitary_matrix,
    rng_from_seed,
)
from .tensor import (
    Operator,
    as_operator,
    complement,
    conjugate,
    embed,
    expectation,
    operator_distance,
    partial_trace,
    tensor_product,
    trace_distance,
)

VERIFIED = "verified"
CONDITIONS_VIOLATED = "conditions-violated"
EQUALITY_VIOLATED = "equality-violated"


def _prob(rho: Operator, f: Operator) -> float:
    return float(np.real(expectation(rho, f)))


# ---------------------------------------------------------------- the lemma


def check_localization_lemma(f, p_r, rho, tol=None) -> float:
    """Residual |tr(F rho) - tr(P_R rho) tr(F rho')| for F <= P_R.

    Raises
    ------
    ImplicationError
        If F P_R differs from F by more than ``tol.identity_eps`` (max entry).
    ImpossibleEventError
        If the localization probability tr(P_R rho) is not positive.
    """
    tol = _tol(tol)
    rho = _as_density(rho, tol)
    f = _as_projector(f, tol)
    p_r = _as_projector(p_r, tol)
    gap = operator_distance(Operator(f.matrix @ p_r.matrix, f.signature), f).max_entry
    if gap > tol.identity_eps:
        raise ImplicationError(f"F is not contained in P(R): max |F P - F| = {gap:.3e}")
    collapsed = luders_collapse(rho, p_r, tol=tol)
    lhs = _prob(rho, f)
    rhs = collapsed.raw_probability * _prob(collapsed.state, f)
    return abs(lhs - rhs)


# -------------------------------------------------------------- the theorem


@dataclass(frozen=True)
class RaioInstance:
    """Initial state, triggering event Q, final event P and evolution U."""

    rho_initial: Operator
    Q: Operator
    P: Operator
    U: Operator

    def __post_init__(self):
        sig = self.rho_initial.signature
        for name in ("Q", "P", "U"):
            if getattr(self, name).signature != sig:
                raise DimensionError(
                    f"{name} acts on {list(getattr(self, name).dims)}, state on {list(sig.dims)}"
                )
        for name, kind in (("rho_initial", "density"), ("Q", "projector"),
                           ("P", "projector"), ("U", "unitary")):
            if getattr(self, name).kind != kind:
                raise DimensionError(f"{name} must be tagged {kind!r}, got {getattr(self, name).kind!r}")

    @property
    def rho_final(self) -> Operator:
        return conjugate(self.rho_initial, self.U)

    def conjugated(self, w: Operator) -> "RaioInstance":
        """The same instance expressed in the basis rotated by ``w``."""
        return RaioInstance(
            conjugate(self.rho_initial, w), conjugate(self.Q, w),
            conjugate(self.P, w), conjugate(self.U, w),
        )


@dataclass(frozen=True)
class RaioReport:
    """Verdicts of the three conditions and the residual of the equality.

    Each margin is positive (ii, iii: non-negative) exactly when its
    condition holds.  ``equality_residual`` is the trace-norm distance
    between the two sides, or ``nan`` when it was not evaluated.
    """

    p_Q: float
    cond_i_ok: bool
    cond_ii_ok: bool
    cond_iii_ok: bool
    margins: tuple[float, float, float]
    equality_residual: float = float("nan")
    verdict: str = CONDITIONS_VIOLATED

    @property
    def conditions_ok(self) -> bool:
        return self.cond_i_ok and self.cond_ii_ok and self.cond_iii_ok

    def to_record(self) -> dict:
        return {
            "p_Q": self.p_Q,
            "cond_i": self.cond_i_ok,
            "cond_ii": self.cond_ii_ok,
            "cond_iii": self.cond_iii_ok,
            "margins": list(self.margins),
            "residual": self.equality_residual,
            "verdict": self.verdict,
        }

    @classmethod
    def from_record(cls, record: dict) -> "RaioReport":
        return cls(
            float(record["p_Q"]), bool(record["cond_i"]), bool(record["cond_ii"]),
            bool(record["cond_iii"]), tuple(float(m) for m in record["margins"]),
            float(record["residual"]), str(record["verdict"]),
        )


def _certainty_after(rho, event, target, u, tol) -> float:
    """tr(target U L_event(rho) U^dag), or 0 when ``event`` is impossible."""
    try:
        collapsed = luders_collapse(rho, event, tol=tol).state
    except ImpossibleEventError:
        return 0.0
    return _prob(conjugate(collapsed, u), target)


def check_raio_conditions(inst: RaioInstance, tol=None) -> RaioReport:
    """Evaluate conditions (i)-(iii); the equality itself is not computed.

    (i)   certainty_eps < tr(Q rho) < 1 - certainty_eps
    (ii)  tr(P U L_Q(rho) U^dag) >= 1 - certainty_eps
    (iii) tr(P' U L_Q'(rho) U^dag) >= 1 - certainty_eps, primes = complements
    """
    tol = _tol(tol)
    eps = tol.certainty_eps
    rho, q, p, u = inst.rho_initial, inst.Q, inst.P, inst.U
    p_q = _prob(rho, q)
    margin_i = min(p_q, 1.0 - p_q) - eps
    margin_ii = _certainty_after(rho, q, p, u, tol) - (1.0 - eps)
    margin_iii = _certainty_after(rho, complement(q), complement(p), u, tol) - (1.0 - eps)
    return RaioReport(
        p_Q=p_q,
        cond_i_ok=margin_i > 0.0,
        cond_ii_ok=margin_ii >= 0.0,
        cond_iii_ok=margin_iii >= 0.0,
        margins=(margin_i, margin_ii, margin_iii),
    )


def raio_sides(inst: RaioInstance, tol=None) -> tuple[Operator, Operator]:
    """(L_P(U rho U^dag), U L_Q(rho) U^dag)."""
    tol = _tol(tol)
    lhs = luders_collapse(inst.rho_final, inst.P, tol=tol).state
    rhs = conjugate(luders_collapse(inst.rho_initial, inst.Q, tol=tol).state, inst.U)
    return lhs, rhs


def check_raio_equality(inst: RaioInstance, tol=None) -> RaioReport:
    """Conditions plus the trace-norm residual of the RAIO equality.

    The residual is evaluated whenever both collapses are defined, so that
    condition-violating instances still report how far the equality is
    off; the verdict is ``conditions-violated`` for them regardless.
    """
    tol = _tol(tol)
    report = check_raio_conditions(inst, tol)
    try:
        lhs, rhs = raio_sides(inst, tol)
    except ImpossibleEventError:
        if report.conditions_ok:
            raise
        return report
    residual = trace_distance(lhs, rhs)
    if not report.conditions_ok:
        verdict = CONDITIONS_VIOLATED
    elif residual <= tol.identity_eps:
        verdict = VERIFIED
    else:
        verdict = EQUALITY_VIOLATED
    return RaioReport(
        report.p_Q, report.cond_i_ok, report.cond_ii_ok, report.cond_iii_ok,
        report.margins, residual, verdict,
    )


# ---------------------------------------------------------------- builders


def build_twin_instance(alpha, beta, d_ii: int, region_size: int, seed=0, tol=None) -> RaioInstance:
    """Bipartite spin x grid instance that satisfies conditions (i)-(iii).

    The state is alpha |0>|phi+> + beta |1>|phi->.  Q acts on factor II and
    projects onto a ``region_size``-dimensional subspace that contains phi+
    and is orthogonal to phi-.  U = U_I x U_II where U_II carries range(Q)
    onto the first ``region_size`` coordinate vectors (region R) and its
    complement onto the rest; P is the projector onto R on factor II.
    """
    tol = _tol(tol)
    alpha, beta = complex(alpha), complex(beta)
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > tol.validation_eps:
        raise ValueError(f"|alpha|^2 + |beta|^2 must be 1, got {norm!r}")
    a2 = abs(alpha) ** 2
    if a2 <= tol.certainty_eps or a2 >= 1.0 - tol.certainty_eps:
        raise ValueError(f"|alpha|^2 = {a2!r} makes the triggering event certain or impossible")
    d_ii, region_size = int(d_ii), int(region_size)
    if not 0 < region_size < d_ii:
        raise ValueError(f"need 0 < region_size < d_ii, got {region_size} and {d_ii}")

    rng = rng_from_seed(seed)
    frame = random_unitary_matrix(d_ii, rng)
    phi_plus, phi_minus = frame[:, 0], frame[:, -1]
    inside, outside = frame[:, :region_size], frame[:, region_size:]

    spin = np.eye(2)
    psi = alpha * np.kron(spin[0], phi_plus) + beta * np.kron(spin[1], phi_minus)
    psi /= np.linalg.norm(psi)
    sig = [2, d_ii]
    rho = Operator(np.outer(psi, psi.conj()), sig, "density")

    q_ii = Operator(inside @ inside.conj().T, [d_ii], "projector", tol.validation_eps)
    block = np.zeros((d_ii, d_ii), dtype=complex)
    block[:region_size, :region_size] = random_unitary_matrix(region_size, rng)
    block[region_size:, region_size:] = random_unitary_matrix(d_ii - region_size, rng)
    u_ii = Operator(block @ np.hstack([inside, outside]).conj().T, [d_ii], "unitary")
    u_i = random_unitary([2], rng)
    r_ii = Operator(np.diag([1.0] * region_size + [0.0] * (d_ii - region_size)), [d_ii], "projector")

    return RaioInstance(
        rho_initial=rho,
        Q=embed(q_ii, sig, 1),
        P=embed(r_ii, sig, 1),
        U=tensor_product(u_i, u_ii),
    )


def random_instance(signature=(2, 4), seed=0) -> RaioInstance:
    """Instance with rho, Q, P and U all drawn independently."""
    rng = rng_from_seed(seed)
    return RaioInstance(
        rho_initial=random_density(signature, rng),
        Q=random_projector(signature, rng),
        P=random_projector(signature, rng),
        U=random_unitary(signature, rng),
    )


# ------------------------------------------------- evolution after preparation


class TwoRouteResult(NamedTuple):
    route_a: Operator
    route_b: Operator
    residual: float


def prepared_state(rho, q, tol=None) -> Operator:
    """tr_II(Q rho Q) / tr(Q rho) for Q on factor II of a bipartite state."""
    tol = _tol(tol)
    rho = _as_density(rho, tol)
    q_full = embed(_as_projector(q, tol), rho.signature, 1).matrix
    p = float(np.real(np.trace(q_full @ rho.matrix)))
    if p <= tol.certainty_eps:
        raise ImpossibleEventError(f"triggering event has probability {p:.3e}")
    m = partial_trace(Operator(q_full @ rho.matrix @ q_full, rho.signature), [0]).matrix / p
    return Operator((m + m.conj().T) / 2, [rho.dims[0]], "density", tol.validation_eps)


def evolve_prepared_two_routes(rho, q, u_i, u_ii, tol=None) -> TwoRouteResult:
    """Object state at t_f computed two ways.

    Route a evolves the collapsed composite state with U_I x U_II and then
    traces out factor II.  Route b evolves the prepared object state with
    U_I only.  ``residual`` is their trace-norm distance.
    """
    tol = _tol(tol)
    rho = _as_density(rho, tol)
    if len(rho.signature) != 2:
        raise DimensionError("evolution after preparation needs a bipartite state")
    u_i, u_ii = as_operator(u_i), as_operator(u_ii)
    u = tensor_product(u_i, u_ii)
    u = Operator(u.matrix, rho.signature, "unitary", u.eps)
    collapsed = luders_collapse(rho, q, subsystem=1, tol=tol).state
    evolved = conjugate(collapsed, u)
    a = partial_trace(evolved, [0]).matrix
    route_a = Operator((a + a.conj().T) / 2, [rho.dims[0]], "density", tol.validation_eps)
    route_b = conjugate(prepared_state(rho, q, tol), Operator(u_i.matrix, [rho.dims[0]], "unitary"))
    return TwoRouteResult(route_a, route_b, trace_distance(route_a, route_b))


def instance_from_preparation(rho, q_ii, u_i, u_ii) -> RaioInstance:
    """RAIO instance of a preparator: Q embedded on II, P = U Q U^dag.

    P is the region the triggering branch is carried into by the
    factorized evolution, which makes conditions (ii) and (iii) hold by
    construction whenever (i) does.
    """
    rho = as_operator(rho)
    sig = rho.signature
    q = embed(q_ii, sig, 1)
    u = tensor_product(u_i, u_ii)
    u = Operator(u.matrix, sig, "unitary", u.eps)
    return RaioInstance(rho, q, conjugate(q, u), u)


__all__ = [
    "CONDITIONS_VIOLATED",
    "EQUALITY_VIOLATED",
    "VERIFIED",
    "RaioInstance",
    "RaioReport",
    "TwoRouteResult",
    "build_twin_instance",
    "check_localization_lemma",
    "check_raio_conditions",
    "check_raio_equality",
    "evolve_prepared_two_routes",
    "instance_from_preparation",
    "prepared_state",
    "raio_sides",
    "random_instance",
]
