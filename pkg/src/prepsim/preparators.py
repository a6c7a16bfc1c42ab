"""Quantum preparators: composite state, triggering event, prepared state, evolution.

A :class:`PreparatorSpec` bundles the composite object-plus-preparator
state, the triggering projector on the preparator factor and the two
evolution operators.  :func:`run_preparation` turns it into the triggering
probability, the prepared object state and the evolved object state.

Two model builders are provided on a discretized 1-D position grid:

* :func:`build_sg`: Stern-Gerlach, spin (factor I) x position (factor II);
* :func:`build_hole`: a particle passing a hole in a screen, particle
  position (factor I) x a two-level screen record (factor II).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collapse import conditional_state, event_probability, reduced_state
from .exceptions import DimensionError, ImpossibleEventError, PrepsimError
from .raio import evolve_prepared_two_routes
from .sampling import random_unitary_matrix, rng_from_seed
from .tensor import (
    DEFAULT_TOLERANCES,
    Operator,
    Tolerances,
    as_operator,
    conjugate,
    identity,
    to_record,
)

DYNAMICAL = "dynamical"
GEOMETRICAL = "geometrical"
KINDS = (DYNAMICAL, GEOMETRICAL)
OCCURRENCES = ("ideal", "general", "fictitious-RAIO", "none")

SG_VARIANTS = {
    # variant: (kind, occurrence)
    "measurement": (DYNAMICAL, "general"),
    "detector-passthrough": (DYNAMICAL, "general"),
    "negative": (DYNAMICAL, "ideal"),
    "geometrical": (GEOMETRICAL, "fictitious-RAIO"),
}
HOLE_VARIANTS = {
    "negative": (DYNAMICAL, "ideal"),
    "geometrical": (GEOMETRICAL, "fictitious-RAIO"),
}

SPIN_UP = np.array([1.0, 0.0], dtype=complex)
SPIN_DOWN = np.array([0.0, 1.0], dtype=complex)

# Screen record basis of the hole model.
NO_MOMENTUM_TRANSFER = 0
MOMENTUM_TRANSFER = 1

AMPLITUDE_FLOOR = 1e-12


@dataclass(frozen=True)
class PreparatorSpec:
    """The four entities of a preparation plus descriptive metadata.

    ``trigger`` is a projector on factor II, or ``None`` for the certain
    event (``occurrence='none'``: nothing happens on the preparator).
    ``t_i`` and ``t_f`` are labels only; dynamics enters through the
    unitaries.
    """

    rho_composite: Operator
    trigger: Operator | None
    U_I: Operator
    U_II: Operator
    kind: str = DYNAMICAL
    occurrence: str = "ideal"
    label: str = ""
    t_i: float = 0.0
    t_f: float = 1.0
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        rho = self.rho_composite
        if rho.kind != "density":
            raise PrepsimError("rho_composite must be a density operator")
        if len(rho.signature) != 2:
            raise DimensionError(f"rho_composite must be bipartite, got dims {list(rho.dims)}")
        d_i, d_ii = rho.dims
        if self.kind not in KINDS:
            raise PrepsimError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.occurrence not in OCCURRENCES:
            raise PrepsimError(f"occurrence must be one of {OCCURRENCES}, got {self.occurrence!r}")
        if self.kind == GEOMETRICAL and self.occurrence != "fictitious-RAIO":
            raise PrepsimError("a geometrical preparator has fictitious (RAIO) occurrence only")
        for name, dim in (("U_I", d_i), ("U_II", d_ii)):
            u = getattr(self, name)
            if u.kind != "unitary":
                raise PrepsimError(f"{name} must be a unitary operator")
            if u.dim != dim:
                raise DimensionError(f"{name} has dimension {u.dim}, factor has {dim}")
        if (self.trigger is None) != (self.occurrence == "none"):
            raise PrepsimError("trigger must be None exactly when occurrence is 'none'")
        if self.trigger is not None:
            if self.trigger.kind != "projector":
                raise PrepsimError("trigger must be a projector")
            if self.trigger.dim != d_ii:
                raise DimensionError(f"trigger has dimension {self.trigger.dim}, factor II has {d_ii}")
            p = event_probability(rho, self.trigger, subsystem=1, tol=self.tol)
            if p <= self.tol.certainty_eps:
                raise ImpossibleEventError(f"triggering event has probability {p:.3e}")

    @property
    def dims(self) -> tuple[int, int]:
        return self.rho_composite.dims

    def to_record(self) -> dict:
        return {
            "model": "custom",
            "label": self.label,
            "kind": self.kind,
            "occurrence": self.occurrence,
            "times": {"t_i": self.t_i, "t_f": self.t_f},
            "rho_composite": to_record(self.rho_composite),
            "trigger": None if self.trigger is None else to_record(self.trigger),
            "unitaries": {"U_I": to_record(self.U_I), "U_II": to_record(self.U_II)},
            "tolerances": self.tol.as_dict(),
        }


@dataclass(frozen=True)
class PreparationResult:
    probability: float
    prepared_state: Operator
    evolved_state: Operator
    two_route_residual: float
    raw_probability: float


def run_preparation(spec: PreparatorSpec, tol=None) -> PreparationResult:
    """Triggering probability, prepared object state and its evolution.

    The prepared state is the conditional state of factor I given the
    trigger; with no trigger it is the reduced state and the probability is
    1.  The evolved state is U_I rho_I U_I^dag, cross-checked against the
    composite-evolution route (``two_route_residual``).
    """
    tol = spec.tol if tol is None else tol
    rho = spec.rho_composite
    if spec.trigger is None:
        trigger = identity([spec.dims[1]])
        prepared = reduced_state(rho, 0, tol)
        prob = raw = 1.0
    else:
        trigger = spec.trigger
        cond = conditional_state(rho, trigger, 1, tol)
        prepared, prob, raw = cond.state, cond.probability, cond.raw_probability
    evolved = conjugate(prepared, spec.U_I)
    residual = evolve_prepared_two_routes(rho, trigger, spec.U_I, spec.U_II, tol).residual
    return PreparationResult(prob, prepared, evolved, residual, raw)


# ------------------------------------------------------------------ the grid


@dataclass(frozen=True)
class GridGeometry:
    """1-D position grid split into an upper and a lower part.

    Sites ``>= split_index`` form the upper half-space (the hole, in the
    hole model).  ``packet_width`` is the standard deviation, in grid units,
    of the Gaussian amplitude profile.  ``packet_centers`` holds the
    centers of the upper (psi+, hole-passing) and lower (psi-,
    screen-hitting) packets.
    """

    n_sites: int = 64
    split_index: int = 32
    packet_width: float = 4.0
    packet_centers: tuple[float, float] = (48.0, 16.0)

    def __post_init__(self):
        object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "split_index", int(self.split_index))
        object.__setattr__(self, "packet_width", float(self.packet_width))
        centers = tuple(float(c) for c in self.packet_centers)
        object.__setattr__(self, "packet_centers", centers)
        if self.n_sites < 2:
            raise PrepsimError(f"n_sites must be >= 2, got {self.n_sites}")
        if not 0 < self.split_index < self.n_sites:
            raise PrepsimError(
                f"split_index must satisfy 0 < split_index < n_sites, got {self.split_index}"
            )
        if not self.packet_width > 0:
            raise PrepsimError(f"packet_width must be positive, got {self.packet_width}")
        if len(centers) != 2:
            raise PrepsimError("packet_centers must hold exactly two values")

    @property
    def upper_mask(self) -> np.ndarray:
        return np.arange(self.n_sites) >= self.split_index

    def as_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "split_index": self.split_index,
            "packet_width": self.packet_width,
            "packet_centers": list(self.packet_centers),
        }

    @classmethod
    def random(cls, seed, n_range=(16, 96)) -> "GridGeometry":
        """Seeded geometry with both packets well inside their halves."""
        rng = rng_from_seed(seed)
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        split = int(rng.integers(n // 4, 3 * n // 4 + 1))
        width = float(rng.uniform(0.5, 3.0))
        upper = float(rng.uniform(split, n - 1))
        lower = float(rng.uniform(0, split - 1))
        return cls(n, split, width, (upper, lower))


def gaussian_packet(geom: GridGeometry, center: float, side: str | None = None) -> np.ndarray:
    """Normalized Gaussian amplitudes on the grid.

    With ``side`` ('upper' or 'lower') the packet is truncated to that
    half-space.  Amplitudes below ``AMPLITUDE_FLOOR`` times the peak are
    set to zero before renormalizing, so supports are exactly disjoint.
    """
    x = np.arange(geom.n_sites, dtype=float)
    amp = np.exp(-((x - center) ** 2) / (2.0 * geom.packet_width**2)).astype(complex)
    if side is not None:
        amp[~_side_mask(geom, side)] = 0.0
    peak = np.max(np.abs(amp))
    if peak == 0.0:
        raise PrepsimError(f"packet centred at {center} has no support on the {side} side")
    amp[np.abs(amp) < AMPLITUDE_FLOOR * peak] = 0.0
    return amp / np.linalg.norm(amp)


def _side_mask(geom: GridGeometry, side: str) -> np.ndarray:
    if side == "upper":
        return geom.upper_mask
    if side == "lower":
        return ~geom.upper_mask
    raise PrepsimError(f"side must be 'upper' or 'lower', got {side!r}")


def make_half_space_projector(geom: GridGeometry, side: str = "upper") -> Operator:
    """Diagonal 0/1 projector onto one half of the grid.

    The lower projector is computed as the complement of the upper one.
    """
    upper = np.diag(geom.upper_mask.astype(float))
    if side == "upper":
        m = upper
    elif side == "lower":
        m = np.eye(geom.n_sites) - upper
    else:
        raise PrepsimError(f"side must be 'upper' or 'lower', got {side!r}")
    return Operator(m, [geom.n_sites], "projector")


def passthrough_unitary(geom: GridGeometry, seed) -> Operator:
    """Seeded unitary acting on the upper half-space only (identity below).

    Models a detector that registers the particle on the upper branch and
    lets it continue, psi+ -> psi_out, without touching the spin.
    """
    mask = geom.upper_mask
    m = np.eye(geom.n_sites, dtype=complex)
    idx = np.flatnonzero(mask)
    m[np.ix_(idx, idx)] = random_unitary_matrix(idx.size, rng_from_seed(seed))
    return Operator(m, [geom.n_sites], "unitary")


def _unitary_or_identity(u, dim: int, name: str) -> Operator:
    if u is None:
        return identity([dim]).with_kind("unitary")
    u = as_operator(u)
    if u.kind != "unitary":
        u = u.with_kind("unitary")
    if u.dim != dim:
        raise DimensionError(f"{name} has dimension {u.dim}, expected {dim}")
    return Operator(u.matrix, [dim], "unitary", u.eps)


def build_sg(alpha, beta, geom: GridGeometry | None = None, variant: str = "negative",
             U_I=None, U_II=None, seed=0, tol=None, label=None) -> PreparatorSpec:
    """Stern-Gerlach preparator: spin (factor I) x grid position (factor II).

    The composite state is alpha |+z>|psi+> + beta |-z>|psi->, with psi+
    and psi- Gaussian packets confined to the upper and lower halves of the
    grid.  The trigger is the upper half-space projector.  For
    ``detector-passthrough`` a seeded upper-half unitary (``seed``) is
    applied before ``U_II``.
    """
    tol = DEFAULT_TOLERANCES if tol is None else tol
    geom = GridGeometry() if geom is None else geom
    if variant not in SG_VARIANTS:
        raise PrepsimError(f"unknown Stern-Gerlach variant {variant!r}; expected one of {list(SG_VARIANTS)}")
    alpha, beta = complex(alpha), complex(beta)
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > tol.validation_eps:
        raise PrepsimError(f"amplitudes must satisfy |alpha|^2 + |beta|^2 = 1, got {norm!r}")
    psi_plus = gaussian_packet(geom, geom.packet_centers[0], "upper")
    psi_minus = gaussian_packet(geom, geom.packet_centers[1], "lower")
    phi = alpha * np.kron(SPIN_UP, psi_plus) + beta * np.kron(SPIN_DOWN, psi_minus)
    phi /= np.linalg.norm(phi)
    sig = [2, geom.n_sites]
    rho = Operator(np.outer(phi, phi.conj()), sig, "density", tol.validation_eps)

    u_i = _unitary_or_identity(U_I, 2, "U_I")
    u_ii = _unitary_or_identity(U_II, geom.n_sites, "U_II")
    if variant == "detector-passthrough":
        u_ii = Operator(u_ii.matrix @ passthrough_unitary(geom, seed).matrix, [geom.n_sites], "unitary")
    kind, occurrence = SG_VARIANTS[variant]
    return PreparatorSpec(
        rho_composite=rho,
        trigger=make_half_space_projector(geom, "upper"),
        U_I=u_i,
        U_II=u_ii,
        kind=kind,
        occurrence=occurrence,
        label=label or f"sg-{variant}",
        tol=tol,
    )


def default_hole_packet(geom: GridGeometry) -> np.ndarray:
    """Equal superposition of a hole-passing and a screen-hitting packet."""
    psi = gaussian_packet(geom, geom.packet_centers[0]) + gaussian_packet(geom, geom.packet_centers[1])
    return psi / np.linalg.norm(psi)


def build_hole(psi_in=None, geom: GridGeometry | None = None, variant: str = "negative",
               U_I=None, U_II=None, tol=None, label=None) -> PreparatorSpec:
    """Hole-in-the-screen preparator: particle (factor I) x screen record (II).

    The record is two-dimensional: no momentum transfer (index 0) or
    momentum transfer (index 1).  The part of ``psi_in`` on the hole sites
    is correlated with no transfer, the rest with transfer:
    |Phi> = (H psi_in)|0> + ((I - H) psi_in)|1>.  The trigger is the
    complement of the transfer projector.
    """
    tol = DEFAULT_TOLERANCES if tol is None else tol
    geom = GridGeometry() if geom is None else geom
    if variant not in HOLE_VARIANTS:
        raise PrepsimError(f"unknown hole variant {variant!r}; expected one of {list(HOLE_VARIANTS)}")
    psi = default_hole_packet(geom) if psi_in is None else np.asarray(psi_in, dtype=complex).reshape(-1)
    if psi.size != geom.n_sites:
        raise DimensionError(f"psi_in has {psi.size} entries, grid has {geom.n_sites} sites")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol.validation_eps:
        raise PrepsimError(f"psi_in must be normalized, got norm {norm!r}")
    hole = geom.upper_mask
    through = np.where(hole, psi, 0.0)
    hit = np.where(hole, 0.0, psi)
    if np.linalg.norm(through) ** 2 <= tol.certainty_eps:
        raise ImpossibleEventError("psi_in has no amplitude on the hole")
    record = np.eye(2)
    phi = np.kron(through, record[NO_MOMENTUM_TRANSFER]) + np.kron(hit, record[MOMENTUM_TRANSFER])
    sig = [geom.n_sites, 2]
    rho = Operator(np.outer(phi, phi.conj()), sig, "density", tol.validation_eps)
    q_rs = np.diag(record[MOMENTUM_TRANSFER])
    q_h = Operator(np.eye(2) - q_rs, [2], "projector")
    kind, occurrence = HOLE_VARIANTS[variant]
    return PreparatorSpec(
        rho_composite=rho,
        trigger=q_h,
        U_I=_unitary_or_identity(U_I, geom.n_sites, "U_I"),
        U_II=_unitary_or_identity(U_II, 2, "U_II"),
        kind=kind,
        occurrence=occurrence,
        label=label or f"hole-{variant}",
        tol=tol,
    )


def hole_projector(geom: GridGeometry) -> Operator:
    """Projector onto the hole sites of the particle factor."""
    return make_half_space_projector(geom, "upper")


def certain_event_spec(spec: PreparatorSpec) -> PreparatorSpec:
    """Copy of ``spec`` in which nothing occurs on the preparator."""
    return PreparatorSpec(
        spec.rho_composite, None, spec.U_I, spec.U_II, DYNAMICAL, "none",
        spec.label + "-unconditioned", spec.t_i, spec.t_f, spec.tol,
    )


__all__ = [
    "GEOMETRICAL",
    "DYNAMICAL",
    "GridGeometry",
    "HOLE_VARIANTS",
    "PreparationResult",
    "PreparatorSpec",
    "SG_VARIANTS",
    "SPIN_UP",
    "SPIN_DOWN",
    "build_hole",
    "build_sg",
    "certain_event_spec",
    "default_hole_packet",
    "gaussian_packet",
    "hole_projector",
    "make_half_space_projector",
    "passthrough_unitary",
    "run_preparation",
]
