"""Seeded random operators.

All randomness flows through :func:`rng_from_seed`, a counter-based Philox
generator keyed by an unsigned 64-bit integer.  Per-trial generators are
keyed ``root_seed + trial_index`` so any trial can be replayed alone.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .tensor import Operator, as_signature

_U64 = 2**64


def rng_from_seed(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(key=int(seed) % _U64))


def trial_seed(root_seed: int, trial_index: int) -> int:
    return (int(root_seed) + int(trial_index)) % _U64


def _sig(signature):
    return as_signature(signature)


def random_unitary_matrix(dim: int, rng) -> np.ndarray:
    rng = rng_from_seed(rng)
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(dim, random_state=rng)


def random_unitary(signature, rng) -> Operator:
    """Haar-random unitary on the whole space."""
    sig = _sig(signature)
    return Operator(random_unitary_matrix(sig.total, rng), sig, "unitary")


def random_vector(dim: int, rng) -> np.ndarray:
    """Uniformly distributed unit vector in C^dim."""
    rng = rng_from_seed(rng)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_pure_state(signature, rng) -> Operator:
    sig = _sig(signature)
    v = random_vector(sig.total, rng)
    return Operator(np.outer(v, v.conj()), sig, "density")


def random_density(signature, rng, rank=None) -> Operator:
    """Mixed state from a Ginibre matrix, G G^dag / tr(G G^dag).

    ``rank`` defaults to full rank.
    """
    rng = rng_from_seed(rng)
    sig = _sig(signature)
    d = sig.total
    rank = d if rank is None else int(rank)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return Operator(m / np.trace(m).real, sig, "density")


def random_projector(signature, rng, rank=None) -> Operator:
    """Projector onto a Haar-random subspace.

    ``rank`` defaults to a uniform draw from 1..d-1 (from 1 when d == 1).
    """
    rng = rng_from_seed(rng)
    sig = _sig(signature)
    d = sig.total
    if rank is None:
        rank = int(rng.integers(1, d)) if d > 1 else 1
    if not 0 <= rank <= d:
        raise ValueError(f"rank {rank} out of range for dimension {d}")
    u = random_unitary_matrix(d, rng)[:, :rank]
    m = u @ u.conj().T
    return Operator((m + m.conj().T) / 2, sig, "projector")


def random_subprojector(p: Operator, rng, rank=None) -> Operator:
    """Random projector F with F <= P, i.e. range(F) inside range(P).

    An orthonormal basis of range(P) comes from the eigendecomposition of P
    and is rotated by a Haar unitary of that subspace; F projects onto the
    first ``rank`` rotated vectors.  ``rank`` defaults to a uniform draw
    from 0..rank(P).
    """
    rng = rng_from_seed(rng)
    w, v = np.linalg.eigh(p.matrix)
    basis = v[:, w > 0.5]
    p_rank = basis.shape[1]
    if rank is None:
        rank = int(rng.integers(0, p_rank + 1))
    if not 0 <= rank <= p_rank:
        raise ValueError(f"sub-projector rank {rank} exceeds rank(P) = {p_rank}")
    if p_rank:
        basis = basis @ random_unitary_matrix(p_rank, rng)
    basis = basis[:, :rank]
    m = basis @ basis.conj().T
    return Operator((m + m.conj().T) / 2, p.signature, "projector")
