"""Dense complex operators on finite tensor-product spaces.

Composite bases are ordered row-major: the first subsystem is the slowest
varying index, which is the convention of :func:`numpy.kron`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .exceptions import DimensionError, OperatorValidationError
from .validation import (
    check_density,
    check_projector,
    check_square_matrix,
    check_unitary,
)

KINDS = ("density", "projector", "unitary", "general")


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every check in the package.

    validation_eps
        Slack allowed when verifying an operator kind (Hermiticity,
        idempotence, unitarity, unit trace, eigenvalue floor).
    identity_eps
        Largest distance at which two operators count as equal.
    certainty_eps
        Probabilities within this of 0 (or 1) count as impossible (or certain).
    """

    validation_eps: float = 1e-9
    identity_eps: float = 1e-9
    certainty_eps: float = 1e-9

    def __post_init__(self):
        for name in ("validation_eps", "identity_eps", "certainty_eps"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 < value < 1.0):
                raise ValueError(f"tolerance {name} must lie in (0, 1), got {value!r}")

    def replace(self, **changes) -> "Tolerances":
        unknown = set(changes) - {"validation_eps", "identity_eps", "certainty_eps"}
        if unknown:
            raise ValueError(f"unknown tolerance(s): {sorted(unknown)}")
        values = {**self.as_dict(), **{k: float(v) for k, v in changes.items()}}
        return Tolerances(**values)

    def as_dict(self) -> dict:
        return {
            "validation_eps": self.validation_eps,
            "identity_eps": self.identity_eps,
            "certainty_eps": self.certainty_eps,
        }


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class DimensionSignature:
    """Ordered subsystem dimensions of a tensor-product space."""

    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise DimensionError("a signature needs at least one subsystem")
        if any(d < 1 for d in dims):
            raise DimensionError(f"subsystem dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    def __len__(self):
        return len(self.dims)

    def __iter__(self):
        return iter(self.dims)

    def __getitem__(self, k):
        return self.dims[k]

    def __add__(self, other: "DimensionSignature") -> "DimensionSignature":
        return DimensionSignature(self.dims + as_signature(other).dims)

    def restrict(self, indices: Sequence[int]) -> "DimensionSignature":
        return DimensionSignature(self.dims[i] for i in indices)

    def __repr__(self):
        return f"DimensionSignature({list(self.dims)})"


def as_signature(sig) -> DimensionSignature:
    if isinstance(sig, DimensionSignature):
        return sig
    if isinstance(sig, (int, np.integer)):
        return DimensionSignature([sig])
    return DimensionSignature(sig)


@dataclass(frozen=True, eq=False)
class Operator:
    """Immutable square matrix tagged with a tensor structure and a kind.

    The kind (``density``, ``projector``, ``unitary`` or ``general``) is
    checked at construction time against ``eps`` (defaults to
    ``Tolerances().validation_eps``).  The stored matrix is read-only.
    """

    matrix: np.ndarray
    signature: DimensionSignature = None
    kind: str = "general"
    eps: float = field(default=None, repr=False)

    def __post_init__(self):
        arr = check_square_matrix(self.matrix)
        sig = DimensionSignature([arr.shape[0]]) if self.signature is None else as_signature(self.signature)
        if sig.total != arr.shape[0]:
            raise DimensionError(
                f"matrix side {arr.shape[0]} does not match signature {list(sig.dims)} "
                f"(total {sig.total})"
            )
        if self.kind not in KINDS:
            raise OperatorValidationError(f"unknown operator kind {self.kind!r}; expected one of {KINDS}")
        eps = DEFAULT_TOLERANCES.validation_eps if self.eps is None else float(self.eps)
        if self.kind == "density":
            check_density(arr, eps)
        elif self.kind == "projector":
            check_projector(arr, eps)
        elif self.kind == "unitary":
            check_unitary(arr, eps)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "eps", eps)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dims(self) -> tuple[int, ...]:
        return self.signature.dims

    @property
    def H(self) -> "Operator":
        """Hermitian adjoint (unitaries stay unitary, projectors/densities are self-adjoint)."""
        return Operator(self.matrix.conj().T, self.signature, self.kind, self.eps)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def with_kind(self, kind: str, eps: float | None = None) -> "Operator":
        """Re-tag (and re-validate) the same matrix."""
        return Operator(self.matrix, self.signature, kind, self.eps if eps is None else eps)

    def __matmul__(self, other: "Operator") -> "Operator":
        other = as_operator(other, self.signature)
        _require_same_signature(self, other)
        return Operator(self.matrix @ other.matrix, self.signature)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"Operator(kind={self.kind!r}, dims={list(self.dims)})"


def as_operator(obj, signature=None, kind="general") -> Operator:
    """Wrap ``obj`` as an :class:`Operator`; operators pass through unchanged."""
    if isinstance(obj, Operator):
        return obj
    return Operator(np.asarray(obj), signature, kind)


def _require_same_signature(a: Operator, b: Operator):
    if a.signature != b.signature:
        raise DimensionError(f"signature mismatch: {list(a.dims)} vs {list(b.dims)}")


# ---------------------------------------------------------------- builders


def identity(signature) -> Operator:
    sig = as_signature(signature)
    return Operator(np.eye(sig.total), sig, "projector")


def zero_projector(signature) -> Operator:
    sig = as_signature(signature)
    return Operator(np.zeros((sig.total, sig.total)), sig, "projector")


def pure_state(vector, signature=None, eps=None) -> Operator:
    """Density operator |v><v| of a normalized vector."""
    v = np.asarray(vector, dtype=np.complex128).reshape(-1)
    return Operator(np.outer(v, v.conj()), signature or [v.size], "density", eps)


def projector_onto(vectors, signature=None) -> Operator:
    """Orthogonal projector onto the span of the columns of ``vectors``.

    The columns need not be orthonormal; an orthonormal basis of their span
    is taken from an SVD, with singular values below 1e-12 treated as zero.
    """
    vecs = np.asarray(vectors, dtype=np.complex128)
    if vecs.ndim == 1:
        vecs = vecs[:, None]
    u, s, _ = np.linalg.svd(vecs, full_matrices=False)
    basis = u[:, s > 1e-12 * max(1.0, s.max(initial=0.0))]
    return Operator(basis @ basis.conj().T, signature or [vecs.shape[0]], "projector")


def complement(projector: Operator) -> Operator:
    """I - F."""
    return Operator(np.eye(projector.dim) - projector.matrix, projector.signature, "projector")


def conjugate(op: Operator, unitary: Operator) -> Operator:
    """U A U^dag, keeping the kind of ``op`` (conjugation preserves every kind)."""
    _require_same_signature(op, unitary)
    u = unitary.matrix
    m = u @ op.matrix @ u.conj().T
    if op.kind in ("density", "projector"):
        m = (m + m.conj().T) / 2
    return Operator(m, op.signature, op.kind, op.eps)


# -------------------------------------------------------------- operations

_CLOSED_UNDER_TENSOR = ("projector", "unitary", "density")


def tensor_product(a: Operator, b: Operator) -> Operator:
    """Kronecker product with subsystems ordered ``a`` then ``b``."""
    a = as_operator(a)
    b = as_operator(b)
    kind = a.kind if a.kind == b.kind and a.kind in _CLOSED_UNDER_TENSOR else "general"
    eps = max(a.eps, b.eps)
    return Operator(np.kron(a.matrix, b.matrix), a.signature + b.signature, kind, eps)


def tensor(*ops: Operator) -> Operator:
    """Tensor product of several operators, left to right."""
    if not ops:
        raise DimensionError("tensor() needs at least one operand")
    return reduce(tensor_product, ops)


def embed(q: Operator, signature, k: int) -> Operator:
    """Lift an operator on factor ``k`` to the full space, identity elsewhere."""
    q = as_operator(q)
    sig = as_signature(signature)
    if not -len(sig) <= k < len(sig):
        raise DimensionError(f"factor index {k} out of range for signature {list(sig.dims)}")
    k %= len(sig)
    if q.dim != sig[k]:
        raise DimensionError(
            f"operator of dimension {q.dim} cannot act on factor {k} of dimension {sig[k]}"
        )
    left = math.prod(sig.dims[:k])
    right = math.prod(sig.dims[k + 1:])
    m = np.kron(np.kron(np.eye(left), q.matrix), np.eye(right))
    kind = q.kind if q.kind in ("projector", "unitary") else "general"
    return Operator(m, sig, kind, q.eps)


def partial_trace(m: Operator, keep) -> Operator:
    """Trace out every factor not listed in ``keep``.

    ``keep`` is a collection of factor indices; the result lists the kept
    factors in increasing index order.
    """
    m = as_operator(m)
    sig = m.signature
    n = len(sig)
    if isinstance(keep, (int, np.integer)):
        keep = [keep]
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise DimensionError("partial_trace needs a non-empty set of kept factors")
    if keep[0] < 0 or keep[-1] >= n:
        raise DimensionError(f"kept factor indices {keep} out of range for {n} factors")
    drop = [i for i in range(n) if i not in keep]
    dk = math.prod(sig[i] for i in keep)
    dd = math.prod(sig[i] for i in drop)
    t = m.matrix.reshape(sig.dims + sig.dims)
    t = t.transpose(keep + drop + [n + i for i in keep] + [n + i for i in drop])
    reduced = np.einsum("ajbj->ab", t.reshape(dk, dd, dk, dd))
    return Operator(reduced, sig.restrict(keep))


class Distance(NamedTuple):
    """Both norms of A - B: largest entry modulus and trace (nuclear) norm."""

    max_entry: float
    trace_norm: float


def operator_distance(a: Operator, b: Operator) -> Distance:
    a = as_operator(a)
    b = as_operator(b, a.signature)
    _require_same_signature(a, b)
    diff = a.matrix - b.matrix
    return Distance(
        float(np.max(np.abs(diff))),
        float(np.sum(np.linalg.svd(diff, compute_uv=False))),
    )


def trace_distance(a: Operator, b: Operator) -> float:
    """Trace-norm ||A - B||_1 (no factor 1/2)."""
    return operator_distance(a, b).trace_norm


def expectation(rho: Operator, f: Operator) -> complex:
    """tr(rho F) without forming the product."""
    _require_same_signature(rho, f)
    return complex(np.sum(rho.matrix * f.matrix.T))


def fidelity_with_pure(rho: Operator, vector) -> float:
    """<v| rho |v> for a normalized vector v."""
    v = np.asarray(vector, dtype=np.complex128).reshape(-1)
    return float(np.real(v.conj() @ rho.matrix @ v))


# ------------------------------------------------------------ serialization


def to_record(op: Operator) -> dict:
    """Plain-data record ``{dims, kind, re, im}`` with row-major nested lists."""
    return {
        "dims": list(op.dims),
        "kind": op.kind,
        "re": op.matrix.real.tolist(),
        "im": op.matrix.imag.tolist(),
    }


def from_record(record: dict, eps: float | None = None) -> Operator:
    """Inverse of :func:`to_record`; the kind invariants are re-validated."""
    try:
        dims = record["dims"]
        kind = record.get("kind", "general")
        re = np.asarray(record["re"], dtype=float)
        im = np.asarray(record.get("im", np.zeros_like(re)), dtype=float)
    except KeyError as exc:
        raise OperatorValidationError(f"operator record is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise OperatorValidationError(f"operator record is malformed: {exc}") from None
    if re.shape != im.shape:
        raise OperatorValidationError(f"'re' shape {re.shape} differs from 'im' shape {im.shape}")
    return Operator(re + 1j * im, dims, kind, eps)
