"""Dense operator algebra on truncated charge and Fock spaces."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

HERMITIAN_RTOL = 1e-12
DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense square matrix with an ordered list of tensor-factor dimensions."""

    data: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"operator must be square, got shape {data.shape}")
        dims = tuple(int(d) for d in self.dims) or (data.shape[0],)
        if int(np.prod(dims)) != data.shape[0]:
            raise ValueError(f"factor dims {dims} do not multiply to {data.shape[0]}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def H(self) -> Operator:
        return Operator(self.data.conj().T, self.dims)

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        scale = np.max(np.abs(self.data))
        if scale == 0:
            return True
        return np.max(np.abs(self.data - self.data.conj().T)) < rtol * scale

    def _other(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
            return other.data
        return other

    def __add__(self, other):
        if np.isscalar(other):
            return Operator(self.data + other * np.eye(self.dim), self.dims)
        return Operator(self.data + self._other(other), self.dims)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __neg__(self):
        return Operator(-self.data, self.dims)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(scalar * self.data, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.data / scalar, self.dims)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.data @ self._other(other), self.dims)
        return self.data @ other

    def __repr__(self):
        return f"Operator(dim={self.dim}, dims={self.dims})"


def identity(n: int) -> Operator:
    return Operator(np.eye(n))


def fock_annihilation(n_fock: int) -> Operator:
    """Truncated ladder operator with <n-1|a|n> = sqrt(n)."""
    if n_fock < 2:
        raise ValueError("n_fock must be >= 2")
    return Operator(np.diag(np.sqrt(np.arange(1, n_fock)), 1))


def number(n_fock: int) -> Operator:
    return Operator(np.diag(np.arange(n_fock, dtype=float)))


def charge_operators(n_max: int) -> tuple[Operator, Operator]:
    """Cooper-pair number operator and exp(i phi) on charge states -n_max..n_max.

    ``raise_phase`` maps |n> to |n+1>; |n_max> is sent to zero. The cosine of
    the phase is ``(raise_phase + raise_phase.H) / 2``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    dim = 2 * n_max + 1
    n_op = Operator(np.diag(np.arange(-n_max, n_max + 1, dtype=float)))
    raise_phase = Operator(np.eye(dim, k=-1))
    return n_op, raise_phase


def pauli(which: str) -> Operator:
    mats = {
        "x": [[0, 1], [1, 0]],
        "y": [[0, -1j], [1j, 0]],
        "z": [[1, 0], [0, -1]],
    }
    return Operator(np.array(mats[which], dtype=complex))


def tensor(ops: Sequence[Operator]) -> Operator:
    """Kronecker product in the given order; factor dims are concatenated."""
    if not ops:
        raise ValueError("tensor needs at least one operator")
    data = reduce(np.kron, [op.data for op in ops])
    dims = sum((op.dims for op in ops), ())
    return Operator(data, dims)


def embed(op: Operator, position: int, dims: Sequence[int]) -> Operator:
    """Place ``op`` at ``position`` among identities of sizes ``dims``."""
    factors = [identity(d) for d in dims]
    if op.dim != dims[position]:
        raise ValueError(f"operator dim {op.dim} does not fit factor {dims[position]}")
    factors[position] = op
    return tensor(factors)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)


def eigensystem(H: Operator | np.ndarray, k: int | None = None) -> EigenSystem:
    """Lowest ``k`` eigenpairs of a Hermitian operator, ascending.

    Each eigenvector is rotated so its largest-magnitude component is real and
    positive. Eigenvalues equal within ``DEGENERACY_RTOL`` (relative to the
    spectral scale) are ordered by the index of that largest component.
    """
    op = H if isinstance(H, Operator) else Operator(H)
    if not op.is_hermitian():
        raise ValueError("eigensystem requires a Hermitian operator")
    mat = 0.5 * (op.data + op.data.conj().T)
    vals, vecs = np.linalg.eigh(mat)

    lead = np.argmax(np.abs(vecs), axis=0)
    phases = vecs[lead, np.arange(vecs.shape[1])]
    vecs = vecs * (np.abs(phases) / phases)[None, :]

    scale = np.max(np.abs(vals)) if vals.size else 0.0
    scale = scale if scale > 0 else 1.0
    order = list(range(len(vals)))
    start = 0
    while start < len(vals):
        stop = start + 1
        while stop < len(vals) and vals[stop] - vals[start] <= DEGENERACY_RTOL * scale:
            stop += 1
        if stop - start > 1:
            block = sorted(range(start, stop), key=lambda i: lead[i])
            order[start:stop] = block
        start = stop
    vals = vals[order]
    vecs = vecs[:, order]

    if k is not None:
        if not 1 <= k <= len(vals):
            raise ValueError(f"k={k} out of range for dimension {len(vals)}")
        vals, vecs = vals[:k], vecs[:, :k]
    return EigenSystem(vals, vecs)
