"""Spectra, dressed bases and selection rules of the coupled models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .circuit import CircuitSpec, cpb_transition_frequency, derive_effective_params, scale_impedance
from .hilbert import Operator, eigensystem
from .models import HamiltonianLevelParams, default_n_fock, qrm, two_level_h1

FORBIDDEN_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class DressedSystem:
    """Lowest ``K`` eigenpairs of a Hamiltonian and operators projected on them.

    ``projected[name][j, k] = <psi_j| O |psi_k>``.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray
    projected: Mapping[str, np.ndarray]

    @property
    def K(self) -> int:
        return len(self.eigenvalues)

    def transition(self, j: int, k: int) -> float:
        """Delta_jk = eps_k - eps_j."""
        return self.eigenvalues[k] - self.eigenvalues[j]

    def ground_referenced(self) -> np.ndarray:
        return self.eigenvalues - self.eigenvalues[0]


def dress(H: Operator, ops: Mapping[str, Operator], K: int) -> DressedSystem:
    if not 1 <= K <= H.dim:
        raise ValueError(f"K={K} out of range for dimension {H.dim}")
    es = eigensystem(H, K)
    V = es.eigenvectors
    projected = {}
    for name, op in ops.items():
        data = op.data if isinstance(op, Operator) else np.asarray(op)
        projected[name] = V.conj().T @ data @ V
    return DressedSystem(es.eigenvalues, V, projected)


def _lowest(H: Operator, n_levels: int) -> np.ndarray:
    vals = np.linalg.eigvalsh(H.data)[:n_levels]
    return vals - vals[0]


def spectrum_sweep(g_grid, n_levels=6, omega_r=1.0, omega_q=None, n_fock=None):
    """Ground-referenced lowest levels of H1 and the QRM along g~/omega_r.

    Returns a dict with ``g`` (the grid), ``h1`` and ``qrm`` arrays of shape
    (len(g_grid), n_levels), in units of ``omega_r``'s frequency scale.
    """
    g_grid = np.asarray(g_grid, dtype=float)
    if np.any(g_grid < 0):
        raise ValueError("coupling grid must be non-negative")
    omega_q = omega_r if omega_q is None else omega_q
    if n_fock is None:
        n_fock = default_n_fock(float(g_grid.max()) if g_grid.size else 0.0)
    h1 = np.empty((len(g_grid), n_levels))
    rabi = np.empty_like(h1)
    for i, g in enumerate(g_grid):
        p = HamiltonianLevelParams(omega_r, (omega_q,), (g * omega_r,))
        h1[i] = _lowest(two_level_h1(p, n_fock), n_levels)
        rabi[i] = _lowest(qrm(p, n_fock), n_levels)
    return {"g": g_grid, "h1": h1, "qrm": rabi}


def coupling_ratio_circuit(params, qubit=0, n_max=10):
    """(E_J/E_C, R, beta) for one CPB of a derived parameter set."""
    wq, _ = cpb_transition_frequency(params.E_C[qubit], params.E_J[qubit], params.n_g[qubit], n_max)
    R = params.g[qubit] / np.sqrt(params.omega_r * wq)
    return params.E_J[qubit] / params.E_C[qubit], R, wq / params.omega_r


def ratio_sweep(spec: CircuitSpec, EJ_grid=None, mu_grid=None, qubit=0):
    """Coupling ratio R and resonance ratio beta along E_J or impedance scale mu.

    Exactly one of ``EJ_grid`` (joules) or ``mu_grid`` must be given. Returns an
    array of rows (x, E_J/E_C, R, beta) where x is the swept value.
    """
    if (EJ_grid is None) == (mu_grid is None):
        raise ValueError("give exactly one of EJ_grid or mu_grid")
    rows = []
    if EJ_grid is not None:
        key = "EJ" if len(spec.EJ) == 1 else f"EJ{qubit + 1}"
        for ej in EJ_grid:
            p = derive_effective_params(spec.with_values(**{key: ej}))
            rows.append((ej, *coupling_ratio_circuit(p, qubit)))
    else:
        base = derive_effective_params(spec)
        for mu in mu_grid:
            p = scale_impedance(base, mu)
            rows.append((mu, *coupling_ratio_circuit(p, qubit)))
    return np.array(rows, dtype=float)


def forbidden_transitions(ds: DressedSystem, op_name: str = "X", j: int = 1, tol: float = FORBIDDEN_TOL):
    """Transitions j -> k (k > j) whose matrix element is below tol * max|O|.

    Returns a list of (j, k, Delta_jk, |O_jk|).
    """
    if op_name not in ds.projected:
        raise KeyError(f"operator {op_name!r} not projected in this dressed system")
    O = np.abs(ds.projected[op_name])
    cutoff = tol * O.max()
    return [
        (j, k, ds.transition(j, k), O[j, k])
        for k in range(j + 1, ds.K)
        if O[j, k] < cutoff
    ]
