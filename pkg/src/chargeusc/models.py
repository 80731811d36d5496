"""Hamiltonian builders for the CPB-oscillator circuits and the QST setup.

Two energy conventions are used:

* circuit-level builders (``cpb_hamiltonian``, ``one_cpb_full``,
  ``two_cpb_hamiltonian``) take energies in joules and return joules;
* Hamiltonian-level builders (``two_level_h1``, ``qrm``, ``usc_mediator``,
  ``qst_hamiltonian``) take angular frequencies and return H/hbar in rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import hbar
from .hilbert import (
    Operator,
    charge_operators,
    embed,
    fock_annihilation,
    identity,
    pauli,
    tensor,
)

DEFAULT_N_MAX = 10
MIN_N_MAX = 5


def default_n_fock(g_ratio: float) -> int:
    """Fock cutoff adequate for a coupling ratio g~/omega_r."""
    if g_ratio <= 0.5:
        return 20
    if g_ratio <= 1.5:
        return 40
    return int(np.ceil(40 + 40 * (g_ratio - 1.5)))


@dataclass(frozen=True)
class HamiltonianLevelParams:
    """Angular frequencies (rad/s) for two-level / QRM style models.

    Single-qubit models read ``omega_q[0]`` and ``g_tilde[0]``.
    """

    omega_r: float
    omega_q: tuple[float, ...]
    g_tilde: tuple[float, ...]
    g12: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "omega_q", tuple(np.atleast_1d(self.omega_q).astype(float)))
        object.__setattr__(self, "g_tilde", tuple(np.atleast_1d(self.g_tilde).astype(float)))
        if self.omega_r <= 0 or any(w <= 0 for w in self.omega_q):
            raise ValueError("frequencies must be positive")
        if any(g < 0 for g in self.g_tilde):
            raise ValueError("couplings g_tilde must be non-negative")
        if len(self.omega_q) != len(self.g_tilde):
            raise ValueError("omega_q and g_tilde must have one entry per qubit")

    @property
    def beta(self) -> tuple[float, ...]:
        return tuple(w / self.omega_r for w in self.omega_q)


def _check_n_max(n_max):
    if n_max < MIN_N_MAX:
        raise ValueError(f"n_max must be >= {MIN_N_MAX}")


def cpb_hamiltonian(E_C, E_J, n_g=0.5, n_max=DEFAULT_N_MAX) -> Operator:
    """4 E_C (n - n_g)^2 - E_J cos(phi) in the charge basis."""
    _check_n_max(n_max)
    n_op, raise_phase = charge_operators(n_max)
    shifted = n_op - n_g
    cos_phi = 0.5 * (raise_phase + raise_phase.H)
    return 4 * E_C * (shifted @ shifted) - E_J * cos_phi


def one_cpb_full(params, n_max=DEFAULT_N_MAX, n_fock=20, qubit=0) -> Operator:
    """Full charge-basis H1 (joules), factor order (CPB, oscillator).

    ``params`` is a ``DerivedParams`` from the circuit module (duck-typed:
    needs ``E_C``, ``E_J``, ``n_g``, ``omega_r``, ``g``).
    """
    H_cpb = cpb_hamiltonian(params.E_C[qubit], params.E_J[qubit], params.n_g[qubit], n_max)
    n_op, _ = charge_operators(n_max)
    a = fock_annihilation(n_fock)
    x = a + a.H
    dims = (H_cpb.dim, n_fock)
    return (
        embed(H_cpb, 0, dims)
        + hbar * params.omega_r * embed(a.H @ a, 1, dims)
        + hbar * params.g[qubit] * tensor([n_op, x])
    )


def two_level_h1(params: HamiltonianLevelParams, n_fock: int) -> Operator:
    """omega_q/2 sz + omega_r a'a + g~ (I + sx)(a + a'), in rad/s."""
    wq, gt = params.omega_q[0], params.g_tilde[0]
    a = fock_annihilation(n_fock)
    x = a + a.H
    dims = (2, n_fock)
    return (
        0.5 * wq * embed(pauli("z"), 0, dims)
        + params.omega_r * embed(a.H @ a, 1, dims)
        + gt * tensor([identity(2) + pauli("x"), x])
    )


def qrm(params: HamiltonianLevelParams, n_fock: int) -> Operator:
    """Quantum Rabi model in rad/s, factor order (qubit, oscillator)."""
    wq, gt = params.omega_q[0], params.g_tilde[0]
    a = fock_annihilation(n_fock)
    dims = (2, n_fock)
    return (
        0.5 * wq * embed(pauli("z"), 0, dims)
        + params.omega_r * embed(a.H @ a, 1, dims)
        + gt * tensor([pauli("x"), a + a.H])
    )


def parity(n_fock: int) -> Operator:
    """sz (x) exp(i pi a'a)."""
    return tensor([pauli("z"), Operator(np.diag((-1.0) ** np.arange(n_fock)))])


def two_cpb_hamiltonian(params, n_max=DEFAULT_N_MAX, n_fock=20) -> Operator:
    """Two charge-basis CPBs on one oscillator (joules), order (CPB1, CPB2, osc)."""
    n_op, _ = charge_operators(n_max)
    d = n_op.dim
    dims = (d, d, n_fock)
    a = fock_annihilation(n_fock)
    x = a + a.H
    H = hbar * params.omega_r * embed(a.H @ a, 2, dims)
    for ell in range(2):
        H_cpb = cpb_hamiltonian(params.E_C[ell], params.E_J[ell], params.n_g[ell], n_max)
        H = H + embed(H_cpb, ell, dims)
    I_c = identity(d)
    H = H + hbar * params.g[0] * tensor([n_op, I_c, x])
    H = H + hbar * params.g[1] * tensor([I_c, n_op, x])
    H = H + hbar * params.g12 * tensor([n_op, n_op, identity(n_fock)])
    return H


def mediator_operators(n_fock: int) -> dict[str, Operator]:
    """Bare operators of the two-qubit mediator, order (q1, q2, osc)."""
    a = fock_annihilation(n_fock)
    dims = (2, 2, n_fock)
    return {
        "X": embed(a + a.H, 2, dims),
        "sx1": embed(pauli("x"), 0, dims),
        "sx2": embed(pauli("x"), 1, dims),
        "sz1": embed(pauli("z"), 0, dims),
        "sz2": embed(pauli("z"), 1, dims),
    }


def usc_mediator(params: HamiltonianLevelParams, n_fock: int) -> Operator:
    """Two-level truncation of the two-CPB circuit, in rad/s.

    The direct term g12 n1 n2 becomes g12 (I + sx1)(I + sx2)/4.
    """
    if len(params.omega_q) != 2:
        raise ValueError("usc_mediator needs two qubits")
    a = fock_annihilation(n_fock)
    x = a + a.H
    dims = (2, 2, n_fock)
    I2 = identity(2)
    n_half = I2 + pauli("x")
    H = params.omega_r * embed(a.H @ a, 2, dims)
    H = H + 0.5 * params.omega_q[0] * embed(pauli("z"), 0, dims)
    H = H + 0.5 * params.omega_q[1] * embed(pauli("z"), 1, dims)
    H = H + params.g_tilde[0] * tensor([n_half, I2, x])
    H = H + params.g_tilde[1] * tensor([I2, n_half, x])
    if params.g12:
        H = H + 0.25 * params.g12 * tensor([n_half, n_half, identity(n_fock)])
    return H


def transmon_levels(omega_01: float, alpha_r: float = -0.096, n_levels: int = 3):
    """Level energies (rad/s) and charge operator of a weakly anharmonic transmon.

    Three levels: (0, w01, w01 (2 + alpha_r)) with harmonic sqrt(k+1) charge
    ladder elements. Two levels: (0, w01) and the charge operator is sigma_x.
    """
    if n_levels == 2:
        return np.array([0.0, omega_01]), pauli("x")
    if n_levels == 3:
        energies = np.array([0.0, omega_01, omega_01 * (2 + alpha_r)])
        n = np.diag(np.sqrt(np.arange(1, 3)), 1)
        return energies, Operator(n + n.T)
    raise ValueError("n_levels must be 2 or 3")


def qst_hamiltonian(dressed, transmons, lambdas) -> Operator:
    """Transmon-mediator-transmon Hamiltonian (rad/s), order (t1, mediator, t2).

    ``dressed`` is a ``DressedSystem`` whose projected ``X`` is the mediator
    coupling operator; ``transmons`` is a pair of ``transmon_levels`` outputs.
    Two-level transmon energies are written as (w01/2) tau_z, i.e. shifted to
    be symmetric about zero; three-level ones keep the ground at zero.
    """
    (E1, n1), (E2, n2) = transmons
    K = dressed.K
    eps = dressed.eigenvalues - dressed.eigenvalues[0]
    X = Operator(dressed.projected["X"])
    dims = (len(E1), K, len(E2))

    def level_op(E):
        if len(E) == 2:
            return Operator(np.diag([-E[1] / 2, E[1] / 2]))
        return Operator(np.diag(E))

    H = embed(Operator(np.diag(eps)), 1, dims)
    H = H + embed(level_op(E1), 0, dims) + embed(level_op(E2), 2, dims)
    H = H + lambdas[0] * tensor([n1, X, identity(len(E2))])
    H = H + lambdas[1] * tensor([identity(len(E1)), X, n2])
    return H
