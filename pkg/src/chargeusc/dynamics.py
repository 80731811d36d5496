"""Dressed-basis Lindblad dynamics and the transmon state-transfer protocol.

Hamiltonians are H/hbar in rad/s, times in seconds, rates in 1/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import constants as const
from .hilbert import Operator, embed, identity, pauli
from .models import HamiltonianLevelParams, default_n_fock, mediator_operators, qst_hamiltonian, transmon_levels, usc_mediator
from .spectrum import DressedSystem, dress, forbidden_transitions

TRACE_FAIL = 1e-4
DEFAULT_DT = 1e-12
DEFAULT_K = 10


class IntegrationError(ArithmeticError):
    """Trace or norm drift too large for the chosen time step."""


@dataclass(frozen=True)
class NoiseSpec:
    """Bare rates (1/s) and bath temperature (K)."""

    kappa: float = 0.0
    gamma: float = 0.0
    gamma_phi_cpb: float = 0.0
    gamma_m: tuple[float, float] = (0.0, 0.0)
    gamma_phi_m: tuple[float, float] = (0.0, 0.0)
    T: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "gamma_m", tuple(np.broadcast_to(self.gamma_m, 2).astype(float)))
        object.__setattr__(self, "gamma_phi_m", tuple(np.broadcast_to(self.gamma_phi_m, 2).astype(float)))
        rates = (self.kappa, self.gamma, self.gamma_phi_cpb, *self.gamma_m, *self.gamma_phi_m)
        if any(r < 0 for r in rates) or self.T < 0:
            raise ValueError("rates and temperature must be non-negative")

    @classmethod
    def paper(cls, T=50e-3):
        """Experimentally motivated rates; each is 2 pi times the quoted MHz value."""
        w = lambda f_mhz: 2 * np.pi * f_mhz * const.MHz
        return cls(
            kappa=w(0.10),
            gamma=w(0.0083),
            gamma_phi_cpb=w(2.00),
            gamma_m=(w(0.48),) * 2,
            gamma_phi_m=(w(0.15),) * 2,
            T=T,
        )

    @property
    def omega_T(self) -> float:
        return const.k_B * self.T / const.hbar


def thermal_occupation(delta, T):
    """Bose-Einstein occupation at angular frequency ``delta`` (rad/s)."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0):
        raise ValueError("transition frequency must be positive")
    if T == 0:
        return np.zeros_like(delta)[()]
    return (1.0 / np.expm1(const.hbar * delta / (const.k_B * T)))[()]


def thermal_state(ds: DressedSystem, T: float) -> np.ndarray:
    """Gibbs state over the retained dressed levels, as a K x K matrix."""
    if ds.K < 2:
        raise ValueError("need at least two dressed levels")
    eps = ds.ground_referenced()
    if T == 0:
        p = np.zeros(ds.K)
        p[0] = 1.0
    else:
        w = -const.hbar * eps / (const.k_B * T)
        p = np.exp(w - w.max())
        p /= p.sum()
    return np.diag(p).astype(complex)


@dataclass(frozen=True, eq=False)
class DressedRates:
    """Rate tables indexed [j, k] (k > j only) or [ell, j, k]; diagonal dephasing [ell, j]."""

    kappa: np.ndarray
    gamma: np.ndarray
    phi: np.ndarray
    phi_diag: np.ndarray

    @property
    def total(self) -> np.ndarray:
        """Bracket kappa + sum_ell(gamma + phi) for every (j, k)."""
        return self.kappa + self.gamma.sum(0) + self.phi.sum(0)


def dressed_rates(ds: DressedSystem, noise: NoiseSpec, omega_r: float, omega_q: Sequence[float]) -> DressedRates:
    K = ds.K
    delta = ds.eigenvalues[None, :] - ds.eigenvalues[:, None]  # delta[j, k] = eps_k - eps_j
    upper = np.triu(np.ones((K, K), dtype=bool), 1)
    if np.any(delta[upper] <= 0):
        raise ArithmeticError("dressed eigenvalues are not strictly ascending")
    dk = np.where(upper, delta, 0.0)

    X = ds.projected["X"]
    kappa = noise.kappa * dk / omega_r * np.abs(X) ** 2
    gamma = np.empty((2, K, K))
    phi = np.empty((2, K, K))
    phi_diag = np.empty((2, K))
    for ell in range(2):
        sx = ds.projected[f"sx{ell + 1}"]
        sz = ds.projected[f"sz{ell + 1}"]
        gamma[ell] = noise.gamma * dk / omega_q[ell] * np.abs(sx) ** 2
        phi[ell] = noise.gamma_phi_cpb * dk / omega_q[ell] * np.abs(sz) ** 2
        phi_diag[ell] = noise.gamma_phi_cpb / (2 * omega_q[ell]) * noise.omega_T * np.abs(np.diag(sz)) ** 2
    return DressedRates(kappa, gamma, phi, phi_diag)


@dataclass(frozen=True, eq=False)
class LindbladGenerator:
    H: Operator
    channels: list[tuple[float, Operator]]
    labels: list[str] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.H.dim

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        """d rho/dt = -i[H, rho] + sum rate D[c] rho."""
        H = self.H.data
        out = -1j * (H @ rho - rho @ H)
        for rate, c in self.channels:
            c = c.data
            cd = c.conj().T
            cdc = cd @ c
            out += rate * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
        return out

    def superoperator(self) -> np.ndarray:
        """Liouvillian acting on row-major vec(rho)."""
        n = self.dim
        I = np.eye(n)
        H = self.H.data
        L = -1j * (np.kron(H, I) - np.kron(I, H.T))
        anti = np.zeros((n, n), dtype=complex)
        for rate, c in self.channels:
            if rate == 0:
                continue
            c = c.data
            L += rate * np.kron(c, c.conj())
            anti += rate * (c.conj().T @ c)
        L -= 0.5 * (np.kron(anti, I) + np.kron(I, anti.T))
        return L


def build_lindblad(H: Operator, ds: DressedSystem, noise: NoiseSpec, omega_r: float, omega_q: Sequence[float]) -> LindbladGenerator:
    """Generator for the (transmon1, mediator, transmon2) system.

    Transmons get gamma_m D[tau_x] and gamma_phi_m D[tau_z]. For each dressed
    pair k > j the mediator decays with |psi_j><psi_k| at rate bracket*(n+1)
    and is excited with |psi_k><psi_j| at rate bracket*n; each level j also
    dephases with |psi_j><psi_j| at the summed diagonal rate.
    """
    dims = H.dims
    if len(dims) != 3 or dims[1] != ds.K:
        raise ValueError(f"expected (transmon, K={ds.K}, transmon) dims, got {dims}")
    if dims[0] != 2 or dims[2] != 2:
        raise ValueError("open-system runs use two-level transmons")
    channels, labels = [], []
    for m, pos in enumerate((0, 2)):
        channels.append((noise.gamma_m[m], embed(pauli("x"), pos, dims)))
        labels.append(f"transmon{m + 1}_relax")
        channels.append((noise.gamma_phi_m[m], embed(pauli("z"), pos, dims)))
        labels.append(f"transmon{m + 1}_dephase")

    rates = dressed_rates(ds, noise, omega_r, omega_q)
    bracket = rates.total
    K = ds.K
    for j in range(K):
        for k in range(j + 1, K):
            if bracket[j, k] == 0:
                continue
            nbar = thermal_occupation(ds.transition(j, k), noise.T)
            down = np.zeros((K, K))
            down[j, k] = 1.0
            channels.append((bracket[j, k] * (nbar + 1), embed(Operator(down), 1, dims)))
            labels.append(f"down_{j}{k}")
            if nbar > 0:
                channels.append((bracket[j, k] * nbar, embed(Operator(down.T), 1, dims)))
                labels.append(f"up_{j}{k}")
    for j in range(K):
        rate = rates.phi_diag[:, j].sum()
        if rate > 0:
            proj = np.zeros((K, K))
            proj[j, j] = 1.0
            channels.append((rate, embed(Operator(proj), 1, dims)))
            labels.append(f"dephase_{j}")
    return LindbladGenerator(H, channels, labels)


def rk4_propagator(A: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step for dy/dt = A y, written as a matrix.

    For a constant linear generator the four RK4 stages collapse to the
    fourth-order Taylor polynomial of exp(A dt).
    """
    n = A.shape[0]
    B = A * dt
    M = np.eye(n, dtype=complex) + B / 4
    M = np.eye(n) + (B @ M) / 3
    M = np.eye(n) + (B @ M) / 2
    return np.eye(n) + B @ M


@dataclass
class Trajectory:
    times: np.ndarray
    series: dict[str, np.ndarray]
    final_state: np.ndarray
    states: list[np.ndarray] | None = None

    def __getitem__(self, name):
        return self.series[name]


def _steps(t_final, dt, sample_dt):
    sample_dt = dt if sample_dt is None else sample_dt
    stride = max(1, int(round(sample_dt / dt)))
    n_samples = int(math.ceil(t_final / (stride * dt) - 1e-9))
    return stride, n_samples


def evolve(
    gen: LindbladGenerator,
    rho0: np.ndarray,
    t_final: float,
    dt: float = DEFAULT_DT,
    sample_dt: float | None = None,
    observables: Mapping[str, np.ndarray] | None = None,
    store_states: bool = False,
) -> Trajectory:
    """Fixed-step RK4 integration of the master equation.

    ``observables`` maps names to matrices A; the trajectory records
    Re tr(A rho) at every sample, plus the trace.
    """
    n = gen.dim
    rho0 = np.asarray(rho0, dtype=complex)
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-10 or abs(np.trace(rho0) - 1) > 1e-8:
        raise ValueError("rho0 must be Hermitian with unit trace")
    if np.linalg.eigvalsh(rho0).min() < -1e-8:
        raise ValueError("rho0 must be positive semidefinite")
    stride, n_samples = _steps(t_final, dt, sample_dt)
    M = np.linalg.matrix_power(rk4_propagator(gen.superoperator(), dt), stride)

    observables = dict(observables or {})
    obs_rows = {name: np.asarray(A, dtype=complex).T.reshape(-1) for name, A in observables.items()}
    trace_row = np.eye(n).reshape(-1)

    times = np.arange(n_samples + 1) * stride * dt
    series = {name: np.empty(n_samples + 1) for name in obs_rows}
    series["trace"] = np.empty(n_samples + 1)
    states = [] if store_states else None
    r = rho0.reshape(-1).copy()
    for i in range(n_samples + 1):
        if i:
            r = M @ r
        tr = (trace_row @ r).real
        if abs(tr - 1) > TRACE_FAIL:
            raise IntegrationError(f"trace drifted to {tr:.6g} at t={times[i]:.3e} s; reduce dt")
        series["trace"][i] = tr
        for name, row in obs_rows.items():
            series[name][i] = (row @ r).real
        if store_states:
            states.append(r.reshape(n, n).copy())
    return Trajectory(times, series, r.reshape(n, n), states)


def evolve_unitary(
    H: Operator,
    psi0: np.ndarray,
    t_final: float,
    dt: float = DEFAULT_DT,
    sample_dt: float | None = None,
    projectors: Mapping[str, np.ndarray] | None = None,
) -> Trajectory:
    """RK4 Schroedinger evolution; records <psi|P|psi> for each projector and the norm."""
    psi = np.asarray(psi0, dtype=complex).copy()
    if abs(np.vdot(psi, psi) - 1) > 1e-10:
        raise ValueError("psi0 must be normalized")
    stride, n_samples = _steps(t_final, dt, sample_dt)
    # a constant offset is a global phase; removing it slows the RK4 phase error
    Hs = H.data - np.vdot(psi, H.data @ psi).real * np.eye(H.dim)
    M = np.linalg.matrix_power(rk4_propagator(-1j * Hs, dt), stride)
    projectors = dict(projectors or {})
    times = np.arange(n_samples + 1) * stride * dt
    series = {name: np.empty(n_samples + 1) for name in projectors}
    series["norm"] = np.empty(n_samples + 1)
    for i in range(n_samples + 1):
        if i:
            psi = M @ psi
        norm = np.vdot(psi, psi).real
        if abs(norm - 1) > TRACE_FAIL:
            raise IntegrationError(f"norm drifted to {norm:.6g} at t={times[i]:.3e} s; reduce dt")
        series["norm"][i] = norm
        for name, P in projectors.items():
            series[name][i] = np.vdot(psi, P @ psi).real
    return Trajectory(times, series, psi)


def qst_fidelity(rho_t: np.ndarray, rho_target: np.ndarray) -> float:
    """tr(rho(t) rho_target)."""
    rho_t, rho_target = np.asarray(rho_t), np.asarray(rho_target)
    if rho_t.shape != rho_target.shape:
        raise ValueError("dimension mismatch")
    return float(np.einsum("ij,ji->", rho_t, rho_target).real)


def find_transfer_time(traj: Trajectory, name: str = "fidelity"):
    """(t_peak, value) at the maximum of a series; ties go to the earliest time."""
    values = traj.series[name]
    if len(values) == 0:
        raise ValueError("empty trajectory")
    i = int(np.argmax(values))
    return traj.times[i], values[i]


# --- protocol ---------------------------------------------------------------

OMEGA_R_QST = 2 * np.pi * 8.13 * const.GHz


@dataclass(frozen=True)
class QSTConfig:
    g_ratio: float = 0.3
    omega_r: float = OMEGA_R_QST
    lambda_ratio: float = 0.02
    g12: float = 0.0
    K: int = DEFAULT_K
    n_fock: int | None = None
    transmon_levels: int = 2
    alpha_r: float = -0.096
    forbidden: tuple[int, int] | None = None
    dt: float = DEFAULT_DT
    sample_dt: float = 1e-11
    t_final: float | None = None

    def __post_init__(self):
        if self.K < 2:
            raise ValueError("K must be >= 2")


@dataclass
class QSTSetup:
    config: QSTConfig
    dressed: DressedSystem
    H: Operator
    omega_01: float
    forbidden: tuple[int, int]
    params: HamiltonianLevelParams

    @property
    def dims(self):
        return self.H.dims

    def product_state(self, t1: int, mediator: int, t2: int) -> np.ndarray:
        d1, K, d2 = self.dims
        psi = np.zeros(d1 * K * d2, dtype=complex)
        psi[(t1 * K + mediator) * d2 + t2] = 1.0
        return psi

    def transmon_sector(self, t1: int, t2: int, rho_med: np.ndarray) -> np.ndarray:
        d1, _, d2 = self.dims
        a = np.zeros((d1, d1))
        a[t1, t1] = 1
        b = np.zeros((d2, d2))
        b[t2, t2] = 1
        return np.kron(np.kron(a, rho_med), b)


def setup_qst(config: QSTConfig = QSTConfig()) -> QSTSetup:
    """Dress the two-qubit mediator and tune both transmons to its forbidden transition."""
    wr = config.omega_r
    n_fock = config.n_fock or default_n_fock(config.g_ratio)
    params = HamiltonianLevelParams(wr, (wr, wr), (config.g_ratio * wr,) * 2, config.g12 * wr)
    H_med = usc_mediator(params, n_fock)
    ds = dress(H_med, mediator_operators(n_fock), config.K)
    if config.forbidden is None:
        found = forbidden_transitions(ds, "X", j=1)
        if not found:
            raise ValueError("no forbidden X transition out of level 1 within K levels")
        j, k = found[0][:2]
    else:
        j, k = config.forbidden
        if k >= config.K:
            raise ValueError(f"forbidden level {k} exceeds K={config.K}")
    omega_01 = ds.transition(j, k)
    transmons = [transmon_levels(omega_01, config.alpha_r, config.transmon_levels)] * 2
    lam = config.lambda_ratio * wr
    H = qst_hamiltonian(ds, transmons, (lam, lam))
    return QSTSetup(config, ds, H, omega_01, (j, k), params)


def swap_time_estimate(setup: QSTSetup) -> float:
    """Half period of the |1,psi0,0> <-> |0,psi0,1> exchange from the spectrum."""
    vals, vecs = np.linalg.eigh(setup.H.data)
    a = setup.product_state(1, 0, 0)
    b = setup.product_state(0, 0, 1)
    weight = np.abs(a @ vecs) ** 2 + np.abs(b @ vecs) ** 2
    i, j = np.argsort(weight)[::-1][:2]
    return math.pi / abs(vals[i] - vals[j])


@dataclass
class QSTRun:
    setup: QSTSetup
    trajectory: Trajectory
    t_peak: float
    peak: float


def _horizon(setup):
    if setup.config.t_final is not None:
        return setup.config.t_final
    return 1.3 * swap_time_estimate(setup)


def simulate_qst(config: QSTConfig = QSTConfig(), noise: NoiseSpec | None = None, store_states=False) -> QSTRun:
    """Noisy state transfer from |1><1| x rho_Th x |0><0| towards |0><0| x rho_Th x |1><1|."""
    noise = NoiseSpec.paper() if noise is None else noise
    setup = setup_qst(config)
    rho_th = thermal_state(setup.dressed, noise.T)
    rho1 = setup.transmon_sector(1, 0, rho_th)
    rho2 = setup.transmon_sector(0, 1, rho_th)
    wr = config.omega_r
    gen = build_lindblad(setup.H, setup.dressed, noise, wr, setup.params.omega_q)
    obs = {
        "pop_1ψ0_0": np.outer(setup.product_state(1, 0, 0), setup.product_state(1, 0, 0)),
        "pop_0ψ0_1": np.outer(setup.product_state(0, 0, 1), setup.product_state(0, 0, 1)),
        "fidelity": rho2,
    }
    traj = evolve(gen, rho1, _horizon(setup), config.dt, config.sample_dt, obs, store_states)
    t_peak, peak = find_transfer_time(traj, "fidelity")
    return QSTRun(setup, traj, t_peak, peak)


def simulate_qst_unitary(config: QSTConfig = QSTConfig(transmon_levels=3)) -> QSTRun:
    """Closed-system transfer |0>|psi0>|1> -> |1>|psi0>|0>."""
    setup = setup_qst(config)
    psi0 = setup.product_state(0, 0, 1)
    target = setup.product_state(1, 0, 0)
    proj = {
        "pop_1ψ0_0": np.outer(target, target),
        "pop_0ψ0_1": np.outer(psi0, psi0),
    }
    traj = evolve_unitary(setup.H, psi0, _horizon(setup), config.dt, config.sample_dt, proj)
    t_peak, peak = find_transfer_time(traj, "pop_1ψ0_0")
    return QSTRun(setup, traj, t_peak, peak)
