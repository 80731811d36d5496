"""Capacitance-network reduction for the one-CPB, two-CPB and two-oscillator circuits.

All quantities are SI: farads, henries, joules, rad/s, ohms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import constants as const
from .models import DEFAULT_N_MAX, cpb_hamiltonian

COND_TOL = 1e-12
DECOUPLED_TOL = 1e-30  # 1/F


class Topology(str, enum.Enum):
    ONE_CPB = "one_cpb"
    TWO_CPB = "two_cpb"
    TWO_OSCILLATOR = "two_oscillator"


REQUIRED_CAPS = {
    Topology.ONE_CPB: ("Cg", "CJ", "Cc", "Cr", "Cp"),
    Topology.TWO_OSCILLATOR: ("Cg", "CJ", "Cc", "Cr", "Cp"),
    Topology.TWO_CPB: ("Cg1", "CJ1", "Cg2", "CJ2", "Cc", "Cr"),
}
N_QUBITS = {Topology.ONE_CPB: 1, Topology.TWO_OSCILLATOR: 1, Topology.TWO_CPB: 2}


@dataclass(frozen=True)
class CircuitSpec:
    """Raw circuit elements for one of the three supported topologies.

    ``EJ`` and ``ng`` hold one entry per CPB. The two-CPB circuit has a single
    grounding capacitance ``Cc`` shared by both passive-node branches; passing
    ``Cc0``/``Cc1`` is accepted only if they are equal.
    """

    topology: Topology
    capacitances: Mapping[str, float]
    Lr: float
    EJ: tuple[float, ...] = ()
    ng: tuple[float, ...] = ()
    LJ: float | None = None

    def __post_init__(self):
        topo = Topology(self.topology)
        object.__setattr__(self, "topology", topo)
        caps = dict(self.capacitances)
        if topo is Topology.TWO_CPB and ("Cc0" in caps or "Cc1" in caps):
            c0, c1 = caps.pop("Cc0", None), caps.pop("Cc1", None)
            if c0 is None or c1 is None or not np.isclose(c0, c1, rtol=1e-12, atol=0.0):
                raise ValueError("two-CPB circuit requires equal grounding capacitors Cc0 = Cc1")
            caps.setdefault("Cc", c0)
        required = REQUIRED_CAPS[topo]
        missing = [k for k in required if k not in caps]
        unknown = [k for k in caps if k not in required]
        if missing or unknown:
            raise ValueError(f"{topo.value}: missing capacitances {missing}, unknown {unknown}")
        for name in required:
            # a zero gate capacitance is the legitimate decoupled limit
            ok = caps[name] >= 0 if name.startswith("Cg") else caps[name] > 0
            if not ok:
                raise ValueError(f"capacitance {name} must be positive, got {caps[name]}")
        object.__setattr__(self, "capacitances", {k: float(caps[k]) for k in required})
        if not self.Lr > 0:
            raise ValueError("Lr must be positive")

        nq = N_QUBITS[topo]
        if topo is Topology.TWO_OSCILLATOR:
            if self.LJ is None or not self.LJ > 0:
                raise ValueError("two-oscillator circuit needs a positive LJ")
        else:
            ej = tuple(float(x) for x in np.atleast_1d(self.EJ))
            if len(ej) != nq or any(not x > 0 for x in ej):
                raise ValueError(f"{topo.value} needs {nq} positive Josephson energies")
            object.__setattr__(self, "EJ", ej)
        ng = tuple(float(x) for x in np.atleast_1d(self.ng)) if len(np.atleast_1d(self.ng)) else (0.5,) * nq
        if len(ng) != nq:
            raise ValueError(f"{topo.value} needs {nq} gate charges")
        object.__setattr__(self, "ng", ng)

    @classmethod
    def one_cpb(cls, Cg, CJ, Cc, Cr, Cp, Lr, EJ, ng=0.5):
        return cls(Topology.ONE_CPB, dict(Cg=Cg, CJ=CJ, Cc=Cc, Cr=Cr, Cp=Cp), Lr, (EJ,), (ng,))

    @classmethod
    def two_cpb(cls, Cg1, CJ1, Cg2, CJ2, Cc, Cr, Lr, EJ1, EJ2, ng1=0.5, ng2=0.5):
        caps = dict(Cg1=Cg1, CJ1=CJ1, Cg2=Cg2, CJ2=CJ2, Cc=Cc, Cr=Cr)
        return cls(Topology.TWO_CPB, caps, Lr, (EJ1, EJ2), (ng1, ng2))

    @classmethod
    def two_oscillator(cls, Cg, CJ, Cc, Cr, Cp, Lr, LJ):
        return cls(Topology.TWO_OSCILLATOR, dict(Cg=Cg, CJ=CJ, Cc=Cc, Cr=Cr, Cp=Cp), Lr, LJ=LJ)

    def with_values(self, **values) -> CircuitSpec:
        """Copy with some capacitances / Lr / EJ entries replaced.

        EJ entries are addressed as ``EJ`` (one CPB) or ``EJ1``/``EJ2``.
        """
        caps = dict(self.capacitances)
        ej = list(self.EJ)
        kw = {}
        for key, val in values.items():
            if key in caps:
                caps[key] = val
            elif key == "EJ":
                ej[0] = val
            elif key in ("EJ1", "EJ2"):
                ej[int(key[-1]) - 1] = val
            elif key in ("Lr", "LJ"):
                kw[key] = val
            else:
                raise KeyError(key)
        return replace(self, capacitances=caps, EJ=tuple(ej), **kw)

    def free_values(self) -> dict[str, float]:
        """Flat name -> value map of every element (used by the optimizer)."""
        out = dict(self.capacitances)
        out["Lr"] = self.Lr
        if self.topology is Topology.TWO_CPB:
            out["EJ1"], out["EJ2"] = self.EJ
        elif self.topology is Topology.ONE_CPB:
            out["EJ"] = self.EJ[0]
        else:
            out["LJ"] = self.LJ
        return out


def build_capacitance_matrix(spec: CircuitSpec):
    """Capacitance matrix after eliminating the passive node, plus gate vectors.

    Node order is (J, r) for the single-junction circuits and (J1, J2, r) for
    the two-CPB circuit. Returns ``(C, [C_v, ...])``.
    """
    c = spec.capacitances
    if spec.topology is Topology.TWO_CPB:
        Cg1, CJ1, Cg2, CJ2, Cc, Cr = (c[k] for k in REQUIRED_CAPS[Topology.TWO_CPB])
        Ct = 2 * Cc + Cg1 + Cg2
        C = np.array([
            [Ct * CJ1 + Cg1 * (2 * Cc + Cg2), Cg1 * Cg2, Cg1 * (Cg2 + Cc)],
            [Cg1 * Cg2, Ct * CJ2 + Cg2 * (2 * Cc + Cg1), Cg2 * (Cc + Cg1)],
            [Cg1 * (Cg2 + Cc), Cg2 * (Cc + Cg1), Ct * Cr + (Cc + Cg1) * (Cc + Cg2)],
        ]) / Ct
        v1 = np.array([Cg1 * (2 * Cc + Cg2), Cg1 * Cg2, Cg1 * (Cc + Cg2)]) / Ct
        v2 = -np.array([Cg1 * Cg2, Cg2 * (2 * Cc + Cg1), Cg2 * (Cc + Cg1)]) / Ct
        return C, [v1, v2]

    Cg, CJ, Cc, Cr, Cp = (c[k] for k in REQUIRED_CAPS[Topology.ONE_CPB])
    Ct = Cc + Cg + Cp
    C = np.array([
        [Ct * CJ + Cg * (Cc + Cp), Cg * Cp],
        [Cg * Cp, Ct * Cr + Cp * (Cc + Cg)],
    ]) / Ct
    v = np.array([Cg * (Cc + Cp), Cg * Cp]) / Ct
    return C, [v]


def invert_capacitance(C: np.ndarray) -> np.ndarray:
    """Closed-form inverse of a 2x2 or 3x3 symmetric matrix."""
    n = C.shape[0]
    if n == 2:
        det = C[0, 0] * C[1, 1] - C[0, 1] * C[1, 0]
        adj = np.array([[C[1, 1], -C[0, 1]], [-C[1, 0], C[0, 0]]])
    elif n == 3:
        # adjugate via cofactors
        adj = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                rows = [r for r in range(3) if r != j]
                cols = [k for k in range(3) if k != i]
                m = C[np.ix_(rows, cols)]
                adj[i, j] = (-1) ** (i + j) * (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
        det = C[0, 0] * adj[0, 0] + C[0, 1] * adj[1, 0] + C[0, 2] * adj[2, 0]
    else:
        raise ValueError("only 2x2 and 3x3 capacitance matrices are supported")
    if abs(det) <= COND_TOL * abs(np.prod(np.diag(C))):
        raise np.linalg.LinAlgError("capacitance matrix is singular or ill-conditioned")
    return adj / det


def _coupling_capacitance(inv_entry):
    return np.inf if abs(inv_entry) < DECOUPLED_TOL else 1.0 / abs(inv_entry)


@dataclass(frozen=True)
class DerivedParams:
    """Effective circuit quantities. Per-CPB fields are tuples (one entry each)."""

    topology: Topology
    C_J_eff: tuple[float, ...]
    C_r_eff: float
    C_Jr: tuple[float, ...]
    Lr: float
    E_C: tuple[float, ...]
    E_J: tuple[float, ...]
    n_g: tuple[float, ...]
    omega_r: float
    Z_r: float
    gamma: tuple[float, ...]
    g: tuple[float, ...]
    C_12: float | None = None
    g12: float | None = None
    inverse_capacitance: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def g_tilde(self) -> tuple[float, ...]:
        """Two-level coupling g/2."""
        return tuple(x / 2 for x in self.g)

    @property
    def g12_tilde(self) -> float | None:
        """Coefficient of sx1 sx2 in the two-level mediator: g12/4."""
        return None if self.g12 is None else self.g12 / 4

    @property
    def impedance_factor(self) -> float:
        """x = sqrt(Z_r / (2 R_Q))."""
        return np.sqrt(self.Z_r / (2 * const.R_Q))

    def ej_over_ec(self) -> tuple[float, ...]:
        return tuple(ej / ec for ej, ec in zip(self.E_J, self.E_C))


def _coupling(omega_r, gamma, Z_r):
    return omega_r * gamma * np.sqrt(Z_r / (2 * const.R_Q))


def derive_effective_params(spec: CircuitSpec) -> DerivedParams:
    C, _ = build_capacitance_matrix(spec)
    Ci = invert_capacitance(C)
    r = C.shape[0] - 1
    nq = N_QUBITS[spec.topology]
    C_J_eff = tuple(1.0 / Ci[i, i] for i in range(nq))
    C_r_eff = 1.0 / Ci[r, r]
    C_Jr = tuple(_coupling_capacitance(Ci[i, r]) for i in range(nq))
    omega_r = 1.0 / np.sqrt(C_r_eff * spec.Lr)
    Z_r = np.sqrt(spec.Lr / C_r_eff)
    gamma = tuple(C_r_eff / c for c in C_Jr)
    g = tuple(_coupling(omega_r, gm, Z_r) for gm in gamma)
    E_C = tuple(const.e ** 2 / (2 * c) for c in C_J_eff)
    C_12 = g12 = None
    if spec.topology is Topology.TWO_CPB:
        C_12 = _coupling_capacitance(Ci[0, 1])
        g12 = -1.0 / (const.R_Q * C_12)
    return DerivedParams(
        topology=spec.topology,
        C_J_eff=C_J_eff,
        C_r_eff=C_r_eff,
        C_Jr=C_Jr,
        Lr=spec.Lr,
        E_C=E_C,
        E_J=spec.EJ,
        n_g=spec.ng,
        omega_r=omega_r,
        Z_r=Z_r,
        gamma=gamma,
        g=g,
        C_12=C_12,
        g12=g12,
        inverse_capacitance=Ci,
    )


def oscillator_bound(spec: CircuitSpec):
    """Coupling of the transmon-limit (linear LJ) circuit.

    Returns ``(g_o, omega_q, omega_r, ratio)`` with ratio = 2 g_o / sqrt(wq wr),
    which never exceeds one.
    """
    if spec.topology is not Topology.TWO_OSCILLATOR:
        raise ValueError("oscillator_bound needs a two-oscillator spec")
    p = derive_effective_params(spec)
    omega_q = 1.0 / np.sqrt(p.C_J_eff[0] * spec.LJ)
    ratio = np.sqrt(p.C_J_eff[0] * p.C_r_eff) / p.C_Jr[0]
    g_o = 0.5 * ratio * np.sqrt(omega_q * p.omega_r)
    return g_o, omega_q, p.omega_r, ratio


def oscillator_bound_bare(Cg, CJ, Cc, Cr, Cp):
    """gamma_o written directly in the bare capacitances."""
    Ct = Cc + Cg + Cp
    a = 1 + (Cg * Cc + CJ * Ct) / (Cg * Cp)
    b = 1 + (Cp * Cc + Cr * Ct) / (Cg * Cp)
    return np.sqrt(1.0 / (a * b))


def scale_impedance(params: DerivedParams, mu: float) -> DerivedParams:
    """Rescale the resonator to impedance mu * Z_r at fixed omega_r.

    The resonator and coupling capacitances are divided by mu together, so the
    capacitance ratio gamma is unchanged and g grows as sqrt(mu).
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    C_r_eff = params.C_r_eff / mu
    C_Jr = tuple(c / mu for c in params.C_Jr)
    Lr = params.Lr * mu
    Z_r = np.sqrt(Lr / C_r_eff)
    gamma = tuple(C_r_eff / c for c in C_Jr)
    g = tuple(_coupling(params.omega_r, gm, Z_r) for gm in gamma)
    return replace(params, C_r_eff=C_r_eff, C_Jr=C_Jr, Lr=Lr, Z_r=Z_r, gamma=gamma, g=g)


def capacitance_ratio(Cg, CJ, Cc, Cp):
    """gamma for the one-CPB circuit in bare capacitances."""
    return Cg * Cp / (Cg * (Cc + Cp) + CJ * (Cc + Cp + Cg))


def cpb_transition_frequency(E_C, E_J, n_g=0.5, n_max=DEFAULT_N_MAX, n_states=None):
    """First CPB transition (rad/s) and |<e|n|g>| from charge-basis diagonalization.

    With ``n_states`` the Hamiltonian and charge operator are first projected on
    that many lowest eigenstates.
    """
    H = cpb_hamiltonian(E_C, E_J, n_g, n_max).data.real
    vals, vecs = np.linalg.eigh(H)
    n_op = np.arange(-n_max, n_max + 1, dtype=float)
    if n_states is not None:
        V = vecs[:, :n_states]
        Hp = V.T @ H @ V
        vals, w = np.linalg.eigh(Hp)
        vecs = V @ w
    omega_q = (vals[1] - vals[0]) / const.hbar
    element = abs(vecs[:, 1] @ (n_op * vecs[:, 0]))
    return omega_q, element
