"""Coupling figures of merit and bounded Nelder-Mead search over circuit values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from . import constants as const
from .circuit import (
    CircuitSpec,
    DerivedParams,
    Topology,
    capacitance_ratio,
    cpb_transition_frequency,
    derive_effective_params,
)

N_MAX_OBJECTIVE = 10
SIMPLEX_STEP = 0.05
FATOL = 1e-10
MAX_ITERS = 2000


def coupling_ratio(derived: DerivedParams, omega_q: float, qubit: int = 0) -> float:
    """R = 2 g~ / sqrt(omega_r omega_q) = g / sqrt(omega_r omega_q)."""
    if not omega_q > 0:
        raise ValueError("omega_q must be positive")
    return derived.g[qubit] / math.sqrt(derived.omega_r * omega_q)


def coupling_ratio_circuit(derived: DerivedParams, qubit: int = 0) -> float:
    """Circuit form (1/C_Jr) sqrt(C_r / (2 R_Q E_J)), E_J as an angular frequency."""
    ej = derived.E_J[qubit] / const.hbar
    return math.sqrt(derived.C_r_eff / (2 * const.R_Q * ej)) / derived.C_Jr[qubit]


def resonant_ratio(spec: CircuitSpec):
    """R_res = gamma * x for the one-CPB circuit, gamma from bare capacitances.

    Raises if gamma disagrees with the matrix-inversion value C_r/C_Jr.
    """
    if spec.topology is not Topology.ONE_CPB:
        raise ValueError("resonant_ratio is defined for the one-CPB circuit")
    c = spec.capacitances
    gamma = capacitance_ratio(c["Cg"], c["CJ"], c["Cc"], c["Cp"])
    p = derive_effective_params(spec)
    if not math.isclose(gamma, p.gamma[0], rel_tol=1e-9, abs_tol=1e-300):
        raise ArithmeticError(f"capacitance ratio mismatch: {gamma} vs {p.gamma[0]}")
    x = p.impedance_factor
    return gamma * x, gamma, x


def _qubit_term(g, element, omega_q, omega_r):
    d_plus = omega_q + omega_r
    d_minus = omega_q - omega_r
    return (g * element / d_plus) * (1 - 2 * abs(d_minus) / d_plus)


def qubit_figures(derived: DerivedParams, n_max: int = N_MAX_OBJECTIVE):
    """Per-CPB (omega_q, |<e|n|g>|) from the charge-basis spectrum."""
    return [
        cpb_transition_frequency(derived.E_C[i], derived.E_J[i], derived.n_g[i], n_max)
        for i in range(len(derived.E_J))
    ]


def objective_f1(spec: CircuitSpec, n_max: int = N_MAX_OBJECTIVE) -> float:
    """1 - (g |<e|n|g>| / D+) [1 - 2|D-|/D+] for the one-CPB circuit."""
    p = derive_effective_params(spec)
    (wq, element), = qubit_figures(p, n_max)
    return 1.0 - _qubit_term(p.g[0], element, wq, p.omega_r)


def objective_f2(spec: CircuitSpec, n_max: int = N_MAX_OBJECTIVE) -> float:
    """Two-CPB objective with the direct-coupling penalty f12 = 1 - |g12|/(wq1 + wq2).

    When any qubit's resonance bracket is negative the product's magnitude is
    added instead of subtracted, so two far-detuned qubits cannot cancel signs.
    """
    if spec.topology is not Topology.TWO_CPB:
        raise ValueError("objective_f2 needs a two-CPB spec")
    p = derive_effective_params(spec)
    figs = qubit_figures(p, n_max)
    terms = [_qubit_term(p.g[i], el, wq, p.omega_r) for i, (wq, el) in enumerate(figs)]
    f12 = 1.0 - abs(p.g12) / (figs[0][0] + figs[1][0])
    prod = f12 * terms[0] * terms[1]
    if any(t < 0 for t in terms):
        return 1.0 + abs(prod)
    return 1.0 - prod


OBJECTIVES: dict[str, Callable[[CircuitSpec], float]] = {"f1": objective_f1, "f2": objective_f2}

LOG_SCALED = ("C", "L")


@dataclass(frozen=True)
class SearchSpace:
    """Box bounds (SI) on free circuit elements around a template spec.

    Every element of ``template`` not named in ``bounds`` stays fixed. Names
    starting with C or L are searched in log space.
    """

    template: CircuitSpec
    bounds: Mapping[str, tuple[float, float]]

    def __post_init__(self):
        known = self.template.free_values()
        for name, (lo, hi) in self.bounds.items():
            if name not in known:
                raise ValueError(f"unknown parameter {name!r}")
            if not lo < hi:
                raise ValueError(f"bounds for {name} must satisfy lower < upper")
            if name.startswith(LOG_SCALED) and lo <= 0:
                raise ValueError(f"log-scaled parameter {name} needs a positive lower bound")

    @property
    def names(self) -> list[str]:
        return list(self.bounds)

    def _is_log(self, name):
        return name.startswith(LOG_SCALED)

    def to_unit(self, name, value):
        return math.log(value) if self._is_log(name) else value

    def from_unit(self, name, u):
        return math.exp(u) if self._is_log(name) else u

    def unit_bounds(self):
        return [(self.to_unit(n, lo), self.to_unit(n, hi)) for n, (lo, hi) in self.bounds.items()]

    def spec_at(self, u) -> CircuitSpec:
        values = {}
        for name, ui, (lo, hi) in zip(self.names, u, self.bounds.values()):
            values[name] = min(max(self.from_unit(name, ui), lo), hi)
        return self.template.with_values(**values)


def paper_search_space(topology: Topology | str = Topology.ONE_CPB) -> SearchSpace:
    """Capacitances in [0.11, 550] fF, Lr in [100, 600] nH, E_J/h in [6, 11] GHz."""
    topology = Topology(topology)
    cap = (0.11 * const.fF, 550 * const.fF)
    ind = (100 * const.nH, 600 * const.nH)
    ej = (float(const.ghz_to_joule(6.0)), float(const.ghz_to_joule(11.0)))
    mid = float(const.ghz_to_joule(8.0))
    if topology is Topology.ONE_CPB:
        template = CircuitSpec.one_cpb(1e-15, 1e-15, 1e-15, 1e-15, 1e-15, 2e-7, mid)
        bounds = {k: cap for k in ("Cg", "CJ", "Cc", "Cr", "Cp")} | {"Lr": ind, "EJ": ej}
    elif topology is Topology.TWO_CPB:
        template = CircuitSpec.two_cpb(1e-15, 1e-15, 1e-15, 1e-15, 1e-15, 1e-15, 2e-7, mid, mid)
        caps = ("Cg1", "CJ1", "Cg2", "CJ2", "Cc", "Cr")
        bounds = {k: cap for k in caps} | {"Lr": ind, "EJ1": ej, "EJ2": ej}
    else:
        raise ValueError("no objective is defined for the two-oscillator circuit")
    return SearchSpace(template, bounds)


@dataclass
class OptimizationResult:
    spec: CircuitSpec
    value: float
    derived: DerivedParams
    ratios: tuple[float, ...]
    betas: tuple[float, ...]
    iterations: int
    restarts: int
    seed: int
    restart_values: list[float] = field(default_factory=list)
    best_so_far: list[float] = field(default_factory=list)


def _safe(objective, spec):
    try:
        val = float(objective(spec))
    except (ValueError, ArithmeticError, np.linalg.LinAlgError):
        return math.inf
    return val if math.isfinite(val) else math.inf


def minimize(
    objective,
    space: SearchSpace,
    seed: int = 0,
    restarts: int = 32,
    max_iters: int = MAX_ITERS,
    fatol: float = FATOL,
    on_evaluate: Callable[[CircuitSpec], None] | None = None,
) -> OptimizationResult:
    """Multi-start bounded Nelder-Mead over ``space``.

    ``objective`` is a callable on ``CircuitSpec`` or a key of ``OBJECTIVES``.
    Restart ``i`` draws its start uniformly (in search coordinates) from an RNG
    spawned from ``seed``; the lowest value wins, ties go to the lower index.
    """
    if isinstance(objective, str):
        objective = OBJECTIVES[objective]

    def evaluate(spec):
        if on_evaluate is not None:
            on_evaluate(spec)
        return _safe(objective, spec)

    ub = np.array(space.unit_bounds(), dtype=float).reshape(-1, 2)
    n = len(space.names)

    if n == 0:
        spec = space.template
        return _result(spec, evaluate(spec), 0, 1, seed, [], [])

    streams = np.random.SeedSequence(seed).spawn(restarts)
    best_u, best_val, total_iters = None, math.inf, 0
    restart_values, best_so_far = [], []
    for stream in streams:
        rng = np.random.default_rng(stream)
        u0 = rng.uniform(ub[:, 0], ub[:, 1])
        width = ub[:, 1] - ub[:, 0]
        simplex = np.tile(u0, (n + 1, 1))
        for i in range(n):
            step = SIMPLEX_STEP * width[i]
            simplex[i + 1, i] += step if u0[i] + step <= ub[i, 1] else -step
        # a simplex of +inf scores makes scipy's spread check compute inf - inf
        with np.errstate(invalid="ignore"):
            res = _nelder_mead(lambda u: evaluate(space.spec_at(u)), u0, ub, simplex, max_iters, n, fatol)
        total_iters += int(res.nit)
        val = float(res.fun)
        restart_values.append(val)
        if val < best_val:
            best_val, best_u = val, np.array(res.x)
        best_so_far.append(best_val)

    if best_u is None:
        raise ArithmeticError("objective was non-finite at every evaluated point")
    spec = space.spec_at(best_u)
    return _result(spec, _safe(objective, spec), total_iters, restarts, seed, restart_values, best_so_far)


def _nelder_mead(fun, u0, ub, simplex, max_iters, n, fatol):
    return _scipy_minimize(
        fun,
        u0,
        method="Nelder-Mead",
        bounds=[tuple(b) for b in ub],
        options=dict(
            initial_simplex=simplex,
            maxiter=max_iters,
            maxfev=max_iters * (n + 1),
            xatol=np.inf,
            fatol=fatol,
            adaptive=False,
        ),
    )


def _result(spec, value, iterations, restarts, seed, restart_values, best_so_far):
    p = derive_effective_params(spec)
    figs = qubit_figures(p)
    ratios = tuple(coupling_ratio(p, wq, i) for i, (wq, _) in enumerate(figs))
    betas = tuple(wq / p.omega_r for wq, _ in figs)
    return OptimizationResult(
        spec=spec,
        value=value,
        derived=p,
        ratios=ratios,
        betas=betas,
        iterations=iterations,
        restarts=restarts,
        seed=seed,
        restart_values=restart_values,
        best_so_far=best_so_far,
    )
