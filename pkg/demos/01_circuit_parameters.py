# %% [markdown]
# # From capacitances to a coupling ratio
#
# A Cooper-pair box (CPB) galvanically shares a node with an LC resonator.
# Reducing the capacitance network gives the resonator frequency, the CPB
# charging energy and the coupling strength. The coupling ratio
# R = 2 g~ / sqrt(wr wq) can pass 1, which no pair of linear oscillators allows.

# %%
import numpy as np

from chargeusc import constants as const
from chargeusc.circuit import CircuitSpec, derive_effective_params, oscillator_bound
from chargeusc.optimize import qubit_figures
from chargeusc.spectrum import coupling_ratio_circuit

fF, nH = const.fF, const.nH
spec = CircuitSpec.one_cpb(9.67 * fF, 3.96 * fF, 0.14 * fF, 1.07 * fF, 79.53 * fF, 160 * nH,
                           const.ghz_to_joule(6.39))
p = derive_effective_params(spec)
(wq, _), = qubit_figures(p)
_, R, beta = coupling_ratio_circuit(p)
print(f"omega_r/2pi = {const.rad_to_ghz(p.omega_r):.3f} GHz")
print(f"omega_q/2pi = {const.rad_to_ghz(wq):.3f} GHz, EJ/EC = {p.ej_over_ec()[0]:.2f}")
print(f"g~/2pi = {const.rad_to_ghz(p.g_tilde[0]):.3f} GHz, Z_r = {p.Z_r / const.kOhm:.2f} kOhm")
print(f"R = {R:.3f}, wq/wr = {beta:.3f}")

# %% [markdown]
# Swap the junction for a linear inductor and the same capacitances can no
# longer beat the bound. Sampling the whole box shows how close it gets.

# %%
rng = np.random.default_rng(1)
ratios = [
    oscillator_bound(CircuitSpec.two_oscillator(*np.exp(rng.uniform(np.log(0.11), np.log(550), 5)) * fF,
                                                300 * nH, 20 * nH))[3]
    for _ in range(2000)
]
print(f"largest linear-circuit ratio in 2000 draws: {max(ratios):.4f}")
