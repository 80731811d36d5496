# %% [markdown]
# # Searching for a large coupling ratio
#
# Multi-start bounded Nelder-Mead over capacitances, resonator inductance and
# Josephson energy. The objective rewards a large R while keeping the qubit
# resonant with the resonator. A few restarts are enough to see the trend.

# %%
from chargeusc import constants as const
from chargeusc.optimize import minimize, paper_search_space

result = minimize("f1", paper_search_space("one_cpb"), seed=0, restarts=4)
print(f"objective {result.value:.4f} after {result.iterations} evaluations")
print(f"R = {result.ratios[0]:.3f}, wq/wr = {result.betas[0]:.4f}")
for name, value in result.spec.capacitances.items():
    print(f"  {name} = {value / const.fF:.2f} fF")
print(f"  Lr = {result.spec.Lr / const.nH:.1f} nH")
