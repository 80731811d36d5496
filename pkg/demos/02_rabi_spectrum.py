# %% [markdown]
# # Where the two-level model departs from the Rabi model
#
# Truncating the CPB to two levels leaves a displacement term proportional to
# the identity on the qubit. It breaks parity symmetry. At weak coupling the
# spectrum matches the quantum Rabi model (QRM). Deep in the ultrastrong
# regime it does not.

# %%
import numpy as np

from chargeusc.models import HamiltonianLevelParams, default_n_fock, parity, qrm, two_level_h1
from chargeusc.spectrum import spectrum_sweep

grid = np.round(np.arange(0.0, 1.01, 0.1), 2)
res = spectrum_sweep(grid, n_levels=4)
for g, h1, rabi in zip(grid, res["h1"], res["qrm"]):
    print(f"g/wr={g:.1f}  max |H1 - QRM| = {np.abs(h1 - rabi).max():.4f} wr")

# %% [markdown]
# Parity commutes with the QRM but not with the two-level CPB model.

# %%
N = default_n_fock(0.3)
prm = HamiltonianLevelParams(1.0, (1.0,), (0.3,))
P = parity(N).data
for name, H in (("QRM", qrm(prm, N).data), ("H1", two_level_h1(prm, N).data)):
    print(name, np.linalg.norm(H @ P - P @ H) / np.linalg.norm(H))
