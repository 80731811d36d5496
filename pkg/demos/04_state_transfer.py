# %% [markdown]
# # Moving an excitation through a forbidden transition
#
# Two transmons sit on a transition of the ultrastrong mediator whose dipole
# matrix element vanishes. The mediator stays in its ground state while the
# excitation hops between the transmons. First the closed system, then the
# Lindblad dynamics with thermal noise at 50 mK. This takes about 20 s.

# %%
from chargeusc import constants as const
from chargeusc.dynamics import NoiseSpec, QSTConfig, simulate_qst, simulate_qst_unitary

closed = simulate_qst_unitary(QSTConfig(g_ratio=0.3, transmon_levels=3))
print(f"forbidden pair {closed.setup.forbidden}, transmon at {const.rad_to_ghz(closed.setup.omega_01):.3f} GHz")
print(f"closed system: population {closed.peak:.3f} at {closed.t_peak / const.ns:.2f} ns")

# %%
noisy = simulate_qst(QSTConfig(g_ratio=0.3), NoiseSpec.paper(0.05))
print(f"open system: fidelity {noisy.peak:.3f} at {noisy.t_peak / const.ns:.2f} ns")
traj = noisy.trajectory
for t, f in list(zip(traj.times, traj["fidelity"]))[::200]:
    print(f"  {t / const.ns:6.2f} ns  {f:.3f}")
