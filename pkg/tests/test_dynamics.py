import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from chargeusc import constants as const
from chargeusc.dynamics import (
    IntegrationError,
    LindbladGenerator,
    NoiseSpec,
    QSTConfig,
    Trajectory,
    build_lindblad,
    dressed_rates,
    evolve,
    evolve_unitary,
    find_transfer_time,
    qst_fidelity,
    setup_qst,
    simulate_qst,
    thermal_occupation,
    thermal_state,
)
from chargeusc.hilbert import Operator, pauli
from chargeusc.models import HamiltonianLevelParams, mediator_operators, usc_mediator
from chargeusc.spectrum import dress

WR = 2 * np.pi * 8.13e9


def mediator(g, wq=(WR, WR), K=10, N=20):
    p = HamiltonianLevelParams(WR, wq, (g * WR, g * WR))
    return dress(usc_mediator(p, N), mediator_operators(N), K), p


@pytest.fixture(scope="module")
def qst03():
    return setup_qst(QSTConfig(g_ratio=0.3))


class TestThermal:
    def test_zero_temperature(self):
        assert thermal_occupation(1e10, 0.0) == 0

    def test_unit_ratio(self):
        T = 0.05
        delta = const.k_B * T / const.hbar
        assert thermal_occupation(delta, T) == pytest.approx(1 / (np.e - 1), rel=1e-12)

    def test_thermal_frequency(self):
        assert NoiseSpec(T=0.05).omega_T / (2 * np.pi * const.GHz) == pytest.approx(1.042, abs=5e-4)

    @pytest.mark.parametrize("delta", [0.0, -1.0])
    def test_nonpositive_gap(self, delta):
        with pytest.raises(ValueError):
            thermal_occupation(delta, 0.05)

    def test_ground_state_at_zero_temperature(self):
        ds, _ = mediator(0.3)
        rho = thermal_state(ds, 0.0)
        assert rho[0, 0] == 1 and np.trace(rho) == 1

    @pytest.mark.parametrize("T", [0.01, 0.05, 0.1, 1.0, 10.0])
    def test_trace_and_expm_oracle(self, T):
        ds, _ = mediator(0.3)
        rho = thermal_state(ds, T)
        assert abs(np.trace(rho) - 1) < 1e-12
        beta_H = const.hbar * np.diag(ds.ground_referenced()) / (const.k_B * T)
        ref = scipy.linalg.expm(-beta_H)
        ref /= np.trace(ref)
        np.testing.assert_allclose(rho, ref, atol=1e-10)

    def test_needs_two_levels(self):
        ds, _ = mediator(0.3, K=1)
        with pytest.raises(ValueError):
            thermal_state(ds, 0.05)


class TestRates:
    def test_zero_bare_rates(self):
        ds, p = mediator(0.3)
        r = dressed_rates(ds, NoiseSpec(T=0.05), WR, p.omega_q)
        for arr in (r.kappa, r.gamma, r.phi, r.phi_diag):
            assert np.all(arr == 0)

    def test_uncoupled_photon_ladder(self):
        # distinct bare levels (relative): 0, wr, 1.3 wr, 1.7 wr, 2 wr, 2.3 wr
        wq = (1.3 * WR, 1.7 * WR)
        ds, p = mediator(0.0, wq=wq, K=6)
        kappa = 1e6
        r = dressed_rates(ds, NoiseSpec(kappa=kappa), WR, wq)
        photons = [0, 1, 0, 0, 2, 1]
        for j in range(6):
            for k in range(j + 1, 6):
                expected = 0.0
                same_qubits = {j, k} in ({0, 1}, {1, 4}, {2, 5})
                if same_qubits:
                    n = min(photons[j], photons[k])
                    expected = kappa * (n + 1) * ds.transition(j, k) / WR
                assert r.kappa[j, k] == pytest.approx(expected, rel=1e-9, abs=1e-9 * kappa)

    def test_forbidden_channel_suppressed(self):
        ds, p = mediator(0.3)
        r = dressed_rates(ds, NoiseSpec(kappa=1e6), WR, p.omega_q)
        assert r.kappa[1, 3] < 1e-6 * r.kappa[0, 1]

    def test_degenerate_levels_rejected(self):
        ds, p = mediator(0.0)
        with pytest.raises(ArithmeticError):
            dressed_rates(ds, NoiseSpec.paper(), WR, p.omega_q)

    def test_noise_spec_validation(self):
        with pytest.raises(ValueError):
            NoiseSpec(kappa=-1.0)
        with pytest.raises(ValueError):
            NoiseSpec(T=-0.01)


class TestLindblad:
    def test_zero_temperature_has_no_heating(self, qst03):
        gen = build_lindblad(qst03.H, qst03.dressed, NoiseSpec.paper(0.0), WR, qst03.params.omega_q)
        assert not any(label.startswith("up_") for label in gen.labels)

    def test_detailed_balance(self, qst03):
        T = 0.05
        gen = build_lindblad(qst03.H, qst03.dressed, NoiseSpec.paper(T), WR, qst03.params.omega_q)
        rates = dict(zip(gen.labels, (r for r, _ in gen.channels)))
        pairs = [lbl[3:] for lbl in rates if lbl.startswith("up_")]
        assert pairs
        for jk in pairs:
            j, k = int(jk[0]), int(jk[1])
            ratio = rates[f"up_{jk}"] / rates[f"down_{jk}"]
            expected = np.exp(-const.hbar * qst03.dressed.transition(j, k) / (const.k_B * T))
            assert ratio == pytest.approx(expected, rel=1e-10)

    def test_rates_non_negative(self, qst03):
        gen = build_lindblad(qst03.H, qst03.dressed, NoiseSpec.paper(0.1), WR, qst03.params.omega_q)
        assert all(r >= 0 for r, _ in gen.channels)

    def test_requires_two_level_transmons(self):
        s = setup_qst(QSTConfig(g_ratio=0.3, transmon_levels=3))
        with pytest.raises(ValueError):
            build_lindblad(s.H, s.dressed, NoiseSpec.paper(), WR, s.params.omega_q)

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_superoperator_matches_rhs(self, seed):
        rng = np.random.default_rng(seed)
        n = 4
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        H = Operator(A + A.conj().T)
        channels = [(rng.uniform(0, 2), Operator(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))) for _ in range(3)]
        gen = LindbladGenerator(H, channels)
        B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        rho = B @ B.conj().T
        np.testing.assert_allclose((gen.superoperator() @ rho.reshape(-1)).reshape(n, n), gen.rhs(rho), atol=1e-10)


def qubit_decay(gamma=1.0, omega=3.0):
    return LindbladGenerator(Operator(np.diag([0.0, omega])), [(gamma, Operator(np.array([[0, 1], [0, 0]])))])


class TestEvolve:
    def test_matches_exact_propagator(self):
        gen = qubit_decay()
        rho0 = np.full((2, 2), 0.5, dtype=complex)
        traj = evolve(gen, rho0, 1.0, dt=1e-3, sample_dt=0.1)
        exact = scipy.linalg.expm(gen.superoperator() * 1.0) @ rho0.reshape(-1)
        np.testing.assert_allclose(traj.final_state.reshape(-1), exact, atol=1e-10)

    def test_fourth_order(self):
        gen = qubit_decay()
        rho0 = np.full((2, 2), 0.5, dtype=complex)
        ends = {dt: evolve(gen, rho0, 1.0, dt=dt, sample_dt=1.0).final_state for dt in (0.2, 0.1, 0.05)}
        ref = ends[0.05]
        ratio = np.abs(ends[0.2] - ref).max() / np.abs(ends[0.1] - ref).max()
        assert 8 < ratio < 32

    def test_pure_state_stays_pure_without_noise(self, qst03):
        gen = LindbladGenerator(qst03.H, [])
        psi = qst03.product_state(1, 0, 0)
        traj = evolve(gen, np.outer(psi, psi.conj()), 2e-9, sample_dt=1e-9)
        rho = traj.final_state
        assert abs(np.trace(rho @ rho).real - 1) < 1e-6

    def test_transmons_frozen_without_coupling(self):
        s = setup_qst(QSTConfig(g_ratio=0.3, lambda_ratio=0.0))
        gen = LindbladGenerator(s.H, [])
        rho0 = s.transmon_sector(1, 0, thermal_state(s.dressed, 0.05))
        P = s.transmon_sector(1, 0, np.eye(s.dressed.K))
        traj = evolve(gen, rho0, 5e-9, sample_dt=0.5e-9, observables={"p": P})
        assert np.abs(traj["p"] - 1).max() < 1e-8

    def test_step_too_large(self, qst03):
        gen = build_lindblad(qst03.H, qst03.dressed, NoiseSpec.paper(), WR, qst03.params.omega_q)
        rho0 = qst03.transmon_sector(1, 0, thermal_state(qst03.dressed, 0.05))
        # RK4 goes unstable well before 20 ps at these frequencies; the decay drags the trace
        with pytest.raises(IntegrationError):
            evolve(gen, rho0, 1e-9, dt=2e-11)

    def test_rejects_invalid_state(self):
        gen = qubit_decay()
        with pytest.raises(ValueError):
            evolve(gen, np.eye(2), 1.0)
        with pytest.raises(ValueError):
            evolve(gen, np.array([[1.5, 0], [0, -0.5]]), 1.0)


class TestUnitary:
    def test_eigenstate_is_stationary(self, qst03):
        vals, vecs = np.linalg.eigh(qst03.H.data)
        psi = vecs[:, 3]
        traj = evolve_unitary(qst03.H, psi, 2e-9, sample_dt=0.1e-9, projectors={"p": np.outer(psi, psi.conj())})
        assert np.abs(traj["p"] - 1).max() < 1e-8
        assert np.abs(traj["norm"] - 1).max() < 1e-8

    def test_rejects_unnormalized(self, qst03):
        with pytest.raises(ValueError):
            evolve_unitary(qst03.H, 2 * qst03.product_state(0, 0, 0), 1e-9)


class TestFidelityAndPeak:
    def test_orthogonal_sectors(self, qst03):
        rho_th = thermal_state(qst03.dressed, 0.05)
        assert qst_fidelity(qst03.transmon_sector(1, 0, rho_th), qst03.transmon_sector(0, 1, rho_th)) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            qst_fidelity(np.eye(2), np.eye(3))

    def test_monotone_series(self):
        traj = Trajectory(np.arange(5.0), {"fidelity": np.arange(5.0)}, None)
        assert find_transfer_time(traj) == (4.0, 4.0)

    def test_constant_series(self):
        traj = Trajectory(np.arange(5.0), {"fidelity": np.ones(5)}, None)
        assert find_transfer_time(traj) == (0.0, 1.0)

    def test_empty(self):
        with pytest.raises(ValueError):
            find_transfer_time(Trajectory(np.array([]), {"fidelity": np.array([])}, None))


def test_fig6c_inversion_time():
    run = simulate_qst(QSTConfig(g_ratio=0.3), NoiseSpec.paper(0.1))
    t_pop = run.trajectory.times[np.argmax(run.trajectory["pop_0ψ0_1"])]
    assert t_pop / const.ns == pytest.approx(13.41, rel=0.05)
