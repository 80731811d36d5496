import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from chargeusc.hilbert import (
    Operator,
    charge_operators,
    eigensystem,
    embed,
    fock_annihilation,
    identity,
    pauli,
    tensor,
)
from chargeusc.models import HamiltonianLevelParams, qrm

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
# integer entries keep every product exact in floating point
small_ints = st.integers(-50, 50)


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def cubic_roots_hermitian(A):
    """Eigenvalues of a 3x3 Hermitian matrix via the trigonometric cubic solution."""
    q = np.trace(A).real / 3
    off = abs(A[0, 1]) ** 2 + abs(A[0, 2]) ** 2 + abs(A[1, 2]) ** 2
    p = np.sqrt((sum((A[i, i].real - q) ** 2 for i in range(3)) + 2 * off) / 6)
    B = (A - q * np.eye(3)) / p
    det = (
        B[0, 0] * (B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])
        - B[0, 1] * (B[1, 0] * B[2, 2] - B[1, 2] * B[2, 0])
        + B[0, 2] * (B[1, 0] * B[2, 1] - B[1, 1] * B[2, 0])
    ).real
    phi = np.arccos(np.clip(det / 2, -1, 1)) / 3
    hi = q + 2 * p * np.cos(phi)
    lo = q + 2 * p * np.cos(phi + 2 * np.pi / 3)
    return np.array([lo, 3 * q - hi - lo, hi])


class TestOperator:
    def test_dims_must_multiply(self):
        with pytest.raises(ValueError):
            Operator(np.eye(4), (3, 2))

    def test_non_square(self):
        with pytest.raises(ValueError):
            Operator(np.ones((2, 3)))

    def test_data_is_read_only(self):
        op = identity(2)
        with pytest.raises(ValueError):
            op.data[0, 0] = 5

    def test_scalar_plus_adds_identity(self):
        np.testing.assert_allclose((pauli("z") + 1).data, np.diag([2, 0]))


class TestFock:
    def test_two_levels(self):
        np.testing.assert_array_equal(fock_annihilation(2).data, [[0, 1], [0, 0]])

    def test_truncated_commutator(self):
        n = 7
        a = fock_annihilation(n)
        comm = (a @ a.H - a.H @ a).data
        expected = np.eye(n)
        expected[-1, -1] = 1 - n
        np.testing.assert_allclose(comm, expected, atol=1e-12)

    def test_ladder_element(self):
        assert fock_annihilation(6).data[4, 5] == pytest.approx(np.sqrt(5))

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            fock_annihilation(1)


class TestCharge:
    def test_n_max_one(self):
        n_op, _ = charge_operators(1)
        np.testing.assert_array_equal(n_op.data, np.diag([-1, 0, 1]))

    def test_commutation_away_from_edge(self):
        # E raises the charge by one, so [n, E] = E (equivalently [E, n] = -E)
        n_op, E = charge_operators(4)
        comm = (n_op @ E - E @ n_op).data
        np.testing.assert_allclose(comm, E.data, atol=1e-14)

    def test_raise_annihilates_top_state(self):
        n_op, E = charge_operators(3)
        top = np.zeros(7)
        top[-1] = 1
        np.testing.assert_array_equal(E.data @ top, 0)

    def test_raise_moves_up_one(self):
        _, E = charge_operators(2)
        v = np.zeros(5)
        v[2] = 1  # |n=0>
        np.testing.assert_array_equal(np.abs(E.data @ v), np.eye(5)[3])


class TestTensor:
    def test_identities(self):
        np.testing.assert_array_equal(tensor([identity(2), identity(3)]).data, np.eye(6))

    def test_entry(self):
        T = tensor([pauli("x"), identity(2)])
        # row (0, 1) -> 1, column (1, 1) -> 3
        assert T.data[1, 3] == 1
        assert T.dims == (2, 2)

    def test_embed_matches_tensor(self):
        a = fock_annihilation(3)
        np.testing.assert_array_equal(
            embed(a, 1, (2, 3, 2)).data, tensor([identity(2), a, identity(2)]).data
        )

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (3, 3), elements=finite), arrays(np.float64, (3, 3), elements=finite))
    def test_frobenius_norms_multiply(self, A, B):
        T = tensor([Operator(A), Operator(B)])
        assert np.linalg.norm(T.data) == pytest.approx(np.linalg.norm(A) * np.linalg.norm(B), rel=1e-12, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(
        arrays(np.int64, (2, 2), elements=small_ints),
        arrays(np.int64, (3, 3), elements=small_ints),
        arrays(np.int64, (2, 2), elements=small_ints),
    )
    def test_associative(self, A, B, C):
        A, B, C = Operator(A), Operator(B), Operator(C)
        left = tensor([A, tensor([B, C])])
        right = tensor([tensor([A, B]), C])
        np.testing.assert_array_equal(left.data, right.data)
        assert left.dims == right.dims == (2, 3, 2)


class TestEigensystem:
    def test_sigma_z(self):
        es = eigensystem(pauli("z") * 0.5)
        np.testing.assert_allclose(es.eigenvalues, [-0.5, 0.5])

    def test_decoupled_qrm_degeneracy(self):
        p = HamiltonianLevelParams(1.0, (1.0,), (0.0,))
        es = eigensystem(qrm(p, 10), 4)
        np.testing.assert_allclose(es.eigenvalues - es.eigenvalues[0], [0, 1, 1, 2], atol=1e-12)
        # degenerate pair ordered by lead index: |g,1> (index 1) before |e,0> (index 10)
        leads = np.argmax(np.abs(es.eigenvectors), axis=0)
        assert leads[1] < leads[2]

    @pytest.mark.parametrize("seed", range(10))
    def test_cubic_oracle(self, seed):
        A = random_hermitian(np.random.default_rng(seed), 3)
        np.testing.assert_allclose(eigensystem(A).eigenvalues, cubic_roots_hermitian(A), atol=1e-9)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            eigensystem(np.array([[0, 1], [0, 0]]))

    def test_k_out_of_range(self):
        with pytest.raises(ValueError):
            eigensystem(pauli("z"), 3)

    def test_phase_convention(self):
        es = eigensystem(random_hermitian(np.random.default_rng(1), 6))
        lead = np.argmax(np.abs(es.eigenvectors), axis=0)
        comps = es.eigenvectors[lead, np.arange(6)]
        assert np.all(np.abs(comps.imag) < 1e-14) and np.all(comps.real > 0)

    def test_tiny_energy_scale_not_merged(self):
        # joule-sized spectra must not be treated as degenerate
        es = eigensystem(np.diag([3e-24, 1e-24, 2e-24]))
        np.testing.assert_allclose(es.eigenvalues, [1e-24, 2e-24, 3e-24])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**32 - 1))
    def test_reconstruction_and_orthonormality(self, n, seed):
        H = random_hermitian(np.random.default_rng(seed), n)
        es = eigensystem(H)
        V, lam = es.eigenvectors, es.eigenvalues
        assert np.all(np.diff(lam) >= 0)
        np.testing.assert_allclose(V.conj().T @ V, np.eye(n), atol=1e-10)
        assert np.abs(V @ np.diag(lam) @ V.conj().T - H).max() <= 1e-9 * np.abs(H).max()

    def test_bitwise_reproducible(self):
        H = random_hermitian(np.random.default_rng(7), 5)
        a, b = eigensystem(H), eigensystem(H)
        np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)
