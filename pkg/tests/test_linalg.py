import numpy as np
import pytest

from instability import linalg as la
from instability.errors import ValidationError
from instability.sampling import random_density, random_full_rank_density, random_hermitian


class TestEigh:
    def test_diagonal(self):
        w, v = la.eigh(np.diag([2.0, 1.0]).astype(complex))
        assert np.allclose(w, [1.0, 2.0])
        assert np.allclose(np.abs(v), [[0, 1], [1, 0]])

    def test_pauli_x(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        w, v = la.eigh(x)
        assert np.allclose(w, [-1.0, 1.0])
        # columns proportional to (1, -1)/sqrt(2) and (1, 1)/sqrt(2)
        for col, sign in zip(v.T, (-1, 1)):
            col = col / col[0]
            assert np.allclose(col, [1, sign])

    def test_reconstruction_property(self, rng):
        for _ in range(1000):
            d = int(rng.integers(2, 17))
            h = random_hermitian(d, rng)
            w, v = la.eigh(h)
            scale = max(np.abs(w).max(), 1e-300)
            assert la.spectral_norm((v * w) @ v.conj().T - h) <= 1e-10 * d * scale
            assert la.spectral_norm(v.conj().T @ v - np.eye(d)) <= 1e-10 * d
            assert np.all(np.diff(w) >= -1e-14 * scale)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            la.eigh(np.array([[0, 1], [0, 0]], dtype=complex))


class TestMatPow:
    def test_scalar_matrix(self):
        assert np.allclose(la.mat_pow(np.eye(2) / 4, 0.5), np.eye(2) / 2)

    def test_support_pseudo_inverse(self):
        out = la.mat_pow(np.diag([4.0, 0.0]).astype(complex), -1.0)
        assert np.allclose(out, np.diag([0.25, 0.0]))

    def test_cube_root_roundtrip(self, rng):
        rho = random_density(3, rng)
        root = la.mat_pow(rho, 1.0 / 3.0)
        assert np.abs(root @ root @ root - rho).max() <= 1e-9

    def test_semigroup(self, rng):
        for _ in range(50):
            p = random_full_rank_density(4, rng, 0.1)
            a, b = rng.uniform(0.1, 2.0, size=2)
            assert (
                np.abs(la.mat_pow(p, a + b) - la.mat_pow(p, a) @ la.mat_pow(p, b)).max()
                <= 1e-9
            )

    def test_zero_power_is_support_projector(self):
        proj = la.mat_pow(np.diag([0.5, 0.0, 0.5]).astype(complex), 0.0)
        assert np.allclose(proj, np.diag([1.0, 0.0, 1.0]))

    def test_rejects_indefinite(self):
        with pytest.raises(ValidationError):
            la.mat_pow(np.diag([1.0, -1.0]).astype(complex), 0.5)


class TestSchattenNorm:
    def test_operator_norm(self):
        assert la.schatten_norm(np.eye(2) / 2, np.inf) == pytest.approx(0.5)

    def test_pythagorean(self):
        assert la.schatten_norm(np.diag([3.0, 4.0]).astype(complex), 2) == pytest.approx(5.0)

    def test_quasi_norm(self):
        # (1^{1/2} + 1^{1/2})^2 = 4
        assert la.schatten_norm(np.eye(2, dtype=complex), 0.5) == pytest.approx(4.0)

    def test_order_monotonicity(self, rng):
        for _ in range(100):
            x = random_hermitian(int(rng.integers(2, 8)), rng)
            n1 = la.schatten_norm(x, 1)
            n2 = la.schatten_norm(x, 2)
            ninf = la.schatten_norm(x, np.inf)
            assert n1 >= n2 - 1e-12 and n2 >= ninf - 1e-12

    def test_rejects_bad_order(self):
        with pytest.raises(ValidationError):
            la.schatten_norm(np.eye(2), 0.25)


class TestTensorAndPartialTrace:
    def test_roundtrip_product(self):
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.eye(2, dtype=complex) / 2
        prod = la.tensor_product(a, b)
        assert np.allclose(la.partial_trace(prod, [2, 2], keep=[0]), a)

    def test_marginals_of_maximally_entangled(self):
        v = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        phi = np.outer(v, v.conj())
        for keep in ([0], [1]):
            assert np.allclose(la.partial_trace(phi, [2, 2], keep), np.eye(2) / 2)

    def test_trace_preserved(self, rng):
        for _ in range(20):
            x = random_hermitian(12, rng)
            pt = la.partial_trace(x, [2, 3, 2], keep=[1])
            assert np.trace(pt) == pytest.approx(np.trace(x).real)

    def test_exact_on_products(self, rng):
        a = random_hermitian(2, rng)
        b = random_hermitian(3, rng)
        prod = la.tensor_product(a, b)
        back = la.partial_trace(prod, [2, 3], keep=[0]) / np.trace(b).real
        assert np.abs(back - a).max() <= 1e-12

    def test_ordering_left_significant(self):
        a = np.diag([1.0, 2.0]).astype(complex)
        b = np.diag([3.0, 4.0]).astype(complex)
        assert np.allclose(np.diag(la.tensor_product(a, b)), [3, 4, 6, 8])

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            la.partial_trace(np.eye(6, dtype=complex), [2, 2], keep=[0])


class TestTraceDistance:
    def test_identical(self, rng):
        rho = random_density(3, rng)
        assert la.trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)

    def test_orthogonal_pure(self):
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.diag([0.0, 1.0]).astype(complex)
        assert la.trace_distance(a, b) == pytest.approx(1.0)

    def test_classical_total_variation(self):
        a = np.diag([0.7, 0.3]).astype(complex)
        b = np.diag([0.5, 0.5]).astype(complex)
        assert la.trace_distance(a, b) == pytest.approx(0.2)


class TestValidators:
    def test_density_checks(self, rng):
        la.check_density(random_density(4, rng))
        with pytest.raises(ValidationError):
            la.check_density(np.diag([0.5, 0.6]).astype(complex))
        with pytest.raises(ValidationError):
            la.check_density(np.diag([1.5, -0.5]).astype(complex))

    def test_effect_checks(self):
        la.check_effect(np.diag([0.0, 1.0]).astype(complex))
        with pytest.raises(ValidationError):
            la.check_effect(np.diag([1.2, 0.3]).astype(complex))
