import math

import numpy as np
import pytest

from lrvp.errors import ReductionError, SingularChannelError
from lrvp.lattice import (
    PerturbationProblem,
    ReducedLattice,
    complex_to_real,
    lll_reduce,
    perturbed_norm_sq,
    pseudo_inverse,
    real_to_complex_vector,
    reduce_problem,
    unimodular_det,
)
from lrvp.mimo import gamma, make_constellation, random_symbols, theta


def random_channel(rng, nr, nt=None):
    nt = nr if nt is None else nt
    return (rng.standard_normal((nr, nt)) + 1j * rng.standard_normal((nr, nt))) / math.sqrt(2)


def gs_data(f):
    # independent Gram-Schmidt oracle via QR
    _, r = np.linalg.qr(f)
    n = f.shape[1]
    bsq = np.diag(r) ** 2
    mu = np.zeros((n, n))
    for i in range(n):
        for j in range(i):
            mu[i, j] = r[j, i] / r[j, j]
    return mu, bsq


def assert_reduced(lat: ReducedLattice, delta=0.75):
    f, g, z, zi = lat.F, lat.G, lat.Z, lat.Z_inv
    n = f.shape[1]
    scale = 1.0 + np.linalg.norm(g)
    assert np.max(np.abs(f - g @ z)) <= 1e-9 * scale
    assert np.array_equal(z @ zi, np.eye(n, dtype=np.int64))
    assert abs(unimodular_det(z)) == 1
    assert np.linalg.norm(f) <= np.linalg.norm(g) + 1e-9 * scale
    mu, bsq = gs_data(f)
    assert np.max(np.abs(np.tril(mu, -1))) <= 0.5 + 1e-9
    for k in range(1, n):
        assert bsq[k] >= (delta - mu[k, k - 1] ** 2) * bsq[k - 1] - 1e-9 * bsq[k - 1]


class TestComplexToReal:
    def test_scalar_i(self):
        out = complex_to_real(np.array([[1j]]))
        assert np.allclose(out, [[0.0, -1.0], [1.0, 0.0]])

    def test_known_product(self):
        a = np.array([[1 + 1j]])
        b = np.array([[1 - 1j]])
        lhs = complex_to_real(a @ b)
        rhs = complex_to_real(a) @ complex_to_real(b)
        assert np.allclose(lhs, rhs)
        assert np.allclose(lhs, 2 * np.eye(2))

    def test_vector_norm_preserved(self):
        v = complex_to_real(np.array([3 + 4j]))
        assert np.allclose(v, [3.0, 4.0])
        assert np.linalg.norm(v) == pytest.approx(5.0)

    def test_homomorphism_random(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = random_channel(rng, 3)
            b = random_channel(rng, 3)
            assert np.allclose(
                complex_to_real(a @ b), complex_to_real(a) @ complex_to_real(b), atol=1e-10
            )

    def test_det_is_squared_modulus(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m = random_channel(rng, 3)
            det_r = np.linalg.det(complex_to_real(m))
            assert det_r >= 0
            assert det_r == pytest.approx(abs(np.linalg.det(m)) ** 2, rel=1e-9)

    def test_vector_round_trip(self):
        v = np.array([1 + 2j, -3 + 0.5j])
        assert np.allclose(real_to_complex_vector(complex_to_real(v)), v)


class TestPseudoInverse:
    def test_identity(self):
        assert np.allclose(pseudo_inverse(np.eye(3, dtype=complex)), np.eye(3))

    def test_diagonal(self):
        g = pseudo_inverse(np.diag([2.0 + 0j, 4.0]))
        assert np.allclose(g, np.diag([0.5, 0.25]))

    def test_random_right_inverse(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            h = random_channel(rng, 4)
            g = pseudo_inverse(h)
            assert np.linalg.norm(h @ g - np.eye(4)) < 1e-9

    def test_rectangular_right_inverse(self):
        rng = np.random.default_rng(3)
        h = random_channel(rng, 3, 5)
        g = pseudo_inverse(h)
        assert g.shape == (5, 3)
        assert np.linalg.norm(h @ g - np.eye(3)) < 1e-9

    def test_singular_raises(self):
        a = np.outer(np.ones(3), np.arange(1, 5)).astype(complex)
        with pytest.raises(SingularChannelError):
            pseudo_inverse(a)


class TestLLL:
    def test_identity_already_reduced(self):
        lat = lll_reduce(np.eye(4))
        assert np.allclose(lat.F, np.eye(4))
        assert np.array_equal(lat.Z, np.eye(4, dtype=np.int64))

    def test_classic_2d_example(self):
        g = np.array([[1.0, 2.0], [1.0, 1.0]])  # columns (1,1), (2,1)
        lat = lll_reduce(g)
        assert_reduced(lat)
        assert np.all((lat.F**2).sum(axis=0) <= 2.0 + 1e-12)
        assert abs(np.linalg.det(lat.F)) == pytest.approx(abs(np.linalg.det(g)), rel=1e-9)

    def test_random_channel_suite(self):
        rng = np.random.default_rng(4)
        for nr in (2, 3, 5, 8):
            for _ in range(10):
                g = complex_to_real(pseudo_inverse(random_channel(rng, nr)))
                assert_reduced(lll_reduce(g))

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            lll_reduce(np.eye(2), delta=1.5)

    def test_basis_equivalence(self):
        rng = np.random.default_rng(5)
        g = complex_to_real(pseudo_inverse(random_channel(rng, 4)))
        lat = lll_reduce(g)
        for _ in range(20):
            v = rng.integers(-5, 6, size=8)
            assert np.allclose(lat.F @ (lat.Z_inv @ v), g @ v, atol=1e-9 * (1 + np.linalg.norm(g)))


class TestReduceProblem:
    def test_identity_lattice_in_range(self):
        tau = 4.0
        lat = lll_reduce(np.eye(4))
        u = np.array([0.5 + 0.25j, -1.0 - 1.5j])
        prob = reduce_problem(lat, u, tau)
        u_real = complex_to_real(u)
        assert np.allclose(prob.u_pp, u_real + tau)
        assert np.array_equal(prob.t, np.ones(4, dtype=np.int64))

    def test_lrzfp_point_is_folded_vector(self):
        rng = np.random.default_rng(6)
        const = make_constellation(16)
        g = complex_to_real(pseudo_inverse(random_channel(rng, 3)))
        lat = lll_reduce(g)
        u = random_symbols(const, 3, rng)
        prob = reduce_problem(lat, u, const.tau)
        x = prob.F @ (prob.u_pp - const.tau * prob.t)
        u_prime = gamma(lat.Z_inv @ complex_to_real(u), const.tau)
        assert np.allclose(x, prob.F @ u_prime, atol=1e-12)

    def test_perturbation_identity_oracle(self):
        # F(u' - tau l') must equal G(u_real - tau l_real) for the derived
        # correspondence l' = Z_inv l_real - theta(w)/tau, for any integer l
        rng = np.random.default_rng(7)
        const = make_constellation(64)
        h = random_channel(rng, 4)
        g = complex_to_real(pseudo_inverse(h))
        lat = lll_reduce(g)
        u = random_symbols(const, 4, rng)
        tau = const.tau
        u_real = complex_to_real(u)
        w = lat.Z_inv @ u_real
        u_prime = gamma(w, tau)
        shift = np.round(theta(w, tau) / tau).astype(np.int64)
        for _ in range(100):
            l_real = rng.integers(-3, 4, size=8)
            l_prime = lat.Z_inv @ l_real - shift
            lhs = np.linalg.norm(lat.F @ (u_prime - tau * l_prime))
            rhs = np.linalg.norm(g @ (u_real - tau * l_real))
            assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + rhs))

    def test_modulo_correctness(self):
        # receiver folds away any perturbation: H_real F (u'' - tau l'') = u_real mod tau
        rng = np.random.default_rng(8)
        const = make_constellation(16)
        for _ in range(5):
            h = random_channel(rng, 3)
            h_real = complex_to_real(h)
            lat = lll_reduce(complex_to_real(pseudo_inverse(h)))
            u = random_symbols(const, 3, rng)
            prob = reduce_problem(lat, u, const.tau)
            u_real = complex_to_real(u)
            for _ in range(10):
                l_pp = rng.integers(-2, 5, size=6)
                folded = h_real @ prob.F @ (prob.u_pp - const.tau * l_pp)
                assert np.max(np.abs(gamma(folded - u_real, const.tau))) < 1e-6

    def test_dimension_mismatch(self):
        lat = lll_reduce(np.eye(4))
        with pytest.raises(ValueError):
            reduce_problem(lat, np.zeros(3, complex), 4.0)


class TestUnimodularDet:
    def test_known_values(self):
        assert unimodular_det(np.eye(3, dtype=np.int64)) == 1
        m = np.array([[2, 1], [1, 1]], dtype=np.int64)
        assert unimodular_det(m) == 1
        assert unimodular_det(np.array([[0, 1], [1, 0]], dtype=np.int64)) == -1
        assert unimodular_det(np.array([[2, 0], [0, 3]], dtype=np.int64)) == 6
        assert unimodular_det(np.zeros((2, 2), dtype=np.int64)) == 0

    def test_matches_float_det(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            m = rng.integers(-4, 5, size=(5, 5))
            assert unimodular_det(m) == pytest.approx(np.linalg.det(m), abs=0.5)
