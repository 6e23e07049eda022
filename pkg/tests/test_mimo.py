import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrvp.mimo import (
    ChannelInstance,
    NoiseModel,
    count_errors,
    detect,
    gamma,
    gamma_complex,
    make_constellation,
    random_symbols,
    theta,
    transmit_receive,
)


class TestConstellation:
    def test_64qam_unnormalized_grid(self):
        const = make_constellation(64)
        # c_max=7, delta=2, tau=16 on the raw grid; stored values carry the scale
        assert const.c_max / const.norm_factor == pytest.approx(7.0)
        assert const.delta / const.norm_factor == pytest.approx(2.0)
        assert const.tau / const.norm_factor == pytest.approx(16.0)

    def test_64qam_norm_factor_from_enumeration(self):
        const = make_constellation(64)
        # oracle: average |point|^2 over the raw odd-integer grid
        raw = const.points / const.norm_factor
        assert np.mean(np.abs(raw) ** 2) == pytest.approx(42.0, abs=1e-12)
        assert const.norm_factor == pytest.approx(1.0 / math.sqrt(42.0))

    def test_4qam_points_and_tau(self):
        const = make_constellation(4)
        expected = {(s_r + 1j * s_i) / math.sqrt(2) for s_r in (-1, 1) for s_i in (-1, 1)}
        assert set(np.round(const.points, 12)) == {complex(round(p.real, 12), round(p.imag, 12)) for p in expected}
        assert const.tau == pytest.approx(4.0 / math.sqrt(2.0))

    @pytest.mark.parametrize("order", [4, 16, 64, 256])
    def test_unit_average_energy(self, order):
        const = make_constellation(order)
        assert np.mean(np.abs(const.points) ** 2) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("order", [4, 16, 64, 256])
    def test_tau_identity_and_grid(self, order):
        const = make_constellation(order)
        assert const.tau == pytest.approx(2.0 * const.c_max + const.delta, abs=1e-15)
        side = const.side
        levels = (2.0 * np.arange(side) - (side - 1)) * const.norm_factor
        assert np.allclose(sorted(set(np.round(const.points.real, 12))), np.round(levels, 12))
        assert np.allclose(sorted(set(np.round(const.points.imag, 12))), np.round(levels, 12))

    def test_gray_bit_map_neighbors_differ_by_one_bit(self):
        const = make_constellation(16)
        side = const.side
        grid = const.bit_map.reshape(side, side)
        for i in range(side):
            for j in range(side - 1):
                assert bin(grid[i, j] ^ grid[i, j + 1]).count("1") == 1
                assert bin(grid[j, i] ^ grid[j + 1, i]).count("1") == 1

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            make_constellation(32)


class TestThetaGamma:
    def test_spec_values(self):
        assert theta(23.0, 16.0) == pytest.approx(16.0)
        assert gamma(23.0, 16.0) == pytest.approx(7.0)
        assert theta(-8.1, 16.0) == pytest.approx(-16.0)
        assert gamma(-8.1, 16.0) == pytest.approx(7.9)

    def test_half_boundary_rounds_up(self):
        assert theta(8.0, 16.0) == pytest.approx(16.0)
        assert gamma(8.0, 16.0) == pytest.approx(-8.0)

    def test_requires_positive_tau(self):
        with pytest.raises(ValueError):
            theta(1.0, 0.0)

    @given(
        x=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
        tau=st.floats(min_value=1e-3, max_value=1e3, allow_nan=False),
    )
    @settings(max_examples=300, deadline=None)
    def test_decomposition_properties(self, x, tau):
        th = float(theta(x, tau))
        ga = float(gamma(x, tau))
        assert th + ga == pytest.approx(x, abs=1e-9 * max(1.0, abs(x)))
        assert -tau / 2 <= ga < tau / 2
        assert abs(th / tau - round(th / tau)) < 1e-9


class TestTransmitReceive:
    def _zf_setup(self, order, nr, seed):
        rng = np.random.default_rng(seed)
        const = make_constellation(order)
        h = (rng.standard_normal((nr, nr)) + 1j * rng.standard_normal((nr, nr))) / math.sqrt(2)
        chan = ChannelInstance(H=h, G=np.linalg.inv(h))
        u = random_symbols(const, nr, rng)
        return const, chan, u

    def test_noiseless_round_trip(self):
        const, chan, u = self._zf_setup(64, 6, seed=0)
        x = chan.G @ u
        detected = transmit_receive(chan, x, u, NoiseModel(rho=math.inf), const)
        assert count_errors(detected, u) == (0, 6)

    def test_identity_channel_zero_noise(self):
        const = make_constellation(4)
        chan = ChannelInstance(H=np.eye(1, dtype=complex), G=np.eye(1, dtype=complex))
        u = const.points[:1]
        detected = transmit_receive(chan, u, u, NoiseModel(rho=100.0), const, noise_vector=np.zeros(1, complex))
        assert detected[0] == pytest.approx(u[0])

    def test_wraparound_past_boundary(self):
        # push the corner symbol's real part past tau/2: detection wraps to the
        # opposite edge, exactly as the gamma arithmetic predicts
        const = make_constellation(4)
        chan = ChannelInstance(H=np.eye(1, dtype=complex), G=np.eye(1, dtype=complex))
        u = np.array([const.c_max + 1j * const.c_max])
        rho = 50.0
        displacement = (const.tau / 2 - const.c_max) * 1.5
        noise = displacement * math.sqrt(rho / float(np.vdot(u, u).real))
        detected = transmit_receive(
            chan, u, u, NoiseModel(rho=rho), const, noise_vector=np.array([noise + 0j])
        )
        expected = detect(gamma_complex(u + displacement, const.tau), const)
        assert detected[0] == pytest.approx(expected[0])
        assert detected[0].real == pytest.approx(-const.c_max)
        assert detected[0].imag == pytest.approx(const.c_max)

    def test_zero_norm_rejected(self):
        const = make_constellation(4)
        chan = ChannelInstance(H=np.eye(1, dtype=complex), G=np.eye(1, dtype=complex))
        with pytest.raises(ValueError):
            transmit_receive(chan, np.zeros(1, complex), const.points[:1], NoiseModel(rho=10.0), const)

    def test_noise_is_reproducible_per_seed(self):
        const, chan, u = self._zf_setup(16, 4, seed=3)
        x = chan.G @ u
        noise = NoiseModel(rho=10.0, rng_seed=99)
        a = transmit_receive(chan, x, u, noise, const)
        b = transmit_receive(chan, x, u, noise, const)
        assert np.array_equal(a, b)


class TestCountErrors:
    def test_identical(self):
        s = np.array([1 + 1j, -1 - 1j])
        assert count_errors(s, s) == (0, 2)

    def test_single_mismatch(self):
        a = np.array([1 + 1j] * 10)
        b = a.copy()
        b[3] = -1 - 1j
        assert count_errors(b, a) == (1, 10)

    def test_all_mismatched(self):
        a = np.array([1 + 1j] * 5)
        b = -a
        assert count_errors(b, a) == (5, 5)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            count_errors(np.zeros(3, complex), np.zeros(4, complex))
