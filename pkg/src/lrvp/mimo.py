"""Square-QAM constellations, modulo-tau arithmetic and the downlink channel.

The constellation is normalized to unit average symbol energy; the modulo
period tau is stored on the same normalized grid so the transmit-power
convention of the system model holds exactly.
"""

from dataclasses import dataclass
import math

import numpy as np

_SUPPORTED_ORDERS = (4, 16, 64, 256)


@dataclass(frozen=True)
class Constellation:
    """Square QAM constellation on the normalized (unit-energy) grid."""

    order: int
    delta: float          # spacing between adjacent points
    c_max: float          # largest real-part magnitude
    tau: float            # modulo period, = 2*c_max + delta
    norm_factor: float    # scale applied to the odd-integer grid
    points: np.ndarray    # complex128, length order
    bit_map: np.ndarray   # Gray-coded bit pattern per point, aligned with points

    @property
    def side(self) -> int:
        return int(round(math.sqrt(self.order)))

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.order)))


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def make_constellation(order: int) -> Constellation:
    """Build an order-4/16/64/256 square QAM constellation with a Gray bit map.

    Points sit on the odd-integer grid {+-1, +-3, ...} scaled to unit average
    energy; tau = 2*c_max + delta is scaled along with the grid.
    """
    if order not in _SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}; expected one of {_SUPPORTED_ORDERS}")
    side = int(round(math.sqrt(order)))
    levels = 2.0 * np.arange(side) - (side - 1)            # -(side-1) .. side-1 step 2
    energy = 2.0 * np.mean(levels**2)                      # per-symbol, both axes
    norm = 1.0 / math.sqrt(energy)
    re, im = np.meshgrid(levels, levels, indexing="ij")
    points = (re + 1j * im).ravel() * norm
    bits_axis = int(round(math.log2(side)))
    axis_bits = np.array([_gray(i) for i in range(side)], dtype=np.uint16)
    bit_map = (axis_bits[:, None] << bits_axis | axis_bits[None, :]).ravel().astype(np.uint16)
    return Constellation(
        order=order,
        delta=2.0 * norm,
        c_max=(side - 1) * norm,
        tau=2.0 * side * norm,
        norm_factor=norm,
        points=points,
        bit_map=bit_map,
    )


def theta(x, tau: float):
    """Integer-lattice part of x w.r.t. tau: tau * floor(x/tau + 1/2)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return tau * np.floor(np.asarray(x, dtype=np.float64) / tau + 0.5)


def gamma(x, tau: float):
    """Fractional part of x w.r.t. tau; range [-tau/2, tau/2)."""
    return np.asarray(x, dtype=np.float64) - theta(x, tau)


def gamma_complex(v, tau: float) -> np.ndarray:
    """Apply gamma to real and imaginary parts separately."""
    v = np.asarray(v, dtype=np.complex128)
    return gamma(v.real, tau) + 1j * gamma(v.imag, tau)


@dataclass(frozen=True)
class ChannelInstance:
    """Channel matrix H and its right pseudo-inverse G (H @ G = I)."""

    H: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.H)
        g = np.asarray(self.G)
        if h.ndim != 2 or g.ndim != 2 or h.shape[0] != g.shape[1] or h.shape[1] != g.shape[0]:
            raise ValueError(f"incompatible channel shapes {h.shape} and {g.shape}")


@dataclass(frozen=True)
class NoiseModel:
    """Receiver-noise description: linear SNR rho and a 64-bit seed."""

    rho: float
    rng_seed: int = 0

    @property
    def noiseless(self) -> bool:
        return math.isinf(self.rho)


def noise_rng(noise: NoiseModel, trial_index: int = 0) -> np.random.Generator:
    """Per-trial noise substream, hashed from (seed, trial index)."""
    return np.random.default_rng(np.random.SeedSequence([int(noise.rng_seed) & (2**63 - 1), 0x6E6F6973, int(trial_index)]))


def detect(received: np.ndarray, const: Constellation) -> np.ndarray:
    """Map each element to the nearest constellation point (per-axis slicing)."""
    side = const.side
    norm = const.norm_factor
    re_idx = np.clip(np.round((np.real(received) / norm + (side - 1)) / 2.0), 0, side - 1)
    im_idx = np.clip(np.round((np.imag(received) / norm + (side - 1)) / 2.0), 0, side - 1)
    return ((2.0 * re_idx - (side - 1)) + 1j * (2.0 * im_idx - (side - 1))) * norm


def transmit_receive(
    chan: ChannelInstance,
    x: np.ndarray,
    u: np.ndarray,
    noise: NoiseModel,
    const: Constellation,
    rng: np.random.Generator | None = None,
    noise_vector: np.ndarray | None = None,
) -> np.ndarray:
    """Send precoded x through the channel and detect symbols at the receivers.

    Forms y = sqrt(rho/||x||^2) H x + n with n ~ CN(0, I), undoes the common
    scaling (assumed known at the receivers), folds with gamma on real and
    imaginary parts, and slices to the nearest constellation point.
    ``noise_vector`` substitutes a caller-supplied n for reproducible tests.
    """
    x = np.asarray(x, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    if x.shape[0] != chan.H.shape[1] or u.shape[0] != chan.H.shape[0]:
        raise ValueError("dimension mismatch between channel, x and u")
    x_norm_sq = float(np.real(np.vdot(x, x)))
    if x_norm_sq <= 0.0:
        raise ValueError("x must have positive norm")
    received = chan.H @ x
    if not noise.noiseless:
        if noise_vector is None:
            gen = rng if rng is not None else noise_rng(noise)
            n = (gen.standard_normal(u.shape[0]) + 1j * gen.standard_normal(u.shape[0])) / math.sqrt(2.0)
        else:
            n = np.asarray(noise_vector, dtype=np.complex128)
        received = received + math.sqrt(x_norm_sq / noise.rho) * n
    folded = gamma_complex(received, const.tau)
    return detect(folded, const)


def count_errors(detected, sent) -> tuple[int, int]:
    """Count symbol mismatches across two equal-length streams."""
    det = np.asarray(detected, dtype=np.complex128).ravel()
    ref = np.asarray(sent, dtype=np.complex128).ravel()
    if det.shape != ref.shape:
        raise ValueError(f"length mismatch: {det.shape} vs {ref.shape}")
    tol = 1e-9
    errors = int(np.sum(np.abs(det - ref) > tol))
    return errors, int(det.size)


def random_symbols(const: Constellation, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw symbols uniformly from the constellation."""
    return const.points[rng.integers(0, const.order, size=size)]
