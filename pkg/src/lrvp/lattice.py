"""Complex-to-real embedding, pseudo-inverse, LLL reduction and the reduced CVP.

The reduction keeps the unimodular change-of-basis matrix and its inverse in
exact 64-bit integer arithmetic so the modulo-correctness of the precoder is
preserved bit-for-bit; the float basis is verified against G @ Z after every
reduction.
"""

from dataclasses import dataclass

import numpy as np

from . import mimo
from ._kernels import lll_reduce_core
from .errors import ReductionError, SingularChannelError

_RANK_TOL = 1e-10


def complex_to_real(a: np.ndarray) -> np.ndarray:
    """Real embedding: matrices to [[Re, -Im], [Im, Re]], vectors to [Re; Im]."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        return np.concatenate([a.real, a.imag])
    if a.ndim == 2:
        return np.block([[a.real, -a.imag], [a.imag, a.real]])
    raise ValueError("expected a vector or a matrix")


def real_to_complex_vector(v: np.ndarray) -> np.ndarray:
    """Inverse of the vector embedding: [Re; Im] back to a complex vector."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size % 2:
        raise ValueError("expected an even-length real vector")
    half = v.size // 2
    return v[:half] + 1j * v[half:]


def pseudo_inverse(h: np.ndarray) -> np.ndarray:
    """Right pseudo-inverse of a full-row-rank channel matrix.

    Built from the SVD; square channels reduce to the plain inverse. Raises
    SingularChannelError when the smallest singular value falls below
    1e-10 times the largest, in which case the caller should resample.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] > h.shape[1]:
        raise ValueError("channel must be N_r x N_t with N_r <= N_t")
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    if s[-1] < _RANK_TOL * s[0]:
        raise SingularChannelError(
            f"channel numerically rank deficient (sigma_min/sigma_max = {s[-1] / s[0]:.3e})"
        )
    return (vh.conj().T / s) @ u.conj().T


@dataclass(frozen=True)
class ReducedLattice:
    """LLL factorization F = G @ Z with exact integer Z, Z_inv."""

    G: np.ndarray       # real-embedded basis (columns are basis vectors)
    F: np.ndarray       # reduced basis
    Z: np.ndarray       # unimodular, int64
    Z_inv: np.ndarray   # exact integer inverse of Z

    @property
    def dim(self) -> int:
        return self.F.shape[1]


def lll_reduce(g: np.ndarray, delta: float = 0.75) -> ReducedLattice:
    """LLL-reduce the columns of a real basis matrix.

    delta is the Lovasz parameter, classic 0.75 by default. The swap cap of
    1e4 * N^2 is a safety net only; Gaussian channel bases converge far below
    it. Raises ReductionError on non-convergence or lost integer exactness.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] < g.shape[1]:
        raise ValueError("basis must have at least as many rows as columns")
    if not 0.25 < delta < 1.0:
        raise ValueError(f"delta must lie in (1/4, 1), got {delta}")
    n = g.shape[1]
    f, z, z_inv, swaps, ok = lll_reduce_core(g, delta, max_swaps=10_000 * n * n)
    if not ok:
        raise ReductionError(f"LLL did not converge within the swap cap ({swaps} swaps)")
    if not np.array_equal(z @ z_inv, np.eye(n, dtype=np.int64)):
        raise ReductionError("unimodular tracking lost exactness (Z @ Z_inv != I)")
    scale = 1.0 + np.linalg.norm(g)
    if np.max(np.abs(f - g @ z)) > 1e-9 * scale:
        raise ReductionError("reduced basis drifted away from G @ Z")
    return ReducedLattice(G=g, F=f, Z=z, Z_inv=z_inv)


def unimodular_det(z: np.ndarray) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    a = [[int(v) for v in row] for row in np.asarray(z)]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class PerturbationProblem:
    """Reduced, translated CVP instance: minimize ||F (u_pp - tau * l)||."""

    F: np.ndarray
    u_pp: np.ndarray    # u'' = gamma(Z_inv u_real) + tau * ones
    tau: float
    N: int

    @property
    def t(self) -> np.ndarray:
        return np.ones(self.N, dtype=np.int64)


def reduce_problem(lat: ReducedLattice, u: np.ndarray, tau: float) -> PerturbationProblem:
    """Fold the symbol vector into the reduced basis and shift to {0,1,2} digits.

    Computes w = Z_inv @ u_real, u' = gamma(w, tau), u'' = u' + tau * 1. The
    perturbation correspondence l' = Z_inv l_real - theta(w, tau)/tau makes
    F (u' - tau l') = G (u_real - tau l_real) hold identically, so optimizing
    over l'' = l' + 1 searches the same lattice as the original problem.
    """
    u_real = complex_to_real(np.asarray(u, dtype=np.complex128))
    if u_real.shape[0] != lat.dim:
        raise ValueError(f"symbol vector dimension {u_real.shape[0]} != lattice dimension {lat.dim}")
    w = lat.Z_inv @ u_real
    u_prime = mimo.gamma(w, tau)
    return PerturbationProblem(F=lat.F, u_pp=u_prime + tau, tau=float(tau), N=lat.dim)


def perturbed_vector(prob: PerturbationProblem, l_pp: np.ndarray) -> np.ndarray:
    """Transmit vector x = F (u'' - tau * l'') for a chosen integer vector."""
    return prob.F @ (prob.u_pp - prob.tau * np.asarray(l_pp, dtype=np.float64))


def perturbed_norm_sq(prob: PerturbationProblem, l_pp: np.ndarray) -> float:
    """||x||^2 for a chosen perturbation, the quantity every solver minimizes."""
    x = perturbed_vector(prob, l_pp)
    return float(x @ x)
