"""Two-bit integer encoding, QUBO assembly and the QUBO/Ising conversion.

The encoding deliberately keeps the degenerate two-bit representation of the
digit 1 ('01' and '10'), which trades qubits for a flatter energy spectrum.
"""

from dataclasses import dataclass, field

import numpy as np

from .lattice import PerturbationProblem


@dataclass(frozen=True)
class EncodingMatrix:
    """Block map l = C q from pairs of bits to digits in {0, 1, 2}."""

    C: np.ndarray   # int64, N x 2N
    N: int

    @property
    def M(self) -> int:
        return 2 * self.N


def build_encoding(n: int) -> EncodingMatrix:
    """Two bits per integer: row i has ones in columns 2i and 2i+1."""
    if n < 1:
        raise ValueError("need at least one integer to encode")
    c = np.zeros((n, 2 * n), dtype=np.int64)
    idx = np.arange(n)
    c[idx, 2 * idx] = 1
    c[idx, 2 * idx + 1] = 1
    return EncodingMatrix(C=c, N=n)


def decode_bits(enc: EncodingMatrix, q: np.ndarray) -> np.ndarray:
    """Digits l = C q for a binary assignment."""
    return enc.C @ np.asarray(q, dtype=np.int64)


def encode_digits(enc: EncodingMatrix, l: np.ndarray) -> np.ndarray:
    """Lexicographically smallest bit assignment producing the given digits."""
    l = np.asarray(l, dtype=np.int64)
    if l.shape[0] != enc.N or np.any(l < 0) or np.any(l > 2):
        raise ValueError("digits must be a length-N vector over {0, 1, 2}")
    q = np.zeros(2 * enc.N, dtype=np.int64)
    q[1::2] = np.where(l >= 1, 1, 0)
    q[0::2] = np.where(l == 2, 1, 0)
    return q


@dataclass(frozen=True)
class QuboProblem:
    """Symmetric QUBO with constant offset: energy(q) = q^T Q q + c."""

    Q: np.ndarray
    c: float
    tau: float
    N: int
    source: PerturbationProblem | None = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return self.Q.shape[0]


def build_qubo(prob: PerturbationProblem, enc: EncodingMatrix) -> QuboProblem:
    """Expand ||F (u'' - tau C q)||^2 into q^T Q q + c.

    Q = tau^2 C^T F^T F C + diag(-2 tau u''^T F^T F C), c = u''^T F^T F u''.
    The linear term carries the full Gram factor F^T F so the expansion
    reproduces the norm exactly; off-diagonal mass is split symmetrically.
    """
    if enc.N != prob.N:
        raise ValueError(f"encoding is for {enc.N} digits, problem has {prob.N}")
    gram = prob.F.T @ prob.F
    cmat = enc.C.astype(np.float64)
    quad = prob.tau**2 * (cmat.T @ gram @ cmat)
    lin = -2.0 * prob.tau * (prob.u_pp @ gram @ cmat)
    q = quad + np.diag(lin)
    q = 0.5 * (q + q.T)
    c = float(prob.u_pp @ gram @ prob.u_pp)
    return QuboProblem(Q=q, c=c, tau=prob.tau, N=prob.N, source=prob)


def qubo_energy(qubo: QuboProblem, q: np.ndarray) -> float:
    """q^T Q q + c for one binary assignment."""
    qf = np.asarray(q, dtype=np.float64)
    return float(qf @ qubo.Q @ qf + qubo.c)


@dataclass(frozen=True)
class IsingProblem:
    """Fields h, pairwise couplers J and a constant offset over spins +-1."""

    h: np.ndarray
    J: dict[tuple[int, int], float]
    offset: float

    @property
    def num_spins(self) -> int:
        return self.h.shape[0]


def qubo_to_ising(qubo: QuboProblem) -> IsingProblem:
    """Substitute q = (s + 1)/2 and collect linear/quadratic/constant terms.

    Only nonzero couplers are kept in J. Energies match exactly:
    h . s + sum J_ij s_i s_j + offset == q^T Q q + c under s = 2q - 1.
    """
    q = qubo.Q
    m = q.shape[0]
    diag = np.diag(q)
    off = q - np.diag(diag)
    h = diag / 2.0 + off.sum(axis=1) / 2.0
    offset = qubo.c + diag.sum() / 2.0 + off.sum() / 4.0
    couplers: dict[tuple[int, int], float] = {}
    for i in range(m):
        for j in range(i + 1, m):
            v = (q[i, j] + q[j, i]) / 4.0
            if v != 0.0:
                couplers[(i, j)] = v
    return IsingProblem(h=h, J=couplers, offset=float(offset))


def ising_energy(ising: IsingProblem, s: np.ndarray) -> float:
    """h . s + sum_ij J_ij s_i s_j + offset for one spin assignment."""
    s = np.asarray(s, dtype=np.float64)
    e = float(ising.h @ s) + ising.offset
    for (i, j), v in ising.J.items():
        e += v * s[i] * s[j]
    return e


def digit_quadratic(qubo: QuboProblem) -> tuple[np.ndarray, np.ndarray]:
    """Recover the digit-space form energy(l) = l^T A l - b . l + c from Q.

    Valid for QUBOs built on the two-bit block encoding: both bits of digit i
    share identical couplings, so A_ij sits at Q[2i, 2j] (off-block) and at
    Q[2i, 2i+1] (in-block), and the linear part follows from the diagonal.
    """
    m = qubo.M
    if m != 2 * qubo.N:
        raise ValueError("QUBO is not in two-bit block form")
    even = np.arange(0, m, 2)
    a = qubo.Q[np.ix_(even, even)].copy()
    diag = qubo.Q[even, even + 1]
    np.fill_diagonal(a, diag)
    b = diag - qubo.Q[even, even]
    return a, b


def digit_energy(qubo: QuboProblem, l: np.ndarray) -> float:
    """Energy of a digit vector, equal to qubo_energy of any encoding of it."""
    a, b = digit_quadratic(qubo)
    lf = np.asarray(l, dtype=np.float64)
    return float(lf @ a @ lf - b @ lf + qubo.c)
