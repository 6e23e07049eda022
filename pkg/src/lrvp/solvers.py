"""Interchangeable CVP solvers returning directly comparable outcomes.

Every solver reports the chosen integer vector and a transmit-power value
recomputed from the perturbation problem itself, never from solver-internal
bookkeeping, so outcomes from different algorithms can be compared at face
value.
"""

from dataclasses import dataclass, field
import math
import time

import numpy as np

from . import embedding as emb_mod
from ._kernels import anneal_ising, restricted_search, sphere_search
from .errors import BudgetError
from .lattice import PerturbationProblem, perturbed_norm_sq
from .mimo import ChannelInstance
from .qubo import IsingProblem, QuboProblem, digit_quadratic, qubo_to_ising

_RESTRICTED_MAX_BITS = 28


@dataclass(frozen=True)
class AnnealParams:
    """Knobs for the Metropolis annealer (the classical stand-in for T_a)."""

    num_reads: int = 1000
    num_sweeps: int = 1000
    beta_schedule: tuple[float | None, float | None, str] = (None, None, "geometric")
    seed: int = 0
    embedded: bool = False
    fallback_to_lrzfp: bool = False

    def __post_init__(self):
        if self.num_reads < 1 or self.num_sweeps < 1:
            raise ValueError("num_reads and num_sweeps must be at least 1")
        lo, hi, shape = self.beta_schedule
        if shape not in ("linear", "geometric"):
            raise ValueError(f"unknown schedule shape {shape!r}")
        if lo is not None and hi is not None and not lo < hi:
            raise ValueError("beta_min must be smaller than beta_max")


@dataclass(frozen=True)
class EmbedContext:
    """Hardware graph, embedding and chain options for embedded annealing."""

    hardware: emb_mod.HardwareGraph | None = None
    embedding: emb_mod.Embedding | None = None
    p: float = 1.5
    clip: bool = False
    clip_limit: float = 1.0
    clip_step: float = 1.0 / 16.0

    def resolve(self, num_vars: int) -> emb_mod.Embedding:
        if self.embedding is not None:
            return self.embedding
        hw = self.hardware
        if hw is None:
            hw = emb_mod.chimera_graph(math.ceil(num_vars / emb_mod.SHORE))
        return emb_mod.clique_embed(num_vars, hw)


@dataclass(frozen=True)
class SolverDiagnostics:
    best_energy: float = math.nan
    broken_chain_rate: float | None = None
    evaluations: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class SolverOutcome:
    """Chosen perturbation, resulting transmit power and bookkeeping."""

    l_pp: np.ndarray
    x_norm_sq: float
    solver_id: str
    diagnostics: SolverDiagnostics = field(default_factory=SolverDiagnostics)


def solve_zfp(chan: ChannelInstance, u: np.ndarray) -> SolverOutcome:
    """Plain channel inversion, x = G u (the zero-perturbation baseline)."""
    start = time.perf_counter()
    x = chan.G @ np.asarray(u, dtype=np.complex128)
    x_norm_sq = float(np.real(np.vdot(x, x)))
    n = 2 * chan.H.shape[0]
    return SolverOutcome(
        l_pp=np.zeros(n, dtype=np.int64),
        x_norm_sq=x_norm_sq,
        solver_id="zfp",
        diagnostics=SolverDiagnostics(best_energy=x_norm_sq, evaluations=1, wall_time=time.perf_counter() - start),
    )


def solve_lrzfp(prob: PerturbationProblem) -> SolverOutcome:
    """Lattice-reduced zero forcing: the all-ones digit vector (l' = 0)."""
    start = time.perf_counter()
    l_pp = prob.t
    x_norm_sq = perturbed_norm_sq(prob, l_pp)
    return SolverOutcome(
        l_pp=l_pp,
        x_norm_sq=x_norm_sq,
        solver_id="lrzfp",
        diagnostics=SolverDiagnostics(best_energy=x_norm_sq, evaluations=1, wall_time=time.perf_counter() - start),
    )


def _brute_force_digits(a: np.ndarray, b: np.ndarray, c: float) -> tuple[np.ndarray, float, int]:
    # lexicographic enumeration of {0,1,2}^n in chunks; first argmin wins ties
    n = a.shape[0]
    total = 3**n
    weights = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_energy = math.inf
    best_l = np.zeros(n, dtype=np.int64)
    chunk = 1 << 18
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // weights[None, :]) % 3
        lf = digits.astype(np.float64)
        energies = np.einsum("ri,ij,rj->r", lf, a, lf) - lf @ b + c
        k = int(np.argmin(energies))
        if energies[k] < best_energy:
            best_energy = float(energies[k])
            best_l = digits[k].copy()
    return best_l, best_energy, total


def solve_exact_restricted(qubo: QuboProblem) -> SolverOutcome:
    """Exhaustive minimum of q^T Q q + c over binary assignments.

    The two-bit blocks make the energy a function of the digit vector l = C q
    alone, so the search runs over {0,1,2}^N by depth-first enumeration with
    pruning; the lexicographically smallest q among minimizers corresponds to
    the lexicographically smallest l, which the enumeration order delivers.
    """
    if qubo.M > _RESTRICTED_MAX_BITS:
        raise BudgetError(f"restricted enumeration supports up to {_RESTRICTED_MAX_BITS} bits, got {qubo.M}")
    start = time.perf_counter()
    a, b = digit_quadratic(qubo)
    try:
        lower = np.linalg.cholesky(a[::-1, ::-1])
    except np.linalg.LinAlgError:
        lower = None
    if lower is None:
        l_best, best_energy, nodes = _brute_force_digits(a, b, qubo.c)
    else:
        rmat = lower.T
        w = np.linalg.solve(lower, b[::-1] / 2.0)
        l_rev, dist, nodes = restricted_search(rmat, w)
        l_best = l_rev[::-1].copy()
        best_energy = dist + qubo.c - float(w @ w)
    x_norm_sq = (
        perturbed_norm_sq(qubo.source, l_best) if qubo.source is not None else float(best_energy)
    )
    return SolverOutcome(
        l_pp=l_best,
        x_norm_sq=x_norm_sq,
        solver_id="exact-restricted",
        diagnostics=SolverDiagnostics(best_energy=float(best_energy), evaluations=int(nodes), wall_time=time.perf_counter() - start),
    )


def solve_sphere(basis: np.ndarray, target: np.ndarray, tau: float) -> SolverOutcome:
    """Exact unrestricted CVP: min over integer l of ||basis (target - tau l)||^2.

    Schnorr-Euchner enumeration with radius shrinking on the QR of tau*basis;
    complete, so the result is the true optimum regardless of the basis handed
    in (a reduced basis just enumerates fewer nodes).
    """
    start = time.perf_counter()
    basis = np.asarray(basis, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    q, r = np.linalg.qr(tau * basis)
    diag = np.diag(r)
    if np.min(np.abs(diag)) < 1e-12 * max(1.0, np.max(np.abs(diag))):
        raise ValueError("basis is not full column rank")
    signs = np.where(diag < 0, -1.0, 1.0)
    rmat = signs[:, None] * r
    y = basis @ target
    z = signs * (q.T @ y)
    residual = float(y @ y) - float(z @ z)
    l_best, dist, nodes = sphere_search(rmat, z)
    x = basis @ target - tau * (basis @ l_best.astype(np.float64))
    return SolverOutcome(
        l_pp=l_best,
        x_norm_sq=float(x @ x),
        solver_id="sphere",
        diagnostics=SolverDiagnostics(
            best_energy=float(dist + max(residual, 0.0)),
            evaluations=int(nodes),
            wall_time=time.perf_counter() - start,
        ),
    )


def solve_sphere_problem(prob: PerturbationProblem) -> SolverOutcome:
    """Sphere-encode a perturbation problem on its (reduced) basis."""
    return solve_sphere(prob.F, prob.u_pp, prob.tau)


def _ising_arrays(ising: IsingProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    # symmetric CSR adjacency with ascending neighbor order per row
    n = ising.num_spins
    rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), v in ising.J.items():
        rows[i].append((j, v))
        rows[j].append((i, v))
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = np.empty(sum(len(r) for r in rows), dtype=np.int64)
    data = np.empty(indices.shape[0], dtype=np.float64)
    pos = 0
    for i, row in enumerate(rows):
        row.sort(key=lambda t: t[0])
        for j, v in row:
            indices[pos] = j
            data[pos] = v
            pos += 1
        indptr[i + 1] = pos
    return np.asarray(ising.h, dtype=np.float64), indptr, indices, data


def beta_range(ising: IsingProblem) -> tuple[float, float]:
    """Metropolis schedule endpoints from single-flip energy-magnitude bounds.

    beta_min = ln 2 / dE_max with dE_max the largest possible single-flip
    magnitude, 2(|h_i| + sum_j |J_ij|); beta_max = ln(100 M)/dE_min with
    dE_min twice the smallest nonzero coefficient magnitude.
    """
    n = ising.num_spins
    load = np.abs(ising.h).astype(np.float64)
    for (i, j), v in ising.J.items():
        load[i] += abs(v)
        load[j] += abs(v)
    de_max = 2.0 * float(load.max()) if n else 0.0
    nonzero = [abs(v) for v in ising.J.values() if v != 0.0]
    nonzero += [abs(v) for v in ising.h if v != 0.0]
    de_min = 2.0 * min(nonzero) if nonzero else 0.0
    if de_max <= 0.0 or de_min <= 0.0:
        return 0.1, 10.0
    return math.log(2.0) / de_max, math.log(100.0 * n) / de_min


def _schedule(ising: IsingProblem, params: AnnealParams) -> np.ndarray:
    lo, hi, shape = params.beta_schedule
    auto_lo, auto_hi = beta_range(ising)
    lo = auto_lo if lo is None else lo
    hi = auto_hi if hi is None else hi
    if not lo < hi:
        hi = lo * 2.0
    if shape == "linear":
        return np.linspace(lo, hi, params.num_sweeps)
    return np.geomspace(lo, hi, params.num_sweeps)


def sample_ising(ising: IsingProblem, params: AnnealParams) -> np.ndarray:
    """Anneal an Ising problem directly; returns int8 spin samples (reads, n)."""
    h, indptr, indices, data = _ising_arrays(ising)
    betas = _schedule(ising, params)
    return anneal_ising(h, indptr, indices, data, betas, params.num_reads, params.seed)


def solve_sim_anneal(
    qubo: QuboProblem,
    params: AnnealParams,
    embed_context: EmbedContext | None = None,
) -> SolverOutcome:
    """Metropolis-anneal the Ising form of the QUBO and keep the best read.

    With ``params.embedded`` the problem is spread over qubit chains on the
    simulated hardware graph first and every read is unembedded by majority
    vote. Identical (problem, params, seed) give identical outcomes no matter
    how calls are scheduled; per-read randomness is keyed by (seed, read).
    With ``fallback_to_lrzfp`` the all-ones digit point is returned whenever
    it beats the best sample.
    """
    start = time.perf_counter()
    ising = qubo_to_ising(qubo)
    broken_rate: float | None = None
    if params.embedded:
        context = embed_context if embed_context is not None else EmbedContext()
        emb = context.resolve(ising.num_spins)
        cfg = emb_mod.chain_strength(ising, context.p)
        physical = emb_mod.embed_ising(ising, emb, cfg)
        if context.clip:
            physical = emb_mod.clip_dynamic_range(physical, context.clip_limit, context.clip_step)
        h, indptr, indices, data = _ising_arrays(physical.ising)
        betas = _schedule(physical.ising, params)
        raw = anneal_ising(h, indptr, indices, data, betas, params.num_reads, params.seed)
        samples, broken = emb_mod.unembed_batch(raw, emb, physical.ising.h)
        samples = samples[:, : ising.num_spins]
        broken_rate = float(broken.sum()) / (params.num_reads * len(emb.chains))
        attempts = params.num_reads * params.num_sweeps * h.shape[0]
    else:
        samples = sample_ising(ising, params)
        attempts = params.num_reads * params.num_sweeps * ising.num_spins
    bits = ((samples.astype(np.int64) + 1) // 2).astype(np.float64)
    energies = np.einsum("ri,ij,rj->r", bits, qubo.Q, bits) + qubo.c
    best_idx = int(np.argmin(energies))
    best_energy = float(energies[best_idx])
    l_best = bits[best_idx].reshape(qubo.N, 2).sum(axis=1).astype(np.int64)
    x_norm_sq = (
        perturbed_norm_sq(qubo.source, l_best) if qubo.source is not None else best_energy
    )
    if params.fallback_to_lrzfp and qubo.source is not None:
        l_t = qubo.source.t
        fallback_norm = perturbed_norm_sq(qubo.source, l_t)
        if fallback_norm < x_norm_sq:
            l_best = l_t
            x_norm_sq = fallback_norm
            best_energy = fallback_norm
    return SolverOutcome(
        l_pp=l_best,
        x_norm_sq=x_norm_sq,
        solver_id="sim-anneal",
        diagnostics=SolverDiagnostics(
            best_energy=best_energy,
            broken_chain_rate=broken_rate,
            evaluations=int(attempts),
            wall_time=time.perf_counter() - start,
        ),
    )
