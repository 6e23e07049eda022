"""Simulated Chimera topology, clique embedding, chains and unembedding.

Node numbering for a Chimera C_m graph: cell (row, col) holds eight qubits,
four per shore, and node ids are

    id = 8 * (row * m + col) + 4 * side + k,    side in {0, 1}, k in {0..3}

where side-0 qubits couple vertically (to the same k in the cell below) and
side-1 qubits couple horizontally (to the same k in the cell to the right).
Within a cell the two shores form a complete bipartite K_{4,4}.

Chains of aligned physical spins stand in for one logical spin. With energies
written as E = h.s + sum J_ij s_i s_j, alignment is favored by giving every
intra-chain edge the coupling -J_chain (J_chain >= 0), i.e. the ferromagnetic
sign under this convention.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import CapacityError, EmbeddingError
from .qubo import IsingProblem

SHORE = 4  # qubits per cell side; fixed for the Chimera family used here


@dataclass(frozen=True)
class HardwareGraph:
    """Chimera C_m working graph: node set, edge set, adjacency."""

    m: int
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]
    adjacency: dict[int, frozenset[int]] = field(repr=False)

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self.edges if a < b else (b, a) in self.edges


def chimera_node(m: int, row: int, col: int, side: int, k: int) -> int:
    """Node id for cell (row, col), shore ``side``, in-shore index ``k``."""
    return 8 * (row * m + col) + 4 * side + k


def chimera_graph(m: int) -> HardwareGraph:
    """Standard Chimera C_m: 8 m^2 nodes, K_{4,4} cells, like-index inter-cell links."""
    if m < 1:
        raise ValueError("Chimera grid size must be at least 1")
    edges: set[tuple[int, int]] = set()
    for row in range(m):
        for col in range(m):
            for k0 in range(SHORE):
                v = chimera_node(m, row, col, 0, k0)
                for k1 in range(SHORE):
                    edges.add((v, chimera_node(m, row, col, 1, k1)))
            if row + 1 < m:
                for k in range(SHORE):
                    edges.add((chimera_node(m, row, col, 0, k), chimera_node(m, row + 1, col, 0, k)))
            if col + 1 < m:
                for k in range(SHORE):
                    edges.add((chimera_node(m, row, col, 1, k), chimera_node(m, row, col + 1, 1, k)))
    edges = {(a, b) if a < b else (b, a) for a, b in edges}
    adjacency: dict[int, set[int]] = {v: set() for v in range(8 * m * m)}
    for a, b in edges:
        adjacency[a].add(b)
        adjacency[b].add(a)
    return HardwareGraph(
        m=m,
        nodes=frozenset(range(8 * m * m)),
        edges=frozenset(edges),
        adjacency={v: frozenset(nb) for v, nb in adjacency.items()},
    )


@dataclass(frozen=True)
class Embedding:
    """Disjoint connected chains of physical nodes, one per logical variable."""

    chains: dict[int, tuple[int, ...]]
    hardware: HardwareGraph = field(repr=False)

    @property
    def node_list(self) -> tuple[int, ...]:
        return tuple(sorted(n for chain in self.chains.values() for n in chain))

    def node_index(self) -> dict[int, int]:
        return {n: i for i, n in enumerate(self.node_list)}


def clique_embed(num_vars: int, hw: HardwareGraph) -> Embedding:
    """Deterministic triangle-style embedding of the complete graph K_M.

    Variable v = 4b + a gets an L-shaped chain: the side-1 qubits of row b in
    columns 0..b plus the side-0 qubits of column b in rows b..m-1, all at
    in-shore index a. Chains have length m + 1 and every chain pair meets in
    some cell, where the two shores are fully coupled.
    """
    if num_vars < 1:
        raise ValueError("need at least one logical variable")
    if num_vars > SHORE * hw.m:
        raise CapacityError(
            f"K_{num_vars} does not fit Chimera C_{hw.m}; need m >= {math.ceil(num_vars / SHORE)}"
        )
    if num_vars == 1:
        # no couplers to honor, a single physical qubit suffices
        return Embedding(chains={0: (chimera_node(hw.m, 0, 0, 0, 0),)}, hardware=hw)
    m = hw.m
    chains: dict[int, tuple[int, ...]] = {}
    for v in range(num_vars):
        b, a = divmod(v, SHORE)
        horizontal = [chimera_node(m, b, c, 1, a) for c in range(b + 1)]
        vertical = [chimera_node(m, r, b, 0, a) for r in range(b, m)]
        chains[v] = tuple(horizontal + vertical)
    return Embedding(chains=chains, hardware=hw)


@dataclass(frozen=True)
class ChainConfig:
    """Chain coupling magnitude from the RMS-coupler heuristic."""

    p: float
    J_chain: float
    k_avg: float
    N_J: int
    no_couplers: bool = False


def chain_strength(ising: IsingProblem, p: float) -> ChainConfig:
    """J_chain = p * rms(J) * sqrt(k_avg) over the logical coupling graph.

    k_avg is the average node degree over all problem variables; N_J the
    number of distinct couplers. An empty coupler set yields J_chain = 0 with
    the warning flag set instead of an error.
    """
    couplings = np.array([v for v in ising.J.values()], dtype=np.float64)
    n_j = couplings.size
    if n_j == 0:
        return ChainConfig(p=float(p), J_chain=0.0, k_avg=0.0, N_J=0, no_couplers=True)
    k_avg = 2.0 * n_j / ising.num_spins
    rms = math.sqrt(float(np.mean(couplings**2)))
    return ChainConfig(p=float(p), J_chain=float(p) * rms * math.sqrt(k_avg), k_avg=k_avg, N_J=int(n_j))


@dataclass(frozen=True)
class EmbeddedIsing:
    """Physical Ising problem over the embedding's nodes (compact indexing)."""

    ising: IsingProblem
    nodes: tuple[int, ...]          # physical node ids, aligned with ising indices
    embedding: Embedding = field(repr=False)


def embed_ising(ising: IsingProblem, emb: Embedding, cfg: ChainConfig) -> EmbeddedIsing:
    """Spread the logical problem over chains on the hardware graph.

    Fields split uniformly along each chain; each logical coupler splits
    uniformly over all physical edges joining the two chains; every physical
    edge inside a chain gets -J_chain so aligned chains are energetically
    favored. The offset carries over, so a chain-intact physical state scores
    the logical energy minus J_chain times the number of intra-chain edges.
    """
    missing = [i for i in range(ising.num_spins) if i not in emb.chains]
    if missing:
        raise EmbeddingError(f"embedding lacks chains for logical variables {missing}")
    hw = emb.hardware
    nodes = emb.node_list
    index = {n: i for i, n in enumerate(nodes)}
    h_phys = np.zeros(len(nodes), dtype=np.float64)
    for var in range(ising.num_spins):
        chain = emb.chains[var]
        share = ising.h[var] / len(chain)
        for n in chain:
            h_phys[index[n]] += share
    j_phys: dict[tuple[int, int], float] = {}

    def add_coupling(a: int, b: int, value: float) -> None:
        key = (index[a], index[b]) if index[a] < index[b] else (index[b], index[a])
        j_phys[key] = j_phys.get(key, 0.0) + value

    for (i, j), value in ising.J.items():
        links = [
            (a, b)
            for a in emb.chains[i]
            for b in emb.chains[j]
            if hw.has_edge(a, b)
        ]
        if not links:
            raise EmbeddingError(f"no physical edge between chains of logical pair ({i}, {j})")
        share = value / len(links)
        for a, b in links:
            add_coupling(a, b, share)
    for chain in emb.chains.values():
        for ai, a in enumerate(chain):
            for b in chain[ai + 1:]:
                if hw.has_edge(a, b):
                    add_coupling(a, b, -cfg.J_chain)
    j_phys = {k: v for k, v in j_phys.items() if v != 0.0}
    return EmbeddedIsing(
        ising=IsingProblem(h=h_phys, J=j_phys, offset=ising.offset),
        nodes=nodes,
        embedding=emb,
    )


def intra_chain_edge_count(emb: Embedding) -> int:
    """Number of hardware edges lying inside chains (the alignment-bonus count)."""
    hw = emb.hardware
    count = 0
    for chain in emb.chains.values():
        for ai, a in enumerate(chain):
            for b in chain[ai + 1:]:
                if hw.has_edge(a, b):
                    count += 1
    return count


def clip_dynamic_range(embedded: EmbeddedIsing, limit: float, step: float) -> EmbeddedIsing:
    """Model the hardware's coupler range: rescale then quantize couplings.

    All physical values (h and J, including the chain couplings) are rescaled
    so the largest magnitude equals ``limit``; couplings are then snapped to
    multiples of ``step``. The offset is scaled along so energies stay on one
    scale; couplers quantized to zero are dropped.
    """
    if limit <= 0 or step <= 0:
        raise ValueError("limit and step must be positive")
    ising = embedded.ising
    peak = max(
        float(np.max(np.abs(ising.h))) if ising.h.size else 0.0,
        max((abs(v) for v in ising.J.values()), default=0.0),
    )
    if peak == 0.0:
        return embedded
    scale = limit / peak
    j_new = {}
    for key, value in ising.J.items():
        snapped = round(value * scale / step) * step
        if snapped != 0.0:
            j_new[key] = snapped
    return EmbeddedIsing(
        ising=IsingProblem(h=ising.h * scale, J=j_new, offset=ising.offset * scale),
        nodes=embedded.nodes,
        embedding=embedded.embedding,
    )


def unembed(sample: np.ndarray, emb: Embedding, h_phys: np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Collapse a physical spin sample to logical spins by chain majority vote.

    Unanimous chains take their common value. Split chains count as broken and
    resolve by majority; exact ties fall to the spin favored by the chain's
    summed field (minimizing h.s), and to -1 when that sum is zero or ``h_phys``
    is not supplied. ``sample`` is aligned with the embedding's node_list.
    """
    samples, broken = unembed_batch(np.asarray(sample, dtype=np.int8).reshape(1, -1), emb, h_phys)
    return samples[0], int(broken[0])


def unembed_batch(
    samples: np.ndarray, emb: Embedding, h_phys: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized unembedding; returns (logical samples, broken chains per row)."""
    samples = np.asarray(samples)
    index = emb.node_index()
    if samples.shape[1] != len(index):
        raise ValueError("sample must cover all physical nodes in the embedding")
    num_vars = len(emb.chains)
    reads = samples.shape[0]
    logical = np.empty((reads, num_vars), dtype=np.int8)
    broken = np.zeros(reads, dtype=np.int64)
    for var in range(num_vars):
        idx = np.array([index[n] for n in emb.chains[var]])
        sub = samples[:, idx]
        sums = sub.sum(axis=1, dtype=np.int64)
        field_sum = float(h_phys[idx].sum()) if h_phys is not None else 0.0
        tie_value = 1 if field_sum < 0.0 else -1
        logical[:, var] = np.where(sums > 0, 1, np.where(sums < 0, -1, tie_value)).astype(np.int8)
        broken += (sub.max(axis=1) != sub.min(axis=1)).astype(np.int64)
    return logical, broken
