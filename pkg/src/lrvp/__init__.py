"""Lattice-reduction aided vector-perturbation precoding with a QUBO annealer.

The closest-vector search behind vector perturbation is reduced with LLL,
translated to digits in {0, 1, 2}, encoded as a QUBO and sampled with a
seeded Metropolis annealer (optionally through a simulated Chimera embedding
with qubit chains), alongside zero-forcing, lattice-reduced zero-forcing,
exact restricted enumeration and a Schnorr-Euchner sphere encoder.
"""

from ._kernels import NUMBA_ENABLED, backend_name
from .config import ExperimentConfig, build_config
from .embedding import (
    ChainConfig,
    Embedding,
    HardwareGraph,
    chain_strength,
    chimera_graph,
    clique_embed,
    embed_ising,
    unembed,
)
from .experiments import ha_bound, run_experiment
from .lattice import (
    PerturbationProblem,
    ReducedLattice,
    complex_to_real,
    lll_reduce,
    pseudo_inverse,
    reduce_problem,
)
from .mimo import (
    ChannelInstance,
    Constellation,
    NoiseModel,
    count_errors,
    gamma,
    make_constellation,
    theta,
    transmit_receive,
)
from .qubo import (
    EncodingMatrix,
    IsingProblem,
    QuboProblem,
    build_encoding,
    build_qubo,
    qubo_to_ising,
)
from .solvers import (
    AnnealParams,
    EmbedContext,
    SolverOutcome,
    solve_exact_restricted,
    solve_lrzfp,
    solve_sim_anneal,
    solve_sphere,
    solve_zfp,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealParams",
    "ChainConfig",
    "ChannelInstance",
    "Constellation",
    "EmbedContext",
    "Embedding",
    "EncodingMatrix",
    "ExperimentConfig",
    "HardwareGraph",
    "IsingProblem",
    "NoiseModel",
    "NUMBA_ENABLED",
    "PerturbationProblem",
    "QuboProblem",
    "ReducedLattice",
    "SolverOutcome",
    "backend_name",
    "build_config",
    "build_encoding",
    "build_qubo",
    "chain_strength",
    "chimera_graph",
    "clique_embed",
    "complex_to_real",
    "count_errors",
    "embed_ising",
    "gamma",
    "ha_bound",
    "lll_reduce",
    "make_constellation",
    "pseudo_inverse",
    "qubo_to_ising",
    "reduce_problem",
    "run_experiment",
    "solve_exact_restricted",
    "solve_lrzfp",
    "solve_sim_anneal",
    "solve_sphere",
    "solve_zfp",
    "theta",
    "transmit_receive",
    "unembed",
]
