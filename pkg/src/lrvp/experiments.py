"""Experiment drivers: transmit-power distributions, SER sweeps, chain sweeps.

Each driver produces a flat list of trial records (one CSV row each) plus a
printable summary. Trials are seeded independently from (master seed, salt,
indices), so results are byte-identical regardless of worker count; rows are
emitted in deterministic order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from . import solvers as slv
from . import stats
from .config import ExperimentConfig
from .embedding import chimera_graph, clique_embed
from .errors import ReductionError, SingularChannelError
from .lattice import (
    PerturbationProblem,
    ReducedLattice,
    complex_to_real,
    lll_reduce,
    perturbed_vector,
    pseudo_inverse,
    real_to_complex_vector,
    reduce_problem,
)
from .mimo import (
    ChannelInstance,
    Constellation,
    NoiseModel,
    count_errors,
    make_constellation,
    random_symbols,
    transmit_receive,
)
from .qubo import QuboProblem, build_encoding, build_qubo

CSV_COLUMNS = (
    "experiment",
    "channel",
    "solver",
    "snr_db",
    "p",
    "sweeps",
    "x_norm_sq",
    "errors",
    "total",
    "ser",
    "wilson_low",
    "wilson_high",
    "best_energy",
    "broken_chain_rate",
    "evaluations",
)

_SALT_CHANNEL = 0x6368616E
_SALT_SYMBOLS = 0x73796D62
_SALT_NOISE = 0x6E6F6973
_SALT_SOLVER = 0x736F6C76

_MAX_CHANNEL_TRIES = 256

_QUBO_SOLVERS = ("exact-restricted", "sim-anneal")


def _rng(seed: int, salt: int, *indices: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**63 - 1), salt, *indices]))


def _derive_seed(seed: int, salt: int, *indices: int) -> int:
    ss = np.random.SeedSequence([seed & (2**63 - 1), salt, *indices])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def draw_channel(nr: int, nt: int, rng: np.random.Generator) -> tuple[ChannelInstance, int]:
    """Sample an i.i.d. CN(0,1) channel, resampling singular draws."""
    resamples = 0
    for _ in range(_MAX_CHANNEL_TRIES):
        h = (rng.standard_normal((nr, nt)) + 1j * rng.standard_normal((nr, nt))) / math.sqrt(2.0)
        try:
            g = pseudo_inverse(h)
        except SingularChannelError:
            resamples += 1
            continue
        return ChannelInstance(H=h, G=g), resamples
    raise SingularChannelError(f"no full-rank channel in {_MAX_CHANNEL_TRIES} draws")


def ha_bound(chan: ChannelInstance, tau: float) -> float:
    """Hyper-sphere approximation of the expected minimum ||x||^2.

    The lattice tau*G_real has fundamental volume V = tau^N sqrt(det(G^T G));
    matching a ball of that volume gives an effective radius r_eff, and the
    mean squared distance to the center of a uniform ball is N/(N+2) r_eff^2.
    """
    g_real = complex_to_real(np.asarray(chan.G))
    n = g_real.shape[1]
    sign, logdet_gram = np.linalg.slogdet(g_real.T @ g_real)
    if sign <= 0 or not math.isfinite(logdet_gram):
        raise SingularChannelError("channel too ill-conditioned for the HA bound")
    log_volume = n * math.log(tau) + 0.5 * logdet_gram
    log_ball = (n / 2.0) * math.log(math.pi) - math.lgamma(n / 2.0 + 1.0)
    r_eff_sq = math.exp((2.0 / n) * (log_volume - log_ball))
    return n / (n + 2.0) * r_eff_sq


@dataclass(frozen=True)
class ChannelContext:
    """Per-channel state shared by every solver call."""

    chan: ChannelInstance
    lat: ReducedLattice
    resamples: int


def prepare_channel(cfg: ExperimentConfig, channel: int) -> ChannelContext:
    rng = _rng(cfg.seed, _SALT_CHANNEL, channel)
    for _ in range(_MAX_CHANNEL_TRIES):
        chan, resamples = draw_channel(cfg.nr, cfg.nt, rng)
        try:
            lat = lll_reduce(complex_to_real(chan.G), cfg.delta)
        except ReductionError:
            continue
        return ChannelContext(chan=chan, lat=lat, resamples=resamples)
    raise SingularChannelError("could not reduce any channel draw")


@dataclass(frozen=True)
class Instance:
    """One (channel, symbol vector) trial with its reduced problem and QUBO."""

    ctx: ChannelContext
    u: np.ndarray
    prob: PerturbationProblem
    qubo: QuboProblem | None


def prepare_instance(cfg: ExperimentConfig, ctx: ChannelContext, u: np.ndarray, const: Constellation) -> Instance:
    prob = reduce_problem(ctx.lat, u, const.tau)
    qubo = None
    if any(name in _QUBO_SOLVERS for name in cfg.solvers) or cfg.experiment in ("chain-sweep", "sweeps-sweep"):
        qubo = build_qubo(prob, build_encoding(prob.N))
    return Instance(ctx=ctx, u=u, prob=prob, qubo=qubo)


def _anneal_params(
    cfg: ExperimentConfig, seed: int, num_sweeps: int | None = None, embedded: bool | None = None
) -> slv.AnnealParams:
    return slv.AnnealParams(
        num_reads=cfg.num_reads,
        num_sweeps=cfg.num_sweeps if num_sweeps is None else num_sweeps,
        beta_schedule=(cfg.beta_min, cfg.beta_max, cfg.beta_shape),
        seed=seed,
        embedded=cfg.embedded if embedded is None else embedded,
        fallback_to_lrzfp=cfg.fallback_to_lrzfp,
    )


def _solve_one(
    name: str,
    inst: Instance,
    params: slv.AnnealParams | None = None,
    embed_context: slv.EmbedContext | None = None,
) -> slv.SolverOutcome:
    if name == "zfp":
        return slv.solve_zfp(inst.ctx.chan, inst.u)
    if name == "lrzfp":
        return slv.solve_lrzfp(inst.prob)
    if name == "sphere":
        return slv.solve_sphere_problem(inst.prob)
    if inst.qubo is None:
        raise ValueError(f"solver {name!r} needs a QUBO, none was built")
    if name == "exact-restricted":
        return slv.solve_exact_restricted(inst.qubo)
    if name == "sim-anneal":
        assert params is not None
        return slv.solve_sim_anneal(inst.qubo, params, embed_context)
    raise ValueError(f"unknown solver {name!r}")


def _precode(name: str, inst: Instance, outcome: slv.SolverOutcome) -> np.ndarray:
    if name == "zfp":
        return inst.ctx.chan.G @ inst.u
    return real_to_complex_vector(perturbed_vector(inst.prob, outcome.l_pp))


def _base_row(cfg: ExperimentConfig, **overrides) -> dict:
    row = {col: "" for col in CSV_COLUMNS}
    row["experiment"] = cfg.experiment
    row.update(overrides)
    return row


def _outcome_fields(outcome: slv.SolverOutcome) -> dict:
    fields = {
        "x_norm_sq": outcome.x_norm_sq,
        "best_energy": outcome.diagnostics.best_energy,
        "evaluations": outcome.diagnostics.evaluations,
    }
    if outcome.diagnostics.broken_chain_rate is not None:
        fields["broken_chain_rate"] = outcome.diagnostics.broken_chain_rate
    return fields


def _run_threaded(work, count: int, threads: int) -> list:
    if threads <= 1:
        return [work(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, range(count)))


def _embed_context(cfg: ExperimentConfig, num_vars: int, p: float) -> slv.EmbedContext:
    m = cfg.chimera_m if cfg.chimera_m else math.ceil(num_vars / 4)
    hw = chimera_graph(m)
    return slv.EmbedContext(
        hardware=hw,
        embedding=clique_embed(num_vars, hw),
        p=p,
        clip=cfg.clip,
        clip_limit=cfg.clip_limit,
        clip_step=cfg.clip_step,
    )


def run_norm_dist(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Transmit-power distributions per solver over random channels + HA bound."""
    const = make_constellation(cfg.order)
    embed_ctx = _embed_context(cfg, 4 * cfg.nr, cfg.p) if cfg.embedded else None

    def work(channel: int) -> list[dict]:
        ctx = prepare_channel(cfg, channel)
        u = random_symbols(const, cfg.nr, _rng(cfg.seed, _SALT_SYMBOLS, channel))
        inst = prepare_instance(cfg, ctx, u, const)
        rows = []
        for name in cfg.solvers:
            params = _anneal_params(cfg, _derive_seed(cfg.seed, _SALT_SOLVER, channel))
            outcome = _solve_one(name, inst, params, embed_ctx)
            rows.append(_base_row(cfg, channel=channel, solver=name, **_outcome_fields(outcome)))
        rows.append(_base_row(cfg, channel=channel, solver="ha", x_norm_sq=ha_bound(ctx.chan, const.tau)))
        return rows

    per_channel = _run_threaded(work, cfg.channels, cfg.threads)
    records = [row for rows in per_channel for row in rows]
    summary = {}
    for name in (*cfg.solvers, "ha"):
        values = [r["x_norm_sq"] for r in records if r["solver"] == name]
        summary[name] = stats.summarize(values)
    return records, summary


def run_ser_sweep(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Symbol-error-rate curves: precode once per (channel, u), sweep the noise.

    The precoded vector does not depend on the SNR, so each solver's transmit
    vector is reused across all SNR points with common receiver noise, which
    sharpens curve-to-curve comparisons.
    """
    const = make_constellation(cfg.order)
    vec_per_channel = max(1, math.ceil(cfg.num_symbols / (cfg.nr * cfg.channels)))
    num_snr = len(cfg.snr_db_list)
    embed_ctx = _embed_context(cfg, 4 * cfg.nr, cfg.p) if cfg.embedded else None

    def work(channel: int) -> np.ndarray:
        ctx = prepare_channel(cfg, channel)
        errors = np.zeros((len(cfg.solvers), num_snr), dtype=np.int64)
        for v in range(vec_per_channel):
            u = random_symbols(const, cfg.nr, _rng(cfg.seed, _SALT_SYMBOLS, channel, v))
            inst = prepare_instance(cfg, ctx, u, const)
            precoded = []
            for name in cfg.solvers:
                params = _anneal_params(cfg, _derive_seed(cfg.seed, _SALT_SOLVER, channel, v))
                outcome = _solve_one(name, inst, params, embed_ctx)
                precoded.append(_precode(name, inst, outcome))
            for si, snr_db in enumerate(cfg.snr_db_list):
                rho = math.inf if math.isinf(snr_db) else 10.0 ** (snr_db / 10.0)
                noise = NoiseModel(rho=rho, rng_seed=cfg.seed)
                rng_n = _rng(cfg.seed, _SALT_NOISE, channel, v, si)
                shared = (rng_n.standard_normal(cfg.nr) + 1j * rng_n.standard_normal(cfg.nr)) / math.sqrt(2.0)
                for sol_idx, x in enumerate(precoded):
                    detected = transmit_receive(ctx.chan, x, u, noise, const, noise_vector=shared)
                    errors[sol_idx, si] += count_errors(detected, u)[0]
        return errors

    per_channel = _run_threaded(work, cfg.channels, cfg.threads)
    errors = np.sum(per_channel, axis=0)
    total = cfg.channels * vec_per_channel * cfg.nr
    records = []
    summary: dict = {"total_symbols": total, "snr_db": list(cfg.snr_db_list), "ser": {}}
    for sol_idx, name in enumerate(cfg.solvers):
        curve = []
        for si, snr_db in enumerate(cfg.snr_db_list):
            err = int(errors[sol_idx, si])
            low, high = stats.wilson_interval(err, total)
            records.append(
                _base_row(
                    cfg,
                    solver=name,
                    snr_db=snr_db,
                    errors=err,
                    total=total,
                    ser=err / total,
                    wilson_low=low,
                    wilson_high=high,
                )
            )
            curve.append(err / total)
        summary["ser"][name] = curve
    return records, summary


def run_chain_sweep(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Embedded-annealer transmit power and chain breaks across chain strengths."""
    const = make_constellation(cfg.order)
    num_vars = 4 * cfg.nr
    base_ctx = _embed_context(cfg, num_vars, cfg.p)
    contexts = _run_threaded(lambda c: prepare_channel(cfg, c), cfg.channels, cfg.threads)
    instances = []
    for channel, ctx in enumerate(contexts):
        u = random_symbols(const, cfg.nr, _rng(cfg.seed, _SALT_SYMBOLS, channel))
        instances.append(prepare_instance(cfg, ctx, u, const))

    def work(index: int) -> dict:
        p_idx, channel = divmod(index, cfg.channels)
        p = cfg.p_list[p_idx]
        params = _anneal_params(cfg, _derive_seed(cfg.seed, _SALT_SOLVER, p_idx, channel), embedded=True)
        embed_ctx = slv.EmbedContext(
            hardware=base_ctx.hardware,
            embedding=base_ctx.embedding,
            p=p,
            clip=cfg.clip,
            clip_limit=cfg.clip_limit,
            clip_step=cfg.clip_step,
        )
        outcome = _solve_one("sim-anneal", instances[channel], params, embed_ctx)
        return _base_row(cfg, channel=channel, solver="sim-anneal", p=p, **_outcome_fields(outcome))

    records = _run_threaded(work, len(cfg.p_list) * cfg.channels, cfg.threads)
    summary = {}
    for p in cfg.p_list:
        rows = [r for r in records if r["p"] == p]
        entry = stats.summarize([r["x_norm_sq"] for r in rows])
        entry["broken_chain_rate"] = float(np.mean([r["broken_chain_rate"] for r in rows]))
        summary[p] = entry
    return records, summary


def run_sweeps_sweep(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Transmit-power distributions as the sweep count (the T_a analog) varies."""
    const = make_constellation(cfg.order)
    embed_ctx = _embed_context(cfg, 4 * cfg.nr, cfg.p) if cfg.embedded else None
    contexts = _run_threaded(lambda c: prepare_channel(cfg, c), cfg.channels, cfg.threads)
    instances = []
    for channel, ctx in enumerate(contexts):
        u = random_symbols(const, cfg.nr, _rng(cfg.seed, _SALT_SYMBOLS, channel))
        instances.append(prepare_instance(cfg, ctx, u, const))

    def work(index: int) -> dict:
        s_idx, channel = divmod(index, cfg.channels)
        num_sweeps = cfg.sweeps_list[s_idx]
        params = _anneal_params(
            cfg, _derive_seed(cfg.seed, _SALT_SOLVER, s_idx, channel), num_sweeps=num_sweeps
        )
        outcome = _solve_one("sim-anneal", instances[channel], params, embed_ctx)
        return _base_row(cfg, channel=channel, solver="sim-anneal", sweeps=num_sweeps, **_outcome_fields(outcome))

    records = _run_threaded(work, len(cfg.sweeps_list) * cfg.channels, cfg.threads)
    summary = {}
    for num_sweeps in cfg.sweeps_list:
        rows = [r for r in records if r["sweeps"] == num_sweeps]
        summary[num_sweeps] = stats.summarize([r["x_norm_sq"] for r in rows])
    return records, summary


RUNNERS = {
    "norm-dist": run_norm_dist,
    "ser-sweep": run_ser_sweep,
    "chain-sweep": run_chain_sweep,
    "sweeps-sweep": run_sweeps_sweep,
}


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    return RUNNERS[cfg.experiment](cfg)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def format_csv(records: list[dict]) -> str:
    """Render records as CSV with a schema comment; floats use 9 significant digits."""
    lines = ["#schema=1", ",".join(CSV_COLUMNS)]
    for row in records:
        lines.append(",".join(_format_cell(row[col]) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_csv(records: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(records))
