"""
Population-based MCMC with tempered chains (parallel tempering).

Chain i targets pi**beta_i with beta_i = (i/M)**2. Each iteration moves every
chain with one random-walk Metropolis step, in parallel, then runs one
exchange pass over adjacent pairs of a randomly chosen parity. Only chain M
(beta = 1) is recorded unless all chains are requested.
"""
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Tuple

import numpy as np

from .exceptions import ConfigurationError
from .parallel import Population, PrecisionMode, WorkerPool
from .prng import StreamBank, build_streams
from .prng.constants import DEFAULT_BLOCK_LENGTH
from .targets import TargetSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TemperatureLadder:
    betas: Tuple[float, ...]

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        if not betas or betas[-1] != 1.0:
            raise ConfigurationError('Temperature ladder must end at exactly 1')
        if any(b <= 0 or b > 1 for b in betas):
            raise ConfigurationError('Inverse temperatures must lie in (0, 1]')
        if any(a >= b for a, b in zip(betas, betas[1:])):
            raise ConfigurationError('Inverse temperatures must be strictly increasing')
        object.__setattr__(self, 'betas', betas)

    def __len__(self):
        return len(self.betas)

    def as_array(self, dtype=np.float64) -> np.ndarray:
        return np.asarray(self.betas, dtype=dtype)


def make_ladder(M: int) -> TemperatureLadder:
    """beta_i = (i/M)**2, i = 1..M."""
    if M < 1:
        raise ConfigurationError(f"Need at least one chain, got {M}")
    return TemperatureLadder(tuple((i / M) ** 2 for i in range(1, M + 1)))


@dataclass
class PopMcmcConfig:
    chains: int = 200
    iterations: int = 8192
    rwm_scale: float = 1.0
    seed: int = 0
    workers: int = 1
    burn_in: int = 0
    dump_all_chains: bool = False
    precision: str = 'double'
    generator: str = 'mrg32k3a'
    block_length: int = DEFAULT_BLOCK_LENGTH

    def __post_init__(self):
        if self.chains < 1:
            raise ConfigurationError(f"chains must be >= 1, got {self.chains}")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.burn_in < 0:
            raise ConfigurationError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.rwm_scale <= 0:
            raise ConfigurationError(f"rwm_scale must be positive, got {self.rwm_scale}")


@dataclass
class ChainPopulation:
    states: np.ndarray  # (M, k)
    cached_logpi_star: np.ndarray  # (M,)
    ladder: TemperatureLadder

    def tempered(self) -> np.ndarray:
        return self.ladder.as_array(self.cached_logpi_star.dtype) * self.cached_logpi_star


def rwm_step(x: np.ndarray, logpi: np.ndarray, beta: np.ndarray, target: TargetSpec,
             streams: StreamBank, scale: float = 1.0):
    """
    One random-walk Metropolis step per row, targeting beta * log pi*.

    Each stream gives ``dim`` normals for the proposal and then one uniform
    for the accept test. Proposals with log pi* = -inf are always rejected.
    Returns the new states, their cached log pi* and the acceptance flags.
    """
    dtype = target.dtype
    z = streams.normals(target.dim).astype(dtype)
    proposal = x + dtype.type(scale) * z
    logpi_prop = target.log_density(proposal)
    log_u = np.log(streams.uniforms())
    with np.errstate(invalid='ignore'):
        delta = beta.astype(np.float64) * (logpi_prop.astype(np.float64) - logpi.astype(np.float64))
    accepted = np.isfinite(logpi_prop) & (log_u < delta)
    new_x = np.where(accepted[:, None], proposal, x)
    new_logpi = np.where(accepted, logpi_prop, logpi)
    return new_x, new_logpi, accepted


def _rwm_kernel(chunk: Dict[str, np.ndarray], streams: StreamBank, target: TargetSpec,
                scale: float, steps: int = 1) -> Dict[str, np.ndarray]:
    x, logpi, beta = chunk['x'], chunk['logpi'], chunk['beta']
    accepted = np.zeros(x.shape[0], dtype=np.int64)
    for _ in range(steps):
        x, logpi, acc = rwm_step(x, logpi, beta, target, streams, scale)
        accepted += acc
    return {'x': x, 'logpi': logpi, 'beta': beta, 'accepted': accepted}


def rwm_kernel(target: TargetSpec, scale: float = 1.0, steps: int = 1):
    """par_map kernel applying ``steps`` RWM moves to a chunk."""
    return partial(_rwm_kernel, target=target, scale=scale, steps=steps)


def exchange_pairs(M: int, parity: int) -> List[Tuple[int, int]]:
    """
    Disjoint adjacent pairs (0-based).

    Parity 0: (0,1), (2,3), ...  Parity 1: (1,2), (3,4), ... and, when M is
    even, the wrap pair (M-1, 0) joining the two chains left unpaired. With
    odd M chain 0 or M-1 is already paired, so no wrap pair is formed.
    """
    pairs = [(i, i + 1) for i in range(parity, M - 1, 2)]
    if parity == 1 and M % 2 == 0 and M >= 2:
        pairs.append((M - 1, 0))
    return pairs


def exchange_pass(pop: ChainPopulation, stream) -> Tuple[ChainPopulation, dict]:
    """
    One exchange sweep.

    The coordinator stream gives one uniform for the parity and then one per
    pair in order. log alpha = (beta_i - beta_j)(log pi*(x_j) - log pi*(x_i));
    accepted pairs swap states and cached densities, nothing is re-evaluated.
    """
    M = pop.states.shape[0]
    parity = 0 if stream.next_uniform() < 0.5 else 1
    pairs = exchange_pairs(M, parity)
    info = {'parity': parity, 'attempted': len(pairs), 'accepted': 0, 'pairs': pairs, 'flags': []}
    if not pairs:
        return pop, info

    i = np.array([p[0] for p in pairs])
    j = np.array([p[1] for p in pairs])
    betas = pop.ladder.as_array()
    lp = pop.cached_logpi_star.astype(np.float64)
    log_u = np.log(stream.uniforms(len(pairs)))
    with np.errstate(invalid='ignore'):
        log_alpha = (betas[i] - betas[j]) * (lp[j] - lp[i])
    # equal temperatures or equal states always swap
    log_alpha = np.where((betas[i] == betas[j]) | (lp[i] == lp[j]), 0.0, log_alpha)
    flags = log_u < log_alpha

    states = pop.states.copy()
    cache = pop.cached_logpi_star.copy()
    si, sj = i[flags], j[flags]
    states[si], states[sj] = pop.states[sj], pop.states[si]
    cache[si], cache[sj] = pop.cached_logpi_star[sj], pop.cached_logpi_star[si]
    info['accepted'] = int(flags.sum())
    info['flags'] = flags.tolist()
    return ChainPopulation(states, cache, pop.ladder), info


@dataclass
class PopMcmcResult:
    samples: np.ndarray  # (iterations, k), chain M
    trace: List[dict]
    chain_table: List[dict]
    final: ChainPopulation
    all_chains: Optional[np.ndarray] = None  # (iterations, M, k)
    meta: dict = field(default_factory=dict)


def run_popmcmc(config: PopMcmcConfig, target: TargetSpec, initial: np.ndarray = None) -> PopMcmcResult:
    """
    Run ``burn_in + iterations`` sweeps and keep the last ``iterations`` states of chain M.

    Chains start i.i.d. uniform on the target's box, each from its own
    substream, or at ``initial`` when given (zeros for unbounded targets).
    """
    mode = PrecisionMode.coerce(config.precision)
    dtype = mode.dtype
    M, k = config.chains, target.dim
    ladder = make_ladder(M)
    bank, coordinator = build_streams(config.generator, config.seed, M, config.block_length)

    if initial is not None:
        x0 = np.broadcast_to(np.asarray(initial, dtype=dtype), (M, k)).copy()
    elif target.bounds is not None:
        x0 = target.sample_prior(bank)
    else:
        x0 = np.zeros((M, k), dtype=dtype)
    logpi0 = target.log_density(x0)
    if not np.all(np.isfinite(logpi0)):
        raise ConfigurationError('Initial chain states must have finite log density')

    population = Population(
        {'x': x0, 'logpi': logpi0, 'beta': ladder.as_array(dtype), 'accepted': np.zeros(M, dtype=np.int64)},
        bank,
    )
    kernel = rwm_kernel(target, config.rwm_scale)
    total = config.burn_in + config.iterations
    samples = np.empty((config.iterations, k), dtype=dtype)
    all_chains = np.empty((config.iterations, M, k), dtype=dtype) if config.dump_all_chains else None
    rwm_accepts = np.zeros(M, dtype=np.int64)
    swap_attempts = np.zeros(M, dtype=np.int64)
    swap_accepts = np.zeros(M, dtype=np.int64)
    trace = []

    logger.info(f"popmcmc: M={M}, iterations={config.iterations}, burn_in={config.burn_in}, "
                f"workers={config.workers}, precision={mode.value}")
    with WorkerPool(config.workers) as pool:
        for it in range(total):
            population = pool.map(population, kernel)
            rwm_accepts += population['accepted']
            chains = ChainPopulation(population['x'], population['logpi'], ladder)
            chains, info = exchange_pass(chains, coordinator)
            for (a, b), flag in zip(info['pairs'], info['flags']):
                swap_attempts[a] += 1
                swap_attempts[b] += 1
                swap_accepts[a] += flag
                swap_accepts[b] += flag
            population.items['x'] = chains.states
            population.items['logpi'] = chains.cached_logpi_star

            trace.append({
                'iteration': it,
                'parity': info['parity'],
                'swaps_attempted': info['attempted'],
                'swaps_accepted': info['accepted'],
                'logpi_target_chain': float(chains.cached_logpi_star[-1]),
            })
            if it >= config.burn_in:
                row = it - config.burn_in
                samples[row] = chains.states[-1]
                if all_chains is not None:
                    all_chains[row] = chains.states
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(f"iteration {it}: parity={info['parity']} swaps {info['accepted']}/{info['attempted']}")

    chain_table = [
        {
            'chain': c,
            'beta': ladder.betas[c],
            'rwm_acceptance': rwm_accepts[c] / total,
            'swap_acceptance': (swap_accepts[c] / swap_attempts[c]) if swap_attempts[c] else float('nan'),
        }
        for c in range(M)
    ]
    final = ChainPopulation(population['x'], population['logpi'], ladder)
    logger.info(f"popmcmc finished: target-chain RWM acceptance {chain_table[-1]['rwm_acceptance']:.3f}, "
                f"swaps accepted {int(swap_accepts.sum()) // 2}")
    return PopMcmcResult(samples=samples, trace=trace, chain_table=chain_table, final=final,
                         all_chains=all_chains)
