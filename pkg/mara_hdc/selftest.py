"""
Randomized property checks of the vector algebra and the item memory.

Every check draws its vectors from its own stream of the run seed, so a run is fully determined by
(dim, seed, cases). Checks whose statistics are meaningless at the given dimension are skipped
with a notice instead of failing.
"""

import logging
import math
import time
import typing as t

import numpy as np

from . import config as c
from .hypervector import RandomSource, random_hv, bind, bundle, permute, hamming_distance, hamming_similarity
from .item_memory import Codebook, cleanup
from .sequence import encode_chunk, decode_chunk

__all__ = ['run_selftest', 'CHECKS']

logger = logging.getLogger(__name__)

# below these dimensions the statistical checks are skipped
MIN_DIM_ORTHOGONALITY = 100
MIN_DIM_CHUNKS = 1000

CHUNK_CAPACITY = 7
CHUNK_SUCCESS_RATE = 0.99


def _result(name: str, cases: int, failures: int, **extra) -> t.Dict[str, t.Any]:
    return dict(name=name, cases=cases, failures=failures, passed=failures == 0, skipped=False, **extra)


def _skipped(name: str, notice: str) -> t.Dict[str, t.Any]:
    return dict(name=name, cases=0, failures=0, passed=True, skipped=True, notice=notice)


def check_bind_self_inverse(dim: int, cases: int, rng: RandomSource):
    failures = 0
    for _ in range(cases):
        x, y = random_hv(rng, dim), random_hv(rng, dim)
        failures += bind(bind(x, y), y) != x
    return _result('bind_self_inverse', cases, failures)


def check_bind_commutative_associative(dim: int, cases: int, rng: RandomSource):
    failures = 0
    for _ in range(cases):
        x, y, z = random_hv(rng, dim), random_hv(rng, dim), random_hv(rng, dim)
        failures += bind(x, y) != bind(y, x) or bind(bind(x, y), z) != bind(x, bind(y, z))
    return _result('bind_commutative_associative', cases, failures)


def check_bind_preserves_distance(dim: int, cases: int, rng: RandomSource):
    failures = 0
    for _ in range(cases):
        x, y, z = random_hv(rng, dim), random_hv(rng, dim), random_hv(rng, dim)
        failures += hamming_distance(bind(x, z), bind(y, z)) != hamming_distance(x, y)
    return _result('bind_preserves_distance', cases, failures)


def check_permutation_laws(dim: int, cases: int, rng: RandomSource):
    """Composition, inverse and period D of the rotation"""
    failures = 0
    for _ in range(cases):
        v = random_hv(rng, dim)
        a, b = (int(k) for k in rng.integers(-2 * dim, 2 * dim + 1, size=2))
        failures += (permute(permute(v, a), b) != permute(v, a + b)
                     or permute(permute(v, a), -a) != v
                     or permute(v, dim) != v
                     or hamming_distance(permute(v, a), v) != hamming_distance(permute(v, a + dim), v))
    return _result('permutation_laws', cases, failures)


def check_permute_distributes(dim: int, cases: int, rng: RandomSource):
    """rho(x * y) = rho(x) * rho(y) and rho([x + y + z]) = [rho(x) + rho(y) + rho(z)]"""
    failures = 0
    for _ in range(cases):
        x, y, z = random_hv(rng, dim), random_hv(rng, dim), random_hv(rng, dim)
        k = int(rng.integers(1, dim + 1))
        # three vectors never tie, so no tie-break bits are drawn
        failures += (permute(bind(x, y), k) != bind(permute(x, k), permute(y, k))
                     or permute(bundle([x, y, z], rng), k) != bundle([permute(x, k), permute(y, k), permute(z, k)], rng))
    return _result('permute_distributes', cases, failures)


def check_bound_pair_decoding(dim: int, cases: int, rng: RandomSource):
    """cleanup(X * (X * A)) gives back exactly A"""
    cb = Codebook(dim, seed=int(rng.integers(0, 2 ** 31)), symbols=[f's{i}' for i in range(27)])
    symbols = cb.symbols
    failures = 0
    for _ in range(cases):
        a = cb.lookup(symbols[int(rng.integers(0, len(symbols)))])
        x = random_hv(rng, dim)
        symbol, similarity = cleanup(cb, bind(x, bind(x, a)))
        # compare vectors: at tiny D two symbols can share a vector
        failures += cb.lookup(symbol) != a or similarity != 1.0
    return _result('bound_pair_decoding', cases, failures)


def check_orthogonality(dim: int, cases: int, rng: RandomSource):
    """Similarities of random pairs concentrate at 0.5: every sample and the mean within 5 sigma"""
    if dim < MIN_DIM_ORTHOGONALITY:
        return _skipped('orthogonality', f'skipped: D={dim} < {MIN_DIM_ORTHOGONALITY}, no concentration to test')
    similarities = np.array([hamming_similarity(random_hv(rng, dim), random_hv(rng, dim)) for _ in range(cases)])
    sample_bound = 5 * 0.5 / math.sqrt(dim)
    mean_bound = sample_bound / math.sqrt(cases)
    failures = int(np.count_nonzero(np.abs(similarities - 0.5) > sample_bound))
    mean = float(similarities.mean())
    failures += abs(mean - 0.5) > mean_bound
    return _result('orthogonality', cases, failures, mean_similarity=mean,
                   min_similarity=float(similarities.min()), max_similarity=float(similarities.max()),
                   sample_bound=sample_bound, mean_bound=mean_bound)


def check_chunk_round_trip(dim: int, trials: int, rng: RandomSource):
    """encode_chunk / decode_chunk over a 27 entry codebook for k = 1 .. chunk limit

    Fails if some k <= 7 decodes correctly in fewer than 99% of the trials; also reports the
    smallest k with a failed trial.
    """
    if dim < MIN_DIM_CHUNKS:
        return _skipped('chunk_round_trip', f'skipped: D={dim} < {MIN_DIM_CHUNKS}, chunks of random vectors are not decodable')
    cb = Codebook(dim, seed=int(rng.integers(0, 2 ** 31)), symbols=[f's{i}' for i in range(27)])
    symbols = cb.symbols
    success_rates = {}
    for k in range(1, c.chunk_limit() + 1):
        successes = 0
        for _ in range(trials):
            chosen = [symbols[int(i)] for i in rng.integers(0, len(symbols), size=k)]
            chunk = encode_chunk([cb.lookup(s) for s in chosen], rng)
            successes += [s for s, _ in decode_chunk(chunk, k, cb)] == chosen
        success_rates[k] = successes / trials
    failures = sum(1 for k, rate in success_rates.items() if k <= CHUNK_CAPACITY and rate < CHUNK_SUCCESS_RATE)
    failures_begin_at = min((k for k, rate in success_rates.items() if rate < 1.0), default=None)
    return _result('chunk_round_trip', trials * len(success_rates), failures,
                   success_rates=success_rates, failures_begin_at=failures_begin_at)


CHECKS = [check_bind_self_inverse, check_bind_commutative_associative, check_bind_preserves_distance,
          check_permutation_laws, check_permute_distributes, check_bound_pair_decoding,
          check_orthogonality, check_chunk_round_trip]


def run_selftest(dim: int, seed: int, cases: int = 1000, chunk_trials: int = 100) -> t.Dict[str, t.Any]:
    """Runs all checks; returns the per check results and the pass / fail counts"""
    started = time.perf_counter()
    checks = []
    for stream, check in enumerate(CHECKS):
        rng = RandomSource(seed, stream=stream)
        n = chunk_trials if check is check_chunk_round_trip else cases
        result = check(dim, n, rng)
        logger.info(f'{result["name"]}: {"skipped" if result["skipped"] else "ok" if result["passed"] else "FAILED"}')
        checks.append(result)
    return {'checks': checks,
            'n_checks': len(checks),
            'n_passed': sum(1 for r in checks if r['passed'] and not r['skipped']),
            'n_skipped': sum(1 for r in checks if r['skipped']),
            'n_failed': sum(1 for r in checks if not r['passed']),
            'passed': all(r['passed'] for r in checks),
            'wall_clock_seconds': time.perf_counter() - started}
