"""
Sparse Distributed Memory

A fixed set of m hard locations, each with an immutable random D-bit address and a row of D
counters. A probe activates every location whose address lies within a Hamming radius of it.
A write adds the data vector (+1 for a 1 bit, -1 for a 0 bit) to the counters of all activated
locations, a read sums the counters of the activated locations and thresholds the sums at 0.

Counters saturate at +-(2**(counter_bits - 1) - 1) instead of wrapping around.

File format (little endian):
    b'SDM1', D, m, radius, counter_bits as uint32, seed, write count and total activations as uint64,
    m * ceil(D/8) bytes of packed addresses, then m * D counters as int8/int16/int32
"""

import logging
import struct
import threading
import typing as t
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .hypervector import (Hypervector, RandomSource, DimensionMismatch, FormatError,
                          bind, random_hv, threshold_sums, hamming_similarity, validate_dimension)

__all__ = ['SdmConfig', 'Sdm', 'WriteReport', 'ReadResult', 'IterativeReadResult', 'SdmStats',
           'InvalidSdmConfig', 'NoActiveLocation',
           'choose_radius', 'activation_probability', 'sdm_new', 'activate', 'sdm_write', 'sdm_read',
           'sdm_read_iterative', 'sdm_stats', 'sdm_clear', 'sdm_write_bound', 'sdm_read_bound',
           'bench_curve', 'trend_slope', 'max_step_drop']

logger = logging.getLogger(__name__)

SDM_MAGIC = b'SDM1'

_COUNTER_DTYPES = {8: np.int8, 16: np.int16, 32: np.int32}


class InvalidSdmConfig(ValueError):
    pass


class NoActiveLocation(RuntimeError):
    pass


def activation_probability(dim: int, radius: int) -> float:
    """Probability that a random address lies within Hamming distance radius of a probe"""
    return float(stats.binom.cdf(radius, dim, 0.5))


def choose_radius(dim: int, m: int, target_p: float) -> int:
    """Smallest radius r with binomial-CDF(r; D, 0.5) >= target_p

    The CDF is evaluated for all r in 0..D and the first index reaching target_p is returned.
    """
    dim = validate_dimension(dim)
    if not 0.0 < target_p < 1.0:
        raise ValueError(f'target_p must be in (0, 1), got {target_p}')
    cdf = stats.binom.cdf(np.arange(dim + 1), dim, 0.5)
    radius = int(np.searchsorted(cdf, target_p, side='left'))
    radius = min(radius, dim)
    logger.debug(f'Radius {radius} for D={dim}, target p={target_p}: '
                 f'p={cdf[radius]:.6g}, expected activations {m * cdf[radius]:.2f} of {m}')
    return radius


@dataclass(frozen=True)
class SdmConfig:
    """Shape of a Sparse Distributed Memory

    Args:
        dim: address and word width
        m: number of hard locations
        radius: activation threshold (Hamming distance in bits)
        counter_bits: 8, 16 or 32; counters saturate at +-(2**(counter_bits-1) - 1)
    """
    dim: int
    m: int
    radius: int
    counter_bits: int = 8

    def validate(self) -> 'SdmConfig':
        try:
            validate_dimension(self.dim)
        except ValueError as e:
            raise InvalidSdmConfig(str(e))
        if self.m < 1:
            raise InvalidSdmConfig(f'Need at least one hard location, got m={self.m}')
        if not 0 <= self.radius <= self.dim:
            raise InvalidSdmConfig(f'Radius must be in [0, {self.dim}], got {self.radius}')
        if self.counter_bits not in _COUNTER_DTYPES:
            raise InvalidSdmConfig(f'counter_bits must be one of {sorted(_COUNTER_DTYPES)}, got {self.counter_bits}')
        expected = self.expected_activations
        if expected < 1:
            logger.warning(f'Only {expected:.3f} locations are expected to be activated per probe '
                           f'(m={self.m}, radius={self.radius}, D={self.dim})')
        return self

    @classmethod
    def from_target_p(cls, dim: int, m: int, target_p: float, counter_bits: int = 8) -> 'SdmConfig':
        return cls(dim=dim, m=m, radius=choose_radius(dim, m, target_p), counter_bits=counter_bits).validate()

    @property
    def activation_probability(self) -> float:
        return activation_probability(self.dim, self.radius)

    @property
    def expected_activations(self) -> float:
        return self.m * self.activation_probability

    @property
    def counter_bound(self) -> int:
        return 2 ** (self.counter_bits - 1) - 1


class Sdm():
    """The memory: fixed addresses plus counter rows

    Use `sdm_new` to create one. Reads may run concurrently; writes take a lock on the counters.
    """

    def __init__(self, config: SdmConfig, addresses: np.ndarray, counters: np.ndarray,
                 seed: int, write_count: int = 0, activation_total: int = 0):
        self.config = config
        addresses.setflags(write=False)
        self.addresses = addresses
        self.counters = counters
        self.seed = seed
        self.write_count = write_count
        self.activation_total = activation_total
        self._write_lock = threading.Lock()

    @property
    def dim(self) -> int:
        return self.config.dim

    def address(self, index: int) -> Hypervector:
        return Hypervector._wrap(self.addresses[index])

    def to_bytes(self) -> bytes:
        c = self.config
        header = SDM_MAGIC + struct.pack('<IIIIQQQ', c.dim, c.m, c.radius, c.counter_bits, self.seed,
                                         self.write_count, self.activation_total)
        packed = np.packbits(self.addresses, axis=1, bitorder='little').tobytes()
        dtype = np.dtype(_COUNTER_DTYPES[c.counter_bits]).newbyteorder('<')
        return header + packed + self.counters.astype(dtype).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Sdm':
        if data[:4] != SDM_MAGIC:
            raise FormatError(f'Not a sparse distributed memory: expected magic {SDM_MAGIC!r}, got {data[:4]!r}')
        if len(data) < 44:
            raise FormatError('Truncated memory header')
        dim, m, radius, counter_bits, seed, write_count, activation_total = struct.unpack('<IIIIQQQ', data[4:44])
        config = SdmConfig(dim=dim, m=m, radius=radius, counter_bits=counter_bits).validate()
        row_bytes = (dim + 7) // 8
        counter_dtype = np.dtype(_COUNTER_DTYPES[counter_bits]).newbyteorder('<')
        addresses_end = 44 + m * row_bytes
        expected_length = addresses_end + m * dim * counter_dtype.itemsize
        if len(data) != expected_length:
            raise FormatError(f'Memory file has {len(data)} bytes, expected {expected_length} for D={dim}, m={m}')
        packed = np.frombuffer(data[44:addresses_end], dtype=np.uint8).reshape(m, row_bytes)
        addresses = np.unpackbits(packed, axis=1, count=dim, bitorder='little')
        counters = np.frombuffer(data[addresses_end:], dtype=counter_dtype).reshape(m, dim)
        counters = counters.astype(_COUNTER_DTYPES[counter_bits])
        return cls(config, addresses, counters, seed, write_count, activation_total)

    def save(self, path: str):
        with open(path, 'wb') as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path: str) -> 'Sdm':
        with open(path, 'rb') as f:
            sdm = cls.from_bytes(f.read())
        logger.debug(f'Loaded memory from {path}: {sdm!r}')
        return sdm

    def __repr__(self):
        c = self.config
        return f'Sdm(dim={c.dim}, m={c.m}, radius={c.radius}, counter_bits={c.counter_bits}, writes={self.write_count})'


@dataclass
class WriteReport:
    activated: int


@dataclass
class ReadResult:
    """Outcome of a read

    `empty` flags that every column sum was zero (nothing stored under this address); the vector
    is then pure tie-break noise and callers should treat it as 'nothing known'.
    """
    vector: Hypervector
    confidence: float
    activated: int
    empty: bool = False


@dataclass
class IterativeReadResult:
    vector: Hypervector
    iterations: int
    converged: bool
    empty: bool = False


@dataclass
class SdmStats:
    writes: int
    mean_activation: float
    expected_activation: float
    saturation_fraction: float
    counter_histogram: t.Dict[int, int] = field(default_factory=dict)


def sdm_new(config: SdmConfig, rng: RandomSource) -> Sdm:
    """A memory with m i.i.d. random addresses and all counters zero"""
    config.validate()
    addresses = rng.bits((config.m, config.dim))
    counters = np.zeros((config.m, config.dim), dtype=_COUNTER_DTYPES[config.counter_bits])
    logger.debug(f'New memory: m={config.m}, D={config.dim}, radius={config.radius}, '
                 f'expected activations {config.expected_activations:.2f}')
    return Sdm(config, addresses, counters, seed=rng.seed)


def _check_dim(sdm: Sdm, v: Hypervector, what: str):
    if v.dim != sdm.dim:
        raise DimensionMismatch(f'Dimension mismatch: {what} has D={v.dim}, memory has D={sdm.dim}')


def activate(sdm: Sdm, probe: Hypervector) -> np.ndarray:
    """Indices (ascending) of all locations within the activation radius of probe"""
    _check_dim(sdm, probe, 'probe')
    distances = np.count_nonzero(sdm.addresses != probe.bits, axis=1)
    return np.flatnonzero(distances <= sdm.config.radius)


def sdm_write(sdm: Sdm, addr: Hypervector, data: Hypervector) -> WriteReport:
    """Adds the +-1 image of data to the counters of every location activated by addr"""
    _check_dim(sdm, data, 'data')
    active = activate(sdm, addr)
    bound = sdm.config.counter_bound
    polar = 2 * data.bits.astype(np.int64) - 1
    with sdm._write_lock:
        if active.size:
            rows = sdm.counters[active].astype(np.int64) + polar
            np.clip(rows, -bound, bound, out=rows)
            sdm.counters[active] = rows
        sdm.write_count += 1
        sdm.activation_total += int(active.size)
    if not active.size:
        logger.debug('Write activated no location')
    return WriteReport(activated=int(active.size))


def sdm_read(sdm: Sdm, addr: Hypervector, rng: RandomSource) -> ReadResult:
    """Sums the counters of the activated locations and thresholds at 0 (ties from rng)

    Raises NoActiveLocation if addr activates no location.
    """
    active = activate(sdm, addr)
    if not active.size:
        raise NoActiveLocation(f'Probe activated none of the {sdm.config.m} locations (radius {sdm.config.radius})')
    sums = sdm.counters[active].sum(axis=0, dtype=np.int64)
    vector = threshold_sums(sums, rng)
    confidence = float(np.abs(sums).mean()) / active.size
    return ReadResult(vector=vector, confidence=confidence, activated=int(active.size), empty=not sums.any())


def sdm_read_iterative(sdm: Sdm, probe: Hypervector, max_iters: int, rng: RandomSource) -> IterativeReadResult:
    """Reads repeatedly, using each output as the next probe, until the output repeats exactly

    Stops without convergence after max_iters reads or on an empty read.
    """
    if max_iters < 1:
        raise ValueError(f'max_iters must be at least 1, got {max_iters}')
    current = probe
    for iteration in range(1, max_iters + 1):
        result = sdm_read(sdm, current, rng)
        if result.empty:
            return IterativeReadResult(vector=result.vector, iterations=iteration, converged=False, empty=True)
        if result.vector == current:
            return IterativeReadResult(vector=current, iterations=iteration, converged=True)
        current = result.vector
    return IterativeReadResult(vector=current, iterations=max_iters, converged=False)


def sdm_stats(sdm: Sdm) -> SdmStats:
    bound = sdm.config.counter_bound
    values, counts = np.unique(sdm.counters, return_counts=True)
    saturated = int(np.count_nonzero(np.abs(sdm.counters.astype(np.int64)) >= bound))
    return SdmStats(
        writes=sdm.write_count,
        mean_activation=sdm.activation_total / sdm.write_count if sdm.write_count else 0.0,
        expected_activation=sdm.config.expected_activations,
        saturation_fraction=saturated / sdm.counters.size,
        counter_histogram={int(v): int(n) for v, n in zip(values, counts)})


def sdm_clear(sdm: Sdm):
    """Erases all counters; addresses stay"""
    with sdm._write_lock:
        sdm.counters.fill(0)
        sdm.write_count = 0
        sdm.activation_total = 0


def sdm_write_bound(sdm: Sdm, addr: Hypervector, data: Hypervector) -> WriteReport:
    """Stores bind(addr, data) at addr, so equal data stored under different addresses do not reinforce each other"""
    return sdm_write(sdm, addr, bind(addr, data))


def sdm_read_bound(sdm: Sdm, addr: Hypervector, rng: RandomSource) -> ReadResult:
    result = sdm_read(sdm, addr, rng)
    result.vector = bind(result.vector, addr)
    return result


def bench_curve(config: SdmConfig, items: int, trials: int, rng: RandomSource,
                load_grid: t.Optional[t.Sequence[int]] = None) -> t.List[t.Dict[str, t.Any]]:
    """Read similarity as a function of the number of stored (address, data) pairs

    Pairs are written incrementally; at every load point up to `trials` of the stored pairs are
    read back at their address. Returns one dict per load point (load, mean/min similarity,
    empty and failed reads, saturation fraction).

    Args:
        config: memory shape
        items: the largest load; load points are the grid values up to items, plus items itself
        trials: number of stored pairs read back per load point
        rng: source for addresses, data, reads and the sample of pairs that is read back
        load_grid: default `config.sdm_bench_load_grid()`
    """
    from . import config as c

    if items < 0:
        raise ValueError(f'items must be nonnegative, got {items}')
    if trials < 1:
        raise ValueError(f'trials must be at least 1, got {trials}')
    grid = sorted({n for n in (load_grid or c.sdm_bench_load_grid()) if 0 < n <= items} | ({items} if items else set()))
    if not grid:
        return []

    sdm = sdm_new(config, rng.spawn(0))
    pair_rng = rng.spawn(1)
    read_rng = rng.spawn(2)
    addresses: t.List[Hypervector] = []
    data: t.List[Hypervector] = []
    curve = []
    for load in grid:
        while len(addresses) < load:
            a, d = random_hv(pair_rng, config.dim), random_hv(pair_rng, config.dim)
            sdm_write(sdm, a, d)
            addresses.append(a)
            data.append(d)
        sample = np.sort(read_rng.positions(load, min(trials, load)))
        similarities = []
        empty_reads = failed_reads = 0
        for i in sample:
            try:
                result = sdm_read(sdm, addresses[i], read_rng)
            except NoActiveLocation:
                failed_reads += 1
                similarities.append(0.5)
                continue
            empty_reads += int(result.empty)
            similarities.append(hamming_similarity(result.vector, data[i]))
        load_stats = sdm_stats(sdm)
        curve.append({'load': load,
                      'reads': len(sample),
                      'mean_similarity': float(np.mean(similarities)),
                      'min_similarity': float(np.min(similarities)),
                      'empty_reads': empty_reads,
                      'no_active_location': failed_reads,
                      'mean_activation': load_stats.mean_activation,
                      'saturation_fraction': load_stats.saturation_fraction})
        logger.info(f'load {load}: mean similarity {curve[-1]["mean_similarity"]:.4f}')
    return curve


def trend_slope(curve: t.Sequence[t.Dict[str, t.Any]]) -> float:
    """Least squares slope of mean similarity over load (0.0 for fewer than two points)"""
    if len(curve) < 2:
        return 0.0
    loads = np.array([p['load'] for p in curve], dtype=np.float64)
    means = np.array([p['mean_similarity'] for p in curve], dtype=np.float64)
    return float(np.polyfit(loads, means, 1)[0])


def max_step_drop(curve: t.Sequence[t.Dict[str, t.Any]]) -> float:
    """Largest decrease of mean similarity between consecutive load points"""
    drops = [a['mean_similarity'] - b['mean_similarity'] for a, b in zip(curve, curve[1:])]
    return max([0.0] + drops)
