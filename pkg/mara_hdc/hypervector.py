"""
Binary hypervectors and the vector instruction set.

A hypervector is a D-bit vector of 0s and 1s. The operations are:

'random_hv': a seed vector with i.i.d. uniform bits
'bind': coordinatewise XOR (multiplication); commutative, associative and self-inverse
'bundle': coordinatewise majority (addition), ties broken with bits from a RandomSource
'permute': cyclic rotation to the right, bit i moves to (i + k) mod D
'hamming_similarity': 1 - (differing bits) / D

Unthresholded sums live in an Accumulator, which maps bit 1 to +1 and bit 0 to -1
(the bipolar view). Thresholding an accumulator at 0 gives the majority vector.

Binary formats (all integers little endian):
    Hypervector:  b'HDV1', D as uint32, then ceil(D/8) bytes of packed bits (bit i of the vector
                  is bit (i % 8) of byte i // 8)
    Accumulator:  b'ACC1', D as uint32, n_added as uint64, then D int32 counts
"""

import base64
import hashlib
import struct
import typing as t

import numpy as np

__all__ = ['Hypervector', 'Accumulator', 'RandomSource',
           'DimensionMismatch', 'EmptyInput', 'AccumulatorOverflow', 'ZeroNorm', 'FormatError',
           'DEFAULT_DIMENSION', 'validate_dimension',
           'random_hv', 'bind', 'bundle', 'accumulate', 'threshold', 'threshold_sums', 'permute', 'complement',
           'flip_bits', 'hamming_distance', 'hamming_similarity', 'cosine', 'bipolar', 'digest']

DEFAULT_DIMENSION = 10_000

_INT32_MAX = 2 ** 31 - 1

HV_MAGIC = b'HDV1'
ACC_MAGIC = b'ACC1'


class DimensionMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class AccumulatorOverflow(OverflowError):
    pass


class ZeroNorm(ValueError):
    pass


class FormatError(ValueError):
    pass


def validate_dimension(dim: int) -> int:
    """Returns dim as int or raises a ValueError if it is not a usable dimension (d >= 2)"""
    if isinstance(dim, bool) or int(dim) != dim:
        raise ValueError(f'Dimension must be an integer, got {dim!r}')
    dim = int(dim)
    if dim < 2:
        raise ValueError(f'Dimension must be at least 2, got {dim}')
    return dim


def _check_same_dimension(*dims: int):
    if len(set(dims)) > 1:
        raise DimensionMismatch(f'Dimension mismatch: {" vs ".join(str(d) for d in dims)}')


class RandomSource():
    """Explicit, seeded source of random bits

    Uses numpy's PCG64 bit generator, so identical seeds give identical streams on every
    platform numpy supports. Every operation that needs randomness takes a RandomSource
    argument and advances it; nothing reads hidden global state.

    A source is identified by its seed and a stream path. The path is the SeedSequence spawn key,
    so sources with different paths (including a path and its own prefix) are independent.

    Args:
        seed: int, a 64-bit seed (taken modulo 2**64)
        stream: optional int or sequence of ints, the stream path below the seed
    """

    def __init__(self, seed: int, stream: t.Optional[t.Union[int, t.Sequence[int]]] = None):
        self.seed = int(seed) % 2 ** 64
        if stream is None:
            self.stream: t.Tuple[int, ...] = ()
        elif isinstance(stream, (int, np.integer)):
            self.stream = (int(stream),)
        else:
            self.stream = tuple(int(s) for s in stream)
        if any(s < 0 for s in self.stream):
            raise ValueError(f'Stream numbers must be non-negative, got {self.stream}')
        seed_sequence = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._generator = np.random.Generator(np.random.PCG64(seed_sequence))

    def bits(self, shape: t.Union[int, t.Tuple[int, ...]]) -> np.ndarray:
        """Uniform {0,1} bits as uint8 array"""
        return self._generator.integers(0, 2, size=shape, dtype=np.uint8)

    def positions(self, n: int, k: int) -> np.ndarray:
        """k distinct positions out of range(n)"""
        return self._generator.choice(n, size=k, replace=False)

    def integers(self, low: int, high: int, size=None):
        return self._generator.integers(low, high, size=size)

    @property
    def generator(self) -> np.random.Generator:
        """The underlying numpy generator, for sampling beyond plain bits"""
        return self._generator

    def spawn(self, stream: int) -> 'RandomSource':
        """A child source: this source's stream path extended by `stream`"""
        return RandomSource(self.seed, stream=self.stream + (int(stream),))

    def __repr__(self):
        return f'RandomSource(seed={self.seed}, stream={self.stream})'


class Hypervector():
    """An immutable D-bit binary vector

    Args:
        bits: array-like of 0/1 values, length D (D >= 2)
    """
    __slots__ = ('bits',)

    def __init__(self, bits: t.Union[np.ndarray, t.Sequence[int]]):
        raw = np.asarray(bits).reshape(-1)
        validate_dimension(raw.shape[0])
        if not np.isin(raw, (0, 1)).all():
            raise ValueError('Hypervector bits must be 0 or 1')
        array = raw.astype(np.uint8, copy=True)
        array.setflags(write=False)
        self.bits = array

    @classmethod
    def _wrap(cls, array: np.ndarray) -> 'Hypervector':
        # internal constructor for arrays already known to be valid 0/1 uint8
        v = cls.__new__(cls)
        array = np.ascontiguousarray(array, dtype=np.uint8)
        array.setflags(write=False)
        v.bits = array
        return v

    @classmethod
    def from_string(cls, bit_string: str) -> 'Hypervector':
        """'10110' -> Hypervector; bit 0 is the leftmost character"""
        return cls([int(ch) for ch in bit_string.strip()])

    @property
    def dim(self) -> int:
        return self.bits.shape[0]

    def to_string(self) -> str:
        return ''.join('1' if b else '0' for b in self.bits)

    def packed(self) -> bytes:
        return np.packbits(self.bits, bitorder='little').tobytes()

    @classmethod
    def from_packed(cls, data: bytes, dim: int) -> 'Hypervector':
        dim = validate_dimension(dim)
        n_bytes = (dim + 7) // 8
        if len(data) != n_bytes:
            raise FormatError(f'Expected {n_bytes} packed bytes for D={dim}, got {len(data)}')
        return cls._wrap(np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=dim, bitorder='little'))

    def to_bytes(self) -> bytes:
        return HV_MAGIC + struct.pack('<I', self.dim) + self.packed()

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Hypervector':
        if data[:4] != HV_MAGIC:
            raise FormatError(f'Not a hypervector: expected magic {HV_MAGIC!r}, got {data[:4]!r}')
        if len(data) < 8:
            raise FormatError('Truncated hypervector header')
        dim, = struct.unpack('<I', data[4:8])
        return cls.from_packed(data[8:], dim)

    def to_base64(self) -> str:
        return base64.b64encode(self.to_bytes()).decode('ascii')

    @classmethod
    def from_base64(cls, text: str) -> 'Hypervector':
        return cls.from_bytes(base64.b64decode(text))

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash(self.packed())

    def __repr__(self):
        if self.dim <= 32:
            return f'Hypervector({self.to_string()})'
        return f'Hypervector(dim={self.dim}, digest={digest(self)})'


class Accumulator():
    """A D-wide signed integer counter vector: the unthresholded sum of hypervectors

    Each added hypervector contributes +1 for a 1 bit and -1 for a 0 bit, so |counts[i]| <= n_added.
    Counts are kept as int32; adding beyond the int32 range raises AccumulatorOverflow.

    Args:
        dim: int, the dimension
        counts: optional initial counts (defaults to all zero)
        n_added: number of vectors the counts represent
    """

    def __init__(self, dim: int, counts: t.Optional[np.ndarray] = None, n_added: int = 0):
        self.dim = validate_dimension(dim)
        if n_added < 0:
            raise ValueError(f'n_added must be nonnegative, got {n_added}')
        if counts is None:
            self.counts = np.zeros(self.dim, dtype=np.int32)
        else:
            counts = np.asarray(counts)
            if counts.shape != (self.dim,):
                raise DimensionMismatch(f'Dimension mismatch: counts of length {counts.shape[0]} vs {self.dim}')
            largest = int(np.abs(counts.astype(np.int64)).max()) if counts.size else 0
            if largest > _INT32_MAX:
                raise AccumulatorOverflow('Counts exceed the int32 range')
            if largest > n_added:
                raise ValueError(f'Counts up to {largest} cannot come from {n_added} added vectors')
            self.counts = counts.astype(np.int32)
        self.n_added = int(n_added)

    def copy(self) -> 'Accumulator':
        return Accumulator(self.dim, self.counts.copy(), self.n_added)

    def add(self, v: Hypervector, times: int = 1) -> 'Accumulator':
        """Adds v (times times) in place and returns self"""
        _check_same_dimension(self.dim, v.dim)
        if times < 0:
            raise ValueError(f'times must be nonnegative, got {times}')
        self._check_room(times)
        self.counts += (2 * v.bits.astype(np.int32) - 1) * times
        self.n_added += times
        return self

    def add_bit_sums(self, ones: np.ndarray, n: int) -> 'Accumulator':
        """Adds n vectors in place, given how many of them have a 1 in each coordinate"""
        if ones.shape != (self.dim,):
            raise DimensionMismatch(f'Dimension mismatch: {ones.shape[0]} vs {self.dim}')
        self._check_room(n)
        self.counts += (2 * ones.astype(np.int64) - n).astype(np.int32)
        self.n_added += n
        return self

    def _check_room(self, n: int):
        if self.n_added + n > _INT32_MAX or (self.counts.size and int(np.abs(self.counts).max()) + n > _INT32_MAX):
            raise AccumulatorOverflow(
                f'Adding {n} vectors to an accumulator holding {self.n_added} would overflow the int32 counters')

    def negated(self) -> 'Accumulator':
        return Accumulator(self.dim, -self.counts.astype(np.int64), self.n_added)

    def scaled(self, factor: int) -> 'Accumulator':
        """Counts multiplied by a positive integer factor (as if every vector was added factor times)"""
        if factor < 1:
            raise ValueError(f'factor must be a positive integer, got {factor}')
        return Accumulator(self.dim, self.counts.astype(np.int64) * factor, self.n_added * factor)

    def __add__(self, other: 'Accumulator') -> 'Accumulator':
        if not isinstance(other, Accumulator):
            return NotImplemented
        _check_same_dimension(self.dim, other.dim)
        if self.n_added + other.n_added > _INT32_MAX:
            raise AccumulatorOverflow('Sum of accumulators would overflow the int32 counters')
        return Accumulator(self.dim, self.counts.astype(np.int64) + other.counts, self.n_added + other.n_added)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.counts.astype(np.float64), self.counts.astype(np.float64))))

    def to_bytes(self) -> bytes:
        return ACC_MAGIC + struct.pack('<IQ', self.dim, self.n_added) + self.counts.astype('<i4').tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Accumulator':
        acc, rest = cls.read_from(data)
        if rest:
            raise FormatError(f'{len(rest)} trailing bytes after accumulator')
        return acc

    @classmethod
    def read_from(cls, data: bytes) -> t.Tuple['Accumulator', bytes]:
        """Parses one accumulator from the start of data, returns it and the remaining bytes"""
        if data[:4] != ACC_MAGIC:
            raise FormatError(f'Not an accumulator: expected magic {ACC_MAGIC!r}, got {data[:4]!r}')
        if len(data) < 16:
            raise FormatError('Truncated accumulator header')
        dim, n_added = struct.unpack('<IQ', data[4:16])
        end = 16 + 4 * dim
        if len(data) < end:
            raise FormatError(f'Truncated accumulator: expected {4 * dim} bytes of counts for D={dim}')
        counts = np.frombuffer(data[16:end], dtype='<i4').astype(np.int32)
        try:
            return cls(dim, counts, n_added), data[end:]
        except ValueError as e:
            raise FormatError(f'Invalid accumulator: {e}') from e

    def __eq__(self, other):
        if not isinstance(other, Accumulator):
            return NotImplemented
        return (self.dim == other.dim and self.n_added == other.n_added
                and bool(np.array_equal(self.counts, other.counts)))

    def __repr__(self):
        return f'Accumulator(dim={self.dim}, n_added={self.n_added})'


def random_hv(rng: RandomSource, dim: int = DEFAULT_DIMENSION) -> Hypervector:
    """A seed vector: D i.i.d. uniform bits drawn from rng"""
    return Hypervector._wrap(rng.bits(validate_dimension(dim)))


def bind(x: Hypervector, y: Hypervector) -> Hypervector:
    """Coordinatewise XOR"""
    _check_same_dimension(x.dim, y.dim)
    return Hypervector._wrap(np.bitwise_xor(x.bits, y.bits))


def bundle(vs: t.Sequence[Hypervector], rng: RandomSource) -> Hypervector:
    """Coordinatewise majority of vs; coordinates without a majority get a random bit from rng"""
    if len(vs) == 0:
        raise EmptyInput('Cannot bundle an empty list of hypervectors')
    _check_same_dimension(*{v.dim for v in vs})
    if len(vs) == 1:
        return vs[0]
    ones = np.sum(np.stack([v.bits for v in vs]), axis=0, dtype=np.int64)
    acc = Accumulator(vs[0].dim).add_bit_sums(ones, len(vs))
    return threshold(acc, rng)


def accumulate(acc: Accumulator, v: Hypervector) -> Accumulator:
    """A new accumulator with v added (+1 for a 1 bit, -1 for a 0 bit)"""
    return acc.copy().add(v)


def threshold(acc: Accumulator, rng: RandomSource) -> Hypervector:
    """1 where counts > 0, 0 where counts < 0, a random bit from rng where counts == 0

    The rng is only advanced if there are zero counts.
    """
    if acc.n_added < 1:
        raise EmptyInput('Cannot threshold an empty accumulator')
    return threshold_sums(acc.counts, rng)


def threshold_sums(sums: np.ndarray, rng: RandomSource) -> Hypervector:
    """Sign of any signed integer sums as bits (ties from rng), e.g. summed memory counters"""
    sums = np.asarray(sums).reshape(-1)
    validate_dimension(sums.size)
    bits = (sums > 0).astype(np.uint8)
    ties = sums == 0
    n_ties = int(np.count_nonzero(ties))
    if n_ties:
        bits[ties] = rng.bits(n_ties)
    return Hypervector._wrap(bits)


def permute(v: Hypervector, k: int) -> Hypervector:
    """Cyclic rotation to the right by k positions (negative k rotates left)"""
    if k % v.dim == 0:
        return v
    return Hypervector._wrap(np.roll(v.bits, k))


def complement(v: Hypervector) -> Hypervector:
    return Hypervector._wrap(1 - v.bits)


def flip_bits(v: Hypervector, fraction: float, rng: RandomSource) -> Hypervector:
    """v with round(fraction * D) distinct randomly chosen bits inverted"""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f'fraction must be in [0, 1], got {fraction}')
    n = int(round(fraction * v.dim))
    bits = v.bits.copy()
    if n:
        positions = rng.positions(v.dim, n)
        bits[positions] ^= 1
    return Hypervector._wrap(bits)


def hamming_distance(x: Hypervector, y: Hypervector) -> int:
    _check_same_dimension(x.dim, y.dim)
    return int(np.count_nonzero(x.bits != y.bits))


def hamming_similarity(x: Hypervector, y: Hypervector) -> float:
    """1 - (number of differing bits) / D"""
    return 1.0 - hamming_distance(x, y) / x.dim


def cosine(a: Accumulator, b: Accumulator) -> float:
    """dot(a, b) / (|a| |b|) over the counts"""
    _check_same_dimension(a.dim, b.dim)
    norm_a, norm_b = a.norm(), b.norm()
    if norm_a == 0 or norm_b == 0:
        raise ZeroNorm('Cosine is undefined for an accumulator with zero norm')
    dot = int(np.dot(a.counts.astype(np.int64), b.counts.astype(np.int64)))
    return max(-1.0, min(1.0, dot / (norm_a * norm_b)))


def bipolar(v: Hypervector) -> np.ndarray:
    """The +1/-1 view of v (1 -> +1, 0 -> -1) as int8 array"""
    return (2 * v.bits.astype(np.int8) - 1).astype(np.int8)


def digest(v: Hypervector) -> str:
    """Short stable fingerprint of v (first 12 hex chars of the SHA-1 of the packed bits)"""
    return hashlib.sha1(v.packed()).hexdigest()[:12]
