"""
Item memory: a codebook of random seed vectors for symbols, and cleanup.

Vectors decoded from a superposition are noisy. Cleanup snaps them back to the closest
stored vector by an exhaustive scan over the codebook (codebooks here are small).

File format (little endian):
    b'HDCB', seed as uint64, D as uint32, entry count as uint32, then per entry:
    symbol length as uint32, utf-8 symbol bytes, ceil(D/8) bytes of packed bits
"""

import logging
import struct
import threading
import typing as t

import numpy as np

from .hypervector import (Hypervector, RandomSource, DimensionMismatch, EmptyInput, FormatError,
                          random_hv, validate_dimension)

__all__ = ['Codebook', 'DuplicateSymbol', 'assign', 'cleanup', 'top_k', 'similarities']

logger = logging.getLogger(__name__)

CODEBOOK_MAGIC = b'HDCB'

# stream path prefix of codebook entries, kept apart from the streams callers spawn
CODEBOOK_STREAM = int.from_bytes(CODEBOOK_MAGIC, 'little')


class DuplicateSymbol(KeyError):
    pass


class Codebook():
    """Ordered map symbol -> seed vector

    The vector of the n-th assigned symbol is drawn from RandomSource(seed, stream=(CODEBOOK_STREAM, n)),
    so two codebooks with the same seed and the same insertion order hold identical vectors.

    Args:
        dim: int, dimension of all entries
        seed: int, 64-bit seed the entries are derived from
        symbols: optional symbols to assign right away (in order)
    """

    def __init__(self, dim: int, seed: int, symbols: t.Iterable[str] = ()):
        self.dim = validate_dimension(dim)
        self.seed = int(seed) % 2 ** 64
        self.entries: t.Dict[str, Hypervector] = {}
        self.frozen = False
        self._matrix: t.Optional[np.ndarray] = None
        self._lock = threading.Lock()
        for symbol in symbols:
            assign(self, symbol)

    @property
    def symbols(self) -> t.List[str]:
        return list(self.entries.keys())

    def lookup(self, symbol: str) -> Hypervector:
        try:
            return self.entries[symbol]
        except KeyError:
            raise KeyError(f'Unknown symbol: {symbol!r}')

    def ensure(self, symbol: str) -> Hypervector:
        """Returns the vector of symbol, assigning a fresh one if it is not there yet"""
        if symbol in self.entries:
            return self.entries[symbol]
        return assign(self, symbol)

    def freeze(self) -> 'Codebook':
        """No more assignments; a frozen codebook can be shared between threads"""
        self.frozen = True
        self.matrix()
        return self

    def matrix(self) -> np.ndarray:
        """All entries stacked as (n, D) uint8 array in insertion order"""
        if self._matrix is None or self._matrix.shape[0] != len(self.entries):
            if not self.entries:
                return np.zeros((0, self.dim), dtype=np.uint8)
            self._matrix = np.stack([v.bits for v in self.entries.values()])
        return self._matrix

    def __contains__(self, symbol):
        return symbol in self.entries

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, symbol: str) -> Hypervector:
        return self.lookup(symbol)

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return self.dim == other.dim and self.seed == other.seed and self.entries == other.entries

    def __repr__(self):
        return f'Codebook(dim={self.dim}, seed={self.seed}, entries={len(self.entries)})'

    def to_bytes(self) -> bytes:
        parts = [CODEBOOK_MAGIC, struct.pack('<QII', self.seed, self.dim, len(self.entries))]
        for symbol, v in self.entries.items():
            encoded = symbol.encode('utf-8')
            parts.append(struct.pack('<I', len(encoded)))
            parts.append(encoded)
            parts.append(v.packed())
        return b''.join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'Codebook':
        if data[:4] != CODEBOOK_MAGIC:
            raise FormatError(f'Not a codebook: expected magic {CODEBOOK_MAGIC!r}, got {data[:4]!r}')
        try:
            seed, dim, count = struct.unpack('<QII', data[4:20])
            cb = cls(dim, seed)
            n_bytes = (dim + 7) // 8
            pos = 20
            for _ in range(count):
                length, = struct.unpack('<I', data[pos:pos + 4])
                pos += 4
                symbol = data[pos:pos + length].decode('utf-8')
                pos += length
                cb.entries[symbol] = Hypervector.from_packed(data[pos:pos + n_bytes], dim)
                pos += n_bytes
        except struct.error as e:
            raise FormatError(f'Truncated codebook ({e})')
        if pos != len(data):
            raise FormatError(f'{len(data) - pos} trailing bytes after codebook')
        return cb

    def save(self, path: str):
        with open(path, 'wb') as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path: str) -> 'Codebook':
        with open(path, 'rb') as f:
            cb = cls.from_bytes(f.read())
        logger.debug(f'Loaded codebook with {len(cb)} entries (D={cb.dim}) from {path}')
        return cb


def assign(cb: Codebook, symbol: str) -> Hypervector:
    """Stores a fresh random seed vector for symbol and returns it

    Raises DuplicateSymbol if the symbol is already present and RuntimeError on a frozen codebook.
    """
    with cb._lock:
        if cb.frozen:
            raise RuntimeError(f'Cannot assign {symbol!r}: codebook is frozen')
        if symbol in cb.entries:
            raise DuplicateSymbol(f'Symbol already assigned: {symbol!r}')
        v = random_hv(RandomSource(cb.seed, stream=(CODEBOOK_STREAM, len(cb.entries))), cb.dim)
        cb.entries[symbol] = v
    return v


def _distances(cb: Codebook, query: Hypervector) -> np.ndarray:
    if not cb.entries:
        raise EmptyInput('Codebook is empty')
    if query.dim != cb.dim:
        raise DimensionMismatch(f'Dimension mismatch: query has D={query.dim}, codebook has D={cb.dim}')
    return np.count_nonzero(cb.matrix() != query.bits, axis=1)


def similarities(cb: Codebook, query: Hypervector) -> np.ndarray:
    """Hamming similarity of query to every entry, in insertion order"""
    return 1.0 - _distances(cb, query) / cb.dim


def cleanup(cb: Codebook, noisy: Hypervector) -> t.Tuple[str, float]:
    """The entry most similar to noisy and its similarity; ties go to the earliest inserted entry"""
    distances = _distances(cb, noisy)
    best = int(np.argmin(distances))  # first occurrence on ties
    return cb.symbols[best], 1.0 - int(distances[best]) / cb.dim


def top_k(cb: Codebook, query: Hypervector, k: int) -> t.List[t.Tuple[str, float]]:
    """The k entries most similar to query (all if there are fewer), best first, ties in insertion order"""
    if k < 1:
        raise ValueError(f'k must be at least 1, got {k}')
    distances = _distances(cb, query)
    order = np.argsort(distances, kind='stable')[:k]
    symbols = cb.symbols
    return [(symbols[i], 1.0 - int(distances[i]) / cb.dim) for i in order]
