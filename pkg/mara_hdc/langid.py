"""
Language identification with trigram profiles.

Text is normalized to a 27 symbol alphabet (a-z and space). Every symbol has a random seed
vector; a trigram (a, b, c) is encoded as permute(a, 2) XOR permute(b, 1) XOR c, and the
profile of a text is the sum (Accumulator) of all its trigram vectors. Sentences are assigned
the language whose profile has the highest cosine with the sentence profile.

Normalization policies:
- default: every character outside a-z (after lowercasing) becomes a space
- fold_diacritics: accented letters are decomposed first (NFKD) so that 'é' -> 'e', 'ß' -> 'ss'

Corpus layout:
    train/<label>.txt   UTF-8 text, any length
    test/<label>.txt    one sentence per line

Profile store (little endian):
    b'LPRF', D as uint32, seed as uint64, count as uint32, flags as uint32 (bit 0: fold_diacritics),
    then per profile: label length as uint32, utf-8 label, source bytes as uint64, accumulator (b'ACC1' ...)
"""

import logging
import pathlib
import re
import struct
import time
import typing as t
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster import hierarchy
from scipy.spatial.distance import squareform

from . import config as c
from .hypervector import Accumulator, RandomSource, EmptyInput, FormatError, ZeroNorm, DimensionMismatch, threshold
from .item_memory import Codebook

__all__ = ['ALPHABET', 'BUNDLED_CORPUS', 'LanguageProfile', 'ProfileStore', 'Classification',
           'ClassificationReport', 'Clustering', 'TrigramProfiler', 'normalize', 'letter_codebook',
           'profile_text', 'profile_file', 'train_profiles', 'classify', 'evaluate',
           'similarity_matrix', 'cluster_profiles', 'load_test_set', 'binarize_profile']

logger = logging.getLogger(__name__)

ALPHABET = 'abcdefghijklmnopqrstuvwxyz '
_SYMBOL_INDEX = {ch: i for i, ch in enumerate(ALPHABET)}

PROFILES_MAGIC = b'LPRF'

BUNDLED_CORPUS = pathlib.Path(__file__).parent / 'corpus'

_NOT_A_TO_Z = re.compile(r'[^a-z]+')

# letters that NFKD does not decompose
_FOLD_SPECIAL = str.maketrans({'ß': 'ss', 'æ': 'ae', 'œ': 'oe', 'ø': 'o', 'ł': 'l', 'đ': 'd', 'ð': 'd',
                               'þ': 'th', 'ı': 'i'})


def normalize(raw_text: t.Union[str, bytes], fold_diacritics: t.Optional[bool] = None) -> str:
    """Lowercase a-z kept, everything else mapped to a space, runs of spaces collapsed, trimmed

    Args:
        raw_text: str or UTF-8 bytes (undecodable bytes become spaces)
        fold_diacritics: fold accented letters to their base letter instead of dropping them,
                         default `config.fold_diacritics()`
    """
    if isinstance(raw_text, bytes):
        raw_text = raw_text.decode('utf-8', errors='replace')
    if fold_diacritics is None:
        fold_diacritics = c.fold_diacritics()
    text = raw_text.lower()
    if fold_diacritics:
        text = unicodedata.normalize('NFKD', text.translate(_FOLD_SPECIAL))
        text = ''.join(ch for ch in text if not unicodedata.combining(ch))
    return _NOT_A_TO_Z.sub(' ', text).strip()


def _symbol_indices(text: str) -> np.ndarray:
    try:
        return np.fromiter((_SYMBOL_INDEX[ch] for ch in text), dtype=np.intp, count=len(text))
    except KeyError as e:
        raise ValueError(f'Symbol outside the alphabet: {e.args[0]!r}')


def letter_codebook(dim: int, seed: int) -> Codebook:
    """A codebook with one seed vector for each of the 27 symbols, in alphabet order"""
    return Codebook(dim, seed, symbols=ALPHABET)


class TrigramProfiler():
    """Streaming profile builder

    Feed normalized text in pieces; trigrams spanning two pieces are counted, so feeding
    'ab' and 'c' gives the same profile as feeding 'abc'.

    Args:
        cb: codebook holding the 27 alphabet symbols
        batch_size: number of windows encoded per numpy batch, default `config.profile_batch_size()`
    """

    def __init__(self, cb: Codebook, batch_size: t.Optional[int] = None):
        letters = np.stack([cb.lookup(ch).bits for ch in ALPHABET])
        self._first = np.roll(letters, 2, axis=1)
        self._second = np.roll(letters, 1, axis=1)
        self._third = letters
        self.batch_size = batch_size or c.profile_batch_size()
        self.profile = Accumulator(cb.dim)
        self.symbols_seen = 0
        self._tail = np.zeros(0, dtype=np.intp)

    def feed(self, text: str) -> 'TrigramProfiler':
        indices = np.concatenate([self._tail, _symbol_indices(text)])
        self.symbols_seen += len(text)
        n_windows = len(indices) - 2
        for start in range(0, max(n_windows, 0), self.batch_size):
            stop = min(start + self.batch_size, n_windows)
            trigram_bits = (self._first[indices[start:stop]]
                            ^ self._second[indices[start + 1:stop + 1]]
                            ^ self._third[indices[start + 2:stop + 2]])
            self.profile.add_bit_sums(trigram_bits.sum(axis=0, dtype=np.int64), stop - start)
        self._tail = indices[-2:]
        return self


def profile_text(text: str, cb: Codebook) -> Accumulator:
    """Sum of the trigram vectors of a normalized text (n_added = max(0, len(text) - 2))"""
    return TrigramProfiler(cb).feed(text).profile


@dataclass
class LanguageProfile:
    label: str
    profile: Accumulator
    source_bytes: int = 0


def profile_file(path: t.Union[str, pathlib.Path], cb: Codebook, fold_diacritics: t.Optional[bool] = None,
                 label: t.Optional[str] = None) -> LanguageProfile:
    """Profile of a UTF-8 text file in a single pass over its lines

    Lines are normalized one by one and joined with single spaces, which equals normalizing the
    whole file at once.
    """
    path = pathlib.Path(path)
    profiler = TrigramProfiler(cb)
    source_bytes = 0
    started = False
    with open(path, 'rb') as f:
        for raw_line in f:
            source_bytes += len(raw_line)
            line = normalize(raw_line, fold_diacritics)
            if not line:
                continue
            profiler.feed((' ' if started else '') + line)
            started = True
    logger.debug(f'Profiled {path}: {source_bytes} bytes, {profiler.profile.n_added} trigrams')
    return LanguageProfile(label=label or path.stem, profile=profiler.profile, source_bytes=source_bytes)


def train_profiles(corpus_dir: t.Union[str, pathlib.Path], cb: Codebook, fold_diacritics: t.Optional[bool] = None,
                   threads: t.Optional[int] = None) -> t.List[LanguageProfile]:
    """One profile per <label>.txt file in corpus_dir, sorted by label"""
    paths = sorted(pathlib.Path(corpus_dir).glob('*.txt'))
    if not paths:
        raise FileNotFoundError(f'No <label>.txt files in {corpus_dir}')
    cb.freeze()
    with ThreadPoolExecutor(max_workers=threads or c.threads()) as executor:
        profiles = list(executor.map(lambda p: profile_file(p, cb, fold_diacritics), paths))
    logger.info(f'Trained {len(profiles)} language profiles from {corpus_dir}')
    return profiles


def binarize_profile(profile: LanguageProfile, rng: RandomSource) -> LanguageProfile:
    """The profile thresholded to a hypervector and stored as its +-1 image (compression)"""
    if profile.profile.n_added == 0:
        return profile
    v = threshold(profile.profile, rng)
    return LanguageProfile(label=profile.label, profile=Accumulator(v.dim).add(v), source_bytes=profile.source_bytes)


@dataclass
class ProfileStore:
    dim: int
    seed: int
    profiles: t.List[LanguageProfile]
    fold_diacritics: bool = False

    def to_bytes(self) -> bytes:
        parts = [PROFILES_MAGIC, struct.pack('<IQII', self.dim, self.seed % 2 ** 64, len(self.profiles),
                                             int(self.fold_diacritics))]
        for p in self.profiles:
            if p.profile.dim != self.dim:
                raise DimensionMismatch(f'Dimension mismatch: profile {p.label!r} has D={p.profile.dim}, '
                                        f'store has D={self.dim}')
            label = p.label.encode('utf-8')
            parts += [struct.pack('<I', len(label)), label, struct.pack('<Q', p.source_bytes), p.profile.to_bytes()]
        return b''.join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'ProfileStore':
        if data[:4] != PROFILES_MAGIC:
            raise FormatError(f'Not a profile store: expected magic {PROFILES_MAGIC!r}, got {data[:4]!r}')
        try:
            dim, seed, count, flags = struct.unpack('<IQII', data[4:24])
            rest = data[24:]
            profiles = []
            for _ in range(count):
                length, = struct.unpack('<I', rest[:4])
                label = rest[4:4 + length].decode('utf-8')
                source_bytes, = struct.unpack('<Q', rest[4 + length:12 + length])
                acc, rest = Accumulator.read_from(rest[12 + length:])
                if acc.dim != dim:
                    raise FormatError(f'Profile {label!r} has D={acc.dim}, store header says D={dim}')
                profiles.append(LanguageProfile(label=label, profile=acc, source_bytes=source_bytes))
        except struct.error as e:
            raise FormatError(f'Truncated profile store ({e})')
        if rest:
            raise FormatError(f'{len(rest)} trailing bytes after profile store')
        return cls(dim=dim, seed=seed, profiles=profiles, fold_diacritics=bool(flags & 1))

    def save(self, path: t.Union[str, pathlib.Path]):
        with open(path, 'wb') as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path: t.Union[str, pathlib.Path]) -> 'ProfileStore':
        with open(path, 'rb') as f:
            return cls.from_bytes(f.read())

    def codebook(self) -> Codebook:
        """The letter codebook the profiles were built with"""
        return letter_codebook(self.dim, self.seed)


@dataclass
class Classification:
    label: str
    cosine: float
    ranking: t.List[t.Tuple[str, float]]


class _ProfileMatrix():
    """Language profiles stacked for repeated classification, sorted by label"""

    def __init__(self, profiles: t.Sequence[LanguageProfile]):
        if not profiles:
            raise EmptyInput('Need at least one language profile')
        dims = {p.profile.dim for p in profiles}
        if len(dims) > 1:
            raise DimensionMismatch(f'Dimension mismatch between profiles: {sorted(dims)}')
        ordered = sorted(profiles, key=lambda p: p.label)
        self.dim = dims.pop()
        self.labels = [p.label for p in ordered]
        self.counts = np.stack([p.profile.counts.astype(np.int64) for p in ordered])
        self.norms = np.sqrt((self.counts.astype(np.float64) ** 2).sum(axis=1))
        for label, norm in zip(self.labels, self.norms):
            if norm == 0:
                raise ZeroNorm(f'Profile {label!r} is empty')

    def rank(self, sentence_profile: Accumulator) -> Classification:
        if sentence_profile.dim != self.dim:
            raise DimensionMismatch(f'Dimension mismatch: sentence has D={sentence_profile.dim}, '
                                    f'profiles have D={self.dim}')
        norm = sentence_profile.norm()
        if norm == 0:
            raise ZeroNorm('Sentence profile is empty (fewer than 3 symbols?)')
        cosines = (self.counts @ sentence_profile.counts.astype(np.int64)) / (self.norms * norm)
        # stable sort keeps label order among equal cosines
        order = np.argsort(-cosines, kind='stable')
        ranking = [(self.labels[i], float(cosines[i])) for i in order]
        return Classification(label=ranking[0][0], cosine=ranking[0][1], ranking=ranking)


def classify(sentence_profile: Accumulator, profiles: t.Sequence[LanguageProfile]) -> Classification:
    """The language with the most similar profile (cosine); ties go to the smaller label"""
    return _ProfileMatrix(profiles).rank(sentence_profile)


@dataclass
class ClassificationReport:
    labels: t.List[str]
    accuracy: float
    n_test: int
    n_skipped: int
    per_language: t.Dict[str, t.Dict[str, t.Any]]
    confusion: t.List[t.List[int]]
    predictions: t.List[t.Tuple[str, str, float]] = field(repr=False, default_factory=list)
    wall_clock_seconds: float = 0.0

    def confusion_pairs(self) -> t.List[t.Tuple[str, str, int]]:
        """Misclassifications as (true, predicted, count), most frequent first"""
        pairs = [(self.labels[i], self.labels[j], n)
                 for i, row in enumerate(self.confusion) for j, n in enumerate(row) if i != j and n]
        return sorted(pairs, key=lambda p: (-p[2], p[0], p[1]))

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {'accuracy': self.accuracy,
                'n_test': self.n_test,
                'n_skipped': self.n_skipped,
                'labels': self.labels,
                'per_language': self.per_language,
                'confusion': self.confusion,
                'confusion_pairs': [list(p) for p in self.confusion_pairs()],
                'wall_clock_seconds': self.wall_clock_seconds}


def load_test_set(test_dir: t.Union[str, pathlib.Path]) -> t.List[t.Tuple[str, str]]:
    """(label, sentence) for every nonblank line of every <label>.txt in test_dir"""
    test_set = []
    for path in sorted(pathlib.Path(test_dir).glob('*.txt')):
        with open(path, encoding='utf-8', errors='replace') as f:
            test_set += [(path.stem, line.strip()) for line in f if line.strip()]
    return test_set


def evaluate(test_set: t.Sequence[t.Tuple[str, str]], profiles: t.Sequence[LanguageProfile], cb: Codebook,
             fold_diacritics: t.Optional[bool] = None) -> ClassificationReport:
    """Classifies every test sentence and tallies accuracy and the confusion matrix

    Sentences with fewer than 3 symbols after normalization have no trigram and are skipped
    (counted in n_skipped, not in n_test).
    """
    if not test_set:
        raise EmptyInput('Empty test set')
    matrix = _ProfileMatrix(profiles)
    index = {label: i for i, label in enumerate(matrix.labels)}
    unknown = sorted({label for label, _ in test_set if label not in index})
    if unknown:
        raise ValueError(f'Test labels without a trained profile: {", ".join(unknown)}')

    started = time.perf_counter()
    confusion = np.zeros((len(index), len(index)), dtype=np.int64)
    predictions = []
    skipped = 0
    for label, sentence in test_set:
        sentence_profile = profile_text(normalize(sentence, fold_diacritics), cb)
        if sentence_profile.n_added == 0 or sentence_profile.norm() == 0:
            skipped += 1
            continue
        result = matrix.rank(sentence_profile)
        confusion[index[label], index[result.label]] += 1
        predictions.append((label, result.label, result.cosine))
    elapsed = time.perf_counter() - started

    n_test = int(confusion.sum())
    per_language = {}
    for label, i in index.items():
        n = int(confusion[i].sum())
        per_language[label] = {'n': n, 'correct': int(confusion[i, i]),
                               'accuracy': float(confusion[i, i] / n) if n else None}
    report = ClassificationReport(labels=matrix.labels,
                                  accuracy=float(np.trace(confusion) / n_test) if n_test else 0.0,
                                  n_test=n_test, n_skipped=skipped, per_language=per_language,
                                  confusion=confusion.tolist(), predictions=predictions,
                                  wall_clock_seconds=elapsed)
    logger.info(f'Evaluated {n_test} sentences: accuracy {report.accuracy:.4f} ({skipped} skipped)')
    return report


def similarity_matrix(profiles: t.Sequence[LanguageProfile]) -> np.ndarray:
    """Pairwise cosines in the given order: symmetric with a unit diagonal"""
    if len(profiles) < 2:
        raise ValueError(f'Need at least two profiles, got {len(profiles)}')
    matrix = _ProfileMatrix(profiles)
    position = {label: i for i, label in enumerate(matrix.labels)}
    order = [position[p.label] for p in profiles]
    counts = matrix.counts[order]
    norms = matrix.norms[order]
    dots = counts @ counts.T
    similarities = dots / np.outer(norms, norms)
    similarities = np.triu(similarities, 1)
    similarities = similarities + similarities.T
    np.fill_diagonal(similarities, 1.0)
    return np.clip(similarities, -1.0, 1.0)


@dataclass
class Clustering:
    """Average-linkage clustering of profiles on cosine distance

    labels are sorted; merges follow scipy's linkage convention (ids < n are leaves, in label
    order); clusters maps label -> flat cluster number (1-based, numbered in label order).
    """
    labels: t.List[str]
    linkage: np.ndarray
    clusters: t.Dict[str, int] = field(default_factory=dict)

    def merges(self) -> t.List[t.Dict[str, t.Any]]:
        members = {i: [label] for i, label in enumerate(self.labels)}
        result = []
        for step, (left, right, distance, size) in enumerate(self.linkage):
            merged = members[int(left)] + members[int(right)]
            members[len(self.labels) + step] = merged
            result.append({'left': members[int(left)], 'right': members[int(right)],
                           'distance': float(distance), 'size': int(size)})
        return result


def cluster_profiles(profiles: t.Sequence[LanguageProfile], n_clusters: t.Optional[int] = None,
                     distance_threshold: t.Optional[float] = None) -> Clustering:
    """Average-linkage agglomerative clustering on 1 - cosine

    Profiles are sorted by label first, so the result does not depend on input order. With
    n_clusters or distance_threshold, the dendrogram is also cut into flat clusters.
    """
    if n_clusters is not None and distance_threshold is not None:
        raise ValueError('Give either n_clusters or distance_threshold, not both')
    ordered = sorted(profiles, key=lambda p: p.label)
    distances = 1.0 - similarity_matrix(ordered)
    np.fill_diagonal(distances, 0.0)
    linkage = hierarchy.linkage(squareform(distances, checks=False), method='average')
    clustering = Clustering(labels=[p.label for p in ordered], linkage=linkage)
    if n_clusters is not None or distance_threshold is not None:
        if n_clusters is not None:
            flat = hierarchy.fcluster(linkage, t=n_clusters, criterion='maxclust')
        else:
            flat = hierarchy.fcluster(linkage, t=distance_threshold, criterion='distance')
        renumbered: t.Dict[int, int] = {}
        for label, cluster in zip(clustering.labels, flat):
            renumbered.setdefault(int(cluster), len(renumbered) + 1)
            clustering.clusters[label] = renumbered[int(cluster)]
    return clustering
