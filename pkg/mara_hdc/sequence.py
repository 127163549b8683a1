"""
Sequences of moments: history as a linked list in a Sparse Distributed Memory, prediction of the
next moment, novelty detection by autoassociation, and chunks / n-grams of short sequences.

Two ways of turning a short sequence into one vector:
- `encode_ngram` binds (XORs) position-permuted items: a quasi-orthogonal key, used for trigrams
- `encode_chunk` bundles position-permuted items: a decodable set, used for working memory
In both, the first item is permuted most (k-1 times) and the last item not at all.
"""

import enum
import logging
import typing as t
from dataclasses import dataclass

from . import config as c
from .hypervector import (Hypervector, Accumulator, RandomSource, DimensionMismatch, EmptyInput,
                          bind, permute, threshold, hamming_similarity)
from .item_memory import Codebook, cleanup
from .sdm import Sdm, WriteReport, NoActiveLocation, sdm_write, sdm_read

__all__ = ['MomentTrace', 'NoveltyKind', 'NoveltyVerdict', 'Prediction',
           'record_history', 'predict_next', 'predict_sequence', 'prediction_match',
           'record_autoassociative', 'detect_novelty', 'observe', 'delta',
           'encode_ngram', 'encode_chunk', 'decode_chunk']

logger = logging.getLogger(__name__)


@dataclass
class MomentTrace:
    """Focus states in time order"""
    moments: t.List[Hypervector]

    def __post_init__(self):
        if not self.moments:
            raise EmptyInput('A moment trace needs at least one moment')
        dims = {m.dim for m in self.moments}
        if len(dims) > 1:
            raise DimensionMismatch(f'Dimension mismatch within trace: {sorted(dims)}')

    def __len__(self):
        return len(self.moments)

    def __iter__(self):
        return iter(self.moments)


class NoveltyKind(enum.Enum):
    NOVEL = 'novel'
    KNOWN = 'known'
    SIMILAR_WITH_DELTA = 'similar_with_delta'


@dataclass
class NoveltyVerdict:
    """Result of comparing a moment with what the autoassociative memory recalls for it

    similarity is 0.0 and recalled is None when the memory had nothing stored for the moment.
    """
    kind: NoveltyKind
    similarity: float
    recalled: t.Optional[Hypervector] = None


@dataclass
class Prediction:
    """A recalled next moment; vector is None when the memory had nothing to say"""
    vector: t.Optional[Hypervector]
    confidence: float = 0.0
    symbol: t.Optional[str] = None
    symbol_similarity: t.Optional[float] = None

    @property
    def made(self) -> bool:
        return self.vector is not None


def record_history(sdm: Sdm, trace: t.Union[MomentTrace, t.Sequence[Hypervector]]) -> int:
    """Writes every successor at the address of its predecessor, returns the number of writes"""
    moments = trace.moments if isinstance(trace, MomentTrace) else list(trace)
    if len(moments) < 2:
        raise ValueError(f'A history needs at least two moments, got {len(moments)}')
    for current, following in zip(moments, moments[1:]):
        sdm_write(sdm, current, following)
    logger.debug(f'Recorded history of {len(moments)} moments')
    return len(moments) - 1


def predict_next(sdm: Sdm, current: Hypervector, rng: RandomSource,
                 cb: t.Optional[Codebook] = None) -> Prediction:
    """Reads the memory at current; optionally cleans the result up against a codebook of known states"""
    try:
        result = sdm_read(sdm, current, rng)
    except NoActiveLocation:
        return Prediction(vector=None)
    if result.empty:
        return Prediction(vector=None)
    prediction = Prediction(vector=result.vector, confidence=result.confidence)
    if cb is not None:
        prediction.symbol, prediction.symbol_similarity = cleanup(cb, result.vector)
    return prediction


def predict_sequence(sdm: Sdm, start: Hypervector, steps: int, rng: RandomSource,
                     cb: t.Optional[Codebook] = None) -> t.List[Prediction]:
    """Follows the linked list for up to `steps` predictions, stopping at the first missing one

    With a codebook, every prediction is cleaned up before it is used as the next address.
    """
    predictions = []
    current = start
    for _ in range(steps):
        prediction = predict_next(sdm, current, rng, cb)
        if not prediction.made:
            break
        predictions.append(prediction)
        current = cb.lookup(prediction.symbol) if cb is not None else prediction.vector
    return predictions


def prediction_match(prediction: Prediction, actual: Hypervector) -> t.Optional[float]:
    """Similarity of a prediction to the moment that actually followed (None without prediction)"""
    if not prediction.made:
        return None
    return hamming_similarity(prediction.vector, actual)


def record_autoassociative(sdm: Sdm, moment: Hypervector) -> WriteReport:
    """Stores moment with itself as the address"""
    return sdm_write(sdm, moment, moment)


def _thresholds(low: t.Optional[float], high: t.Optional[float]) -> t.Tuple[float, float]:
    low = c.novelty_low() if low is None else low
    high = c.novelty_high() if high is None else high
    if not 0.0 <= low < high <= 1.0:
        raise ValueError(f'Need 0 <= low < high <= 1, got low={low}, high={high}')
    return low, high


def detect_novelty(sdm: Sdm, moment: Hypervector, rng: RandomSource,
                   low: t.Optional[float] = None, high: t.Optional[float] = None) -> NoveltyVerdict:
    """Classifies moment by how similar the autoassociative recall at moment is to moment itself

    Known: similarity >= high; Novel: similarity <= low or nothing recalled; otherwise SimilarWithDelta.
    """
    low, high = _thresholds(low, high)
    try:
        result = sdm_read(sdm, moment, rng)
    except NoActiveLocation:
        return NoveltyVerdict(kind=NoveltyKind.NOVEL, similarity=0.0)
    if result.empty:
        return NoveltyVerdict(kind=NoveltyKind.NOVEL, similarity=0.0)
    similarity = hamming_similarity(result.vector, moment)
    if similarity >= high:
        kind = NoveltyKind.KNOWN
    elif similarity <= low:
        kind = NoveltyKind.NOVEL
    else:
        kind = NoveltyKind.SIMILAR_WITH_DELTA
    return NoveltyVerdict(kind=kind, similarity=similarity, recalled=result.vector)


def observe(sdm: Sdm, moment: Hypervector, rng: RandomSource,
            low: t.Optional[float] = None, high: t.Optional[float] = None) -> t.Tuple[NoveltyVerdict, bool]:
    """Detects, then learns: novel and similar moments are stored autoassociatively, known ones are ignored

    Returns the verdict and whether the moment was written.
    """
    verdict = detect_novelty(sdm, moment, rng, low, high)
    if verdict.kind is NoveltyKind.KNOWN:
        return verdict, False
    record_autoassociative(sdm, moment)
    return verdict, True


def delta(verdict: NoveltyVerdict, moment: Hypervector) -> t.Optional[Hypervector]:
    """bind(recalled, moment): its 1 bits are the coordinates where the moment differs from memory"""
    if verdict.recalled is None:
        return None
    return bind(verdict.recalled, moment)


def _check_window(items: t.Sequence[Hypervector], what: str):
    if not items:
        raise EmptyInput(f'Cannot encode an empty {what}')
    limit = c.chunk_limit()
    if len(items) > limit:
        raise ValueError(f'A {what} holds at most {limit} items, got {len(items)}')
    dims = {v.dim for v in items}
    if len(dims) > 1:
        raise DimensionMismatch(f'Dimension mismatch within {what}: {sorted(dims)}')


def encode_ngram(window: t.Sequence[Hypervector]) -> Hypervector:
    """XOR over i of permute(window[i], n-1-i); for n=3 this is rho^2(a) * rho(b) * c"""
    _check_window(window, 'n-gram')
    n = len(window)
    result = window[-1]
    for i, v in enumerate(window[:-1]):
        result = bind(result, permute(v, n - 1 - i))
    return result


def encode_chunk(items: t.Sequence[Hypervector], rng: RandomSource) -> Hypervector:
    """Majority over i of permute(items[i], k-1-i), ties from rng"""
    _check_window(items, 'chunk')
    k = len(items)
    acc = Accumulator(items[0].dim)
    for i, v in enumerate(items):
        acc.add(permute(v, k - 1 - i))
    return threshold(acc, rng)


def decode_chunk(chunk: Hypervector, k: int, cb: Codebook) -> t.List[t.Tuple[str, float]]:
    """Cleans up permute(chunk, -(k-1-i)) for every position i, in order"""
    if k < 1:
        raise ValueError(f'k must be at least 1, got {k}')
    return [cleanup(cb, permute(chunk, -(k - 1 - i))) for i in range(k)]
