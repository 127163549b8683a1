"""
The focus: a single vector that summarizes working memory.

Channels (sensor summaries, motor commands, ...) are weighted by importance and added into one
focus vector per tick. The focus addresses long-term memory: in record mode the link
previous focus -> new focus goes into the history memory and the new focus is stored
autoassociatively in the recognition memory; in predict mode the history memory is read at the
new focus (the expected next moment) and the recognition memory tells whether the focus is new.
"""

import enum
import logging
import typing as t
from dataclasses import dataclass

from . import config as c
from .hypervector import Hypervector, Accumulator, RandomSource, DimensionMismatch, EmptyInput, threshold, digest
from .item_memory import Codebook
from .sdm import Sdm, SdmConfig, sdm_new, sdm_write
from .sequence import (NoveltyVerdict, Prediction, detect_novelty, predict_next, prediction_match,
                       record_autoassociative)

__all__ = ['Channel', 'FocusState', 'FocusMemory', 'StepMode', 'StepResult', 'Scenario',
           'compose_focus', 'focus_memory_new', 'step', 'run_scenario']

logger = logging.getLogger(__name__)


@dataclass
class Channel:
    name: str
    weight: int
    current: Hypervector

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError(f'Channel {self.name!r}: weight must be nonnegative, got {self.weight}')


@dataclass(frozen=True)
class FocusState:
    """The focus vector and the tick it was composed at; vector is None only before the first step"""
    vector: t.Optional[Hypervector] = None
    tick: int = 0


@dataclass
class FocusMemory:
    """Long-term memory of a focus machine

    history holds heteroassociative links (focus -> next focus), recognition holds autoassociations.
    """
    history: Sdm
    recognition: Sdm


class StepMode(enum.Enum):
    RECORD = 'record'
    PREDICT = 'predict'
    BOTH = 'both'


@dataclass
class StepResult:
    state: FocusState
    prediction: t.Optional[Prediction] = None
    verdict: t.Optional[NoveltyVerdict] = None


def focus_memory_new(config: SdmConfig, rng: RandomSource) -> FocusMemory:
    return FocusMemory(history=sdm_new(config, rng.spawn(0)), recognition=sdm_new(config, rng.spawn(1)))


def compose_focus(channels: t.Sequence[Channel], rng: RandomSource,
                  previous: t.Optional[Hypervector] = None, previous_weight: int = 0) -> Hypervector:
    """Integer-weighted majority of the channel vectors (each is added weight times), ties from rng

    previous / previous_weight optionally add the previous focus as one more channel.
    """
    if len(channels) > c.chunk_limit():
        raise ValueError(f'The focus takes at most {c.chunk_limit()} channels, got {len(channels)}')
    if not channels or sum(ch.weight for ch in channels) == 0:
        raise EmptyInput('Need at least one channel with a positive weight')
    dims = {ch.current.dim for ch in channels}
    if len(dims) > 1:
        raise DimensionMismatch(f'Dimension mismatch between channels: {sorted(dims)}')
    acc = Accumulator(dims.pop())
    for ch in channels:
        if ch.weight:
            acc.add(ch.current, times=ch.weight)
    if previous is not None and previous_weight > 0:
        acc.add(previous, times=previous_weight)
    return threshold(acc, rng)


def step(state: FocusState, channels: t.Sequence[Channel], memory: FocusMemory, mode: StepMode,
         rng: RandomSource, previous_weight: int = 0) -> StepResult:
    """Composes the next focus and exchanges it with long-term memory

    The novelty verdict is taken before the new focus is stored, so a recorded moment is not
    trivially recognized by its own write.
    """
    focus = compose_focus(channels, rng, previous=state.vector, previous_weight=previous_weight)
    if focus.dim != memory.history.dim:
        raise DimensionMismatch(f'Dimension mismatch: focus has D={focus.dim}, memory has D={memory.history.dim}')
    result = StepResult(state=FocusState(vector=focus, tick=state.tick + 1))
    if mode in (StepMode.PREDICT, StepMode.BOTH):
        result.verdict = detect_novelty(memory.recognition, focus, rng)
        result.prediction = predict_next(memory.history, focus, rng)
    if mode in (StepMode.RECORD, StepMode.BOTH):
        if state.vector is not None:
            sdm_write(memory.history, state.vector, focus)
        record_autoassociative(memory.recognition, focus)
    return result


@dataclass
class Scenario:
    """A scripted stream of channel inputs

    Args:
        weights: channel name -> importance weight
        ticks: per tick, channel name -> symbol; a channel missing in a tick keeps its last symbol
        record_passes: number of passes over ticks in record mode
        final_mode: mode of the last pass, 'predict' or 'both'
        previous_weight: weight of the previous focus as an extra channel (0 = off)
    """
    weights: t.Dict[str, int]
    ticks: t.List[t.Dict[str, str]]
    record_passes: int = 1
    final_mode: str = 'predict'
    previous_weight: int = 0

    @classmethod
    def from_dict(cls, data: t.Dict[str, t.Any]) -> 'Scenario':
        try:
            scenario = cls(weights={str(k): int(v) for k, v in data['weights'].items()},
                           ticks=[{str(k): str(v) for k, v in tick.items()} for tick in data['ticks']],
                           record_passes=int(data.get('record_passes', 1)),
                           final_mode=str(data.get('final_mode', 'predict')),
                           previous_weight=int(data.get('previous_weight', 0)))
        except (KeyError, AttributeError, TypeError) as e:
            raise ValueError(f'Invalid scenario: {e!r}')
        if not scenario.ticks:
            raise ValueError('Invalid scenario: no ticks')
        if scenario.final_mode not in ('predict', 'both'):
            raise ValueError(f"Invalid scenario: final_mode must be 'predict' or 'both', got {scenario.final_mode!r}")
        return scenario


def run_scenario(scenario: Scenario, cb: Codebook, memory: FocusMemory, rng: RandomSource) -> t.List[t.Dict[str, t.Any]]:
    """Runs the record passes and the final pass of a scenario, returns one log entry per tick

    Symbols are resolved through cb (unknown symbols are assigned). Each entry holds the pass,
    the mode, the tick, a digest of the focus, the similarity of the prediction made one tick
    earlier to this focus, and the novelty verdict.
    """
    modes = [StepMode.RECORD] * scenario.record_passes + [StepMode(scenario.final_mode)]
    current_symbols: t.Dict[str, str] = {}
    state = FocusState()
    pending: t.Optional[Prediction] = None
    log = []
    for pass_number, mode in enumerate(modes):
        for tick in scenario.ticks:
            current_symbols.update(tick)
            channels = []
            for name, weight in scenario.weights.items():
                if name not in current_symbols:
                    raise ValueError(f'Channel {name!r} has no symbol at tick {state.tick + 1}')
                channels.append(Channel(name=name, weight=weight, current=cb.ensure(current_symbols[name])))
            result = step(state, channels, memory, mode, rng, previous_weight=scenario.previous_weight)
            state = result.state
            entry = {'pass': pass_number, 'mode': mode.value, 'tick': state.tick,
                     'focus': digest(state.vector),
                     'prediction_similarity': prediction_match(pending, state.vector) if pending else None,
                     'novelty': result.verdict.kind.value if result.verdict else None,
                     'novelty_similarity': result.verdict.similarity if result.verdict else None}
            log.append(entry)
            pending = result.prediction
    logger.info(f'Ran scenario: {len(log)} ticks in {len(modes)} passes')
    return log
