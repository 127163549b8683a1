import pytest

from mara_hdc.focus import (Channel, FocusState, StepMode, Scenario, compose_focus, focus_memory_new, step,
                            run_scenario)
from mara_hdc.hypervector import RandomSource, EmptyInput, DimensionMismatch, random_hv, hamming_similarity
from mara_hdc.item_memory import Codebook
from mara_hdc.sdm import SdmConfig

traffic_light = {
    'weights': {'sense': 2, 'act': 1},
    'ticks': [{'sense': 'red', 'act': 'stop'}, {'sense': 'green', 'act': 'go'}, {'sense': 'yellow', 'act': 'slow'}] * 2,
}


@pytest.fixture
def memory():
    return focus_memory_new(SdmConfig.from_target_p(1000, 10_000, 0.001), RandomSource(20))


@pytest.fixture
def vectors():
    rng = RandomSource(21)
    return [random_hv(rng, 1000) for _ in range(3)]


def test_channel_weights_must_be_nonnegative(vectors):
    with pytest.raises(ValueError):
        Channel('sense', -1, vectors[0])


def test_compose_focus(vectors):
    x, y, z = vectors
    rng = RandomSource(1)
    assert compose_focus([Channel('x', 1, x)], rng) == x
    # the heavier channel wins every disagreement
    assert compose_focus([Channel('x', 2, x), Channel('y', 1, y)], rng) == x
    assert compose_focus([Channel('x', 1, x), Channel('y', 0, y)], rng) == x
    focus = compose_focus([Channel('x', 1, x), Channel('y', 1, y), Channel('z', 1, z)], rng)
    assert all(hamming_similarity(focus, v) > 0.65 for v in vectors)


def test_compose_focus_with_previous_focus(vectors):
    x, y, _ = vectors
    assert compose_focus([Channel('x', 1, x)], RandomSource(1), previous=y, previous_weight=2) == y
    assert compose_focus([Channel('x', 1, x)], RandomSource(1), previous=y, previous_weight=0) == x


def test_compose_focus_errors(vectors):
    x, y, _ = vectors
    rng = RandomSource(1)
    with pytest.raises(EmptyInput):
        compose_focus([], rng)
    with pytest.raises(EmptyInput):
        compose_focus([Channel('x', 0, x)], rng)
    with pytest.raises(DimensionMismatch):
        compose_focus([Channel('x', 1, x), Channel('short', 1, random_hv(rng, 999))], rng)
    with pytest.raises(ValueError, match='at most'):
        compose_focus([Channel(f'c{i}', 1, x) for i in range(11)], rng)


def test_record_step_writes_links(memory, vectors):
    rng = RandomSource(2)
    state = FocusState()
    result = step(state, [Channel('x', 1, vectors[0])], memory, StepMode.RECORD, rng)
    assert result.state.tick == 1
    assert result.prediction is None and result.verdict is None
    assert (memory.history.write_count, memory.recognition.write_count) == (0, 1)

    result = step(result.state, [Channel('x', 1, vectors[1])], memory, StepMode.RECORD, rng)
    assert (memory.history.write_count, memory.recognition.write_count) == (1, 2)


def test_predict_step_recalls_the_successor(memory, vectors):
    rng = RandomSource(3)
    state = FocusState()
    for v in vectors:
        state = step(state, [Channel('x', 1, v)], memory, StepMode.RECORD, rng).state

    result = step(FocusState(), [Channel('x', 1, vectors[0])], memory, StepMode.PREDICT, rng)
    assert result.verdict.kind.value == 'known'
    assert hamming_similarity(result.prediction.vector, vectors[1]) >= 0.95
    assert memory.history.write_count == 2

    result = step(FocusState(), [Channel('x', 1, random_hv(rng, 1000))], memory, StepMode.PREDICT, rng)
    assert result.verdict.kind.value == 'novel'


def test_dimension_of_focus_and_memory_must_match(memory):
    with pytest.raises(DimensionMismatch):
        step(FocusState(), [Channel('x', 1, random_hv(RandomSource(1), 500))], memory, StepMode.RECORD,
             RandomSource(2))


def test_traffic_light_scenario(memory):
    cb = Codebook(1000, seed=4)
    log = run_scenario(Scenario.from_dict(traffic_light), cb, memory, RandomSource(5))
    assert len(log) == 12
    assert [e['tick'] for e in log] == list(range(1, 13))
    assert {e['mode'] for e in log[:6]} == {'record'}
    assert {e['mode'] for e in log[6:]} == {'predict'}
    assert set(cb.symbols) == {'red', 'stop', 'green', 'go', 'yellow', 'slow'}

    final_pass = log[6:]
    assert final_pass[0]['prediction_similarity'] is None
    assert all(e['prediction_similarity'] >= 0.95 for e in final_pass[1:])
    assert all(e['novelty'] == 'known' for e in final_pass)
    # the same light gives the same focus in every pass
    assert log[0]['focus'] == log[3]['focus'] == log[6]['focus']


def test_scenario_with_final_mode_both(memory):
    scenario = Scenario.from_dict(dict(traffic_light, record_passes=0, final_mode='both'))
    log = run_scenario(scenario, Codebook(1000, seed=4), memory, RandomSource(6))
    assert [e['novelty'] for e in log[:3]] == ['novel'] * 3
    assert [e['novelty'] for e in log[3:]] == ['known'] * 3


def test_invalid_scenarios(memory):
    with pytest.raises(ValueError, match='Invalid scenario'):
        Scenario.from_dict({'ticks': [{'a': 'b'}]})
    with pytest.raises(ValueError, match='no ticks'):
        Scenario.from_dict({'weights': {'a': 1}, 'ticks': []})
    with pytest.raises(ValueError, match='final_mode'):
        Scenario.from_dict({'weights': {'a': 1}, 'ticks': [{'a': 'b'}], 'final_mode': 'dream'})
    scenario = Scenario.from_dict({'weights': {'a': 1, 'b': 1}, 'ticks': [{'a': 'x'}]})
    with pytest.raises(ValueError, match="'b' has no symbol"):
        run_scenario(scenario, Codebook(1000, seed=0), memory, RandomSource(1))


def test_memory_addresses_do_not_repeat_codebook_vectors():
    seed = 31
    rng = RandomSource(seed)
    memory = focus_memory_new(SdmConfig.from_target_p(200, 50, 0.1), rng.spawn(0))
    cb = Codebook(200, seed, symbols=['red', 'stop', 'green'])
    addresses = {memory.history.address(i) for i in range(50)} | {memory.recognition.address(i) for i in range(50)}
    assert len(addresses) == 100
    assert not addresses & {cb.lookup(s) for s in cb.symbols}
    assert random_hv(rng.spawn(1), 200) not in addresses
    assert random_hv(rng.spawn(1), 200) not in {cb.lookup(s) for s in cb.symbols}
