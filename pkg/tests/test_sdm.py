import numpy as np
import pytest

from mara_hdc.hypervector import (RandomSource, DimensionMismatch, FormatError, random_hv, flip_bits, complement,
                                  hamming_similarity)
from mara_hdc.sdm import (SdmConfig, Sdm, InvalidSdmConfig, NoActiveLocation, activation_probability, choose_radius,
                          sdm_new, activate, sdm_write, sdm_read, sdm_read_iterative, sdm_stats, sdm_clear,
                          sdm_write_bound, sdm_read_bound, bench_curve, trend_slope, max_step_drop)


@pytest.fixture(scope='module')
def sparse_config():
    """D=1000 with 10,000 locations, about 10 activated per probe"""
    return SdmConfig.from_target_p(1000, 10_000, 0.001)


@pytest.fixture
def light_config():
    """D=1000 with 2,000 locations, about 200 activated per probe"""
    return SdmConfig.from_target_p(1000, 2000, 0.1)


def test_choose_radius():
    radius = choose_radius(1000, 10_000, 0.001)
    assert activation_probability(1000, radius) >= 0.001
    assert activation_probability(1000, radius - 1) < 0.001
    assert 440 < radius < 460
    assert activation_probability(1000, 1000) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        choose_radius(1000, 10_000, 0.0)


def test_config(sparse_config):
    assert sparse_config.counter_bits == 8
    assert sparse_config.counter_bound == 127
    assert 10 <= sparse_config.expected_activations < 15
    for invalid in [SdmConfig(dim=1000, m=0, radius=450),
                    SdmConfig(dim=1000, m=10, radius=1001),
                    SdmConfig(dim=1000, m=10, radius=450, counter_bits=12),
                    SdmConfig(dim=1, m=10, radius=0)]:
        with pytest.raises(InvalidSdmConfig):
            invalid.validate()


def test_new_memory_is_deterministic():
    config = SdmConfig(dim=64, m=50, radius=28)
    a, b = sdm_new(config, RandomSource(1)), sdm_new(config, RandomSource(1))
    assert np.array_equal(a.addresses, b.addresses)
    assert not a.counters.any()
    assert a.counters.dtype == np.int8
    with pytest.raises(ValueError):
        a.addresses[0, 0] = 1


def test_activate_finds_the_own_address():
    sdm = sdm_new(SdmConfig(dim=256, m=200, radius=100), RandomSource(1))
    assert 17 in activate(sdm, sdm.address(17))
    with pytest.raises(DimensionMismatch):
        activate(sdm, random_hv(RandomSource(2), 255))


def test_write_without_active_location():
    sdm = sdm_new(SdmConfig(dim=256, m=100, radius=0), RandomSource(1))
    rng = RandomSource(2)
    probe = random_hv(rng, 256)
    assert sdm_write(sdm, probe, random_hv(rng, 256)).activated == 0
    assert sdm.write_count == 1
    assert not sdm.counters.any()
    with pytest.raises(NoActiveLocation):
        sdm_read(sdm, probe, rng)


def test_empty_read():
    sdm = sdm_new(SdmConfig(dim=256, m=100, radius=120), RandomSource(1))
    result = sdm_read(sdm, sdm.address(0), RandomSource(2))
    assert result.empty
    assert result.activated >= 1
    assert result.confidence == 0.0


def test_read_after_repeated_writes():
    sdm = sdm_new(SdmConfig(dim=64, m=20, radius=64), RandomSource(1))
    data = random_hv(RandomSource(2), 64)
    for _ in range(5):
        sdm_write(sdm, sdm.address(0), data)
    result = sdm_read(sdm, sdm.address(0), RandomSource(3))
    assert result.activated == 20
    assert result.vector == data
    assert result.confidence == 5.0


def test_counters_saturate():
    sdm = sdm_new(SdmConfig(dim=16, m=1, radius=16), RandomSource(1))
    data = random_hv(RandomSource(2), 16)
    for _ in range(200):
        sdm_write(sdm, data, data)
    assert int(np.abs(sdm.counters.astype(np.int64)).max()) == 127
    stats = sdm_stats(sdm)
    assert stats.saturation_fraction == 1.0
    assert stats.writes == 200
    assert stats.mean_activation == 1.0
    assert set(stats.counter_histogram) <= {-127, 127}
    assert sdm_read(sdm, data, RandomSource(3)).vector == data

    # one write in the other direction moves a saturated counter back
    sdm_write(sdm, data, complement(data))
    assert int(np.abs(sdm.counters.astype(np.int64)).max()) == 126


def test_round_trip_of_stored_pairs(sparse_config):
    rng = RandomSource(7)
    sdm = sdm_new(sparse_config, rng.spawn(0))
    pairs = [(random_hv(rng, 1000), random_hv(rng, 1000)) for _ in range(50)]
    for address, data in pairs:
        sdm_write(sdm, address, data)
    for address, data in pairs:
        assert hamming_similarity(sdm_read(sdm, address, rng).vector, data) >= 0.95
    assert sdm_stats(sdm).writes == 50


def test_bound_storage(light_config):
    rng = RandomSource(8)
    sdm = sdm_new(light_config, rng.spawn(0))
    data = random_hv(rng, 1000)
    addresses = [random_hv(rng, 1000) for _ in range(5)]
    for address in addresses:
        sdm_write_bound(sdm, address, data)
    for address in addresses:
        assert hamming_similarity(sdm_read_bound(sdm, address, rng).vector, data) >= 0.95


def test_iterative_read_cleans_up_a_corrupted_pattern(light_config):
    rng = RandomSource(9)
    sdm = sdm_new(light_config, rng.spawn(0))
    patterns = [random_hv(rng, 1000) for _ in range(5)]
    for p in patterns:
        sdm_write(sdm, p, p)
    for p in patterns:
        result = sdm_read_iterative(sdm, flip_bits(p, 0.1, rng), max_iters=10, rng=rng)
        assert result.converged
        assert result.vector == p
        assert result.iterations <= 3


def test_iterative_read_from_15_percent_corruption(light_config):
    rng = RandomSource(21)
    sdm = sdm_new(light_config, rng.spawn(0))
    patterns = [random_hv(rng, 1000) for _ in range(10)]
    for p in patterns:
        sdm_write(sdm, p, p)
    for p in patterns:
        result = sdm_read_iterative(sdm, flip_bits(p, 0.15, rng), max_iters=10, rng=rng)
        assert result.converged and result.iterations <= 5
        assert hamming_similarity(result.vector, p) >= 0.99

    stored = sdm_read_iterative(sdm, patterns[0], max_iters=10, rng=rng)
    assert stored.converged
    assert stored.vector == patterns[0]
    assert stored.iterations == 1


def test_frequent_writes_are_read_back_more_faithfully(light_config):
    rng = RandomSource(22)
    sdm = sdm_new(light_config, rng.spawn(0))
    for _ in range(400):
        v = random_hv(rng, 1000)
        sdm_write(sdm, v, v)
    frequent, rare = random_hv(rng, 1000), random_hv(rng, 1000)
    for _ in range(10):
        sdm_write(sdm, frequent, frequent)
    sdm_write(sdm, rare, rare)
    frequent_similarity = hamming_similarity(sdm_read(sdm, frequent, rng).vector, frequent)
    rare_similarity = hamming_similarity(sdm_read(sdm, rare, rng).vector, rare)
    assert frequent_similarity >= rare_similarity
    assert frequent_similarity >= 0.99


def test_iterative_read_of_an_empty_memory_does_not_converge(sparse_config):
    rng = RandomSource(10)
    sdm = sdm_new(sparse_config, rng.spawn(0))
    result = sdm_read_iterative(sdm, random_hv(rng, 1000), max_iters=10, rng=rng)
    assert not result.converged
    assert result.empty
    assert result.iterations == 1
    with pytest.raises(ValueError):
        sdm_read_iterative(sdm, random_hv(rng, 1000), max_iters=0, rng=rng)


def test_clear():
    sdm = sdm_new(SdmConfig(dim=64, m=20, radius=64), RandomSource(1))
    sdm_write(sdm, sdm.address(0), sdm.address(1))
    sdm_clear(sdm)
    assert not sdm.counters.any()
    assert sdm.write_count == 0


def test_save_and_load(tmp_path):
    config = SdmConfig(dim=100, m=30, radius=45, counter_bits=16)
    sdm = sdm_new(config, RandomSource(1))
    rng = RandomSource(2)
    for _ in range(10):
        sdm_write(sdm, random_hv(rng, 100), random_hv(rng, 100))
    path = str(tmp_path / 'memory.sdm')
    sdm.save(path)
    loaded = Sdm.load(path)
    assert loaded.config == config
    assert np.array_equal(loaded.addresses, sdm.addresses)
    assert np.array_equal(loaded.counters, sdm.counters)
    assert loaded.counters.dtype == np.int16
    assert (loaded.write_count, loaded.activation_total) == (sdm.write_count, sdm.activation_total)

    with pytest.raises(FormatError):
        Sdm.from_bytes(sdm.to_bytes()[:-1])
    with pytest.raises(FormatError, match='SDM1'):
        Sdm.from_bytes(b'SDM0' + sdm.to_bytes()[4:])


def test_bench_curve_degrades_gracefully():
    config = SdmConfig.from_target_p(256, 2000, 0.01)
    curve = bench_curve(config, items=400, trials=50, rng=RandomSource(11), load_grid=[10, 50, 100, 200, 400])
    assert [p['load'] for p in curve] == [10, 50, 100, 200, 400]
    assert [p['reads'] for p in curve] == [10, 50, 50, 50, 50]
    assert curve[0]['mean_similarity'] >= 0.95
    assert trend_slope(curve) <= 0
    assert max_step_drop(curve) <= 0.2


def test_bench_curve_with_ten_thousand_locations(sparse_config):
    curve = bench_curve(sparse_config, items=2000, trials=100, rng=RandomSource(12))
    assert [p['load'] for p in curve] == [50, 100, 200, 500, 1000, 1500, 2000]
    assert all(p['reads'] == 100 for p in curve)
    assert curve[0]['mean_similarity'] >= 0.95
    assert trend_slope(curve) <= 0
    assert max_step_drop(curve) <= 0.2
    assert curve[-1]['saturation_fraction'] == 0.0


def test_writes_add_up():
    config = SdmConfig.from_target_p(256, 500, 0.1, counter_bits=32)
    rng = RandomSource(13)
    first = [(random_hv(rng, 256), random_hv(rng, 256)) for _ in range(20)]
    second = [(random_hv(rng, 256), random_hv(rng, 256)) for _ in range(20)]
    memories = [sdm_new(config, RandomSource(14)) for _ in range(3)]
    for sdm, pairs in zip(memories, [first, second, first + second]):
        for addr, data in pairs:
            sdm_write(sdm, addr, data)
    a, b, both = (sdm.counters.astype(np.int64) for sdm in memories)
    assert a.any() and b.any()
    assert np.array_equal(a + b, both)
    assert memories[2].write_count == memories[0].write_count + memories[1].write_count


def test_bench_curve_load_points():
    config = SdmConfig(dim=64, m=50, radius=30)
    assert bench_curve(config, items=0, trials=5, rng=RandomSource(1)) == []
    curve = bench_curve(config, items=30, trials=5, rng=RandomSource(1), load_grid=[10, 20, 50])
    assert [p['load'] for p in curve] == [10, 20, 30]
    with pytest.raises(ValueError):
        bench_curve(config, items=-1, trials=5, rng=RandomSource(1))


def test_trend_helpers():
    curve = [{'load': 1, 'mean_similarity': 1.0}, {'load': 2, 'mean_similarity': 0.9},
             {'load': 3, 'mean_similarity': 0.85}]
    assert trend_slope(curve) == pytest.approx(-0.075)
    assert max_step_drop(curve) == pytest.approx(0.1)
    assert trend_slope(curve[:1]) == 0.0
    assert max_step_drop([]) == 0.0
