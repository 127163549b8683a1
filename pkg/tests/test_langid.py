import random
import time

import numpy as np
import pytest

from mara_hdc import langid
from mara_hdc.hypervector import (Accumulator, RandomSource, EmptyInput, ZeroNorm, FormatError, bipolar, bind,
                                  permute, cosine)
from mara_hdc.langid import (LanguageProfile, ProfileStore, TrigramProfiler, normalize, letter_codebook,
                             profile_text, profile_file, train_profiles, binarize_profile, classify, evaluate,
                             load_test_set, similarity_matrix, cluster_profiles)
from mara_hdc.synthetic import make_languages, write_corpus

TRAIN = langid.BUNDLED_CORPUS / 'train'
TEST = langid.BUNDLED_CORPUS / 'test'


@pytest.fixture(scope='module')
def letters():
    return letter_codebook(10_000, seed=1)


@pytest.fixture(scope='module')
def bundled_profiles(letters):
    return train_profiles(TRAIN, letters)


def by_label(profiles):
    return {p.label: p.profile for p in profiles}


@pytest.mark.parametrize('raw, expected', [
    ('Hello, World!', 'hello world'),
    ('  a   b\t\nc  ', 'a b c'),
    ('¡Adiós!', 'adi s'),
    ('123', ''),
    (b'caf\xc3\xa9 au lait', 'caf au lait'),
    (b'ab\xffcd', 'ab cd'),
])
def test_normalize(raw, expected):
    assert normalize(raw, fold_diacritics=False) == expected


@pytest.mark.parametrize('raw, expected', [
    ('¡Adiós!', 'adios'),
    ('Straße', 'strasse'),
    ('Ça va très bien', 'ca va tres bien'),
    ('Øre', 'ore'),
])
def test_normalize_with_folding(raw, expected):
    assert normalize(raw, fold_diacritics=True) == expected


def test_normalize_takes_the_policy_from_config(monkeypatch):
    from mara_hdc import config
    monkeypatch.setattr(config, 'fold_diacritics', lambda: True)
    assert normalize('Adiós') == 'adios'


def test_letter_codebook(letters):
    assert letters.symbols == list(langid.ALPHABET)
    assert letter_codebook(10_000, seed=1) == letters


def test_single_trigram(letters):
    profile = profile_text('abc', letters)
    trigram = bind(bind(permute(letters.lookup('a'), 2), permute(letters.lookup('b'), 1)), letters.lookup('c'))
    assert profile.n_added == 1
    assert np.array_equal(profile.counts, bipolar(trigram))


def test_profile_matches_brute_force():
    cb = letter_codebook(16, seed=2)
    text = 'abab cab'
    expected = np.zeros(16, dtype=np.int64)
    for a, b, c in zip(text, text[1:], text[2:]):
        bits = np.roll(cb.lookup(a).bits, 2) ^ np.roll(cb.lookup(b).bits, 1) ^ cb.lookup(c).bits
        expected += 2 * bits.astype(np.int64) - 1
    profile = profile_text(text, cb)
    assert profile.n_added == len(text) - 2
    assert np.array_equal(profile.counts, expected)


def test_short_texts_have_no_trigrams(letters):
    for text in ['', 'a', 'ab']:
        assert profile_text(text, letters).n_added == 0


def test_symbols_outside_the_alphabet(letters):
    with pytest.raises(ValueError, match='outside the alphabet'):
        profile_text('Abc', letters)


def test_streaming_equals_one_piece(letters):
    text = 'the quick brown fox jumps over the lazy dog'
    whole = profile_text(text, letters)
    profiler = TrigramProfiler(letters, batch_size=3)
    for start in range(0, len(text), 5):
        profiler.feed(text[start:start + 5])
    assert profiler.profile == whole
    assert profiler.symbols_seen == len(text)


def test_trigram_order_matters(letters):
    text = 'the quick brown fox jumps over the lazy dog'
    assert cosine(profile_text(text, letters), profile_text(text[::-1], letters)) < 0.5


def test_profile_file(tmp_path, letters):
    path = tmp_path / 'xx.txt'
    path.write_text('Ein Satz.\n\n!!!\nNoch ein Satz.\n', encoding='utf-8')
    profile = profile_file(path, letters)
    assert profile.label == 'xx'
    assert profile.source_bytes == len(path.read_bytes())
    assert profile.profile == profile_text(normalize(path.read_text(encoding='utf-8')), letters)


def test_train_profiles(bundled_profiles, letters):
    assert [p.label for p in bundled_profiles] == ['de', 'en', 'es', 'fr', 'it', 'nl']
    assert all(p.profile.n_added > 2000 for p in bundled_profiles)
    assert letters.frozen
    # same seed, same profiles, also with several threads
    again = train_profiles(TRAIN, letter_codebook(10_000, seed=1), threads=3)
    assert [p.profile for p in again] == [p.profile for p in bundled_profiles]


def test_train_profiles_needs_files(tmp_path):
    with pytest.raises(FileNotFoundError):
        train_profiles(tmp_path, letter_codebook(100, seed=0))


def test_classify_ranking_and_ties():
    cb = letter_codebook(1000, seed=3)
    profile = profile_text('hello world', cb)
    result = classify(profile, [LanguageProfile('b', profile), LanguageProfile('a', profile.scaled(2))])
    assert result.label == 'a'
    assert result.cosine == pytest.approx(1.0)
    assert [label for label, _ in result.ranking] == ['a', 'b']


def test_classify_errors(letters, bundled_profiles):
    with pytest.raises(EmptyInput):
        classify(profile_text('hello', letters), [])
    with pytest.raises(ZeroNorm):
        classify(profile_text('hi', letters), bundled_profiles)
    with pytest.raises(ZeroNorm, match='empty'):
        classify(profile_text('hello', letters), [LanguageProfile('xx', Accumulator(10_000))])


def test_classification_is_scale_invariant(letters, bundled_profiles):
    sentence = profile_text(normalize('Der Hund schläft vor dem Haus.'), letters)
    scaled = [LanguageProfile(p.label, p.profile.scaled(3)) for p in bundled_profiles]
    assert classify(sentence, bundled_profiles).label == classify(sentence, scaled).label == 'de'
    assert classify(sentence, bundled_profiles).cosine == pytest.approx(classify(sentence, scaled).cosine)


def test_accuracy_on_training_sentences(letters, bundled_profiles):
    report = evaluate(load_test_set(TRAIN), bundled_profiles, letters)
    assert report.n_test == 6 * 115
    assert report.accuracy >= 0.9


def test_accuracy_on_held_out_sentences(letters, bundled_profiles):
    report = evaluate(load_test_set(TEST), bundled_profiles, letters)
    assert report.n_test == 6 * 200
    assert report.n_skipped == 0
    assert report.accuracy >= 0.9
    for label, row in zip(report.labels, report.confusion):
        assert sum(row) == report.per_language[label]['n'] == 200
    assert sum(n for _, _, n in report.confusion_pairs()) == report.n_test - np.trace(report.confusion)
    assert set(report.to_dict()) >= {'accuracy', 'n_test', 'n_skipped', 'per_language', 'confusion',
                                     'confusion_pairs', 'wall_clock_seconds'}


def test_evaluate_errors(letters, bundled_profiles):
    with pytest.raises(EmptyInput):
        evaluate([], bundled_profiles, letters)
    with pytest.raises(ValueError, match='without a trained profile: xx'):
        evaluate([('xx', 'some sentence')], bundled_profiles, letters)
    report = evaluate([('en', 'ok'), ('en', 'this is fine')], bundled_profiles, letters)
    assert (report.n_test, report.n_skipped) == (1, 1)


def test_related_languages_are_more_similar(bundled_profiles):
    profiles = by_label(bundled_profiles)
    assert cosine(profiles['es'], profiles['it']) > cosine(profiles['es'], profiles['de'])
    assert cosine(profiles['de'], profiles['nl']) > cosine(profiles['de'], profiles['it'])


def test_synthetic_languages_are_separable(tmp_path):
    rng = RandomSource(4)
    languages = make_languages(6, rng)
    train_dir, test_dir = write_corpus(languages, tmp_path, rng, train_symbols=20_000, test_sentences=100)
    cb = letter_codebook(2000, seed=5)
    profiles = train_profiles(train_dir, cb)
    report = evaluate(load_test_set(test_dir), profiles, cb)
    assert report.n_test == 600
    assert report.accuracy >= 0.99


def test_500_sentences_per_synthetic_language(tmp_path, letters):
    rng = RandomSource(6)
    languages = make_languages(6, rng)
    train_dir, test_dir = write_corpus(languages, tmp_path, rng, train_symbols=20_000, test_sentences=500)
    report = evaluate(load_test_set(test_dir), train_profiles(train_dir, letters), letters)
    assert report.n_test == 3000
    assert all(report.per_language[label]['n'] == 500 for label in report.labels)
    assert report.accuracy >= 0.99


def test_profiling_throughput(tmp_path, letters):
    text = (TRAIN / 'en.txt').read_bytes()
    path = tmp_path / 'big.txt'
    path.write_bytes(text * (1_000_000 // len(text) + 1))
    started = time.perf_counter()
    profile = profile_file(path, letters)
    elapsed = time.perf_counter() - started
    assert profile.source_bytes >= 1_000_000
    # at least one megabyte per minute
    assert profile.source_bytes / elapsed >= 1_000_000 / 60


def test_similarity_matrix(bundled_profiles):
    matrix = similarity_matrix(bundled_profiles)
    assert matrix.shape == (6, 6)
    assert np.allclose(matrix, matrix.T)
    assert np.all(np.diag(matrix) == 1.0)
    assert np.all((matrix > 0) & (matrix <= 1.0))
    # input order is kept
    reversed_matrix = similarity_matrix(bundled_profiles[::-1])
    assert np.allclose(reversed_matrix, matrix[::-1, ::-1])
    with pytest.raises(ValueError):
        similarity_matrix(bundled_profiles[:1])


def test_cluster_two_profiles(bundled_profiles):
    profiles = by_label(bundled_profiles)
    clustering = cluster_profiles([LanguageProfile('es', profiles['es']), LanguageProfile('it', profiles['it'])])
    merges = clustering.merges()
    assert len(merges) == 1
    assert merges[0]['left'] + merges[0]['right'] == ['es', 'it']
    assert merges[0]['distance'] == pytest.approx(1 - cosine(profiles['es'], profiles['it']))
    assert merges[0]['size'] == 2


def test_clustering_does_not_depend_on_input_order(bundled_profiles):
    shuffled = list(bundled_profiles)
    random.Random(1).shuffle(shuffled)
    a = cluster_profiles(bundled_profiles, n_clusters=3)
    b = cluster_profiles(shuffled, n_clusters=3)
    assert a.labels == b.labels
    assert np.allclose(a.linkage, b.linkage)
    assert a.clusters == b.clusters
    assert sorted(set(a.clusters.values())) == [1, 2, 3]
    assert a.clusters['de'] == 1
    with pytest.raises(ValueError):
        cluster_profiles(bundled_profiles, n_clusters=2, distance_threshold=0.5)


def test_paired_languages_cluster_together(tmp_path):
    rng = RandomSource(6)
    languages = make_languages(4, rng, paired=True)
    train_dir, _ = write_corpus(languages, tmp_path, rng, train_symbols=5000, test_sentences=1)
    clustering = cluster_profiles(train_profiles(train_dir, letter_codebook(2000, seed=7)), n_clusters=2)
    assert clustering.clusters == {'pair0a': 1, 'pair0b': 1, 'pair1a': 2, 'pair1b': 2}
    assert [m['size'] for m in clustering.merges()] == [2, 2, 4]


def test_binarized_profiles_still_classify(letters, bundled_profiles):
    rng = RandomSource(8)
    binarized = [binarize_profile(p, rng) for p in bundled_profiles]
    assert all(p.profile.n_added == 1 for p in binarized)
    assert all(set(np.unique(p.profile.counts)) <= {-1, 1} for p in binarized)
    report = evaluate(load_test_set(TEST), binarized, letters)
    assert report.accuracy >= 0.5


def test_profile_store(tmp_path, bundled_profiles):
    store = ProfileStore(dim=10_000, seed=1, profiles=bundled_profiles, fold_diacritics=True)
    path = tmp_path / 'profiles.lprf'
    store.save(path)
    loaded = ProfileStore.load(path)
    assert loaded.fold_diacritics
    assert (loaded.dim, loaded.seed) == (10_000, 1)
    assert [p.label for p in loaded.profiles] == [p.label for p in bundled_profiles]
    assert [p.profile for p in loaded.profiles] == [p.profile for p in bundled_profiles]
    assert [p.source_bytes for p in loaded.profiles] == [p.source_bytes for p in bundled_profiles]
    assert loaded.codebook() == letter_codebook(10_000, seed=1)

    with pytest.raises(FormatError, match='LPRF'):
        ProfileStore.from_bytes(b'LPRX' + store.to_bytes()[4:])
    with pytest.raises(FormatError):
        ProfileStore.from_bytes(store.to_bytes()[:-3])
