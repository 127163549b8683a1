"""Command line interface of mara hdc

JSON reports go to stdout (or to the file given with --out / --report), tab separated rows of
`langid predict` go to stdout; log messages and human summaries go to stderr.

Every command takes --dim, --seed and --threads; all randomness of a run comes from --seed.
"""

import functools
import json
import logging
import pathlib
import sys
import time
import typing as t
from dataclasses import dataclass, field, asdict

import click

from . import config as c, langid, reporting, selftest as selftest_
from .focus import Scenario, focus_memory_new, run_scenario
from .hypervector import (Hypervector, RandomSource, DimensionMismatch, digest, flip_bits, hamming_similarity,
                          validate_dimension)
from .item_memory import Codebook, cleanup
from .sdm import (Sdm, SdmConfig, sdm_new, sdm_stats, sdm_read_iterative, bench_curve, trend_slope,
                  max_step_drop)
from .sequence import MomentTrace, record_history, record_autoassociative, predict_sequence, detect_novelty, observe

logger = logging.getLogger(__name__)
DEGRADATION_MAX_STEP_DROP = 0.2
# slope tolerance for a flat curve (least squares rounding)
DEGRADATION_MAX_SLOPE = 1e-9
DEGRADATION_MAX_STEP_DROP = 0.2

DEFAULT_FOCUS_SCENARIO = {
    'weights': {'sense': 2, 'act': 1},
    'ticks': [{'sense': 'red', 'act': 'stop'},
              {'sense': 'green', 'act': 'go'},
              {'sense': 'yellow', 'act': 'slow'}] * 2,
    'record_passes': 1,
    'final_mode': 'predict'}


@dataclass
class RunConfig:
    """The effective configuration of a run, echoed into every JSON report"""
    command: str
    dim: t.Optional[int]
    seed: int
    threads: int
    parameters: t.Dict[str, t.Any] = field(default_factory=dict)


def run_options(f):
    """--dim, --seed and --threads for every command"""
    f = click.option('--threads', type=int, default=None,
                     help='Worker threads (default: config.threads()).')(f)
    f = click.option('--seed', type=int, default=None,
                     help='Seed of all randomness of the run (default: config.default_seed()).')(f)
    f = click.option('--dim', type=int, default=None,
                     help='Dimension D of the hypervectors. For stored artifacts it must match the stored D.')(f)
    return f


def library_errors(f):
    """Turns errors of the library into a message on stderr and exit status 1"""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (click.ClickException, click.exceptions.Exit, click.exceptions.Abort):
            raise
        except (ValueError, RuntimeError, KeyError, OSError) as e:
            logger.debug(f'{f.__name__} failed', exc_info=True)
            message = e.args[0] if isinstance(e, KeyError) and e.args else e
            raise click.ClickException(f'{type(e).__name__}: {message}')

    return wrapper


def _run_config(command: str, dim: t.Optional[int], seed: t.Optional[int], threads: t.Optional[int],
                **parameters) -> RunConfig:
    return RunConfig(command=command, dim=dim,
                     seed=c.default_seed() if seed is None else seed,
                     threads=threads or c.threads(),
                     parameters={k: str(v) if isinstance(v, pathlib.Path) else v for k, v in parameters.items()})


def _check_stored_dim(option_dim: t.Optional[int], stored_dim: int, what: str):
    if option_dim is not None and option_dim != stored_dim:
        raise DimensionMismatch(f'Dimension mismatch: requested D={option_dim} but {what} has D={stored_dim}')


def _emit(report: t.Dict[str, t.Any], run_config: RunConfig, out: t.Optional[str], summary: t.Optional[str] = None):
    reporting.write_json_report({'config': asdict(run_config), **report}, out)
    if summary:
        click.echo(summary, err=True)


@click.group()
@click.option('--verbose', is_flag=True, default=False, help='Log debug messages to stderr.')
def cli(verbose: bool):
    """Hyperdimensional computing: vector algebra, sparse distributed memory and language identification"""
    logging.basicConfig(stream=sys.stderr, level=logging.DEBUG if verbose else logging.WARNING,
                        format='%(asctime)s %(name)s %(levelname)s: %(message)s')


# selftest

@cli.command()
@run_options
@click.option('--cases', type=int, default=1000, show_default=True,
              help='Randomized cases per algebra check.')
@click.option('--chunk-trials', type=int, default=100, show_default=True,
              help='Trials per chunk size in the chunk round trip check.')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@click.pass_context
@library_errors
def selftest(ctx, dim: int, seed: int, threads: int, cases: int, chunk_trials: int, out: str):
    """Run the property checks of the vector algebra, exit status 1 on any failure"""
    dim = validate_dimension(dim or c.default_dimension())
    run_config = _run_config('selftest', dim, seed, threads, cases=cases, chunk_trials=chunk_trials)
    result = selftest_.run_selftest(dim, run_config.seed, cases=cases, chunk_trials=chunk_trials)
    for check in result['checks']:
        if check['skipped']:
            click.echo(f'{check["name"]}: {check["notice"]}', err=True)
    _emit(result, run_config, out,
          f'{result["n_passed"]} passed, {result["n_failed"]} failed, {result["n_skipped"]} skipped')
    if not result['passed']:
        ctx.exit(1)


# sdm-bench

def _parse_grid(text: t.Optional[str]) -> t.Optional[t.List[int]]:
    if not text:
        return None
    try:
        return [int(n) for n in text.split(',') if n.strip()]
    except ValueError:
        raise ValueError(f'--load-grid must be a comma separated list of integers, got {text!r}')


@cli.command('sdm-bench')
@run_options
@click.option('--locations', type=int, default=None, help='Number of hard locations m (default: config.sdm_locations()).')
@click.option('--target-p', type=float, default=None,
              help='Activation probability the radius is chosen for (default: config.sdm_target_p()).')
@click.option('--counter-bits', type=int, default=None, help='Counter width: 8, 16 or 32 (default: config.sdm_counter_bits()).')
@click.option('--items', type=int, default=None,
              help='Largest number of stored pairs (default: the largest value of the load grid).')
@click.option('--trials', type=int, default=100, show_default=True, help='Stored pairs read back per load point.')
@click.option('--load-grid', default=None, help='Comma separated load points (default: config.sdm_bench_load_grid()).')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@click.pass_context
@library_errors
def sdm_bench(ctx, dim: int, seed: int, threads: int, locations: int, target_p: float, counter_bits: int,
              items: int, trials: int, load_grid: str, out: str):
    """Read similarity of a sparse distributed memory as a function of its load

    Exit status 1 unless the similarity degrades gracefully with the load.
    """
    dim = dim or c.sdm_dimension()
    locations = locations or c.sdm_locations()
    target_p = target_p or c.sdm_target_p()
    counter_bits = counter_bits or c.sdm_counter_bits()
    grid = _parse_grid(load_grid) or c.sdm_bench_load_grid()
    items = max(grid) if items is None else items
    run_config = _run_config('sdm-bench', dim, seed, threads, locations=locations, target_p=target_p,
                             counter_bits=counter_bits, items=items, trials=trials, load_grid=grid)

    started = time.perf_counter()
    config = SdmConfig.from_target_p(dim, locations, target_p, counter_bits)
    curve = bench_curve(config, items, trials, RandomSource(run_config.seed), load_grid=grid)
    slope, drop = trend_slope(curve), max_step_drop(curve)
    report = {'radius': config.radius,
              'activation_probability': config.activation_probability,
              'expected_activations': config.expected_activations,
              'curve': curve,
              'trend_slope': slope,
              'max_step_drop': drop,
              'graceful_degradation': slope <= DEGRADATION_MAX_SLOPE and drop <= DEGRADATION_MAX_STEP_DROP,
              'wall_clock_seconds': time.perf_counter() - started}
    _emit(report, run_config, out, f'{len(curve)} load points, slope {slope:.3g}, max step drop {drop:.3f}')
    if not report['graceful_degradation']:
        ctx.exit(1)


# langid

@cli.group('langid')
def langid_group():
    """Language identification with letter trigram profiles"""


def _load_profiles(path: str, dim: t.Optional[int]) -> langid.ProfileStore:
    store = langid.ProfileStore.load(path)
    _check_stored_dim(dim, store.dim, f'profile store {path}')
    return store


@langid_group.command('train')
@run_options
@click.option('--corpus', type=click.Path(exists=True, file_okay=False), default=None,
              help='Directory of <label>.txt training texts (default: the bundled mini corpus).')
@click.option('--out', required=True, help='Profile store to write.')
@click.option('--fold-diacritics/--no-fold-diacritics', default=None,
              help='Fold accented letters to a-z instead of mapping them to spaces (default: config.fold_diacritics()).')
@click.option('--binarize', is_flag=True, default=False, help='Store every profile as its thresholded vector.')
@click.option('--report', help='Write the JSON report to this file instead of stdout.')
@library_errors
def langid_train(dim: int, seed: int, threads: int, corpus: str, out: str, fold_diacritics: bool,
                 binarize: bool, report: str):
    """Build one trigram profile per language file in a single pass"""
    dim = validate_dimension(dim or c.default_dimension())
    corpus = pathlib.Path(corpus) if corpus else langid.BUNDLED_CORPUS / 'train'
    fold_diacritics = c.fold_diacritics() if fold_diacritics is None else fold_diacritics
    run_config = _run_config('langid train', dim, seed, threads, corpus=corpus, out=out,
                             fold_diacritics=fold_diacritics, binarize=binarize)

    started = time.perf_counter()
    cb = langid.letter_codebook(dim, run_config.seed)
    profiles = langid.train_profiles(corpus, cb, fold_diacritics, threads=run_config.threads)
    elapsed = time.perf_counter() - started
    if binarize:
        rng = RandomSource(run_config.seed, stream=1)
        profiles = [langid.binarize_profile(p, rng) for p in profiles]
    langid.ProfileStore(dim=dim, seed=run_config.seed, profiles=profiles, fold_diacritics=fold_diacritics).save(out)

    _emit({'normalization': 'fold_diacritics' if fold_diacritics else 'non_a_to_z_to_space',
           'profiles': {p.label: {'source_bytes': p.source_bytes, 'trigrams': p.profile.n_added} for p in profiles},
           'wall_clock_seconds': elapsed},
          run_config, report, f'Trained {len(profiles)} profiles in {elapsed:.2f} s, written to {out}')


@langid_group.command('eval')
@run_options
@click.option('--profiles', required=True, type=click.Path(exists=True, dir_okay=False), help='Profile store.')
@click.option('--test', 'test_dir', type=click.Path(exists=True, file_okay=False), default=None,
              help='Directory of <label>.txt files with one sentence per line (default: the bundled mini corpus).')
@click.option('--report', '--out', 'report', help='Write the JSON report to this file instead of stdout.')
@library_errors
def langid_eval(dim: int, seed: int, threads: int, profiles: str, test_dir: str, report: str):
    """Classify every test sentence and report accuracy and the confusion matrix"""
    store = _load_profiles(profiles, dim)
    test_dir = pathlib.Path(test_dir) if test_dir else langid.BUNDLED_CORPUS / 'test'
    run_config = _run_config('langid eval', store.dim, store.seed if seed is None else seed, threads,
                             profiles=profiles, test=test_dir)
    result = langid.evaluate(langid.load_test_set(test_dir), store.profiles, store.codebook(), store.fold_diacritics)
    _emit({**result.to_dict(),
           'normalization': 'fold_diacritics' if store.fold_diacritics else 'non_a_to_z_to_space',
           'split': 'test files, one sentence per line; sentences under 3 symbols are skipped'},
          run_config, report, f'accuracy {result.accuracy:.4f} on {result.n_test} sentences')


@langid_group.command('classify')
@run_options
@click.option('--profiles', required=True, type=click.Path(exists=True, dir_okay=False), help='Profile store.')
@click.option('--text', required=True, help='The sentence to classify.')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def langid_classify(dim: int, seed: int, threads: int, profiles: str, text: str, out: str):
    """Classify one sentence"""
    store = _load_profiles(profiles, dim)
    run_config = _run_config('langid classify', store.dim, store.seed, threads, profiles=profiles, text=text)
    normalized = langid.normalize(text, store.fold_diacritics)
    result = langid.classify(langid.profile_text(normalized, store.codebook()), store.profiles)
    _emit({'normalized': normalized, 'label': result.label, 'cosine': result.cosine,
           'ranking': [{'label': label, 'cosine': cos} for label, cos in result.ranking]},
          run_config, out)


@langid_group.command('cluster')
@run_options
@click.option('--profiles', required=True, type=click.Path(exists=True, dir_okay=False), help='Profile store.')
@click.option('--clusters', 'n_clusters', type=int, default=None, help='Cut the dendrogram into this many clusters.')
@click.option('--threshold', type=float, default=None, help='Cut the dendrogram at this cosine distance.')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def langid_cluster(dim: int, seed: int, threads: int, profiles: str, n_clusters: int, threshold: float, out: str):
    """Pairwise profile similarities and their average linkage clustering"""
    store = _load_profiles(profiles, dim)
    run_config = _run_config('langid cluster', store.dim, store.seed, threads, profiles=profiles,
                             clusters=n_clusters, threshold=threshold)
    clustering = langid.cluster_profiles(store.profiles, n_clusters=n_clusters, distance_threshold=threshold)
    ordered = sorted(store.profiles, key=lambda p: p.label)
    _emit({'labels': clustering.labels,
           'similarity_matrix': langid.similarity_matrix(ordered),
           'merges': clustering.merges(),
           'clusters': clustering.clusters or None},
          run_config, out)


@langid_group.command('predict')
@run_options
@click.option('--profiles', required=True, type=click.Path(exists=True, dir_okay=False), help='Profile store.')
@click.option('--input', 'input_file', type=click.File('r', encoding='utf-8', errors='replace'), default='-',
              show_default=True, help='Sentences, one per line.')
@click.option('--delimiter-char', help='A character that delimits the output fields.',
              default='\t', show_default='\\t')
@click.option('--fail-on-no-data/--no-fail-on-no-data', help='Toggle to fail if no sentence is read.',
              default=True)
@library_errors
def langid_predict(dim: int, seed: int, threads: int, profiles: str, input_file: t.TextIO,
                   delimiter_char: str, fail_on_no_data: bool):
    """Classify sentences from a file or stdin, rows to stdout

    Every nonblank line gives a row: line number, label, cosine, sentence. Sentences shorter than 3
    symbols get an empty label and cosine. The rows are formatted as csv.excel dialect suitable for
    loads into DBs. No header is written.
    """
    store = _load_profiles(profiles, dim)
    cb = store.codebook()

    def rows():
        for line_number, line in enumerate(input_file, start=1):
            sentence = line.strip()
            if not sentence:
                continue
            sentence_profile = langid.profile_text(langid.normalize(sentence, store.fold_diacritics), cb)
            if sentence_profile.n_added == 0:
                yield line_number, None, None, sentence
                continue
            result = langid.classify(sentence_profile, store.profiles)
            yield line_number, result.label, result.cosine, sentence

    stream = sys.stdout
    n_rows = reporting.write_rows_as_csv_to_stream(rows(), stream=stream, delimiter_char=delimiter_char)
    stream.flush()
    if fail_on_no_data and n_rows == 0:
        raise ValueError('Received no sentences, failing')


# seq

@cli.group('seq')
def seq_group():
    """Sequences of moments in a sparse distributed memory"""


def _read_json(path: str) -> t.Any:
    with open(path, encoding='utf-8') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f'{path} is not valid JSON: {e}')


def _load_codebook(path: t.Optional[str], dim: t.Optional[int], seed: int, create: bool) -> t.Optional[Codebook]:
    if not path:
        return None
    if pathlib.Path(path).exists():
        cb = Codebook.load(path)
        _check_stored_dim(dim, cb.dim, f'codebook {path}')
        return cb
    if not create:
        raise FileNotFoundError(f'Codebook {path} does not exist')
    return Codebook(dim or c.sdm_dimension(), seed)


def _moment(item: str, cb: t.Optional[Codebook], create: bool) -> Hypervector:
    """A codebook symbol, or without codebook a base64 encoded hypervector"""
    if cb is None:
        return Hypervector.from_base64(item)
    return cb.ensure(item) if create else cb.lookup(item)


def _read_trace(path: str, cb: t.Optional[Codebook], create: bool) -> MomentTrace:
    data = _read_json(path)
    moments = data.get('moments') if isinstance(data, dict) else data
    if not isinstance(moments, list):
        raise ValueError(f'{path}: expected {{"moments": [...]}} or a list of moments')
    return MomentTrace([_moment(str(m), cb, create) for m in moments])


def _open_memory(path: str, dim: t.Optional[int], seed: int, locations: t.Optional[int],
                 target_p: t.Optional[float]) -> Sdm:
    if pathlib.Path(path).exists():
        sdm = Sdm.load(path)
        _check_stored_dim(dim, sdm.dim, f'memory {path}')
        return sdm
    config = SdmConfig.from_target_p(dim or c.sdm_dimension(), locations or c.sdm_locations(),
                                     target_p or c.sdm_target_p(), c.sdm_counter_bits())
    return sdm_new(config, RandomSource(seed))


def memory_options(f):
    f = click.option('--target-p', type=float, default=None,
                     help='Activation probability of a new memory (default: config.sdm_target_p()).')(f)
    f = click.option('--locations', type=int, default=None,
                     help='Hard locations of a new memory (default: config.sdm_locations()).')(f)
    f = click.option('--codebook', default=None,
                     help='Codebook file: moments are its symbols (otherwise base64 encoded hypervectors).')(f)
    f = click.option('--memory', required=True, help='Memory file; created if it does not exist.')(f)
    return f


def _memory_report(sdm: Sdm) -> t.Dict[str, t.Any]:
    stats = sdm_stats(sdm)
    return {'writes': stats.writes, 'mean_activation': stats.mean_activation,
            'expected_activation': stats.expected_activation, 'saturation_fraction': stats.saturation_fraction,
            'radius': sdm.config.radius, 'locations': sdm.config.m}


@seq_group.command('record')
@run_options
@memory_options
@click.option('--trace', required=True, type=click.Path(exists=True, dir_okay=False),
              help='JSON trace {"moments": [...]}.')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def seq_record(dim: int, seed: int, threads: int, memory: str, codebook: str, locations: int, target_p: float,
               trace: str, out: str):
    """Store every moment of a trace at the address of its predecessor (a linked list)"""
    run_config = _run_config('seq record', dim, seed, threads, memory=memory, codebook=codebook, trace=trace)
    cb = _load_codebook(codebook, dim, run_config.seed, create=True)
    moments = _read_trace(trace, cb, create=True)
    sdm = _open_memory(memory, dim or (cb.dim if cb else None) or moments.moments[0].dim, run_config.seed,
                       locations, target_p)
    writes = record_history(sdm, moments)
    sdm.save(memory)
    if cb is not None:
        cb.save(codebook)
    _emit({'recorded': writes, 'memory': _memory_report(sdm)}, run_config, out,
          f'Recorded {writes} links into {memory}')


@seq_group.command('remember')
@run_options
@memory_options
@click.option('--trace', required=True, type=click.Path(exists=True, dir_okay=False),
              help='JSON trace {"moments": [...]}.')
@click.option('--only-new', is_flag=True, default=False,
              help='Skip moments the memory already knows (novelty verdict known).')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def seq_remember(dim: int, seed: int, threads: int, memory: str, codebook: str, locations: int, target_p: float,
                 trace: str, only_new: bool, out: str):
    """Store every moment of a trace with itself as the address"""
    run_config = _run_config('seq remember', dim, seed, threads, memory=memory, codebook=codebook, trace=trace,
                             only_new=only_new)
    cb = _load_codebook(codebook, dim, run_config.seed, create=True)
    moments = _read_trace(trace, cb, create=True)
    sdm = _open_memory(memory, dim or (cb.dim if cb else None) or moments.moments[0].dim, run_config.seed,
                       locations, target_p)
    rng = RandomSource(run_config.seed, stream=1)
    entries = []
    for i, moment in enumerate(moments):
        if only_new:
            verdict, stored = observe(sdm, moment, rng)
            entries.append({'moment': i, 'novelty': verdict.kind.value, 'similarity': verdict.similarity,
                            'stored': stored})
        else:
            write_report = record_autoassociative(sdm, moment)
            entries.append({'moment': i, 'stored': True, 'activated': write_report.activated})
    sdm.save(memory)
    if cb is not None:
        cb.save(codebook)
    _emit({'moments': entries, 'memory': _memory_report(sdm)}, run_config, out,
          f'Stored {sum(e["stored"] for e in entries)} of {len(entries)} moments into {memory}')


@seq_group.command('predict')
@run_options
@click.option('--memory', required=True, type=click.Path(exists=True, dir_okay=False), help='Memory file.')
@click.option('--codebook', default=None, type=click.Path(exists=True, dir_okay=False),
              help='Codebook file: the start is one of its symbols and predictions are cleaned up against it.')
@click.option('--start', required=True, help='The current moment: a codebook symbol or a base64 encoded hypervector.')
@click.option('--steps', type=int, default=1, show_default=True, help='Number of moments to predict.')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def seq_predict(dim: int, seed: int, threads: int, memory: str, codebook: str, start: str, steps: int, out: str):
    """Follow the linked list from a moment"""
    run_config = _run_config('seq predict', dim, seed, threads, memory=memory, codebook=codebook, start=start,
                             steps=steps)
    sdm = Sdm.load(memory)
    _check_stored_dim(dim, sdm.dim, f'memory {memory}')
    cb = _load_codebook(codebook, sdm.dim, run_config.seed, create=False)
    predictions = predict_sequence(sdm, _moment(start, cb, create=False), steps,
                                   RandomSource(run_config.seed, stream=1), cb)
    _emit({'predictions': [{'step': i + 1, 'symbol': p.symbol, 'similarity': p.symbol_similarity,
                            'confidence': p.confidence, 'digest': digest(p.vector),
                            'vector': None if cb else p.vector.to_base64()}
                           for i, p in enumerate(predictions)],
           'stopped_early': len(predictions) < steps},
          run_config, out)


@seq_group.command('novelty')
@run_options
@click.option('--memory', required=True, type=click.Path(exists=True, dir_okay=False), help='Memory file.')
@click.option('--codebook', default=None, type=click.Path(exists=True, dir_okay=False),
              help='Codebook file: moments are its symbols.')
@click.option('--trace', required=True, type=click.Path(exists=True, dir_okay=False),
              help='JSON trace {"moments": [...]}.')
@click.option('--low', type=float, default=None, help='Novel at or below this similarity (default: config.novelty_low()).')
@click.option('--high', type=float, default=None, help='Known at or above this similarity (default: config.novelty_high()).')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def seq_novelty(dim: int, seed: int, threads: int, memory: str, codebook: str, trace: str, low: float, high: float,
                out: str):
    """Novelty verdict of every moment of a trace against an autoassociative memory"""
    run_config = _run_config('seq novelty', dim, seed, threads, memory=memory, codebook=codebook, trace=trace,
                             low=low, high=high)
    sdm = Sdm.load(memory)
    _check_stored_dim(dim, sdm.dim, f'memory {memory}')
    cb = _load_codebook(codebook, sdm.dim, run_config.seed, create=False)
    rng = RandomSource(run_config.seed, stream=1)
    verdicts = [detect_novelty(sdm, m, rng, low, high) for m in _read_trace(trace, cb, create=False)]
    _emit({'verdicts': [{'moment': i, 'novelty': v.kind.value, 'similarity': v.similarity}
                        for i, v in enumerate(verdicts)]},
          run_config, out)


@seq_group.command('recall')
@run_options
@click.option('--memory', required=True, type=click.Path(exists=True, dir_okay=False), help='Memory file.')
@click.option('--codebook', default=None, type=click.Path(exists=True, dir_okay=False),
              help='Codebook file: the probe is one of its symbols and the result is cleaned up against it.')
@click.option('--probe', required=True, help='A codebook symbol or a base64 encoded hypervector.')
@click.option('--noise', type=float, default=0.0, show_default=True,
              help='Fraction of probe bits to flip before recall.')
@click.option('--max-iters', type=int, default=None,
              help='Upper bound on reads (default: config.max_predict_iterations()).')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def seq_recall(dim: int, seed: int, threads: int, memory: str, codebook: str, probe: str, noise: float,
               max_iters: int, out: str):
    """Iterated autoassociative read from a (possibly corrupted) probe"""
    max_iters = max_iters or c.max_predict_iterations()
    run_config = _run_config('seq recall', dim, seed, threads, memory=memory, codebook=codebook, probe=probe,
                             noise=noise, max_iters=max_iters)
    sdm = Sdm.load(memory)
    _check_stored_dim(dim, sdm.dim, f'memory {memory}')
    cb = _load_codebook(codebook, sdm.dim, run_config.seed, create=False)
    rng = RandomSource(run_config.seed, stream=1)
    original = _moment(probe, cb, create=False)
    start = flip_bits(original, noise, rng)
    result = sdm_read_iterative(sdm, start, max_iters, rng)
    report = {'iterations': result.iterations, 'converged': result.converged, 'empty': result.empty,
              'probe_similarity': hamming_similarity(start, original),
              'similarity': hamming_similarity(result.vector, original),
              'digest': digest(result.vector)}
    if cb is not None:
        report['symbol'], report['symbol_similarity'] = cleanup(cb, result.vector)
    else:
        report['vector'] = result.vector.to_base64()
    _emit(report, run_config, out,
          f'{"converged" if result.converged else "not converged"} after {result.iterations} reads')


# focus-demo

@cli.command('focus-demo')
@run_options
@click.option('--scenario', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Scenario JSON {"weights": {...}, "ticks": [...]} (default: a three state cycle).')
@click.option('--locations', type=int, default=None, help='Hard locations per memory (default: config.sdm_locations()).')
@click.option('--target-p', type=float, default=None, help='Activation probability (default: config.sdm_target_p()).')
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def focus_demo(dim: int, seed: int, threads: int, scenario: str, locations: int, target_p: float, out: str):
    """Run a scripted stream of channel inputs through a focus and its long-term memory"""
    dim = dim or c.sdm_dimension()
    run_config = _run_config('focus-demo', dim, seed, threads, scenario=scenario or 'three state cycle',
                             locations=locations or c.sdm_locations(), target_p=target_p or c.sdm_target_p())
    parsed = Scenario.from_dict(_read_json(scenario) if scenario else DEFAULT_FOCUS_SCENARIO)

    started = time.perf_counter()
    config = SdmConfig.from_target_p(dim, run_config.parameters['locations'], run_config.parameters['target_p'],
                                     c.sdm_counter_bits())
    rng = RandomSource(run_config.seed)
    memory = focus_memory_new(config, rng.spawn(0))
    cb = Codebook(dim, run_config.seed)
    log = run_scenario(parsed, cb, memory, rng.spawn(1))

    final_pass = parsed.record_passes
    matches = [e['prediction_similarity'] for e in log
               if e['pass'] == final_pass and e['prediction_similarity'] is not None]
    summary = {'final_pass_predictions': len(matches),
               'mean_prediction_similarity': sum(matches) / len(matches) if matches else None,
               'min_prediction_similarity': min(matches) if matches else None}
    _emit({'scenario': asdict(parsed), 'log': log, 'summary': summary,
           'wall_clock_seconds': time.perf_counter() - started},
          run_config, out, f'{len(log)} ticks, {len(matches)} predictions in the final pass')


# codebook

@cli.group('codebook')
def codebook_group():
    """Item memories of named random vectors"""


@codebook_group.command('create')
@run_options
@click.option('--symbols', required=True, help='Comma separated symbols, in assignment order.')
@click.option('--out', required=True, help='Codebook file to write.')
@library_errors
def codebook_create(dim: int, seed: int, threads: int, symbols: str, out: str):
    """Assign a random vector to every symbol and save the codebook"""
    dim = dim or c.default_dimension()
    seed = c.default_seed() if seed is None else seed
    cb = Codebook(dim, seed, symbols=[s for s in symbols.split(',') if s])
    cb.save(out)
    click.echo(f'Wrote {len(cb)} symbols (D={dim}) to {out}', err=True)


@codebook_group.command('show')
@run_options
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
@click.option('--out', help='Write the JSON report to this file instead of stdout.')
@library_errors
def codebook_show(dim: int, seed: int, threads: int, path: str, out: str):
    """Dimension, seed and symbols (with vector digests) of a codebook"""
    cb = Codebook.load(path)
    _check_stored_dim(dim, cb.dim, f'codebook {path}')
    run_config = _run_config('codebook show', cb.dim, cb.seed, threads, path=path)
    _emit({'dim': cb.dim, 'seed': cb.seed,
           'symbols': [{'symbol': s, 'digest': digest(v)} for s, v in cb.entries.items()]},
          run_config, out)
