"""Config for mara hdc

All defaults can be overwritten with `mara_app.monkey_patch.patch`, e.g.

    patch(mara_hdc.config.default_dimension)(lambda: 4096)
"""
import typing as t


def default_dimension() -> int:
    """Number of coordinates of every hypervector"""
    return 10_000


def default_seed() -> int:
    """Seed of the RandomSource used when no seed is given"""
    return 0


def sdm_locations() -> int:
    """Number of hard locations of a Sparse Distributed Memory"""
    return 10_000


def sdm_target_p() -> float:
    """Probability that a random probe activates a given hard location (picks the activation radius)"""
    return 0.001


def sdm_counter_bits() -> int:
    """Width of the SDM counters; counters saturate at +-(2**(bits-1) - 1)"""
    return 8


def novelty_low() -> float:
    """Recall similarity at or below which a moment counts as novel"""
    return 0.6


def novelty_high() -> float:
    """Recall similarity at or above which a moment counts as known"""
    return 0.9


def chunk_limit() -> int:
    """Maximum number of items in a chunk, n-gram window or focus"""
    return 10


def fold_diacritics() -> bool:
    """Whether text normalization folds accented letters to a-z (otherwise they become spaces)"""
    return False


def profile_batch_size() -> int:
    """Number of trigram windows encoded per numpy batch when building profiles"""
    return 1024


def threads() -> int:
    """Number of worker threads for per-language profile construction"""
    return 1


def max_predict_iterations() -> int:
    """Upper bound on iterations of autoassociative (iterative) reads"""
    return 10


def sdm_bench_load_grid() -> t.List[int]:
    """Numbers of stored items at which the SDM benchmark measures read similarity"""
    return [50, 100, 200, 500, 1000, 1500, 2000]


def sdm_dimension() -> int:
    """Dimension used by the memory based commands (sdm-bench, seq, focus-demo) when no --dim is given"""
    return 1000
