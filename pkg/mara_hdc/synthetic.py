"""
Synthetic languages for self-contained language identification runs.

Each language is a first-order Markov source over its own small set of letters plus the space.
Languages built from disjoint letter sets have disjoint trigram inventories; languages of a
'pair' share a letter set but have different transition probabilities, so they are closer to
each other than to any other language.
"""

import pathlib
import typing as t
from dataclasses import dataclass

import numpy as np

from .hypervector import RandomSource

__all__ = ['MarkovLanguage', 'make_languages', 'write_corpus']

_LETTERS = 'abcdefghijklmnopqrstuvwxyz'


@dataclass
class MarkovLanguage:
    """A language as a Markov chain over letters + ' '

    transitions[i, j] is the probability that symbol j follows symbol i, where symbol k
    (the last one) is the space. A space is never followed by a space.
    """
    label: str
    letters: str
    transitions: np.ndarray

    @property
    def symbols(self) -> str:
        return self.letters + ' '

    def _walk(self, n: int, generator: np.random.Generator) -> str:
        symbols = self.symbols
        state = int(generator.integers(0, len(self.letters)))
        out = [symbols[state]]
        for _ in range(n - 1):
            state = int(generator.choice(len(symbols), p=self.transitions[state]))
            out.append(symbols[state])
        return ''.join(out)

    def sample_text(self, n_symbols: int, rng: RandomSource) -> str:
        """n_symbols symbols starting with a letter (a trailing space is dropped)"""
        return self._walk(n_symbols, rng.generator).rstrip(' ')

    def sample_sentences(self, n: int, rng: RandomSource, min_length: int = 20,
                         max_length: int = 60) -> t.List[str]:
        """n independent sentences of about min_length to max_length symbols (a trailing space is dropped)"""
        if not 3 <= min_length <= max_length:
            raise ValueError(f'Need 3 <= min_length <= max_length, got {min_length}, {max_length}')
        sentences = []
        for _ in range(n):
            length = int(rng.generator.integers(min_length, max_length + 1))
            sentences.append(self._walk(length, rng.generator).rstrip(' '))
        return sentences


def _transition_matrix(k: int, concentration: float, generator: np.random.Generator) -> np.ndarray:
    transitions = generator.dirichlet(np.full(k + 1, concentration), size=k + 1)
    transitions[k, k] = 0.0
    return transitions / transitions.sum(axis=1, keepdims=True)


def make_languages(n_languages: int, rng: RandomSource, letters_per_language: int = 4,
                   concentration: float = 0.5, paired: bool = False) -> t.List[MarkovLanguage]:
    """Random Markov languages over disjoint letter sets

    Args:
        n_languages: number of languages
        rng: source of the transition probabilities
        letters_per_language: size of every letter set
        concentration: Dirichlet concentration of each transition row (small = peaked)
        paired: languages 2j and 2j+1 share letter set j (labels 'pair<j>a', 'pair<j>b'),
                otherwise every language has its own letter set (labels 'lang<i>')
    """
    if n_languages < 1:
        raise ValueError(f'Need at least one language, got {n_languages}')
    if paired and n_languages % 2:
        raise ValueError(f'Paired languages need an even count, got {n_languages}')
    n_sets = n_languages // 2 if paired else n_languages
    if n_sets * letters_per_language > len(_LETTERS):
        raise ValueError(f'{n_sets} disjoint sets of {letters_per_language} letters exceed the alphabet')

    languages = []
    for i in range(n_languages):
        letter_set = i // 2 if paired else i
        letters = _LETTERS[letter_set * letters_per_language:(letter_set + 1) * letters_per_language]
        label = f'pair{letter_set}{"ab"[i % 2]}' if paired else f'lang{i}'
        languages.append(MarkovLanguage(label=label, letters=letters,
                                        transitions=_transition_matrix(letters_per_language, concentration,
                                                                       rng.generator)))
    return languages


def write_corpus(languages: t.Sequence[MarkovLanguage], out_dir: t.Union[str, pathlib.Path], rng: RandomSource,
                 train_symbols: int = 20_000, test_sentences: int = 100) -> t.Tuple[pathlib.Path, pathlib.Path]:
    """Writes train/<label>.txt (one long text) and test/<label>.txt (one sentence per line)

    Returns the train and test directories.
    """
    train_dir, test_dir = pathlib.Path(out_dir) / 'train', pathlib.Path(out_dir) / 'test'
    train_dir.mkdir(parents=True, exist_ok=True)
    test_dir.mkdir(parents=True, exist_ok=True)
    for language in languages:
        (train_dir / f'{language.label}.txt').write_text(language.sample_text(train_symbols, rng) + '\n',
                                                        encoding='utf-8')
        (test_dir / f'{language.label}.txt').write_text(
            ''.join(s + '\n' for s in language.sample_sentences(test_sentences, rng)), encoding='utf-8')
    return train_dir, test_dir
