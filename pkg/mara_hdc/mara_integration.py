import shlex
import sys
import typing as t

from mara_pipelines import pipelines
from mara_pipelines.logging import logger
import mara_db.shell

__all__ = ['TrainLanguageProfiles', 'ClassifySentencesToTable']


class TrainLanguageProfiles(pipelines.Command):
    def __init__(self,
                 corpus_dir: str,
                 profiles_file: str,
                 dim: t.Optional[int] = None,
                 seed: t.Optional[int] = None,
                 fold_diacritics: t.Optional[bool] = None,
                 use_flask_command: bool = False
                 ) -> None:
        """
        Trains letter trigram language profiles from a directory of <label>.txt files

        Args:
            corpus_dir: str, directory with one UTF-8 text file per language, named <label>.txt
            profiles_file: str, the profile store to write
            dim: int=None, dimension of the hypervectors (default: config.default_dimension())
            seed: int=None, seed of the letter vectors (default: config.default_seed())
            fold_diacritics: bool=None, fold accented letters to a-z instead of mapping them to spaces
                             (default: config.fold_diacritics())
            use_flask_command: bool=False, if true uses the cli via flask, which needs an import to the main
                               module in the app.py import path to make the command available. Config
                               defaults are then taken from the patched config of the app.
        """
        self.corpus_dir = corpus_dir
        self.profiles_file = profiles_file
        self.dim = dim
        self.seed = seed
        self.fold_diacritics = fold_diacritics
        self.use_flask_command = use_flask_command

    def run(self) -> bool:
        logger.log(f'Training language profiles from {self.corpus_dir} into {self.profiles_file}...')
        if not super().run():
            logger.log(f'Error while training language profiles from {self.corpus_dir}.')
            return False
        logger.log(f'Finished training language profiles from {self.corpus_dir}.')
        return True

    def shell_command(self):
        command = [_invocation(self.use_flask_command), ' langid train',
                   _shell_linebreak_escape, _indentions,
                   f' --corpus={shlex.quote(self.corpus_dir)}',
                   f' --out={shlex.quote(self.profiles_file)}']
        if self.dim is not None:
            command.append(f' --dim={self.dim}')
        if self.seed is not None:
            command.append(f' --seed={self.seed}')
        if self.fold_diacritics is not None:
            command.append(' --fold-diacritics' if self.fold_diacritics else ' --no-fold-diacritics')
        # the training report must not end up in the task output
        command.append(' --report=/dev/null')
        return ''.join(command)

    def html_doc_items(self) -> [(str, str)]:
        from mara_page import _
        from html import escape
        return [
            ('corpus directory', _.pre[escape(self.corpus_dir)]),
            ('profiles file', _.pre[escape(self.profiles_file)]),
            ('dimension', _.pre[str(self.dim) if self.dim is not None else 'config default']),
            ('seed', _.pre[str(self.seed) if self.seed is not None else 'config default']),
            ('fold diacritics', _.pre[str(self.fold_diacritics) if self.fold_diacritics is not None
                                      else 'config default']),
            ('Invocation', _.pre[_invocation(self.use_flask_command)]),
        ]


class ClassifySentencesToTable(pipelines.Command):
    def __init__(self,
                 sentences_file: str,
                 profiles_file: str,
                 target_table_name: str,
                 target_db_alias: str = 'dwh',
                 use_flask_command: bool = False,
                 fail_on_no_data: bool = True
                 ) -> None:
        """
        Classifies the language of every line of a text file and loads the results into a table

        The table needs the columns (line_number, label, cosine, sentence); sentences too short to
        classify get a NULL label and cosine.

        Args:
            sentences_file: str, UTF-8 file with one sentence per line
            profiles_file: str, a profile store written by `langid train` (e.g. by TrainLanguageProfiles)
            target_table_name: str, the schema qualified table name on the db_alias where the data should be inserted.
                               The table needs to exist.
            target_db_alias: str='dwh', the mara db alias where this data should be inserted
            use_flask_command: bool=False, if true uses the cli via flask, which needs an import to the main
                               module in the app.py import path to make the command available (any print() in that
                               path will fail the load).
            fail_on_no_data: bool=True, if true fail when the file holds no sentence
        """
        self.sentences_file = sentences_file
        self.profiles_file = profiles_file
        self.target_table_name = target_table_name
        self.target_db_alias = target_db_alias
        self.delimiter_char = '\t'
        self.use_flask_command = use_flask_command
        self.fail_on_no_data = fail_on_no_data

    def run(self) -> bool:
        logger.log(f'Classifying sentences of {self.sentences_file} into '
                   f'{self.target_db_alias}.{self.target_table_name}...')
        if not super().run():
            logger.log(f'Error while classifying sentences of {self.sentences_file}.')
            return False
        logger.log(f'Finished classifying sentences of {self.sentences_file}.')
        return True

    def shell_command(self):
        return (langid_predict_shell_command(self.sentences_file, self.profiles_file,
                                             delimiter_char=self.delimiter_char,
                                             use_flask_command=self.use_flask_command,
                                             fail_on_no_data=self.fail_on_no_data)
                + f'{_shell_linebreak_escape}| '
                + mara_db.shell.copy_from_stdin_command(self.target_db_alias, target_table=self.target_table_name,
                                                        null_value_string='', csv_format=True,
                                                        delimiter_char=self.delimiter_char))

    def html_doc_items(self) -> [(str, str)]:
        from mara_page import _
        from html import escape
        return [
            ('sentences file', _.pre[escape(self.sentences_file)]),
            ('profiles file', _.pre[escape(self.profiles_file)]),
            ('target table name', _.pre[escape(self.target_table_name)]),
            ('target db', _.pre[escape(self.target_db_alias)]),
            ('Invocation', _.pre[_invocation(self.use_flask_command)]),
            ('Fail on no data', _.pre[str(self.fail_on_no_data)]),
        ]


def _invocation(use_flask):
    import mara_hdc.cli
    main_module = mara_hdc.__name__
    flask_command_name = mara_hdc.cli.cli.name
    python = sys.executable
    invocation = f'flask {main_module}.{flask_command_name}' if use_flask else f'{python} -m {main_module}'
    return invocation


_shell_linebreak_escape = ' \\\n'
_indentions = ' ' * 5  # similar to what copy_from_stdin_command() does after a linebreak within the command


def langid_predict_shell_command(sentences_file: str,
                                 profiles_file: str,
                                 delimiter_char: str = '\t',
                                 use_flask_command: bool = True,
                                 fail_on_no_data: bool = True,
                                 ):
    """
    The shell command which writes one row per sentence (line number, label, cosine, sentence) to stdout

    Args:
        sentences_file: str, UTF-8 file with one sentence per line
        profiles_file: str, a profile store written by `langid train`
        delimiter_char: str='\t', a character that delimits the output fields.
        use_flask_command: bool=True, if true uses the cli via flask, which needs an import in the flask app path
                           to make the command available and this can potentially print something which would make
                           the load fail.
        fail_on_no_data: bool=True, if true fail when no sentence is read
    """
    return ''.join([
        _invocation(use_flask_command),
        ' langid predict',
        _shell_linebreak_escape,
        _indentions,
        f' --profiles={shlex.quote(profiles_file)}',
        f' --input={shlex.quote(sentences_file)}',
        f" --delimiter-char='{delimiter_char}'",
        ' --fail-on-no-data' if fail_on_no_data else ' --no-fail-on-no-data'
    ])
