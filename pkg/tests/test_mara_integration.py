from mara_hdc import mara_integration as mi
import pytest


@pytest.fixture
def mock_mara_pipelines_config(monkeypatch):
    """Setups the mara_pipelines.config so that it's usable for us"""
    import mara_db.dbs
    import mara_db.config

    def mock_databases():
        return {'dwh': mara_db.dbs.PostgreSQLDB(host='localhost', database='mock_db')}

    monkeypatch.setattr(mara_db.config, "databases", mock_databases)


corpus_dir = '/data/corpus/train'
profiles_file = '/data/my profiles.lprf'
sentences_file = '/data/sentences.txt'
target_table_name = 'public.sentence_language'


def test_TrainLanguageProfiles_command_with_flask():
    command = mi.TrainLanguageProfiles(corpus_dir=corpus_dir,
                                       profiles_file=profiles_file,
                                       dim=4096,
                                       seed=7,
                                       fold_diacritics=True,
                                       use_flask_command=True)
    shell_command = command.shell_command()
    assert shell_command.startswith('flask mara_hdc.cli langid train')
    assert f"--corpus={corpus_dir}" in shell_command
    assert f"--out='{profiles_file}'" in shell_command
    assert '--dim=4096' in shell_command
    assert '--seed=7' in shell_command
    assert '--fold-diacritics' in shell_command
    assert '--report=/dev/null' in shell_command


def test_TrainLanguageProfiles_command_with_config_defaults():
    command = mi.TrainLanguageProfiles(corpus_dir=corpus_dir, profiles_file=profiles_file)
    shell_command = command.shell_command()
    assert '-m mara_hdc langid train' in shell_command
    assert '--dim' not in shell_command
    assert '--seed' not in shell_command
    assert 'diacritics' not in shell_command


def test_ClassifySentencesToTable_command_with_flask(mock_mara_pipelines_config):
    command = mi.ClassifySentencesToTable(sentences_file=sentences_file,
                                          profiles_file=profiles_file,
                                          target_table_name=target_table_name,
                                          use_flask_command=True)
    shell_command = command.shell_command()
    assert target_table_name in shell_command  # more a test of mara_db
    assert f"--input={sentences_file}" in shell_command
    assert f"--profiles='{profiles_file}'" in shell_command
    assert '--fail-on-no-data' in shell_command
    assert shell_command.startswith('flask')


def test_ClassifySentencesToTable_command_with_python(mock_mara_pipelines_config):
    command = mi.ClassifySentencesToTable(sentences_file=sentences_file,
                                          profiles_file=profiles_file,
                                          target_table_name=target_table_name,
                                          use_flask_command=False,
                                          fail_on_no_data=False)
    shell_command = command.shell_command()
    print(shell_command)
    assert target_table_name in shell_command  # more a test of mara_db
    assert 'langid predict' in shell_command
    assert '--no-fail-on-no-data' in shell_command
    assert 'python' in shell_command
