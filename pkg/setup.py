from setuptools import setup, find_packages
import re


def get_long_description():
    with open('README.md') as f:
        return re.sub('!\[(.*?)\]\(docs/(.*?)\)',
                      r'![\1](https://github.com/mara/mara-hdc/raw/master/docs/\2)', f.read())


setup(
    name='mara-hdc',
    version='0.1.0',

    description='Hyperdimensional computing, sparse distributed memory and language identification for mara',

    long_description=get_long_description(),
    long_description_content_type='text/markdown',

    url='https://github.com/mara/mara-hdc',

    install_requires=[
        'numpy>=1.17.0',  # Generator API (PCG64), packbits bitorder
        'scipy>=1.3.0',
        'click>=7.0',
        'mara-db>=4.2.0',
        'mara-pipelines>=3.0.0',
    ],
    tests_require=['pytest'],

    python_requires='>=3.7',

    packages=find_packages(),
    package_data={'mara_hdc': ['corpus/train/*.txt', 'corpus/test/*.txt']},

    author='Mara contributors',
    license='MIT',

    entry_points='''
        [console_scripts]
        mara-hdc=mara_hdc.cli:cli
    ''',
)
