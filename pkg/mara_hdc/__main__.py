"""Entry point for `python -m mara_hdc`"""

from mara_hdc.cli import cli

if __name__ == '__main__':
    cli(prog_name='mara_hdc')
