"""
Writing results: JSON reports and tab separated rows.

Rows are formatted as csv.excel dialect suitable for e.g. CSV loads into DBs. No header is written.
"""

import csv
import json
import pathlib
import sys
import typing as t

import numpy as np

__all__ = ['write_rows_as_csv_to_stream', 'write_json_report', 'strip_timing', 'to_jsonable']

TIMING_SUFFIX = '_seconds'


def write_rows_as_csv_to_stream(rows: t.Union[t.Sequence[t.Sequence[t.Any]], t.Iterator[t.Sequence[t.Any]]],
                                stream: t.TextIO,
                                delimiter_char: str = '\t',
                                ) -> int:
    """Writes each row as csv to the stream and returns the number of rows written

    Floats are written with 6 decimals, None as an empty field; rows where every field is empty are skipped.

    Args:
        rows: iterable of sequences of values
        stream: t.TextIO, sink where the content is written to (in Text mode, so sys.stdout is suitable)
        delimiter_char: str (default: '\t'), A character that delimits the output fields.
    """
    csv_writer = csv.writer(stream, dialect=csv.excel, delimiter=delimiter_char)

    n_rows = 0
    for row in rows:
        fields = ['' if value is None else f'{value:.6f}' if isinstance(value, float) else str(value)
                  for value in row]
        if len(''.join(fields)) > 0:
            csv_writer.writerow(fields)
            n_rows += 1
    return n_rows


def to_jsonable(value: t.Any) -> t.Any:
    """Converts numpy scalars and arrays (also nested in dicts, lists and tuples) to plain python values"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def strip_timing(report: t.Any) -> t.Any:
    """A copy of the report without the timing fields (keys ending in '_seconds'), at any depth"""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items() if not str(k).endswith(TIMING_SUFFIX)}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


def write_json_report(report: t.Dict[str, t.Any], out: t.Optional[t.Union[str, pathlib.Path]] = None):
    """Writes the report as indented JSON with sorted keys to the file `out`, or to stdout"""
    text = json.dumps(to_jsonable(report), indent=2, sort_keys=True) + '\n'
    if out is None or str(out) == '-':
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        pathlib.Path(out).write_text(text, encoding='utf-8')
