"""Alias layer: exposes pandas under the renamed keywords of the bundled map.

Only meant for self-tests of converted benchmarks.
"""
import builtins
import pathlib

import pandas as _pd
from pandas import *  # noqa: F401,F403

_MAP = pathlib.Path(__file__).resolve().parents[4] / "data" / "keywords" / "pandas_monkey.tsv"
_TARGETS = [_pd.DataFrame, _pd.Series, _pd.Index, _pd.core.groupby.DataFrameGroupBy,
            _pd.core.groupby.SeriesGroupBy, _pd.core.strings.accessor.StringMethods]

for _line in _MAP.read_text().splitlines():
    if not _line.strip() or _line.startswith("#"):
        continue
    _pub, _priv = _line.split("\t")
    if hasattr(_pd, _pub):
        globals()[_priv] = getattr(_pd, _pub)
    for _cls in _TARGETS:
        if hasattr(_cls, _pub) and not hasattr(_cls, _priv):
            setattr(_cls, _priv, getattr(_cls, _pub))
    if hasattr(builtins, _pub) and not hasattr(builtins, _priv):
        setattr(builtins, _priv, getattr(builtins, _pub))
