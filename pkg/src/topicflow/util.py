"""Small shared helpers: TSV iteration, numeric formatting, quantile cutoffs."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import MalformedLine


def iter_tsv(path) -> Iterator[tuple[int, list[str]]]:
    """Yield (lineno, fields) for every non-blank, non-comment line.

    Lines starting with ``#`` are comments. Fields are split on single
    tabs and taken verbatim otherwise.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            yield lineno, line.split("\t")


def check_token(token: str, path, lineno: int, what: str) -> str:
    if not token or any(ch.isspace() for ch in token):
        raise MalformedLine(
            f"{path}:{lineno}: {what} must be a non-empty token without "
            f"whitespace, got {token!r}"
        )
    return token


def fmt_float(x) -> str:
    """Render a float with 12 significant digits."""
    return format(float(x), ".12g")


def fmt_weight(w) -> str:
    """Render a flow weight: integers stay integers, fractions round-trip."""
    if isinstance(w, int):
        return str(w)
    f = float(w)
    if f.is_integer():
        return str(int(f))
    return repr(f)


def parse_weight(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def quantile_cutoff(values: Iterable[int], q: float) -> int:
    """Smallest k such that at least a fraction q of the values are <= k.

    Exact rational arithmetic on the decimal rendering of q, so boundary
    cases like q=0.9 over ten values do not drift on float rounding.
    """
    vals = sorted(values)
    if not vals:
        raise ValueError("quantile of an empty collection")
    frac = Fraction(str(q))
    if not 0 < frac < 1:
        raise ValueError(f"quantile must be in (0, 1), got {q}")
    idx = max(0, math.ceil(frac * len(vals)) - 1)
    return vals[idx]
