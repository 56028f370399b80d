"""Mean-value exponent tables.

``LambdaTable`` holds exponents lambda(k, s) for the moment bound
``int_0^1 |g_k|^{2s} << n^{lambda(k,s)/k}`` and ``NuTable`` holds the mixed
exponents nu(h, k, x).  Both are immutable once built and never extrapolate:
a missing key raises :class:`~evenpowers.errors.CoverageError`.

CSV layouts are ``k,s,lambda`` and ``h,k,x,nu``; ``#`` lines are comments.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

from .errors import CoverageError, MonotonicityError, TableFormatError

# lambda(k, k) for even k = 4..74, as printed.
_DIAGONAL = """\
4 4.60572553279363
6 7.31830866162191
8 9.92905727118400
10 12.5085676596728
12 15.0810335354744
14 17.6492420253841
16 20.2147016775680
18 22.7782942010074
20 25.3405652008671
22 27.9018686743506
24 30.4624435937399
26 33.0224567697859
28 35.5820280054141
30 38.1412454741396
32 40.7001754622901
34 43.2588687351309
36 45.8173648117595
38 48.3756949057251
40 50.9338839916435
42 53.4919522856964
44 56.0499163246911
46 58.6077897648850
48 61.1655839817793
50 63.7233085263161
52 66.2809714759776
54 68.8385797079435
56 71.3961391137431
58 73.9536547694960
60 76.5111310720912
62 79.0685718489890
64 81.6259804474121
66 84.1833598073007
68 86.7407126613713
70 89.2980408848625
72 91.8553469369745
74 94.4126324955738
"""

DIAGONAL_DECIMALS: Mapping[int, str] = MappingProxyType(
    {int(k): v for k, v in (line.split() for line in _DIAGONAL.splitlines())}
)

_FLOAT_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def _parse_float(text, line, name):
    text = text.strip()
    if not _FLOAT_RE.match(text):
        raise TableFormatError(f"{name} is not a decimal number: {text!r}", line)
    return float(text)


def _parse_int(text, line, name):
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+", text):
        raise TableFormatError(f"{name} is not an integer: {text!r}", line)
    return int(text)


def _rows(source, header):
    """Yield (line_number, fields) from a CSV path, file object or text."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        raise FileNotFoundError(f"table file not found: {source}")
    seen_header = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        fields = [f.strip() for f in row]
        if not seen_header:
            if fields != list(header):
                raise TableFormatError(
                    f"expected header {','.join(header)!r}, got {','.join(fields)!r}", lineno
                )
            seen_header = True
            continue
        if len(fields) != len(header):
            raise TableFormatError(f"expected {len(header)} fields, got {len(fields)}", lineno)
        yield lineno, fields
    if not seen_header:
        raise TableFormatError(f"missing header {','.join(header)!r}")


@dataclass(frozen=True)
class LambdaTable:
    entries: Mapping[tuple[int, int], float]
    provenance: str = ""
    _by_k: Mapping[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = dict(self.entries)
        by_k: dict[int, list[int]] = {}
        for (k, s), lam in entries.items():
            if k < 4 or k % 2:
                raise ValueError(f"k must be an even integer >= 4, got {k}")
            if s < 1:
                raise ValueError(f"s must be a positive integer, got {s}")
            if not (lam >= 0 and math.isfinite(lam)):
                raise ValueError(f"lambda({k},{s}) must be finite and >= 0, got {lam}")
            by_k.setdefault(k, []).append(s)
        for k, ss in by_k.items():
            ss.sort()
            for s0, s1 in zip(ss, ss[1:]):
                if entries[(k, s1)] < entries[(k, s0)]:
                    raise MonotonicityError(
                        k, s1,
                        f"lambda({k},{s1})={entries[(k, s1)]!r} < lambda({k},{s0})={entries[(k, s0)]!r}",
                    )
        object.__setattr__(self, "entries", MappingProxyType(entries))
        object.__setattr__(
            self, "_by_k", MappingProxyType({k: tuple(v) for k, v in by_k.items()})
        )

    def __reduce__(self):
        return (LambdaTable, (dict(self.entries), self.provenance))

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    def ks(self):
        return sorted(self._by_k)

    def s_values(self, k):
        return self._by_k.get(k, ())

    def lookup(self, k, s):
        try:
            return self.entries[(k, s)]
        except KeyError:
            raise CoverageError(f"lambda({k},{s}) is not in table ({self.provenance or 'unnamed'})") from None

    def contiguous_range(self, k, s):
        """Largest run of consecutive stored s-keys for ``k`` that contains ``s``.

        Returns ``(lo, hi)`` such that lambda_real(k, t) is defined for every
        real t in [lo, hi], or raises CoverageError.
        """
        ss = self._by_k.get(k)
        h = math.floor(s)
        if not ss or h not in ss:
            raise CoverageError(f"lambda({k},{h}) is not in table")
        i = ss.index(h)
        lo = hi = i
        while lo > 0 and ss[lo - 1] == ss[lo] - 1:
            lo -= 1
        while hi + 1 < len(ss) and ss[hi + 1] == ss[hi] + 1:
            hi += 1
        return ss[lo], ss[hi]

    def merged(self, other: "LambdaTable", provenance=None):
        dup = set(self.entries) & set(other.entries)
        if dup:
            raise ValueError(f"duplicate keys when merging tables: {sorted(dup)[:5]}")
        return LambdaTable(
            {**self.entries, **other.entries},
            provenance or f"{self.provenance}+{other.provenance}",
        )

    def to_csv(self):
        out = ["k,s,lambda"]
        for (k, s) in sorted(self.entries):
            out.append(f"{k},{s},{self.entries[(k, s)]!r}")
        return "\n".join(out) + "\n"


def builtin_diagonal() -> LambdaTable:
    """The 36 printed diagonal values lambda(k, k), k = 4, 6, ..., 74."""
    return LambdaTable(
        {(k, k): float(v) for k, v in DIAGONAL_DECIMALS.items()},
        provenance="builtin-diagonal",
    )


def load_lambda_table(source, provenance=None) -> LambdaTable:
    """Parse a ``k,s,lambda`` CSV.

    Duplicated keys and malformed rows raise :class:`TableFormatError` with
    the offending line number; decreasing lambda in s raises
    :class:`MonotonicityError`.
    """
    entries: dict[tuple[int, int], float] = {}
    for line, (ks, ss, ls) in _rows(source, ("k", "s", "lambda")):
        k = _parse_int(ks, line, "k")
        s = _parse_int(ss, line, "s")
        lam = _parse_float(ls, line, "lambda")
        if k < 4 or k % 2:
            raise TableFormatError(f"k must be an even integer >= 4, got {k}", line)
        if s < 1:
            raise TableFormatError(f"s must be positive, got {s}", line)
        if lam < 0:
            raise TableFormatError(f"lambda must be >= 0, got {lam}", line)
        if (k, s) in entries:
            raise TableFormatError(f"duplicate key (k={k}, s={s})", line)
        entries[(k, s)] = lam
    if provenance is None:
        provenance = str(source) if isinstance(source, (str, os.PathLike)) else "stream"
    return LambdaTable(entries, provenance)


def lambda_real(table: LambdaTable, k: int, s) -> float:
    """lambda(k, s) for real s >= 1 by linear interpolation in s.

    With h = floor(s) and t = s - h this is (1-t)*lambda(k,h) + t*lambda(k,h+1),
    and it returns the stored value unchanged when s is an integer.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    h = math.floor(s)
    frac = s - h
    if frac == 0:
        if (k, h) not in table.entries:
            raise CoverageError(f"table coverage: lambda({k},{h}) missing (k={k}, floor={h}, ceil={h})")
        return table.entries[(k, h)]
    lo = table.entries.get((k, h))
    hi = table.entries.get((k, h + 1))
    if lo is None or hi is None:
        raise CoverageError(
            f"table coverage: need lambda({k},{h}) and lambda({k},{h + 1}) "
            f"(k={k}, floor={h}, ceil={h + 1})"
        )
    t = float(frac) if isinstance(frac, Fraction) else frac
    return (1.0 - t) * lo + t * hi


@dataclass(frozen=True)
class NuTable:
    """Mixed exponents nu(h, k, x), one strictly increasing x-grid per (h, k)."""

    grids: Mapping[tuple[int, int], tuple[tuple[float, ...], tuple[float, ...]]]
    provenance: str = ""

    def __post_init__(self):
        clean = {}
        for key, (xs, nus) in dict(self.grids).items():
            xs = tuple(float(x) for x in xs)
            nus = tuple(float(v) for v in nus)
            if len(xs) != len(nus) or not xs:
                raise ValueError(f"grid for {key} is empty or ragged")
            if any(x <= 0 for x in xs):
                raise ValueError(f"grid for {key} has non-positive x")
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError(f"grid for {key} is not strictly increasing in x")
            clean[key] = (xs, nus)
        object.__setattr__(self, "grids", MappingProxyType(clean))

    def __reduce__(self):
        return (NuTable, (dict(self.grids), self.provenance))

    def domain(self, h, k):
        if (h, k) not in self.grids:
            raise CoverageError(f"nu({h},{k},.) is not in table")
        xs = self.grids[(h, k)][0]
        return xs[0], xs[-1]

    def to_csv(self):
        out = ["h,k,x,nu"]
        for (h, k) in sorted(self.grids):
            for x, v in zip(*self.grids[(h, k)]):
                out.append(f"{h},{k},{x!r},{v!r}")
        return "\n".join(out) + "\n"


def load_nu_table(source, provenance=None) -> NuTable:
    raw: dict[tuple[int, int], dict[float, float]] = {}
    for line, (hs, ks, xs, vs) in _rows(source, ("h", "k", "x", "nu")):
        h = _parse_int(hs, line, "h")
        k = _parse_int(ks, line, "k")
        x = _parse_float(xs, line, "x")
        v = _parse_float(vs, line, "nu")
        if h % 2 or k % 2:
            raise TableFormatError(f"h and k must be even, got h={h}, k={k}", line)
        if x <= 0:
            raise TableFormatError(f"x must be positive, got {x}", line)
        grid = raw.setdefault((h, k), {})
        if x in grid:
            raise TableFormatError(f"duplicate key (h={h}, k={k}, x={x})", line)
        grid[x] = v
    grids = {}
    for key, pts in raw.items():
        xs = sorted(pts)
        grids[key] = (tuple(xs), tuple(pts[x] for x in xs))
    if provenance is None:
        provenance = str(source) if isinstance(source, (str, os.PathLike)) else "stream"
    return NuTable(grids, provenance)


def nu_value(table: NuTable, h: int, k: int, x: float) -> float:
    """Piecewise-linear nu(h, k, x) on the stored grid; exact at grid points."""
    if (h, k) not in table.grids:
        raise CoverageError(f"nu({h},{k},.) is not in table")
    xs, nus = table.grids[(h, k)]
    x = float(x)
    if x < xs[0] or x > xs[-1]:
        raise CoverageError(f"nu({h},{k},{x}) outside grid [{xs[0]}, {xs[-1]}]")
    i = bisect.bisect_left(xs, x)
    if xs[i] == x:
        return nus[i]
    x0, x1 = xs[i - 1], xs[i]
    t = (x - x0) / (x1 - x0)
    return (1.0 - t) * nus[i - 1] + t * nus[i]
