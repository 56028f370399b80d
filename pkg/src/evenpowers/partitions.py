"""Searches over block partitions of the exponent set.

Two shape families are built in, parametrised by a split point n and the
largest exponent 2s:

* ``SHAPE_A``: K1 = {6, 8, ..., n},  K2 = {4, n+2, ..., 2s}
* ``SHAPE_B``: K1 = {22, ..., n},    K2 = {6, ..., 20, n+2, ..., 2s}

``SHAPE_FREE`` carries explicit blocks.  Feasibility predicates are plain
callables ``(tau, phis) -> margin`` with margin >= 0 meaning satisfied.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import CoverageError
from .holder import ExponentSet, ford_weights, optimize_weights, phi
from .tables import LambdaTable, lambda_real


class Shape(str, enum.Enum):
    SHAPE_A = "A"
    SHAPE_B = "B"
    SHAPE_FREE = "free"


@dataclass(frozen=True)
class PartitionShape:
    family: Shape
    split: int | None = None
    top: int | None = None  # 2s
    free_blocks: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "family", Shape(self.family))
        if self.family is not Shape.SHAPE_FREE:
            if self.split is None or self.top is None:
                raise ValueError("split point and 2s are required for shape families")
            if self.split % 2 or self.top % 2:
                raise ValueError("split point and 2s must be even")
            if self.split > self.top:
                raise ValueError(f"split {self.split} exceeds 2s={self.top}")
        blocks = self.blocks()
        seen: set[int] = set()
        for b in blocks:
            overlap = seen & set(b)
            if overlap:
                raise ValueError(f"blocks overlap on {sorted(overlap)}")
            seen |= set(b)
        universe = self.universe()
        if universe is not None and seen != universe:
            raise ValueError(
                f"blocks do not cover the declared universe; missing {sorted(universe - seen)[:5]}"
            )

    @classmethod
    def free(cls, *blocks: Sequence[int]) -> "PartitionShape":
        return cls(Shape.SHAPE_FREE, free_blocks=tuple(tuple(sorted(b)) for b in blocks))

    def universe(self) -> set[int] | None:
        if self.family is Shape.SHAPE_A:
            return set(range(4, self.top + 1, 2))
        if self.family is Shape.SHAPE_B:
            return set(range(6, self.top + 1, 2))
        return None

    def blocks(self) -> tuple[ExponentSet, ...]:
        n, top = self.split, self.top
        if self.family is Shape.SHAPE_A:
            if n < 6:
                raise ValueError(f"SHAPE_A needs split >= 6, got {n}")
            return (ExponentSet.even(6, n), ExponentSet([4, *range(n + 2, top + 1, 2)]))
        if self.family is Shape.SHAPE_B:
            if n < 22:
                raise ValueError(f"SHAPE_B needs split >= 22, got {n}")
            return (
                ExponentSet.even(22, n),
                ExponentSet([*range(6, 21, 2), *range(n + 2, top + 1, 2)]),
            )
        if not self.free_blocks:
            raise ValueError("free shape needs at least one block")
        return tuple(ExponentSet(b) for b in self.free_blocks)


def block_phi(block: ExponentSet, table: LambdaTable, weight_mode="ford", budget=20, powers=None):
    """phi of one block; a one-exponent block needs no Holder step and uses
    its own mean value, lambda(k, p)/k - 2p/k."""
    if weight_mode not in ("ford", "optimized"):
        raise ValueError(f"unknown weight mode {weight_mode!r}")
    if len(block) == 1:
        (k,) = block.members
        p = (powers or {}).get(k, 1)
        return lambda_real(table, k, p) / k - 2 * p / k
    if weight_mode == "ford":
        w = ford_weights(block, powers)
        return phi(block, w, table, powers).phi
    return optimize_weights(block, table, budget, powers)[1].phi


def evaluate_partition(shape: PartitionShape, table: LambdaTable, weight_mode="ford", budget=20):
    """phi for each block of the partition, in block order."""
    out = []
    for i, block in enumerate(shape.blocks(), start=1):
        try:
            out.append(block_phi(block, table, weight_mode, budget))
        except CoverageError as exc:
            raise CoverageError(f"block K{i}={list(block)}: {exc}") from None
    return tuple(out)


Predicate = Callable[[float, Sequence[float]], float]


def minor_arc_predicate(delta: float = 0.0) -> Predicate:
    """-tau/2 + phi1/2 + phi2/2 <= -1 - delta."""

    def margin(tau, phis):
        return (-1.0 - delta) - (-tau / 2 + phis[0] / 2 + phis[1] / 2)

    margin.__name__ = "minor_arcs"
    return margin


def replace_f4_predicate(delta: float = 0.0) -> Predicate:
    """phi1 <= -tau and tau + phi2 <= -1/2 - 2 delta."""

    def margin(tau, phis):
        return min(-tau - phis[0], (-0.5 - 2 * delta) - (tau + phis[1]))

    margin.__name__ = "replace_f4"
    return margin


PREDICATES = {"minor": minor_arc_predicate, "f4": replace_f4_predicate}


@dataclass(frozen=True)
class SearchResult:
    tau: float
    best_2s: int | None
    best_n: int | None
    phi1: float | None
    phi2: float | None
    feasible: bool
    margin: float

    def as_row(self):
        return {
            "tau": self.tau,
            "2s": self.best_2s,
            "n": self.best_n,
            "phi1": self.phi1,
            "phi2": self.phi2,
            "feasible": self.feasible,
        }


def _candidates(family, top, n_range):
    lo = max(n_range[0], 6 if family is Shape.SHAPE_A else 22)
    hi = min(n_range[1], top)
    lo += lo % 2
    return range(lo, hi + 1, 2)


def _eval_top(args):
    family, top, n_range, table, weight_mode, budget = args
    rows = []
    for n in _candidates(family, top, n_range):
        phis = evaluate_partition(PartitionShape(family, n, top), table, weight_mode, budget)
        rows.append((n, phis))
    return top, rows


def search_min_s(
    family: Shape | str,
    tau: float,
    predicate: Predicate,
    table: LambdaTable,
    top_range: tuple[int, int],
    n_range: tuple[int, int],
    weight_mode: str = "ford",
    budget: int = 20,
    workers: int = 1,
) -> SearchResult:
    """Smallest 2s (then smallest n) whose partition satisfies ``predicate``.

    Exhaustive over even 2s in ``top_range`` and even n in ``n_range``
    (clipped to the family's valid splits).  If nothing qualifies the
    result is infeasible and carries the best margin seen with its (2s, n).
    """
    family = Shape(family)
    if family is Shape.SHAPE_FREE:
        raise ValueError("search needs a parametrised shape family")
    lo, hi = top_range
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("search bounds must be finite")
    tops = [t for t in range(lo + lo % 2, hi + 1, 2)]
    jobs = [(family, t, n_range, table, weight_mode, budget) for t in tops]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_top, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_eval_top(job))
            top, rows = results[-1]
            if any(predicate(tau, phis) >= 0 for _, phis in rows):
                break

    best = None
    for top, rows in sorted(results):
        for n, phis in rows:
            m = predicate(tau, phis)
            if m >= 0:
                return SearchResult(tau, top, n, phis[0], phis[1], True, m)
            if best is None or m > best[0]:
                best = (m, top, n, phis)
    if best is None:
        return SearchResult(tau, None, None, None, None, False, -math.inf)
    m, top, n, phis = best
    return SearchResult(tau, top, n, phis[0], phis[1], False, m)


def results_to_csv(results: Sequence[SearchResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "2s", "n", "phi1", "phi2", "feasible"])
    for r in results:
        w.writerow([
            r.tau,
            "" if r.best_2s is None else r.best_2s,
            "" if r.best_n is None else r.best_n,
            "" if r.phi1 is None else f"{r.phi1:.15g}",
            "" if r.phi2 is None else f"{r.phi2:.15g}",
            str(r.feasible).lower(),
        ])
    return buf.getvalue()
