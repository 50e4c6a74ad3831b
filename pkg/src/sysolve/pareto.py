"""Non-dominated sorting of design points (both objectives minimized).

The design space is fully enumerated, so the frontier is computed exactly
with fast non-dominated sorting rather than a genetic search: every point
receives a rank, rank 1 being the non-dominated set.  Dominance is weak
(better-or-equal in both objectives, strictly better in at least one), so
co-located points share a rank.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .errors import EmptyInput, InputError, NonFiniteObjective, UnknownObjective
from .explore import SweepRecord, format_number, parse_number


@dataclass(frozen=True)
class ParetoPoint:
    """One ranked design point; rank 1 is the frontier."""

    point_id: Any
    obj_a: Any
    obj_b: Any
    rank: int


def _dominates(a_pair, b_pair) -> bool:
    return (
        a_pair[0] <= b_pair[0]
        and a_pair[1] <= b_pair[1]
        and (a_pair[0] < b_pair[0] or a_pair[1] < b_pair[1])
    )


def pareto_front(points: Sequence[tuple[Any, Any, Any]]) -> list[ParetoPoint]:
    """Rank all points by non-domination depth (fast non-dominated sort).

    For each point the set it dominates and its domination count are built,
    then fronts are peeled: rank-1 points have count zero, removing a front
    decrements the counts of the points it dominates.
    """
    if not points:
        raise EmptyInput("pareto_front requires at least one point")
    pairs = []
    for pid, obj_a, obj_b in points:
        if not (math.isfinite(obj_a) and math.isfinite(obj_b)):
            raise NonFiniteObjective(f"point {pid!r} has a non-finite objective")
        pairs.append((obj_a, obj_b))

    n = len(pairs)
    dominated_by_me: list[list[int]] = [[] for _ in range(n)]
    domination_count = [0] * n
    for p in range(n):
        for q in range(p + 1, n):
            if _dominates(pairs[p], pairs[q]):
                dominated_by_me[p].append(q)
                domination_count[q] += 1
            elif _dominates(pairs[q], pairs[p]):
                dominated_by_me[q].append(p)
                domination_count[p] += 1

    ranks = [0] * n
    front = [p for p in range(n) if domination_count[p] == 0]
    rank = 1
    while front:
        next_front = []
        for p in front:
            ranks[p] = rank
            for q in dominated_by_me[p]:
                domination_count[q] -= 1
                if domination_count[q] == 0:
                    next_front.append(q)
        front = next_front
        rank += 1

    return [
        ParetoPoint(point_id=pid, obj_a=obj_a, obj_b=obj_b, rank=ranks[index])
        for index, (pid, obj_a, obj_b) in enumerate(points)
    ]


_OBJECTIVES = ("cycles", "energy", "utilization")


def _extract(record: SweepRecord, name: str):
    if name == "utilization":
        # Higher utilization is better; flip it into a minimization objective.
        return 1 - record.utilization
    if name in _OBJECTIVES:
        return getattr(record, name)
    raise UnknownObjective(f"unknown objective {name!r}; choose from {_OBJECTIVES}")


def orient_objectives(
    records: Sequence[SweepRecord], objective_spec: tuple[str, str]
) -> list[tuple[tuple[int, int], Any, Any]]:
    """Map sweep records to (design point, obj_a, obj_b) minimization triples."""
    name_a, name_b = objective_spec
    return [
        (record.point, _extract(record, name_a), _extract(record, name_b))
        for record in records
    ]


FRONTIER_COLUMNS = ("height", "width", "obj_a", "obj_b", "rank")


def write_frontier_csv(points: Sequence[ParetoPoint], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(FRONTIER_COLUMNS)
        for point in points:
            height, width = point.point_id
            writer.writerow([
                str(height), str(width),
                format_number(point.obj_a), format_number(point.obj_b),
                str(point.rank),
            ])


def read_frontier_csv(path: str | Path) -> list[ParetoPoint]:
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            lines = [line for line in handle if not line.startswith("#")]
    except OSError as exc:
        raise InputError(f"cannot read frontier file {path}: {exc}") from exc
    reader = csv.reader(lines)
    header = tuple(next(reader, ()))
    if header != FRONTIER_COLUMNS:
        raise InputError(f"frontier file {path} has unexpected header {header}")
    return [
        ParetoPoint(
            point_id=(int(row[0]), int(row[1])),
            obj_a=parse_number(row[2]),
            obj_b=parse_number(row[3]),
            rank=int(row[4]),
        )
        for row in reader
    ]
