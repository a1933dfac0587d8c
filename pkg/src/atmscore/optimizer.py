"""Budget-constrained placement as a 0/1 knapsack.

Each candidate (a county or a specific spot) has a reward, its fused score,
and a setup cost. A plan selects candidates maximizing total reward with
total cost within the budget. This additive-reward, hard-budget model is our
formalization of the reward/penalty trade-off, not a published algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from atmscore.errors import CapacityError, DomainError

EXACT_LIMIT = 24
_CHUNK_BITS = 12


@dataclass(frozen=True)
class Candidate:
    id: str
    score: float
    cost: float

    def __post_init__(self):
        if not (math.isfinite(self.score) and self.score >= 0):
            raise DomainError(f"candidate {self.id!r}: score must be finite and >= 0")
        if not (math.isfinite(self.cost) and self.cost > 0):
            raise DomainError(f"candidate {self.id!r}: cost must be finite and > 0")


@dataclass(frozen=True)
class Plan:
    selected: tuple[str, ...]
    total_score: float
    total_cost: float
    method: str


def _check(candidates: Sequence[Candidate], budget: float) -> None:
    if not (budget >= 0 and math.isfinite(budget)):
        raise DomainError(f"budget must be finite and >= 0, got {budget}")
    ids = [c.id for c in candidates]
    if len(set(ids)) != len(ids):
        raise DomainError("candidate ids must be unique")


def _plan(candidates: Sequence[Candidate], chosen: Sequence[int], method: str) -> Plan:
    chosen = sorted(chosen)
    return Plan(
        tuple(candidates[i].id for i in chosen),
        math.fsum(candidates[i].score for i in chosen),
        math.fsum(candidates[i].cost for i in chosen),
        method,
    )


def _subset_sums(values: np.ndarray) -> np.ndarray:
    # sums[mask] for every mask over len(values) bits
    sums = np.zeros(1 << len(values))
    for b, v in enumerate(values):
        half = 1 << b
        sums[half : 2 * half] = sums[:half] + v
    return sums


def exact_placement(candidates: Sequence[Candidate], budget: float, limit: int = EXACT_LIMIT) -> Plan:
    """Maximum-score feasible subset by full enumeration.

    Subsets are scanned in blocks of ``2**12`` low-index masks. Ties on
    score go to the lower total cost, then the lexicographically smaller
    sorted id tuple.
    """
    _check(candidates, budget)
    n = len(candidates)
    if n > limit:
        raise CapacityError(
            f"{n} candidates exceeds the exact-solver limit of {limit}; use greedy_placement"
        )
    if n == 0:
        return Plan((), 0.0, 0.0, "exact")
    scores = np.array([c.score for c in candidates])
    costs = np.array([c.cost for c in candidates])
    lo_bits = min(n, _CHUNK_BITS)
    lo_score, lo_cost = _subset_sums(scores[:lo_bits]), _subset_sums(costs[:lo_bits])
    hi_score, hi_cost = _subset_sums(scores[lo_bits:]), _subset_sums(costs[lo_bits:])
    slack = 1e-9 * (1.0 + costs.sum())

    # pass 1: best score among subsets that are clearly or nearly feasible
    near: list[int] = []
    best = -np.inf
    for h in range(len(hi_score)):
        total_cost = lo_cost + hi_cost[h]
        total_score = np.where(total_cost <= budget + slack, lo_score + hi_score[h], -np.inf)
        top = total_score.max()
        if top < best - 1e-9 * (1.0 + abs(best)):
            continue
        if top > best:
            best = top
        tol = 1e-9 * (1.0 + abs(best))
        near.extend(((np.flatnonzero(total_score >= best - tol)) | (h << lo_bits)).tolist())

    # pass 2: settle near-ties with correctly rounded sums
    best_key = None
    best_mask = 0
    for mask in near:
        idx = [i for i in range(n) if mask >> i & 1]
        cost = math.fsum(costs[i] for i in idx)
        if cost > budget:
            continue
        score = math.fsum(scores[i] for i in idx)
        key = (-score, cost, tuple(sorted(candidates[i].id for i in idx)))
        if best_key is None or key < best_key:
            best_key, best_mask = key, mask
    return _plan(candidates, [i for i in range(n) if best_mask >> i & 1], "exact")


def greedy_placement(candidates: Sequence[Candidate], budget: float) -> Plan:
    """Ratio greedy, compared against the best single affordable candidate.

    Candidates are taken in descending score/cost order (ties: higher
    score, then id), skipping any that no longer fit. The better of that
    plan and the best single candidate is returned, which guarantees at
    least half the optimum.
    """
    _check(candidates, budget)
    order = sorted(range(len(candidates)), key=lambda i: (
        -candidates[i].score / candidates[i].cost, -candidates[i].score, candidates[i].id))
    chosen = []
    spent = 0.0
    for i in order:
        if math.fsum([spent, candidates[i].cost]) <= budget:
            chosen.append(i)
            spent = math.fsum(candidates[j].cost for j in chosen)
    greedy = _plan(candidates, chosen, "greedy")

    affordable = [i for i, c in enumerate(candidates) if c.cost <= budget]
    if not affordable:
        return greedy
    single_i = min(affordable, key=lambda i: (-candidates[i].score, candidates[i].cost, candidates[i].id))
    single = _plan(candidates, [single_i], "greedy")
    if single.total_score > greedy.total_score:
        return single
    return greedy


def place(candidates: Sequence[Candidate], budget: float, method: str = "exact") -> Plan:
    if method == "exact":
        return exact_placement(candidates, budget)
    if method == "greedy":
        return greedy_placement(candidates, budget)
    raise DomainError(f"unknown placement method {method!r}")
