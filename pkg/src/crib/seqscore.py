"""Longest-common-subsequence scoring used by the language and narrative domains."""

from __future__ import annotations

from typing import Hashable, Sequence


def lcs_length(xs: Sequence[Hashable], ys: Sequence[Hashable]) -> int:
    if len(ys) > len(xs):
        xs, ys = ys, xs
    if not ys:
        return 0
    prev = [0] * (len(ys) + 1)
    for x in xs:
        curr = [0]
        for j, y in enumerate(ys):
            if x == y:
                curr.append(prev[j] + 1)
            else:
                curr.append(max(prev[j + 1], curr[j]))
        prev = curr
    return prev[-1]


def proportional_lcs(current: Sequence[Hashable], goal: Sequence[Hashable]) -> float:
    """LCS(current, goal) / max(|current|, |goal|); 0.0 when either side is empty."""
    denom = max(len(current), len(goal))
    if denom == 0 or not current:
        return 0.0
    return lcs_length(current, goal) / denom
