"""Ring predecessor schedule: who sends raw columns to whom.

Sites sit on a ring. Each site receives from a run of its immediate
predecessors, long enough that every unordered pair of sites meets exactly
once across the whole schedule: with t = 2r sites the first r sites take
r-1 predecessors and the rest take r (counting identity
r(r-1) + r*r = t(t-1)/2); with t = 2r+1 every site takes r.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IndexOutOfRange

__all__ = ["Schedule", "CoverageReport", "predecessor", "build_schedule", "validate_schedule"]


@dataclass(frozen=True)
class Schedule:
    """Per-site predecessor lists, nearest predecessor first."""

    t: int
    r: int
    predecessors: tuple[tuple[int, ...], ...]

    def senders_to(self, k: int) -> tuple[int, ...]:
        """Sites whose raw columns site k receives."""
        if not 0 <= k < self.t:
            raise IndexOutOfRange(f"site {k} out of range for t={self.t}")
        return self.predecessors[k]

    def receivers_from(self, j: int) -> tuple[int, ...]:
        """Sites to which site j sends its raw columns."""
        if not 0 <= j < self.t:
            raise IndexOutOfRange(f"site {j} out of range for t={self.t}")
        return tuple(k for k in range(self.t) if j in self.predecessors[k])


@dataclass(frozen=True)
class CoverageReport:
    """Verdict on whether a schedule covers every site pair exactly once."""

    pairs_covered: int
    duplicates: tuple[tuple[int, int], ...]
    gaps: tuple[tuple[int, int], ...]
    max_list_len: int
    valid: bool


def predecessor(k: int, t: int) -> int:
    """The immediate ring predecessor of site k among t sites."""
    if t < 2:
        raise IndexOutOfRange(f"a ring needs at least 2 sites, got t={t}")
    if not 0 <= k < t:
        raise IndexOutOfRange(f"site {k} out of range for t={t}")
    return t - 1 if k == 0 else k - 1


def build_schedule(t: int) -> Schedule:
    """Predecessor lists for t sites.

    Even t = 2r: sites 0..r-1 list their r-1 immediate predecessors, sites
    r..t-1 list r of them. Odd t = 2r+1: every site lists r. Lists are
    generated by repeated application of `predecessor`, nearest first.
    """
    if t < 1:
        raise IndexOutOfRange(f"site count must be >= 1, got t={t}")
    r = t // 2
    if t == 1:
        return Schedule(t=1, r=0, predecessors=((),))

    lists: list[tuple[int, ...]] = []
    for k in range(t):
        depth = r if (t % 2 == 1 or k >= r) else r - 1
        chain: list[int] = []
        p = k
        for _ in range(depth):
            p = predecessor(p, t)
            chain.append(p)
        lists.append(tuple(chain))
    return Schedule(t=t, r=r, predecessors=tuple(lists))


def validate_schedule(s: Schedule) -> CoverageReport:
    """Check exact-once coverage of all unordered site pairs.

    Valid iff every pair of distinct sites appears exactly once across the
    predecessor lists and no list is longer than r.
    """
    seen: dict[tuple[int, int], int] = {}
    max_len = 0
    for k, preds in enumerate(s.predecessors):
        max_len = max(max_len, len(preds))
        for p in preds:
            pair = (min(p, k), max(p, k))
            seen[pair] = seen.get(pair, 0) + 1

    duplicates = tuple(sorted(pair for pair, n in seen.items() if n > 1))
    all_pairs = ((a, b) for a in range(s.t) for b in range(a + 1, s.t))
    gaps = tuple(pair for pair in all_pairs if pair not in seen)
    self_pairs = tuple(
        (k, k) for k, preds in enumerate(s.predecessors) if k in preds
    )
    valid = not duplicates and not gaps and not self_pairs and max_len <= s.r
    return CoverageReport(
        pairs_covered=len(seen),
        duplicates=duplicates + self_pairs,
        gaps=gaps,
        max_list_len=max_len,
        valid=valid,
    )
