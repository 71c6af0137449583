"""Exhaustive search for the code that minimizes the eavesdropper's advantage.

The advantage depends on a code only through its unordered bin contents, so
instead of walking per-key assignment tables the search walks binnings:
partitions of the multiset holding 2**k copies of every value index into bins
of at most 2**k elements.  Each binning is completed to a decodable code by
proper edge coloring; the two views cover the same codes up to relabeling of
keys and bins, and the binning space is factorially smaller.

Partitions are generated as lexicographically sorted bin sequences (each bin
an ascending tuple, bins non-decreasing), which visits every partition
exactly once; the next bin always contains the smallest remaining index,
since any later bin containing it would sort in front.

Pruning (on by default) drops any partial partition with two bins of at most
2**(k-1) elements: two such bins can be merged into one legal bin, and
coarsening what the eavesdropper sees never increases her estimate's
accuracy, so some optimal binning always survives the rule.  The unpruned
mode exists to test that claim, not to find better codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .encoders import Binning, complete_key_assignment
from .model import CapExceededError, KeyedCode, Scalar, SourceAlphabet, arithmetic_view


@dataclass(frozen=True)
class StructureReport:
    """Degree and shape properties expected of advantage-minimal codes.

    value_degree_ok: every value index has one assignment per key.
    bin_degree_ok: no bin collects more than 2**k (value, key) pairs.
    at_most_one_light_bin: at most one nonempty bin holds <= 2**(k-1)
        elements (otherwise two light bins could be merged at no cost).
    bin_count_in_range: the nonempty bin count r satisfies m <= r < 2m
        (forced by the degree properties plus the light-bin rule).
    """

    value_degree_ok: bool
    bin_degree_ok: bool
    at_most_one_light_bin: bool
    bin_count_in_range: bool

    @property
    def all_ok(self) -> bool:
        return (
            self.value_degree_ok
            and self.bin_degree_ok
            and self.at_most_one_light_bin
            and self.bin_count_in_range
        )


def verify_structure(code: KeyedCode) -> StructureReport:
    """Check a code against the structural fingerprint of optimal codes.

    Works from the assignment table alone.  Bin counts consider nonempty
    bins; declared-but-unused bins are unobservable and carry no structure.
    """
    keys = code.key_count
    value_degree_ok = len(code.assignment) == keys and all(
        len(row) == code.m for row in code.assignment
    )
    load = [0] * code.r
    for row in code.assignment:
        for b in row:
            load[b] += 1
    nonempty = [n for n in load if n > 0]
    bin_degree_ok = all(n <= keys for n in nonempty)
    light = sum(1 for n in nonempty if 2 * n <= keys)
    r = len(nonempty)
    return StructureReport(
        value_degree_ok=value_degree_ok,
        bin_degree_ok=bin_degree_ok,
        at_most_one_light_bin=light <= 1,
        bin_count_in_range=code.m <= r < 2 * code.m,
    )


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a brute-force search.

    ``best_delta`` is exact (Fraction) for exact alphabets.  ``pruned``
    counts subtrees cut by the light-bin rule, ``candidates_examined`` the
    complete binnings evaluated.  ``exhaustive`` records that the requested
    space was fully covered (pruning only removes candidates dominated by a
    retained one, so it does not reset the flag).
    """

    best_code: KeyedCode
    best_delta: Scalar
    candidates_examined: int
    pruned: int
    exhaustive: bool


def brute_force_optimal(
    alphabet: SourceAlphabet,
    k: int,
    r_range: tuple[int, int] | None = None,
    prune: bool = True,
    max_m: int = 8,
    max_k: int = 2,
    force: bool = False,
) -> SearchResult:
    """Minimize the eavesdropper's advantage over all decodable codes.

    Args:
        alphabet: must be uniform (the closed form the candidates are ranked
            by assumes it).
        k: key bits for every candidate.
        r_range: half-open (lo, hi) range of bin counts; None means (m, 2m),
            which is where minimal codes live.  Values of hi beyond 2m are
            legitimate in unpruned exploration.
        prune: apply the light-bin rule (default).  Pruned and unpruned
            searches return the same best advantage.
        max_m, max_k: desk-scale caps; the space grows factorially, so
            instances beyond the caps raise CapExceededError unless
            ``force=True`` acknowledges the cost.

    Ties between equally good binnings go to the lexicographically smallest
    completed assignment table, making the result deterministic.
    """
    if k < 0:
        raise ValueError("key bit count must be >= 0")
    if not alphabet.is_uniform():
        raise ValueError("search requires a uniform alphabet")
    if (alphabet.m > max_m or k > max_k) and not force:
        raise CapExceededError(
            f"m={alphabet.m}, k={k} exceeds caps (max_m={max_m}, max_k={max_k}); "
            "pass force=True to search anyway"
        )
    m = alphabet.m
    cap = 2**k
    if r_range is None:
        r_range = (m, 2 * m)
    r_lo, r_hi = r_range
    if r_hi <= r_lo or r_hi <= m:
        raise ValueError(f"empty bin-count range {r_range} for m={m}")
    r_lo = max(r_lo, m)

    values, _ = arithmetic_view(alphabet)
    mean = sum(values) / m
    total = m * cap

    remaining = [cap] * m
    state = {
        "examined": 0,
        "pruned": 0,
        "best_q": None,
        "best_code": None,
        "best_table": None,
    }

    def bin_candidates(lowest: int, prev: tuple[int, ...]):
        """Ascending tuples starting at ``lowest``, within remaining counts,
        at least ``prev``, with their value sums."""
        out = []

        def grow(content: list[int], last: int, s):
            out.append((tuple(content), s))
            if len(content) == cap:
                return
            for v in range(last, m):
                if remaining[v] > 0:
                    remaining[v] -= 1
                    content.append(v)
                    grow(content, v, s + values[v])
                    content.pop()
                    remaining[v] += 1

        remaining[lowest] -= 1
        grow([lowest], lowest, values[lowest])
        remaining[lowest] += 1
        return [(c, s) for (c, s) in out if c >= prev]

    def challenge(bins: list[tuple[int, ...]], q) -> None:
        if r_lo > len(bins):
            return  # below the requested bin-count range
        state["examined"] += 1
        best_q = state["best_q"]
        if best_q is not None and q > best_q:
            return
        code = complete_key_assignment(Binning(m=m, bins=tuple(bins)), k)
        table = code.assignment
        if best_q is None or q < best_q or table < state["best_table"]:
            state["best_q"] = q
            state["best_code"] = code
            state["best_table"] = table

    def extend(bins: list[tuple[int, ...]], left: int, q, light: int) -> None:
        if left == 0:
            challenge(bins, q)
            return
        if len(bins) >= r_hi - 1:
            return  # bin budget exhausted with copies still unplaced
        lowest = next(v for v in range(m) if remaining[v] > 0)
        prev = bins[-1] if bins else ()
        for content, s in bin_candidates(lowest, prev):
            n = len(content)
            new_light = light + (1 if 2 * n <= cap else 0)
            if prune and new_light > 1:
                state["pruned"] += 1
                continue
            if left - n > (r_hi - 1 - len(bins) - 1) * cap:
                continue  # remaining copies cannot fit behind this choice
            for v in content:
                remaining[v] -= 1
            bins.append(content)
            extend(bins, left - n, q + s * s / n, light=new_light)
            bins.pop()
            for v in content:
                remaining[v] += 1

    extend([], total, Fraction(0) if alphabet.exact else 0.0, 0)
    if state["best_code"] is None:
        raise ValueError(f"no decodable code exists within bin-count range {r_range}")
    best_delta = state["best_q"] / (cap * m) - mean * mean
    return SearchResult(
        best_code=state["best_code"],
        best_delta=best_delta,
        candidates_examined=state["examined"],
        pruned=state["pruned"],
        exhaustive=True,
    )
