"""Code constructions: greedy balancing, random-partition-plus-exchange,
identity, and completion of a bare binning into a decodable keyed code.

Both constructions aim at the same target: spread each value's 2**k copies
over bins so every bin's value sum sits close to the common mean, because an
eavesdropper's best estimate inside a bin is the bin's mean and her squared
loss grows with how uneven the bin sums are.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass

import numpy as np

from .model import KeyedCode, SourceAlphabet

_SWAP_LIMIT = 1_000_000


@dataclass(frozen=True)
class Binning:
    """Bin contents without a key assignment.

    ``bins[j]`` holds the value indices placed in bin j, ascending, with
    multiplicity: the same index appearing twice means two of that value's
    copies share the bin.  A binning fixes everything the eavesdropper can
    see; turning it into a decodable code is a separate completion step.
    """

    m: int
    bins: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one value")
        for j, content in enumerate(self.bins):
            if not content:
                raise ValueError(f"bin {j} is empty")
            if list(content) != sorted(content):
                raise ValueError(f"bin {j} contents must be sorted ascending")
            for v in content:
                if not 0 <= v < self.m:
                    raise ValueError(f"bin {j}: value index {v} outside [0, {self.m})")

    @property
    def r(self) -> int:
        return len(self.bins)


def identity_code(m: int) -> KeyedCode:
    """The keyless code: one key, value j goes to bin j.

    Offers no secrecy; the eavesdropper decodes exactly, so her achievable
    distortion is zero.  Useful as the k=0 baseline and as the deliberately
    insecure component in multi-source necessity experiments.
    """
    return KeyedCode(m=m, k=0, r=m, assignment=(tuple(range(m)),))


def greedy_code(alphabet: SourceAlphabet, k: int) -> KeyedCode:
    """Balance bin sums one key at a time, largest values into lightest bins.

    The first key maps value j to bin j (values are stored descending).  Each
    later key ranks bins by their accumulated value sum, ties toward the
    lower bin index, and hands the j-th largest value to the bin with the
    j-th smallest sum.  With one key bit this reduces to pairing the j-th
    largest with the j-th smallest value, which balances every bin sum
    exactly when the values form an arithmetic progression.

    The result uses r = m bins and every bin receives exactly one value per
    key, so each bin ends up with 2**k elements.
    """
    if k < 0:
        raise ValueError("key bit count must be >= 0")
    m = alphabet.m
    rows = [tuple(range(m))]
    partial = list(alphabet.values)
    for _ in range(1, 2**k):
        ranked = sorted(range(m), key=lambda b: (partial[b], b))
        # ranked[t] is the bin with the t-th smallest sum; it receives the
        # t-th largest value, so the row is the ranking itself.
        rows.append(tuple(ranked))
        for t, b in enumerate(ranked):
            partial[b] = partial[b] + alphabet.values[t]
    return KeyedCode(m=m, k=k, r=m, assignment=tuple(rows))


def exchange_binning(
    alphabet: SourceAlphabet,
    k: int,
    r: int | None = None,
    seed: int = 0,
    sum_sq_trace: list | None = None,
) -> Binning:
    """Randomly partition 2**k copies of the alphabet, then repair by swaps.

    Starts from a uniform random permutation of the m * 2**k value copies
    (PCG64, seeded), chunked into m bins of 2**k.  While the largest and
    smallest bin sums differ by more than the value spread d = y_max - y_min,
    the largest value of the heaviest bin trades places with the smallest
    value of the lightest bin.  Each such swap strictly lowers the sum of
    squared bin sums: writing a, b for the swapped values and S_i, S_j for
    the bin sums, the change is -2(a-b)(S_i - S_j - (a-b)), and with equal
    bin sizes a - b is positive yet at most d < S_i - S_j.  The state space
    is finite, so the loop terminates, with every final bin sum inside
    [mean_sum - d, mean_sum + d].

    Only r = m is supported: equal-size bins are what make the improving
    swap available, and r = m is the shape the completion step and the
    analysis bounds are stated for.

    Args:
        alphabet: must be uniform.
        k: key bits; each bin receives exactly 2**k copies.
        r: bin count; None means m, anything else is rejected.
        seed: fixes the initial random partition, and with it the result.
        sum_sq_trace: debug hook; when a list is passed, the sum of squared
            bin sums is appended before the first swap and after every swap.
    """
    if k < 0:
        raise ValueError("key bit count must be >= 0")
    if not alphabet.is_uniform():
        raise ValueError("exchange binning requires a uniform alphabet")
    m = alphabet.m
    if r is None:
        r = m
    if r < m:
        raise ValueError(
            f"r={r} infeasible: {m} * 2**{k} copies cannot fit in {r} bins of capacity 2**{k}"
        )
    if r != m:
        raise ValueError(f"r={r} unsupported: only r = m bins")

    copies = 2**k
    rng = np.random.default_rng(seed)
    shuffled = rng.permutation(np.repeat(np.arange(m), copies))
    bins = [sorted(int(v) for v in shuffled[i * copies : (i + 1) * copies]) for i in range(m)]

    values = alphabet.values
    d = alphabet.spread

    def bin_sums():
        return [sum(values[v] for v in content) for content in bins]

    if sum_sq_trace is not None:
        sum_sq_trace.append(sum(s * s for s in bin_sums()))
    for _ in range(_SWAP_LIMIT):
        sums = bin_sums()
        hi = max(range(m), key=lambda j: (sums[j], -j))
        lo = min(range(m), key=lambda j: (sums[j], j))
        if sums[hi] - sums[lo] <= d:
            break
        a = bins[hi][0]  # smallest index = largest value
        b = bins[lo][-1]
        if not values[a] > values[b]:
            break  # float near-tie degeneracy; spread is already within one gap of d
        bins[hi].pop(0)
        bins[lo].pop()
        insort(bins[hi], b)
        insort(bins[lo], a)
        if sum_sq_trace is not None:
            sum_sq_trace.append(sum(s * s for s in bin_sums()))
    else:
        raise RuntimeError("swap loop failed to settle within the iteration guard")
    return Binning(m=m, bins=tuple(tuple(content) for content in bins))


def complete_key_assignment(binning: Binning, k: int) -> KeyedCode:
    """Assign keys to a binning so the receiver can decode.

    Treats values and bins as the two sides of a multigraph whose edges are
    the value copies, and properly edge-colors it with 2**k colors: color c
    at value v tells key c to send v to the bin at the far end.  A proper
    coloring is exactly per-key injectivity.  One always exists here because
    every value has degree 2**k and no bin exceeds 2**k; the standard
    alternating-chain argument (swap two colors along a chain, which cannot
    reach the edge's own endpoints) places each edge in turn.

    The resulting code induces exactly the input binning.  Raises ValueError
    when the binning is malformed for k: a value with a copy count other
    than 2**k, or an overfull bin.
    """
    if k < 0:
        raise ValueError("key bit count must be >= 0")
    colors = 2**k
    m = binning.m
    mult = [0] * m
    for content in binning.bins:
        if len(content) > colors:
            raise ValueError(f"bin with {len(content)} elements exceeds capacity {colors}")
        for v in content:
            mult[v] += 1
    bad = [v for v in range(m) if mult[v] != colors]
    if bad:
        raise ValueError(
            f"value indices {bad} do not appear exactly {colors} times in the binning"
        )

    edges = [
        (v, j) for j, content in enumerate(binning.bins) for v in content
    ]
    vmap = [[None] * colors for _ in range(m)]  # value vertex -> color -> edge id
    bmap = [[None] * colors for _ in range(binning.r)]
    color_of = [None] * len(edges)

    for eid, (v, b) in enumerate(edges):
        free_v = next(c for c in range(colors) if vmap[v][c] is None)
        free_b = next(c for c in range(colors) if bmap[b][c] is None)
        both = next(
            (c for c in range(colors) if vmap[v][c] is None and bmap[b][c] is None),
            None,
        )
        if both is not None:
            use = both
        else:
            alpha, beta = free_v, free_b
            # Swap alpha and beta along the chain leaving b.  Walking from b,
            # value-side vertices are entered through alpha edges and bin-side
            # vertices through beta edges, so the chain can reach neither v
            # (alpha is free there) nor b again (beta is free there).
            chain = []
            vertex, on_value_side, want = b, False, alpha
            while True:
                lookup = vmap[vertex] if on_value_side else bmap[vertex]
                nxt = lookup[want]
                if nxt is None:
                    break
                chain.append(nxt)
                ev, eb = edges[nxt]
                vertex = eb if on_value_side else ev
                on_value_side = not on_value_side
                want = beta if want == alpha else alpha
            for ce in chain:
                cv, cb = edges[ce]
                old = color_of[ce]
                new = beta if old == alpha else alpha
                vmap[cv][old] = None
                bmap[cb][old] = None
                color_of[ce] = new
            for ce in chain:
                cv, cb = edges[ce]
                vmap[cv][color_of[ce]] = ce
                bmap[cb][color_of[ce]] = ce
            use = alpha
        color_of[eid] = use
        vmap[v][use] = eid
        bmap[b][use] = eid

    rows = []
    for c in range(colors):
        row = []
        for v in range(m):
            eid = vmap[v][c]
            assert eid is not None  # degree == colors guarantees every color lands
            row.append(edges[eid][1])
        rows.append(tuple(row))
    return KeyedCode(m=m, k=k, r=binning.r, assignment=tuple(rows))
