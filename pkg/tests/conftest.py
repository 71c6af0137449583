"""Shared generators for randomized tests.

Randomness in tests is always seeded; hypothesis strategies live in the test
modules that use them.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from distsec import Binning, KeyedCode, SourceAlphabet, bin_statistics, make_alphabet


def random_code(rng: np.random.Generator, m: int, k: int, r: int) -> KeyedCode:
    """A uniformly random decodable code: one random injection per key."""
    rows = tuple(
        tuple(int(b) for b in rng.permutation(r)[:m]) for _ in range(2**k)
    )
    return KeyedCode(m=m, k=k, r=r, assignment=rows)


def random_exact_alphabet(
    rng: np.random.Generator, m: int, nonuniform: bool = False
) -> SourceAlphabet:
    """Integer values in [-100, 100]; optional random rational pmf."""
    values = [int(v) for v in rng.integers(-100, 101, size=m)]
    if not nonuniform:
        return make_alphabet(values)
    weights = [int(w) for w in rng.integers(1, 20, size=m)]
    total = sum(weights)
    return make_alphabet(values, [Fraction(w, total) for w in weights])


def random_float_alphabet(
    rng: np.random.Generator, m: int, nonuniform: bool = False
) -> SourceAlphabet:
    """Float values in [-100, 100] on the 1/1024 grid (sums stay exact)."""
    values = [int(v) / 1024 for v in rng.integers(-102400, 102401, size=m)]
    if not nonuniform:
        return make_alphabet(values)
    weights = rng.integers(1, 20, size=m).astype(float)
    return make_alphabet(values, list(weights / weights.sum()))


def binning_of(code: KeyedCode, alphabet: SourceAlphabet) -> Binning:
    """Recover the bin-content view of a code (nonempty bins only)."""
    occ = bin_statistics(code, alphabet).occupancy
    bins = []
    for j in range(code.r):
        content = [v for v in range(code.m) for _ in range(occ[v][j])]
        if content:
            bins.append(tuple(content))
    return Binning(m=code.m, bins=tuple(bins))
