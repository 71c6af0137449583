"""Core model: discrete source alphabets and keyed block-length-one codes.

A source emits one symbol per use, drawn from a finite list of real values.
Transmitter and receiver share a k-bit key; each key value selects an
injective map from value indices to bin indices.  The receiver inverts the
map exactly; an eavesdropper sees only the bin index.  Everything downstream
(distortion analysis, code search, simulation) is built on the two frozen
types defined here.

Numbers are kept in whatever domain they arrive in: int and Fraction inputs
stay exact so that security claims can be asserted as equalities, float
inputs follow ordinary float arithmetic.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from fractions import Fraction

Scalar = int | float | Fraction


class CapExceededError(RuntimeError):
    """Raised when an instance exceeds a configured desk-scale cap.

    Search and joint-system enumeration are exponential in their inputs; the
    caps exist so a typo does not turn into an unbounded computation.  Callers
    that really mean it can raise the caps explicitly.
    """


def _coerce_scalar(x, what: str) -> Scalar:
    """Normalise one numeric input to int, Fraction, or float."""
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, numbers.Integral):
        return int(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Real):
        return float(x)
    raise TypeError(f"{what} must be a real number, got {type(x).__name__}")


def is_exact(x: Scalar) -> bool:
    """True when ``x`` carries no rounding (int or Fraction)."""
    return isinstance(x, (int, Fraction))


def arithmetic_view(alphabet: "SourceAlphabet") -> tuple[tuple, tuple]:
    """Values and pmf ready for posterior arithmetic.

    Division is the one operation that kicks ints out of the exact domain
    (int / int is a float), so on an exact alphabet every int is lifted to a
    Fraction first.  Float alphabets pass through unchanged.
    """
    if alphabet.exact:
        def lift(x):
            return Fraction(x) if isinstance(x, int) else x

        return (
            tuple(lift(v) for v in alphabet.values),
            tuple(lift(p) for p in alphabet.pmf),
        )
    return alphabet.values, alphabet.pmf


@dataclass(frozen=True)
class SourceAlphabet:
    """A finite value list with a probability mass function.

    ``values`` is stored in descending order; ``original_index[i]`` gives the
    position of ``values[i]`` in the caller-supplied list so external data
    keyed to the original order can be permuted consistently.  ``pmf`` is
    permuted together with the values.  All code bin-index tables produced by
    this package index the descending order.
    """

    values: tuple[Scalar, ...]
    pmf: tuple[Scalar, ...]
    original_index: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def exact(self) -> bool:
        """True when every value and pmf entry is an int or Fraction."""
        return all(is_exact(v) for v in self.values) and all(
            is_exact(p) for p in self.pmf
        )

    @property
    def spread(self) -> Scalar:
        """Largest value minus smallest value."""
        return self.values[0] - self.values[-1]

    def is_uniform(self) -> bool:
        """True when every symbol has probability exactly 1/m."""
        u = Fraction(1, self.m)
        return all(p == u for p in self.pmf)


def make_alphabet(values, pmf=None) -> SourceAlphabet:
    """Build a :class:`SourceAlphabet`, sorting values into descending order.

    Args:
        values: non-empty iterable of real numbers.  Duplicates are allowed
            (a constant alphabet is legal and trivially secure).
        pmf: optional iterable of probabilities, one per value, in the same
            order as ``values``.  Omitted means uniform, stored as the exact
            Fraction 1/m.

    Raises:
        ValueError: empty values, length mismatch, pmf entry outside [0, 1],
            or pmf sum differing from 1 by more than 1e-12.
    """
    vals = [_coerce_scalar(v, "value") for v in values]
    if not vals:
        raise ValueError("alphabet needs at least one value")
    m = len(vals)
    if pmf is None:
        probs = [Fraction(1, m)] * m
    else:
        probs = [_coerce_scalar(p, "pmf entry") for p in pmf]
        if len(probs) != m:
            raise ValueError(f"pmf has {len(probs)} entries for {m} values")
        for p in probs:
            if p < 0 or p > 1:
                raise ValueError(f"pmf entry {p} outside [0, 1]")
        total = sum(probs)
        if abs(total - 1) > Fraction(1, 10**12):
            raise ValueError(f"pmf sums to {total}, expected 1")
    order = sorted(range(m), key=lambda i: vals[i], reverse=True)
    return SourceAlphabet(
        values=tuple(vals[i] for i in order),
        pmf=tuple(probs[i] for i in order),
        original_index=tuple(order),
    )


@dataclass(frozen=True)
class KeyedCode:
    """An injective bin assignment per key value.

    ``assignment[key][value_index]`` is the 0-based bin index transmitted for
    that value under that key.  There are exactly ``2**k`` keys, so every
    value index has one outgoing assignment per key; injectivity per key is
    what makes the receiver's decoding exact.  The per-key injectivity also
    caps the number of (value, key) pairs landing in any one bin at ``2**k``.
    """

    m: int
    k: int
    r: int
    assignment: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one value")
        if self.k < 0:
            raise ValueError("key bit count must be >= 0")
        if self.r < 1:
            raise ValueError("need at least one bin")
        if len(self.assignment) != self.key_count:
            raise ValueError(
                f"expected {self.key_count} key rows, got {len(self.assignment)}"
            )
        for key, row in enumerate(self.assignment):
            if len(row) != self.m:
                raise ValueError(
                    f"key {key}: expected {self.m} entries, got {len(row)}"
                )
            seen = set()
            for v, b in enumerate(row):
                if not isinstance(b, int) or isinstance(b, bool):
                    raise ValueError(f"key {key}, value {v}: bin index must be int")
                if not 0 <= b < self.r:
                    raise ValueError(
                        f"key {key}, value {v}: bin {b} outside [0, {self.r})"
                    )
                if b in seen:
                    raise ValueError(f"key {key}: bin {b} used twice (not injective)")
                seen.add(b)

    @property
    def key_count(self) -> int:
        return 2**self.k


def encode_symbol(code: KeyedCode, key: int, value_index: int) -> int:
    """Bin index transmitted for ``value_index`` under ``key``."""
    if not 0 <= key < code.key_count:
        raise ValueError(f"key {key} outside [0, {code.key_count})")
    if not 0 <= value_index < code.m:
        raise ValueError(f"value index {value_index} outside [0, {code.m})")
    return code.assignment[key][value_index]


def decode(code: KeyedCode, key: int, bin_index: int) -> int:
    """Value index recovered from ``bin_index`` under ``key``.

    The inverse view is derived on demand: a linear scan of the key's row.
    Raises ValueError when the bin is not in the image of the key's mapping.
    """
    if not 0 <= key < code.key_count:
        raise ValueError(f"key {key} outside [0, {code.key_count})")
    if not 0 <= bin_index < code.r:
        raise ValueError(f"bin {bin_index} outside [0, {code.r})")
    row = code.assignment[key]
    for v in range(code.m):
        if row[v] == bin_index:
            return v
    raise ValueError(f"bin {bin_index} is not used by key {key}")


@dataclass(frozen=True)
class BinStatistics:
    """Exact occupancy and value-sum tallies for a code on an alphabet.

    ``occupancy[i][j]`` counts the keys sending value i to bin j; ``counts[j]``
    and ``sums[j]`` are the element count and value sum of bin j including
    multiplicity.  ``partial_sums`` is only populated mid-construction by the
    greedy encoder (the accumulated bin sums after a prefix of the keys).
    """

    counts: tuple[int, ...]
    sums: tuple[Scalar, ...]
    occupancy: tuple[tuple[int, ...], ...]
    partial_sums: tuple[Scalar, ...] | None = None


def bin_statistics(code: KeyedCode, alphabet: SourceAlphabet) -> BinStatistics:
    """Tally occupancy, element counts and value sums per bin.

    Conservation invariants (asserted by the test suite, not here): counts
    sum to ``m * 2**k``, each value row of the occupancy matrix sums to
    ``2**k``, and the grand total of sums equals ``2**k * sum(values)``.
    """
    if alphabet.m != code.m:
        raise ValueError(f"alphabet has {alphabet.m} values, code expects {code.m}")
    occ = [[0] * code.r for _ in range(code.m)]
    for row in code.assignment:
        for v, b in enumerate(row):
            occ[v][b] += 1
    counts = tuple(sum(occ[v][b] for v in range(code.m)) for b in range(code.r))
    sums = tuple(
        sum(alphabet.values[v] * occ[v][b] for v in range(code.m) if occ[v][b])
        for b in range(code.r)
    )
    return BinStatistics(
        counts=counts,
        sums=sums,
        occupancy=tuple(tuple(r) for r in occ),
    )


# ---------------------------------------------------------------------------
# JSON-friendly serialization.  Ints stay ints, floats stay floats, Fractions
# become "p/q" strings so the exact domain survives a round trip through a
# file.  The code document layout {m, k, r, assignment} is stable.

def scalar_to_json(x: Scalar):
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return f"{x.numerator}/{x.denominator}"
    return x


def scalar_from_json(x) -> Scalar:
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"bad rational literal {x!r}") from e
    return _coerce_scalar(x, "value")


def code_to_dict(code: KeyedCode) -> dict:
    return {
        "m": code.m,
        "k": code.k,
        "r": code.r,
        "assignment": [list(row) for row in code.assignment],
    }


def code_from_dict(doc: dict) -> KeyedCode:
    if not isinstance(doc, dict):
        raise ValueError("code document must be a JSON object")
    missing = {"m", "k", "r", "assignment"} - doc.keys()
    if missing:
        raise ValueError(f"code document missing fields: {sorted(missing)}")
    assignment = doc["assignment"]
    if not isinstance(assignment, list) or not all(
        isinstance(row, list) for row in assignment
    ):
        raise ValueError("assignment must be a list of per-key rows")
    return KeyedCode(
        m=int(doc["m"]),
        k=int(doc["k"]),
        r=int(doc["r"]),
        assignment=tuple(tuple(int(b) for b in row) for row in assignment),
    )


def alphabet_to_dict(alphabet: SourceAlphabet) -> dict:
    """Serialize in descending value order; pmf omitted when uniform."""
    doc = {"values": [scalar_to_json(v) for v in alphabet.values]}
    if not alphabet.is_uniform():
        doc["pmf"] = [scalar_to_json(p) for p in alphabet.pmf]
    return doc


def alphabet_from_dict(doc: dict) -> SourceAlphabet:
    if not isinstance(doc, dict) or not isinstance(doc.get("values"), list):
        raise ValueError("alphabet document must be an object with a 'values' list")
    values = [scalar_from_json(v) for v in doc["values"]]
    pmf = doc.get("pmf")
    if pmf is not None:
        if not isinstance(pmf, list):
            raise ValueError("pmf must be a list")
        pmf = [scalar_from_json(p) for p in pmf]
    return make_alphabet(values, pmf)
