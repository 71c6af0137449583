"""What the eavesdropper can do with one observed bin index.

She knows the code and the source statistics but not the key, so her view of
a transmission is the bin index alone.  Her minimum-mean-squared-error
estimate given bin j is the bin's posterior mean, her loss is the expected
posterior variance, and the gap between the key-blind worst case (guessing
the overall mean) and that loss is her advantage:

    advantage = var(Y) - E[var(Y | bin)] = var(E[Y | bin]).

``achievable_distortion`` computes her loss by raw enumeration of every
(value, key) pair and is the module's ground truth; ``delta_closed_form``
computes the advantage from bin tallies and must agree with it, which the
test suite checks on both the exact and the float path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import (
    BinStatistics,
    KeyedCode,
    Scalar,
    SourceAlphabet,
    arithmetic_view,
    bin_statistics,
)


def _mean_and_var(values, pmf) -> tuple[Scalar, Scalar]:
    mean = sum(p * y for p, y in zip(pmf, values))
    var = sum(p * (y - mean) * (y - mean) for p, y in zip(pmf, values))
    return mean, var


def max_distortion(alphabet: SourceAlphabet) -> Scalar:
    """Variance of the source value: the eavesdropper's loss when the code
    tells her nothing and she falls back to guessing the overall mean."""
    values, pmf = arithmetic_view(alphabet)
    return _mean_and_var(values, pmf)[1]


@dataclass(frozen=True)
class EvePosterior:
    """Per-bin observation probabilities and posterior means.

    ``tau_prob[j]`` is the probability of observing bin j under a uniform
    random key; ``tau_mean[j]`` is E[Y | bin j], None for bins that can never
    be observed; ``support`` lists the observable bins.
    """

    tau_prob: tuple[Scalar, ...]
    tau_mean: tuple[Scalar | None, ...]
    support: tuple[int, ...]


def eve_posterior(code: KeyedCode, alphabet: SourceAlphabet) -> EvePosterior:
    """Posterior over bins: p(bin j) and E[Y | bin j].

    With occupancy n[i][j] keys sending value i to bin j,
    p(bin j) = sum_i p_i n_ij / 2**k and the posterior mean reweights the
    values accordingly.  Exact alphabets yield exact Fractions.
    """
    values, pmf = arithmetic_view(alphabet)
    stats = bin_statistics(code, alphabet)
    keys = code.key_count
    probs, means = [], []
    for j in range(code.r):
        pj = sum(pmf[i] * stats.occupancy[i][j] for i in range(code.m)) / keys
        probs.append(pj)
        if pj > 0:
            num = sum(
                values[i] * pmf[i] * stats.occupancy[i][j] for i in range(code.m)
            )
            means.append(num / keys / pj)
        else:
            means.append(None)
    support = tuple(j for j in range(code.r) if probs[j] > 0)
    return EvePosterior(tau_prob=tuple(probs), tau_mean=tuple(means), support=support)


def achievable_distortion(code: KeyedCode, alphabet: SourceAlphabet) -> Scalar:
    """The eavesdropper's minimum expected squared error, by brute force.

    Walks every (value, key) pair, accumulates zeroth, first and second
    moments per bin, and sums the per-bin variances.  No structure of the
    code is assumed anywhere; this is the oracle the closed forms are
    checked against.
    """
    if alphabet.m != code.m:
        raise ValueError(f"alphabet has {alphabet.m} values, code expects {code.m}")
    values, pmf = arithmetic_view(alphabet)
    keys = code.key_count
    m0 = [0] * code.r
    m1 = [0] * code.r
    m2 = [0] * code.r
    for v in range(code.m):
        w = pmf[v] / keys
        if w == 0:
            continue
        y = values[v]
        for key in range(keys):
            b = code.assignment[key][v]
            m0[b] += w
            m1[b] += w * y
            m2[b] += w * y * y
    return sum(
        m2[j] - m1[j] * m1[j] / m0[j] for j in range(code.r) if m0[j] > 0
    )


def delta_closed_form(
    code: KeyedCode, alphabet: SourceAlphabet, method: str = "auto"
) -> Scalar:
    """The eavesdropper's advantage from bin tallies.

    method "general" works for any pmf:

        advantage = sum_j (sum_i y_i p_i n_ij / 2**k)^2 / p(bin j) - E[Y]^2

    summed over observable bins.  method "uniform" is the fast path for
    uniform alphabets,

        advantage = (1 / (2**k m)) sum_j S_j^2 / N_j - E[Y]^2,

    with S_j, N_j the bin value-sums and element counts; invoking it on a
    non-uniform alphabet raises ValueError.  "auto" picks the fast path
    exactly when the pmf is uniform.  Both agree with
    ``max_distortion - achievable_distortion`` identically.
    """
    if method not in ("auto", "general", "uniform"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "uniform" if alphabet.is_uniform() else "general"
    values, pmf = arithmetic_view(alphabet)
    mean = sum(p * y for p, y in zip(pmf, values))
    keys = code.key_count
    if method == "uniform":
        if not alphabet.is_uniform():
            raise ValueError("uniform fast path requires a uniform alphabet")
        stats = bin_statistics(code, alphabet)
        acc = 0
        for j in range(code.r):
            if stats.counts[j]:
                s = stats.sums[j]
                if alphabet.exact and isinstance(s, int):
                    s = Fraction(s)
                acc += s * s / stats.counts[j]
        return acc / (keys * code.m) - mean * mean
    stats = bin_statistics(code, alphabet)
    acc = 0
    for j in range(code.r):
        pj = sum(pmf[i] * stats.occupancy[i][j] for i in range(code.m)) / keys
        if pj > 0:
            num = (
                sum(values[i] * pmf[i] * stats.occupancy[i][j] for i in range(code.m))
                / keys
            )
            acc += num * num / pj
    return acc - mean * mean


def table_posterior_means(
    code: KeyedCode, alphabet: SourceAlphabet, table
) -> tuple[Scalar, tuple[Scalar | None, ...]]:
    """Overall mean and per-bin posterior means of an arbitrary value table.

    ``table[i]`` is any real payoff attached to value index i (the building
    block for checking per-component security of composed functions, where
    the secured quantity is a function of the symbol, not the symbol itself).
    Returns (E[t(X)], per-bin E[t(X) | bin j]) with None off the support.
    """
    if len(table) != code.m:
        raise ValueError(f"table has {len(table)} entries for {code.m} values")
    _, pmf = arithmetic_view(alphabet)
    if alphabet.exact:
        table = [Fraction(t) if isinstance(t, int) else t for t in table]
    stats = bin_statistics(code, alphabet)
    keys = code.key_count
    overall = sum(p * t for p, t in zip(pmf, table))
    means: list[Scalar | None] = []
    for j in range(code.r):
        pj = sum(pmf[i] * stats.occupancy[i][j] for i in range(code.m)) / keys
        if pj > 0:
            num = sum(
                table[i] * pmf[i] * stats.occupancy[i][j] for i in range(code.m)
            )
            means.append(num / keys / pj)
        else:
            means.append(None)
    return overall, tuple(means)


def is_perfectly_secure(
    code: KeyedCode, alphabet: SourceAlphabet, tol: float = 1e-9
) -> bool:
    """True when every observable bin's posterior mean equals E[Y].

    Equal posterior means leave the eavesdropper's best estimate identical to
    her no-observation guess, i.e. advantage zero.  Exact alphabets are
    compared exactly; float alphabets within ``tol`` scaled by max(1, |E[Y]|).
    """
    values, pmf = arithmetic_view(alphabet)
    mean = sum(p * y for p, y in zip(pmf, values))
    post = eve_posterior(code, alphabet)
    if alphabet.exact:
        return all(post.tau_mean[j] == mean for j in post.support)
    limit = tol * max(1.0, abs(mean))
    return all(abs(post.tau_mean[j] - mean) <= limit for j in post.support)


@dataclass(frozen=True)
class DistortionReport:
    """One code's distortion picture.

    ``bound1_ok`` checks advantage <= d_max / 2**k and ``bound2_ok`` checks
    advantage <= spread^2 / 2**(2k); both are None when not applicable (the
    guarantees are stated for uniform single sources, so non-uniform and
    composed reports carry None).
    """

    d_max: Scalar
    d_ach: Scalar
    delta: Scalar
    spread: Scalar
    bound1_ok: bool | None
    bound2_ok: bool | None
    perfectly_secure: bool


def bound_report(
    code: KeyedCode, alphabet: SourceAlphabet, tol: float = 1e-9
) -> DistortionReport:
    """Summarize max/achievable distortion, advantage, and the decay bounds.

    The two decay guarantees are checked with slack ``tol`` relative to their
    own scale (d_max and spread^2) so the float path does not flag rounding
    noise; on the exact path the slack is carried as an exact Fraction.
    """
    d_max = max_distortion(alphabet)
    delta = delta_closed_form(code, alphabet)
    d_ach = d_max - delta
    spread = alphabet.spread
    if alphabet.is_uniform():
        slack = Fraction(tol) if alphabet.exact else tol
        keys = code.key_count
        bound1_ok = delta <= d_max / keys + slack * d_max
        bound2_ok = delta <= spread * spread / keys**2 + slack * spread * spread
    else:
        bound1_ok = None
        bound2_ok = None
    return DistortionReport(
        d_max=d_max,
        d_ach=d_ach,
        delta=delta,
        spread=spread,
        bound1_ok=bound1_ok,
        bound2_ok=bound2_ok,
        perfectly_secure=is_perfectly_secure(code, alphabet, tol=tol),
    )
