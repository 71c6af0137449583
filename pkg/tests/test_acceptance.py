"""Acceptance suite: ten go/no-go checks on the package's core claims.

Each test prints one ``[acceptance]`` verdict line (visible under ``pytest -s``
or on failure); under ``pytest -v`` the per-test PASSED/FAILED line doubles as
the machine-readable verdict.  Schedules are fixed-seed, so every run checks
the identical instances.
"""

import time
from fractions import Fraction

import numpy as np

from conftest import binning_of, random_code
from distsec import (
    JointSystem,
    SeparableFunction,
    SimConfig,
    achievable_distortion,
    brute_force_optimal,
    check_sufficiency,
    complete_key_assignment,
    delta_closed_form,
    exchange_binning,
    greedy_code,
    identity_code,
    joint_distortion,
    make_alphabet,
    max_distortion,
    necessity_witness,
    product_function,
    simulate,
    sum_function,
    verify_structure,
)
from distsec.cli import main as cli_main
from distsec.encoders import Binning

REL = 1e-9


def _verdict(n, ok, detail):
    print(f"[acceptance] criterion {n:02d} {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def _dyadic_values(rng, m):
    # multiples of 1/1024 in [-100, 100]; sums of a few thousand stay exact
    return [int(v) / 1024 for v in rng.integers(-102400, 102401, size=m)]


def _schedule(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        m = int(rng.integers(2, 65))
        k = int(rng.integers(0, 7))
        out.append((m, k, _dyadic_values(rng, m)))
    return out


SCHEDULE_200 = _schedule(200, 20260823)


def test_c01_one_key_bit_suffices_on_regular_twenty():
    start = time.perf_counter()
    a = make_alphabet(range(1, 21))
    delta = delta_closed_form(greedy_code(a, 1), a)
    elapsed = time.perf_counter() - start
    ok = delta == 0 and isinstance(delta, (int, Fraction)) and elapsed < 1.0
    _verdict(1, ok, f"greedy 1-bit advantage on 1..20 is {delta!r} in {elapsed:.3f}s")


def test_c02_greedy_halving_bound_on_200_random_alphabets():
    start = time.perf_counter()
    good = 0
    for m, k, values in SCHEDULE_200:
        a = make_alphabet(values)
        d_max = max_distortion(a)
        delta = delta_closed_form(greedy_code(a, k), a)
        if delta <= d_max / 2**k + REL * d_max:
            good += 1
    elapsed = time.perf_counter() - start
    ok = good == 200 and elapsed < 30.0
    _verdict(2, ok, f"advantage <= d_max/2^k held in {good}/200 in {elapsed:.1f}s")


def test_c03_exchange_spread_bound_and_interval_on_same_schedule():
    good = 0
    for i, (m, k, values) in enumerate(SCHEDULE_200):
        a = make_alphabet(values)
        binning = exchange_binning(a, k, r=m, seed=i)
        code = complete_key_assignment(binning, k)
        d = a.spread
        delta = delta_closed_form(code, a)
        bound = delta <= d * d / 2 ** (2 * k) + REL * d * d

        center = sum(a.values) * 2**k / m
        slack = REL * max(1.0, abs(center) + d)
        sums_ok = all(
            abs(sum(a.values[v] for v in content) - center) <= d + slack
            for content in binning.bins
        )
        if bound and sums_ok:
            good += 1
    _verdict(3, good == 200, f"spread bound and sum interval held in {good}/200")


def test_c04_search_confirms_greedy_optimal_at_one_bit():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    good = total = 0
    for m in (2, 3, 4, 5, 6):
        for _ in range(50):
            a = make_alphabet([int(v) for v in rng.integers(-100, 101, size=m)])
            best = brute_force_optimal(a, 1).best_delta
            mine = delta_closed_form(greedy_code(a, 1), a)
            total += 1
            if best == mine and isinstance(best, (int, Fraction)):
                good += 1
    elapsed = time.perf_counter() - start
    ok = good == total == 250 and elapsed < 300.0
    _verdict(4, ok, f"search == greedy exactly in {good}/{total} in {elapsed:.1f}s")


def test_c05_closed_form_agrees_with_oracle_on_500_pairs():
    rng = np.random.default_rng(5)
    good = 0
    for i in range(500):
        m = int(rng.integers(1, 11))
        k = int(rng.integers(0, 4))
        r = int(rng.integers(m, m + 4))
        code = random_code(rng, m, k, r)
        style = i % 4
        if style < 2:
            values = [int(v) for v in rng.integers(-100, 101, size=m)]
        else:
            values = _dyadic_values(rng, m)
        if style % 2:
            w = [int(x) for x in rng.integers(1, 9, size=m)]
            pmf = [Fraction(x, sum(w)) for x in w]
            if style == 3:
                pmf = [float(p) for p in pmf]
        else:
            pmf = None
        a = make_alphabet(values, pmf)

        want = max_distortion(a) - achievable_distortion(code, a)
        got = delta_closed_form(code, a)
        if a.exact:
            match = got == want
        else:
            match = abs(got - want) <= REL * max(1.0, abs(max_distortion(a)))
        if match:
            good += 1
    _verdict(5, good == 500, f"closed form == d_max - oracle in {good}/500 pairs")


def test_c06_five_key_bits_reach_97_percent_of_max():
    rng = np.random.default_rng(6)
    good = 0
    for _ in range(50):
        m = int(rng.integers(2, 65))
        a = make_alphabet(_dyadic_values(rng, m))
        d_max = max_distortion(a)
        d_ach = d_max - delta_closed_form(greedy_code(a, 5), a)
        if d_ach >= (1 - Fraction(1, 32)) * d_max - REL * max(1.0, d_max):
            good += 1
    _verdict(6, good == 50, f"5-bit loss >= 31/32 of worst case in {good}/50")


def _uniform_source(m):
    return make_alphabet(range(1, m + 1))


def _perfect_code(alphabet, k):
    """A code with equal posterior means at k = 1 or 2 key bits."""
    if k == 1:
        return greedy_code(alphabet, 1)
    base = binning_of(greedy_code(alphabet, 1), alphabet)
    return complete_key_assignment(Binning(m=alphabet.m, bins=base.bins * 2), 2)


def _affine(values, a, b):
    return tuple(a * v + b for v in values)


def test_c07_securing_every_component_secures_the_composition():
    rng = np.random.default_rng(7)
    good = 0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        sources = [_uniform_source(int(rng.integers(2, 5))) for _ in range(n)]
        codes = [_perfect_code(s, int(rng.integers(1, 3))) for s in sources]
        L = int(rng.integers(1, 3))
        components = tuple(
            tuple(
                _affine(sources[i].values, int(rng.integers(-3, 4)), int(rng.integers(-5, 6)))
                for i in range(n)
            )
            for _ in range(L)
        )
        system = JointSystem(
            sources=tuple(sources),
            codes=tuple(codes),
            function=SeparableFunction(n=n, components=components),
        )
        if check_sufficiency(system) and joint_distortion(system).delta == 0:
            good += 1

    # the plain sum of n regular sources, one key bit each
    sums_ok = True
    for n in (2, 3):
        a = make_alphabet([1, 2, 3, 4])
        system = JointSystem(
            sources=(a,) * n,
            codes=(greedy_code(a, 1),) * n,
            function=sum_function([a.values] * n),
        )
        report = joint_distortion(system)
        sums_ok = sums_ok and report.delta == 0 and report.d_max == n * Fraction(5, 4)
    _verdict(7, good == 100 and sums_ok, f"joint advantage vanished in {good}/100 systems")


def test_c08_one_unsecured_component_always_yields_a_witness():
    rng = np.random.default_rng(8)
    good = 0
    for t in range(100):
        n = int(rng.integers(2, 4))
        u = int(rng.integers(0, n))
        sources, codes, tables = [], [], []
        for i in range(n):
            s = _uniform_source(int(rng.integers(2, 5)))
            sources.append(s)
            if i == u:
                codes.append(identity_code(s.m))
            else:
                codes.append(_perfect_code(s, int(rng.integers(1, 3))))
            # positive, strictly decreasing tables keep every component mean
            # and variance nonzero, which the product witness requires
            tables.append(_affine(s.values, int(rng.integers(1, 4)), int(rng.integers(0, 6))))
        build = sum_function if t % 2 == 0 else product_function
        system = JointSystem(
            sources=tuple(sources),
            codes=tuple(codes),
            function=build(tables),
        )
        report = necessity_witness(system, u)
        if (
            report.status == "found"
            and report.conditional_mean != report.function_mean
            and report.joint_delta > 0
        ):
            good += 1
    _verdict(8, good == 100, f"leak witness found in {good}/100 systems")


def test_c09_optima_have_the_claimed_shape_and_pruning_is_lossless():
    rng = np.random.default_rng(9)
    shape_ok = True
    for m in (2, 3, 4, 5, 6):
        for _ in range(3):
            a = make_alphabet([int(v) for v in rng.integers(-100, 101, size=m)])
            report = verify_structure(brute_force_optimal(a, 1).best_code)
            shape_ok = shape_ok and report.at_most_one_light_bin and report.bin_count_in_range

    agree = True
    for m in (2, 3, 4):
        for _ in range(8):
            a = make_alphabet([int(v) for v in rng.integers(-100, 101, size=m)])
            pruned = brute_force_optimal(a, 1, prune=True)
            full = brute_force_optimal(a, 1, prune=False)
            agree = agree and pruned.best_delta == full.best_delta
    _verdict(9, shape_ok and agree, "optima pass the shape check; pruning kept the optimum")


def _sim_targets():
    rng = np.random.default_rng(10)
    quad = make_alphabet([1, 2, 3, 4])
    twenty = make_alphabet(range(1, 21))
    irregular = make_alphabet([9, 5, 2, 1])
    skewed = make_alphabet([3, 1, 4, 1, 5], [Fraction(x, 15) for x in (5, 4, 3, 2, 1)])
    flat = make_alphabet([5, 5, 5, 5])
    dy1 = make_alphabet(_dyadic_values(rng, 10))
    dy2 = make_alphabet(_dyadic_values(rng, 6))

    targets = [
        (greedy_code(twenty, 1), twenty),
        (greedy_code(irregular, 1), irregular),
        (identity_code(4), quad),
        (greedy_code(dy1, 3), dy1),
        (complete_key_assignment(exchange_binning(dy2, 2, seed=1), 2), dy2),
        (random_code(rng, 5, 2, 6), skewed),
        (greedy_code(twenty, 5), twenty),
        (greedy_code(flat, 1), flat),
        (random_code(rng, 4, 1, 5), quad),
        (greedy_code(make_alphabet(range(0, 24, 3)), 2), make_alphabet(range(0, 24, 3))),
        (random_code(rng, 6, 2, 6), make_alphabet([int(v) for v in rng.integers(-50, 51, size=6)])),
        (greedy_code(skewed, 1), skewed),
    ]

    vals = quad.values
    joint = [
        JointSystem(sources=(quad, quad), codes=(greedy_code(quad, 1),) * 2,
                    function=sum_function([vals, vals])),
        JointSystem(sources=(quad, quad), codes=(identity_code(4), greedy_code(quad, 1)),
                    function=sum_function([vals, vals])),
        JointSystem(sources=(quad, quad), codes=(greedy_code(quad, 1),) * 2,
                    function=product_function([vals, vals])),
        JointSystem(sources=(quad, quad), codes=(identity_code(4), greedy_code(quad, 1)),
                    function=product_function([vals, vals])),
        JointSystem(sources=(quad,) * 3, codes=(greedy_code(quad, 1),) * 3,
                    function=sum_function([vals] * 3)),
        JointSystem(sources=(quad, irregular),
                    codes=(greedy_code(quad, 1), greedy_code(irregular, 1)),
                    function=sum_function([vals, irregular.values])),
        JointSystem(sources=(quad, quad), codes=(_perfect_code(quad, 2),) * 2,
                    function=SeparableFunction(
                        n=2, components=((vals, vals), ((2, 2, 2, 2), (8, 6, 4, 2))))),
        JointSystem(sources=(irregular, quad),
                    codes=(identity_code(4), _perfect_code(quad, 2)),
                    function=product_function([irregular.values, vals])),
    ]
    return targets + joint


def test_c10_monte_carlo_sits_within_four_standard_errors(tmp_path):
    good = 0
    configs = _sim_targets()
    for i, target in enumerate(configs):
        report = simulate(SimConfig(trials=100_000, seed=1000 + i, target=target))
        if report.stderr == 0.0:
            hit = report.empirical_dach == float(report.analytic_dach)
        else:
            hit = abs(report.empirical_dach - float(report.analytic_dach)) <= 4 * report.stderr
        if hit:
            good += 1

    # identical seeds must reproduce the CSV byte for byte
    code_path = tmp_path / "code.json"
    cli_main(["encode", "--alg", "greedy", "--values", "9,5,2,1", "--k", "1",
              "-o", str(code_path)])
    out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    for out in (out1, out2):
        rc = cli_main(["simulate", "--code", str(code_path), "--values", "9,5,2,1",
                       "--trials", "100000", "--seed", "77", "-o", str(out)])
        assert rc == 0
    identical = out1.read_bytes() == out2.read_bytes()
    _verdict(
        10,
        good == len(configs) == 20 and identical,
        f"empirical within 4 stderr in {good}/{len(configs)}; reruns byte-identical",
    )
