"""Runnable self-checks tying the analytic claims to evidence.

Each check returns a CheckResult with a measured detail string, so a
failing run names the quantity that moved.  The fast level covers the
oracle equivalences and order relations and finishes well under a
minute; the full level adds a Monte Carlo covering-failure trend that
costs a few extra seconds.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import infotheory
from .channels import ChannelRecipe, make_channel, random_channel, xor_sink_channel
from .infotheory import JointPmf
from .protocol import SimParams, generate_codebooks, run_transmission
from .region import (
    CodingDistribution,
    SearchConfig,
    cf_rates,
    evaluate_bounds,
    fme_oracle_check,
    random_distribution,
)

LEVELS = ("fast", "full")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _double_sum_mi(p: JointPmf, a: str, b: str, given: tuple[str, ...]) -> float:
    """Literal cell-by-cell I(A;B|C), kept independent of infotheory."""
    axes = list(p.names)
    table = np.asarray(p.table, dtype=np.float64)

    def marg(keep: tuple[str, ...]) -> np.ndarray:
        drop = tuple(i for i, nm in enumerate(axes) if nm not in keep)
        return table.sum(axis=drop)

    keep_abc = (a, b) + given
    keep_ac = (a,) + given
    keep_bc = (b,) + given
    p_abc = marg(keep_abc)
    p_ac = marg(keep_ac)
    p_bc = marg(keep_bc)
    p_c = marg(given) if given else np.array(1.0)
    names_abc = [nm for nm in axes if nm in keep_abc]
    total = 0.0
    for idx in np.ndindex(*p_abc.shape):
        cell = float(p_abc[idx])
        if cell <= 0.0:
            continue
        sub = dict(zip(names_abc, idx))
        ac = float(p_ac[tuple(sub[nm] for nm in axes if nm in keep_ac)])
        bc = float(p_bc[tuple(sub[nm] for nm in axes if nm in keep_bc)])
        c = float(p_c[tuple(sub[nm] for nm in axes if nm in given)]) if given else 1.0
        total += cell * np.log2(cell * c / (ac * bc))
    return total


def check_mutual_information(seed: int = 0, cases: int = 100) -> CheckResult:
    """Library mutual information vs a literal double-sum oracle."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        sizes = rng.integers(2, 5, size=3)
        raw = rng.gamma(1.0, 1.0, size=tuple(sizes))
        p = JointPmf(("A", "B", "C"), raw / raw.sum())
        for given in ((), ("C",)):
            got = infotheory.mutual_information(p, "A", "B", given)
            want = _double_sum_mi(p, "A", "B", given)
            worst = max(worst, abs(got - want))
    return CheckResult(
        name="mutual_information_oracle",
        passed=worst <= 1e-10,
        detail=f"max |difference| {worst:.2e} over {cases} joints (tol 1e-10)",
        seconds=time.perf_counter() - start,
    )


def check_rate_scan_agreement(seed: int = 0, channels: int = 20, dists: int = 5) -> CheckResult:
    """Eliminated rate form vs a direct scan over the index rate."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    grid = 10_000
    worst = 0.0
    for _ in range(channels):
        ch = random_channel(rng)
        for _ in range(dists):
            scanned, closed = fme_oracle_check(ch, random_distribution(rng, ch), r2_grid=grid)
            worst = max(worst, abs(scanned - closed))
    tol = 2.0 / grid
    return CheckResult(
        name="rate_bound_scan_agreement",
        passed=worst <= tol,
        detail=f"max |scan - closed form| {worst:.2e} (tol {tol:.1e})",
        seconds=time.perf_counter() - start,
    )


def check_compression_forms(grid_resolution: int = 8, yhat_max_size: int = 3) -> CheckResult:
    """Min-form and constrained-form searches land on the same rate."""
    start = time.perf_counter()
    cfg = SearchConfig(
        grid_resolution=grid_resolution,
        yhat_max_size=yhat_max_size,
        include_degenerate=True,
    )
    fixtures = (
        make_channel(ChannelRecipe("orthogonal_bsc", {"p2": 0.05, "p3": 0.2})),
        make_channel(ChannelRecipe("primitive", {"r0": 1, "p3": 0.1})),
    )
    worst = 0.0
    for ch in fixtures:
        rates = cf_rates(ch, cfg)
        worst = max(worst, abs(rates["minform"][0] - rates["constrained"][0]))
    return CheckResult(
        name="compression_rate_forms_agree",
        passed=worst <= 0.01,
        detail=f"max |minform - constrained| {worst:.2e} bits (tol 1e-2)",
        seconds=time.perf_counter() - start,
    )


def check_backward_dominates(seed: int = 0, dists: int = 50) -> CheckResult:
    """Backward window rate never drops below the sliding window rate."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    fixtures = (
        make_channel(ChannelRecipe("orthogonal_bsc", {"p2": 0.05, "p3": 0.2})),
        make_channel(ChannelRecipe("primitive", {"r0": 1, "p3": 0.1})),
        xor_sink_channel(0.1),
        random_channel(rng),
    )
    worst = -np.inf
    for ch in fixtures:
        for _ in range(dists):
            r = evaluate_bounds(ch, random_distribution(rng, ch))
            worst = max(worst, r.sliding_rate - r.backward_rate)
    bsc = np.array([[0.9, 0.1], [0.1, 0.9]])
    wide = evaluate_bounds(
        xor_sink_channel(0.1),
        CodingDistribution(
            p_x1=np.array([0.5, 0.5]), p_x2=np.array([0.5, 0.5]), q=np.stack([bsc, bsc])
        ),
    )
    gap = wide.backward_rate - wide.sliding_rate
    passed = worst <= 1e-9 and gap > 0.05
    return CheckResult(
        name="backward_window_dominates",
        passed=passed,
        detail=(
            f"max sliding - backward {worst:.2e} over {4 * dists} points; "
            f"constructed gap {gap:.3f} bits (needs > 0.05)"
        ),
        seconds=time.perf_counter() - start,
    )


def check_index_collisions(seed: int = 0) -> CheckResult:
    """Short relay books must reuse codewords when indices outnumber them."""
    start = time.perf_counter()
    from .channels import implicit_hashing_census

    ch = make_channel(ChannelRecipe("primitive", {"r0": 1, "p3": 0.1}))
    d = random_distribution(np.random.default_rng(seed), ch, yhat_size=2)
    p = SimParams(n=4, B=1, R=0.25, R2=2.0, seed=seed)
    books = generate_codebooks(ch, d, p, np.random.default_rng(seed))
    distinct, indices = implicit_hashing_census(books, 0)
    passed = indices == 256 and distinct <= 16
    return CheckResult(
        name="index_collision_census",
        passed=passed,
        detail=f"{distinct} distinct codewords for {indices} indices (cap 16 / 256)",
        seconds=time.perf_counter() - start,
    )


def check_covering_failure_trend(trials: int = 200) -> CheckResult:
    """Relay covering failures fade as the block length grows."""
    start = time.perf_counter()
    ch = make_channel(ChannelRecipe("orthogonal_bsc", {"p2": 0.05, "p3": 0.2}))
    mix = np.array([[0.65, 0.35], [0.35, 0.65]])
    d = CodingDistribution(
        p_x1=np.array([0.5, 0.5]), p_x2=np.array([0.5, 0.5]), q=np.stack([mix, mix])
    )
    rates = []
    for n in (16, 32, 48):
        p = SimParams(
            n=n, B=1, R=0.1, R2=0.15, epsilon=0.5, seed=3, decoder="sliding", metric="typicality"
        )
        fails = 0
        for t in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence([p.seed, t]))
            books = generate_codebooks(ch, d, p, rng)
            trace = run_transmission(ch, d, books, 0, p, rng)
            fails += sum(trace.relay_failures)
        rates.append(fails / (trials * p.B))
    decreasing = all(a > b for a, b in zip(rates, rates[1:]))
    passed = decreasing and rates[-1] <= rates[0] - 0.3
    shown = ", ".join(f"{r:.3f}" for r in rates)
    return CheckResult(
        name="covering_failure_trend",
        passed=passed,
        detail=f"failure rates [{shown}] over n in (16, 32, 48), {trials} trials",
        seconds=time.perf_counter() - start,
    )


def run_checks(level: str = "fast", seed: int = 0) -> list[CheckResult]:
    """All checks for one level, fast ones first."""
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    results = [
        check_mutual_information(seed),
        check_rate_scan_agreement(seed),
        check_backward_dominates(seed),
        check_index_collisions(seed),
        check_compression_forms(),
    ]
    if level == "full":
        results.append(check_covering_failure_trend())
    return results
