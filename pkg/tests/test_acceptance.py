"""Acceptance suite: quantitative regime verification and engine gates.

The asymptotic predictions are checked at scaled-down sizes: 10-seed
ensembles of million-vertex runs for the supercritical, two-type and
subcritical criteria, a 5-seed ensemble of ten-million-vertex runs for the
(logarithmically slow) critical regime, plus exact-distribution, oracle
and determinism gates.  One PASS/FAIL line per criterion is printed in the
pytest terminal summary.
"""

import math
import random
import time

import pytest

from pachoice import (
    GraphState,
    RunConfig,
    WeightIndex,
    classify_regime,
    drift,
    estimate_regime_statistic,
    expectation_oracle,
    leadership_changes_after,
    mean_field_limit,
    monte_carlo_step,
    new_params,
    run,
    solve_fixed_point,
    sweep,
    trajectory_csv_bytes,
)
from pachoice.trajectory import json_bytes

SUPER = new_params(1, 2, 3, beta=0.0)
TWOTYPE = new_params(1, 2, 3, T=2, beta=0.0, type_probs=[0.3, 0.7])
SUB = new_params(1, 1, 2, beta=0.0)
CRITICAL = new_params(1, 1, 3, beta=0.0)

N_BIG = 10**6
N_CRIT = 10**7
SEEDS = 10
CRIT_SEEDS = 5

X_STAR_CLOSED = 3.0 * (3.0 - math.sqrt(7.0))


@pytest.fixture(scope="module")
def ens_super():
    return sweep([SUPER], N_BIG, root_seed=1009, replicates=SEEDS, jobs=1)


@pytest.fixture(scope="module")
def ens_twotype():
    return sweep([TWOTYPE], N_BIG, root_seed=2003, replicates=SEEDS, jobs=1)


@pytest.fixture(scope="module")
def ens_sub():
    return sweep([SUB], N_BIG, root_seed=3001, replicates=SEEDS, jobs=1)


@pytest.fixture(scope="module")
def ens_critical():
    return sweep([CRITICAL], N_CRIT, root_seed=4001, replicates=CRIT_SEEDS, jobs=1)


def median(values):
    vs = sorted(values)
    mid = len(vs) // 2
    return vs[mid] if len(vs) % 2 else 0.5 * (vs[mid - 1] + vs[mid])


class TestCriterion1TheoryExactness:
    def test_fixed_point_closed_form_and_speed(self, criterion_report):
        x = solve_fixed_point(SUPER)
        err = abs(x - X_STAR_CLOSED)
        residual = abs(drift(x, SUPER) - x)
        best = math.inf
        for _ in range(5):
            t0 = time.perf_counter()
            solve_fixed_point(SUPER)
            best = min(best, time.perf_counter() - t0)
        ok = err < 1e-9 and residual < 1e-12 and best < 1e-3
        criterion_report(
            "1", ok,
            f"x*={x:.10f} |x*-3(3-sqrt7)|={err:.2e} residual={residual:.2e} "
            f"best-of-5 solve time={best * 1e3:.3f} ms",
        )
        assert err < 1e-9
        assert residual < 1e-12
        assert best < 1e-3


class TestCriterion2SupercriticalCondensation:
    def test_median_max_degree_fraction(self, ens_super, criterion_report):
        x_star = solve_fixed_point(SUPER)
        fracs = [
            r.trajectory.final.max_degree_by_type[0] / N_BIG for r in ens_super
        ]
        med = median(fracs)
        runtimes = sorted(r.runtime_s for r in ens_super)
        med_rt = median(runtimes)
        ok = abs(med - x_star) <= 0.15 * x_star and med_rt < 60.0
        criterion_report(
            "2a", ok,
            f"median M/n={med:.4f} vs x*={x_star:.4f} "
            f"(ratio {med / x_star:.3f}, tolerance 0.85..1.15); "
            f"median runtime {med_rt:.1f}s (target <60s)",
        )
        assert abs(med - x_star) <= 0.15 * x_star
        assert med_rt < 60.0

    def test_mean_field_oracle_reaches_fixed_point(self, criterion_report):
        # the recursion from y0=1 contracts like n^-(1 - drift_slope(x*)),
        # about n^-0.156, so the raw ratio at n=1e6 still sits ~0.76% low;
        # the oracle's limit is therefore read off by extrapolating the
        # geometric checkpoint tail, which lands within 0.1% of x*
        x_star = solve_fixed_point(SUPER)
        limit, raw = mean_field_limit(SUPER, 0, n0=1, y0=1.0, n_max=N_BIG)
        rel = abs(limit - x_star) / x_star
        raw_rel = abs(raw - x_star) / x_star
        ok = rel < 1e-3
        criterion_report(
            "2b", ok,
            f"mean-field limit={limit:.6f} vs x*={x_star:.6f} (rel err {rel:.2e}); "
            f"raw ratio at n=1e6: {raw:.6f} (rel err {raw_rel:.2e})",
        )
        assert rel < 1e-3


class TestCriterion3TwoTypeCondensation:
    def test_both_types_condense(self, ens_twotype, criterion_report):
        x_star = solve_fixed_point(TWOTYPE)
        details = []
        ok = True
        for t, p_t in enumerate(TWOTYPE.type_probs):
            target = p_t * x_star
            med = median(
                r.trajectory.final.max_degree_by_type[t] / N_BIG for r in ens_twotype
            )
            within = abs(med - target) <= 0.20 * target
            ok = ok and within
            details.append(f"type{t + 1}: median={med:.4f} target={target:.4f}")
        criterion_report("3", ok, "; ".join(details) + " (tolerance 20%)")
        for t, p_t in enumerate(TWOTYPE.type_probs):
            target = p_t * x_star
            med = median(
                r.trajectory.final.max_degree_by_type[t] / N_BIG for r in ens_twotype
            )
            assert abs(med - target) <= 0.20 * target


class TestCriterion4SubcriticalExponent:
    def test_log_log_slopes(self, ens_sub, criterion_report):
        summary = classify_regime(SUB)
        slopes = [
            estimate_regime_statistic(r.trajectory, summary).value_by_type[0]
            for r in ens_sub
        ]
        inside = sum(0.65 < s < 0.85 for s in slopes)
        ok = inside >= 8
        criterion_report(
            "4", ok,
            f"rho={summary.rho:.2f}; slopes in (0.65,0.85): {inside}/{SEEDS} "
            f"(values: {', '.join(f'{s:.3f}' for s in sorted(slopes))})",
        )
        assert inside >= 8


class TestCriterion5CriticalRegime:
    def test_scaled_max_degree_with_trend(self, ens_critical, criterion_report):
        target = 16.0 / 3.0
        finals = [
            r.trajectory.final.max_degree_by_type[0]
            * math.log(N_CRIT) / N_CRIT
            for r in ens_critical
        ]
        med = median(finals)
        ok = target / 2.0 <= med <= target * 2.0

        print("\ncritical-regime trend: median M(n) ln(n) / n across checkpoints")
        ns = [row.n for row in ens_critical[0].trajectory.rows]
        trend = []
        for i, n in enumerate(ns):
            if n < 100:
                continue
            vals = [
                r.trajectory.rows[i].max_degree_by_type[0] * math.log(n) / n
                for r in ens_critical
            ]
            trend.append((n, median(vals)))
            print(f"  n={n:>10}  median M ln(n)/n = {median(vals):.4f}")
        tail = ", ".join(f"n={n}: {v:.3f}" for n, v in trend[-4:])
        criterion_report(
            "5", ok,
            f"median M ln(n)/n={med:.4f} vs 16/3={target:.4f} "
            f"(factor-2 window {target / 2:.2f}..{target * 2:.2f}); trend tail: {tail}",
        )
        assert target / 2.0 <= med <= target * 2.0


class TestCriterion6WeightBookkeeping:
    def test_weight_and_count_concentration(
        self, ens_super, ens_twotype, ens_sub, criterion_report
    ):
        worst_d = 0.0
        worst_n = 0.0
        worst_d_single = 0.0
        checked = 0
        for ens, params in (
            (ens_super, SUPER), (ens_twotype, TWOTYPE), (ens_sub, SUB)
        ):
            W = params.total_weight_rate
            for r in ens:
                final = r.trajectory.final
                n = final.n
                for t, p_t in enumerate(params.type_probs):
                    d_err = abs(final.D_by_type[t] / (W * p_t * n) - 1.0)
                    n_err = abs(final.counts_by_type[t] / n - p_t)
                    worst_d = max(worst_d, d_err)
                    worst_n = max(worst_n, n_err)
                    if params.num_types == 1:
                        worst_d_single = max(worst_d_single, d_err)
                    checked += 1
        ok = worst_d < 0.02 and worst_n < 0.05 and worst_d_single < 0.01
        criterion_report(
            "6", ok,
            f"{checked} (run, type) pairs at n=1e6: worst |D/(W p n) - 1|={worst_d:.2e} "
            f"(<0.02), worst |N/n - p|={worst_n:.2e} (<0.05), "
            f"single-type worst D error={worst_d_single:.2e} (<0.01)",
        )
        assert worst_d < 0.02
        assert worst_n < 0.05
        assert worst_d_single < 0.01


class TestCriterion7PersistentHub:
    def test_leadership_settles(self, ens_super, criterion_report):
        settled = 0
        totals = []
        for r in ens_super:
            after = leadership_changes_after(r.trajectory, 10**5)
            totals.append(sum(after))
            if all(c == 0 for c in after):
                settled += 1
        ok = settled >= 8
        criterion_report(
            "7", ok,
            f"seeds with zero leadership changes after n=1e5: {settled}/{SEEDS} "
            f"(changes after 1e5 per seed: {totals})",
        )
        assert settled >= 8


class TestCriterion8SamplerCorrectness:
    def test_exact_enumeration_small_indices(self, criterion_report):
        rng = random.Random(88)
        worst = 0.0
        for _ in range(60):
            n = rng.randrange(2, 13)
            T = rng.choice([1, 2, 3])
            types = [rng.randrange(T) for _ in range(n)]
            types[0] = 0
            types[1] = 0
            weights = [rng.uniform(0.05, 30.0) for _ in range(n)]
            idx = WeightIndex(T)
            for v, (w, t) in enumerate(zip(weights, types)):
                idx.insert_vertex(v, t, w)
            total = math.fsum(weights)
            for v, p in enumerate(idx.exact_probabilities()):
                worst = max(worst, abs(p - weights[v] / total))
            excluded = rng.choice([v for v in range(n) if types[v] == 0])
            pool = [v for v in range(n) if types[v] == 0 and v != excluded]
            if pool:
                ztot = math.fsum(weights[v] for v in pool)
                probs = idx.exact_probabilities_type_excluding(0, excluded)
                for v in pool:
                    worst = max(worst, abs(probs[v] - weights[v] / ztot))
        criterion_report(
            "8a", worst < 1e-12,
            f"branch-probability enumeration vs weight/total on <=12-vertex "
            f"indices: worst abs error {worst:.2e} (<1e-12)",
        )
        assert worst < 1e-12

    def test_empirical_tv_distance(self, criterion_report):
        rng = random.Random(1234)
        weights = [1.0, 2.0, 0.5, 7.0, 3.0, 1.5, 0.25, 4.0, 2.5, 8.25]
        idx = WeightIndex(1)
        for v, w in enumerate(weights):
            idx.insert_vertex(v, 0, w)
        probs = idx.exact_probabilities()
        counts = [0] * 10
        draws = 10**6
        for _ in range(draws):
            counts[idx.sample_global(rng)] += 1
        tv = 0.5 * sum(abs(c / draws - p) for c, p in zip(counts, probs))
        ok = tv < 0.01
        criterion_report(
            "8b", ok, f"TV distance over 1e6 draws from 10-vertex index: {tv:.5f} (<0.01)"
        )
        assert tv < 0.01

    def test_exclusion_never_returns_excluded(self, criterion_report):
        rng = random.Random(777)
        # condensation-like weights: the excluded vertex dominates the pool
        weights = [900_000.0, 1.0, 2.0, 1.0, 3.0]
        idx = WeightIndex(1)
        for v, w in enumerate(weights):
            idx.insert_vertex(v, 0, w)
        draws = idx.sample_type_excluding_many(0, 0, 10**6, rng)
        bad = sum(v == 0 for v in draws)
        ok = bad == 0
        criterion_report(
            "8c", ok,
            f"1e6 exclusion draws with the excluded vertex holding 99.999% "
            f"of the weight: {bad} returned it (must be 0)",
        )
        assert bad == 0


class TestCriterion9StepOracle:
    def test_monte_carlo_matches_enumeration(self, criterion_report):
        rng = random.Random(515)
        cases = []
        while len(cases) < 20:
            n = rng.randrange(3, 7)
            T = rng.choice([1, 2])
            m = rng.choice([1, 2])
            k = rng.choice([1, 2])
            d = rng.choice([2, 3])
            beta = rng.choice([0.0, 0.5])
            probs = None if T == 1 else [0.4, 0.6]
            params = new_params(m, k, d, T=T, beta=beta, type_probs=probs)
            degrees = [rng.randrange(1, 6) for _ in range(n)]
            types = [rng.randrange(T) for _ in range(n)]
            if T == 2 and len(set(types)) == 1:
                types[0] = 1 - types[0]
            cases.append((params, degrees, types))

        worst_sigma = 0.0
        for i, (params, degrees, types) in enumerate(cases):
            state = GraphState.from_vertices(degrees, types, params.beta, params.num_types)
            exact = expectation_oracle(state, params)
            mc = monte_carlo_step(state, params, replays=10**5, seed=9000 + i)
            for t in range(params.num_types):
                se = max(mc.dD_se[t], 1e-12)
                sigmas = abs(mc.dD_mean[t] - exact.dD_by_type[t]) / se
                worst_sigma = max(worst_sigma, sigmas)
        ok = worst_sigma < 3.0
        criterion_report(
            "9", ok,
            f"20 random states (n<=6, T<=2, d<=3), 1e5 replays each: worst "
            f"|MC - exact| = {worst_sigma:.2f} standard errors (<3)",
        )
        assert worst_sigma < 3.0


class TestCriterion10Determinism:
    def test_identical_seeds_identical_bytes(self, criterion_report):
        cfg = RunConfig(params=TWOTYPE, n_steps=20_000, seed=31337)
        b1 = trajectory_csv_bytes(run(cfg))
        b2 = trajectory_csv_bytes(run(cfg))
        ok = b1 == b2
        criterion_report(
            "10a", ok, f"same-seed trajectory CSVs byte-identical: {ok} ({len(b1)} bytes)"
        )
        assert ok

    def test_sweep_parallelism_independence(self, criterion_report):
        grid = [SUPER, SUB]
        serial = sweep(grid, 2000, root_seed=55, replicates=2, jobs=1)
        parallel = sweep(grid, 2000, root_seed=55, replicates=2, jobs=2)
        sum_eq = json_bytes([r.summary for r in serial]) == json_bytes(
            [r.summary for r in parallel]
        )
        traj_eq = all(
            trajectory_csv_bytes(a.trajectory) == trajectory_csv_bytes(b.trajectory)
            for a, b in zip(serial, parallel)
        )
        ok = sum_eq and traj_eq
        criterion_report(
            "10b", ok,
            f"sweep with jobs=1 vs jobs=2: summaries identical={sum_eq}, "
            f"trajectories identical={traj_eq}",
        )
        assert sum_eq and traj_eq
