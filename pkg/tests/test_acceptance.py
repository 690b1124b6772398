"""Acceptance suite: one test per numbered criterion.

Each test carries ``@pytest.mark.criterion(n, title)``; the terminal summary
prints a pass/fail line per criterion (see conftest).
"""

import itertools
import math
import os
import random
import time
from collections import Counter
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from scipy.stats import chisquare

from conftest import cycle_graph, grid_graph
from setcent import bounds
from setcent.datasets import default_manifest, fetch, load_bundled, load_graph, parse_manifest
from setcent.engine import RunConfig, draw_sample, evaluate_bounds, run
from setcent.graph import Graph
from setcent.greedy import greedy_cover
from setcent.oracle import brute_force_optimum, exact_supremum_deviation
from setcent.rademacher import (RademacherState, all_sign_vectors, era_slack, exact_era, exact_expected_amcera,
                                topk_positive_sums)
from setcent.sampler import Sample, draw_hyperedges, enumerate_distribution, exact_set_centrality
from setcent.streams import derive_seed, rademacher_signs

# rational upper bound on e, good to 1e-9
E_UPPER = Fraction(2718281829, 10**9)


def nx_graph(G) -> Graph:
    return Graph.from_edges(list(G.edges()), n=G.number_of_nodes())


def random_sample(rng: random.Random, n: int, m: int, max_len: int | None = None) -> Sample:
    max_len = max_len or n
    edges = []
    for _ in range(m):
        size = rng.randint(0, min(max_len, n))
        edges.append(tuple(sorted(rng.sample(range(n), size))))
    return Sample.from_edges(edges, n)


class Stopwatch:
    def __init__(self, limit: float):
        self.limit = limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


# --------------------------------------------------------------------------- 1
@pytest.mark.criterion(1, "AMCERA equals exhaustive supremum (integer)")
def test_amcera_matches_exhaustive_supremum():
    rng = random.Random(101)
    with Stopwatch(10):
        for _ in range(500):
            n, m = rng.randint(1, 12), rng.randint(1, 10)
            t, k = rng.randint(1, 3), rng.randint(1, 3)
            sample = random_sample(rng, n, m)
            seed = rng.getrandbits(32)
            state = RademacherState(t, seed=seed).extend(sample.edges, 0)
            signs = rademacher_signs(seed, range(m), t).astype(int).tolist()
            expected = 0
            for j in range(t):
                per_node = [sum(signs[j][s] for s in range(m) if u in sample.edge(s)) for u in range(n)]
                expected += max(sum(per_node[u] for u in S)
                                for size in range(0, k + 1)
                                for S in itertools.combinations(range(n), size))
            assert state.amcera_numerator(k) == expected
            assert state.amcera(k) == expected / (t * m)


# --------------------------------------------------------------------------- 2
@pytest.mark.criterion(2, "ERA(F_k) <= E[AMCERA] <= k ERA(F_1) <= k ERA(F_k)")
def test_expected_amcera_sandwich():
    rng = random.Random(202)
    tol = Fraction(1, 10**12)
    with Stopwatch(60):
        for _ in range(100):
            n, m, k = rng.randint(2, 10), rng.randint(1, 12), rng.randint(1, 4)
            sample = random_sample(rng, n, m)
            era_k = exact_era(sample, k)
            era_1 = exact_era(sample, 1)
            mean = exact_expected_amcera(sample, k)
            assert era_k <= mean + tol
            assert mean <= k * era_1 + tol
            assert k * era_1 <= k * era_k + tol


# --------------------------------------------------------------------------- 3
@pytest.mark.criterion(3, "ERA <= AMCERA + slack fails on at most a delta share of signs")
def test_era_bound_coverage_over_all_signs():
    rng = random.Random(303)
    worst = {0.5: 0.0, 0.25: 0.0, 0.1: 0.0}
    with Stopwatch(60):
        for _ in range(50):
            n, m, k = rng.randint(2, 10), rng.randint(2, 12), rng.randint(1, 3)
            sample = random_sample(rng, n, m)
            era = float(exact_era(sample, k))
            signs = all_sign_vectors(m)
            # one trial per sign vector: row j of the table is the sign vector j
            state = RademacherState(signs.shape[0]).extend(sample.edges, 0, signs=signs)
            per_sigma = topk_positive_sums(state.signed_sums, k) / m if state.nodes.size else np.zeros(len(signs))
            w = state.wimpy_variance(k)
            for delta in worst:
                bad = np.mean(era > per_sigma + era_slack(w, 1, m, delta) + 1e-12)
                worst[delta] = max(worst[delta], float(bad))
                assert bad <= delta, (delta, bad)
    print("worst failure share per delta:", worst)


# --------------------------------------------------------------------------- 4
@pytest.fixture(scope="module")
def ws20():
    return nx_graph(nx.connected_watts_strogatz_graph(20, 4, 0.3, seed=1))


@pytest.mark.criterion(4, "nu and eta cover the optimum and the deviation")
@pytest.mark.slow
def test_nu_and_eta_coverage(ws20):
    k, delta, m, runs = 3, 0.1, 2000, 200
    opt = float(brute_force_optimum(ws20, k).value)
    nu_miss = eta_miss = 0
    with Stopwatch(300):
        for seed in range(runs):
            sample, state = draw_sample(ws20, m, 100, seed=seed)
            report, _ = evaluate_bounds(sample, state, ws20.n, k, delta)
            sd = exact_supremum_deviation(ws20, sample, k)
            nu_miss += opt > report.nu
            eta_miss += sd > report.eta
    print(f"nu misses {nu_miss}/{runs}, eta misses {eta_miss}/{runs}")
    assert nu_miss / runs <= delta
    assert eta_miss / runs <= delta


# --------------------------------------------------------------------------- 5
@pytest.mark.criterion(5, "end-to-end approximation guarantee")
@pytest.mark.slow
def test_end_to_end_guarantee(ws20):
    graphs = {
        "grid4x4": grid_graph(4, 4),
        "ws20": ws20,
        "ba25": nx_graph(nx.barabasi_albert_graph(25, 2, seed=1)),
        "tree20": nx_graph(nx.random_labeled_tree(20, seed=3)),
    }
    eps, delta, runs = 0.2, 0.1, 200
    cases = [(name, k) for name in graphs for k in (2, 3, 5)]
    optimum = {(name, k): brute_force_optimum(graphs[name], k).value for name, k in cases}
    ratio = 1 - 1 / E_UPPER - Fraction(1, 5)   # slightly above 1 - 1/e - eps
    failures = 0
    with Stopwatch(600):
        for r in range(runs):
            name, k = cases[r % len(cases)]
            g = graphs[name]
            res = run(g, RunConfig(k=k, eps=eps, delta=delta, seed=r))
            assert res.certified
            value = exact_set_centrality(g, res.nodes, exact=True)
            failures += value < ratio * optimum[(name, k)]
    print(f"approximation failures {failures}/{runs}")
    assert failures / runs <= delta


# --------------------------------------------------------------------------- 6
@pytest.mark.criterion(6, "greedy reaches (1-1/e) of the optimum")
def test_greedy_ratio_exact():
    rng = random.Random(606)
    # 1 - 1/E_UPPER exceeds 1 - 1/e, so passing with it is the stronger claim
    factor = 1 - 1 / E_UPPER
    with Stopwatch(10):
        for _ in range(500):
            n, m, k = rng.randint(1, 9), rng.randint(1, 25), rng.randint(1, 4)
            sample = random_sample(rng, n, m, max_len=4)
            res = greedy_cover(k, sample)
            masks = [sum(1 << s for s in range(m) if u in sample.edge(s)) for u in range(n)]
            best = 0
            for size in range(1, min(k, n) + 1):
                for S in itertools.combinations(range(n), size):
                    acc = 0
                    for u in S:
                        acc |= masks[u]
                    best = max(best, acc.bit_count())
            assert res.covered >= factor * best


# --------------------------------------------------------------------------- 7
def _diamond_chain():
    # three diamonds in series: 8 shortest paths between the ends
    return Graph.from_edges([(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 6), (5, 6),
                             (6, 7), (6, 8), (7, 9), (8, 9)])


@pytest.mark.criterion(7, "sampler matches the exact hyper-edge distribution")
@pytest.mark.parametrize("name, make", [
    ("grid4x4", lambda: grid_graph(4, 4)),
    ("cycle8", lambda: cycle_graph(8)),
    ("diamonds", _diamond_chain),
])
def test_sampler_chi_square(name, make):
    g = make()
    draws = 100_000
    with Stopwatch(10):
        dist = dict(enumerate_distribution(g))
        counts = Counter(draw_hyperedges(g, seed=7, start=0, count=draws))
    assert set(counts) <= set(dist)
    keys = sorted(dist)
    observed = np.array([counts.get(h, 0) for h in keys], dtype=float)
    expected = np.array([float(dist[h]) * draws for h in keys])
    expected *= observed.sum() / expected.sum()
    stat, p = chisquare(observed, expected)
    assert p > 1e-3, (name, stat, p)


# --------------------------------------------------------------------------- 8, 9
M_BUNDLED = 50_000
BUNDLED_SEED = 0


@pytest.fixture(scope="module")
def bundled_sample():
    g = load_bundled("smallworld")
    t0 = time.perf_counter()
    sample, state = draw_sample(g, M_BUNDLED, 100, seed=BUNDLED_SEED)
    return g, sample, state, time.perf_counter() - t0


@pytest.mark.criterion(8, "union bound is looser than the data-dependent bound (bundled graph)")
def test_union_bound_ratio_bundled(bundled_sample):
    g, sample, state, draw_seconds = bundled_sample
    t0 = time.perf_counter()
    ratios = {}
    for k in (10, 100):
        report, _ = evaluate_bounds(sample, state, g.n, k, 0.05)
        ratios[k] = report.eta_ub / report.eta
    total = draw_seconds + time.perf_counter() - t0
    print(f"union/data-dependent ratio: k=10 {ratios[10]:.3f}, k=100 {ratios[100]:.3f}")
    assert total < 120
    assert ratios[10] > 1
    assert ratios[100] > ratios[10]


def _cached_fetched_graphs():
    names = os.environ.get("SETCENT_FETCHED_GRAPHS", "")
    return [n for n in names.split(",") if n]


@pytest.mark.criterion(8, "union bound is looser than the data-dependent bound (fetched graph)")
@pytest.mark.network
@pytest.mark.parametrize("name", _cached_fetched_graphs() or ["wiki-Vote"])
def test_union_bound_ratio_fetched(name):
    if os.environ.get("SETCENT_NETWORK_TESTS") != "1":
        pytest.skip("opt-in: set SETCENT_NETWORK_TESTS=1 (optionally SETCENT_FETCHED_GRAPHS=a,b)")
    entries = {e.name: e for e in parse_manifest(default_manifest())}
    entry = entries[name]
    fetch([entry])
    g = load_graph(name, directed=entry.directed)
    sample, state = draw_sample(g, M_BUNDLED, 100, seed=0)
    report, _ = evaluate_bounds(sample, state, g.n, 10, 0.05)
    assert report.eta_ub / report.eta >= 1.25


@pytest.mark.criterion(9, "deviation bound saturates in the number of trials")
def test_trial_count_saturation(bundled_sample):
    g, sample, state100, draw_seconds = bundled_sample
    k = 100
    t0 = time.perf_counter()
    state500 = RademacherState(500, seed=derive_seed(BUNDLED_SEED, 2)).extend(sample.edges, 0)
    # the first 100 trials reuse the same signs
    assert np.array_equal(state500.signed_sums[:100], state100.signed_sums)
    eta100 = evaluate_bounds(sample, state100, g.n, k, 0.05)[0].eta
    eta500 = evaluate_bounds(sample, state500, g.n, k, 0.05)[0].eta
    rel = abs(eta100 - eta500) / eta500
    print(f"eta(t=100)={eta100:.6f} eta(t=500)={eta500:.6f} relative gap {rel:.4f}")
    assert draw_seconds + time.perf_counter() - t0 < 180
    assert rel <= 0.05


# --------------------------------------------------------------------------- 10
@pytest.mark.criterion(10, "incremental absorption is bit-identical to one shot")
def test_incremental_equals_batch():
    rng = random.Random(1010)
    with Stopwatch(10):
        for _ in range(200):
            n, m, t = rng.randint(1, 30), rng.randint(1, 120), rng.randint(1, 20)
            edges = random_sample(rng, n, m, max_len=6).edges
            seed = rng.getrandbits(40)
            whole = RademacherState(t, seed=seed).extend(edges, 0)
            cuts = sorted(rng.sample(range(1, m + 1), rng.randint(0, min(m, 8))))
            bounds_ = [0, *cuts, m] if not cuts or cuts[-1] != m else [0, *cuts]
            inc = RademacherState(t, seed=seed)
            parts = []
            for a, b in zip(bounds_, bounds_[1:]):
                inc.extend(edges[a:b], a)
                parts.append(RademacherState(t, seed=seed, offset=a).extend(edges[a:b], a))
            merged = parts[0]
            for p in parts[1:]:
                merged = merged.merge(p)
            for st in (inc, merged):
                assert st.m == whole.m and st.b_H == whole.b_H
                assert st.table() == whole.table()
                for k in (1, 3):
                    assert st.amcera_numerator(k) == whole.amcera_numerator(k)


# --------------------------------------------------------------------------- 11
@pytest.mark.criterion(11, "VC dimension and sample size arithmetic")
def test_vc_arithmetic():
    with Stopwatch(1):
        assert bounds.vc_dim_1_bound(7) == 3
        assert bounds.vc_dim_1_bound(11) == 4
        assert bounds.vc_dim_k_bound(3, 10) == pytest.approx(294.41, abs=0.01)


@pytest.mark.criterion(11, "VC dimension and sample size arithmetic")
@pytest.mark.xfail(strict=True, reason="the closed form is 82826.077; its ceiling is 82827, "
                                       "and rounding down would under-sample")
def test_vc_sample_size_example():
    assert bounds.sample_size_vc(294.41, 0.05, 0.1, 0.5, 0.5) == 82826


# --------------------------------------------------------------------------- 12
def _absorb_seconds(edges, t, repeats=5):
    best = math.inf
    for _ in range(repeats):
        st = RademacherState(t, seed=3)
        t0 = time.perf_counter()
        for a in range(0, len(edges), 1000):
            st.extend(edges[a:a + 1000], a)
        best = min(best, time.perf_counter() - t0)
    return best


@pytest.mark.criterion(12, "sign-table upkeep is linear in the number of samples")
def test_maintenance_cost_linear_in_m():
    rng = np.random.default_rng(12)
    b_h, t, nodes, m = 6, 100, 2000, 40_000
    edges = [tuple(sorted(rng.choice(nodes, size=b_h, replace=False).tolist())) for _ in range(2 * m)]
    with Stopwatch(120):
        _absorb_seconds(edges[:2000], t, repeats=1)   # warm-up
        small = _absorb_seconds(edges[:m], t)
        large = _absorb_seconds(edges, t)
    print(f"absorb m={m}: {small:.3f}s, m={2 * m}: {large:.3f}s, ratio {large / small:.2f}")
    assert large / small <= 2 * 1.25
