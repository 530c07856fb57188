import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lsalloc.graph import Graph, gen_complete, gen_cycle, gen_empty, gen_hypercube, gen_path, gen_torus
from lsalloc.growth import (
    GrowthError,
    compute_r1,
    compute_r1_gamma,
    compute_r2,
    compute_r2_gamma,
    growth_report,
    per_vertex_rho,
    rho_from_profile,
)

from oracles import brute_gamma, growth_radius


def cycle_radius(n, kind):
    return growth_radius(lambda r: min(2 * r + 1, n), n, kind)


@pytest.mark.parametrize("exp", [4, 8, 12, 16, 20])
def test_cycle_radii_match_closed_form(exp):
    n = 1 << exp
    g = gen_cycle(n)
    assert compute_r1(g) == cycle_radius(n, 1)
    assert compute_r2(g) == cycle_radius(n, 2)


def test_cycle_frozen_values():
    # ln(2^20) = 13.86: r=2 gives 2*5*ln2 = 6.9, r=3 gives 3*7*ln3 = 23.1; r*(2r+1) >= 13.86 first at r=3
    g = gen_cycle(1 << 20)
    assert (compute_r1(g), compute_r2(g)) == (3, 3)
    assert (compute_r1(gen_cycle(16)), compute_r2(gen_cycle(16))) == (2, 1)


def test_complete_graph():
    # ln 1 = 0 forces r1 >= 2; r2 = 1 since |B^1| = n >= ln n
    for n in (2, 16, 100):
        assert compute_r1(gen_complete(n)) == 2
        assert compute_r2(gen_complete(n)) == 1


def test_torus_two_dim():
    g = gen_torus([64, 64])
    n = g.n

    def size(r):
        return 2 * r * r + 2 * r + 1 if r < 32 else n

    assert compute_r1(g) == growth_radius(size, n, 1)
    assert compute_r2(g) == growth_radius(size, n, 2)


def test_single_vertex_and_errors():
    assert compute_r1(gen_path(1)) == 1 and compute_r2(gen_path(1)) == 1
    # isolated vertices still qualify once r ln r (or r) reaches ln n
    assert (compute_r1(gen_empty(100)), compute_r2(gen_empty(100))) == (4, 5)
    with pytest.raises(ValueError):
        per_vertex_rho(gen_cycle(5), 3)


def test_r1_r2_order_counterexamples():
    # neither ordering holds on every graph
    k = gen_complete(100)
    assert compute_r1(k) > compute_r2(k)
    edges = [(u, v) for u in range(99) for v in range(u + 1, 99)]
    g = Graph.from_edges(100, edges)  # K_99 plus one isolated vertex
    assert (compute_r1(g), compute_r2(g)) == (4, 5)


graphs = st.one_of(
    st.integers(3, 60).map(gen_cycle),
    st.integers(2, 60).map(gen_path),
    st.lists(st.integers(2, 6), min_size=2, max_size=3).map(gen_torus),
    st.integers(1, 6).map(gen_hypercube),
    st.integers(2, 12).map(gen_complete),
)


@settings(max_examples=40, deadline=None)
@given(graphs)
def test_rho_matches_profile_reference(g):
    for kind in (1, 2):
        rho = per_vertex_rho(g, kind)
        for u in range(0, g.n, max(1, g.n // 7)):
            assert rho[u] == rho_from_profile(g, u, kind)


@settings(max_examples=40, deadline=None)
@given(graphs)
def test_r1_bounded_by_r2_when_r2_at_least_three(g):
    r2 = compute_r2(g)
    if r2 >= 3:
        assert compute_r1(g) <= r2


@settings(max_examples=25, deadline=None)
@given(graphs, st.sampled_from([0.05, 0.1, 0.25, 0.5]))
def test_gamma_variant_matches_brute_force(g, gamma):
    if math.ceil(g.n ** (0.5 + gamma)) > g.n:
        with pytest.raises(GrowthError):
            compute_r1_gamma(g, gamma)
        return
    assert compute_r1_gamma(g, gamma) == brute_gamma(g, gamma, 1)
    assert compute_r2_gamma(g, gamma) == brute_gamma(g, gamma, 2)
    assert compute_r1_gamma(g, gamma) <= compute_r1(g)
    assert compute_r2_gamma(g, gamma) <= compute_r2(g)


def test_gamma_frozen_cycle():
    g = gen_cycle(1 << 20)
    # every vertex has rho = 3, so any subset quota sees r = 2 failing
    assert compute_r1_gamma(g, 0.1) == 2
    assert compute_r2_gamma(g, 0.5) == 2
    with pytest.raises(ValueError):
        compute_r1_gamma(g, 0.0)
    with pytest.raises(ValueError):
        compute_r1_gamma(g, 0.6)


def test_report_json_and_warning(caplog):
    rep = growth_report(gen_cycle(1 << 12), (0.1, 0.25))
    d = rep.to_dict()
    assert d["r1"] == compute_r1(gen_cycle(1 << 12))
    assert set(d["r1_gamma"]) == {"0.1", "0.25"}
    assert isinstance(rep.per_vertex_rho1, np.ndarray)
    with caplog.at_level(logging.WARNING):
        growth_report(gen_complete(10))
    assert "exceeds" in caplog.text
