import random

import pytest

from netcontrol.flow import (
    Flow,
    SufficiencySolver,
    build_sufficiency_flow_network,
    min_cost_flow,
    validate_flow,
)
from netcontrol.graph import DirectedGraph, generate_er, parse_edge_list
from oracles import best_cover_size, random_digraph, residual_has_negative_cycle


def graph_of(n, edge_set):
    return DirectedGraph(n, tuple((s, d, 1.0) for s, d in edge_set))


class TestBuild:
    def test_single_node(self):
        fn = build_sufficiency_flow_network(DirectedGraph(1, ()), 1)
        assert fn.num_vertices == 4
        assert len(fn.arcs) == 3
        assert sum(1 for a in fn.arcs if a[3] == -1) == 1

    def test_five_node_three_edge_counts(self):
        g = graph_of(5, {(0, 1), (1, 2), (3, 4)})
        fn = build_sufficiency_flow_network(g, 2)
        assert fn.num_vertices == 12
        assert len(fn.arcs) == 18  # |E| + 3n

    def test_inner_arcs_cost_minus_one_rest_zero(self):
        g = graph_of(3, {(0, 1)})
        fn = build_sufficiency_flow_network(g, 1)
        for tail, head, cap, cost in fn.arcs:
            assert cap == 1
            expected = -1 if (head == tail + fn.n and tail < fn.n) else 0
            assert cost == expected

    def test_supplies(self):
        fn = build_sufficiency_flow_network(graph_of(3, set()), 2)
        assert fn.supply(fn.source) == 2
        assert fn.supply(fn.sink) == -2
        assert sum(fn.supply(v) for v in range(fn.num_vertices)) == 0

    @pytest.mark.parametrize("units", [0, 4])
    def test_units_out_of_range(self, units):
        with pytest.raises(ValueError):
            build_sufficiency_flow_network(graph_of(3, set()), units)

    def test_dimacs_header(self):
        fn = build_sufficiency_flow_network(graph_of(2, {(0, 1)}), 1)
        dump = fn.to_dimacs()
        assert dump.startswith("p min 6 7\n")
        assert "a " in dump


class TestMinCostFlow:
    def test_chain_plus_isolated(self):
        g = graph_of(5, {(0, 1), (1, 2)})
        f = min_cost_flow(build_sufficiency_flow_network(g, 1))
        assert f.cost == -3

    def test_no_edges_two_units(self):
        f = min_cost_flow(build_sufficiency_flow_network(DirectedGraph(3, ()), 2))
        assert f.cost == -2

    def test_free_cycle(self):
        g = graph_of(4, {(0, 1), (1, 2), (2, 0)})
        f = min_cost_flow(build_sufficiency_flow_network(g, 1))
        assert f.cost == -4

    def test_determinism(self):
        g = generate_er(30, 3, seed=5)
        f1 = min_cost_flow(build_sufficiency_flow_network(g, 4))
        f2 = min_cost_flow(build_sufficiency_flow_network(g, 4))
        assert f1 == f2


class TestValidateFlow:
    def test_solver_output_valid(self):
        g = generate_er(20, 2, seed=3)
        fn = build_sufficiency_flow_network(g, 3)
        assert validate_flow(fn, min_cost_flow(fn))

    def test_zero_flow_invalid(self):
        fn = build_sufficiency_flow_network(graph_of(3, set()), 1)
        zero = Flow(values=(0,) * len(fn.arcs), cost=0)
        assert not validate_flow(fn, zero)

    def test_overfull_arc_invalid(self):
        fn = build_sufficiency_flow_network(graph_of(3, set()), 1)
        f = min_cost_flow(fn)
        bumped = list(f.values)
        bumped[0] = 2
        assert not validate_flow(fn, Flow(values=tuple(bumped), cost=f.cost))

    def test_wrong_cost_invalid(self):
        fn = build_sufficiency_flow_network(graph_of(3, set()), 1)
        f = min_cost_flow(fn)
        assert not validate_flow(fn, Flow(values=f.values, cost=f.cost - 1))


class TestOptimality:
    @pytest.mark.parametrize("seed", range(40))
    def test_matches_exhaustive_cover(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 6)
        edge_set = random_digraph(n, rng.uniform(0.15, 0.5), rng)
        g = graph_of(n, edge_set)
        solver = SufficiencySolver(g)
        for m in range(1, n + 1):
            assert solver.advance_to(m) == best_cover_size(n, edge_set, m)

    @pytest.mark.parametrize("seed", range(8))
    def test_monotone_and_bounded(self, seed):
        g = generate_er(25, random.Random(seed).uniform(0.5, 4), seed=seed)
        solver = SufficiencySolver(g)
        prev = 0
        for m in range(1, g.n + 1):
            cov = solver.advance_to(m)
            assert prev <= cov <= g.n
            prev = cov
        assert prev == g.n

    @pytest.mark.parametrize("seed", range(10))
    def test_no_residual_negative_cycle(self, seed):
        rng = random.Random(100 + seed)
        n = rng.randint(2, 12)
        g = graph_of(n, random_digraph(n, 0.3, rng))
        m = rng.randint(1, n)
        fn = build_sufficiency_flow_network(g, m)
        f = min_cost_flow(fn)
        assert not residual_has_negative_cycle(fn, f)

    def test_advance_until_coverage_minimal(self):
        g = generate_er(60, 2, seed=11)
        fast = SufficiencySolver(g)
        mstar = fast.advance_until_coverage(g.n)
        slow = SufficiencySolver(g)
        covs = [slow.advance_to(m) for m in range(1, g.n + 1)]
        assert covs[mstar - 1] == g.n
        assert mstar == 1 or covs[mstar - 2] < g.n

    def test_unit_costs_nonincreasing_gains(self):
        g = generate_er(50, 3, seed=2)
        solver = SufficiencySolver(g)
        solver.advance_to(g.n)
        gains = [-c for c in solver.unit_costs]
        assert gains == sorted(gains, reverse=True)
