import json

import numpy as np
import pytest

from netcontrol.edcp import (
    CoverInfeasibleError,
    Stem,
    assign_drivers,
    edcp,
    even_division,
    merge_cycles,
    naive_placement,
    reduce_drivers,
    string_cost,
    trim_to_r,
)
from netcontrol.graph import generate_er, parse_edge_list
from netcontrol.lti import chain_control_cost, output_controllable
from netcontrol.pathcover import PathCover, max_controllable_subset

FIG8 = "1 2\n2 3\n3 4\n4 5\n6 7\n7 8\n8 9\n9 10\n11 12\n12 13\n13 11\n1 3\n14\n"
# external id v <-> internal v-1 for the worked example
PAPER_SEGMENTS = {(0, 1, 2), (3, 4), (5, 6, 7, 8), (10, 11, 12)}


def fig8_graph():
    return parse_edge_list(FIG8)


def fig8_cover():
    cover, _ = max_controllable_subset(fig8_graph(), 3)
    return cover


class TestMergeCycles:
    def test_no_cycles_untouched(self):
        cover = PathCover(paths=((0, 1), (2,)), cycles=())
        stems = merge_cycles(cover)
        assert [s.nodes for s in stems] == [(0, 1), (2,)]
        assert all(not s.junctions for s in stems)

    def test_worked_example_merge(self):
        stems = merge_cycles(fig8_cover())
        short = [s for s in stems if 13 in s.nodes][0]
        assert short.nodes == (13, 10, 11, 12)
        assert short.junctions == (1,)

    def test_two_cycles_longest_first(self):
        cover = PathCover(paths=((9,),), cycles=((0, 1), (2, 3, 4)))
        stems = merge_cycles(cover)
        assert stems[0].nodes == (9, 2, 3, 4, 0, 1)
        assert stems[0].junctions == (1, 4)

    def test_cycle_rotation_to_lowest(self):
        cover = PathCover(paths=((9,),), cycles=((5, 3, 4),))
        stems = merge_cycles(cover)
        assert stems[0].nodes == (9, 3, 4, 5)

    def test_cycles_without_stems_get_synthetic_host(self):
        cover = PathCover(paths=(), cycles=((0, 1, 2),))
        stems = merge_cycles(cover)
        assert stems[0].synthetic
        assert stems[0].nodes == (0, 1, 2)


class TestEvenDivision:
    def test_twelve_by_four(self):
        assert even_division(12, 4) == [3, 3, 3, 3]

    def test_ten_by_three(self):
        assert even_division(10, 3) == [4, 3, 3]

    def test_all_singletons(self):
        assert even_division(5, 5) == [1, 1, 1, 1, 1]

    def test_too_many_parts(self):
        with pytest.raises(ValueError):
            even_division(3, 4)


class TestStringCost:
    def test_unit(self):
        assert string_cost(1, 1, 2.0) == 0.5

    def test_five_with_two_drivers(self):
        want = chain_control_cost(3, 2.0) + chain_control_cost(2, 2.0)
        assert string_cost(5, 2, 2.0) == pytest.approx(want)

    def test_all_singletons_scalar_cost(self):
        assert string_cost(7, 7, 2.0) == pytest.approx(7 * 0.5)
        assert string_cost(3, 3, 4.0) == pytest.approx(3 * 0.25)

    def test_more_drivers_than_nodes(self):
        with pytest.raises(ValueError):
            string_cost(2, 3, 2.0)

    def test_nonincreasing_in_driver_count(self):
        for q in range(1, 11):
            costs = [string_cost(q, d, 2.0) for d in range(1, q + 1)]
            assert costs == sorted(costs, reverse=True)


class TestAssign:
    def test_worked_example_driver_set(self):
        stems = merge_cycles(fig8_cover())
        assign_drivers(stems, [3, 3, 3, 3])
        drivers = sorted(seg[0] for s in stems for seg in s.segments)
        assert drivers == [0, 3, 5, 8, 10]  # external {1, 4, 6, 9, 11}
        nc = sum(len(seg) for s in stems for seg in s.segments)
        assert nc == 13
        # the pre-junction node 14 (internal 13) is skipped, not controlled
        assert all(13 not in seg for s in stems for seg in s.segments)

    def test_single_stem_even_plan(self):
        stems = [Stem(nodes=(0, 1, 2, 3, 4, 5))]
        assign_drivers(stems, [3, 3])
        assert stems[0].segments == [[0, 1, 2], [3, 4, 5]]

    def test_tie_prefers_lower_stem(self):
        stems = [Stem(nodes=(0, 1)), Stem(nodes=(2, 3))]
        assign_drivers(stems, [2, 2])
        assert stems[0].segments == [[0, 1]]
        assert stems[1].segments == [[2, 3]]

    def test_junction_cut_when_needed_for_coverage(self):
        # run of 2 before a junction with no slack: must be kept, not skipped
        stems = [Stem(nodes=(0, 1, 2, 3), junctions=(2,))]
        assign_drivers(stems, [4])
        nodes = {v for seg in stems[0].segments for v in seg}
        assert nodes == {0, 1, 2, 3}
        assert len(stems[0].segments) == 2

    def test_exhaustion_error(self):
        stems = [Stem(nodes=(0, 1))]
        with pytest.raises(CoverInfeasibleError):
            assign_drivers(stems, [3], r_size=3)


class TestReduce:
    def test_worked_example_tie_releases_later_stem(self):
        stems = merge_cycles(fig8_cover())
        assign_drivers(stems, [3, 3, 3, 3])
        reduce_drivers(stems, 4, 2.0)
        assert sum(s.driver_count for s in stems) == 4
        red = stems[1]
        assert red.segments == [[5, 6, 7, 8, 9]]  # re-spread as one block

    def test_noop_when_at_target(self):
        stems = [Stem(nodes=(0, 1, 2), segments=[[0, 1, 2]])]
        reduce_drivers(stems, 1, 2.0)
        assert stems[0].segments == [[0, 1, 2]]

    def test_respread_evenly(self):
        stems = [Stem(nodes=tuple(range(6)), segments=[[0, 1], [2, 3], [4, 5]])]
        reduce_drivers(stems, 2, 2.0)
        assert stems[0].segments == [[0, 1, 2], [3, 4, 5]]

    def test_junction_blocks_removal(self):
        stems = [Stem(nodes=(0, 1, 2, 3), junctions=(2,), segments=[[0, 1], [2, 3]])]
        with pytest.raises(CoverInfeasibleError):
            reduce_drivers(stems, 1, 2.0)


class TestTrim:
    def test_worked_example_trim(self):
        stems = merge_cycles(fig8_cover())
        assign_drivers(stems, [3, 3, 3, 3])
        reduce_drivers(stems, 4, 2.0)
        trim_to_r(stems, 12)
        segs = {tuple(seg) for s in stems for seg in s.segments}
        assert segs == PAPER_SEGMENTS

    def test_noop(self):
        stems = [Stem(nodes=(0, 1), segments=[[0, 1]])]
        trim_to_r(stems, 2)
        assert stems[0].segments == [[0, 1]]

    def test_tie_prefers_lower_driver(self):
        stems = [Stem(nodes=(5, 6), segments=[[5, 6]]), Stem(nodes=(0, 1), segments=[[0, 1]])]
        trim_to_r(stems, 3)
        assert stems[1].segments == [[0]]
        assert stems[0].segments == [[5, 6]]


class TestEdcpEndToEnd:
    def test_worked_example_golden(self):
        res = edcp(fig8_graph(), 4, 12, 2.0)
        assert set(res.segments) == PAPER_SEGMENTS
        assert len(res.placement.drivers) == 4
        assert len(res.placement.controlled) == 12
        assert res.fallback is None

    def test_chain_six(self):
        res = edcp(parse_edge_list("0 1\n1 2\n2 3\n3 4\n4 5"), 2, 6, 2.0)
        assert res.segments == ((0, 1, 2), (3, 4, 5))
        assert res.placement.drivers == (0, 3)

    def test_result_json_schema(self):
        g = fig8_graph()
        res = edcp(g, 4, 12, 2.0)
        payload = json.loads(res.to_json(g))
        assert set(payload) == {"drivers", "controlled", "segments", "E_estimate", "E_exact"}
        assert sorted(payload["drivers"]) == [1, 4, 6, 11]
        assert len(payload["controlled"]) == 12
        assert payload["E_estimate"] == pytest.approx(res.e_estimate)

    def test_estimate_is_sum_of_segment_costs(self):
        res = edcp(fig8_graph(), 4, 12, 2.0)
        want = sum(chain_control_cost(len(s), 2.0) for s in res.segments)
        assert res.e_estimate == pytest.approx(want)

    def test_bad_requests(self):
        g = fig8_graph()
        with pytest.raises(ValueError):
            edcp(g, 0, 5)
        with pytest.raises(ValueError):
            edcp(g, 3, 20)
        with pytest.raises(ValueError):
            edcp(g, 5, 4)

    def test_infeasible_cover(self):
        g = parse_edge_list("0 1\n0 2\n2 3\n3 2")
        with pytest.raises(CoverInfeasibleError):
            edcp(g, 1, 4, 2.0)

    def test_exact_path_fallback(self):
        g = parse_edge_list("0 1\n0 2\n2 3\n3 2")
        res = edcp(g, 1, 3, 2.0)
        assert res.segments == ((0, 2, 3),)
        assert res.fallback == "exact-paths"

    def test_determinism(self):
        g = generate_er(40, 2.5, seed=8)
        _, rmax = max_controllable_subset(g, 5)
        # free-rider cycles in the optimum may not be reachable with 5 wires,
        # so walk down to a target the path-only structure can host
        for r in range(min(30, rmax), 4, -1):
            try:
                r1 = edcp(g, 5, r, 2.0)
                break
            except CoverInfeasibleError:
                continue
        r2 = edcp(g, 5, r, 2.0)
        assert r1.segments == r2.segments
        assert r1.e_estimate == r2.e_estimate
        assert sum(len(s) for s in r1.segments) == r

    @pytest.mark.parametrize("seed", range(6))
    def test_placement_contract(self, seed):
        g = generate_er(25, 2.5, seed=seed)
        m, r = 4, 18
        try:
            res = edcp(g, m, r, 2.0)
        except CoverInfeasibleError:
            pytest.skip("cover too small on this seed")
        assert len(res.placement.drivers) == m
        assert len(res.placement.controlled) == r
        nodes = [v for seg in res.segments for v in seg]
        assert len(nodes) == len(set(nodes)) == r
        edge_set = g.edge_set()
        for seg in res.segments:
            for u, v in zip(seg, seg[1:]):
                assert (u, v) in edge_set
        a = g.randomized_adjacency(seed)
        assert output_controllable(a, res.placement.b_matrix(g.n), res.placement.c_matrix(g.n))

    @pytest.mark.parametrize("seed", range(4))
    def test_beats_naive_baseline(self, seed):
        g = generate_er(30, 3.0, seed=seed)
        _, rmax = max_controllable_subset(g, 6)
        r = min(24, rmax)
        res = edcp(g, 6, r, 2.0)
        base = naive_placement(g, 6, r, 2.0)
        assert res.e_estimate <= base.e_estimate + 1e-9
        assert len(base.placement.drivers) == 6
        assert len(base.placement.controlled) == r
