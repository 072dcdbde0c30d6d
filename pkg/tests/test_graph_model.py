"""Tests for open graph states, flows, and their validators."""

import json
import random

import pytest

from causalflow import (
    Flow,
    GraphFormatError,
    OpenGraphState,
    find_flow,
    flow_from_json_dict,
    graph_from_json,
    neighbors,
    validate_flow,
    validate_graph,
)
from conftest import hadamard_geometry, no_flow_geometry, path_state, random_open_graph


class TestValidateGraph:
    def test_minimal_legal_graph(self):
        g = OpenGraphState([1, 2], [(1, 2)], [1], [2])
        assert validate_graph(g).ok

    def test_self_edge(self):
        g = OpenGraphState([1, 2], [(1, 1)], [1], [2])
        result = validate_graph(g)
        assert not result.ok
        assert any("self-edge" in v for v in result.violations)

    def test_input_not_a_vertex(self):
        g = OpenGraphState([1, 2], [(1, 2)], [9], [2])
        result = validate_graph(g)
        assert any("input 9" in v for v in result.violations)

    def test_output_not_a_vertex(self):
        g = OpenGraphState([1, 2], [(1, 2)], [1], [7])
        assert any("output 7" in v for v in validate_graph(g).violations)

    def test_duplicate_edge_either_orientation(self):
        g = OpenGraphState([1, 2], [(1, 2), (2, 1)], [1], [2])
        assert any("duplicate" in v for v in validate_graph(g).violations)

    def test_edge_endpoint_undeclared(self):
        g = OpenGraphState([1, 2], [(1, 3)], [1], [2])
        assert any("endpoint 3" in v for v in validate_graph(g).violations)

    def test_overlapping_inputs_outputs_legal(self):
        g = OpenGraphState([1, 2], [(1, 2)], [1, 2], [1, 2])
        assert validate_graph(g).ok
        assert g.measured == ()
        assert g.prepared == ()


class TestNeighbors:
    def test_path_center(self):
        g = path_state(3, [1], [3])
        assert neighbors(g, 2) == {1, 3}

    def test_isolated_vertex(self):
        g = OpenGraphState([1, 2], [], [1], [2])
        assert neighbors(g, 1) == frozenset()

    def test_star_center(self):
        leaves = [2, 3, 4, 5]
        g = OpenGraphState([1] + leaves, [(1, w) for w in leaves], [1], leaves)
        assert neighbors(g, 1) == set(leaves)

    def test_unknown_vertex_raises(self):
        with pytest.raises(KeyError):
            neighbors(path_state(2, [1], [2]), 99)

    def test_symmetry(self):
        rng = random.Random(5)
        for _ in range(25):
            g = random_open_graph(rng)
            for i in g.vertices:
                for j in neighbors(g, i):
                    assert i in neighbors(g, j)


class TestValidateFlow:
    def test_hadamard_geometry_flow(self):
        g = hadamard_geometry()
        fl = Flow({1: 2}, {1: 0, 2: 1})
        assert validate_flow(g, fl).ok

    def test_fixed_point_rejected_without_loops(self):
        g = OpenGraphState([1, 2], [(1, 2)], [1], [2])
        fl = Flow({1: 1}, {1: 0, 2: 1}, loops=[1])
        result = validate_flow(g, fl, allow_loops=False)
        assert any("loops not allowed" in v for v in result.violations)

    def test_forced_collision_reports_injectivity(self):
        g = no_flow_geometry()
        fl = Flow({1: 3, 2: 3}, {1: 0, 2: 0, 3: 1, 4: 1})
        result = validate_flow(g, fl)
        assert any("injective" in v for v in result.violations)
        # F2 also bites: vertex 2 neighbors f(1)=3 but is not later than 1.
        assert any(v.startswith("F2") for v in result.violations)

    def test_edge_condition(self):
        g = path_state(3, [1], [3])
        fl = Flow({1: 3, 2: 3}, {1: 0, 2: 1, 3: 2})
        assert any(v.startswith("F0") for v in validate_flow(g, fl).violations)

    def test_order_condition(self):
        g = hadamard_geometry()
        fl = Flow({1: 2}, {1: 1, 2: 0})
        assert any(v.startswith("F1") for v in validate_flow(g, fl).violations)

    def test_domain_must_cover_measured(self):
        g = path_state(3, [1], [3])
        fl = Flow({1: 2}, {1: 0, 2: 1, 3: 2})
        assert any("undefined" in v for v in validate_flow(g, fl).violations)

    def test_monotone_under_level_refinement(self):
        rng = random.Random(11)
        refined = 0
        while refined < 20:
            g = random_open_graph(rng)
            result = find_flow(g)
            if not result.found:
                continue
            fl = result.flow
            stretched = Flow(fl.f, {v: 3 * l for v, l in fl.levels.items()}, fl.loops)
            assert validate_flow(g, stretched).ok
            jittered = Flow(
                fl.f,
                {v: 3 * l + rng.randint(0, 2) for v, l in fl.levels.items()},
                fl.loops,
            )
            assert validate_flow(g, jittered).ok
            refined += 1

    def test_flow_orbits_inject_inputs_into_outputs(self):
        rng = random.Random(23)
        checked = 0
        while checked < 25:
            g = random_open_graph(rng)
            result = find_flow(g)
            if not result.found:
                continue
            fl = result.flow
            oset = set(g.outputs)
            ends = []
            for start in g.inputs:
                q = start
                while q not in oset:
                    q = fl.f[q]
                ends.append(q)
            assert len(set(ends)) == len(g.inputs)
            checked += 1


class TestJson:
    def test_graph_round_trip(self):
        g = no_flow_geometry()
        assert graph_from_json(g.to_json()) == g

    def test_duplicate_edges_rejected(self):
        doc = {"vertices": [1, 2], "edges": [[1, 2], [2, 1]], "inputs": [], "outputs": []}
        with pytest.raises(GraphFormatError):
            graph_from_json(json.dumps(doc))

    def test_malformed_document(self):
        with pytest.raises(GraphFormatError):
            graph_from_json('{"vertices": [1]}')
        with pytest.raises(GraphFormatError):
            graph_from_json("not json")

    def test_flow_round_trip(self):
        fl = Flow({1: 2, 3: 3}, {1: 0, 2: 1, 3: 0}, loops=[3])
        assert flow_from_json_dict(fl.to_json_dict()) == fl
        assert fl.depth == 2
