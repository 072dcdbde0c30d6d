"""Tests for pattern runnability, synthesis, adjoints, and the text format."""

import math
import random

import numpy as np
import pytest

from causalflow import (
    CorrectX,
    CorrectXPhase,
    CorrectZ,
    Entangle,
    Flow,
    Measure,
    OpenGraphState,
    Pattern,
    PatternError,
    PatternFormatError,
    Prepare,
    adjoint,
    check_runnable,
    find_biflow,
    find_flow,
    operator_notation,
    parse_pattern,
    print_pattern,
    relabel,
    synthesize,
    synthesize_stabilizer_form,
)
from conftest import hadamard_geometry, path_state, random_angles, random_open_graph

H_TEXT = "V: 1 2\nI: 1\nO: 2\nN 2 0.0\nE 1 2\nM 1 0.0\nX 2 [1]\n"


def hadamard_pattern() -> Pattern:
    return Pattern(
        [1, 2],
        [1],
        [2],
        [Prepare(2, 0.0), Entangle(1, 2), Measure(1, 0.0), CorrectX(2, {1})],
    )


class TestRunnability:
    def test_hadamard_pattern_ok(self):
        assert check_runnable(hadamard_pattern()).ok

    def test_anachronical_correction_violates_r0(self):
        p = Pattern(
            [1, 2],
            [1],
            [2],
            [Prepare(2), Entangle(1, 2), CorrectZ(2, {1}), Measure(1)],
        )
        result = check_runnable(p)
        assert any(v.startswith("R0") for v in result.violations)

    def test_measuring_output_violates_r2(self):
        p = Pattern(
            [1, 2],
            [1],
            [2],
            [Prepare(2), Entangle(1, 2), Measure(2), Measure(1)],
        )
        assert any(
            v.startswith("R2") and "output" in v
            for v in check_runnable(p).violations
        )

    def test_acting_on_unprepared_violates_r1(self):
        p = Pattern([1, 2], [1], [2], [Entangle(1, 2), Measure(1), Prepare(2)])
        assert any(
            v.startswith("R1") and "unprepared" in v
            for v in check_runnable(p).violations
        )

    def test_acting_on_measured_violates_r1(self):
        p = Pattern(
            [1, 2],
            [1],
            [2],
            [Prepare(2), Entangle(1, 2), Measure(1), CorrectX(1, {1})],
        )
        assert any(
            v.startswith("R1") and "measured" in v
            for v in check_runnable(p).violations
        )

    def test_missing_preparation_and_measurement(self):
        p = Pattern([1, 2, 3], [1], [3], [Prepare(2)])
        result = check_runnable(p)
        assert any("never measured" in v for v in result.violations)
        assert any("never prepared" in v for v in result.violations)

    def test_preparing_twice(self):
        p = Pattern([1, 2], [1], [1, 2], [Prepare(2), Prepare(2)])
        assert any("twice" in v for v in check_runnable(p).violations)

    def test_preparing_input(self):
        p = Pattern([1], [1], [1], [Prepare(1)])
        assert any(
            v.startswith("R2") and "input" in v
            for v in check_runnable(p).violations
        )


class TestSynthesize:
    def test_hadamard_geometry(self):
        g = hadamard_geometry()
        fl = find_flow(g).flow
        p = synthesize(g, fl, {1: 0.0})
        assert p == hadamard_pattern()
        assert operator_notation(p) == "X_2^{s_1} M_1^0 E_{1,2} N_2^0"

    def test_path_three_command_order(self):
        g = path_state(3, [1], [3])
        fl = find_flow(g).flow
        p = synthesize(g, fl, {1: 0.4, 2: 1.3})
        assert p.commands == (
            Prepare(2, 0.0),
            Prepare(3, 0.0),
            Entangle(1, 2),
            Entangle(2, 3),
            Measure(1, 0.4),
            CorrectX(2, {1}),
            CorrectZ(3, {1}),
            Measure(2, 1.3),
            CorrectX(3, {2}),
        )

    def test_no_measured_qubits_gives_entanglers_only(self):
        g = OpenGraphState([1, 2, 3], [(1, 2), (2, 3)], [1, 2, 3], [1, 2, 3])
        p = synthesize(g, find_flow(g).flow, {})
        assert p.commands == (Entangle(1, 2), Entangle(2, 3))

    def test_nonzero_prep_angle_uses_phase_correction(self):
        g = path_state(3, [1], [3])
        fl = find_flow(g).flow
        p = synthesize(g, fl, {1: 0.4, 2: 1.3}, {2: 0.9, 3: 0.0})
        assert CorrectXPhase(2, 0.9, {1}) in p.commands
        assert CorrectX(3, {2}) in p.commands

    def test_missing_angle_rejected(self):
        g = path_state(3, [1], [3])
        fl = find_flow(g).flow
        with pytest.raises(PatternError, match="angles missing"):
            synthesize(g, fl, {1: 0.4})
        with pytest.raises(PatternError, match="angles missing"):
            synthesize(g, fl, {1: 0.4, 2: 0.0}, {2: 0.1})

    def test_invalid_flow_rejected(self):
        g = hadamard_geometry()
        with pytest.raises(PatternError, match="invalid flow"):
            synthesize(g, Flow({1: 2}, {1: 1, 2: 0}), {1: 0.0})

    def test_synthesized_patterns_are_runnable(self):
        rng = random.Random(13)
        arng = np.random.default_rng(13)
        built = 0
        while built < 30:
            g = random_open_graph(rng)
            result = find_flow(g)
            if not result.found:
                continue
            p = synthesize(
                g,
                result.flow,
                random_angles(arng, g.measured),
                random_angles(arng, g.prepared),
            )
            assert check_runnable(p).ok
            built += 1

    def test_signal_discipline(self):
        rng = random.Random(17)
        arng = np.random.default_rng(17)
        built = 0
        while built < 20:
            g = random_open_graph(rng)
            result = find_flow(g)
            if not result.found:
                continue
            fl = result.flow
            p = synthesize(g, fl, random_angles(arng, g.measured))
            for cmd in p.commands:
                if isinstance(cmd, (CorrectX, CorrectZ, CorrectXPhase)):
                    assert len(cmd.signals) == 1
                    (signal,) = cmd.signals
                    assert fl.levels[cmd.qubit] > fl.levels[signal]
            built += 1


class TestStabilizerForm:
    def test_same_corrections_stabilizer_order(self):
        g = path_state(3, [1], [3])
        fl = find_flow(g).flow
        p = synthesize_stabilizer_form(g, fl, {1: 0.4, 2: 1.3})
        assert p.commands == (
            Prepare(2, 0.0),
            Prepare(3, 0.0),
            Entangle(1, 2),
            Entangle(2, 3),
            Measure(1, 0.4),
            CorrectZ(3, {1}),
            CorrectX(2, {1}),
            Measure(2, 1.3),
            CorrectX(3, {2}),
        )

    def test_same_command_multiset_as_plain_synthesis(self):
        rng = random.Random(29)
        arng = np.random.default_rng(29)
        built = 0
        while built < 20:
            g = random_open_graph(rng)
            result = find_flow(g)
            if not result.found:
                continue
            angles = random_angles(arng, g.measured)
            a = synthesize(g, result.flow, angles)
            b = synthesize_stabilizer_form(g, result.flow, angles)
            assert sorted(map(repr, a.commands)) == sorted(map(repr, b.commands))
            assert check_runnable(b).ok
            built += 1

    def test_empty_measured_set_identical(self):
        g = OpenGraphState([1, 2], [(1, 2)], [1, 2], [1, 2])
        fl = find_flow(g).flow
        assert synthesize_stabilizer_form(g, fl, {}) == synthesize(g, fl, {})


class TestAdjoint:
    def test_hadamard_is_self_adjoint(self):
        g = hadamard_geometry()
        forward, reverse = find_biflow(g)
        p = synthesize(g, forward.flow, {1: 0.0})
        dagger = adjoint(p, reverse.flow)
        assert relabel(dagger, {1: 2, 2: 1}) == p

    def test_adjoint_swaps_angle_vectors(self):
        g = path_state(3, [1], [3])
        forward, reverse = find_biflow(g)
        p = synthesize(g, forward.flow, {1: 0.4, 2: 1.3})
        dagger = adjoint(p, reverse.flow)
        assert dagger.inputs == (3,)
        assert dagger.outputs == (1,)
        assert dagger.measure_angles() == {2: 0.0, 3: 0.0}
        assert dagger.prep_angles() == {1: 0.4, 2: 1.3}

    def test_double_adjoint_restores_angles_and_geometry(self):
        g = path_state(3, [1], [3])
        forward, reverse = find_biflow(g)
        p = synthesize(g, forward.flow, {1: 0.4, 2: 1.3})
        twice = adjoint(adjoint(p, reverse.flow), forward.flow)
        assert twice.geometry() == p.geometry()
        assert twice.measure_angles() == p.measure_angles()
        assert twice.prep_angles() == p.prep_angles()

    def test_trivial_pattern_is_its_own_adjoint(self):
        g = OpenGraphState([1, 2], [(1, 2)], [1, 2], [1, 2])
        forward, reverse = find_biflow(g)
        p = synthesize(g, forward.flow, {})
        assert adjoint(p, reverse.flow) == p

    def test_invalid_reverse_flow_rejected(self):
        g = path_state(3, [1], [3])
        p = synthesize(g, find_flow(g).flow, {1: 0.0, 2: 0.0})
        with pytest.raises(PatternError, match="invalid flow"):
            adjoint(p, Flow({3: 1}, {1: 1, 2: 0, 3: 0}))


class TestTextFormat:
    def test_hadamard_exact_text(self):
        g = hadamard_geometry()
        p = synthesize(g, find_flow(g).flow, {1: 0.0})
        assert print_pattern(p) == H_TEXT

    def test_round_trip_synthesized(self):
        rng = random.Random(41)
        arng = np.random.default_rng(41)
        built = 0
        while built < 25:
            g = random_open_graph(rng)
            result = find_flow(g)
            if not result.found:
                continue
            p = synthesize(
                g,
                result.flow,
                random_angles(arng, g.measured),
                random_angles(arng, g.prepared),
            )
            assert parse_pattern(print_pattern(p)) == p
            built += 1

    def test_round_trip_multi_signal_sets(self):
        p = Pattern(
            [1, 2, 3],
            [1],
            [3],
            [
                Prepare(2, 1.25),
                Prepare(3),
                Entangle(1, 2),
                Entangle(2, 3),
                Measure(1, math.pi),
                Measure(2, 0.0),
                CorrectX(3, {1, 2}),
                CorrectXPhase(3, 0.5, {1}),
                CorrectZ(3, frozenset()),
            ],
        )
        assert parse_pattern(print_pattern(p)) == p

    def test_parser_tolerates_blanks_and_comments(self):
        text = "V: 1 2\nI: 1\nO: 2\n\n# comment\nN 2 0.0\nE 1 2\nM 1 0.0\nX 2 [1]\n"
        assert parse_pattern(text) == hadamard_pattern()

    def test_parser_rejects_garbage(self):
        with pytest.raises(PatternFormatError):
            parse_pattern("V: 1\nI: 1\nO: 1\nQ 1 0.0\n")
        with pytest.raises(PatternFormatError):
            parse_pattern("V: 1\nI: 1\nO: 1\nX 1 {1}\n")
        with pytest.raises(PatternFormatError):
            parse_pattern("N 1 0.0\n")
        with pytest.raises(PatternFormatError):
            parse_pattern("V: 1\nI: 1\nO: 1\nM 1\n")


class TestAngles:
    def test_normalized_into_range(self):
        assert Measure(1, -0.5).angle == pytest.approx(2 * math.pi - 0.5)
        assert Prepare(1, 2 * math.pi).angle == 0.0
        assert CorrectXPhase(1, 7.0, {2}).angle == pytest.approx(7.0 - 2 * math.pi)

    def test_entangle_normalizes_orientation(self):
        assert Entangle(2, 1) == Entangle(1, 2)
