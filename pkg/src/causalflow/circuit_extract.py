"""Gate-circuit extraction from flow geometries.

A flow geometry decomposes into star patterns, one per measured qubit:
the qubit is the star's input, its remaining neighbors are the outputs,
and the corrected neighbor inherits the input's circuit wire.  Each star
compiles to controlled-Z gates onto the non-corrected outputs followed by
a phase and a Hadamard on the continuing wire; edges between output
qubits survive as bare controlled-Z gates.  The resulting circuit acts on
one wire per output qubit (inputs keep their wires, everything else
enters as an ancilla prepared in the plus state) and agrees with the
geometry's realized embedding up to global phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .graph_model import Flow, OpenGraphState, validate_flow
from .pattern import PatternError
from .simulator import HADAMARD, SimulationError, phase_gate, plus_ket


@dataclass(frozen=True)
class StarPattern:
    """One measured qubit with its remaining neighbors at pick time.

    ``corrected`` is the neighbor designated by the flow; it continues on
    the input's wire in the extracted circuit.
    """

    input: int
    outputs: tuple[int, ...]
    angle: float
    corrected: int

    def __post_init__(self) -> None:
        if self.corrected not in self.outputs:
            raise ValueError(
                f"corrected output {self.corrected} not among outputs"
            )


@dataclass(frozen=True)
class Wire:
    """A circuit wire: born as an input or as a plus-state ancilla."""

    id: int
    source: str  # "input" | "plus"


@dataclass(frozen=True)
class CZGate:
    a: int
    b: int


@dataclass(frozen=True)
class PhaseGate:
    wire: int
    theta: float


@dataclass(frozen=True)
class HadamardGate:
    wire: int


Gate = Union[CZGate, PhaseGate, HadamardGate]


@dataclass(frozen=True)
class Circuit:
    """Gate list over declared wires.

    ``outputs`` lists, for each output qubit in ascending id order, the
    wire that carries it at the end.  Input wires appear first in ``wires``
    in ascending input-qubit order; the map simulated by
    :func:`simulate_circuit` uses that order for its input basis.
    """

    wires: tuple[Wire, ...]
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]

    @property
    def n_input_wires(self) -> int:
        return sum(1 for w in self.wires if w.source == "input")

    def to_json_dict(self) -> dict:
        gates = []
        for gate in self.gates:
            if isinstance(gate, CZGate):
                gates.append({"g": "CZ", "a": gate.a, "b": gate.b})
            elif isinstance(gate, PhaseGate):
                gates.append({"g": "P", "w": gate.wire, "theta": gate.theta})
            else:
                gates.append({"g": "H", "w": gate.wire})
        return {
            "wires": [{"id": w.id, "source": w.source} for w in self.wires],
            "gates": gates,
            "outputs": list(self.outputs),
        }


def circuit_from_json_dict(data: Mapping) -> Circuit:
    wires = tuple(Wire(int(w["id"]), str(w["source"])) for w in data["wires"])
    gates: list[Gate] = []
    for g in data["gates"]:
        kind = g["g"]
        if kind == "CZ":
            gates.append(CZGate(int(g["a"]), int(g["b"])))
        elif kind == "P":
            gates.append(PhaseGate(int(g["w"]), float(g["theta"])))
        elif kind == "H":
            gates.append(HadamardGate(int(g["w"])))
        else:
            raise ValueError(f"unknown gate kind {kind!r}")
    return Circuit(wires, tuple(gates), tuple(int(o) for o in data["outputs"]))


def _checked_flow(g: OpenGraphState, fl: Flow) -> None:
    if fl.loops:
        raise PatternError("circuit extraction requires a loop-free flow")
    check = validate_flow(g, fl, allow_loops=False)
    if not check.ok:
        raise PatternError(f"invalid flow: {'; '.join(check.violations)}")


def decompose_stars(
    g: OpenGraphState, fl: Flow, meas_angles: Mapping[int, float]
) -> tuple[list[StarPattern], list[tuple[int, int]]]:
    """Split a flow geometry into star patterns plus residual output edges.

    Measured qubits are picked level by level (ascending id within a
    level), each contributing a star over its neighbors that remain in the
    shrinking graph, and are then removed.  Edges whose endpoints are both
    outputs are never consumed by a star and come back as the residual.
    """
    _checked_flow(g, fl)
    missing = sorted(set(g.measured) - set(meas_angles))
    if missing:
        raise PatternError(f"measurement angles missing for {missing}")
    removed: set[int] = set()
    stars: list[StarPattern] = []
    adjacency = g._adjacency
    for i in sorted(g.measured, key=lambda q: (fl.levels[q], q)):
        remaining = tuple(sorted(adjacency[i] - removed))
        stars.append(StarPattern(i, remaining, meas_angles[i], fl.f[i]))
        removed.add(i)
    oset = set(g.outputs)
    residual = [
        (u, v) for u, v in sorted(set(g.edges)) if u in oset and v in oset
    ]
    return stars, residual


def star_to_gates(star: StarPattern) -> list[Gate]:
    """Gate block for one star, expressed over qubit ids.

    Controlled-Z onto every non-corrected output, then the phase of minus
    the measurement angle and a Hadamard on the input, whose wire carries
    the corrected output from here on.  Wire relabeling happens in
    :func:`extract_circuit`.
    """
    gates: list[Gate] = [
        CZGate(star.input, w) for w in star.outputs if w != star.corrected
    ]
    gates.append(PhaseGate(star.input, -star.angle))
    gates.append(HadamardGate(star.input))
    return gates


def extract_circuit(
    g: OpenGraphState, fl: Flow, meas_angles: Mapping[int, float]
) -> Circuit:
    """Compile a flow geometry into a controlled-Z / phase / Hadamard circuit.

    Star blocks are emitted in decomposition order with the star's input
    wire continuing as its corrected output's wire.  A wire is an input
    wire exactly when its earliest segment is an input qubit; every other
    wire begins as a plus-state ancilla.  Residual output-output
    controlled-Z gates are placed as soon as both endpoint wires have
    received their final star block, which commutes with emitting them all
    at the end.
    """
    stars, residual = decompose_stars(g, fl, meas_angles)

    wires: list[Wire] = []
    wire_of: dict[int, int] = {}

    def new_wire(source: str) -> int:
        wid = len(wires)
        wires.append(Wire(wid, source))
        return wid

    for q in g.inputs:
        wire_of[q] = new_wire("input")
    touched = {s.input for s in stars} | {w for s in stars for w in s.outputs}
    for q in g.outputs:
        if q not in touched and q not in wire_of:
            wire_of[q] = new_wire("plus")

    oset = set(g.outputs)
    finalized = {q for q in oset if q in wire_of and q not in set(g.measured)}
    pending = list(residual)
    gates: list[Gate] = []

    def flush_residual() -> None:
        remaining: list[tuple[int, int]] = []
        for u, v in pending:
            if u in finalized and v in finalized:
                gates.append(CZGate(wire_of[u], wire_of[v]))
            else:
                remaining.append((u, v))
        pending[:] = remaining

    flush_residual()
    for star in stars:
        if star.input not in wire_of:
            wire_of[star.input] = new_wire("plus")
        for w in star.outputs:
            if w == star.corrected:
                continue
            if w not in wire_of:
                wire_of[w] = new_wire("plus")
            if w in oset:
                finalized.add(w)
        for gate in star_to_gates(star):
            if isinstance(gate, CZGate):
                gates.append(CZGate(wire_of[gate.a], wire_of[gate.b]))
            elif isinstance(gate, PhaseGate):
                gates.append(PhaseGate(wire_of[gate.wire], gate.theta))
            else:
                gates.append(HadamardGate(wire_of[gate.wire]))
        wire_of[star.corrected] = wire_of.pop(star.input)
        if star.corrected in oset:
            finalized.add(star.corrected)
        flush_residual()
    if pending:
        raise AssertionError(f"residual edges never became placeable: {pending}")

    outputs = tuple(wire_of[q] for q in g.outputs)
    return Circuit(tuple(wires), tuple(gates), outputs)


def simulate_circuit(c: Circuit, max_wires: int = 16) -> np.ndarray:
    """Matrix of a circuit from its input wires to its output wires.

    Ancilla wires enter as plus states and are contracted into the map;
    the returned matrix has one output-space axis ordered by the circuit's
    declared output wires and one input axis per input wire in declaration
    order.
    """
    n_wires = len(c.wires)
    if n_wires > max_wires:
        raise SimulationError(f"{n_wires} wires exceed the bound {max_wires}")
    input_wires = [w.id for w in c.wires if w.source == "input"]
    n_in = len(input_wires)

    tensor = np.eye(1 << n_in, dtype=complex).reshape((2,) * (2 * n_in))
    axis_of: dict[int, int] = {w: k for k, w in enumerate(input_wires)}
    domain_axes = list(range(n_in, 2 * n_in))
    for w in c.wires:
        if w.source == "plus":
            axis_of[w.id] = tensor.ndim
            tensor = np.multiply.outer(tensor, plus_ket(0.0))

    def apply_1q(wire: int, gate: np.ndarray) -> None:
        nonlocal tensor
        ax = axis_of[wire]
        moved = np.moveaxis(tensor, ax, -1)
        tensor = np.moveaxis(moved @ gate.T, -1, ax)

    for gate in c.gates:
        if isinstance(gate, CZGate):
            idx: list = [slice(None)] * tensor.ndim
            idx[axis_of[gate.a]] = 1
            idx[axis_of[gate.b]] = 1
            tensor = tensor.copy()
            tensor[tuple(idx)] *= -1.0
        elif isinstance(gate, PhaseGate):
            apply_1q(gate.wire, phase_gate(gate.theta))
        else:
            apply_1q(gate.wire, HADAMARD)

    perm = [axis_of[w] for w in c.outputs] + domain_axes
    spectators = [
        ax for ax in range(tensor.ndim) if ax not in perm
    ]
    if spectators:
        raise SimulationError(
            f"wires {spectators} are neither outputs nor inputs"
        )
    return np.transpose(tensor, perm).reshape(1 << len(c.outputs), 1 << n_in)


def gate_counts(c: Circuit) -> dict[str, int]:
    """Histogram of gate kinds in a circuit."""
    counts = {"CZ": 0, "P": 0, "H": 0}
    for gate in c.gates:
        if isinstance(gate, CZGate):
            counts["CZ"] += 1
        elif isinstance(gate, PhaseGate):
            counts["P"] += 1
        else:
            counts["H"] += 1
    return counts
