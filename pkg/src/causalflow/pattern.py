"""Measurement-calculus command sequences.

A pattern is an ordered list of preparation, entanglement, measurement and
dependent-correction commands over declared qubits, together with input and
output subsets.  Commands are stored left-to-right in execution order; the
classic right-to-left operator product is available from
:func:`operator_notation`.

Patterns are immutable values and synthesis is a pure function.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .graph_model import Flow, OpenGraphState, ValidationResult, validate_flow

TWO_PI = 2.0 * math.pi
_ANGLE_EPS = 1e-12


def normalize_angle(angle: float) -> float:
    """Map an angle into [0, 2*pi)."""
    a = math.fmod(float(angle), TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:
        a = 0.0
    return a


def _is_zero_angle(angle: float) -> bool:
    a = normalize_angle(angle)
    return a < _ANGLE_EPS or TWO_PI - a < _ANGLE_EPS


@dataclass(frozen=True)
class Prepare:
    """Prepare ``qubit`` in the equatorial state with the given phase."""

    qubit: int
    angle: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle", normalize_angle(self.angle))


@dataclass(frozen=True)
class Entangle:
    """Apply controlled-Z between two qubits (order irrelevant)."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a > self.b:
            a, b = self.a, self.b
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "b", a)


@dataclass(frozen=True)
class Measure:
    """Destructive equatorial measurement of ``qubit`` at ``angle``."""

    qubit: int
    angle: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle", normalize_angle(self.angle))


@dataclass(frozen=True)
class CorrectX:
    """Pauli-X on ``qubit`` iff the XOR of the listed outcomes is 1."""

    qubit: int
    signals: frozenset[int] = field(default_factory=frozenset)

    def __init__(self, qubit: int, signals: Iterable[int] = ()) -> None:
        object.__setattr__(self, "qubit", qubit)
        object.__setattr__(self, "signals", frozenset(signals))


@dataclass(frozen=True)
class CorrectZ:
    """Pauli-Z on ``qubit`` iff the XOR of the listed outcomes is 1."""

    qubit: int
    signals: frozenset[int] = field(default_factory=frozenset)

    def __init__(self, qubit: int, signals: Iterable[int] = ()) -> None:
        object.__setattr__(self, "qubit", qubit)
        object.__setattr__(self, "signals", frozenset(signals))


@dataclass(frozen=True)
class CorrectXPhase:
    """Phase-conjugated X correction: Z(angle) X Z(-angle), signal gated.

    Absorbed exactly by a preparation with the same phase, which is what
    synthesis uses it for when the corrected qubit has a nonzero
    preparation angle.
    """

    qubit: int
    angle: float
    signals: frozenset[int] = field(default_factory=frozenset)

    def __init__(self, qubit: int, angle: float, signals: Iterable[int] = ()) -> None:
        object.__setattr__(self, "qubit", qubit)
        object.__setattr__(self, "angle", normalize_angle(angle))
        object.__setattr__(self, "signals", frozenset(signals))


Command = Union[Prepare, Entangle, Measure, CorrectX, CorrectZ, CorrectXPhase]
_CORRECTIONS = (CorrectX, CorrectZ, CorrectXPhase)


class PatternError(ValueError):
    """Raised for ill-formed patterns or synthesis preconditions."""


class PatternFormatError(PatternError):
    """Raised when pattern text cannot be parsed."""


@dataclass(frozen=True)
class Pattern:
    """Command sequence with declared qubits, inputs and outputs.

    ``commands`` run left to right.  Input qubits hold arbitrary states
    from the start; every non-input must be prepared and every non-output
    measured for the pattern to be runnable.
    """

    vertices: tuple[int, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    commands: tuple[Command, ...]

    def __init__(
        self,
        vertices: Iterable[int],
        inputs: Iterable[int],
        outputs: Iterable[int],
        commands: Iterable[Command] = (),
    ) -> None:
        object.__setattr__(self, "vertices", tuple(sorted(set(vertices))))
        object.__setattr__(self, "inputs", tuple(sorted(set(inputs))))
        object.__setattr__(self, "outputs", tuple(sorted(set(outputs))))
        object.__setattr__(self, "commands", tuple(commands))

    @property
    def measurement_order(self) -> tuple[int, ...]:
        """Measured qubits in the order their measurements appear."""
        return tuple(c.qubit for c in self.commands if isinstance(c, Measure))

    @property
    def n_measurements(self) -> int:
        return len(self.measurement_order)

    def measure_angles(self) -> dict[int, float]:
        return {c.qubit: c.angle for c in self.commands if isinstance(c, Measure)}

    def prep_angles(self) -> dict[int, float]:
        return {c.qubit: c.angle for c in self.commands if isinstance(c, Prepare)}

    def geometry(self) -> OpenGraphState:
        """The underlying open graph state (entanglement edges plus I/O)."""
        edges = [(c.a, c.b) for c in self.commands if isinstance(c, Entangle)]
        return OpenGraphState(self.vertices, edges, self.inputs, self.outputs)

    def without_corrections(self) -> Pattern:
        """Strip all dependent corrections (for determinism sanity checks)."""
        kept = tuple(c for c in self.commands if not isinstance(c, _CORRECTIONS))
        return Pattern(self.vertices, self.inputs, self.outputs, kept)


def check_runnable(p: Pattern) -> ValidationResult:
    """Scan the command sequence for runnability violations.

    Violation codes: R0 (a command depends on an outcome not yet
    measured), R1 (a command acts on a measured qubit or an unprepared
    non-input), R2 (measured/prepared sets do not match the declared
    outputs/inputs).
    """
    violations: list[str] = []
    declared = set(p.vertices)
    iset = set(p.inputs)
    oset = set(p.outputs)
    available = set(iset)
    measured: set[int] = set()

    def targets(cmd: Command) -> tuple[int, ...]:
        if isinstance(cmd, Entangle):
            return (cmd.a, cmd.b)
        return (cmd.qubit,)

    for idx, cmd in enumerate(p.commands):
        for q in targets(cmd):
            if q not in declared:
                violations.append(f"R1: command {idx} acts on undeclared qubit {q}")
        if isinstance(cmd, _CORRECTIONS):
            late = sorted(set(cmd.signals) - measured)
            if late:
                violations.append(
                    f"R0: command {idx} depends on unmeasured outcomes {late}"
                )
        if isinstance(cmd, Prepare):
            if cmd.qubit in iset:
                violations.append(f"R2: input qubit {cmd.qubit} prepared")
            if cmd.qubit in measured:
                violations.append(f"R1: measured qubit {cmd.qubit} prepared")
            elif cmd.qubit in available:
                violations.append(f"R1: qubit {cmd.qubit} prepared twice")
            else:
                available.add(cmd.qubit)
            continue
        for q in targets(cmd):
            if q not in declared:
                continue
            if q in measured:
                violations.append(f"R1: command {idx} acts on measured qubit {q}")
            elif q not in available:
                violations.append(f"R1: command {idx} acts on unprepared qubit {q}")
        if isinstance(cmd, Measure):
            if cmd.qubit in oset:
                violations.append(f"R2: output qubit {cmd.qubit} measured")
            if cmd.qubit not in measured:
                measured.add(cmd.qubit)

    for q in sorted(declared - oset - measured):
        violations.append(f"R2: non-output qubit {q} never measured")
    for q in sorted(declared - iset - (available - iset)):
        violations.append(f"R2: non-input qubit {q} never prepared")
    return ValidationResult(tuple(violations))


def _measured_in_flow_order(g: OpenGraphState, fl: Flow) -> list[int]:
    return sorted(g.measured, key=lambda i: (fl.levels[i], i))


def _check_synthesis_inputs(
    g: OpenGraphState,
    fl: Flow,
    meas_angles: Mapping[int, float],
    prep_angles: Mapping[int, float] | None,
) -> dict[int, float]:
    check = validate_flow(g, fl, allow_loops=bool(fl.loops))
    if not check.ok:
        raise PatternError(f"invalid flow: {'; '.join(check.violations)}")
    missing = sorted(set(g.measured) - set(meas_angles))
    if missing:
        raise PatternError(f"measurement angles missing for {missing}")
    preps = {q: 0.0 for q in g.prepared}
    if prep_angles is not None:
        missing = sorted(set(g.prepared) - set(prep_angles))
        if missing:
            raise PatternError(f"preparation angles missing for {missing}")
        preps.update({q: normalize_angle(a) for q, a in prep_angles.items()})
    for i in fl.loops:
        if not _is_zero_angle(preps.get(i, 0.0)):
            raise PatternError(
                f"loop vertex {i} requires zero preparation angle"
            )
    return preps


def _loop_correction_block(g: OpenGraphState, i: int) -> list[Command]:
    """Dependent corrections for a loop vertex.

    The stabilizer of the loop vertex, with its own-qubit factor fused
    into the measurement, leaves Z corrections on every neighbor.  Plain Z
    on all neighbors equalizes the branch maps only up to a quarter-turn
    phase per outcome, so the Z on the lowest-id neighbor is emitted in
    the phase-exact form X then X-phase(pi/2) (their product is -iZ),
    which makes the branch maps literally equal at a right-angle
    measurement.
    """
    nbrs = sorted(g._adjacency[i])
    if not nbrs:
        return []
    j0 = nbrs[0]
    block: list[Command] = [
        CorrectX(j0, {i}),
        CorrectXPhase(j0, math.pi / 2.0, {i}),
    ]
    block.extend(CorrectZ(k, {i}) for k in nbrs[1:])
    return block


def _prologue(
    g: OpenGraphState, preps: Mapping[int, float]
) -> list[Command]:
    cmds: list[Command] = [Prepare(q, preps[q]) for q in g.prepared]
    cmds.extend(Entangle(u, v) for u, v in sorted(set(g.edges)))
    return cmds


def _x_correction(target: int, angle: float, signal: int) -> Command:
    if _is_zero_angle(angle):
        return CorrectX(target, {signal})
    return CorrectXPhase(target, angle, {signal})


def synthesize(
    g: OpenGraphState,
    fl: Flow,
    meas_angles: Mapping[int, float],
    prep_angles: Mapping[int, float] | None = None,
) -> Pattern:
    """Build the deterministic correction pattern for a flow geometry.

    Emits, in execution order: preparations for every non-input qubit,
    all entanglers, then for each measured qubit ``i`` (by ascending
    level, ties by id) its measurement followed by an X correction on
    ``f(i)`` and Z corrections on the other neighbors of ``f(i)``, each
    gated on the outcome of ``i``.  The X correction carries the phase of
    the corrected qubit's preparation when that is nonzero.  Loop vertices
    get the neighbor-correction block described in
    :mod:`causalflow.pauli_rules`.

    The result passes :func:`check_runnable`, and all of its branch maps
    are equal for every choice of angles.

    Raises
    ------
    PatternError
        If the flow does not validate or an angle map is not total.
    """
    preps = _check_synthesis_inputs(g, fl, meas_angles, prep_angles)
    cmds = _prologue(g, preps)
    adjacency = g._adjacency
    for i in _measured_in_flow_order(g, fl):
        cmds.append(Measure(i, meas_angles[i]))
        if i in fl.loops:
            cmds.extend(_loop_correction_block(g, i))
            continue
        j = fl.f[i]
        cmds.append(_x_correction(j, preps.get(j, 0.0), i))
        cmds.extend(CorrectZ(k, {i}) for k in sorted(adjacency[j] - {i}))
    pattern = Pattern(g.vertices, g.inputs, g.outputs, cmds)
    check = check_runnable(pattern)
    if not check.ok:
        raise AssertionError(f"synthesized pattern not runnable: {check.violations}")
    return pattern


def synthesize_stabilizer_form(
    g: OpenGraphState, fl: Flow, meas_angles: Mapping[int, float]
) -> Pattern:
    """Deterministic pattern via the dependent graph-stabilizer route.

    For each measured qubit ``i`` the corrections are read off the
    stabilizer of ``f(i)`` (X there, Z on all its neighbors), gated on the
    outcome of ``i``.  The stabilizer's Z factor on ``i`` itself cancels
    against the anachronical Z that converts the measurement into a fixed
    projection, so neither is emitted and the pattern stays runnable.  The
    surviving corrections act on pairwise distinct qubits and commute, so
    this realizes exactly the same branch maps as :func:`synthesize`; only
    the within-block command order differs.

    Preparation angles must all be zero in this form.
    """
    preps = _check_synthesis_inputs(g, fl, meas_angles, None)
    cmds = _prologue(g, preps)
    adjacency = g._adjacency
    for i in _measured_in_flow_order(g, fl):
        cmds.append(Measure(i, meas_angles[i]))
        if i in fl.loops:
            cmds.extend(_loop_correction_block(g, i))
            continue
        j = fl.f[i]
        cmds.extend(CorrectZ(k, {i}) for k in sorted(adjacency[j] - {i}))
        cmds.append(CorrectX(j, {i}))
    pattern = Pattern(g.vertices, g.inputs, g.outputs, cmds)
    check = check_runnable(pattern)
    if not check.ok:
        raise AssertionError(f"synthesized pattern not runnable: {check.violations}")
    return pattern


def adjoint(p: Pattern, reverse: Flow) -> Pattern:
    """Adjoint pattern under a reverse flow.

    Swaps the roles of inputs and outputs and exchanges the preparation
    and measurement angle vectors: former preparations become measurements
    at the same angle and vice versa.  On bi-flow geometries the result
    realizes the adjoint of the original pattern's unitary.

    Raises
    ------
    PatternError
        If ``reverse`` is not a valid flow on the role-swapped geometry.
    """
    g = p.geometry()
    meas = p.measure_angles()
    preps = p.prep_angles()
    return synthesize(
        g.reversed(), reverse, meas_angles=preps, prep_angles=meas
    )


def relabel(p: Pattern, mapping: Mapping[int, int]) -> Pattern:
    """Rename qubits throughout a pattern via a bijective id map."""

    def m(q: int) -> int:
        return mapping.get(q, q)

    def relabel_cmd(cmd: Command) -> Command:
        if isinstance(cmd, Prepare):
            return Prepare(m(cmd.qubit), cmd.angle)
        if isinstance(cmd, Entangle):
            return Entangle(m(cmd.a), m(cmd.b))
        if isinstance(cmd, Measure):
            return Measure(m(cmd.qubit), cmd.angle)
        if isinstance(cmd, CorrectX):
            return CorrectX(m(cmd.qubit), {m(s) for s in cmd.signals})
        if isinstance(cmd, CorrectZ):
            return CorrectZ(m(cmd.qubit), {m(s) for s in cmd.signals})
        return CorrectXPhase(m(cmd.qubit), cmd.angle, {m(s) for s in cmd.signals})

    return Pattern(
        (m(v) for v in p.vertices),
        (m(v) for v in p.inputs),
        (m(v) for v in p.outputs),
        tuple(relabel_cmd(c) for c in p.commands),
    )


def _format_signals(signals: frozenset[int]) -> str:
    return "[" + ",".join(str(s) for s in sorted(signals)) + "]"


def print_pattern(p: Pattern) -> str:
    """Render a pattern in the line-based text format.

    Header lines declare the qubits and the input/output sets; each
    following line is one command in execution order.  Angles are printed
    with full float round-trip precision.
    """
    lines = [
        "V: " + " ".join(str(v) for v in p.vertices),
        "I: " + " ".join(str(v) for v in p.inputs),
        "O: " + " ".join(str(v) for v in p.outputs),
    ]
    for cmd in p.commands:
        if isinstance(cmd, Prepare):
            lines.append(f"N {cmd.qubit} {cmd.angle!r}")
        elif isinstance(cmd, Entangle):
            lines.append(f"E {cmd.a} {cmd.b}")
        elif isinstance(cmd, Measure):
            lines.append(f"M {cmd.qubit} {cmd.angle!r}")
        elif isinstance(cmd, CorrectX):
            lines.append(f"X {cmd.qubit} {_format_signals(cmd.signals)}")
        elif isinstance(cmd, CorrectZ):
            lines.append(f"Z {cmd.qubit} {_format_signals(cmd.signals)}")
        else:
            lines.append(
                f"XA {cmd.qubit} {cmd.angle!r} {_format_signals(cmd.signals)}"
            )
    return "\n".join(lines) + "\n"


_SIGNAL_RE = re.compile(r"^\[([0-9,\s]*)\]$")


def _parse_signals(token: str) -> frozenset[int]:
    match = _SIGNAL_RE.match(token)
    if not match:
        raise PatternFormatError(f"bad signal set {token!r}")
    body = match.group(1).strip()
    if not body:
        return frozenset()
    return frozenset(int(s) for s in body.replace(",", " ").split())


def parse_pattern(text: str) -> Pattern:
    """Parse the text format produced by :func:`print_pattern`."""
    vertices: list[int] = []
    inputs: list[int] = []
    outputs: list[int] = []
    commands: list[Command] = []
    seen_headers: set[str] = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(("V:", "I:", "O:")):
            key = line[0]
            seen_headers.add(key)
            ids = [int(t) for t in line[2:].split()]
            {"V": vertices, "I": inputs, "O": outputs}[key].extend(ids)
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "N":
                commands.append(Prepare(int(parts[1]), float(parts[2])))
            elif kind == "E":
                commands.append(Entangle(int(parts[1]), int(parts[2])))
            elif kind == "M":
                commands.append(Measure(int(parts[1]), float(parts[2])))
            elif kind == "X":
                commands.append(CorrectX(int(parts[1]), _parse_signals(parts[2])))
            elif kind == "Z":
                commands.append(CorrectZ(int(parts[1]), _parse_signals(parts[2])))
            elif kind == "XA":
                commands.append(
                    CorrectXPhase(
                        int(parts[1]), float(parts[2]), _parse_signals(parts[3])
                    )
                )
            else:
                raise PatternFormatError(f"unknown command {kind!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, PatternFormatError):
                raise
            raise PatternFormatError(f"bad command line {line!r}") from exc
    if "V" not in seen_headers:
        raise PatternFormatError("missing V: header")
    return Pattern(vertices, inputs, outputs, commands)


def _angle_str(angle: float) -> str:
    return f"{angle:.10g}"


def _signal_str(signals: frozenset[int]) -> str:
    return "+".join(f"s_{s}" for s in sorted(signals)) or "0"


def operator_notation(p: Pattern) -> str:
    """Render the command list as a right-to-left operator product."""
    tokens: list[str] = []
    for cmd in reversed(p.commands):
        if isinstance(cmd, Prepare):
            tokens.append(f"N_{cmd.qubit}^{_angle_str(cmd.angle)}")
        elif isinstance(cmd, Entangle):
            tokens.append(f"E_{{{cmd.a},{cmd.b}}}")
        elif isinstance(cmd, Measure):
            tokens.append(f"M_{cmd.qubit}^{_angle_str(cmd.angle)}")
        elif isinstance(cmd, CorrectX):
            tokens.append(f"X_{cmd.qubit}^{{{_signal_str(cmd.signals)}}}")
        elif isinstance(cmd, CorrectZ):
            tokens.append(f"Z_{cmd.qubit}^{{{_signal_str(cmd.signals)}}}")
        else:
            tokens.append(
                f"(X_{cmd.qubit}^{_angle_str(cmd.angle)})^"
                f"{{{_signal_str(cmd.signals)}}}"
            )
    return " ".join(tokens)
