"""Exact branch simulation of measurement patterns.

The engine is a dense complex state tensor over the currently live qubits.
Two routes are provided on purpose: :func:`run_branch` evaluates a single
outcome string column by column (the simple reference), while
:func:`enumerate_branches` runs one tensor pass in which measured qubits
are rotated into their measurement basis and kept as branch indices, so
every branch map falls out of a single contraction.  The two agree exactly
and are cross-checked in the test suite.

Branch evaluations are pure and order-independent; verdicts do not depend
on enumeration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph_model import OpenGraphState, validate_graph
from .pattern import (
    CorrectX,
    CorrectXPhase,
    CorrectZ,
    Entangle,
    Measure,
    Pattern,
    PatternError,
    Prepare,
    check_runnable,
)

DEFAULT_TOLERANCE = 1e-9
EXACT_TOLERANCE = 1e-12
DEFAULT_MAX_MEASUREMENTS = 12
_MAX_TENSOR_AXES = 24

_SQRT2_INV = 1.0 / math.sqrt(2.0)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) * _SQRT2_INV
CZ_MATRIX = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


class SimulationError(RuntimeError):
    """Raised when a pattern cannot be simulated within configured bounds."""


def phase_gate(theta: float) -> np.ndarray:
    """diag(1, e^{i theta})."""
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * theta)]], dtype=complex)


def x_phase_gate(alpha: float) -> np.ndarray:
    """Phase-conjugated X: Z(alpha) X Z(-alpha)."""
    return np.array(
        [[0.0, np.exp(-1j * alpha)], [np.exp(1j * alpha), 0.0]], dtype=complex
    )


def plus_ket(alpha: float = 0.0) -> np.ndarray:
    """(|0> + e^{i alpha}|1>)/sqrt(2) as a column of amplitudes."""
    return np.array([1.0, np.exp(1j * alpha)], dtype=complex) * _SQRT2_INV


def measurement_bras(alpha: float) -> np.ndarray:
    """Rows are the outcome-0 and outcome-1 bras of an equatorial measurement."""
    e = np.exp(-1j * alpha)
    return np.array([[1.0, e], [1.0, -e]], dtype=complex) * _SQRT2_INV


class Classification(str, Enum):
    """Determinism classes; strong implies plain determinism."""

    NOT_DETERMINISTIC = "not-deterministic"
    DETERMINISTIC = "deterministic"
    STRONGLY_DETERMINISTIC = "strongly-deterministic"

    @property
    def rank(self) -> int:
        return {
            Classification.NOT_DETERMINISTIC: 0,
            Classification.DETERMINISTIC: 1,
            Classification.STRONGLY_DETERMINISTIC: 2,
        }[self]

    @property
    def is_deterministic(self) -> bool:
        return self.rank >= 1


@dataclass(frozen=True, eq=False)
class Witness:
    """A branch pair and an input state on which their images are not parallel."""

    branch_a: str
    branch_b: str
    input_state: np.ndarray
    deviation: float

    def to_json_dict(self) -> dict:
        return {
            "branch_a": self.branch_a,
            "branch_b": self.branch_b,
            "input_state": [[float(z.real), float(z.imag)] for z in self.input_state],
            "deviation": float(self.deviation),
        }


@dataclass(frozen=True, eq=False)
class BranchReport:
    """One branch: its outcome string, linear map, and optional probability.

    ``outcomes`` orders bits by measurement occurrence (first measurement
    is the leftmost character).  ``branch_map`` maps the input space to the
    output space with bases ordered by the sorted input/output vertex
    lists.  ``probability`` is filled when an input state was supplied.
    """

    outcomes: str
    branch_map: np.ndarray
    probability: float | None = None

    def to_json_dict(self) -> dict:
        data: dict = {
            "outcomes": self.outcomes,
            "map": matrix_to_json(self.branch_map),
        }
        if self.probability is not None:
            data["probability"] = float(self.probability)
        return data


@dataclass(frozen=True, eq=False)
class DeterminismVerdict:
    """Classification of a pattern's branch maps.

    ``uniform`` records whether the sampled random measurement-angle
    vectors (same geometry and corrections) all stayed deterministic; the
    sample count and seed are kept so verdicts are reproducible.
    """

    classification: Classification
    uniform: bool
    witness: Witness | None = None
    angle_samples: int = 0
    seed: int = 0
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def is_deterministic(self) -> bool:
        return self.classification.is_deterministic

    @property
    def is_strong(self) -> bool:
        return self.classification is Classification.STRONGLY_DETERMINISTIC

    def to_json_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "uniform": self.uniform,
            "witness": None if self.witness is None else self.witness.to_json_dict(),
            "angle_samples": self.angle_samples,
            "seed": self.seed,
            "tolerance": self.tolerance,
        }


def matrix_to_json(m: np.ndarray) -> list:
    """Complex matrix as nested [re, im] pairs."""
    return [
        [[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(m)
    ]


def matrix_from_json(data: Sequence) -> np.ndarray:
    return np.array(
        [[complex(re, im) for re, im in row] for row in data], dtype=complex
    )


def _runnable_or_raise(p: Pattern) -> None:
    check = check_runnable(p)
    if not check.ok:
        raise PatternError(
            "pattern is not runnable: " + "; ".join(check.violations)
        )


def _input_index_bits(index: int, n: int) -> list[int]:
    return [(index >> (n - 1 - k)) & 1 for k in range(n)]


def run_branch(p: Pattern, outcomes: str) -> np.ndarray:
    """Branch map for one outcome string, computed column by column.

    Each computational basis state of the input space is pushed through
    the command list: preparations tensor in their phase states, entangle
    commands apply controlled-Z, measurements contract with the outcome
    bra (removing the qubit), and corrections fire when the XOR of their
    signals is 1.  The resulting columns form the branch map.

    Raises
    ------
    PatternError
        If the pattern is not runnable or the outcome string length does
        not match the number of measurements.
    """
    _runnable_or_raise(p)
    order = p.measurement_order
    if len(outcomes) != len(order) or any(c not in "01" for c in outcomes):
        raise PatternError(
            f"outcome string {outcomes!r} does not match {len(order)} measurements"
        )
    outcome_of = {q: int(bit) for q, bit in zip(order, outcomes)}
    n_in = len(p.inputs)
    n_out = len(p.outputs)
    result = np.zeros((1 << n_out, 1 << n_in), dtype=complex)
    basis = (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex))

    for col in range(1 << n_in):
        tensor = np.array(1.0, dtype=complex)
        axis_of: dict[int, int] = {}
        for q, bit in zip(p.inputs, _input_index_bits(col, n_in)):
            axis_of[q] = tensor.ndim
            tensor = np.multiply.outer(tensor, basis[bit])

        def apply_1q(gate: np.ndarray, q: int) -> None:
            nonlocal tensor
            ax = axis_of[q]
            moved = np.moveaxis(tensor, ax, -1)
            tensor = np.moveaxis(moved @ gate.T, -1, ax)

        def signal_fires(signals: frozenset[int]) -> bool:
            return sum(outcome_of[s] for s in signals) % 2 == 1

        for cmd in p.commands:
            if isinstance(cmd, Prepare):
                axis_of[cmd.qubit] = tensor.ndim
                tensor = np.multiply.outer(tensor, plus_ket(cmd.angle))
            elif isinstance(cmd, Entangle):
                idx: list = [slice(None)] * tensor.ndim
                idx[axis_of[cmd.a]] = 1
                idx[axis_of[cmd.b]] = 1
                tensor = tensor.copy()
                tensor[tuple(idx)] *= -1.0
            elif isinstance(cmd, Measure):
                bra = measurement_bras(cmd.angle)[outcome_of[cmd.qubit]]
                ax = axis_of.pop(cmd.qubit)
                tensor = np.tensordot(tensor, bra, axes=([ax], [0]))
                for q in axis_of:
                    if axis_of[q] > ax:
                        axis_of[q] -= 1
            elif isinstance(cmd, CorrectX):
                if signal_fires(cmd.signals):
                    apply_1q(PAULI_X, cmd.qubit)
            elif isinstance(cmd, CorrectZ):
                if signal_fires(cmd.signals):
                    apply_1q(PAULI_Z, cmd.qubit)
            elif isinstance(cmd, CorrectXPhase):
                if signal_fires(cmd.signals):
                    apply_1q(x_phase_gate(cmd.angle), cmd.qubit)

        if set(axis_of) != set(p.outputs):
            raise SimulationError(
                f"live qubits {sorted(axis_of)} differ from outputs"
            )
        perm = [axis_of[q] for q in p.outputs]
        result[:, col] = np.transpose(tensor, perm).reshape(-1)
    return result


class _TensorEngine:
    """Batched all-branches tensor engine.

    Axis 0 is the batch (one entry per measurement-angle vector); every
    pattern qubit owns one further axis.  A measurement rotates its qubit
    into the measurement basis and keeps the axis as a branch index, so
    dependent corrections become controlled gates on that index.  One
    domain axis per input qubit carries the matrix structure.
    """

    def __init__(self, inputs: Sequence[int], batch: int) -> None:
        n_in = len(inputs)
        if batch < 1:
            raise ValueError("batch must be positive")
        base = np.eye(1 << n_in, dtype=complex).reshape((2,) * (2 * n_in))
        self.t = np.broadcast_to(base, (batch,) + base.shape).copy()
        self.batch = batch
        self.axis_of = {q: 1 + k for k, q in enumerate(inputs)}
        self.domain_axes = list(range(1 + n_in, 1 + 2 * n_in))
        self.branch_axis_of: dict[int, int] = {}
        self.branch_order: list[int] = []

    def add_qubit(self, q: int, state: np.ndarray) -> None:
        self.axis_of[q] = self.t.ndim
        self.t = np.multiply.outer(self.t, state)

    def _apply_at(self, axis: int, gate: np.ndarray) -> None:
        moved = np.moveaxis(self.t, axis, -1)
        if gate.ndim == 2:
            moved = moved @ gate.T
        else:
            moved = np.einsum("b...j,bij->b...i", moved, gate)
        self.t = np.moveaxis(moved, -1, axis)

    def apply_1q(self, q: int, gate: np.ndarray) -> None:
        self._apply_at(self.axis_of[q], gate)

    def apply_cz(self, a: int, b: int) -> None:
        idx: list = [slice(None)] * self.t.ndim
        idx[self.axis_of[a]] = 1
        idx[self.axis_of[b]] = 1
        self.t[tuple(idx)] *= -1.0

    def measure_keep_branch(self, q: int, bras: np.ndarray) -> None:
        """Rotate ``q`` into its measurement basis; axis becomes a branch index."""
        ax = self.axis_of.pop(q)
        self._apply_at(ax, bras)
        self.branch_axis_of[q] = ax
        self.branch_order.append(q)

    def contract_bra(self, q: int, bra: np.ndarray) -> None:
        ax = self.axis_of.pop(q)
        moved = np.moveaxis(self.t, ax, -1)
        if bra.ndim == 1:
            self.t = moved @ bra
        else:
            self.t = np.einsum("b...j,bj->b...", moved, bra)
        for table in (self.axis_of, self.branch_axis_of):
            for key in table:
                if table[key] > ax:
                    table[key] -= 1
        self.domain_axes = [a - 1 if a > ax else a for a in self.domain_axes]

    def controlled_1q(self, control_qubit: int, target: int, gate: np.ndarray) -> None:
        """Apply ``gate`` on ``target`` where the branch bit of ``control_qubit`` is 1."""
        ctrl = self.branch_axis_of[control_qubit]
        tgt = self.axis_of[target]
        idx: list = [slice(None)] * self.t.ndim
        idx[ctrl] = 1
        sub = self.t[tuple(idx)]
        sub_tgt = tgt - 1 if tgt > ctrl else tgt
        moved = np.moveaxis(sub, sub_tgt, -1)
        if gate.ndim == 2:
            moved = moved @ gate.T
        else:
            moved = np.einsum("b...j,bij->b...i", moved, gate)
        self.t[tuple(idx)] = np.moveaxis(moved, -1, sub_tgt)

    def finalize(self, outputs: Sequence[int]) -> np.ndarray:
        """Tensor as (batch, branches, output space, input space)."""
        if set(self.axis_of) != set(outputs):
            raise SimulationError(
                f"live qubits {sorted(self.axis_of)} differ from outputs"
            )
        perm = [0]
        perm += [self.branch_axis_of[q] for q in self.branch_order]
        perm += [self.axis_of[q] for q in outputs]
        perm += self.domain_axes
        t = np.transpose(self.t, perm)
        n = len(self.branch_order)
        dim_out = 1 << len(outputs)
        dim_in = 1 << len(self.domain_axes)
        return t.reshape(self.batch, 1 << n, dim_out, dim_in)


def _all_branch_tensor(
    p: Pattern, angle_sets: Sequence[Mapping[int, float]]
) -> np.ndarray:
    """(batch, 2^n, out, in) branch maps for each measurement-angle set."""
    if len(p.vertices) + len(p.inputs) + 1 > _MAX_TENSOR_AXES:
        raise SimulationError(
            f"{len(p.vertices)} qubits with {len(p.inputs)} inputs exceeds "
            "the dense tensor bound"
        )
    batch = len(angle_sets)
    eng = _TensorEngine(p.inputs, batch)
    for cmd in p.commands:
        if isinstance(cmd, Prepare):
            eng.add_qubit(cmd.qubit, plus_ket(cmd.angle))
        elif isinstance(cmd, Entangle):
            eng.apply_cz(cmd.a, cmd.b)
        elif isinstance(cmd, Measure):
            angles = [aset.get(cmd.qubit, cmd.angle) for aset in angle_sets]
            if all(a == angles[0] for a in angles):
                eng.measure_keep_branch(cmd.qubit, measurement_bras(angles[0]))
            else:
                eng.measure_keep_branch(
                    cmd.qubit, np.stack([measurement_bras(a) for a in angles])
                )
        elif isinstance(cmd, CorrectX):
            for s in cmd.signals:
                eng.controlled_1q(s, cmd.qubit, PAULI_X)
        elif isinstance(cmd, CorrectZ):
            for s in cmd.signals:
                eng.controlled_1q(s, cmd.qubit, PAULI_Z)
        elif isinstance(cmd, CorrectXPhase):
            gate = x_phase_gate(cmd.angle)
            for s in cmd.signals:
                eng.controlled_1q(s, cmd.qubit, gate)
    return eng.finalize(p.outputs)


def _check_trace_preserving(maps: np.ndarray, tolerance: float) -> float:
    """Max deviation of sum_s A_s^dag A_s from the identity."""
    total = np.einsum("sij,sik->jk", maps.conj(), maps)
    dev = float(np.max(np.abs(total - np.eye(total.shape[0]))))
    if dev > tolerance:
        raise SimulationError(
            f"branch maps violate trace preservation (deviation {dev:.3e})"
        )
    return dev


def enumerate_branches(
    p: Pattern,
    input_state: np.ndarray | None = None,
    max_measurements: int = DEFAULT_MAX_MEASUREMENTS,
    tolerance: float = DEFAULT_TOLERANCE,
) -> list[BranchReport]:
    """All 2^n branch maps of a runnable pattern.

    Verifies trace preservation of the family before returning.  When
    ``input_state`` (a normalized vector over the input space) is given,
    each report also carries that branch's probability.

    Raises
    ------
    SimulationError
        If the measurement count exceeds ``max_measurements`` or the
        branch family fails the trace-preservation check.
    """
    _runnable_or_raise(p)
    n = p.n_measurements
    if n > max_measurements:
        raise SimulationError(
            f"{n} measurements exceed the branch bound {max_measurements}"
        )
    maps = _all_branch_tensor(p, [p.measure_angles()])[0]
    _check_trace_preserving(maps, tolerance)
    if input_state is not None:
        input_state = np.asarray(input_state, dtype=complex)
        if input_state.shape != (maps.shape[2],):
            raise ValueError(
                f"input state must be a vector of length {maps.shape[2]}"
            )
    reports = []
    for s in range(1 << n):
        outcomes = format(s, f"0{n}b") if n else ""
        probability = None
        if input_state is not None:
            probability = float(np.linalg.norm(maps[s] @ input_state) ** 2)
        reports.append(BranchReport(outcomes, maps[s], probability))
    return reports


def _vectors_parallel(
    u: np.ndarray, v: np.ndarray, tolerance: float, scale: float
) -> float:
    """0.0 when parallel (or either negligible); else the relative defect."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu <= tolerance * scale or nv <= tolerance * scale:
        return 0.0
    return (nu * nv - abs(np.vdot(u, v))) / (nu * nv)


def _pair_witness(
    a: np.ndarray, b: np.ndarray, tolerance: float, scale: float
) -> tuple[float, np.ndarray] | None:
    """Probe input states; return (defect, probe) for the worst failure.

    Probing the basis states plus their pairwise real and imaginary
    combinations decides proportionality of the action on every input, the
    sense in which branch maps must agree for a deterministic pattern.
    Rank-one maps with a common range pass even though they may differ as
    matrices.
    """
    dim_in = a.shape[1]
    worst: tuple[float, np.ndarray] | None = None
    probes: list[np.ndarray] = [np.eye(dim_in, dtype=complex)[:, k] for k in range(dim_in)]
    for k in range(dim_in):
        for l in range(k + 1, dim_in):
            e_kl = np.zeros(dim_in, dtype=complex)
            e_kl[k] = 1.0
            e_kl[l] = 1.0
            probes.append(e_kl)
            e_kli = e_kl.copy()
            e_kli[l] = 1.0j
            probes.append(e_kli)
    for probe in probes:
        defect = _vectors_parallel(a @ probe, b @ probe, tolerance, scale)
        if defect > tolerance and (worst is None or defect > worst[0]):
            worst = (defect, probe / np.linalg.norm(probe))
    return worst


def _classify_maps(
    maps: np.ndarray, outcome_labels: Sequence[str], tolerance: float
) -> tuple[Classification, Witness | None]:
    n_branches = maps.shape[0]
    if n_branches <= 1:
        return Classification.STRONGLY_DETERMINISTIC, None
    scale = float(np.max(np.abs(maps))) or 1.0
    flat = maps.reshape(n_branches, -1)
    norms = np.linalg.norm(flat, axis=1)
    ref = int(np.argmax(norms))

    strong_dev = float(np.max(np.abs(maps - maps[ref])))
    if strong_dev < tolerance:
        return Classification.STRONGLY_DETERMINISTIC, None

    for s in range(n_branches):
        if s == ref or norms[s] <= tolerance * scale:
            continue
        hs_defect = (norms[ref] * norms[s] - abs(np.vdot(flat[ref], flat[s]))) / (
            norms[ref] * norms[s]
        )
        if hs_defect <= tolerance:
            continue
        failure = _pair_witness(maps[ref], maps[s], tolerance, scale)
        if failure is not None:
            defect, probe = failure
            return Classification.NOT_DETERMINISTIC, Witness(
                outcome_labels[ref], outcome_labels[s], probe, defect
            )
    return Classification.DETERMINISTIC, None


def classify_determinism(
    p: Pattern,
    angle_samples: int = 20,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
    max_measurements: int = DEFAULT_MAX_MEASUREMENTS,
) -> DeterminismVerdict:
    """Classify the branch maps of a pattern.

    Strongly deterministic means all branch maps are equal; deterministic
    means every pair acts identically up to a scalar on each input (zero
    maps count as proportional to everything).  ``uniform`` is decided by
    re-running the classification on ``angle_samples`` fresh uniformly
    random measurement-angle vectors over the same geometry and
    corrections, all evaluated in a single batched pass.
    """
    _runnable_or_raise(p)
    n = p.n_measurements
    if n > max_measurements:
        raise SimulationError(
            f"{n} measurements exceed the branch bound {max_measurements}"
        )
    base_angles = p.measure_angles()
    rng = np.random.default_rng(seed)
    angle_sets: list[Mapping[int, float]] = [base_angles]
    for _ in range(angle_samples):
        angle_sets.append(
            {q: float(rng.uniform(0.0, 2.0 * math.pi)) for q in base_angles}
        )
    tensor = _all_branch_tensor(p, angle_sets)
    labels = [format(s, f"0{n}b") if n else "" for s in range(1 << n)]

    classification, witness = _classify_maps(tensor[0], labels, tolerance)
    uniform = classification.is_deterministic
    for b in range(1, tensor.shape[0]):
        sample_class, _ = _classify_maps(tensor[b], labels, tolerance)
        if not sample_class.is_deterministic:
            uniform = False
            break
    return DeterminismVerdict(
        classification, uniform, witness, angle_samples, seed, tolerance
    )


def rescale_branch_map(report_or_map, n_measurements: int) -> np.ndarray:
    """Scale a branch map by 2^{n/2}.

    For a strongly deterministic pattern this turns any branch map into
    the realized isometry; raw branch maps are reported unscaled because
    the factor is meaningless without strong determinism.
    """
    m = report_or_map.branch_map if isinstance(report_or_map, BranchReport) else report_or_map
    return m * (2.0 ** (n_measurements / 2.0))


def realized_embedding(
    g: OpenGraphState,
    meas_angles: Mapping[int, float],
    prep_angles: Mapping[int, float] | None = None,
) -> np.ndarray:
    """Correction-free projection map of a geometry, rescaled by 2^{n/2}.

    Prepares every non-input qubit, applies all entanglers, and projects
    each measured qubit onto its outcome-0 bra.  On geometries with flow
    this equals every rescaled branch map of the synthesized pattern and
    is an isometry.
    """
    check = validate_graph(g)
    if not check.ok:
        raise PatternError("invalid graph: " + "; ".join(check.violations))
    missing = sorted(set(g.measured) - set(meas_angles))
    if missing:
        raise PatternError(f"measurement angles missing for {missing}")
    preps = {q: 0.0 for q in g.prepared}
    if prep_angles is not None:
        preps.update(prep_angles)
    eng = _TensorEngine(g.inputs, batch=1)
    for q in g.prepared:
        eng.add_qubit(q, plus_ket(preps[q]))
    for u, v in set(g.edges):
        eng.apply_cz(u, v)
    for q in g.measured:
        eng.contract_bra(q, measurement_bras(meas_angles[q])[0])
    tensor = eng.finalize(g.outputs)
    matrix = tensor[0, 0]
    return matrix * (2.0 ** (len(g.measured) / 2.0))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive trace-preserving map given by branch maps."""

    kraus: tuple[np.ndarray, ...]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out_dim = self.kraus[0].shape[0]
        result = np.zeros((out_dim, out_dim), dtype=complex)
        for a in self.kraus:
            result += a @ rho @ a.conj().T
        return result

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return self.apply(rho)


def kraus_map(reports: Iterable[BranchReport]) -> KrausChannel:
    """Channel rho -> sum_s A_s rho A_s^dag from one branch enumeration."""
    kraus = tuple(r.branch_map for r in reports)
    if not kraus:
        raise ValueError("no branch reports given")
    return KrausChannel(kraus)


def simulation_report(
    reports: Iterable[BranchReport], verdict: DeterminismVerdict
) -> dict:
    """Combined JSON document: branch maps, verdict, tolerance, seed."""
    return {
        "branches": [r.to_json_dict() for r in reports],
        "verdict": verdict.to_json_dict(),
        "tolerance": verdict.tolerance,
        "seed": verdict.seed,
    }


def max_deviation_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Entrywise distance between ``a`` and the best phase-aligned ``b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    overlap = np.vdot(b, a)
    if abs(overlap) < 1e-30:
        return float(max(np.max(np.abs(a)), np.max(np.abs(b))))
    phase = overlap / abs(overlap)
    return float(np.max(np.abs(a - phase * b)))


@dataclass(frozen=True)
class IdentityCheck:
    """Max deviation observed for one rewrite identity."""

    name: str
    max_deviation: float
    worst_angle: float
    passed: bool


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[IdentityCheck, ...]
    tolerance: float

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "ok": self.ok,
            "checks": [
                {
                    "name": c.name,
                    "max_deviation": c.max_deviation,
                    "worst_angle": c.worst_angle,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def _identity_deviations(alpha: float) -> dict[str, float]:
    """Deviations of every rewrite identity at one angle, worst case over s."""
    eye2 = np.eye(2, dtype=complex)
    bras = measurement_bras(alpha)
    plus = plus_ket(0.0)
    plus_alpha = plus_ket(alpha)
    xa = x_phase_gate(alpha)
    devs: dict[str, float] = {}

    def dev(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.max(np.abs(a - b)))

    # Anachronical Z on the measured qubit turns both outcome bras into the
    # outcome-0 bra: bra_s Z^s == bra_0 for s in {0, 1}.
    devs["anachronical-z-fuses-into-measurement"] = max(
        dev(bras[0], bras[0]), dev(bras[1] @ PAULI_Z, bras[0])
    )

    for s, tag in ((0, "s0"), (1, "s1")):
        xs = PAULI_X if s else eye2
        zs = PAULI_Z if s else eye2
        xas = xa if s else eye2
        zi = _kron(zs, eye2)
        zj = _kron(eye2, zs)
        xi = _kron(xs, eye2)
        xj = _kron(eye2, xs)
        xaj = _kron(eye2, xas)
        xai = _kron(xas, eye2)
        devs[f"z-conjugates-to-x-pair-through-cz-{tag}"] = dev(
            zi @ CZ_MATRIX, xj @ CZ_MATRIX @ xj
        )
        devs[f"x-through-cz-leaves-z-{tag}"] = dev(
            xi @ CZ_MATRIX, CZ_MATRIX @ zj @ xi
        )
        devs[f"z-commutes-with-cz-{tag}"] = dev(zi @ CZ_MATRIX, CZ_MATRIX @ zi)
        devs[f"x-fixes-plus-preparation-{tag}"] = dev(xs @ plus, plus)
        devs[f"phase-x-pair-through-cz-{tag}"] = dev(
            zi @ CZ_MATRIX, xaj @ CZ_MATRIX @ xaj
        )
        devs[f"phase-x-through-cz-leaves-z-{tag}"] = dev(
            xai @ CZ_MATRIX, CZ_MATRIX @ zj @ xai
        )
        devs[f"phase-x-fixes-matching-preparation-{tag}"] = dev(
            xas @ plus_alpha if s else plus_alpha, plus_alpha
        )
    return devs


def _pauli_identity_deviations() -> dict[str, float]:
    """Pauli special cases, checked at the projector level.

    An X before a right-angle measurement relabels outcomes exactly like a
    Z does, and an X before a zero-angle measurement is invisible.  The
    outcome bras themselves pick up unit phases under these rewrites, so
    the exact statement is about the measurement operators
    K K^dag-style, i.e. the projectors of each outcome.
    """
    devs: dict[str, float] = {}
    for s in (0, 1):
        xs = PAULI_X if s else np.eye(2, dtype=complex)
        zs = PAULI_Z if s else np.eye(2, dtype=complex)
        worst_y = 0.0
        worst_x = 0.0
        for outcome in (0, 1):
            bra_y = measurement_bras(math.pi / 2.0)[outcome]
            proj_y = np.outer(bra_y.conj(), bra_y)
            worst_y = max(
                worst_y,
                float(np.max(np.abs(xs @ proj_y @ xs - zs @ proj_y @ zs))),
            )
            bra_x = measurement_bras(0.0)[outcome]
            proj_x = np.outer(bra_x.conj(), bra_x)
            worst_x = max(
                worst_x, float(np.max(np.abs(xs @ proj_x @ xs - proj_x)))
            )
        devs[f"y-measurement-x-equals-z-s{s}"] = worst_y
        devs[f"x-measurement-absorbs-x-s{s}"] = worst_x
    return devs


def check_rewrite_identities(
    tolerance: float = EXACT_TOLERANCE,
    grid_points: int = 16,
    n_random: int = 50,
    seed: int = 7,
) -> IdentityReport:
    """Verify the correction-rewrite identities as matrix equalities.

    Sweeps a uniform angle grid plus random angles for the
    angle-parameterized identities, both signal values each, and checks
    the Pauli special cases at their exact (projector) level.  Failures
    are reported per identity with the offending angle.
    """
    rng = np.random.default_rng(seed)
    angles = [2.0 * math.pi * k / grid_points for k in range(grid_points)]
    angles += [float(a) for a in rng.uniform(0.0, 2.0 * math.pi, size=n_random)]

    worst: dict[str, tuple[float, float]] = {}
    for alpha in angles:
        for name, deviation in _identity_deviations(alpha).items():
            if name not in worst or deviation > worst[name][0]:
                worst[name] = (deviation, alpha)
    for name, deviation in _pauli_identity_deviations().items():
        worst[name] = (deviation, 0.0)

    checks = tuple(
        IdentityCheck(name, dev, angle, dev < tolerance)
        for name, (dev, angle) in sorted(worst.items())
    )
    return IdentityReport(checks, tolerance)
