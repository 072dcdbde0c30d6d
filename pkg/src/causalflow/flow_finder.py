"""Flow search on open graph states.

Decides whether a geometry admits a flow, constructs a witnessing corrector
map together with its coarsest dependency order, and computes the depth.
The search is a plain backtracking enumeration; correctness is anchored by
:func:`brute_force_flow_oracle`, which re-derives existence exhaustively.

All functions are pure; independent searches may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Mapping, Sequence

from .graph_model import Flow, OpenGraphState, validate_flow

DEFAULT_ORACLE_BOUND = 7


@dataclass(frozen=True)
class LayeringOutcome:
    """Coarsest layering for a corrector map, or a witnessing cycle.

    Exactly one of ``levels`` and ``cycle`` is set.  ``cycle`` lists a
    vertex sequence ``v0 < v1 < ... < v0`` that the constraints force.
    """

    levels: dict[int, int] | None = None
    cycle: tuple[int, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.levels is not None


@dataclass(frozen=True)
class FlowSearchResult:
    """Result of a flow search: a validated flow and its depth, if found."""

    found: bool
    flow: Flow | None = None
    depth: int | None = None

    def to_json_dict(self) -> dict:
        data: dict = {"found": self.found}
        if self.found and self.flow is not None:
            data["flow"] = self.flow.to_json_dict()
            data["depth"] = self.depth
        return data


def _constraint_successors(
    g: OpenGraphState, f: Mapping[int, int]
) -> dict[int, set[int]]:
    """Strict 'later than' constraints induced by a corrector map.

    Every measured ``i`` forces ``f(i)`` and all other neighbors of
    ``f(i)`` later than ``i``; a loop vertex forces all its own neighbors
    later.
    """
    succ: dict[int, set[int]] = {v: set() for v in g.vertices}
    adjacency = g._adjacency
    for i, j in f.items():
        if i == j:
            succ[i].update(adjacency[i])
        else:
            succ[i].add(j)
            succ[i].update(adjacency[j] - {i})
    return succ


def _find_cycle(succ: Mapping[int, set[int]]) -> tuple[int, ...]:
    """Locate one directed cycle in the constraint relation."""
    color: dict[int, int] = {}
    stack: list[int] = []

    def visit(v: int) -> tuple[int, ...] | None:
        color[v] = 1
        stack.append(v)
        for w in sorted(succ.get(v, ())):
            if color.get(w, 0) == 1:
                return tuple(stack[stack.index(w):]) + (w,)
            if color.get(w, 0) == 0:
                found = visit(w)
                if found:
                    return found
        color[v] = 2
        stack.pop()
        return None

    for v in sorted(succ):
        if color.get(v, 0) == 0:
            cycle = visit(v)
            if cycle:
                return cycle
    raise AssertionError("no cycle present")


def dependency_order(g: OpenGraphState, f: Mapping[int, int]) -> LayeringOutcome:
    """Coarsest layering satisfying the flow conditions for a given ``f``.

    Builds the constraint relation induced by ``f`` and assigns each vertex
    the length of the longest constraint chain ending at it.  If the
    relation has a cycle, no valid order exists for this ``f`` and the
    cycle is reported instead.

    Parameters
    ----------
    g : OpenGraphState
        The geometry; ``f`` must map measured vertices to prepared
        neighbors (loops allowed here, legality is checked elsewhere).
    f : mapping int -> int
        Candidate corrector map.
    """
    succ = _constraint_successors(g, f)
    indegree = {v: 0 for v in g.vertices}
    for v, ws in succ.items():
        for w in ws:
            indegree[w] += 1
    levels = {v: 0 for v in g.vertices}
    queue = sorted(v for v, d in indegree.items() if d == 0)
    done = 0
    while queue:
        v = queue.pop()
        done += 1
        for w in succ[v]:
            if levels[v] + 1 > levels[w]:
                levels[w] = levels[v] + 1
            indegree[w] -= 1
            if indegree[w] == 0:
                queue.append(w)
    if done != len(g.vertices):
        return LayeringOutcome(cycle=_find_cycle(succ))
    return LayeringOutcome(levels=levels)


def _search(
    g: OpenGraphState, loop_candidates: AbstractSet[int]
) -> FlowSearchResult:
    """Backtracking search over injective corrector assignments.

    Measured vertices are assigned in ascending id order; candidates for
    each are its prepared neighbors (plus itself when a loop is allowed).
    Acyclicity of the partial constraint relation is rechecked after each
    assignment, pruning dead branches early.  The first complete assignment
    in this order is returned, so results are reproducible.
    """
    measured = list(g.measured)
    prepared = set(g.prepared)
    if len(measured) > len(prepared):
        return FlowSearchResult(found=False)
    adjacency = g._adjacency

    candidates: list[list[int]] = []
    for i in measured:
        opts = sorted(adjacency[i] & prepared)
        if i in loop_candidates and i in prepared:
            opts.append(i)
        if not opts:
            return FlowSearchResult(found=False)
        candidates.append(opts)

    assignment: dict[int, int] = {}
    used: set[int] = set()

    def acyclic() -> bool:
        return dependency_order(g, assignment).ok

    def backtrack(pos: int) -> bool:
        if pos == len(measured):
            return True
        i = measured[pos]
        for j in candidates[pos]:
            if j in used:
                continue
            assignment[i] = j
            used.add(j)
            if acyclic() and backtrack(pos + 1):
                return True
            del assignment[i]
            used.remove(j)
        return False

    if not backtrack(0):
        return FlowSearchResult(found=False)
    layering = dependency_order(g, assignment)
    assert layering.levels is not None
    loops = frozenset(i for i, j in assignment.items() if i == j)
    flow = Flow(assignment, layering.levels, loops)
    check = validate_flow(g, flow, allow_loops=bool(loops))
    if not check.ok:
        raise AssertionError(f"search produced an invalid flow: {check.violations}")
    return FlowSearchResult(found=True, flow=flow, depth=flow.depth)


def find_flow(g: OpenGraphState, allow_loops: bool = False) -> FlowSearchResult:
    """Find a flow on ``(G, I, O)`` with its coarsest dependency order.

    With ``allow_loops`` the corrector may fix any measured-and-prepared
    vertex (the Pauli-Y relaxation); loop-free flows are preferred when
    both exist.

    Returns
    -------
    FlowSearchResult
        ``found`` plus, when found, a flow that passes
        :func:`causalflow.graph_model.validate_flow` and its depth.
    """
    result = _search(g, frozenset())
    if result.found or not allow_loops:
        return result
    loop_candidates = frozenset(g.measured) & frozenset(g.prepared)
    return _search(g, loop_candidates)


def find_flow_with_loop_candidates(
    g: OpenGraphState, loop_candidates: AbstractSet[int]
) -> FlowSearchResult:
    """Flow search where only the given vertices may carry a loop.

    Loop-free flows are preferred; used by the Pauli-measurement rules
    where loops are legal exactly on the qubits measured at right angle.
    """
    result = _search(g, frozenset())
    if result.found:
        return result
    return _search(g, frozenset(loop_candidates))


def find_biflow(g: OpenGraphState) -> tuple[FlowSearchResult, FlowSearchResult]:
    """Search both ``(G, I, O)`` and the role-swapped ``(G, O, I)``.

    A bi-flow exists when both directions are found; the two results are
    independently valid, and a bi-flow forces ``|I| == |O|``.
    """
    return find_flow(g), find_flow(g.reversed())


class OracleSizeError(ValueError):
    """Raised when a graph exceeds the brute-force oracle bound."""


def brute_force_flow_oracle(
    g: OpenGraphState,
    allow_loops: bool = False,
    max_vertices: int = DEFAULT_ORACLE_BOUND,
) -> FlowSearchResult:
    """Exhaustive flow-existence oracle for small graphs.

    Enumerates every injective map from the measured set into the prepared
    set (plus loop choices when allowed), keeping those that satisfy the
    edge condition, and runs :func:`dependency_order` on each; a flow
    exists exactly when some candidate yields an acyclic constraint
    relation.  Deliberately independent of the backtracking search.
    """
    if len(g.vertices) > max_vertices:
        raise OracleSizeError(
            f"{len(g.vertices)} vertices exceeds oracle bound {max_vertices}"
        )
    measured = list(g.measured)
    prepared = sorted(g.prepared)
    if len(measured) > len(prepared):
        return FlowSearchResult(found=False)
    if not measured:
        levels = {v: 0 for v in g.vertices}
        return FlowSearchResult(True, Flow({}, levels), 1)
    adjacency = g._adjacency

    best: Flow | None = None

    def enumerate_maps(pos: int, current: dict[int, int], used: set[int]):
        nonlocal best
        if best is not None:
            return
        if pos == len(measured):
            layering = dependency_order(g, current)
            if layering.ok:
                assert layering.levels is not None
                loops = frozenset(i for i, j in current.items() if i == j)
                best = Flow(dict(current), layering.levels, loops)
            return
        i = measured[pos]
        for j in prepared:
            if j in used:
                continue
            legal = j in adjacency[i] or (allow_loops and j == i)
            if not legal:
                continue
            current[i] = j
            used.add(j)
            enumerate_maps(pos + 1, current, used)
            del current[i]
            used.remove(j)

    enumerate_maps(0, {}, set())
    if best is None:
        return FlowSearchResult(found=False)
    return FlowSearchResult(True, best, best.depth)


def enumerate_valid_layerings(
    g: OpenGraphState, f: Mapping[int, int], max_level: int | None = None
) -> Sequence[dict[int, int]]:
    """All level assignments (bounded) that satisfy the constraints of ``f``.

    Test helper for the coarsest-order minimality property: the layering
    from :func:`dependency_order` must have depth no larger than any
    assignment listed here.
    """
    from itertools import product

    vertices = list(g.vertices)
    bound = max_level if max_level is not None else len(vertices)
    succ = _constraint_successors(g, f)
    valid: list[dict[int, int]] = []
    for combo in product(range(bound), repeat=len(vertices)):
        levels = dict(zip(vertices, combo))
        if all(
            levels[w] > levels[v] for v, ws in succ.items() for w in ws
        ):
            valid.append(levels)
    return valid
