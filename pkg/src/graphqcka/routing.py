"""Search the LC orbit of a network graph for GHZ / Bell-pair extraction plans.

A plan is a sequence of (virtual) local complementations applied to the
network graph followed by single-qubit measurements on non-participating
vertices.  Because the complementations are never physically applied, every
plan compiles down to per-vertex measurement settings on the original
network state, plus outcome-conditioned Pauli corrections.

The search is brute force over orbit members and basis assignments; turning
a graph state into a specific GHZ state or set of Bell pairs by local
operations is NP-complete in general, so exhaustive search behind small
caps is the honest strategy.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graphstate import (
    Graph,
    GraphState,
    MeasurementRecord,
    SizeCapError,
    build_graph_state,
    local_complement,
    measure_vertex,
    project_dense,
    to_dense,
)
from .pauli import (
    HADAMARD,
    IDENTITY,
    LocalClifford,
    compose,
    from_name,
    pauli_layer,
    paulis_commute,
)

ORBIT_CAP = 12
DENSE_VERIFY_CAP = 10
NONPARTICIPANT_CAP = 6


@dataclass(frozen=True)
class ExtractionTask:
    """What to extract: a GHZ over a vertex set or disjoint Bell pairs."""

    kind: str                                   # "ghz" | "bell_multicast"
    participants: frozenset[int]
    nonparticipants: frozenset[int]
    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.kind not in ("ghz", "bell_multicast"):
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.participants & self.nonparticipants:
            raise ValueError("participants and nonparticipants must be disjoint")
        if self.kind == "ghz" and len(self.participants) < 2:
            raise ValueError("GHZ extraction needs at least 2 participants")
        if self.kind == "bell_multicast":
            seen: set[int] = set()
            for a, b in self.pairs:
                if a in seen or b in seen or a == b:
                    raise ValueError("Bell pairs must be disjoint")
                seen.update((a, b))
            if seen != set(self.participants):
                raise ValueError("pairs must cover exactly the participants")


@dataclass(frozen=True)
class RoundSetting:
    """Per-vertex physical measurement bases for one protocol round type."""

    round_type: str                              # "type-1" | "type-2"
    per_vertex_basis: Mapping[int, str]
    sign_convention: Mapping[int, int]           # vertex -> +1/-1 outcome-bit sign

    def basis_string(self, vertices: Sequence[int]) -> str:
        return "".join(self.per_vertex_basis[v] for v in vertices)


@dataclass(frozen=True)
class ExtractionPlan:
    """A verified recipe turning the network graph state into a target resource.

    The local complementations are virtual: together with the preparation
    frame of the network state they are folded into the physical measurement
    bases.  nonparticipant_bases holds the compiled physical letters; the
    logical (graph-rule) bases chosen by the plan are kept alongside.
    """

    graph: Graph
    kind: str                                    # "ghz" | "bell_multicast"
    targets: tuple[int, ...]                     # participants, sorted
    pairs: tuple[tuple[int, int], ...]           # for multicast plans
    lc_sequence: tuple[int, ...]
    nonparticipant_bases: Mapping[int, str]      # compiled physical basis letters
    nonparticipant_logical_bases: Mapping[int, str]
    participant_frame: Mapping[int, LocalClifford]
    byproduct_rule: Mapping[tuple[int, ...], Mapping[int, str]]
    preparation_frame: Mapping[int, LocalClifford]
    copies_required: int = 1

    @property
    def nonparticipants(self) -> tuple[int, ...]:
        return tuple(sorted(self.nonparticipant_bases))


class NoPlanFoundError(ValueError):
    """No extraction plan exists within the search caps."""


# ---------------------------------------------------------------------------
# orbit enumeration


def _lc_orbit_paths(g: Graph) -> dict[Graph, tuple[int, ...]]:
    """BFS closure of the labelled graph under local complementation.

    Returns each orbit member with its shortest (lexicographically least
    among shortest) complementation sequence from g.
    """
    if g.n > ORBIT_CAP:
        raise SizeCapError(f"orbit enumeration capped at {ORBIT_CAP} vertices")
    paths: dict[Graph, tuple[int, ...]] = {g: ()}
    queue = deque([g])
    while queue:
        cur = queue.popleft()
        for v in cur.vertices:
            if not cur.neighbors(v):
                continue  # no-op complementation
            nxt = cur.toggle_neighborhood(v)
            if nxt not in paths:
                paths[nxt] = paths[cur] + (v,)
                queue.append(nxt)
    return paths


def lc_orbit(g: Graph) -> set[Graph]:
    """All labelled graphs reachable from g by local complementations."""
    return set(_lc_orbit_paths(g))


# ---------------------------------------------------------------------------
# plan realization


def _star_reduction(residual: Graph) -> tuple[tuple[int, ...], int] | None:
    """LC sequence turning the residual graph into a star, plus the center.

    Returns None if the residual is not LC-equivalent to a star (i.e. the
    post-measurement state is not GHZ-type).
    """
    if len(residual.vertices) == 1:
        return (), residual.vertices[0]
    best = None
    for member, path in _lc_orbit_paths(residual).items():
        degs = {v: len(member.neighbors(v)) for v in member.vertices}
        n = member.n
        centers = [v for v, d in degs.items() if d == n - 1]
        leaves_ok = sum(1 for d in degs.values() if d == 1) == n - 1
        if n == 2:
            if degs[member.vertices[0]] == 1:
                cand = (path, member.vertices[0])
            else:
                continue
        elif centers and leaves_ok:
            cand = (path, centers[0])
        else:
            continue
        key = (len(cand[0]), cand[0], cand[1])
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1] if best else None


def _measure_branch(gs: GraphState, logical_bases: Mapping[int, str],
                    outcomes: Mapping[int, int],
                    ) -> tuple[GraphState, dict[int, str]] | None:
    """Measure vertices in label order, each in its logical (graph-rule) basis.

    The physical basis is the logical one conjugated through the vertex frame
    at measurement time; outcomes are physical bits.  Returns the remaining
    state and the compiled physical letters, or None when a requested outcome
    has probability zero and its counterpart also fails.
    """
    physical: dict[int, str] = {}
    for v in sorted(logical_bases):
        letter, _ = gs.frame[v].conjugate((logical_bases[v], 1))
        physical[v] = letter
        want = outcomes[v]
        try:
            gs, _ = measure_vertex(gs, letter, v, want)
        except ValueError:
            try:
                gs, _ = measure_vertex(gs, letter, v, 1 - want)
            except ValueError:
                return None
    return gs, physical


def _logical_target_vector(plan_kind: str, targets: tuple[int, ...],
                           pairs: tuple[tuple[int, int], ...], center: int | None) -> np.ndarray:
    """Dense logical resource: N-GHZ over targets, or a tensor of Bell pairs."""
    n = len(targets)
    vec = np.zeros(1 << n, dtype=complex)
    if plan_kind == "ghz":
        vec[0] = vec[-1] = 1 / np.sqrt(2)
        return vec
    vec = np.array([1.0], dtype=complex)
    pos = {v: i for i, v in enumerate(targets)}
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    full = np.zeros(1 << n, dtype=complex)
    for idx in range(1 << n):
        amp = 1.0
        for a, b in pairs:
            ba = (idx >> (n - 1 - pos[a])) & 1
            bb = (idx >> (n - 1 - pos[b])) & 1
            amp *= (1 / np.sqrt(2)) if ba == bb else 0.0
        full[idx] = amp
    return full


def realize_plan(graph: Graph, kind: str, participants: Iterable[int],
                 lc_sequence: Sequence[int], logical_bases: Mapping[int, str],
                 pairs: Sequence[tuple[int, int]] = (), verify: bool = True,
                 preparation_frame: Mapping[int, LocalClifford] | None = None,
                 ) -> ExtractionPlan | None:
    """Build the full plan (frames, byproduct table) for a candidate recipe.

    logical_bases gives the graph-rule basis per nonparticipant; the compiled
    physical letters are derived from the frames.  Returns None when the
    recipe does not produce the requested resource.
    """
    targets = tuple(sorted(participants))
    pairs = tuple(tuple(sorted(p)) for p in pairs)
    nonparts = sorted(logical_bases)
    prep = dict(preparation_frame) if preparation_frame else {
        v: IDENTITY for v in graph.vertices}

    gs = GraphState(graph, prep)
    for v in lc_sequence:
        gs = local_complement(gs, v)

    ref = _measure_branch(gs, logical_bases, {v: 0 for v in nonparts})
    if ref is None:
        return None
    gs_ref, physical_bases = ref
    residual = gs_ref.graph
    if residual.vertices != targets:
        return None

    if kind == "ghz":
        if len(residual.connected_components()) != 1:
            return None
        red = _star_reduction(residual)
        if red is None:
            return None
        star_path, center = red
    else:
        comps = {frozenset(p) for p in pairs}
        if {frozenset(c) for c in residual.connected_components()} != comps:
            return None
        star_path, center = (), None

    def participant_frames(gs_branch: GraphState) -> dict[int, LocalClifford]:
        for v in star_path:
            gs_branch = local_complement(gs_branch, v)
        frames = {}
        if kind == "ghz":
            for u in targets:
                f = gs_branch.frame[u]
                frames[u] = f if u == center else compose(f, HADAMARD)
        else:
            for a, b in pairs:
                frames[a] = gs_branch.frame[a]
                frames[b] = compose(gs_branch.frame[b], HADAMARD)
        return frames

    frame_ref = participant_frames(gs_ref)

    byproduct_rule: dict[tuple[int, ...], dict[int, str]] = {}
    branch_frames: dict[tuple[int, ...], dict[int, LocalClifford]] = {}
    for combo in itertools.product((0, 1), repeat=len(nonparts)):
        branch = _measure_branch(gs, logical_bases, dict(zip(nonparts, combo)))
        if branch is None:
            return None
        gs_b, _ = branch
        frames_b = participant_frames(gs_b)
        rule: dict[int, str] = {}
        for u in targets:
            q = compose(frame_ref[u].inverse(), frames_b[u])
            rep, letter = pauli_layer(q)
            if rep != IDENTITY:
                return None  # branches differ by more than a Pauli: not a valid plan
            rule[u] = letter
        byproduct_rule[combo] = rule
        branch_frames[combo] = frames_b

    plan = ExtractionPlan(
        graph=graph, kind=kind, targets=targets, pairs=pairs,
        lc_sequence=tuple(lc_sequence),
        nonparticipant_bases=physical_bases,
        nonparticipant_logical_bases=dict(logical_bases),
        participant_frame=frame_ref,
        byproduct_rule=byproduct_rule,
        preparation_frame=prep,
    )
    if verify and graph.n <= DENSE_VERIFY_CAP:
        if not verify_plan_dense(plan, branch_frames):
            return None
    return plan


def verify_plan_dense(plan: ExtractionPlan,
                      branch_frames: Mapping[tuple[int, ...], Mapping[int, LocalClifford]] | None = None,
                      tol: float = 1e-10) -> bool:
    """Dense-oracle check: every nonparticipant outcome branch of the plan
    leaves the participants in the ideal resource state up to the recorded
    frames and byproducts."""
    graph = plan.graph
    if graph.n > DENSE_VERIFY_CAP:
        raise SizeCapError("dense plan verification capped")
    network = to_dense(GraphState(graph, dict(plan.preparation_frame)))
    nonparts = plan.nonparticipants
    target_vec = _logical_target_vector(plan.kind, plan.targets, plan.pairs, None)
    n_t = len(plan.targets)
    for combo, rule in plan.byproduct_rule.items():
        settings = {v: (plan.nonparticipant_bases[v], bit)
                    for v, bit in zip(nonparts, combo)}
        try:
            proj = project_dense(network, graph.vertices, settings)
        except ValueError:
            continue  # probability-0 branch
        expect = target_vec
        for i, u in enumerate(plan.targets):
            from .pauli import PAULI_GATES
            e = compose(plan.participant_frame[u], PAULI_GATES[rule[u]])
            from .graphstate import _apply_single_qubit
            expect = _apply_single_qubit(expect, n_t, i, e.matrix)
        fid = abs(np.vdot(proj, expect)) ** 2
        if abs(fid - 1) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# plan search


def _search_plans(g: Graph, kind: str, participants: frozenset[int],
                  pairs: tuple[tuple[int, int], ...] = (),
                  preparation_frame: Mapping[int, LocalClifford] | None = None):
    nonparts = sorted(set(g.vertices) - participants)
    if len(nonparts) > NONPARTICIPANT_CAP:
        raise SizeCapError(
            f"search capped at {NONPARTICIPANT_CAP} nonparticipants, got {len(nonparts)}")
    orbit = sorted(_lc_orbit_paths(g).items(), key=lambda kv: (len(kv[1]), kv[1]))
    basis_assignments = sorted(
        itertools.product("ZXY", repeat=len(nonparts)),
        key=lambda bs: (sum(b != "Z" for b in bs), bs))
    for member, path in orbit:
        for bases in basis_assignments:
            plan = realize_plan(
                g, kind, participants, path, dict(zip(nonparts, bases)), pairs,
                verify=True, preparation_frame=preparation_frame)
            if plan is not None:
                return plan
    return None


def find_ghz_plan(g: Graph, targets: Iterable[int],
                  preparation_frame: Mapping[int, LocalClifford] | None = None,
                  ) -> ExtractionPlan | None:
    """Shortest-LC plan extracting a GHZ state over the target vertices."""
    targets = frozenset(targets)
    if not targets <= set(g.vertices):
        raise ValueError("targets must be vertices of the graph")
    if len(targets) < 2:
        raise ValueError("GHZ extraction needs at least 2 targets")
    return _search_plans(g, "ghz", targets, preparation_frame=preparation_frame)


def find_bell_multicast_plan(g: Graph, pairs: Iterable[tuple[int, int]],
                             preparation_frame: Mapping[int, LocalClifford] | None = None,
                             ) -> ExtractionPlan | None:
    """Plan leaving exactly the requested disjoint Bell pairs from one copy."""
    pairs = tuple(tuple(sorted(p)) for p in pairs)
    participants = frozenset(v for p in pairs for v in p)
    if len(participants) != 2 * len(pairs):
        raise ValueError("pairs must be disjoint")
    if not participants <= set(g.vertices):
        raise ValueError("pair vertices must belong to the graph")
    return _search_plans(g, "bell_multicast", participants, pairs,
                         preparation_frame=preparation_frame)


# ---------------------------------------------------------------------------
# compilation and accounting


def compile_round_settings(plan: ExtractionPlan, round_type: str) -> RoundSetting:
    """Per-vertex physical bases realizing the nominal protocol bases.

    Type-1 measures the logical Z of every participant, type-2 the logical X;
    both are conjugated through the participant frames.  Nonparticipants
    always measure their plan basis.
    """
    if round_type not in ("type-1", "type-2"):
        raise ValueError("round_type must be 'type-1' or 'type-2'")
    logical = "Z" if round_type == "type-1" else "X"
    bases: dict[int, str] = {}
    signs: dict[int, int] = {}
    for u in plan.targets:
        letter, sign = plan.participant_frame[u].conjugate((logical, 1))
        bases[u] = letter
        signs[u] = sign
    for v, b in plan.nonparticipant_bases.items():
        bases[v] = b
        signs[v] = 1
    return RoundSetting(round_type, bases, signs)


def byproduct_correction(plan: ExtractionPlan, nonparticipant_outcomes: Mapping[int, int],
                         round_type: str = "type-1") -> dict[int, int]:
    """Outcome-bit flip mask for the participants, given nonparticipant bits.

    A recorded Pauli byproduct flips a participant's bit exactly when it
    anticommutes with that participant's logical measurement basis.
    """
    nonparts = plan.nonparticipants
    missing = set(nonparts) - set(nonparticipant_outcomes)
    if missing:
        raise ValueError(f"missing outcomes for nonparticipants {sorted(missing)}")
    logical = "Z" if round_type == "type-1" else "X"
    combo = tuple(nonparticipant_outcomes[v] for v in nonparts)
    rule = plan.byproduct_rule[combo]
    return {u: 0 if paulis_commute(rule[u], logical) else 1 for u in plan.targets}


def network_use_accounting(plans: Sequence[ExtractionPlan], protocol: str) -> int:
    """Copies of the network state consumed per conference round."""
    if protocol == "NQKD":
        ghz = [p for p in plans if p.kind == "ghz"]
        if len(ghz) != 1:
            raise ValueError("NQKD needs exactly one GHZ plan")
        return ghz[0].copies_required
    if protocol != "2QKD":
        raise ValueError("protocol must be 'NQKD' or '2QKD'")
    bell = [p for p in plans if p.kind == "bell_multicast"]
    if not bell:
        raise ValueError("2QKD needs Bell multicast plans")
    participants = sorted({v for p in bell for v in p.targets})
    links = [pair for p in bell for pair in p.pairs]
    # the pairwise keys must span the participant group
    comp = {v: v for v in participants}

    def find(v):
        while comp[v] != v:
            comp[v] = comp[comp[v]]
            v = comp[v]
        return v

    for a, b in links:
        comp[find(a)] = find(b)
    roots = {find(v) for v in participants}
    if len(links) < len(participants) - 1 or len(roots) != 1:
        raise ValueError("pairwise links do not span the participants")
    return sum(p.copies_required for p in bell)


def circuit_success_probability(gates: Sequence[str]) -> Fraction:
    """Post-selection success probability: 1/2 per fusion gate, 1/9 per CZ."""
    if not gates:
        raise ValueError("gate list must be nonempty")
    prob = Fraction(1)
    for gate in gates:
        if gate == "fusion":
            prob *= Fraction(1, 2)
        elif gate == "cz":
            prob *= Fraction(1, 9)
        else:
            raise ValueError(f"unknown gate kind {gate!r}")
    return prob


# ---------------------------------------------------------------------------
# serialization


def plan_to_json(plan: ExtractionPlan) -> str:
    doc = {
        "kind": plan.kind,
        "graph": {"n": plan.graph.n, "vertices": list(plan.graph.vertices),
                  "edges": [list(e) for e in plan.graph.edges()]},
        "targets": list(plan.targets),
        "pairs": [list(p) for p in plan.pairs],
        "lc_sequence": list(plan.lc_sequence),
        "nonparticipant_bases": {str(v): b for v, b in sorted(plan.nonparticipant_bases.items())},
        "nonparticipant_logical_bases": {
            str(v): b for v, b in sorted(plan.nonparticipant_logical_bases.items())},
        "participant_frame": {str(v): c.name for v, c in sorted(plan.participant_frame.items())},
        "preparation_frame": {str(v): c.name for v, c in sorted(plan.preparation_frame.items())},
        "byproduct_rule": {
            "".join(map(str, combo)): {str(u): letter for u, letter in sorted(rule.items())}
            for combo, rule in sorted(plan.byproduct_rule.items())},
        "copies_required": plan.copies_required,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def plan_from_json(text: str) -> ExtractionPlan:
    doc = json.loads(text)
    graph = Graph.from_edges(doc["graph"]["n"],
                             [tuple(e) for e in doc["graph"]["edges"]])
    return ExtractionPlan(
        graph=graph,
        kind=doc["kind"],
        targets=tuple(doc["targets"]),
        pairs=tuple(tuple(p) for p in doc["pairs"]),
        lc_sequence=tuple(doc["lc_sequence"]),
        nonparticipant_bases={int(v): b for v, b in doc["nonparticipant_bases"].items()},
        nonparticipant_logical_bases={
            int(v): b for v, b in doc["nonparticipant_logical_bases"].items()},
        participant_frame={int(v): from_name(name)
                           for v, name in doc["participant_frame"].items()},
        preparation_frame={int(v): from_name(name)
                           for v, name in doc["preparation_frame"].items()},
        byproduct_rule={tuple(int(c) for c in combo): {int(u): l for u, l in rule.items()}
                        for combo, rule in doc["byproduct_rule"].items()},
        copies_required=doc["copies_required"],
    )
