"""Graph states with per-vertex local Clifford frames.

A state is stored as (graph, frame): the physical state is
(tensor_v frame[v]) applied to the canonical graph state
|G> = prod_{(i,j) in E} CZ_ij |+>^n.  Local complementation and single-qubit
Pauli measurements are graph/frame rewrites; a dense-amplitude oracle is
available for n <= 12 to verify everything.

Vertices carry stable integer labels that survive deletion, so plans that
refer to a vertex remain valid after other vertices are measured out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .pauli import (
    IDENTITY,
    HADAMARD,
    LocalClifford,
    PAULI_GATES,
    PAULI_MATRICES,
    SQRT_IZ,
    SQRT_MINUS_IX,
    SignedPauli,
    compose,
)

MAX_VERTICES = 24
DENSE_CAP = 12

_BASIS_STATES = {
    # (letter, outcome bit) -> normalized eigenvector, eigenvalue (-1)^bit
    ("Z", 0): np.array([1, 0], dtype=complex),
    ("Z", 1): np.array([0, 1], dtype=complex),
    ("X", 0): np.array([1, 1], dtype=complex) / np.sqrt(2),
    ("X", 1): np.array([1, -1], dtype=complex) / np.sqrt(2),
    ("Y", 0): np.array([1, 1j], dtype=complex) / np.sqrt(2),
    ("Y", 1): np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


class SizeCapError(ValueError):
    """Raised when an operation exceeds its supported vertex count."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph over labelled vertices, adjacency as bitsets."""

    vertices: tuple[int, ...]           # sorted labels
    adj: tuple[int, ...]                # adj[i] = bitmask of neighbours of vertices[i]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if not 1 <= n <= MAX_VERTICES:
            raise ValueError(f"vertex count must be in 1..{MAX_VERTICES}, got {n}")
        masks = {v: 0 for v in range(n)}
        seen = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        verts = tuple(range(n))
        return cls(verts, tuple(masks[v] for v in verts))

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, v: int) -> int:
        i = self.vertices.index(v) if v in self.vertices else -1
        if i < 0:
            raise ValueError(f"vertex {v} not present")
        return i

    def neighbors(self, v: int) -> tuple[int, ...]:
        mask = self.adj[self.index(v)]
        return tuple(u for u in self.vertices if mask >> u & 1)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[self.index(u)] >> v & 1)

    def edges(self) -> tuple[tuple[int, int], ...]:
        out = []
        for i, u in enumerate(self.vertices):
            for v in self.vertices:
                if v > u and self.adj[i] >> v & 1:
                    out.append((u, v))
        return tuple(out)

    def delete_vertex(self, v: int) -> "Graph":
        i = self.index(v)
        verts = self.vertices[:i] + self.vertices[i + 1:]
        mask_clear = ~(1 << v)
        adj = tuple(m & mask_clear for j, m in enumerate(self.adj) if j != i)
        return Graph(verts, adj)

    def toggle_neighborhood(self, v: int) -> "Graph":
        """Complement the edge set within the neighbourhood of v."""
        nbrs = self.neighbors(v)
        adj = list(self.adj)
        for a in nbrs:
            for b in nbrs:
                if b != a:
                    adj[self.index(a)] ^= 1 << b
        return Graph(self.vertices, tuple(adj))

    def connected_components(self) -> list[frozenset[int]]:
        remaining = set(self.vertices)
        comps = []
        while remaining:
            stack = [remaining.pop()]
            comp = set(stack)
            while stack:
                u = stack.pop()
                for w in self.neighbors(u):
                    if w in remaining:
                        remaining.remove(w)
                        comp.add(w)
                        stack.append(w)
            comps.append(frozenset(comp))
        return comps


@dataclass(frozen=True)
class PauliObservable:
    """Tensor-product Pauli observable over labelled vertices, with a sign."""

    letters: Mapping[int, str]
    sign: int = 1

    def on(self, vertices: Iterable[int]) -> list[str]:
        return [self.letters.get(v, "I") for v in vertices]


@dataclass(frozen=True)
class MeasurementRecord:
    vertex: int
    basis: str
    outcome: int
    byproduct: Mapping[int, str]     # remaining vertex -> Pauli letter absorbed into its frame
    probability: float


@dataclass(frozen=True)
class GraphState:
    """Graph + local Clifford frame; optionally tracks the global phase densely."""

    graph: Graph
    frame: Mapping[int, LocalClifford]
    phase_tracked: bool = False
    global_phase: complex = 1.0 + 0j

    def __post_init__(self):
        if set(self.frame) != set(self.graph.vertices):
            raise ValueError("frame must have exactly one entry per vertex")

    def with_frame(self, updates: Mapping[int, LocalClifford], phase: complex | None = None) -> "GraphState":
        frame = dict(self.frame)
        frame.update(updates)
        return GraphState(self.graph, frame, self.phase_tracked,
                          phase if phase is not None else self.global_phase)


def build_graph_state(n: int, edges: Iterable[tuple[int, int]],
                      phase_tracked: bool = False) -> GraphState:
    """Identity-frame graph state of the given edge list (0-based labels)."""
    g = Graph.from_edges(n, edges)
    return GraphState(g, {v: IDENTITY for v in g.vertices}, phase_tracked)


def _dense_graph_vector(graph: Graph) -> np.ndarray:
    n = graph.n
    vec = np.full(1 << n, 1 / np.sqrt(1 << n), dtype=complex)
    pos = {v: i for i, v in enumerate(graph.vertices)}
    for (u, v) in graph.edges():
        bu, bv = n - 1 - pos[u], n - 1 - pos[v]
        idx = np.arange(1 << n)
        mask = ((idx >> bu) & 1) & ((idx >> bv) & 1)
        vec[mask == 1] *= -1
    return vec


def _apply_single_qubit(vec: np.ndarray, n: int, qubit: int, mat: np.ndarray) -> np.ndarray:
    """Apply a 2x2 matrix to the given qubit position (0 = most significant)."""
    tensor = vec.reshape((2,) * n)
    tensor = np.moveaxis(tensor, qubit, 0)
    tensor = np.tensordot(mat, tensor, axes=([1], [0]))
    tensor = np.moveaxis(tensor, 0, qubit)
    return tensor.reshape(-1)


def to_dense(gs: GraphState) -> np.ndarray:
    """Amplitude vector of the state (qubit order = sorted vertex labels, big-endian)."""
    n = gs.graph.n
    if n > DENSE_CAP:
        raise SizeCapError(f"dense oracle capped at {DENSE_CAP} qubits, got {n}")
    vec = _dense_graph_vector(gs.graph)
    for i, v in enumerate(gs.graph.vertices):
        c = gs.frame[v]
        if c != IDENTITY:
            vec = _apply_single_qubit(vec, n, i, c.matrix)
    if gs.phase_tracked:
        vec = gs.global_phase * vec
    return vec


def expectation(vec: np.ndarray, obs: PauliObservable, vertices: Iterable[int]) -> float:
    """Exact <psi|O|psi> of a Pauli-product observable on a dense state."""
    vertices = tuple(vertices)
    n = len(vertices)
    if vec.shape != (1 << n,):
        raise ValueError("observable arity does not match state size")
    out = vec
    for i, v in enumerate(vertices):
        letter = obs.letters.get(v, "I")
        if letter != "I":
            out = _apply_single_qubit(out, n, i, PAULI_MATRICES[letter])
    val = obs.sign * np.vdot(vec, out)
    return float(val.real)


def _canonical_frame(graph: Graph, frame: dict[int, LocalClifford]) -> dict[int, LocalClifford]:
    """Gauge-fix the frame's Pauli layer modulo the graph stabilizer group.

    Multiplying the frame (on the right) by a stabilizer generator
    g_w = X_w Z_{N(w)} leaves the state invariant up to phase.  The unique
    gauge with no X/Y Pauli component is chosen, which makes repeated local
    complementation an exact involution on the frame.
    """
    from .pauli import pauli_layer
    x_support = [w for w in graph.vertices if pauli_layer(frame[w])[1] in ("X", "Y")]
    if not x_support:
        return frame
    frame = dict(frame)
    for w in x_support:
        frame[w] = compose(frame[w], PAULI_GATES["X"])
        for nb in graph.neighbors(w):
            frame[nb] = compose(frame[nb], PAULI_GATES["Z"])
    return frame


def _phase_corrected(gs_old: GraphState, gs_new: GraphState) -> GraphState:
    """Adjust gs_new's global phase so its dense form matches gs_old exactly."""
    if gs_old.graph.n > DENSE_CAP:
        raise SizeCapError("phase tracking requires the dense oracle (n <= 12)")
    old = to_dense(gs_old)
    new = to_dense(gs_new)
    ov = np.vdot(new, old)
    if abs(abs(ov) - 1) > 1e-9:
        raise AssertionError("states differ by more than a phase")
    return gs_new.with_frame({}, phase=gs_new.global_phase * ov / abs(ov))


def local_complement(gs: GraphState, v: int) -> GraphState:
    """Complement the neighbourhood of v; the physical state is unchanged."""
    nbrs = gs.graph.neighbors(v)
    new_graph = gs.graph.toggle_neighborhood(v)
    frame = dict(gs.frame)
    # |G> = U^+ |tau_v(G)> with U = sqrt(-iX)_v prod_n sqrt(iZ)_n, so the
    # frame absorbs U^+ on the right.
    frame[v] = compose(frame[v], SQRT_MINUS_IX.inverse())
    for n in nbrs:
        frame[n] = compose(frame[n], SQRT_IZ.inverse())
    frame = _canonical_frame(new_graph, frame)
    out = GraphState(new_graph, frame, gs.phase_tracked, gs.global_phase)
    if gs.phase_tracked:
        out = _phase_corrected(gs, out)
    return out


def measure_vertex(gs: GraphState, basis: str, v: int, outcome: int) -> tuple[GraphState, MeasurementRecord]:
    """Measure the physical qubit v in a Pauli basis, removing it from the graph.

    Returns the post-measurement state of the requested outcome branch and a
    record holding the graph-level byproduct Paulis that were merged into the
    remaining frames.
    """
    if basis not in ("X", "Y", "Z"):
        raise ValueError(f"basis must be X, Y or Z, got {basis!r}")
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    gs.graph.index(v)  # presence check

    work = gs
    while True:
        # Pull the physical basis back through the frame of v.
        letter, sign = work.frame[v].inverse().conjugate((basis, 1))
        nbrs = work.graph.neighbors(v)
        if letter == "Z":
            break
        if letter == "Y":
            work = local_complement(work, v)
        else:  # X
            if not nbrs:
                attainable = 0 if sign == 1 else 1
                if outcome != attainable:
                    raise ValueError(
                        f"outcome {outcome} has probability 0 for X-type "
                        f"measurement on isolated vertex {v}")
                graph = work.graph.delete_vertex(v)
                frame = _canonical_frame(graph, {u: work.frame[u] for u in graph.vertices})
                out = GraphState(graph, frame, gs.phase_tracked, work.global_phase)
                rec = MeasurementRecord(v, basis, outcome, {}, 1.0)
                return _finish(gs, out, rec, outcome)
            work = local_complement(work, min(nbrs))

    graph_bit = outcome ^ (sign == -1)
    graph = work.graph.delete_vertex(v)
    frame = {u: work.frame[u] for u in graph.vertices}
    byproduct: dict[int, str] = {}
    if graph_bit:
        for n in work.graph.neighbors(v):
            frame[n] = compose(frame[n], PAULI_GATES["Z"])
            byproduct[n] = "Z"
    frame = _canonical_frame(graph, frame)
    out = GraphState(graph, frame, gs.phase_tracked, work.global_phase)
    rec = MeasurementRecord(v, basis, outcome, byproduct, 0.5)
    return _finish(gs, out, rec, outcome)


def _finish(gs_in: GraphState, out: GraphState, rec: MeasurementRecord, outcome: int):
    if gs_in.phase_tracked:
        if gs_in.graph.n > DENSE_CAP:
            raise SizeCapError("phase tracking requires the dense oracle")
        projected = project_dense(to_dense(gs_in), gs_in.graph.vertices,
                                  {rec.vertex: (rec.basis, outcome)})
        new = to_dense(out)
        ov = np.vdot(new, projected)
        out = out.with_frame({}, phase=out.global_phase * ov / abs(ov))
    return out, rec


def project_dense(vec: np.ndarray, vertices: tuple[int, ...],
                  settings: Mapping[int, tuple[str, int]]) -> np.ndarray:
    """Project dense amplitudes onto basis outcomes of some qubits, renormalized.

    settings maps vertex -> (basis letter, outcome bit).  The measured qubits
    are removed; remaining qubit order follows the original label order.
    """
    n = len(vertices)
    tensor = vec.reshape((2,) * n)
    # contract measured qubits from highest position down so indices stay valid
    for i in sorted((vertices.index(v) for v in settings), reverse=True):
        basis, bit = settings[vertices[i]]
        e = _BASIS_STATES[(basis, bit)].conj()
        tensor = np.tensordot(e, np.moveaxis(tensor, i, 0), axes=([0], [0]))
    flat = tensor.reshape(-1)
    norm = np.linalg.norm(flat)
    if norm < 1e-12:
        raise ValueError("projection onto a probability-0 outcome")
    return flat / norm


def states_equal(gs1: GraphState, gs2: GraphState, up_to_global_phase: bool = True,
                 tol: float = 1e-10) -> bool:
    """Dense-oracle equality of two graph states on the same vertex set."""
    if gs1.graph.vertices != gs2.graph.vertices:
        return False
    if gs1.graph.n > DENSE_CAP:
        raise SizeCapError(f"states_equal capped at {DENSE_CAP} qubits")
    ov = np.vdot(to_dense(gs1), to_dense(gs2))
    if up_to_global_phase or not (gs1.phase_tracked and gs2.phase_tracked):
        return bool(abs(abs(ov) ** 2 - 1) <= tol)
    return bool(abs(ov - 1) <= tol)
