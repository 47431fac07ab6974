"""Conference key agreement protocols and asymptotic key rates.

Implements the N-partite BB84-style protocol (type-1 all-Z key rounds,
type-2 all-X parameter rounds) and the pairwise alternative where N-1 Bell
keys are XOR-combined into a conference key, together with the error
estimators and asymptotic rate formulas for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .graphstate import GraphState, to_dense, _apply_single_qubit
from .routing import ExtractionPlan, RoundSetting, byproduct_correction, compile_round_settings

_BASIS_ROTATIONS = {
    # maps basis eigenstates onto computational bits: row b = <e_b|
    "Z": np.eye(2, dtype=complex),
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2),
}


@dataclass(frozen=True)
class RoleAssignment:
    """Protocol roles over the network vertices."""

    alice: int
    bobs: tuple[int, ...]
    nonparticipants: tuple[int, ...] = ()

    def __post_init__(self):
        members = [self.alice, *self.bobs, *self.nonparticipants]
        if len(set(members)) != len(members):
            raise ValueError("roles must be disjoint")
        if len(self.bobs) < 1:
            raise ValueError("at least two participants required")

    @property
    def participants(self) -> tuple[int, ...]:
        return tuple(sorted((self.alice, *self.bobs)))


@dataclass
class RoundBatch:
    """Counts over corrected participant outcome strings for one setting."""

    setting: RoundSetting
    participants: tuple[int, ...]
    counts: dict[str, int]

    def __post_init__(self):
        n = len(self.participants)
        for s, c in self.counts.items():
            if len(s) != n:
                raise ValueError(f"outcome {s!r} does not match participant count {n}")
            if c < 0:
                raise ValueError("counts must be nonnegative")

    @property
    def total(self):
        return sum(self.counts.values())

    def marginal(self, subset: Sequence[int]) -> "RoundBatch":
        """Marginalize counts onto a subset of participants."""
        idx = [self.participants.index(v) for v in subset]
        out: dict[str, float] = {}
        for s, c in self.counts.items():
            key = "".join(s[i] for i in idx)
            out[key] = out.get(key, 0) + c
        return RoundBatch(self.setting, tuple(subset), out)


@dataclass(frozen=True)
class ErrorEstimates:
    pairwise_q: Mapping[tuple[int, int], float]
    qber: float
    qx: float
    alice_choice: int


@dataclass
class KeyRateReport:
    akr_n: float
    pairwise_rates: dict[str, float]
    akr_2: float
    ratio: float | None
    copies_per_bit: dict[str, int]
    qber: float
    qx: float
    alice_choice: int | None
    uncertainties: dict[str, float] = field(default_factory=dict)

    @property
    def secure_akr_n(self) -> float:
        return max(0.0, self.akr_n)

    @property
    def secure_akr_2(self) -> float:
        return max(0.0, self.akr_2)


def binary_entropy(x: float) -> float:
    """H(x) = -x log2 x - (1-x) log2 (1-x), with H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def pairwise_error(batch: RoundBatch, i: int, j: int) -> float:
    """Empirical Pr(bit_i != bit_j) over a type-1 batch; equals (1-<ZZ>)/2."""
    if i == j:
        raise ValueError("pairwise error needs two distinct participants")
    total = batch.total
    if total == 0:
        raise ValueError("empty batch")
    pi, pj = batch.participants.index(i), batch.participants.index(j)
    differ = sum(c for s, c in batch.counts.items() if s[pi] != s[pj])
    return differ / total


def estimate_qber(batch: RoundBatch) -> ErrorEstimates:
    """QBER with the Alice role chosen to minimize the worst pairwise error.

    Ties are broken by the lowest vertex label.  qx is left at 0 here; use
    estimate_qx on the type-2 batch and combine via error_estimates.
    """
    parts = batch.participants
    if len(parts) < 2:
        raise ValueError("need at least two participants")
    pairwise = {}
    for a in parts:
        for b in parts:
            if a < b:
                q = pairwise_error(batch, a, b)
                pairwise[(a, b)] = q
                pairwise[(b, a)] = q
    best_alice, best_q = None, None
    for alice in parts:
        worst = max(pairwise[(alice, b)] for b in parts if b != alice)
        if best_q is None or worst < best_q - 1e-15:
            best_alice, best_q = alice, worst
    return ErrorEstimates(pairwise_q=pairwise, qber=best_q, qx=0.0, alice_choice=best_alice)


def estimate_qx(batch: RoundBatch) -> float:
    """Q_X = (1 - <X parity>)/2 from a type-2 batch."""
    total = batch.total
    if total == 0:
        raise ValueError("empty batch")
    parity_sum = sum(c * (-1) ** (s.count("1") % 2) for s, c in batch.counts.items())
    return (1.0 - parity_sum / total) / 2.0


def error_estimates(type1: RoundBatch, type2: RoundBatch) -> ErrorEstimates:
    est = estimate_qber(type1)
    return ErrorEstimates(est.pairwise_q, est.qber, estimate_qx(type2), est.alice_choice)


def akr_n(qber: float, qx: float) -> float:
    """Asymptotic conference key rate of the multipartite protocol."""
    if not (0.0 <= qber <= 1.0 and 0.0 <= qx <= 1.0):
        raise ValueError("qber and qx must be in [0, 1]")
    return 1.0 - binary_entropy(qber) - binary_entropy(qx)


def akr_2(r_ab1: float, r_b2b3: float, r_ab2: float) -> float:
    """Conference rate of the pairwise protocol over the two-copy schedule.

    Any non-positive pairwise rate means no conference key can cross that
    link; the result is then 0.
    """
    if min(r_ab1, r_b2b3, r_ab2) <= 0.0:
        return 0.0
    return 1.0 / (1.0 / r_ab2 + max(1.0 / r_ab1, 1.0 / r_b2b3))


def pairwise_conference_rate(plan_rates: Sequence[Sequence[float]]) -> float:
    """General form of the two-copy schedule: one copy per plan and round,
    each plan limited by its slowest pairwise key."""
    total = 0.0
    for rates in plan_rates:
        if not rates or min(rates) <= 0.0:
            return 0.0
        total += max(1.0 / r for r in rates)
    return 1.0 / total


def xor_combine(keys: Sequence[str], links: Sequence[tuple[int, int]],
                reference: int) -> dict[int, str]:
    """Reconstruct the conference key at every participant by XOR-chaining.

    keys[k] is the pairwise key shared over links[k].  The reference user's
    incident key is the conference key; every other user recovers it by
    XOR-ing announced masks along a path of links.
    """
    if len(keys) != len(links):
        raise ValueError("one key per link required")
    length = {len(k) for k in keys}
    if len(length) > 1:
        raise ValueError("pairwise keys must have equal length")
    by_user: dict[int, list[tuple[int, str]]] = {}
    for (a, b), k in zip(links, keys):
        by_user.setdefault(a, []).append((b, k))
        by_user.setdefault(b, []).append((a, k))
    if reference not in by_user:
        raise ValueError("reference user has no incident link")
    conference = by_user[reference][0][1]

    def xor(a: str, b: str) -> str:
        return "".join("1" if x != y else "0" for x, y in zip(a, b))

    # BFS from the reference: each user's known key is the conference key
    # XORed with the accumulated announced masks along the path.
    recovered = {reference: conference}
    frontier = [reference]
    while frontier:
        nxt = []
        for u in frontier:
            for v, k in by_user[u]:
                if v not in recovered:
                    # user v holds key k with u; u announces k XOR (its key)
                    mask = xor(k, recovered[u])
                    recovered[v] = xor(k, mask)
                    nxt.append(v)
        frontier = nxt
    missing = set(by_user) - set(recovered)
    if missing:
        raise ValueError(f"links do not span users {sorted(missing)}")
    return recovered


# ---------------------------------------------------------------------------
# outcome distributions and simulation


def _network_state(plan: ExtractionPlan) -> np.ndarray:
    return to_dense(GraphState(plan.graph, dict(plan.preparation_frame)))


def outcome_distribution(plan: ExtractionPlan, round_type: str,
                         state: np.ndarray | None = None) -> dict[str, float]:
    """Exact distribution of byproduct-corrected participant outcome strings.

    state may be an amplitude vector or a density matrix of the full network;
    defaults to the plan's ideal network state.
    """
    setting = compile_round_settings(plan, round_type)
    if state is None:
        state = _network_state(plan)
    verts = plan.graph.vertices
    n = len(verts)
    if state.ndim == 1:
        vec = state
        for i, v in enumerate(verts):
            vec = _apply_single_qubit(vec, n, i, _BASIS_ROTATIONS[setting.per_vertex_basis[v]])
        probs = np.abs(vec) ** 2
    else:
        rho = state
        for i, v in enumerate(verts):
            u = _BASIS_ROTATIONS[setting.per_vertex_basis[v]]
            rho = _rotate_density(rho, n, i, u)
        probs = np.real(np.diag(rho))
    parts = plan.targets
    nonparts = plan.nonparticipants
    out: dict[str, float] = {}
    for idx in range(1 << n):
        p = probs[idx]
        if p < 1e-15:
            continue
        bits = {v: (idx >> (n - 1 - i)) & 1 for i, v in enumerate(verts)}
        flips = byproduct_correction(plan, {v: bits[v] for v in nonparts}, round_type)
        key = "".join(
            str(bits[u] ^ (setting.sign_convention[u] < 0) ^ flips[u]) for u in parts)
        out[key] = out.get(key, 0.0) + float(p)
    norm = sum(out.values())
    return {k: v / norm for k, v in out.items()}


def _rotate_density(rho: np.ndarray, n: int, qubit: int, u: np.ndarray) -> np.ndarray:
    dim = 1 << n
    tensor = rho.reshape((2,) * (2 * n))
    tensor = np.moveaxis(tensor, qubit, 0)
    tensor = np.tensordot(u, tensor, axes=([1], [0]))
    tensor = np.moveaxis(tensor, 0, qubit)
    tensor = np.moveaxis(tensor, n + qubit, 0)
    tensor = np.tensordot(u.conj(), tensor, axes=([1], [0]))
    tensor = np.moveaxis(tensor, 0, n + qubit)
    return tensor.reshape(dim, dim)


def simulate_protocol(plan: ExtractionPlan, n_rounds: int, seed: int,
                      type2_fraction: float = 0.5,
                      state: np.ndarray | None = None,
                      ) -> tuple[RoundBatch, RoundBatch]:
    """Sample corrected outcome counts for type-1 and type-2 rounds.

    Deterministic given the seed; the type-1 block is drawn first.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    if not 0.0 < type2_fraction < 1.0:
        raise ValueError("type2_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    n2 = int(round(n_rounds * type2_fraction))
    n1 = n_rounds - n2
    batches = []
    for round_type, rounds in (("type-1", n1), ("type-2", n2)):
        dist = outcome_distribution(plan, round_type, state)
        keys = sorted(dist)
        probs = np.array([dist[k] for k in keys])
        draws = rng.multinomial(rounds, probs / probs.sum())
        counts = {k: int(c) for k, c in zip(keys, draws) if c > 0}
        batches.append(RoundBatch(compile_round_settings(plan, round_type),
                                  plan.targets, counts))
    return batches[0], batches[1]


def analytic_estimates(plan: ExtractionPlan, state: np.ndarray | None = None,
                       ) -> ErrorEstimates:
    """Infinite-round QBER/Q_X of a plan on a (possibly noisy) network state."""
    d1 = outcome_distribution(plan, "type-1", state)
    d2 = outcome_distribution(plan, "type-2", state)
    s1 = compile_round_settings(plan, "type-1")
    s2 = compile_round_settings(plan, "type-2")
    b1 = RoundBatch(s1, plan.targets, d1)
    b2 = RoundBatch(s2, plan.targets, d2)
    return error_estimates(b1, b2)
