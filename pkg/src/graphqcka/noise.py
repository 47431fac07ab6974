"""Noise channels, pump-power trade-off sweeps, and statistical uncertainty.

Density operators are plain numpy arrays validated on construction.  The
channel zoo is deliberately small: per-qubit depolarizing and dephasing,
global white noise, and a photonic-pump model in which higher pump power
raises the raw generation rate (~p^3 for a three-photon-pair scheme) while
also raising multi-pair contamination, modelled as white-noise admixture
w(p) = kappa*p / (1 + kappa*p).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from .graphstate import SizeCapError
from .keyrates import (RoundBatch, _rotate_density, analytic_estimates, akr_n,
                       error_estimates, outcome_distribution)
from .pauli import PAULI_MATRICES
from .routing import ExtractionPlan

DENSITY_CAP = 8

_EIG_FLOOR = -1e-10


@dataclass(frozen=True)
class DensityOperator:
    """Validated density matrix over a tuple of vertex labels."""

    matrix: np.ndarray
    vertices: tuple[int, ...]

    def __post_init__(self):
        n = len(self.vertices)
        if n > DENSITY_CAP:
            raise SizeCapError(f"density operations capped at {DENSITY_CAP} qubits")
        dim = 1 << n
        m = self.matrix
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} does not match {n} qubits")
        if not np.allclose(m, m.conj().T, atol=1e-9):
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-9:
            raise ValueError("density matrix must have unit trace")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < _EIG_FLOOR:
            raise ValueError(f"density matrix not positive semidefinite "
                             f"(min eigenvalue {eigs.min():.3e})")

    @property
    def n(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class NoiseModel:
    """Per-qubit and global noise parameters, keyed by vertex label.

    depolarizing[v] = lambda replaces qubit v by the maximally mixed state
    with probability lambda; dephasing[v] / bit_flip[v] apply Z / X with the
    given probability; white_noise mixes the full state with the identity.  The pump model maps
    power p (mW) to a raw rate rate_coefficient * p**3 and a white-noise
    weight kappa*p / (1 + kappa*p).
    """

    depolarizing: Mapping[int, float] = field(default_factory=dict)
    dephasing: Mapping[int, float] = field(default_factory=dict)
    bit_flip: Mapping[int, float] = field(default_factory=dict)
    white_noise: float = 0.0
    pump_rate_coefficient: float = 1.41e-8
    pump_contamination_coefficient: float = 4.0e-3

    def __post_init__(self):
        for name, params in (("depolarizing", self.depolarizing),
                             ("dephasing", self.dephasing),
                             ("bit_flip", self.bit_flip)):
            for v, val in params.items():
                if not 0.0 <= val <= 1.0:
                    raise ValueError(f"{name}[{v}] = {val} outside [0, 1]")
        if not 0.0 <= self.white_noise <= 1.0:
            raise ValueError("white_noise must be in [0, 1]")

    def white_noise_at_power(self, power_mw: float) -> float:
        kp = self.pump_contamination_coefficient * power_mw
        return kp / (1.0 + kp)

    def raw_rate_at_power(self, power_mw: float) -> float:
        return self.pump_rate_coefficient * power_mw ** 3


def _single_qubit_channel(rho: np.ndarray, n: int, qubit: int,
                          kraus_weights: Sequence[tuple[float, np.ndarray]]) -> np.ndarray:
    out = np.zeros_like(rho)
    for w, mat in kraus_weights:
        if w == 0.0:
            continue
        out += w * _rotate_density(rho, n, qubit, mat)
    return out


def apply_noise(state: np.ndarray, vertices: Sequence[int],
                model: NoiseModel) -> DensityOperator:
    """Push a pure state (or density matrix) through the model's channels.

    Channel order: per-qubit depolarizing, per-qubit dephasing, then global
    white noise.  All channels here commute pairwise on the Pauli-diagonal
    level, so the order is a convention rather than a physical claim.
    """
    vertices = tuple(vertices)
    n = len(vertices)
    if n > DENSITY_CAP:
        raise SizeCapError(f"density operations capped at {DENSITY_CAP} qubits")
    if state.ndim == 1:
        rho = np.outer(state, state.conj())
    else:
        rho = state.astype(complex)
    eye = PAULI_MATRICES["I"]
    for i, v in enumerate(vertices):
        lam = _param(model.depolarizing, v)
        if lam:
            rho = _single_qubit_channel(rho, n, i, [
                (1.0 - 3.0 * lam / 4.0, eye),
                (lam / 4.0, PAULI_MATRICES["X"]),
                (lam / 4.0, PAULI_MATRICES["Y"]),
                (lam / 4.0, PAULI_MATRICES["Z"]),
            ])
        p = _param(model.dephasing, v)
        if p:
            rho = _single_qubit_channel(rho, n, i, [
                (1.0 - p, eye), (p, PAULI_MATRICES["Z"])])
        q = _param(model.bit_flip, v)
        if q:
            rho = _single_qubit_channel(rho, n, i, [
                (1.0 - q, eye), (q, PAULI_MATRICES["X"])])
    if model.white_noise:
        dim = 1 << n
        rho = (1.0 - model.white_noise) * rho + model.white_noise * np.eye(dim) / dim
    return DensityOperator(rho, vertices)


def _param(params: Mapping[int, float], v: int) -> float:
    return float(params.get(v, 0.0))


def expectation_mixed(rho: DensityOperator, letters: Mapping[int, str]) -> float:
    """Tr(rho * O) for a Pauli-product observable given as vertex -> letter."""
    unknown = set(letters) - set(rho.vertices)
    if unknown:
        raise ValueError(f"observable acts on unknown vertices {sorted(unknown)}")
    op = np.array([[1.0]], dtype=complex)
    for v in rho.vertices:
        op = np.kron(op, PAULI_MATRICES[letters.get(v, "I")])
    return float(np.real(np.trace(rho.matrix @ op)))


# ---------------------------------------------------------------------------
# pump-power sweep


@dataclass
class PumpSweepResult:
    powers: np.ndarray
    raw_rates: np.ndarray
    white_noise: np.ndarray
    akr: np.ndarray
    key_rates: np.ndarray
    optimum_power: float
    optimum_rate: float


def pump_sweep(plan: ExtractionPlan, model: NoiseModel,
               powers: Sequence[float]) -> PumpSweepResult:
    """Secret-bits-per-second versus pump power for one extraction plan.

    The raw generation rate grows as p^3 while the white-noise weight w(p)
    degrades the AKR monotonically, so the product has an interior optimum.
    """
    from .graphstate import GraphState, to_dense

    powers = np.asarray(list(powers), dtype=float)
    if powers.size < 3:
        raise ValueError("sweep needs at least three power samples")
    vec = to_dense(GraphState(plan.graph, dict(plan.preparation_frame)))
    raw = model.raw_rate_at_power(powers)
    wn = np.array([model.white_noise_at_power(p) for p in powers])
    akrs = np.empty_like(powers)
    for k, w in enumerate(wn):
        rho = apply_noise(vec, plan.graph.vertices, replace(model, white_noise=float(w)))
        est = analytic_estimates(plan, rho.matrix)
        akrs[k] = akr_n(est.qber, est.qx)
    keyrates = raw * np.maximum(akrs, 0.0)
    best = int(np.argmax(keyrates))
    return PumpSweepResult(powers, raw, wn, akrs, keyrates,
                           float(powers[best]), float(keyrates[best]))


# ---------------------------------------------------------------------------
# Poisson Monte Carlo


@dataclass
class MonteCarloResult:
    point_estimate: float
    mean: float
    std: float
    n_samples: int
    n_rejected: int
    seed: int


def poisson_mc(batches: Mapping[str, RoundBatch],
               statistic: Callable[[Mapping[str, RoundBatch]], float],
               n_samples: int, seed: int) -> MonteCarloResult:
    """Uncertainty of a counts statistic under independent Poisson resampling.

    Every count is replaced by a Poisson draw with its observed value as the
    mean; samples on which the statistic is undefined (e.g. a batch resampled
    to zero total) are rejected and counted.  Fully deterministic in the seed:
    draws happen in sorted batch/outcome order, one sample at a time.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    point = statistic(batches)
    rng = np.random.default_rng(seed)
    names = sorted(batches)
    values = []
    rejected = 0
    for _ in range(n_samples):
        resampled = {}
        for name in names:
            b = batches[name]
            counts = {k: int(rng.poisson(c)) for k, c in sorted(b.counts.items())}
            resampled[name] = RoundBatch(b.setting, b.participants, counts)
        try:
            values.append(statistic(resampled))
        except (ValueError, ZeroDivisionError):
            rejected += 1
    if not values:
        raise ValueError("all Monte Carlo samples were rejected")
    arr = np.asarray(values)
    return MonteCarloResult(point_estimate=float(point), mean=float(arr.mean()),
                            std=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                            n_samples=n_samples, n_rejected=rejected, seed=seed)


# ---------------------------------------------------------------------------
# calibration


@dataclass
class CalibrationResult:
    model: NoiseModel
    residual: float
    converged: bool


def calibrate_to_targets(plans: Mapping[str, ExtractionPlan],
                         targets: Mapping[str, tuple[float, float]],
                         noisy_vertices: Sequence[int] | None = None,
                         channels: Sequence[str] = ("depolarizing", "dephasing",
                                                    "bit_flip"),
                         max_evaluations: int = 400,
                         ) -> CalibrationResult:
    """Fit per-qubit depolarizing/dephasing so each plan's analytic errors
    match target (QBER, Q_X) pairs.

    All plans must share one network graph; the fitted channels act on that
    network state, so every extracted resource inherits correlated noise.
    noisy_vertices restricts which qubits carry free parameters (default:
    all network vertices); channels restricts which channel families are
    fitted.
    """
    from .graphstate import GraphState, to_dense

    if set(targets) - set(plans):
        raise ValueError("every target needs a matching plan")
    ref = next(iter(plans.values()))
    for p in plans.values():
        if p.graph != ref.graph or p.preparation_frame != ref.preparation_frame:
            raise ValueError("all plans must share one network state")
    verts = ref.graph.vertices
    if noisy_vertices is None:
        noisy_vertices = verts
    noisy_vertices = tuple(noisy_vertices)
    vec = to_dense(GraphState(ref.graph, dict(ref.preparation_frame)))

    bad = set(channels) - {"depolarizing", "dephasing", "bit_flip"}
    if bad or not channels:
        raise ValueError(f"unknown channels {sorted(bad)}")

    def build(params: np.ndarray) -> NoiseModel:
        m = len(noisy_vertices)
        kwargs = {}
        for k, ch in enumerate(channels):
            kwargs[ch] = {v: float(params[k * m + i])
                          for i, v in enumerate(noisy_vertices)}
        return NoiseModel(**kwargs)

    def residuals(params: np.ndarray) -> np.ndarray:
        rho = apply_noise(vec, verts, build(params)).matrix
        out = []
        for name in sorted(targets):
            est = analytic_estimates(plans[name], rho)
            tq, tx = targets[name]
            out.extend([est.qber - tq, est.qx - tx])
        return np.asarray(out)

    x0 = np.full(len(channels) * len(noisy_vertices), 0.01)
    fit = least_squares(residuals, x0, bounds=(0.0, 0.999), x_scale="jac",
                        xtol=3e-16, ftol=3e-16, gtol=3e-16,
                        max_nfev=max_evaluations)
    resid = float(np.sqrt(np.sum(fit.fun ** 2)))
    return CalibrationResult(build(fit.x), resid, resid < 1e-6)
