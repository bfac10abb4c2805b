"""Synthetic coincidence counts and Monte Carlo checks of the error radius."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .noise import D, DEFAULT_RESCALE, TABLE_DEVIATION_MULTIPLE, error_radius
from .protocols import Assembly, Protocol, condition_number
from .qmetrics import as_matrix, spectral_decomposition, trace_distance, unvec_density
from .reconstruct import (
    CountTable,
    ObservationVector,
    assemble_observations,
    reconstruct_state,
)

# Fraction of the acquisition window each projector of a row is counted for.
# Differenced rows use full-window single-projector counts; four-term sums
# split the window between their projectors.
WINDOW_SHARE = {
    Assembly.DIRECT: 1.0,
    Assembly.HALF_DIFFERENCE: 1.0,
    Assembly.SIGNED_SUM: 0.25,
}
# Every projector of a row shares one window equally. Only meaningful for
# rates: the halved-difference assembly assumes full-window counts.
UNIFORM_SHARE = {
    Assembly.DIRECT: 1.0,
    Assembly.HALF_DIFFERENCE: 0.5,
    Assembly.SIGNED_SUM: 0.25,
}


class NonPhysicalStateError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    flux: float = 5000.0
    seed: int = 0
    trials: int = 500
    rescale: float = DEFAULT_RESCALE
    deviation_multiple: float = TABLE_DEVIATION_MULTIPLE
    rounding: str = "floor"

    def __post_init__(self):
        if not self.flux > 0:
            raise ValueError(f"flux must be positive, got {self.flux}")
        if self.trials < 0:
            raise ValueError(f"trials must be >= 0, got {self.trials}")


def check_physical(rho, atol: float = 1e-9) -> np.ndarray:
    m = as_matrix(rho)
    if abs(np.trace(m).real - 1.0) > atol:
        raise NonPhysicalStateError(f"trace is {np.trace(m).real:.12f}, expected 1")
    lam = spectral_decomposition(m).eigenvalues
    if lam[-1] < -atol:
        raise NonPhysicalStateError(f"negative eigenvalue {lam[-1]:.3e}")
    return m


def ideal_rates(protocol: Protocol, rho, flux: float, shares=WINDOW_SHARE) -> list[np.ndarray]:
    """Expected raw counts per projector: ``flux * share * Tr(Pi rho)``."""
    m = check_physical(rho)
    out = []
    for row in protocol.rows:
        share = shares[row.assembly]
        p = np.array([np.vdot(t.ket, m @ t.ket).real for t in row.terms])
        out.append(flux * share * np.clip(p, 0.0, None))
    return out


def expected_observations(protocol: Protocol, rates: list[np.ndarray]) -> ObservationVector:
    """Noiseless observations from exact rates (no count-domain rounding)."""
    b = np.empty(len(rates))
    var = np.empty(len(rates))
    for r, (row, lam) in enumerate(zip(protocol.rows, rates)):
        coeffs = np.array([t.coeff for t in row.terms])
        b[r] = coeffs @ lam
        var[r] = lam.sum() / (2.0 if row.assembly is Assembly.HALF_DIFFERENCE else 1.0)
    return ObservationVector(b, var)


def sample_counts(
    rates: list[np.ndarray],
    seed: int | np.random.Generator | np.random.SeedSequence | None = None,
    protocol_name: str = "",
    state_label: str = "",
) -> CountTable:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    raw = tuple(tuple(int(c) for c in rng.poisson(lam)) for lam in rates)
    return CountTable(protocol_name, state_label, raw)


@dataclass(frozen=True)
class TrialResult:
    trial: int
    E: float
    R: float
    covered: bool
    chain_lhs: float = math.nan  # raw-scale trace distance of the perturbation
    chain_rhs: float = math.nan  # sqrt(d/2) kappa ||db|| ||x + dx|| / ||b + db||
    error: str | None = None


@dataclass
class SimulationReport:
    protocol: str
    state: str
    config: SimulationConfig
    trials: list[TrialResult] = field(default_factory=list)

    @property
    def coverage(self) -> float:
        if not self.trials:
            return math.nan
        return sum(t.covered for t in self.trials) / len(self.trials)

    @property
    def failures(self) -> int:
        return sum(t.error is not None for t in self.trials)

    def summary(self) -> dict:
        ok = [t for t in self.trials if t.error is None]
        return {
            "summary": True,
            "protocol": self.protocol,
            "state": self.state,
            "trials": len(self.trials),
            "failures": self.failures,
            "coverage": self.coverage,
            "mean_E": float(np.mean([t.E for t in ok])) if ok else math.nan,
            "mean_R": float(np.mean([t.R for t in ok])) if ok else math.nan,
            **{k: v for k, v in asdict(self.config).items() if k != "trials"},
        }

    def to_jsonl(self) -> str:
        lines = [
            json.dumps({"trial": t.trial, "E": t.E, "R": t.R, "covered": t.covered}
                       | ({"error": t.error} if t.error else {}))
            for t in self.trials
        ]
        lines.append(json.dumps(self.summary()))
        return "\n".join(lines) + "\n"


def run_trials(rho, protocol: Protocol, config: SimulationConfig, state_label: str = "") -> SimulationReport:
    """Simulate, reconstruct and score ``config.trials`` independent experiments.

    Each trial draws from its own stream spawned off ``config.seed``, so the
    report does not depend on execution order.
    """
    rho = check_physical(rho)
    report = SimulationReport(protocol.name, state_label, config)
    if config.trials == 0:
        return report
    a = protocol.A
    kappa = condition_number(a)
    rates = ideal_rates(protocol, rho, config.flux)
    truth = expected_observations(protocol, rates)
    x_true = reconstruct_state(a, truth).x_raw
    streams = np.random.SeedSequence(config.seed).spawn(config.trials)
    for i, ss in enumerate(streams):
        counts = sample_counts(rates, np.random.default_rng(ss), protocol.name, state_label)
        try:
            obs = assemble_observations(protocol, counts, config.rounding)
            rec = reconstruct_state(a, obs, state_label)
            R = error_radius(a, obs, rec, config.rescale, config.deviation_multiple, kappa=kappa)
        except (ValueError, np.linalg.LinAlgError) as exc:
            report.trials.append(TrialResult(i, math.nan, math.nan, False, error=str(exc)))
            continue
        E = trace_distance(rho, rec.rho)
        db = obs.b - truth.b
        lhs = trace_distance(unvec_density(rec.x_raw), unvec_density(x_true))
        rhs = math.sqrt(D / 2) * kappa * np.linalg.norm(db) * np.linalg.norm(rec.x_raw) / np.linalg.norm(obs.b)
        report.trials.append(TrialResult(i, E, R, E <= R, lhs, float(rhs)))
    return report
