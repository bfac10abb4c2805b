"""Error radii, probable-error bands and Poisson tail estimates.

The uncertainty radius bounds the trace distance between the reconstructed
state and the true one using only measured quantities::

    R = rescale * m * sqrt(d/2) * kappa(A) * ||sigma(b)|| * ||x|| / ||b||

where every component deviation is assumed bounded by ``|db_i| <= m sigma_i``
and ``x`` is the trace-normalized reconstructed vector. ``m = 2*sqrt(2)`` is
the strict Poisson-tail choice (prefactor ``2 sqrt(d)``); the reference error
radius tables correspond to ``m = 2``, which is the default here.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln

from .protocols import condition_number
from .reconstruct import ObservationVector, Reconstruction, solve_linear

D = 4
DEFAULT_RESCALE = 1.3
TABLE_DEVIATION_MULTIPLE = 2.0
STRICT_DEVIATION_MULTIPLE = 2.0 * math.sqrt(2.0)
DEFAULT_K = math.sqrt(2.0)


def error_radius(
    a,
    obs: ObservationVector,
    recon: Reconstruction,
    rescale: float = DEFAULT_RESCALE,
    deviation_multiple: float = TABLE_DEVIATION_MULTIPLE,
    d: int = D,
    kappa: float | None = None,
) -> float:
    b_norm = float(np.linalg.norm(obs.b))
    if b_norm == 0.0:
        raise ValueError("observation vector has zero norm")
    if kappa is None:
        kappa = condition_number(a)
    sigma_norm = float(np.linalg.norm(obs.sigma))
    x_norm = float(np.linalg.norm(recon.x))
    return rescale * deviation_multiple * math.sqrt(d / 2) * kappa * sigma_norm * x_norm / b_norm


def error_band(R: float, kappa: float, d: int = D, k: float = DEFAULT_K) -> tuple[float, float]:
    """Probable range ``[k R / (4 sqrt(d) kappa^2), k R / (2 sqrt(2))]`` of the error."""
    if not 0.0 <= k <= STRICT_DEVIATION_MULTIPLE + 1e-12:
        raise ValueError(f"k must lie in [0, 2*sqrt(2)], got {k}")
    if R < 0 or kappa < 1 - 1e-12:
        raise ValueError(f"need R >= 0 and kappa >= 1, got R={R}, kappa={kappa}")
    return k * R / (4 * math.sqrt(d) * kappa**2), k * R / (2 * math.sqrt(2))


@dataclass(frozen=True)
class ErrorReport:
    kappa: float
    R: float
    band_lo: float
    band_hi: float
    k_param: float
    sigma_norm: float
    b_norm: float
    x_norm: float
    rescale_factor: float = DEFAULT_RESCALE
    deviation_multiple: float = TABLE_DEVIATION_MULTIPLE
    protocol: str = ""
    state: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def error_report(
    a,
    obs: ObservationVector,
    recon: Reconstruction,
    rescale: float = DEFAULT_RESCALE,
    k: float = DEFAULT_K,
    deviation_multiple: float = TABLE_DEVIATION_MULTIPLE,
    protocol: str = "",
    state: str = "",
) -> ErrorReport:
    kappa = condition_number(a)
    R = error_radius(a, obs, recon, rescale, deviation_multiple, kappa=kappa)
    lo, hi = error_band(R, kappa, D, k)
    return ErrorReport(
        kappa=kappa,
        R=R,
        band_lo=lo,
        band_hi=hi,
        k_param=k,
        sigma_norm=float(np.linalg.norm(obs.sigma)),
        b_norm=float(np.linalg.norm(obs.b)),
        x_norm=float(np.linalg.norm(recon.x)),
        rescale_factor=rescale,
        deviation_multiple=deviation_multiple,
        protocol=protocol,
        state=state or recon.state_label,
    )


def _log_pmf(ks: np.ndarray, mu: float) -> np.ndarray:
    return ks * math.log(mu) - mu - gammaln(ks + 1.0)


def deviation_probability(b: int, multiple: float, inclusive: bool = True) -> float:
    """Poisson(b) mass with ``floor(b - m sqrt b) <= X <= floor(b + m sqrt b)``.

    With ``inclusive=False`` the lower edge is excluded, i.e. the plain
    ``CDF(x+) - CDF(x-)`` difference.
    """
    if b < 0 or multiple <= 0:
        raise ValueError("need b >= 0 and multiple > 0")
    if b == 0:
        return 1.0 if inclusive else 0.0
    half = multiple * math.sqrt(b)
    hi = math.floor(b + half)
    lo = math.floor(b - half) + (0 if inclusive else 1)
    lo = max(lo, 0)
    if hi < lo:
        return 0.0
    ks = np.arange(lo, hi + 1, dtype=float)
    return float(min(np.exp(_log_pmf(ks, float(b))).sum(), 1.0))


def poisson_tail_bound(mu: float, k: float) -> float:
    """Chernoff bound ``e^-mu (e mu / x)^x`` on ``Pr(X >= x)``, ``x = mu + k sqrt(mu)``."""
    if mu <= 0 or k <= 0:
        raise ValueError("need mu > 0 and k > 0")
    x = mu + k * math.sqrt(mu)
    return math.exp(-mu + x * (1.0 + math.log(mu) - math.log(x)))


def perturbation_ratio_bounds(a, b, delta_b) -> tuple[float, float, float]:
    """``(||db||/(kappa ||b||), ||dx||/||x||, kappa ||db||/||b||)``.

    For square nonsingular ``A`` the middle value always lies between the
    other two. Tall systems are solved in the least-squares sense, where the
    sandwich holds for perturbations inside the range of ``A``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    db = np.asarray(delta_b, dtype=float)
    kappa = condition_number(a)
    b_norm = np.linalg.norm(b)
    x, _ = solve_linear(a, b)
    x_norm = np.linalg.norm(x)
    if b_norm == 0 or x_norm == 0:
        raise ValueError("need nonzero b and x")
    dx, _ = solve_linear(a, db)
    rel = np.linalg.norm(db) / b_norm
    return float(rel / kappa), float(np.linalg.norm(dx) / x_norm), float(kappa * rel)
