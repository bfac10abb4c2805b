"""Two-qubit density matrices, their real vectorization, and distance measures.

Density matrices are plain ``(4, 4)`` complex numpy arrays in the basis order
HH, HV, VH, VV. The real vector ``x = vec(rho)`` has 16 components::

    [rho11, Re rho12, Im rho12, Re rho13, Im rho13, Re rho14, Im rho14,
     rho22, Re rho23, Im rho23, Re rho24, Im rho24,
     rho33, Re rho34, Im rho34,
     rho44]

Positivity is never enforced here: linear inversion can return matrices with
negative eigenvalues and those are valid inputs to every function below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DIM = 4
BASIS = ("HH", "HV", "VH", "VV")
HERMITIAN_ATOL = 1e-12
# relative cutoff below which eigenvalues are treated as exactly zero
EIG_RTOL = 1e-12


class NonHermitianError(ValueError):
    pass


def _upper_pairs(dim: int = DIM):
    for n in range(dim):
        for m in range(n, dim):
            yield n, m


def _vec_slots(dim: int = DIM) -> list[tuple[int, int, str]]:
    """(row, col, part) for each vector component, part in {'d', 're', 'im'}."""
    slots = []
    for n, m in _upper_pairs(dim):
        if n == m:
            slots.append((n, m, "d"))
        else:
            slots.append((n, m, "re"))
            slots.append((n, m, "im"))
    return slots


VEC_SLOTS = tuple(_vec_slots())
# 0-based positions of the diagonal entries inside vec(rho): x1, x8, x13, x16
DIAGONAL_INDICES = tuple(k for k, (_, _, part) in enumerate(VEC_SLOTS) if part == "d")


def as_matrix(rho) -> np.ndarray:
    m = np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def max_asymmetry(rho) -> float:
    m = as_matrix(rho)
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(rho, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    m = as_matrix(rho)
    asym = max_asymmetry(m)
    if asym > atol:
        raise NonHermitianError(f"matrix is not Hermitian: max |rho - rho^H| = {asym:.3e}")
    return m


def vec_density(rho, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Real 16-vector of a Hermitian 4x4 matrix (see module docstring for order)."""
    m = check_hermitian(rho, atol)
    if m.shape != (DIM, DIM):
        raise ValueError(f"expected a {DIM}x{DIM} matrix, got {m.shape}")
    x = np.empty(len(VEC_SLOTS))
    for k, (n, mm, part) in enumerate(VEC_SLOTS):
        z = m[n, mm]
        x[k] = z.imag if part == "im" else z.real
    return x


def unvec_density(x) -> np.ndarray:
    """Inverse of :func:`vec_density`; the result is Hermitian by construction."""
    x = np.asarray(x, dtype=float)
    if x.shape != (len(VEC_SLOTS),):
        raise ValueError(f"expected {len(VEC_SLOTS)} components, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state vector has non-finite components")
    rho = np.zeros((DIM, DIM), dtype=complex)
    for k, (n, m, part) in enumerate(VEC_SLOTS):
        if part == "d":
            rho[n, n] = x[k]
        elif part == "re":
            rho[n, m] += x[k]
            rho[m, n] += x[k]
        else:
            rho[n, m] += 1j * x[k]
            rho[m, n] -= 1j * x[k]
    return rho


def hs_norm_sq_from_vec(dx) -> float:
    """Tr[(delta rho)^2] expressed through the vector components.

    Off-diagonal entries appear twice in the matrix, diagonal ones once.
    """
    dx = np.asarray(dx, dtype=float)
    diag = dx[list(DIAGONAL_INDICES)]
    return float(2.0 * np.sum(dx**2) - np.sum(diag**2))


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns, orthonormal

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def spectral_decomposition(m) -> SpectralDecomposition:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.

    Eigenvalues with ``|lambda| < 1e-12 * ||m||`` are set to exactly zero.
    """
    m = as_matrix(m)
    # symmetrize first so round-off asymmetry does not leak into eigh
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    scale = np.linalg.norm(h, 2) if h.size else 0.0
    w = np.where(np.abs(w) < EIG_RTOL * scale, 0.0, w)
    order = np.argsort(w)[::-1]
    return SpectralDecomposition(w[order], v[:, order])


def psd_sqrt(m) -> np.ndarray:
    """Matrix square root with negative eigenvalues clamped to zero."""
    sd = spectral_decomposition(m)
    w = np.sqrt(np.clip(sd.eigenvalues, 0.0, None))
    v = sd.eigenvectors
    return (v * w) @ v.conj().T


def _pair(rho, sigma):
    a, b = as_matrix(rho), as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of ``rho - sigma``."""
    a, b = _pair(rho, sigma)
    ev = spectral_decomposition(a - b).eigenvalues
    return 0.5 * float(np.sum(np.abs(ev)))


def hs_distance(rho, sigma) -> float:
    """Hilbert-Schmidt distance sqrt(Tr[(rho - sigma)^2])."""
    a, b = _pair(rho, sigma)
    d = a - b
    return float(np.sqrt(max(np.trace(d @ d).real, 0.0)))


def physical_part(rho) -> np.ndarray:
    """Clamp negative eigenvalues to zero and renormalize to unit trace."""
    sd = spectral_decomposition(rho)
    w = np.clip(sd.eigenvalues, 0.0, None)
    if w.sum() <= 0:
        raise ValueError("matrix has no positive spectral weight")
    w = w / w.sum()
    v = sd.eigenvectors
    return (v * w) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Squared Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Both inputs are projected onto the physical set first (see
    :func:`physical_part`), so nonphysical reconstructions are accepted.
    """
    a, b = _pair(rho, sigma)
    a, b = physical_part(a), physical_part(b)
    sa = psd_sqrt(a)
    inner = spectral_decomposition(sa @ b @ sa).eigenvalues
    root = float(np.sum(np.sqrt(np.clip(inner, 0.0, None))))
    return min(root**2, 1.0)


def bures_disturbance(rho, sigma) -> float:
    """Disturbance 1 - F(rho, sigma)."""
    return max(1.0 - fidelity(rho, sigma), 0.0)


def normalize_trace(rho) -> np.ndarray:
    m = as_matrix(rho)
    tr = np.trace(m).real
    if tr == 0:
        raise ValueError("cannot normalize a zero-trace matrix")
    return m / tr


def pure_density(ket) -> np.ndarray:
    psi = np.asarray(ket, dtype=complex)
    return np.outer(psi, psi.conj())


# JSON: {"dim": 4, "entries": [[[re, im], ...], ...]}

def density_to_dict(rho, digits: int = 10) -> dict:
    m = as_matrix(rho)
    fmt = lambda v: float(f"{v:.{digits}g}")  # noqa: E731
    return {
        "dim": int(m.shape[0]),
        "entries": [[[fmt(z.real), fmt(z.imag)] for z in row] for row in m],
    }


def density_from_dict(data: dict) -> np.ndarray:
    try:
        dim = int(data["dim"])
        entries = data["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"not a density-matrix object: {exc}") from None
    m = np.array([[complex(re, im) for re, im in row] for row in entries])
    if m.shape != (dim, dim):
        raise ValueError(f"entries have shape {m.shape}, expected ({dim}, {dim})")
    if not np.all(np.isfinite(m)):
        raise ValueError("density matrix has non-finite entries")
    return m


def write_density_json(rho, path) -> None:
    Path(path).write_text(json.dumps(density_to_dict(rho)) + "\n")


def read_density_json(path) -> np.ndarray:
    return density_from_dict(json.loads(Path(path).read_text()))
