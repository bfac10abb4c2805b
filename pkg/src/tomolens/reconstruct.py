"""Observation assembly and linear-inversion reconstruction."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .protocols import Assembly, Protocol, build_protocol, condition_number
from .qmetrics import unvec_density, vec_density


class DegenerateDataError(ValueError):
    pass


class CountFormatError(ValueError):
    pass


@dataclass(frozen=True)
class CountTable:
    """Raw coincidence counts of one prepared state under one protocol.

    ``raw[r]`` holds the counts of the projectors in row ``r``, in term order
    (1 for direct rows, 2 for half differences, 4 for signed sums).
    """

    protocol_name: str
    state_label: str
    raw: tuple[tuple[int, ...], ...]
    acquisition_seconds: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "raw", tuple(tuple(int(c) for c in row) for row in self.raw))


@dataclass(frozen=True, eq=False)
class ObservationVector:
    b: np.ndarray
    variance: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        v = np.asarray(self.variance, dtype=float)
        if b.shape != v.shape or b.ndim != 1:
            raise ValueError(f"b and variance shapes differ: {b.shape} vs {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("variances must be finite and nonnegative")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "variance", v)

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def __len__(self):
        return len(self.b)


def _halve(v: int, rounding: str) -> int:
    if rounding == "floor":
        return v // 2
    if rounding == "trunc":
        return int(math.trunc(v / 2))
    raise ValueError(f"rounding must be 'floor' or 'trunc', got {rounding!r}")


def assemble_observations(
    protocol: Protocol, counts: CountTable, rounding: str = "floor"
) -> ObservationVector:
    """Turn raw counts into the observation vector and its variance estimate.

    direct:          b = c,                    var = c
    half_difference: b = round((c - c') / 2),  var = floor((c + c') / 2)
    signed_sum:      b = sum_j s_j c_j,        var = sum_j c_j

    ``rounding`` selects floor toward -inf (default) or truncation toward zero
    for the halved difference.
    """
    if len(counts.raw) != len(protocol.rows):
        raise CountFormatError(
            f"{protocol.name} has {len(protocol.rows)} rows, counts have {len(counts.raw)}"
        )
    b = np.empty(len(protocol.rows))
    var = np.empty(len(protocol.rows))
    for r, (row, raw) in enumerate(zip(protocol.rows, counts.raw)):
        if len(raw) != row.assembly.arity:
            raise CountFormatError(
                f"row {r + 1} ({row.label}): expected {row.assembly.arity} counts, got {len(raw)}"
            )
        if any(c < 0 for c in raw):
            raise CountFormatError(f"row {r + 1} ({row.label}): negative count in {raw}")
        if row.assembly is Assembly.DIRECT:
            b[r] = var[r] = raw[0]
        elif row.assembly is Assembly.HALF_DIFFERENCE:
            c, cp = raw
            b[r] = _halve(c - cp, rounding)
            var[r] = (c + cp) // 2
        else:
            signs = [1 if t.coeff > 0 else -1 for t in row.terms]
            b[r] = sum(s * c for s, c in zip(signs, raw))
            var[r] = sum(raw)
    return ObservationVector(b, var)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    rho: np.ndarray  # trace-normalized
    x_raw: np.ndarray  # solution before normalization
    residual_norm: float
    state_label: str = ""

    @property
    def x(self) -> np.ndarray:
        """vec of the trace-normalized matrix."""
        return vec_density(self.rho)


def solve_linear(a, b) -> tuple[np.ndarray, float]:
    """Exact solve for square systems, SVD least squares for tall ones."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"A has {a.shape[0]} rows but b has {b.shape[0]} entries")
    condition_number(a)  # raises on singular systems
    if a.shape[0] == a.shape[1]:
        x = np.linalg.solve(a, b)
    else:
        x = np.linalg.lstsq(a, b, rcond=None)[0]
    return x, float(np.linalg.norm(a @ x - b))


def reconstruct_state(a, obs: ObservationVector | np.ndarray, state_label: str = "") -> Reconstruction:
    b = obs.b if isinstance(obs, ObservationVector) else np.asarray(obs, dtype=float)
    x, resid = solve_linear(a, b)
    rho = unvec_density(x)
    tr = np.trace(rho).real
    if abs(tr) < 1e-9 * max(np.linalg.norm(x), 1e-300):
        raise DegenerateDataError(f"reconstructed matrix has (near) zero trace {tr:.3e}")
    return Reconstruction(rho / tr, x, resid, state_label)


@dataclass(frozen=True)
class BatchItem:
    state_label: str
    reconstruction: Reconstruction | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.reconstruction is not None


def reconstruct_all(
    protocol: Protocol,
    counts_per_state: Iterable[CountTable | ObservationVector],
    rounding: str = "floor",
    labels: Sequence[str] | None = None,
) -> list[BatchItem]:
    """Reconstruct every state; a failure in one state does not abort the batch."""
    out = []
    for i, item in enumerate(counts_per_state):
        label = getattr(item, "state_label", None) or (labels[i] if labels else f"state_{i + 1}")
        try:
            obs = item if isinstance(item, ObservationVector) else assemble_observations(
                protocol, item, rounding
            )
            out.append(BatchItem(label, reconstruct_state(protocol.A, obs, label)))
        except (ValueError, np.linalg.LinAlgError) as exc:
            out.append(BatchItem(label, error=f"{type(exc).__name__}: {exc}"))
    return out


# CSV: protocol,state,row_index,row_label,c1[,c2[,c3,c4]]

def read_count_csv(path) -> list[CountTable]:
    """Parse a count CSV into one CountTable per (protocol, state), in file order."""
    path = Path(path)
    groups: dict[tuple[str, str], dict[int, tuple[int, ...]]] = {}
    with path.open(newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or header[:4] != ["protocol", "state", "row_index", "row_label"]:
            raise CountFormatError(f"{path}: missing or malformed header {header}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or not "".join(rec).strip():
                continue
            try:
                proto, state, idx = rec[0], rec[1], int(rec[2])
                cells = [c for c in rec[4:] if c.strip() != ""]
                raw = tuple(int(c) for c in cells)
            except (ValueError, IndexError) as exc:
                raise CountFormatError(f"{path}:{lineno}: {exc}") from None
            rows = groups.setdefault((proto, state), {})
            if idx in rows:
                raise CountFormatError(f"{path}:{lineno}: duplicate row_index {idx} for {state}")
            rows[idx] = raw
    tables = []
    for (proto, state), rows in groups.items():
        n = len(build_protocol(proto).rows)
        if sorted(rows) != list(range(1, n + 1)):
            raise CountFormatError(f"{path}: {proto}/{state} has row indices {sorted(rows)}, expected 1..{n}")
        tables.append(CountTable(proto, state, tuple(rows[i] for i in range(1, n + 1))))
    return tables


def write_count_csv(tables: Sequence[CountTable], path) -> None:
    width = max((len(r) for t in tables for r in t.raw), default=1)
    with Path(path).open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["protocol", "state", "row_index", "row_label"] + [f"c{i + 1}" for i in range(width)])
        for t in tables:
            labels = build_protocol(t.protocol_name).labels
            for i, raw in enumerate(t.raw):
                w.writerow([t.protocol_name, t.state_label, i + 1, labels[i], *raw])
