"""Loader and consistency checks for the reference data set.

Layout of a fixture directory::

    A_{O,M,S,P,J}.csv     integer coefficient matrices, first line "# denominator=N"
    b_{O,M,S,P,J}.csv     observation vectors, one row per measurement, 17 state columns
    var_{O,P}.csv         variance estimates for the differenced / summed protocols
    R.csv, T.csv          error radii (17 x 5) and relative trace distances (17 x 3)
    rho_{code}_{n}.json   the 85 reference reconstructions (4 decimals)
    states.json           the 17 target kets
    counts_{S,J,M}.csv    raw counts for the direct-count protocols
    MANIFEST.sha256       checksums of everything above
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .noise import error_radius
from .protocols import PROTOCOL_CODES, PROTOCOL_NAMES, build_protocol, catalog_states
from .qmetrics import density_from_dict, max_asymmetry, pure_density, trace_distance
from .reconstruct import ObservationVector, Reconstruction, reconstruct_state

CODES = tuple(PROTOCOL_CODES[n] for n in PROTOCOL_NAMES)  # O M S P J
ROW_COUNTS = {"O": 16, "M": 20, "S": 36, "P": 16, "J": 16}
N_STATES = 17
R_COLUMNS = ("Optimal", "MUB", "Standard36", "Pauli", "JKMW")
T_COLUMNS = ("T_OM", "T_OS", "T_MS")
ENV_VAR = "TOMOLENS_FIXTURES"


class FixtureError(ValueError):
    pass


def default_fixture_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "fixtures"


@dataclass(frozen=True)
class IntegerMatrix:
    numerators: np.ndarray  # int
    denominator: int

    @property
    def value(self) -> np.ndarray:
        return self.numerators / self.denominator

    def as_fractions(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.denominator) for v in row] for row in self.numerators]


@dataclass
class FixtureSet:
    root: Path
    coefficient_matrices: dict[str, IntegerMatrix]
    observations: dict[str, np.ndarray]  # code -> (rows, 17)
    row_labels: dict[str, list[str]]
    variance_tables: dict[str, np.ndarray]  # O, P
    R_table: np.ndarray  # (17, 5), columns R_COLUMNS
    T_table: np.ndarray  # (17, 3), columns T_COLUMNS
    reconstructed: dict[tuple[str, int], np.ndarray]  # (code, 1-based state) -> 4x4
    states: list[np.ndarray]
    state_labels: list[str] = field(default_factory=list)

    def variance(self, code: str) -> np.ndarray:
        """Variance table; direct-count protocols use the counts themselves."""
        if code in self.variance_tables:
            return self.variance_tables[code]
        return np.abs(self.observations[code])

    def observation(self, code: str, state: int) -> ObservationVector:
        """Reference observation vector of 1-based ``state`` under protocol ``code``."""
        return ObservationVector(
            self.observations[code][:, state - 1], self.variance(code)[:, state - 1]
        )

    def R(self, code: str, state: int) -> float:
        return float(self.R_table[state - 1, CODES.index(code)])


def _where(path: Path, line: int | None = None) -> str:
    return f"{path}:{line}" if line else str(path)


def _read_rows(path: Path) -> list[list[str]]:
    if not path.exists():
        raise FixtureError(f"missing fixture file {path}")
    with path.open(newline="") as f:
        return [r for r in csv.reader(f)]


def _read_int_matrix(path: Path, nrows: int) -> IntegerMatrix:
    rows = _read_rows(path)
    if not rows or not rows[0] or not rows[0][0].startswith("# denominator="):
        raise FixtureError(f"{_where(path, 1)}: expected '# denominator=N' header")
    denom = int(rows[0][0].split("=", 1)[1])
    data = []
    for i, r in enumerate(rows[1:], start=2):
        try:
            vals = [int(v) for v in r]
        except ValueError as exc:
            raise FixtureError(f"{_where(path, i)}: {exc}") from None
        if len(vals) != 16:
            raise FixtureError(f"{_where(path, i)}: expected 16 columns, found {len(vals)}")
        data.append(vals)
    if len(data) != nrows:
        raise FixtureError(f"{path}: expected {nrows} rows, found {len(data)}")
    return IntegerMatrix(np.array(data, dtype=int), denom)


def _read_state_table(path: Path, nrows: int) -> tuple[list[str], np.ndarray]:
    rows = _read_rows(path)
    header = rows[0] if rows else []
    if header[:1] != ["row_label"] or len(header) != N_STATES + 1:
        raise FixtureError(f"{_where(path, 1)}: malformed header")
    labels, data = [], []
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != N_STATES + 1:
            raise FixtureError(f"{_where(path, i)}: expected {N_STATES + 1} columns, found {len(r)}")
        try:
            data.append([float(v) for v in r[1:]])
        except ValueError as exc:
            raise FixtureError(f"{_where(path, i)}: {exc}") from None
        labels.append(r[0])
    if len(data) != nrows:
        raise FixtureError(f"{path}: expected {nrows} rows, found {len(data)}")
    return labels, np.array(data)


def _read_float_table(path: Path, columns: tuple[str, ...]) -> np.ndarray:
    rows = _read_rows(path)
    if not rows or rows[0] != ["state", *columns]:
        raise FixtureError(f"{_where(path, 1)}: expected header {['state', *columns]}")
    data = []
    for i, r in enumerate(rows[1:], start=2):
        try:
            if int(r[0]) != i - 1 or len(r) != len(columns) + 1:
                raise ValueError(f"bad row {r}")
            data.append([float(v) for v in r[1:]])
        except (ValueError, IndexError) as exc:
            raise FixtureError(f"{_where(path, i)}: {exc}") from None
    if len(data) != N_STATES:
        raise FixtureError(f"{path}: expected {N_STATES} rows, found {len(data)}")
    return np.array(data)


def _read_json(path: Path):
    if not path.exists():
        raise FixtureError(f"missing fixture file {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{_where(path, exc.lineno)}: {exc.msg}") from None


def verify_manifest(root) -> list[str]:
    """Return a list of checksum problems (empty when everything matches)."""
    root = Path(root)
    manifest = root / "MANIFEST.sha256"
    if not manifest.exists():
        return [f"missing {manifest}"]
    problems = []
    for line in manifest.read_text().splitlines():
        if not line.strip():
            continue
        digest, name = line.split(maxsplit=1)
        p = root / name.strip()
        if not p.exists():
            problems.append(f"{name}: listed in manifest but missing")
        elif hashlib.sha256(p.read_bytes()).hexdigest() != digest:
            problems.append(f"{name}: checksum mismatch")
    return problems


def load_fixtures(path=None) -> FixtureSet:
    root = Path(path) if path is not None else default_fixture_dir()
    if not root.is_dir():
        raise FixtureError(f"fixture directory {root} not found")
    mats, obs, labels, var = {}, {}, {}, {}
    for code in CODES:
        mats[code] = _read_int_matrix(root / f"A_{code}.csv", ROW_COUNTS[code])
        labels[code], obs[code] = _read_state_table(root / f"b_{code}.csv", ROW_COUNTS[code])
    for code in ("O", "P"):
        _, var[code] = _read_state_table(root / f"var_{code}.csv", ROW_COUNTS[code])
    R = _read_float_table(root / "R.csv", R_COLUMNS)
    T = _read_float_table(root / "T.csv", T_COLUMNS)
    recon = {}
    for code in CODES:
        for n in range(1, N_STATES + 1):
            p = root / f"rho_{code}_{n}.json"
            try:
                m = density_from_dict(_read_json(p))
            except ValueError as exc:
                raise FixtureError(f"{p}: {exc}") from None
            if m.shape != (4, 4):
                raise FixtureError(f"{p}: expected a 4x4 matrix, got {m.shape}")
            recon[code, n] = m
    st = _read_json(root / "states.json")
    if len(st) != N_STATES:
        raise FixtureError(f"{root / 'states.json'}: expected {N_STATES} states, found {len(st)}")
    kets = [np.array([complex(re, im) for re, im in s["ket"]]) for s in st]
    return FixtureSet(
        root=root,
        coefficient_matrices=mats,
        observations=obs,
        row_labels=labels,
        variance_tables=var,
        R_table=R,
        T_table=T,
        reconstructed=recon,
        states=kets,
        state_labels=[s["label"] for s in st],
    )


@dataclass
class ValidationReport:
    checks: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def check(self, cond: bool, message: str) -> None:
        self.checks += 1
        if not cond:
            self.violations.append(message)


def validate_fixtures(fix: FixtureSet, tol: float = 5e-4) -> ValidationReport:
    """Internal consistency of the reference data (does not run any reconstruction)."""
    rep = ValidationReport()
    for code in ("M", "S", "J"):
        b = fix.observations[code]
        rep.check(bool(np.all(b >= 0)), f"b_{code}: direct counts must be nonnegative")
        rep.check(np.array_equal(fix.variance(code), np.abs(b)), f"b_{code}: variance must equal counts")
    # the diagonal (direct) rows of the optimal protocol: variance = count
    rep.check(
        np.array_equal(fix.variance_tables["O"][:4], fix.observations["O"][:4]),
        "var_O: direct rows must have variance equal to the count",
    )
    for code in ("O", "P"):
        rep.check(
            bool(np.all(fix.variance_tables[code] >= np.abs(fix.observations[code]) - 1)),
            f"var_{code}: a variance is smaller than |b| (impossible for count differences)",
        )
    for (code, n), m in sorted(fix.reconstructed.items()):
        name = f"rho_{code}_{n}"
        rep.check(max_asymmetry(m) <= 1e-12, f"{name}: not conjugate-symmetric")
        rep.check(abs(np.trace(m).real - 1.0) <= tol, f"{name}: trace {np.trace(m).real:.4f} != 1")
        target = pure_density(fix.states[n - 1])
        rep.check(trace_distance(m, target) < 0.5, f"{name}: trace distance to target state >= 0.5")
    for n, (k_fix, k_cat) in enumerate(zip(fix.states, catalog_states()), start=1):
        rep.check(np.allclose(k_fix, k_cat, atol=1e-9), f"states.json psi_{n}: differs from catalog")
    rep.check(bool(np.all(fix.R_table > 0)), "R table: radii must be positive")
    rep.check(bool(np.all((fix.T_table >= 0) & (fix.T_table <= 1))), "T table: out of [0, 1]")
    return rep


# ---------------------------------------------------------------- golden run

KAPPA_EXPECTED = {
    "O": (1.0, 1e-9),
    "P": (math.sqrt(2.0), 1e-9),
    "M": (math.sqrt(5.0), 1e-9),
    "S": (3.0, 1e-9),
    "J": (math.sqrt(60.1), 5e-3),  # printed to three significant digits
}
RHO_TOL = 5e-4
R_TOL = 5e-3
T_TOL = 5e-4


@dataclass
class GoldenCheck:
    name: str
    passed: bool
    worst: float
    tol: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst={self.worst:.3e} tol={self.tol:.1e} {self.detail}".rstrip()


def golden_reconstructions(fix: FixtureSet) -> dict[tuple[str, int], Reconstruction]:
    out = {}
    for code in CODES:
        a = build_protocol(code).A
        for n in range(1, N_STATES + 1):
            out[code, n] = reconstruct_state(a, fix.observation(code, n), f"psi_{n}")
    return out


def golden_run(fix: FixtureSet, recon: dict | None = None) -> list[GoldenCheck]:
    """Rebuild every tabulated number from the transcribed inputs and compare."""
    checks = []
    recon = recon or golden_reconstructions(fix)

    worst, bad = 0.0, []
    for code, (want, tol) in KAPPA_EXPECTED.items():
        err = abs(build_protocol(code).kappa - want)
        worst = max(worst, err)
        if err > tol:
            bad.append(code)
    checks.append(GoldenCheck("condition numbers", not bad, worst, 5e-3, f"miss={bad}" if bad else ""))

    bad = [
        code for code in CODES
        if not np.array_equal(build_protocol(code).A * fix.coefficient_matrices[code].denominator,
                              fix.coefficient_matrices[code].numerators)
    ]
    checks.append(GoldenCheck("coefficient matrices", not bad, float(len(bad)), 0.0, f"miss={bad}" if bad else ""))

    errs = {k: float(np.max(np.abs(r.rho - fix.reconstructed[k]))) for k, r in recon.items()}
    bad = sorted(k for k, e in errs.items() if e > RHO_TOL)
    checks.append(GoldenCheck(f"{len(errs)} density matrices", not bad, max(errs.values()), RHO_TOL,
                              f"miss={bad}" if bad else ""))

    worst, bad = 0.0, []
    for code in CODES:
        a = build_protocol(code).A
        for n in range(1, N_STATES + 1):
            R = error_radius(a, fix.observation(code, n), recon[code, n])
            err = abs(R - fix.R(code, n))
            worst = max(worst, err)
            if err > R_TOL:
                bad.append((code, n))
    checks.append(GoldenCheck("error radii", not bad, worst, R_TOL, f"miss={bad}" if bad else ""))

    worst, bad = 0.0, []
    for n in range(1, N_STATES + 1):
        o, m, s = (recon[c, n].rho for c in "OMS")
        got = (trace_distance(o, m), trace_distance(o, s), trace_distance(m, s))
        for j, g in enumerate(got):
            err = abs(g - fix.T_table[n - 1, j])
            worst = max(worst, err)
            if err > T_TOL:
                bad.append((n, T_COLUMNS[j]))
    checks.append(GoldenCheck("relative trace distances", not bad, worst, T_TOL, f"miss={bad}" if bad else ""))
    return checks
