"""Polarization projectors and the five two-qubit tomography protocols.

Each protocol is an ordered list of measurement rows. A row is a real linear
combination of rank-1 projectors, ``O_r = sum_j c_j |k_j><k_j|``, plus the rule
that turns the raw coincidence counts of its projectors into one observation
value. The coefficient matrix is derived from the observables, never typed in:
``A[r] . vec(rho) = Tr(O_r rho)`` for every Hermitian ``rho``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .qmetrics import DIM, VEC_SLOTS, unvec_density

SQRT2 = np.sqrt(2.0)

_SINGLE = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([1, 1], dtype=complex) / SQRT2,
    "A": np.array([1, -1], dtype=complex) / SQRT2,
    "L": np.array([1, 1j], dtype=complex) / SQRT2,
    "R": np.array([1, -1j], dtype=complex) / SQRT2,
}


class SingularProtocolError(ValueError):
    pass


def polarization_ket(label: str) -> np.ndarray:
    try:
        return _SINGLE[label].copy()
    except KeyError:
        raise ValueError(f"unknown polarization label {label!r}; expected one of HVDALR") from None


def product_ket(labels: str) -> np.ndarray:
    """|ab> for a two-letter label such as ``"HD"``."""
    if len(labels) != 2:
        raise ValueError(f"product label must have two letters, got {labels!r}")
    return np.kron(polarization_ket(labels[0]), polarization_ket(labels[1]))


def _bell():
    hh, hv, vh, vv = (product_ket(s) for s in ("HH", "HV", "VH", "VV"))
    return {
        "PHI+": (hh + vv) / SQRT2,
        "PHI-": (hh - vv) / SQRT2,
        "PSI+": (hv + vh) / SQRT2,
        "PSI-": (hv - vh) / SQRT2,
        "PHIb+": (hh + 1j * vv) / SQRT2,
        "PHIb-": (hh - 1j * vv) / SQRT2,
        "PSIb+": (hv + 1j * vh) / SQRT2,
        "PSIb-": (hv - 1j * vh) / SQRT2,
    }


BELL = _bell()
# (|ab> + phase |cd>)/sqrt2, written e.g. "DL+iAR"
_SUPERPOS = re.compile(r"^([HVDALR]{2})([+-])(i?)([HVDALR]{2})$")


def two_qubit_ket(label: str) -> np.ndarray:
    """Ket for a product label (``"HD"``), a Bell label (``"PSIb-"``) or a
    two-term superposition such as ``"DR-iAL"``."""
    if label in BELL:
        return BELL[label].copy()
    m = _SUPERPOS.match(label)
    if m:
        a, sign, imag, b = m.groups()
        phase = (1j if imag else 1.0) * (1 if sign == "+" else -1)
        return (product_ket(a) + phase * product_ket(b)) / SQRT2
    return product_ket(label)


class Assembly(str, Enum):
    """How the raw counts of one row become a single observation value."""

    DIRECT = "direct"
    HALF_DIFFERENCE = "half_difference"
    SIGNED_SUM = "signed_sum"

    @property
    def arity(self) -> int:
        return {"direct": 1, "half_difference": 2, "signed_sum": 4}[self.value]


@dataclass(frozen=True, eq=False)
class Term:
    coeff: float
    ket_label: str
    ket: np.ndarray


@dataclass(frozen=True, eq=False)
class MeasurementRow:
    label: str
    terms: tuple[Term, ...]
    assembly: Assembly

    def __post_init__(self):
        if not self.terms:
            raise ValueError(f"row {self.label!r} has no terms")
        if len(self.terms) != self.assembly.arity:
            raise ValueError(
                f"row {self.label!r}: {len(self.terms)} terms but {self.assembly.value} "
                f"assembly takes {self.assembly.arity}"
            )
        for t in self.terms:
            if abs(np.linalg.norm(t.ket) - 1.0) > 1e-12:
                raise ValueError(f"row {self.label!r}: ket {t.ket_label} is not normalized")


def direct_row(label: str) -> MeasurementRow:
    return MeasurementRow(label, (Term(1.0, label, two_qubit_ket(label)),), Assembly.DIRECT)


def half_difference_row(plus: str, minus: str, label: str | None = None) -> MeasurementRow:
    terms = (Term(0.5, plus, two_qubit_ket(plus)), Term(-0.5, minus, two_qubit_ket(minus)))
    return MeasurementRow(label or f"{plus}-{minus}", terms, Assembly.HALF_DIFFERENCE)


_SIGNED = re.compile(r"([+-]?)([HVDALR]{2})")


def signed_sum_row(label: str) -> MeasurementRow:
    """Row from a label like ``"DD+AA-DA-AD"``."""
    terms = tuple(
        Term(-1.0 if sign == "-" else 1.0, kl, product_ket(kl))
        for sign, kl in _SIGNED.findall(label)
    )
    return MeasurementRow(label, terms, Assembly.SIGNED_SUM)


def observable_matrix(row: MeasurementRow) -> np.ndarray:
    """Hermitian operator ``sum_j c_j |k_j><k_j|`` measured by ``row``."""
    op = np.zeros((DIM, DIM), dtype=complex)
    for t in row.terms:
        op += t.coeff * np.outer(t.ket, t.ket.conj())
    return op


# vec-basis operators: Tr(O rho(x)) = sum_k x_k Tr(O E_k)
_VEC_BASIS = tuple(unvec_density(np.eye(len(VEC_SLOTS))[k]) for k in range(len(VEC_SLOTS)))


def _snap_dyadic(a: np.ndarray, denom: int = 64, atol: float = 1e-12) -> np.ndarray:
    # entries are dyadic rationals; remove the round-off left by 1/sqrt2 amplitudes
    snapped = np.round(a * denom) / denom
    return np.where(np.abs(a - snapped) < atol, snapped, a)


def coefficient_row(op) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    return np.array([np.trace(op @ e).real for e in _VEC_BASIS])


def coefficient_matrix(protocol: "Protocol | tuple[MeasurementRow, ...]") -> np.ndarray:
    rows = protocol.rows if isinstance(protocol, Protocol) else protocol
    a = np.array([coefficient_row(observable_matrix(r)) for r in rows])
    return _snap_dyadic(a)


def condition_number(a) -> float:
    """Spectral condition number sigma_max / sigma_min."""
    s = np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        raise SingularProtocolError("coefficient matrix is zero")
    if s[-1] < 1e-10 * s[0] or np.asarray(a).shape[0] < np.asarray(a).shape[1]:
        raise SingularProtocolError(
            f"coefficient matrix is rank deficient (sigma_min/sigma_max = {s[-1] / s[0]:.2e})"
        )
    return float(s[0] / s[-1])


@dataclass(frozen=True, eq=False)
class Protocol:
    name: str
    code: str
    rows: tuple[MeasurementRow, ...]
    acquisition_seconds_per_row: float = 5.0
    coefficient_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = coefficient_matrix(self.rows)
        a.setflags(write=False)
        object.__setattr__(self, "coefficient_matrix", a)

    @property
    def A(self) -> np.ndarray:
        return self.coefficient_matrix

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.rows]

    @property
    def kappa(self) -> float:
        return condition_number(self.coefficient_matrix)

    def __len__(self):
        return len(self.rows)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rows": [
                {
                    "label": r.label,
                    "terms": [
                        {"coeff": t.coeff, "ket": [[z.real, z.imag] for z in t.ket]}
                        for t in r.terms
                    ],
                    "assembly": r.assembly.value,
                }
                for r in self.rows
            ],
            "A": self.coefficient_matrix.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


_STANDARD36 = [a + b for a in "HVDALR" for b in "HVDALR"]
_JKMW = "HH HV HD HL VH VV VD VL RH RV RD RL DH DV DD DR".split()
_MUB = (
    "DH DV AH AV LD LA RD RA VR VL HR HL PHI+ PHI- PSI+ PSI- DL+iAR DL-iAR DR+iAL DR-iAL"
).split()
_OPTIMAL_DIFFS = [
    ("HD", "HA"), ("HL", "HR"), ("DH", "AH"), ("LH", "RH"),
    ("VD", "VA"), ("VL", "VR"), ("DV", "AV"), ("LV", "RV"),
    ("PSI+", "PSI-"), ("PSIb+", "PSIb-"), ("PHI+", "PHI-"), ("PHIb+", "PHIb-"),
]
# rows 4, 8 and 12 are the first-qubit marginals X(x)I, Y(x)I, Z(x)I
_PAULI = [
    "DD+AA-DA-AD", "DL+AR-DR-AL", "DH+AV-DV-AH", "DH+DV-AH-AV",
    "LD+RA-LA-RD", "LL+RR-LR-RL", "LH+RV-LV-RH", "LH+LV-RH-RV",
    "HD+VA-HA-VD", "HL+VR-HR-VL", "HH+VV-HV-VH", "HH+HV-VH-VV",
    "HD-HA+VD-VA", "HL-HR+VL-VR", "HH-HV+VH-VV", "HH+HV+VH+VV",
]

PROTOCOL_NAMES = ("Optimal", "MUB", "Standard36", "Pauli", "JKMW")
PROTOCOL_CODES = {"Optimal": "O", "MUB": "M", "Standard36": "S", "Pauli": "P", "JKMW": "J"}
_ALIASES = {
    "optimal": "Optimal", "o": "Optimal",
    "mub": "MUB", "m": "MUB",
    "standard36": "Standard36", "standard": "Standard36", "s": "Standard36",
    "pauli": "Pauli", "p": "Pauli",
    "jkmw": "JKMW", "j": "JKMW",
}


def canonical_name(name: str) -> str:
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; choose from {', '.join(PROTOCOL_NAMES)}") from None


def _rows_for(name: str) -> list[MeasurementRow]:
    if name == "Standard36":
        return [direct_row(s) for s in _STANDARD36]
    if name == "JKMW":
        return [direct_row(s) for s in _JKMW]
    if name == "MUB":
        return [direct_row(s) for s in _MUB]
    if name == "Optimal":
        # the diagonal rows select rho11, rho22, rho33, rho44 in basis order
        return [direct_row(s) for s in ("HH", "HV", "VH", "VV")] + [
            half_difference_row(p, m) for p, m in _OPTIMAL_DIFFS
        ]
    if name == "Pauli":
        return [signed_sum_row(s) for s in _PAULI]
    raise AssertionError(name)


_CACHE: dict[str, Protocol] = {}


def build_protocol(name: str) -> Protocol:
    """Build (or fetch the cached, immutable) protocol by name or one-letter code."""
    canon = canonical_name(name)
    if canon not in _CACHE:
        _CACHE[canon] = Protocol(canon, PROTOCOL_CODES[canon], tuple(_rows_for(canon)))
    return _CACHE[canon]


def all_protocols() -> list[Protocol]:
    return [build_protocol(n) for n in PROTOCOL_NAMES]


def as_fraction_matrix(a) -> list[list[Fraction]]:
    return [[Fraction(float(v)).limit_denominator(64) for v in row] for row in np.asarray(a)]


# The 17 prepared target states. Two-decimal amplitudes are renormalized.
_E1A = np.array([-0.6556 + 0.6248j, 0.4241])
_E1B = np.array([-0.1415 - 0.7165j, 0.6831])
_E2A = np.array([-0.9608 + 0.2091j, 0.1822])
_E2B = np.array([0.2613 + 0.7338j, 0.6271])


def _catalog():
    k = two_qubit_ket
    hv, vh = k("HV"), k("VH")
    return [
        ("(HH-VV)/sqrt2", BELL["PHI-"]),
        ("(HH+VV)/sqrt2", BELL["PHI+"]),
        ("(HH-iVV)/sqrt2", BELL["PHIb-"]),
        ("(DR-iAL)/sqrt2", k("DR-iAL")),
        ("(HV+iVH)/sqrt2", BELL["PSIb+"]),
        ("(HV+VH)/sqrt2", BELL["PSI+"]),
        ("HV", hv),
        ("(HH+iVV)/sqrt2", BELL["PHIb+"]),
        ("(HV-VH)/sqrt2", BELL["PSI-"]),
        ("(HV-iVH)/sqrt2", BELL["PSIb-"]),
        ("(DL+iAR)/sqrt2", k("DL+iAR")),
        ("(DL-iAR)/sqrt2", k("DL-iAR")),
        ("e1a e1b", np.kron(_E1A, _E1B)),
        ("e2a e2b", np.kron(_E2A, _E2B)),
        ("0.79 HV - 0.61 VH", 0.79 * hv - 0.61 * vh),
        ("0.50 HV - 0.87 VH", 0.50 * hv - 0.87 * vh),
        ("0.35 HV - 0.94 VH", 0.35 * hv - 0.94 * vh),
    ]


CATALOG_LABELS = tuple(lab for lab, _ in _catalog())


def catalog_states() -> list[np.ndarray]:
    """The 17 target kets psi_1 ... psi_17, each normalized."""
    return [np.asarray(v, dtype=complex) / np.linalg.norm(v) for _, v in _catalog()]


def catalog_state(index: int) -> np.ndarray:
    """1-based access into :func:`catalog_states`."""
    if not 1 <= index <= len(CATALOG_LABELS):
        raise ValueError(f"catalog index must be in 1..{len(CATALOG_LABELS)}, got {index}")
    return catalog_states()[index - 1]
