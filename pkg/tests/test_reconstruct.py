import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density
from tomolens.fixtures import N_STATES
from tomolens.noise import perturbation_ratio_bounds
from tomolens.protocols import PROTOCOL_NAMES, build_protocol
from tomolens.qmetrics import vec_density
from tomolens.reconstruct import (
    CountFormatError,
    CountTable,
    DegenerateDataError,
    ObservationVector,
    assemble_observations,
    read_count_csv,
    reconstruct_all,
    reconstruct_state,
    solve_linear,
    write_count_csv,
)

seeds = st.integers(0, 2**32 - 1)
OPT = build_protocol("Optimal")


def _optimal_counts(row_index, pair):
    raw = [(1000,)] * 4 + [(10, 10)] * 12
    raw[row_index] = pair
    return CountTable("Optimal", "t", tuple(raw))


def test_direct_row_assembly():
    raw = tuple((2727 if i == 0 else 5,) for i in range(36))
    obs = assemble_observations(build_protocol("Standard36"), CountTable("Standard36", "x", raw))
    assert obs.b[0] == 2727 and obs.variance[0] == 2727


@pytest.mark.parametrize("pair, b, var, rounding", [
    ((100, 60), 20, 80, "floor"),
    ((60, 101), -21, 80, "floor"),
    ((60, 101), -20, 80, "trunc"),
    ((101, 60), 20, 80, "trunc"),
])
def test_half_difference_rounding(pair, b, var, rounding):
    obs = assemble_observations(OPT, _optimal_counts(4, pair), rounding)
    assert obs.b[4] == b and obs.variance[4] == var


def test_signed_sum_assembly():
    p = build_protocol("Pauli")
    raw = tuple((10, 20, 30, 40) for _ in range(16))
    obs = assemble_observations(p, CountTable("Pauli", "x", raw))
    assert obs.b[0] == 10 + 20 - 30 - 40 and obs.variance[0] == 100
    assert obs.b[15] == 100  # all-plus row


def test_assembly_validation():
    with pytest.raises(CountFormatError):
        assemble_observations(OPT, CountTable("Optimal", "x", ((1,),) * 16))
    with pytest.raises(CountFormatError):
        assemble_observations(OPT, CountTable("Optimal", "x", ((1,),) * 4))
    with pytest.raises(CountFormatError):
        assemble_observations(OPT, _optimal_counts(5, (-1, 3)))
    with pytest.raises(ValueError):
        assemble_observations(OPT, _optimal_counts(5, (1, 3)), rounding="nearest")


def test_truncated_halving_matches_local_optimal_rows(fix):
    # the product-state difference rows of the optimal data coincide with the
    # Standard36 counts of the same projectors, halved toward zero
    s = dict(zip(fix.row_labels["S"], fix.observations["S"]))
    opt = build_protocol("Optimal")
    for n in range(N_STATES):
        raw = []
        for row in opt.rows:
            labels = [t.ket_label for t in row.terms]
            raw.append(tuple(int(s[l][n]) if l in s else 0 for l in labels))
        obs = assemble_observations(opt, CountTable("Optimal", f"psi_{n + 1}", tuple(raw)), "trunc")
        assert np.array_equal(obs.b[:12], fix.observations["O"][:12, n])
        assert np.array_equal(obs.variance[:12], fix.variance_tables["O"][:12, n])


@given(seeds, st.sampled_from(PROTOCOL_NAMES))
def test_noiseless_roundtrip(seed, name):
    p = build_protocol(name)
    rho = random_density(np.random.default_rng(seed))
    rec = reconstruct_state(p.A, p.A @ vec_density(rho))
    assert np.max(np.abs(rec.rho - rho)) < 1e-10


@given(seeds, st.sampled_from(PROTOCOL_NAMES), st.floats(0.01, 100))
def test_scale_invariance(seed, name, c):
    p = build_protocol(name)
    rng = np.random.default_rng(seed)
    b = p.A @ vec_density(random_density(rng)) * 1000 + rng.normal(size=len(p)) * 5
    r1 = reconstruct_state(p.A, ObservationVector(b, np.abs(b)))
    r2 = reconstruct_state(p.A, ObservationVector(c * b, c**2 * np.abs(b)))
    r3 = reconstruct_state(c * p.A, c * b)
    assert np.max(np.abs(r1.rho - r2.rho)) < 1e-10
    assert np.max(np.abs(r1.rho - r3.rho)) < 1e-10


def test_optimal_state7_entry(fix):
    rec = reconstruct_state(OPT.A, fix.observation("O", 7))
    assert abs(rec.rho[1, 1].real - 0.9818) < 5e-4


def test_standard36_least_squares(fix):
    a = build_protocol("Standard36").A
    b = fix.observations["S"][:, 0]
    rec = reconstruct_state(a, b)
    assert abs(rec.rho[0, 0].real - 0.4922) < 5e-4
    assert abs(rec.rho[0, 3] - (-0.4607 - 0.0750j)) < 5e-4
    assert rec.residual_norm > 0
    normal = a.T @ (a @ rec.x_raw - b)
    assert np.max(np.abs(normal)) < 1e-9 * np.linalg.norm(b)


def test_solver_shape_checks():
    with pytest.raises(ValueError):
        solve_linear(OPT.A, np.ones(15))


def test_degenerate_trace():
    # observations of a traceless operator
    x = np.zeros(16)
    x[1] = 1.0
    with pytest.raises(DegenerateDataError):
        reconstruct_state(OPT.A, OPT.A @ x)


def test_batch_isolates_failures(fix):
    obs = [fix.observation("O", n) for n in range(1, N_STATES + 1)]
    bad = np.zeros(16)
    bad[4] = 7.0  # traceless data
    obs[5] = ObservationVector(bad, np.abs(bad))
    items = reconstruct_all(OPT, obs, labels=[f"psi_{n}" for n in range(1, 18)])
    assert sum(i.ok for i in items) == 16
    assert not items[5].ok and "DegenerateDataError" in items[5].error
    assert np.max(np.abs(items[0].reconstruction.rho - fix.reconstructed["O", 1])) < 5e-4
    assert reconstruct_all(OPT, []) == []


def test_batch_handles_malformed_count_table():
    good = tuple((100,) for _ in range(16))
    items = reconstruct_all(build_protocol("JKMW"), [
        CountTable("JKMW", "a", good), CountTable("JKMW", "b", good[:3]),
    ])
    assert items[0].ok and not items[1].ok


def test_count_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    tables = [
        CountTable("Optimal", "s1", tuple(tuple(int(v) for v in rng.integers(0, 500, r.assembly.arity))
                                          for r in OPT.rows)),
        CountTable("Pauli", "s2", tuple((1, 2, 3, 4) for _ in range(16))),
    ]
    path = tmp_path / "counts.csv"
    write_count_csv(tables, path)
    assert read_count_csv(path) == tables


def test_count_csv_errors_carry_location(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("protocol,state,row_index,row_label,c1\nJKMW,s,1,HH,abc\n")
    with pytest.raises(CountFormatError, match=r"bad.csv:2"):
        read_count_csv(path)
    path.write_text("nonsense\n")
    with pytest.raises(CountFormatError, match="header"):
        read_count_csv(path)
    path.write_text("protocol,state,row_index,row_label,c1\nJKMW,s,1,HH,5\n")
    with pytest.raises(CountFormatError, match="row indices"):
        read_count_csv(path)


def test_fixture_counts_reconstruct(fix):
    tables = read_count_csv(fix.root / "counts_M.csv")
    assert len(tables) == 17
    items = reconstruct_all(build_protocol("MUB"), tables)
    for n, it in enumerate(items, start=1):
        assert np.max(np.abs(it.reconstruction.rho - fix.reconstructed["M", n])) < 5e-4


@pytest.mark.parametrize("name", PROTOCOL_NAMES)
def test_perturbation_sandwich(name):
    a = build_protocol(name).A
    rng = np.random.default_rng(100)
    for _ in range(200):
        b = a @ vec_density(random_density(rng)) * 1000
        db = rng.normal(size=len(b)) * rng.uniform(0.1, 50)
        if a.shape[0] > a.shape[1]:
            db = a @ np.linalg.lstsq(a, db, rcond=None)[0]  # range of A
        lo, mid, hi = perturbation_ratio_bounds(a, b, db)
        assert lo <= mid * (1 + 1e-12) and mid <= hi * (1 + 1e-12)


def test_perturbation_bounds_trivial_cases():
    b = np.arange(1.0, 17.0)
    assert perturbation_ratio_bounds(np.eye(16), b, np.zeros(16)) == (0.0, 0.0, 0.0)
    lo, mid, hi = perturbation_ratio_bounds(np.eye(16), b, np.ones(16))
    assert math.isclose(lo, mid) and math.isclose(mid, hi)
