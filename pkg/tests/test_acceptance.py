import math

import numpy as np

from conftest import random_density, random_hermitian
from tomolens.figures import embed_triangle
from tomolens.fixtures import CODES, N_STATES
from tomolens.noise import (
    STRICT_DEVIATION_MULTIPLE,
    deviation_probability,
    error_radius,
    perturbation_ratio_bounds,
    poisson_tail_bound,
)
from tomolens.protocols import BELL, PROTOCOL_NAMES, build_protocol, catalog_states
from tomolens.qmetrics import bures_disturbance, hs_distance, pure_density, trace_distance, vec_density
from tomolens.reconstruct import reconstruct_state
from tomolens.simulate import SimulationConfig, expected_observations, ideal_rates, run_trials
from scipy.stats import poisson


def test_1_condition_numbers(criterion):
    want = {"Optimal": (1.0, 1e-9), "Pauli": (math.sqrt(2), 1e-9), "MUB": (math.sqrt(5), 1e-9),
            "Standard36": (3.0, 1e-9), "JKMW": (math.sqrt(60.1), 5e-3)}
    errs = {n: abs(build_protocol(n).kappa - k) for n, (k, _) in want.items()}
    ok = all(errs[n] <= tol for n, (_, tol) in want.items())
    criterion("1 condition numbers", ok, ", ".join(f"{n}={build_protocol(n).kappa:.6f}" for n in want))


def test_2_coefficient_matrices_exact(fix, criterion):
    bad = [c for c in CODES
           if not np.array_equal(build_protocol(c).A * fix.coefficient_matrices[c].denominator,
                                 fix.coefficient_matrices[c].numerators)]
    criterion("2 coefficient matrices bit-exact", not bad, f"mismatched: {bad}" if bad else "5/5")


def test_3_reconstructed_matrices(fix, golden, criterion):
    errs = {k: float(np.max(np.abs(r.rho - fix.reconstructed[k]))) for k, r in golden.items()}
    worst = max(errs.values())
    criterion("3 reconstructions (85) within 5e-4", len(errs) == 85 and worst <= 5e-4, f"worst {worst:.2e}")


def test_4_error_radius_table(fix, golden, criterion):
    worst = 0.0
    for j, code in enumerate(CODES):
        a = build_protocol(code).A
        for n in range(1, N_STATES + 1):
            R = error_radius(a, fix.observation(code, n), golden[code, n])
            worst = max(worst, abs(R - fix.R_table[n - 1, j]))
    criterion("4 error radii (85) within 5e-3", worst <= 5e-3, f"worst {worst:.2e}, rescale 1.3, m=2")


def test_5_relative_trace_distances(fix, golden, criterion):
    worst = 0.0
    for n in range(1, N_STATES + 1):
        o, m, s = (golden[c, n].rho for c in "OMS")
        got = np.array([trace_distance(o, m), trace_distance(o, s), trace_distance(m, s)])
        worst = max(worst, float(np.max(np.abs(got - fix.T_table[n - 1]))))
    criterion("5 relative trace distances (51) within 5e-4", worst <= 5e-4, f"worst {worst:.2e}")


def test_6a_perturbation_sandwich(criterion):
    rng = np.random.default_rng(61)
    bad = 0
    for name in PROTOCOL_NAMES:
        a = build_protocol(name).A
        tall = a.shape[0] > a.shape[1]
        for _ in range(1000):
            b = a @ vec_density(random_density(rng)) * 5000
            db = rng.normal(size=len(b)) * rng.uniform(0.1, 100)
            if tall:
                db = a @ np.linalg.lstsq(a, db, rcond=None)[0]
            lo, mid, hi = perturbation_ratio_bounds(a, b, db)
            bad += not (lo <= mid * (1 + 1e-12) and mid <= hi * (1 + 1e-12))
    criterion("6a sandwich on 5x1000 perturbations", bad == 0, f"{bad} violations")


def test_6b_distance_inequalities(criterion):
    rng = np.random.default_rng(62)
    bad = 0
    for _ in range(1000):
        a, b = random_hermitian(rng), random_hermitian(rng)
        E = trace_distance(a, b)
        dx = np.linalg.norm(vec_density(a) - vec_density(b))
        bad += not (hs_distance(a, b) <= 2 * E + 1e-12 and 2 * E <= math.sqrt(8) * dx + 1e-12)
    criterion("6b D_HS <= 2E <= sqrt(2d)|dx| on 1000 pairs", bad == 0, f"{bad} violations")


def test_6c_bures_below_trace_distance(criterion):
    rng = np.random.default_rng(20261016)
    worst, bad = -np.inf, 0
    for _ in range(500):
        a, b = random_density(rng), random_density(rng)
        gap = bures_disturbance(a, b) - trace_distance(a, b)
        worst = max(worst, gap)
        bad += gap > 1e-12
    criterion("6c D_B <= E on 500 random physical pairs", bad == 0,
              f"{bad} violations, max D_B - E = {worst:.3e}")


def test_6d_monte_carlo_coverage(criterion):
    rho = pure_density(BELL["PHI+"])
    cov = {}
    for name in PROTOCOL_NAMES:
        rep = run_trials(rho, build_protocol(name), SimulationConfig(flux=5000, trials=500, seed=64), "PHI+")
        cov[name] = rep.coverage if rep.failures == 0 else 0.0
    criterion("6d coverage E <= R in >= 99% of 500 trials", all(c >= 0.99 for c in cov.values()),
              ", ".join(f"{n}={c:.3f}" for n, c in cov.items()))


def test_6e_noiseless_roundtrip(criterion):
    worst = 0.0
    for name in PROTOCOL_NAMES:
        p = build_protocol(name)
        for ket in catalog_states():
            rho = pure_density(ket)
            rec = reconstruct_state(p.A, expected_observations(p, ideal_rates(p, rho, 5000)))
            worst = max(worst, float(np.max(np.abs(rec.rho - rho))))
    criterion("6e noiseless roundtrip (5x17) < 1e-8", worst < 1e-8, f"worst {worst:.1e}")


def test_6f_poisson_statistics(criterion):
    p20 = deviation_probability(20, STRICT_DEVIATION_MULTIPLE)
    dominated = all(
        poisson_tail_bound(mu, k) >= poisson.sf(math.ceil(mu + k * math.sqrt(mu)) - 1, mu)
        for mu in (5, 20, 100) for k in (1.0, math.sqrt(2), 2 * math.sqrt(2))
    )
    criterion("6f Poisson deviation probability and tail bound", p20 >= 0.993 and dominated,
              f"Pr(20)={p20:.4f}, bound dominates={dominated}")


def test_7_triangle_embedding(fix, criterion):
    worst = 0.0
    for t_om, t_os, t_ms in fix.T_table:
        d = embed_triangle(t_os, t_om, t_ms).pairwise()
        worst = max(worst, abs(d["OS"] - t_os), abs(d["OM"] - t_om), abs(d["SM"] - t_ms))
    criterion("7 triangle embedding (17 rows) within 1e-9", worst <= 1e-9, f"worst {worst:.1e}")
