"""Rebuild the reconstruction, error-radius and trace-distance tables from the
transcribed observation vectors and print them next to the stored values."""

import argparse

import numpy as np

from tomolens.fixtures import CODES, N_STATES, golden_reconstructions, golden_run, load_fixtures
from tomolens.noise import error_radius
from tomolens.protocols import build_protocol
from tomolens.qmetrics import trace_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fixtures")
    args = ap.parse_args()
    fix = load_fixtures(args.fixtures)
    recon = golden_reconstructions(fix)

    print("error radius R (computed / stored)")
    print("state " + " ".join(f"{c:>15s}" for c in CODES))
    for n in range(1, N_STATES + 1):
        cells = []
        for code in CODES:
            R = error_radius(build_protocol(code).A, fix.observation(code, n), recon[code, n])
            cells.append(f"{R:.4f}/{fix.R(code, n):.4f}")
        print(f"{n:5d} " + " ".join(f"{c:>15s}" for c in cells))

    print("\nrelative trace distances T_OM T_OS T_MS (computed / stored)")
    for n in range(1, N_STATES + 1):
        o, m, s = (recon[c, n].rho for c in "OMS")
        got = (trace_distance(o, m), trace_distance(o, s), trace_distance(m, s))
        print(f"{n:5d} " + " ".join(f"{g:.4f}/{w:.4f}" for g, w in zip(got, fix.T_table[n - 1])))

    errs = {k: np.max(np.abs(r.rho - fix.reconstructed[k])) for k, r in recon.items()}
    print(f"\nlargest density-matrix deviation: {max(errs.values()):.2e} at {max(errs, key=errs.get)}")
    for check in golden_run(fix, recon):
        print(check.line())


if __name__ == "__main__":
    main()
