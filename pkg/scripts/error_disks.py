"""Draw error-disk triangles (O, S, M) for selected states from the stored tables."""

import argparse
from pathlib import Path

from tomolens.figures import embed_triangle, error_disks_svg
from tomolens.fixtures import load_fixtures


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--states", nargs="+", type=int, default=[4, 7, 9, 14])
    ap.add_argument("--outdir", default="figures")
    ap.add_argument("--fixtures")
    args = ap.parse_args()
    fix = load_fixtures(args.fixtures)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for n in args.states:
        t_om, t_os, t_ms = fix.T_table[n - 1]
        emb = embed_triangle(t_os, t_om, t_ms)
        radii = {c: fix.R(c, n) for c in "OSM"}
        path = outdir / f"error_disks_psi{n}.svg"
        path.write_text(error_disks_svg(emb, radii, title=f"state {n}"))
        print(f"{path}: OS={t_os:.4f} OM={t_om:.4f} SM={t_ms:.4f} R={radii}")


if __name__ == "__main__":
    main()
