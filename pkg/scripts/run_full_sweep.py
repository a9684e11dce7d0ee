"""Full trajectory sweep: k in (2.5, 12.5), step 0.025, R = 1.5.

400 eigensolves per cavity; several hours at the default resolution on a
single core. Writes spectra.csv and boxcount.json for the figure renderer.
"""

import argparse
import sys

sys.path.insert(0, "src")

from helmlab import spectral_lab as lab  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cavity", choices=["small", "large"], required=True)
    ap.add_argument("--kmin", type=float, default=2.5)
    ap.add_argument("--kmax", type=float, default=12.5)
    ap.add_argument("--step", type=float, default=0.025)
    ap.add_argument("--R", type=float, default=1.5)
    ap.add_argument("--h", type=float, default=0.012)
    ap.add_argument("--nev", type=int, default=8)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default=".")
    args = ap.parse_args()

    domain = lab.lab_domain(args.cavity, args.R)
    traj = lab.sweep(domain, args.kmin, args.kmax, args.step, args.nev,
                     dtn_backend="fourier", h=args.h, jobs=args.jobs)
    lab.write_spectra_csv(f"{args.out}/spectra.csv",
                          lab.spectra_rows_from_trajectories(traj))
    box = lab.BoxSpec(0.2, 0.05, float(traj.k_grid[0]), float(traj.k_grid[-1]))
    count, members = lab.box_count(traj, box)
    lab.write_boxcount_json(f"{args.out}/boxcount.json", box, count, members)
    print(f"{args.cavity}: {len(traj.tracks)} tracks, box count {count}")


if __name__ == "__main__":
    main()
