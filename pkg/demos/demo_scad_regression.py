"""Sparse robust regression: SCAD vs LASSO via annealed Langevin optimization.

Run with:  python demos/demo_scad_regression.py [out_dir]

Each replication draws a 60x8 correlated Gaussian design, a sparse truth
beta* = (3, 1.5, 0, 0, 2, 0, 0, 0) and noise with a 10% Cauchy contamination,
then minimizes  |y - X b|^2 + 2n * penalty(b)  by running the subgradient
Langevin chain at a large inverse temperature (beta = 100) and taking the
ergodic mean.  The penalty level is chosen by 5-fold cross-validation on
truncated chains.  SCAD's folded-concave shape releases large coefficients
from shrinkage, which is where it beats LASSO on median relative model error.

This demo runs 6 replications with shortened chains (~half a minute); the
full 100-replication benchmark lives behind `sgula scad` and criterion 6 of
the acceptance suite.
"""

import sys

import numpy as np

from sgula import ScadStudySpec, emit_report, run_scad_regression


def main(out_dir=None):
    spec = ScadStudySpec(n_reps=6, chain_iters=2_000, cv_chain_iters=500,
                         gamma_grid=tuple(np.geomspace(1e-3, 1e1, 8)), seed=0)
    report = run_scad_regression(spec)

    m = report.metrics
    print("median relative model error (vs OLS):")
    print(f"  SCAD   : {m['mrme_scad']:.3f}   (median gamma {m['median_gamma_scad']:.3g})")
    print(f"  LASSO  : {m['mrme_lasso']:.3f}   (median gamma {m['median_gamma_lasso']:.3g})")
    print(f"  oracle : {m['mrme_oracle']:.3f}   (true support, least squares)")
    print("per-replication RME (scad / lasso / oracle):")
    for row in m["replications"]:
        print(f"  rep {row['rep']}: {row['rme_scad']:.3f} / "
              f"{row['rme_lasso']:.3f} / {row['rme_oracle']:.3f}")
    print("gates (bands are calibrated for the full 100-replication run):")
    print(" ", {k: bool(v) for k, v in report.gates.items()})

    if out_dir is not None:
        manifest = emit_report(report, out_dir)
        print(f"wrote {len(manifest)} artifacts to {out_dir}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
