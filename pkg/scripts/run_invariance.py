"""Mesh-refinement study for Cauchy-difference deconvolution.

Runs the invariance experiment from a JSON config through the CLI, then adds
the Gaussian control family (exact conjugate posterior mean) at the same
sizes and prints both drift tables.
"""

import argparse
import csv
import json
from pathlib import Path

from stablebip.cli import main as cli_main
from stablebip.deconvolution import make_deconvolution_family, observation_points, synthetic_data
from stablebip.wellposedness import discretisation_invariance_study, relative_l2

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "configs" / "invariance_cauchy.json"))
    ap.add_argument("--out", default="runs/invariance")
    args = ap.parse_args(argv)

    code = cli_main(["invariance", "--config", args.config, "--out", args.out])
    if code:
        return code
    print("Cauchy difference prior, pooled MCMC median:")
    with open(Path(args.out) / "drift.csv") as fh:
        for row in csv.DictReader(fh):
            print(f"  {row['n_coarse']:>4} -> {row['n_fine']:>4}: {float(row['relative_l2']):.4f}")

    cfg = json.loads(Path(args.config).read_text())
    m, inv = cfg["model"], cfg.get("invariance", {})
    sizes = inv.get("sizes", [16, 32, 64, 128])
    y = synthetic_data(m["observations"], m["kernel_width"], m["noise_scale"], cfg["data"]["seed"])

    def family(n):
        return make_deconvolution_family(n, m["observations"], m["kernel_width"], m["noise_scale"],
                                         alpha=2.0, increment_scale=1.0)

    rows = discretisation_invariance_study(family, sizes, y, "conjugate", 0,
                                           eval_points=observation_points(inv.get("eval_points", 16)))
    print("Gaussian control, exact posterior mean:")
    for a, b in zip(rows, rows[1:]):
        print(f"  {a.n:>4} -> {b.n:>4}: {relative_l2(a.summary, b.summary):.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
