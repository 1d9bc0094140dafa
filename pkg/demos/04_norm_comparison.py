"""Which distance metric to use depends on the shape of the change.

Three metrics score the difference between segment covariances: the
squared Frobenius norm (sums every squared entry), the maximum absolute
entry, and a Gaussian likelihood ratio. A change concentrated on a few
nodes favors the maximum norm; a diffuse change across most of the
panel favors the aggregating metrics. The harness calibrates rho so the
Frobenius metric sits at 50% power, making the comparison fair.
"""
import argparse

from corrshift import DetectorConfig, norm_comparison_experiment

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--reps", type=int, default=80, help="replicates per cell")
parser.add_argument("--seed", type=int, default=4)
args = parser.parse_args()

# desk-size panel so the calibration loop stays quick
config = DetectorConfig(b_count=120, seed=args.seed)
rows = norm_comparison_experiment(
    n=10, T=200, proportions=(0.2, 1.0),
    config=config, reps=args.reps, cal_reps=args.reps,
)

print(f"n=10, T=200, change at t=100, reps={args.reps}\n")
print("  altered  block  rho      metric     power")
for row in rows:
    print(f"  {row.proportion:7.0%}  {row.block:5d}  {row.rho:.3f}  "
          f"{row.metric.value:>9s}  {row.power:.3f}")

print("\nreading the table: at 20% altered the max metric beats frobenius;"
      "\nat 100% altered the ordering reverses. The likelihood ratio keys on"
      "\nlog-determinant change, so it rewards concentrated strong blocks"
      "\nover diffuse weak ones regardless of how many entries moved.")
