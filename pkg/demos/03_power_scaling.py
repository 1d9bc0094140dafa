"""How detection power scales with panel dimension.

A fixed 4-node correlated block appears at the midpoint while the
total node count n grows. With the panel length tied to the dimension
by T = n(n-1) + C, the distance signal from the block stays fixed while
the noise floor shrinks, so larger panels detect the same perturbation
more reliably despite it being a smaller fraction of the network.
"""
import argparse

from corrshift import DetectorConfig, power_experiment

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--reps", type=int, default=100, help="replicates per n")
parser.add_argument("--B", type=int, default=150, help="bootstrap replicates")
parser.add_argument("--seed", type=int, default=3)
args = parser.parse_args()

config = DetectorConfig(b_count=args.B, seed=args.seed)
results = power_experiment([4, 6, 8], C=30, rho=0.9, reps=args.reps, config=config)

print(f"reps={args.reps}, B={args.B}, 4-node block with rho=0.9, T = n(n-1) + 30\n")
print("  n    T   power   histogram around the true break (offset: freq)")
for res in results:
    hist = res.detection_histogram
    center = []
    for off in range(-3, 4):
        freq = hist.get(off, 0.0)
        center.append(f"{off:+d}: {freq:.2f}")
    print(f"  {res.n:2d}  {res.T:3d}   {res.power:.3f}   {'  '.join(center)}")

print("\nthe histogram mass concentrates at offset 0 as n grows; detections"
      "\nfar from the true break become rare even though the block itself"
      "\nnever gets larger.")
