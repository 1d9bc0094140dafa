"""Autocorrelated panels break the plain bootstrap; the sieve fixes it.

Resampling columns independently assumes exchangeable time points. On an
AR(1) panel that assumption understates the variance of the scan
statistic and the detector rejects far too often. The sieve bootstrap
fits a per-node AR filter, resamples the whitened residuals, and
regenerates series that keep the autocorrelation, restoring calibration.
"""
import numpy as np

from corrshift import (DetectorConfig, Sieve, detect_single, durbin_watson,
                       generate_ar1_panel, select_ar_order, standardize)
from corrshift._streams import derive_seed, stream

n, T, phi = 8, 300, 0.5

# one panel: the screen flags the autocorrelation before any scan runs
panel = standardize(generate_ar1_panel(n, T, phi, stream(106, 0)))
diag = durbin_watson(panel)
print(f"AR(1) panel, phi={phi}: mean Durbin-Watson "
      f"{np.mean(diag.per_node_dw):.2f} (2.0 means uncorrelated), "
      f"flagged: {diag.any_significant}")
print(f"cross-validated AR order choice: {select_ar_order(panel, 5)}\n")

# small null study: rejection rates with no change anywhere
seeds = 40
iid_rej = sieve_rej = 0
for r in range(seeds):
    p = standardize(generate_ar1_panel(n, T, phi, stream(107, 0, r)))
    iid_cfg = DetectorConfig(b_count=150, seed=derive_seed(107, 1, r))
    sieve_cfg = DetectorConfig(b_count=150, mode=Sieve(1), seed=derive_seed(107, 2, r))
    iid_rej += int(detect_single(p, iid_cfg).significant)
    sieve_rej += int(detect_single(p, sieve_cfg).significant)

print(f"false-positive rate over {seeds} null panels at alpha=0.05:")
print(f"  iid bootstrap    {iid_rej / seeds:.3f}")
print(f"  sieve bootstrap  {sieve_rej / seeds:.3f}")
print("\nthe iid rate is an order of magnitude above the nominal level;"
      "\nthe sieve rate sits near it. The CLI prints a warning suggesting"
      "\n--bootstrap sieve whenever the Durbin-Watson screen fires.")
