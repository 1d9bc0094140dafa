"""Detect a single correlation break, end to end.

Eight of twenty series pick up an exchangeable correlation of 0.6 halfway
through the panel. The scan standardizes each row, computes the squared
Frobenius distance between segment covariances at every candidate split,
z-scores it against bootstrap replicates, and tests the largest z.
"""
import numpy as np

from corrshift import (DetectorConfig, SeriesPanel, block_exchangeable_sigma,
                       detect_single, format_p_value, standardize)
from corrshift._streams import stream

n, T, true_k = 20, 300, 150
rng = stream(101, 0)

# regime 1: independent noise; regime 2: an 8-node correlated block
sigma2 = block_exchangeable_sigma(n, 8, 0.6)
factor = np.linalg.cholesky(sigma2.values)
left = rng.standard_normal((n, true_k))
right = factor @ rng.standard_normal((n, T - true_k))
panel = standardize(SeriesPanel(np.hstack([left, right])))

config = DetectorConfig(b_count=300, seed=1)
det = detect_single(panel, config)

print(f"panel: n={n}, T={T}, true break after t={true_k}")
print(f"detected k = {det.location} (error {det.location - true_k:+d})")
print(f"Z = {det.z:.3f}, p {format_p_value(det.p_value, config.b_count)}, "
      f"significant at alpha={config.alpha}: {det.significant}")

# the z profile around the break: the peak is sharp, the edges are quiet
profile = det.profile
for k in range(true_k - 20, true_k + 25, 5):
    i = int(np.searchsorted(profile.k_values, k))
    bar = "#" * max(0, int(round(3 * profile.z_values[i])))
    print(f"  k={k:3d}  z={profile.z_values[i]:7.3f}  {bar}")

# the same panel under a null configuration: shuffle regimes away
null_panel = standardize(SeriesPanel(rng.standard_normal((n, T))))
null_det = detect_single(null_panel, config)
print(f"null panel: Z = {null_det.z:.3f}, "
      f"p {format_p_value(null_det.p_value, config.b_count)}, "
      f"significant: {null_det.significant}")
