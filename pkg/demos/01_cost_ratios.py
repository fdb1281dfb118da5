"""Operation counts and feature-map access costs of lightweight layers.

Depthwise-separable convolutions cut MACs by roughly the kernel area but
roughly double feature-map traffic; shortcut joins need almost no compute
yet move three full maps.  This script tabulates both effects for a few
layer shapes and then totals the four builtin benchmark networks.
"""

import numpy as np

from streamdse import builtin_networks, network_totals, ratios

print("ratios relative to a standard convolution (K=3)")
print(f"{'M':>5} {'N':>5} {'RA_DSC':>8} {'RO_DSC':>8} {'RA_SCB':>8} {'RO_SCB':>10}")
for m, n in [(32, 32), (64, 128), (116, 116), (960, 160)]:
    ra_dsc, ro_dsc, ra_scb, ro_scb = ratios(3, m, n)
    print(f"{m:>5} {n:>5} {float(ra_dsc):>8.3f} {float(ro_dsc):>8.4f} "
          f"{float(ra_scb):>8.3f} {float(ro_scb):>10.6f}")

print("\nso a same-width separable stage needs ~1/9 of the MACs "
      "but 2x the activation traffic.\n")

print(f"{'network':15s} {'MACs':>10} {'params':>9} {'fc params':>9} "
      f"{'access/MAC':>10}")
for net in builtin_networks():
    cost = network_totals(net)
    access = np.array([c.fm_access for c in cost.per_layer], dtype=float)
    print(f"{net.name:15s} {cost.total_macs/1e6:>9.1f}M "
          f"{cost.total_weights/1e6:>8.2f}M {cost.fc_weights/1e6:>8.2f}M "
          f"{access.sum()/cost.total_macs:>10.3f}")

print("\nthe benchmarks move 0.05-0.12 activations per MAC, an order of "
      "magnitude above classic CNNs, which is why the memory system, not "
      "the multiplier array, decides their throughput.")
