"""Sweep the engine-group boundary and watch SRAM trace out a U.

Shallow layers are cheap to keep fully on-chip (small weights, line-buffered
activations); deep layers are cheap to stream (small activations, weights
fetched once per frame).  Somewhere in between the total SRAM bottoms out.
The balanced allocation then rides the curve back up until the BRAM budget
binds, converting spare SRAM into less DRAM traffic.
"""

import numpy as np

from streamdse import (MB, balanced_memory_allocation, boundary_sweep,
                       builtin_network, design_point_memory)

ZC706_SRAM = 1883520  # 545 x 36 Kbit block RAMs at 75% utilisation

for name in ("mobilenet_v2", "shufflenet_v2"):
    net = builtin_network(name)
    rows = boundary_sweep(net)
    sram = np.array([s for _, s, _ in rows]) / MB
    dram = np.array([d for _, _, d in rows]) / MB

    print(f"== {name}: {len(net)} layers")
    marks = np.linspace(0, len(net), 9, dtype=int)
    print("boundary:", "  ".join(f"{l:>5d}" for l in marks))
    print("SRAM MB :", "  ".join(f"{sram[l]:>5.2f}" for l in marks))
    print("DRAM MB :", "  ".join(f"{dram[l]:>5.2f}" for l in marks))

    bmin, bfin = balanced_memory_allocation(net, ZC706_SRAM)
    fp_min = design_point_memory(net, bmin)
    fp_fin = design_point_memory(net, bfin)
    print(f"minimum SRAM: {fp_min.sram_total_bytes / MB:.2f} MB at boundary "
          f"{bmin} with {fp_min.dram_total_bytes / MB:.2f} MB DRAM/frame")
    print(f"zc706 budget: boundary {bfin}, "
          f"{fp_fin.sram_total_bytes / MB:.2f} MB SRAM, DRAM drops to "
          f"{fp_fin.dram_total_bytes / MB:.2f} MB/frame")
    print(f"on-chip breakdown at the minimum: "
          f"line {fp_min.line_buffer_bytes / MB:.2f}, "
          f"rom {fp_min.weight_rom_bytes / MB:.2f}, "
          f"gfm {fp_min.gfm_buffer_bytes / MB:.2f}, "
          f"stream {fp_min.weight_buffer_bytes / MB:.3f}, "
          f"shortcut {fp_min.shortcut_buffer_bytes / MB:.3f} MB")
    print()
