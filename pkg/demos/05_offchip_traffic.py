"""Off-chip traffic: unified engine vs separated engine vs streaming pipeline.

A unified engine round-trips every activation map through DRAM; a separated
depthwise engine fuses away the depthwise crossings; the streaming pipeline
keeps all intermediate maps on chip, leaving only streamed weights and the
shortcut data of deep skip blocks.
"""

from streamdse import (MB, architecture_traffic, balanced_memory_allocation,
                       builtin_network)

ZC706_SRAM = 1883520

print(f"{'network':15s} {'arch':>10} {'FM':>8} {'shortcut':>9} "
      f"{'weights':>8} {'total':>8}   MB/frame")
for name in ("mobilenet_v1", "mobilenet_v2", "shufflenet_v1", "shufflenet_v2"):
    net = builtin_network(name)
    boundary, _ = balanced_memory_allocation(net, ZC706_SRAM)
    rows = [("ue", architecture_traffic(net, "ue")),
            ("se", architecture_traffic(net, "se")),
            ("streaming", architecture_traffic(net, "streaming", boundary))]
    for arch, (fm, shortcut, weights) in rows:
        total = fm + shortcut + weights
        print(f"{name:15s} {arch:>10} {fm / MB:>8.2f} {shortcut / MB:>9.2f} "
              f"{weights / MB:>8.2f} {total / MB:>8.2f}")
    ue_fm = rows[0][1][0]
    st_fm = rows[2][1][0]
    print(f"{'':15s} streaming removes "
          f"{100 * (1 - st_fm / ue_fm):.1f}% of the FM crossings\n")
