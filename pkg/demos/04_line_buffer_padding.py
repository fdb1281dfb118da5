"""Where padding cycles go in a streaming line buffer.

Writing zeros through the buffer's write port costs (F+2)(F+1) cycles per
frame on a 3x3 same-padded layer; generating them on the read side brings
a frame down to the F*F floor.  The simulator reproduces both closed forms
cycle-exactly and shows the stride-2 window bubbles the extra buffer line
removes.
"""

from streamdse import (DATAFLOW, DIRECT, SimConfig, simulate,
                       stride2_bubble_count, validate_against_closed_form)

print("3x3, stride 1, same padding: cycles per frame")
print(f"{'F':>4} {'direct':>8} {'read-side':>10} {'ratio':>7} {'closed':>7}")
for row in validate_against_closed_form([7, 14, 28, 56, 112]):
    print(f"{row.f:>4} {row.direct_cycles:>8} {row.dataflow_cycles:>10} "
          f"{float(row.simulated_ratio):>7.3f} {float(row.closed_form):>7.3f}"
          f"  {'ok' if row.match else 'MISMATCH'}")

print("\nthe 1.47x speedup quoted for 7x7 depthwise layers is the F=7 row.")

print("\nstride 2 (3x3, pad 1): idle cycles per frame beyond the F*F floor")
print(f"{'F':>4} {'direct k lines':>15} {'read-side k+1 lines':>20}")
for f in (8, 12, 16, 28):
    print(f"{f:>4} {stride2_bubble_count(f, 3, DIRECT):>15} "
          f"{stride2_bubble_count(f, 3, DATAFLOW):>20}")

print("\na steady-state trace of the small direct case "
      "(w=write, .=stall/drain, *=PE busy):")
trace = []
res = simulate(SimConfig(f=8, k=3, stride=2, pad=1, scheme=DIRECT, frames=3),
               trace=trace)
start = res.frame_completion_cycles[0]
lane = "".join("w" if e == "write" else "." for _, e, _, _ in trace)
pe = "".join("*" if a else " " for _, _, _, a in trace)
print("  port:", lane[start:start + 64])
print("  PE  :", pe[start:start + 64])
