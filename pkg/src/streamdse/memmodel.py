"""On-chip buffer sizing and off-chip traffic for the hybrid-engine pipeline.

Layers before the group boundary run on feature-map-reused engines (FRCE:
weights resident on-chip, sliding-window line buffer); layers after it run
on weight-reused engines (WRCE: ping-pong global feature-map buffer, each
weight fetched from DRAM exactly once).  Shortcut data of a skip-connection
block lives in an on-chip delay buffer while the block is FRCE-resident and
crosses DRAM twice (write + read) once the join falls on the WRCE side.

Conventions, applied consistently across the module:
  * weight ROM/stream sizes count kernel elements only; bias parameters sit
    in accumulator registers, not block RAM, but stream from DRAM with the
    kernels on the WRCE side;
  * depthwise kernels are small and stay on-chip even under WRCE, so DRAM
    weight traffic counts non-depthwise layers only;
  * fully-connected weight ROM is reported separately (comparison outputs
    exclude it) but remains part of the physical SRAM total;
  * MB figures use 1 MB = 2**20 bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .costmodel import weight_count
from .netspec import LayerKind, LayerSpec, NetworkSpec, ScbBlock, fm_bytes

MB = float(2 ** 20)


class CEKind(Enum):
    FRCE = "frce"  # feature-map reused: weights on-chip, line-buffered FM
    WRCE = "wrce"  # weight reused: FM on-chip (ping-pong), weights streamed


def kernel_bytes(layer: LayerSpec, bits: int) -> int:
    """On-chip ROM size for the layer's full kernel set (biases excluded)."""
    kind = layer.kind
    if kind is LayerKind.STC:
        elems = layer.k ** 2 * (layer.m // layer.groups) * layer.n
    elif kind is LayerKind.DWC:
        elems = layer.k ** 2 * layer.m
    elif kind is LayerKind.PWC:
        elems = (layer.m // layer.groups) * layer.n
    elif kind is LayerKind.FC:
        elems = layer.m * layer.n
    else:
        elems = 0
    return elems * bits // 8


def _kernel_per_output(layer: LayerSpec) -> int:
    """Kernel elements needed to produce one output channel's pixel."""
    if layer.kind is LayerKind.DWC:
        return layer.k ** 2
    if layer.kind is LayerKind.FC:
        return layer.m
    return layer.k ** 2 * (layer.m // layer.groups)


def frce_fm_buffer(layer: LayerSpec, bits: int) -> int:
    """Line buffer: (K-1) full lines plus K-1 pixels of the input map.

    Pointwise and join layers need no window context; pooling layers slide a
    window just like convolutions.
    """
    if layer.kind in (LayerKind.PWC, LayerKind.FC, LayerKind.SCB_ADD):
        return 0
    pixels = (layer.k - 1) * layer.f_in + (layer.k - 1)
    return pixels * layer.m * bits // 8


def wrce_fm_buffer(layer: LayerSpec, bits: int) -> int:
    """Ping-pong global FM buffer (2 * F^2 * M), except per-channel kinds.

    Depthwise and pooling layers work channel-by-channel in location-first
    order, so a window's worth of lines of a single channel suffices.
    """
    if layer.kind is LayerKind.SCB_ADD:
        return 0
    if layer.kind in (LayerKind.DWC, LayerKind.POOL):
        return layer.k * layer.f_in * bits // 8
    return 2 * layer.f_in ** 2 * layer.m * bits // 8


def weight_storage(layer: LayerSpec, kind: CEKind, bits: int, pw: int = 1) -> int:
    """On-chip weight bytes for the layer under the given engine kind.

    FRCE keeps the full kernel set in ROM.  WRCE streams kernels through a
    double buffer sized for ``pw`` concurrent output channels; depthwise
    kernels are small enough to stay resident instead of streaming.
    """
    if kind is CEKind.FRCE:
        return kernel_bytes(layer, bits)
    if layer.kind is LayerKind.DWC:
        return kernel_bytes(layer, bits)
    if layer.kind in (LayerKind.POOL, LayerKind.SCB_ADD):
        return 0
    return 2 * _kernel_per_output(layer) * pw * bits // 8


def weight_reads_per_frame(layer: LayerSpec, kind: CEKind) -> int:
    """How many times the full kernel set is read while producing one frame."""
    if layer.kind in (LayerKind.POOL, LayerKind.SCB_ADD):
        return 0
    return layer.f_out ** 2 if kind is CEKind.FRCE else 1


@dataclass(frozen=True)
class ScbBufferInfo:
    scheme: str
    shortcut_lines: int  # delay lines held by the shortcut branch
    total_lines: int     # shortcut plus main-branch line usage
    bytes: int           # shortcut delay buffer size


def scb_delay_buffer(block: ScbBlock, scheme: str, bits: int) -> ScbBufferInfo:
    """Delay-buffer lines for a bypass-style skip-connection block.

    The fully-reused feature-map scheme holds K-1 lines per spatial layer on
    the main branch, so the shortcut only waits out the accumulated window
    latency.  The line-reuse baseline computes on whole buffered lines (K
    lines to start, one extra for continuity) and needs two further lines of
    slack to keep both branches in step.
    """
    if not block.bypass:
        raise ValueError(f"SCB block {block.id} has no stored shortcut branch")
    spatial = [l for l in block.main_branch if l.k > 1]
    if scheme == "fm_reuse":
        shortcut = sum(l.k - 1 for l in spatial)
        main = sum(l.k - 1 for l in spatial)
    elif scheme == "line_reuse":
        shortcut = sum(l.k for l in spatial) + 2
        main = sum(l.k + 1 for l in block.main_branch)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    size = shortcut * block.side * block.shortcut_channels * bits // 8
    return ScbBufferInfo(scheme, shortcut, shortcut + main, size)


@dataclass(frozen=True)
class MemoryFootprint:
    line_buffer_bytes: int
    weight_rom_bytes: int
    gfm_buffer_bytes: int
    weight_buffer_bytes: int
    shortcut_buffer_bytes: int
    converter_buffer_bytes: int
    fc_weight_rom_bytes: int  # portion of weight_rom_bytes, for exclusion
    dram_weights_bytes: int
    dram_shortcut_bytes: int
    dram_fm_bytes: int

    @property
    def sram_total_bytes(self) -> int:
        return (self.line_buffer_bytes + self.weight_rom_bytes
                + self.gfm_buffer_bytes + self.weight_buffer_bytes
                + self.shortcut_buffer_bytes + self.converter_buffer_bytes)

    @property
    def sram_comparison_bytes(self) -> int:
        """SRAM total with fully-connected weight ROM excluded."""
        return self.sram_total_bytes - self.fc_weight_rom_bytes

    @property
    def dram_total_bytes(self) -> int:
        return (self.dram_weights_bytes + self.dram_shortcut_bytes
                + self.dram_fm_bytes)


def _bias_bytes(layer: LayerSpec, bits: int) -> int:
    kern = kernel_bytes(layer, bits)
    total = weight_count(layer) * bits // 8
    return total - kern


def frce_sram_cost(net: NetworkSpec, layer: LayerSpec, bits: int,
                   blocks=None) -> int:
    """SRAM the layer adds when FRCE-resident (join layers carry the block's
    shortcut delay buffer)."""
    cost = frce_fm_buffer(layer, bits) + weight_storage(layer, CEKind.FRCE, bits)
    if layer.kind is LayerKind.SCB_ADD:
        blocks = blocks if blocks is not None else net.scb_blocks()
        block = blocks[layer.scb]
        if block.bypass:
            cost += scb_delay_buffer(block, "fm_reuse", bits).bytes
    return cost


def wrce_sram_cost(layer: LayerSpec, bits: int, pw: int = 1) -> int:
    return wrce_fm_buffer(layer, bits) + weight_storage(layer, CEKind.WRCE, bits, pw)


def dram_cost(net: NetworkSpec, layer: LayerSpec, bits: int,
              blocks=None) -> tuple[int, int]:
    """(weight, shortcut) DRAM bytes per frame when the layer is WRCE-resident."""
    weights = 0
    if layer.kind in (LayerKind.STC, LayerKind.PWC, LayerKind.FC):
        weights = kernel_bytes(layer, bits) + _bias_bytes(layer, bits)
    shortcut = 0
    if layer.kind is LayerKind.SCB_ADD:
        blocks = blocks if blocks is not None else net.scb_blocks()
        block = blocks[layer.scb]
        if block.bypass:
            # written once on the way out, read once at the join
            shortcut = 2 * block.shortcut_channels * block.side ** 2 * bits // 8
    return weights, shortcut


def design_point_memory(net: NetworkSpec, boundary: int,
                        wrce_pw=None) -> MemoryFootprint:
    """Memory footprint with the first ``boundary`` layers on FRCEs.

    ``wrce_pw`` optionally maps layer id to the tuned kernel parallelism of
    its weight stream buffer (defaults to 1, the pre-tuning width).
    """
    if not 0 <= boundary <= len(net):
        raise ValueError(f"boundary {boundary} outside 0..{len(net)}")
    bits = net.bits
    blocks = net.scb_blocks()
    line = rom = gfm = wbuf = scb = fc_rom = 0
    dram_w = dram_s = 0
    for lay in net.layers:
        if lay.id < boundary:
            line += frce_fm_buffer(lay, bits)
            r = weight_storage(lay, CEKind.FRCE, bits)
            rom += r
            if lay.kind is LayerKind.FC:
                fc_rom += r
            if lay.kind is LayerKind.SCB_ADD and blocks[lay.scb].bypass:
                scb += scb_delay_buffer(blocks[lay.scb], "fm_reuse", bits).bytes
        else:
            pw = wrce_pw.get(lay.id, 1) if wrce_pw else 1
            gfm += wrce_fm_buffer(lay, bits)
            wbuf += weight_storage(lay, CEKind.WRCE, bits, pw)
            w, s = dram_cost(net, lay, bits, blocks)
            dram_w += w
            dram_s += s
    converter = 0
    if 0 < boundary < len(net):
        converter = fm_bytes(net.layers[boundary], "input", bits)
    return MemoryFootprint(
        line_buffer_bytes=line, weight_rom_bytes=rom, gfm_buffer_bytes=gfm,
        weight_buffer_bytes=wbuf, shortcut_buffer_bytes=scb,
        converter_buffer_bytes=converter, fc_weight_rom_bytes=fc_rom,
        dram_weights_bytes=dram_w, dram_shortcut_bytes=dram_s, dram_fm_bytes=0)


def atomic_boundaries(net: NetworkSpec) -> list[int]:
    """Boundary positions that do not split a skip-connection block."""
    taboo = set()
    for block in net.scb_blocks().values():
        lo, hi = min(block.member_ids), max(block.member_ids)
        taboo.update(range(lo + 1, hi + 1))
    return [l for l in range(len(net) + 1) if l not in taboo]


def boundary_sweep(net: NetworkSpec, boundaries=None):
    """(boundary, sram_total, dram_total) for each candidate boundary."""
    if boundaries is None:
        boundaries = range(len(net) + 1)
    rows = []
    for l in boundaries:
        fp = design_point_memory(net, l)
        rows.append((l, fp.sram_total_bytes, fp.dram_total_bytes))
    return rows


def architecture_traffic(net: NetworkSpec, arch: str, boundary: int = 0):
    """(fm, shortcut, weights) DRAM bytes per frame for an architecture.

    ``ue``: a single unified engine; every layer's input and output map and
    every weight crosses off-chip once (network input and final result are
    not counted, matching the streaming accounting).
    ``se``: separate depthwise engine fused with its neighbour, removing the
    depthwise layers' FM crossings.
    ``streaming``: the hybrid pipeline at the given boundary.
    """
    bits = net.bits
    if arch == "streaming":
        fp = design_point_memory(net, boundary)
        return fp.dram_fm_bytes, fp.dram_shortcut_bytes, fp.dram_weights_bytes
    if arch not in ("ue", "se"):
        raise ValueError(f"unknown architecture {arch!r}")
    fm = shortcut = weights = 0
    for lay in net.layers:
        if lay.kind is LayerKind.SCB_ADD:
            continue  # the join is fused; its shortcut read counted below
        weights += kernel_bytes(lay, bits) + _bias_bytes(lay, bits)
        if arch == "se" and lay.kind is LayerKind.DWC:
            continue  # fused with its neighbour: no FM round-trip
        fm += fm_bytes(lay, "input", bits) + fm_bytes(lay, "output", bits)
    for block in net.scb_blocks().values():
        if block.bypass:
            shortcut += block.shortcut_channels * block.side ** 2 * bits // 8

    def counted(lay):
        return lay.kind is not LayerKind.SCB_ADD and \
            not (arch == "se" and lay.kind is LayerKind.DWC)

    first, last = net.layers[0], net.layers[-1]
    if counted(first):
        fm -= fm_bytes(first, "input", bits)
    if counted(last):
        fm -= fm_bytes(last, "output", bits)
    return fm, shortcut, weights
