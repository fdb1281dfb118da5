"""Closed-form operation counts, feature-map access costs, and their ratios.

MAC counts use the output spatial side F; feature-map access counts use the
respective input/output sides so strided layers stay consistent.  Shortcut
joins carry additions only, so their operation count is halved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .netspec import LayerKind, LayerSpec, NetworkSpec


@dataclass(frozen=True)
class LayerCost:
    layer_id: int
    name: str
    kind: LayerKind
    macs: int
    fm_access: int
    weight_count: int


def mac_count(layer: LayerSpec) -> int:
    f2 = layer.f_out * layer.f_out
    kind = layer.kind
    if kind is LayerKind.STC:
        return f2 * layer.k ** 2 * (layer.m // layer.groups) * layer.n
    if kind is LayerKind.DWC:
        return f2 * layer.k ** 2 * layer.m
    if kind is LayerKind.PWC:
        return f2 * (layer.m // layer.groups) * layer.n
    if kind is LayerKind.FC:
        return layer.m * layer.n
    if kind is LayerKind.SCB_ADD:
        return layer.m * f2 // 2  # additions only, counted as half MACs
    return 0  # POOL


def weight_count(layer: LayerSpec) -> int:
    """Parameter count including biases (one per output channel)."""
    kind = layer.kind
    if kind is LayerKind.STC:
        return layer.k ** 2 * (layer.m // layer.groups) * layer.n + layer.n
    if kind is LayerKind.DWC:
        return layer.k ** 2 * layer.m + layer.m
    if kind is LayerKind.PWC:
        return (layer.m // layer.groups) * layer.n + layer.n
    if kind is LayerKind.FC:
        return layer.m * layer.n + layer.n
    return 0  # POOL, SCB_ADD


def fm_access(target) -> int:
    """Feature-map elements moved by a layer, a (DWC, PWC) pair, or an SCB.

    Single layer: input read + output write.  A depthwise-separable pair
    additionally moves the intermediate map twice (written by the DWC, read
    by the PWC).  A skip-connection block moves input, shortcut, and output,
    each M*F^2 elements.
    """
    if isinstance(target, LayerSpec):
        return (target.f_in ** 2 * target.m + target.f_out ** 2 * target.n)
    if isinstance(target, tuple) and len(target) == 2:
        dwc, pwc = target
        if dwc.kind is not LayerKind.DWC or pwc.kind is not LayerKind.PWC:
            raise ValueError("pair form expects (DWC, PWC)")
        return (dwc.f_in ** 2 * dwc.m + 2 * dwc.f_out ** 2 * dwc.n
                + pwc.f_out ** 2 * pwc.n)
    # SCB block: input + shortcut + output
    block = target
    return 3 * block.join.m * block.side ** 2


def ratios(k: int, m: int, n: int):
    """(RA_DSC, RO_DSC, RA_SCB, RO_SCB) relative to a standard convolution."""
    if min(k, m, n) < 1:
        raise ValueError("k, m, n must be >= 1")
    ra_dsc = 1 + Fraction(2 * m, m + n)
    ro_dsc = Fraction(1, n) + Fraction(1, k * k)
    ra_scb = Fraction(3 * m, m + n)
    ro_scb = Fraction(1, 2 * n * k * k)
    return ra_dsc, ro_dsc, ra_scb, ro_scb


@dataclass(frozen=True)
class NetworkCost:
    total_macs: int
    total_weights: int
    fc_weights: int  # included in total_weights; reported for exclusion
    per_layer: tuple[LayerCost, ...]


def network_totals(net: NetworkSpec) -> NetworkCost:
    per_layer = tuple(
        LayerCost(lay.id, lay.name, lay.kind, mac_count(lay),
                  fm_access(lay), weight_count(lay))
        for lay in net.layers)
    fc = sum(c.weight_count for c in per_layer if c.kind is LayerKind.FC)
    return NetworkCost(
        total_macs=sum(c.macs for c in per_layer),
        total_weights=sum(c.weight_count for c in per_layer),
        fc_weights=fc,
        per_layer=per_layer)
