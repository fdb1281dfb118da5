import random
from fractions import Fraction

import pytest

from streamdse.costmodel import (fm_access, mac_count, network_totals,
                                 ratios)
from streamdse.netspec import (LayerKind, LayerSpec, NetworkSpec,
                               builtin_network, conv_out_side)


def _layer(kind, f, m, n, k=1, stride=1, pad=0, groups=1):
    f_out = conv_out_side(f, k, stride, pad) if kind is not LayerKind.SCB_ADD else f
    return LayerSpec(id=0, name="t", kind=kind, f_in=f, f_out=f_out, m=m, n=n,
                     k=k, stride=stride, pad=pad, groups=groups,
                     shortcut_src=0 if kind is LayerKind.SCB_ADD else None)


def _same(kind, f, m, n, k=1, groups=1):
    # stride-1 convolution with same padding: f_out == f_in
    return _layer(kind, f, m, n, k=k, pad=(k - 1) // 2, groups=groups)


def test_mac_count_scb_add():
    lay = _layer(LayerKind.SCB_ADD, 28, 116, 116)
    assert mac_count(lay) == 116 * 28 * 28 // 2 == 45472


def test_mac_count_single_dwc_window():
    lay = _layer(LayerKind.DWC, 3, 1, 1, k=3)
    assert lay.f_out == 1
    assert mac_count(lay) == 9


def test_dsc_vs_stc_approaches_inverse_kernel_area():
    f, m, k = 14, 64, 3
    for n in (256, 1024, 4096):
        stc = mac_count(_same(LayerKind.STC, f, m, n, k=k))
        dsc = mac_count(_same(LayerKind.DWC, f, m, m, k=k)) + \
            mac_count(_same(LayerKind.PWC, f, m, n))
        assert Fraction(dsc, stc) == Fraction(1, n) + Fraction(1, k * k)
    assert abs(dsc / stc - 1 / 9) < 1e-3


def test_fm_access_scb_block():
    net = builtin_network("shufflenet_v2")
    block = next(b for b in net.scb_blocks().values()
                 if b.bypass and b.join.m == 116)
    # A_SCB = 3*M*F^2 for the stage-2 block geometry (M=116, F=28)
    assert fm_access(block) == 3 * 116 * 28 ** 2
    assert fm_access(block) == 3 * block.join.m * block.side ** 2
    # and a hand-checked shape: 3 * 24 * 56^2
    class _B:
        pass
    b = _B()
    b.join = _layer(LayerKind.SCB_ADD, 56, 24, 24)
    b.side = 56
    assert fm_access(b) == 225792


def test_fm_access_stc_symmetric():
    lay = _same(LayerKind.STC, 20, 48, 48, k=3)
    assert fm_access(lay) == 2 * 48 * 20 ** 2


def test_fm_access_dsc_pair_doubles_when_m_equals_n():
    f, m = 28, 96
    dwc = _same(LayerKind.DWC, f, m, m, k=3)
    pwc = _same(LayerKind.PWC, f, m, m)
    stc = _same(LayerKind.STC, f, m, m, k=3)
    assert Fraction(fm_access((dwc, pwc)), fm_access(stc)) == 2


def test_fm_access_pair_type_check():
    pwc = _same(LayerKind.PWC, 8, 4, 4)
    with pytest.raises(ValueError):
        fm_access((pwc, pwc))


def test_ratios_examples():
    ra_dsc, ro_dsc, ra_scb, ro_scb = ratios(1, 1, 1)
    assert ro_dsc == 2
    n = 37
    ra_dsc, ro_dsc, ra_scb, ro_scb = ratios(3, n, n)
    assert (ra_dsc, ro_dsc, ra_scb, ro_scb) == (
        2, Fraction(1, n) + Fraction(1, 9), Fraction(3, 2), Fraction(1, 18 * n))
    assert ratios(3, 64, 64)[3] == Fraction(1, 1152)


def test_ratios_rejects_degenerate():
    with pytest.raises(ValueError):
        ratios(0, 1, 1)


def test_rational_identities_random_shapes():
    rng = random.Random(20240811)
    for _ in range(1000):
        f = rng.randint(1, 64)
        k = rng.choice((1, 3, 5, 7))
        m = rng.randint(1, 512)
        n = rng.randint(1, 512)
        stc = _same(LayerKind.STC, f, m, n, k=k)
        dwc = _same(LayerKind.DWC, f, m, m, k=k)
        pwc = _same(LayerKind.PWC, f, m, n)
        ra_dsc, ro_dsc, ra_scb, ro_scb = ratios(k, m, n)
        o_stc = mac_count(stc)
        o_dsc = mac_count(dwc) + mac_count(pwc)
        assert ro_dsc * o_stc == o_dsc
        a_stc = fm_access(stc)
        a_dsc = fm_access((dwc, pwc))
        assert ra_dsc * a_stc == a_dsc
        scb = _layer(LayerKind.SCB_ADD, f, m, m)
        assert ro_scb * o_stc == Fraction(m * f * f, 2)
        assert mac_count(scb) == m * f * f // 2
        assert ra_scb * a_stc == 3 * m * f * f


def test_mac_count_monotone_in_each_dimension():
    base = dict(f=14, m=32, n=48, k=3)
    ref = mac_count(_same(LayerKind.STC, base["f"], base["m"], base["n"], k=base["k"]))
    for key, larger in (("f", 15), ("m", 33), ("n", 49), ("k", 5)):
        args = dict(base)
        args[key] = larger
        grown = mac_count(_same(LayerKind.STC, args["f"], args["m"], args["n"],
                                k=args["k"]))
        assert grown >= ref


def test_network_totals_mobilenet_v2():
    cost = network_totals(builtin_network("mobilenet_v2"))
    assert abs(cost.total_macs - 3.0e8) / 3.0e8 < 0.05
    assert cost.fc_weights == 1280 * 1000 + 1000


def test_network_totals_empty():
    net = NetworkSpec(name="empty", input_side=8, input_channels=1, bits=8)
    cost = network_totals(net)
    assert (cost.total_macs, cost.total_weights, cost.per_layer) == (0, 0, ())


def test_network_totals_shufflenet_v2_first_layer():
    cost = network_totals(builtin_network("shufflenet_v2"))
    first = cost.per_layer[0]
    assert first.weight_count == 648 + 24
    assert first.macs == 112 ** 2 * 9 * 3 * 24


def test_pool_and_join_carry_no_weights():
    for net in (builtin_network("shufflenet_v1"),):
        for c in network_totals(net).per_layer:
            if c.kind in (LayerKind.POOL, LayerKind.SCB_ADD):
                assert c.weight_count == 0
            if c.kind is LayerKind.POOL:
                assert c.macs == 0
