import pytest

from streamdse.memmodel import (CEKind, MB, architecture_traffic,
                                atomic_boundaries, boundary_sweep,
                                design_point_memory, dram_cost,
                                frce_fm_buffer, frce_sram_cost,
                                scb_delay_buffer, weight_reads_per_frame,
                                weight_storage, wrce_fm_buffer,
                                wrce_sram_cost)
from streamdse.netspec import (LayerKind, LayerSpec, NetworkSpec,
                               builtin_network, conv_out_side)


def _layer(kind, f, m, n, k=1, stride=1, pad=0, lid=0, shortcut=None, scb=None):
    f_out = f if kind in (LayerKind.SCB_ADD, LayerKind.FC) else \
        conv_out_side(f, k, stride, pad)
    return LayerSpec(id=lid, name=f"t{lid}", kind=kind, f_in=f, f_out=f_out,
                     m=m, n=n, k=k, stride=stride, pad=pad,
                     shortcut_src=shortcut, scb=scb)


# --- per-layer buffer formulas

def test_frce_line_buffer_example():
    lay = _layer(LayerKind.DWC, 112, 32, 32, k=3, pad=1)
    assert frce_fm_buffer(lay, 8) == (2 * 112 + 2) * 32 == 7232


def test_frce_line_buffer_pwc_and_k1():
    assert frce_fm_buffer(_layer(LayerKind.PWC, 56, 128, 64), 8) == 0
    assert frce_fm_buffer(_layer(LayerKind.STC, 56, 8, 8, k=1), 8) == 0


def test_wrce_gfm_examples():
    pwc = _layer(LayerKind.PWC, 7, 320, 1280)
    assert wrce_fm_buffer(pwc, 8) == 2 * 49 * 320 == 31360
    dwc = _layer(LayerKind.DWC, 7, 512, 512, k=3, pad=1)
    assert wrce_fm_buffer(dwc, 8) == 21
    tiny = _layer(LayerKind.PWC, 1, 1, 1)
    assert wrce_fm_buffer(tiny, 8) == 2


def test_weight_storage_examples():
    stem = _layer(LayerKind.STC, 224, 3, 32, k=3, stride=2, pad=1)
    assert weight_storage(stem, CEKind.FRCE, 8) == 864
    assert weight_reads_per_frame(stem, CEKind.FRCE) == 112 ** 2
    assert weight_reads_per_frame(stem, CEKind.WRCE) == 1
    # WRCE stream buffer: double-buffered kernel slices for pw channels
    pwc = _layer(LayerKind.PWC, 7, 960, 160)
    assert weight_storage(pwc, CEKind.WRCE, 8, pw=4) == 2 * 960 * 4


# --- skip-connection delay buffers

def _sf2_basic_block():
    net = builtin_network("shufflenet_v2")
    return net, next(b for b in net.scb_blocks().values()
                     if b.bypass and b.join.m == 116)


def test_scb_lines_fm_reuse():
    net, block = _sf2_basic_block()
    info = scb_delay_buffer(block, "fm_reuse", net.bits)
    assert info.shortcut_lines == 2
    assert info.total_lines == 4
    assert info.bytes == 2 * block.side * block.shortcut_channels


def test_scb_lines_line_reuse_and_reduction():
    net, block = _sf2_basic_block()
    info = scb_delay_buffer(block, "line_reuse", net.bits)
    assert info.shortcut_lines == 5
    assert info.total_lines == 13
    fm = scb_delay_buffer(block, "fm_reuse", net.bits)
    assert round(100 * (info.total_lines - fm.total_lines) / info.total_lines,
                 2) == 69.23


def test_scb_lines_fm_never_worse():
    for name in ("mobilenet_v2", "shufflenet_v1", "shufflenet_v2"):
        net = builtin_network(name)
        for block in net.scb_blocks().values():
            if not block.bypass:
                continue
            fm = scb_delay_buffer(block, "fm_reuse", net.bits)
            line = scb_delay_buffer(block, "line_reuse", net.bits)
            assert fm.shortcut_lines <= line.shortcut_lines
            assert fm.total_lines <= line.total_lines


def test_scb_delay_requires_bypass():
    net = builtin_network("shufflenet_v2")
    branchy = next(b for b in net.scb_blocks().values() if not b.bypass)
    with pytest.raises(ValueError, match="shortcut"):
        scb_delay_buffer(branchy, "fm_reuse", net.bits)


def test_scb_delay_unknown_scheme():
    net, block = _sf2_basic_block()
    with pytest.raises(ValueError, match="scheme"):
        scb_delay_buffer(block, "other", net.bits)


# --- design-point memory

def test_mobilenet_v2_curve_minimum():
    net = builtin_network("mobilenet_v2")
    rows = [(l, design_point_memory(net, l)) for l in atomic_boundaries(net)]
    l, fp = min(rows, key=lambda r: (r[1].sram_total_bytes, -r[0]))
    assert abs(fp.sram_total_bytes / MB - 1.27) / 1.27 < 0.15
    assert abs(fp.dram_total_bytes / MB - 2.81) / 2.81 < 0.15
    # U shape: interior minimum
    assert 0 < l < len(net)
    assert rows[0][1].sram_total_bytes > fp.sram_total_bytes
    assert rows[-1][1].sram_total_bytes > fp.sram_total_bytes


def test_shufflenet_v2_curve_minimum():
    net = builtin_network("shufflenet_v2")
    rows = [(l, design_point_memory(net, l)) for l in atomic_boundaries(net)]
    l, fp = min(rows, key=lambda r: (r[1].sram_total_bytes, -r[0]))
    assert abs(fp.sram_total_bytes / MB - 0.71) / 0.71 < 0.15
    assert abs(fp.dram_total_bytes / MB - 1.96) / 1.96 < 0.15


def test_all_frce_means_no_dram():
    for name in ("mobilenet_v1", "shufflenet_v2"):
        net = builtin_network(name)
        fp = design_point_memory(net, len(net))
        assert fp.dram_total_bytes == 0
        assert fp.converter_buffer_bytes == 0


def test_boundary_bounds_checked():
    net = builtin_network("mobilenet_v1")
    with pytest.raises(ValueError):
        design_point_memory(net, len(net) + 1)
    with pytest.raises(ValueError):
        design_point_memory(net, -1)


def test_sram_total_is_component_sum():
    net = builtin_network("shufflenet_v1")
    for l in (0, 17, len(net)):
        fp = design_point_memory(net, l)
        assert fp.sram_total_bytes == (
            fp.line_buffer_bytes + fp.weight_rom_bytes + fp.gfm_buffer_bytes
            + fp.weight_buffer_bytes + fp.shortcut_buffer_bytes
            + fp.converter_buffer_bytes)
        assert fp.dram_fm_bytes == 0
        for field in (fp.line_buffer_bytes, fp.weight_rom_bytes,
                      fp.gfm_buffer_bytes, fp.weight_buffer_bytes,
                      fp.shortcut_buffer_bytes, fp.converter_buffer_bytes,
                      fp.dram_weights_bytes, fp.dram_shortcut_bytes):
            assert isinstance(field, int) and field >= 0


def test_boundary_step_changes_sram_by_layer_cost_delta():
    # Net of the converter buffer (sized by whichever layer sits at the
    # boundary), one step moves the total by exactly frce(i) - wrce(i).
    for name in ("mobilenet_v2", "shufflenet_v2"):
        net = builtin_network(name)
        blocks = net.scb_blocks()
        for l in range(len(net)):
            a = design_point_memory(net, l)
            b = design_point_memory(net, l + 1)
            lay = net.layers[l]
            delta = (frce_sram_cost(net, lay, net.bits, blocks)
                     - wrce_sram_cost(lay, net.bits))
            assert ((b.sram_total_bytes - b.converter_buffer_bytes)
                    - (a.sram_total_bytes - a.converter_buffer_bytes)) == delta


def test_dram_monotone_non_increasing():
    for name in ("mobilenet_v1", "mobilenet_v2", "shufflenet_v1",
                 "shufflenet_v2"):
        net = builtin_network(name)
        rows = boundary_sweep(net)
        drams = [d for _, _, d in rows]
        assert all(a >= b for a, b in zip(drams, drams[1:]))


def test_dram_cost_excludes_depthwise_weights():
    net = builtin_network("mobilenet_v2")
    dwc = next(l for l in net.layers if l.kind is LayerKind.DWC)
    assert dram_cost(net, dwc, net.bits) == (0, 0)


# --- off-chip traffic comparison

def test_streaming_vs_unified_engine_fm_reduction():
    net = builtin_network("mobilenet_v2")
    boundary = 47
    ue = architecture_traffic(net, "ue")
    se = architecture_traffic(net, "se")
    ours = architecture_traffic(net, "streaming", boundary)
    assert ue[0] > 0 and se[0] > 0
    assert 1 - ours[0] / ue[0] >= 0.95
    assert 1 - ours[0] / se[0] >= 0.90
    # depthwise fusion strictly lowers the unified engine's FM traffic
    assert se[0] < ue[0]


def test_single_stc_layer_ue_equals_se():
    lay = _layer(LayerKind.STC, 8, 3, 4, k=3, pad=1)
    net = NetworkSpec(name="one", input_side=8, input_channels=3, bits=8,
                      layers=(lay,))
    assert architecture_traffic(net, "ue") == architecture_traffic(net, "se")


def test_architecture_traffic_rejects_unknown():
    net = builtin_network("mobilenet_v1")
    with pytest.raises(ValueError):
        architecture_traffic(net, "tpu")
