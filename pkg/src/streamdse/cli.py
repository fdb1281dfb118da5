"""Command-line front end: analysis, allocation, tuning, simulation, reports.

All outputs are plain CSV/text, deterministic for a given invocation, and
written to stdout or to files under ``--outdir`` (default from the
STREAMDSE_OUTDIR environment variable, falling back to the working
directory).

Exit codes: 0 success, 2 configuration error (unknown network, bad flags,
unparsable network file), 3 infeasible resource budget, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import allocator, dfsim, memmodel, netspec
from .costmodel import network_totals
from .memmodel import MB

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


@dataclass(frozen=True)
class Platform:
    name: str
    bram_count: int
    dsp_count: int
    sram_cap_fraction: float
    dsp_cap_fraction: float
    clock_mhz: float
    bram_kbits: int = 36

    def __post_init__(self):
        if not (0 < self.sram_cap_fraction <= 1 and 0 < self.dsp_cap_fraction <= 1):
            raise ValueError("utilisation caps must lie in (0, 1]")
        if self.clock_mhz <= 0:
            raise ValueError("clock must be positive")

    @property
    def usable_sram_bytes(self) -> int:
        total_bits = self.bram_count * self.bram_kbits * 1024
        return int(total_bits * self.sram_cap_fraction) // 8

    @property
    def usable_dsp(self) -> int:
        return int(self.dsp_count * self.dsp_cap_fraction)

    @property
    def clock_hz(self) -> float:
        return self.clock_mhz * 1e6


def platform_presets() -> dict[str, Platform]:
    return {
        "zc706": Platform("zc706", bram_count=545, dsp_count=900,
                          sram_cap_fraction=0.75, dsp_cap_fraction=0.95,
                          clock_mhz=200.0),
    }


def _resolve_platform(args) -> Platform:
    presets = platform_presets()
    base = presets[args.platform]
    overrides = {}
    for attr in ("bram_count", "dsp_count", "clock_mhz"):
        val = getattr(args, attr, None)
        if val is not None:
            overrides[attr] = val
    if getattr(args, "sram_cap", None) is not None:
        overrides["sram_cap_fraction"] = args.sram_cap
    if getattr(args, "dsp_cap", None) is not None:
        overrides["dsp_cap_fraction"] = args.dsp_cap
    if overrides:
        from dataclasses import replace
        base = replace(base, name=base.name + "+custom", **overrides)
    return base


def _load_net(spec: str) -> netspec.NetworkSpec:
    if spec in netspec.BUILTIN_NAMES:
        return netspec.builtin_network(spec)
    return netspec.load_network(spec)


class _Out:
    """Writes named CSV artifacts to stdout or to files in a directory."""

    def __init__(self, outdir: str | None):
        if outdir is None:
            outdir = os.environ.get("STREAMDSE_OUTDIR")
        self.outdir = Path(outdir) if outdir else None

    def write(self, name: str, lines):
        text = "\n".join(lines) + "\n"
        if self.outdir is None:
            sys.stdout.write(f"# --- {name}\n")
            sys.stdout.write(text)
        else:
            self.outdir.mkdir(parents=True, exist_ok=True)
            (self.outdir / name).write_text(text, encoding="utf-8")


def _boundary(args, net, platform):
    if args.boundary == "auto":
        bmin, bfin = allocator.balanced_memory_allocation(
            net, platform.usable_sram_bytes)
        return bfin if getattr(args, "fill_sram", False) else bmin
    boundary = int(args.boundary)
    if not 0 <= boundary <= len(net):
        raise netspec.NetworkError(
            f"boundary {boundary} outside 0..{len(net)}")
    return boundary


def cmd_analyze(args, out: _Out) -> int:
    net = _load_net(args.network)
    cost = network_totals(net)
    lines = ["id,name,kind,macs,fm_access,weights"]
    lines += [f"{c.layer_id},{c.name},{c.kind.name},{c.macs},{c.fm_access},"
              f"{c.weight_count}" for c in cost.per_layer]
    lines.append(f"total,,,{cost.total_macs},,{cost.total_weights}")
    out.write(f"{net.name}_analysis.csv", lines)
    return EXIT_OK


def cmd_allocate(args, out: _Out) -> int:
    net = _load_net(args.network)
    platform = _resolve_platform(args)
    if args.sweep:
        rows = memmodel.boundary_sweep(net)
        lines = ["boundary_layer,sram_bytes,dram_bytes_per_frame"]
        lines += [f"{l},{s},{d}" for l, s, d in rows]
        out.write(f"{net.name}_memory_sweep.csv", lines)
    bmin, bfin = allocator.balanced_memory_allocation(
        net, platform.usable_sram_bytes)
    lines = ["boundary,kind,sram_bytes,sram_mb,dram_bytes_per_frame,dram_mb"]
    for label, b in (("min_sram", bmin), ("budget_extended", bfin)):
        fp = memmodel.design_point_memory(net, b)
        lines.append(f"{b},{label},{fp.sram_total_bytes},"
                     f"{fp.sram_total_bytes / MB:.4f},{fp.dram_total_bytes},"
                     f"{fp.dram_total_bytes / MB:.4f}")
    out.write(f"{net.name}_allocation.csv", lines)
    return EXIT_OK


def _design_report(net, design, lines_out):
    rep = allocator.throughput(design)
    lines = ["layer_id,name,ce,pw,pf,t_cycles,efficiency"]
    names = {l.id: l.name for l in net.layers}
    for a, eff in zip(design.assignments, rep.per_layer_efficiency):
        lines.append(f"{a.layer_id},{names[a.layer_id]},{a.kind.value},"
                     f"{a.pw},{a.pf},{a.t_cycles},{eff:.4f}")
    lines_out("per_layer", lines)
    fp = design.footprint
    summary = ["network,boundary,fps,gops,dsp_used,mac_units,mac_efficiency,"
               "sram_mb,dram_mb_per_frame",
               f"{design.network},{design.boundary},{rep.fps:.1f},"
               f"{rep.gops:.1f},{design.dsp_used},{design.mac_units},"
               f"{rep.mac_efficiency:.4f},{fp.sram_total_bytes / MB:.4f},"
               f"{fp.dram_total_bytes / MB:.4f}"]
    lines_out("summary", summary)


def cmd_tune(args, out: _Out) -> int:
    net = _load_net(args.network)
    platform = _resolve_platform(args)
    boundary = _boundary(args, net, platform)
    budget = args.dsp_budget if args.dsp_budget else platform.usable_dsp
    design = allocator.dynamic_parallelism_tuning(
        net, boundary, budget, mode=args.mode,
        decompose=args.decompose, clock_hz=platform.clock_hz)
    _design_report(net, design,
                   lambda tag, lines: out.write(f"{net.name}_tune_{tag}.csv", lines))
    return EXIT_OK


def cmd_sweep(args, out: _Out) -> int:
    net = _load_net(args.network)
    budgets = range(args.budget_min, args.budget_max + 1, args.budget_step)
    lines = ["budget,mode,feasible,mac_units,t_bottleneck,efficiency,fps"]
    means = ["mode,mean_efficiency,std_efficiency"]
    for mode in ("fgpm", "factorized"):
        res = allocator.efficiency_sweep(net, budgets, mode=mode)
        for p in res.points:
            lines.append(f"{p.budget},{mode},{int(p.feasible)},{p.mac_units},"
                         f"{p.t_bottleneck},{p.efficiency:.4f},{p.fps:.1f}")
        means.append(f"{mode},{res.mean_efficiency:.4f},{res.std_efficiency:.4f}")
    out.write(f"{net.name}_sweep.csv", lines)
    out.write(f"{net.name}_sweep_stats.csv", means)
    return EXIT_OK


def cmd_simulate(args, out: _Out) -> int:
    cfg = dfsim.SimConfig(f=args.f, k=args.k, stride=args.stride,
                          pad=args.pad, scheme=args.scheme, frames=args.frames)
    trace = [] if args.trace else None
    res = dfsim.simulate(cfg, trace=trace)
    lines = ["f,k,stride,pad,scheme,frames,cycles_total,cycles_per_frame,"
             "windows_per_frame,pe_efficiency,buffer_lines,write_stalls",
             f"{cfg.f},{cfg.k},{cfg.stride},{cfg.pad},{cfg.scheme},"
             f"{cfg.frames},{res.cycles_total},{res.cycles_per_frame},"
             f"{res.windows_per_frame},{res.pe_efficiency:.4f},"
             f"{res.buffer_lines_used},{res.write_stall_cycles}"]
    out.write(f"simulate_f{cfg.f}k{cfg.k}s{cfg.stride}p{cfg.pad}_{cfg.scheme}.csv",
              lines)
    if trace is not None:
        tlines = ["cycle,event,buffer_occupancy,pe_active"]
        tlines += [f"{c},{e},{o},{a}" for c, e, o, a in trace]
        out.write(f"simulate_f{cfg.f}k{cfg.k}s{cfg.stride}p{cfg.pad}_"
                  f"{cfg.scheme}_trace.csv", tlines)
    return EXIT_OK


def cmd_report(args, out: _Out) -> int:
    platform = _resolve_platform(args)
    summary = ["network,boundary,kind,fps,gops,dsp_used,mac_units,"
               "mac_efficiency,sram_mb,dram_mb_per_frame"]
    for name in ("mobilenet_v2", "shufflenet_v2"):
        net = netspec.builtin_network(name)
        rows = memmodel.boundary_sweep(net)
        lines = ["boundary_layer,sram_bytes,dram_bytes_per_frame"]
        lines += [f"{l},{s},{d}" for l, s, d in rows]
        out.write(f"{name}_memory_sweep.csv", lines)
        bmin, bfin = allocator.balanced_memory_allocation(
            net, platform.usable_sram_bytes)
        for label, b in (("min_sram", bmin), ("budget_extended", bfin)):
            design = allocator.dynamic_parallelism_tuning(
                net, b, platform.usable_dsp, clock_hz=platform.clock_hz)
            rep = allocator.throughput(design)
            fp = design.footprint
            summary.append(
                f"{name},{b},{label},{rep.fps:.1f},{rep.gops:.1f},"
                f"{design.dsp_used},{design.mac_units},"
                f"{rep.mac_efficiency:.4f},{fp.sram_total_bytes / MB:.4f},"
                f"{fp.dram_total_bytes / MB:.4f}")
    out.write("performance_summary.csv", summary)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamdse",
        description="Design-space exploration for streaming CNN accelerators")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, network=True):
        if network:
            p.add_argument("--network", required=True,
                           help="builtin name or path to a network file")
        p.add_argument("--platform", default="zc706",
                       choices=sorted(platform_presets()))
        p.add_argument("--bram-count", dest="bram_count", type=int)
        p.add_argument("--dsp-count", dest="dsp_count", type=int)
        p.add_argument("--sram-cap", dest="sram_cap", type=float)
        p.add_argument("--dsp-cap", dest="dsp_cap", type=float)
        p.add_argument("--clock-mhz", dest="clock_mhz", type=float)
        p.add_argument("--outdir", help="write artifacts here instead of stdout")

    p = sub.add_parser("analyze", help="per-layer operation/access/weight CSV")
    add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("allocate", help="boundary placement and memory figures")
    add_common(p)
    p.add_argument("--sweep", action="store_true",
                   help="also emit the full boundary sweep curve")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("tune", help="parallelism tuning and throughput report")
    add_common(p)
    p.add_argument("--dsp-budget", dest="dsp_budget", type=int,
                   help="override the platform's usable DSP count")
    p.add_argument("--mode", choices=("fgpm", "factorized"), default="fgpm")
    p.add_argument("--decompose", action=argparse.BooleanOptionalAction,
                   default=True,
                   help="pack two 8x8 multipliers per DSP (not in depthwise layers)")
    p.add_argument("--boundary", default="auto",
                   help="'auto' (min-SRAM placement) or an explicit layer index")
    p.add_argument("--fill-sram", action="store_true",
                   help="with auto boundary, extend it up to the SRAM budget")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("sweep", help="efficiency across a multiplier budget grid")
    add_common(p)
    p.add_argument("--budget-min", type=int, default=60)
    p.add_argument("--budget-max", type=int, default=4000)
    p.add_argument("--budget-step", type=int, default=20)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="line-buffer dataflow simulation")
    add_common(p, network=False)
    p.add_argument("--f", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--pad", type=int, default=1)
    p.add_argument("--scheme", choices=(dfsim.DIRECT, dfsim.DATAFLOW),
                   default=dfsim.DATAFLOW)
    p.add_argument("--frames", type=int, default=4)
    p.add_argument("--trace", action="store_true",
                   help="emit a per-cycle event trace")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report",
                       help="reference tables: memory sweep curves and the "
                            "performance summary for both implemented networks")
    add_common(p, network=False)
    p.add_argument("--reference-tables", action="store_true",
                   help="accepted for explicitness; this is the default output")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Out(args.outdir)
    try:
        return args.func(args, out)
    except allocator.InfeasibleBudgetError as exc:
        print(f"streamdse: infeasible budget: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (netspec.NetworkError, ValueError) as exc:
        print(f"streamdse: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"streamdse: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
