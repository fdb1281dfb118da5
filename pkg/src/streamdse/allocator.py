"""Resource allocation: boundary placement, parallelism tuning, throughput.

The fine-grained parallel space of a dimension M is every parallelism P that
yields a distinct round count T = ceil(M/P); non-divisor values are realised
by padding the dimension up to a multiple of P (padded lanes do wasted
work).  The factorised baseline restricts P to divisors of M.

Boundary placement (balanced memory allocation) first finds the boundary
minimising total SRAM, then advances it while the budget allows, trading
SRAM for reduced DRAM traffic.  Parallelism tuning starts every layer at a
single lane and repeatedly widens whichever layers currently bound the
pipeline, until the next widening would not fit the multiplier budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costmodel import mac_count
from .memmodel import (CEKind, MemoryFootprint, atomic_boundaries,
                       design_point_memory)
from .netspec import LayerKind, LayerSpec, NetworkSpec

# Layers that receive multiplier lanes.  Shortcut additions ride on the
# output stream of the producing engine (fabric adders, never a bottleneck
# on their own) and pooling has no MACs at all.
TUNABLE_KINDS = (LayerKind.STC, LayerKind.DWC, LayerKind.PWC, LayerKind.FC)


class InfeasibleBudgetError(ValueError):
    def __init__(self, message, minimum=None):
        super().__init__(message)
        self.minimum = minimum


@dataclass(frozen=True)
class ParallelSpace:
    """Usable parallelism values of one dimension, largest rounds first."""

    max_dim: int
    points: tuple[tuple[int, int], ...]  # (parallelism P, rounds T), T strictly falling

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def closed_form_size(self) -> int:
        """2*floor(sqrt(M)), the usual estimate of the fine-grained size."""
        return 2 * math.isqrt(self.max_dim)


def parallel_space(m: int) -> ParallelSpace:
    """All distinct round counts T = ceil(M/P) with the smallest P for each."""
    if m < 1:
        raise ValueError("dimension must be >= 1")
    points = []
    seen_t = m + 1
    for p in range(1, m + 1):
        t = -(-m // p)
        if t < seen_t:
            points.append((p, t))
            seen_t = t
    return ParallelSpace(m, tuple(points))


def factor_space(m: int) -> ParallelSpace:
    """Parallelism restricted to divisors of the dimension (T = M/P exact)."""
    if m < 1:
        raise ValueError("dimension must be >= 1")
    divs = [d for d in range(1, m + 1) if m % d == 0]
    return ParallelSpace(m, tuple((d, m // d) for d in divs))


def _work_per_round(layer: LayerSpec) -> int:
    """MACs one lane performs per round (one output element's reduction)."""
    if layer.kind is LayerKind.STC:
        return layer.k ** 2 * (layer.m // layer.groups)
    if layer.kind is LayerKind.DWC:
        return layer.k ** 2
    if layer.kind is LayerKind.PWC:
        return layer.m // layer.groups
    if layer.kind is LayerKind.FC:
        return layer.m
    return 0


def _dims(layer: LayerSpec) -> tuple[int, int]:
    """(kernel dimension, FM dimension): output channels and spatial positions."""
    return layer.n, layer.f_out ** 2


def padded_ops(layer: LayerSpec, pw: int, pf: int) -> int:
    """MACs after rounding both parallel dimensions up to lane multiples."""
    if pw < 1 or pf < 1:
        raise ValueError("pw and pf must be >= 1")
    dim_w, dim_f = _dims(layer)
    padded_w = -(-dim_w // pw) * pw
    padded_f = -(-dim_f // pf) * pf
    return padded_w * padded_f * _work_per_round(layer)


@dataclass(frozen=True)
class CEAssignment:
    layer_id: int
    layer_kind: LayerKind
    kind: CEKind
    pw: int
    pf: int
    t_cycles: int
    raw_macs: int

    @property
    def lanes(self) -> int:
        return self.pw * self.pf


@dataclass(frozen=True)
class DesignPoint:
    network: str
    boundary: int
    assignments: tuple[CEAssignment, ...]
    footprint: MemoryFootprint
    dsp_used: int
    mac_units: int
    t_bottleneck: int
    total_macs: int  # whole network, shortcut additions included (halved)
    clock_hz: float

    @property
    def fps(self) -> float:
        return self.clock_hz / self.t_bottleneck

    @property
    def throughput_gops(self) -> float:
        return 2.0 * self.total_macs * self.clock_hz / self.t_bottleneck / 1e9


def dsp_count(assignments, mode: str = "decomposed") -> int:
    """DSP blocks for a set of lane assignments.

    ``decomposed`` packs two 8x8 multipliers per DSP except in depthwise
    layers, whose independent channels cannot share a block.
    """
    if mode not in ("decomposed", "plain"):
        raise ValueError(f"unknown dsp mode {mode!r}")
    total = 0
    for a in assignments:
        if mode == "plain" or a.layer_kind is LayerKind.DWC:
            total += a.lanes
        else:
            total += -(-a.lanes // 2)
    return total


def _levels(layer: LayerSpec, ce: CEKind, mode: str):
    """Parallelism levels of one layer: (rounds, lanes, pw, pf) tuples.

    ``fgpm``: each level is the cheapest lane count achieving a distinct
    round product over both dimensions jointly, pruned to the pareto
    frontier (rounds strictly falling, lanes strictly rising).  Among
    equal-cost choices, FRCE extends along output channels and WRCE along
    the feature map, matching the output organisation each engine prefers.

    ``factorized``: the conventional baseline; parallelism walks the
    preferred dimension's divisor ladder and only spills into the second
    dimension once the first saturates, so the lane count jumps between
    divisors (the staircase this mechanism is meant to remove).
    """
    dim_w, dim_f = _dims(layer)
    prefer_w = ce is CEKind.FRCE
    if mode == "factorized":
        first, second = (dim_w, dim_f) if prefer_w else (dim_f, dim_w)
        ladder = [(t1 * second, p1, 1) for p1, t1 in factor_space(first).points]
        ladder += [(t2, first, p2) for p2, t2 in factor_space(second).points[1:]]
        if prefer_w:
            return [(t, pa * pb, pa, pb) for t, pa, pb in ladder]
        return [(t, pa * pb, pb, pa) for t, pa, pb in ladder]
    best = {}
    for pw, tw in parallel_space(dim_w).points:
        for pf, tf in parallel_space(dim_f).points:
            rounds = tw * tf
            lanes = pw * pf
            cur = best.get(rounds)
            if (cur is None or lanes < cur[0]
                    or (lanes == cur[0]
                        and (pw > cur[1] if prefer_w else pf > cur[2]))):
                best[rounds] = (lanes, pw, pf)
    frontier = []
    for rounds in sorted(best, reverse=True):
        lanes, pw, pf = best[rounds]
        while frontier and frontier[-1][1] >= lanes:
            frontier.pop()  # dominated: fewer rounds at no extra lanes
        frontier.append((rounds, lanes, pw, pf))
    return frontier


class _LayerState:
    """Mutable tuning state of one layer."""

    __slots__ = ("layer", "ce", "dwc", "work", "levels", "i", "raw_macs")

    def __init__(self, layer: LayerSpec, ce: CEKind, mode: str):
        self.layer = layer
        self.ce = ce
        self.dwc = layer.kind is LayerKind.DWC
        self.work = _work_per_round(layer)
        self.levels = _levels(layer, ce, mode)
        self.i = 0
        self.raw_macs = mac_count(layer)

    @property
    def pw(self):
        return self.levels[self.i][2]

    @property
    def pf(self):
        return self.levels[self.i][3]

    def t_cycles(self) -> int:
        return self.levels[self.i][0] * self.work

    def lanes(self) -> int:
        return self.levels[self.i][1]

    def dsp(self, decompose: bool) -> int:
        lanes = self.lanes()
        if decompose and not self.dwc:
            return -(-lanes // 2)
        return lanes

    def can_bump(self) -> bool:
        return self.i < len(self.levels) - 1

    def bump(self):
        self.i += 1

    def unbump(self):
        self.i -= 1


def _greedy_tune(states, budget, decompose, snapshot=None):
    """Widen bottleneck layers until the budget binds.

    All layers tied at the bottleneck time are widened in one pass, in
    ascending layer order; the first widening that would overrun the budget
    is rolled back and tuning stops.  Returns the realised DSP usage.
    """
    dsp = sum(s.dsp(decompose) for s in states)
    if dsp > budget:
        raise InfeasibleBudgetError(
            f"budget {budget} below the {len(states)}-layer minimum {dsp}",
            minimum=dsp)
    times = [s.t_cycles() for s in states]
    while True:
        t_max = max(times)
        tied = [i for i, t in enumerate(times) if t == t_max and states[i].can_bump()]
        if not tied:
            return dsp  # bottleneck layers saturated; no further progress
        for i in tied:
            s = states[i]
            old_dsp = s.dsp(decompose)
            s.bump()
            new_dsp = dsp - old_dsp + s.dsp(decompose)
            if new_dsp > budget:
                s.unbump()
                return dsp
            dsp = new_dsp
            times[i] = s.t_cycles()
            if snapshot is not None:
                snapshot(dsp, states, times)


def _tunable_states(net: NetworkSpec, boundary: int, mode: str):
    states = []
    for lay in net.layers:
        if lay.kind in TUNABLE_KINDS:
            ce = CEKind.FRCE if lay.id < boundary else CEKind.WRCE
            states.append(_LayerState(lay, ce, mode))
    return states


def dynamic_parallelism_tuning(net: NetworkSpec, boundary: int, dsp_budget: int,
                               mode: str = "fgpm", decompose: bool = True,
                               clock_hz: float = 200e6) -> DesignPoint:
    """Allocate per-layer parallelism maximising steady-state throughput."""
    if mode not in ("fgpm", "factorized"):
        raise ValueError(f"unknown tuning mode {mode!r}")
    states = _tunable_states(net, boundary, mode)
    dsp = _greedy_tune(states, dsp_budget, decompose)
    assignments = tuple(
        CEAssignment(s.layer.id, s.layer.kind, s.ce, s.pw, s.pf,
                     s.t_cycles(), s.raw_macs)
        for s in states)
    t_bot = max(a.t_cycles for a in assignments)
    pw_map = {s.layer.id: s.pw for s in states if s.ce is CEKind.WRCE}
    footprint = design_point_memory(net, boundary, wrce_pw=pw_map)
    return DesignPoint(
        network=net.name, boundary=boundary, assignments=assignments,
        footprint=footprint, dsp_used=dsp,
        mac_units=sum(a.lanes for a in assignments),
        t_bottleneck=t_bot,
        total_macs=sum(mac_count(l) for l in net.layers),
        clock_hz=clock_hz)


@dataclass(frozen=True)
class ThroughputReport:
    gops: float
    fps: float
    per_layer_efficiency: tuple[float, ...]
    mac_efficiency: float  # useful MACs / (bottleneck time * allocated lanes)


def throughput(design: DesignPoint, clock_hz=None) -> ThroughputReport:
    clock = design.clock_hz if clock_hz is None else clock_hz
    t_bot = design.t_bottleneck
    per_layer = tuple(
        a.raw_macs / (t_bot * a.lanes) for a in design.assignments)
    useful = sum(a.raw_macs for a in design.assignments)
    lanes = sum(a.lanes for a in design.assignments)
    return ThroughputReport(
        gops=2.0 * design.total_macs * clock / t_bot / 1e9,
        fps=clock / t_bot,
        per_layer_efficiency=per_layer,
        mac_efficiency=useful / (t_bot * lanes))


def balanced_memory_allocation(net: NetworkSpec,
                               sram_budget_bytes: int) -> tuple[int, int]:
    """(min-SRAM boundary, budget-extended boundary).

    Boundaries never split a skip-connection block (its shortcut data must
    live entirely on one side).  The first result is the SRAM-minimising
    boundary; the second advances it layer group by layer group while the
    total stays under the budget, shrinking DRAM traffic.
    """
    candidates = atomic_boundaries(net)
    totals = {l: design_point_memory(net, l).sram_total_bytes for l in candidates}
    min_sram = min(totals.values())
    if sram_budget_bytes < min_sram:
        raise InfeasibleBudgetError(
            f"SRAM budget {sram_budget_bytes} below achievable minimum {min_sram}",
            minimum=min_sram)
    # deepest boundary achieving the minimum (deeper also means less DRAM)
    boundary_min = max(l for l, v in totals.items() if v == min_sram)
    boundary_final = boundary_min
    for l in candidates:
        if l <= boundary_min:
            continue
        if totals[l] < sram_budget_bytes:
            boundary_final = l
        else:
            break
    return boundary_min, boundary_final


# ---------------------------------------------------------------------------
# budget sweeps

@dataclass(frozen=True)
class SweepPoint:
    budget: int
    feasible: bool
    mac_units: int
    t_bottleneck: int
    efficiency: float  # useful MACs / (bottleneck time * budget)
    fps: float


@dataclass(frozen=True)
class SweepResult:
    network: str
    mode: str
    points: tuple[SweepPoint, ...]
    mean_efficiency: float
    std_efficiency: float


def tuning_trajectory(net: NetworkSpec, boundary: int, mode: str,
                      budget_max: int, decompose: bool = False):
    """States after every single widening step, up to ``budget_max`` units.

    Returns (floor, snapshots, useful_macs) where snapshots are
    (dsp_used, t_bottleneck) tuples in widening order and floor is the
    all-single-lane usage.  A greedy run for any budget <= budget_max is the
    last snapshot that fits, so one trajectory serves a whole budget grid.
    """
    states = _tunable_states(net, boundary, mode)
    floor = sum(s.dsp(decompose) for s in states)
    useful = sum(s.raw_macs for s in states)
    snaps = [(floor, max(s.t_cycles() for s in states))]

    def record(dsp, sts, times):
        snaps.append((dsp, max(times)))

    _greedy_tune(states, budget_max, decompose, snapshot=record)
    return floor, snaps, useful


def trajectory_state(snaps, budget):
    """Last (dsp, t_bottleneck) snapshot within the budget."""
    best = None
    for dsp, t in snaps:
        if dsp <= budget:
            best = (dsp, t)
        else:
            break
    return best


def efficiency_sweep(net: NetworkSpec, budgets=None, mode: str = "fgpm",
                     boundary: int | None = None,
                     clock_hz: float = 200e6) -> SweepResult:
    """Theoretical MAC efficiency across a grid of multiplier budgets.

    Efficiency charges the whole budget: useful MACs / (bottleneck cycles *
    budgeted units).  Budgets below the layer count are infeasible and
    marked rather than skipped silently.
    """
    if budgets is None:
        budgets = range(60, 4001, 20)
    budgets = list(budgets)
    if boundary is None:
        boundary = balanced_memory_allocation(net, float("inf"))[0]
    floor, snaps, useful = tuning_trajectory(net, boundary, mode, max(budgets))
    points = []
    effs = []
    for b in budgets:
        if b < floor:
            points.append(SweepPoint(b, False, 0, 0, 0.0, 0.0))
            continue
        dsp, t = trajectory_state(snaps, b)
        eff = useful / (t * b)
        effs.append(eff)
        points.append(SweepPoint(b, True, dsp, t, eff, clock_hz / t))
    effs = np.asarray(effs)
    mean = float(effs.mean()) if effs.size else 0.0
    std = float(effs.std()) if effs.size else 0.0
    return SweepResult(net.name, mode, tuple(points), mean, std)
