"""Design-space exploration toolkit for streaming multi-engine CNN accelerators.

The package models lightweight CNNs (depthwise-separable convolutions and
skip-connection blocks) running on a layer-pipelined accelerator with two
engine kinds: feature-map-reused engines for shallow layers and
weight-reused engines for deep layers.  It provides closed-form operation
and access cost models, on-chip/off-chip memory sizing with a balanced
boundary-placement algorithm, fine-grained parallelism tuning with a
throughput model, and a cycle-approximate line-buffer dataflow simulator.
"""

from .netspec import (BUILTIN_NAMES, LayerKind, LayerSpec, NetworkError,
                      NetworkSpec, ScbBlock, builtin_network,
                      builtin_networks, fm_bytes, load_network,
                      parse_network, save_network)
from .costmodel import (LayerCost, NetworkCost, fm_access, mac_count,
                        network_totals, ratios, weight_count)
from .memmodel import (MB, CEKind, MemoryFootprint, ScbBufferInfo,
                       architecture_traffic, atomic_boundaries,
                       boundary_sweep, design_point_memory, frce_fm_buffer,
                       scb_delay_buffer, weight_reads_per_frame,
                       weight_storage, wrce_fm_buffer)
from .allocator import (CEAssignment, DesignPoint, InfeasibleBudgetError,
                        ParallelSpace, SweepResult, ThroughputReport,
                        balanced_memory_allocation, dsp_count,
                        dynamic_parallelism_tuning, efficiency_sweep,
                        factor_space, padded_ops, parallel_space, throughput)
from .dfsim import (DATAFLOW, DIRECT, SimConfig, SimResult,
                    acceleration_ratio, simulate, stride2_bubble_count,
                    validate_against_closed_form)
from .cli import Platform, platform_presets

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
