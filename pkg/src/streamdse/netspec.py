"""Network and layer data model for streaming CNN accelerator analysis.

A network is an ordered list of layers (standard, depthwise and pointwise
convolutions, fully-connected, pooling, and elementwise shortcut joins).
Layers chain along the main branch; skip-connection blocks (SCBs) are marked
with a block id and a join layer that references its shortcut source.

Networks are described in a plain text format (one ``layer`` record per
line, ``key=value`` fields, ``#`` comments) and the four benchmark networks
ship as data files under ``streamdse/networks/``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from importlib.resources import files as _pkg_files
from pathlib import Path


class LayerKind(Enum):
    STC = "stc"          # standard convolution
    DWC = "dwc"          # depthwise convolution
    PWC = "pwc"          # pointwise (1x1) convolution
    FC = "fc"            # fully connected
    POOL = "pool"        # max/avg pooling (no weights, no MACs counted)
    SCB_ADD = "scb_add"  # elementwise shortcut join (add or concat rejoin)


# Kinds whose output side follows the sliding-window geometry identity.
WINDOWED_KINDS = (LayerKind.STC, LayerKind.DWC, LayerKind.PWC, LayerKind.POOL)


class NetworkError(ValueError):
    """Raised on parse errors or layer-invariant violations."""


def conv_out_side(f_in, k, stride, pad):
    return (f_in + 2 * pad - k) // stride + 1


@dataclass(frozen=True)
class LayerSpec:
    """One network layer.

    ``src`` is the id of the layer whose output feeds this layer (defaults
    to the previous layer in the list); parallel branches inside a block set
    it explicitly.  ``shortcut_src`` is only meaningful on SCB_ADD joins.
    ``groups`` models grouped convolutions (ShuffleNetV1); depthwise layers
    use kind DWC instead of groups.
    """

    id: int
    name: str
    kind: LayerKind
    f_in: int
    f_out: int
    m: int   # input channels
    n: int   # output channels
    k: int = 1
    stride: int = 1
    pad: int = 0
    groups: int = 1
    src: int | None = None
    shortcut_src: int | None = None
    scb: int | None = None

    def validate(self):
        if min(self.k, self.stride, self.m, self.n, self.f_in) < 1 or self.pad < 0:
            raise NetworkError(f"layer {self.id} ({self.name}): non-positive dimension")
        if self.kind in WINDOWED_KINDS:
            want = conv_out_side(self.f_in, self.k, self.stride, self.pad)
            if self.f_out != want:
                raise NetworkError(
                    f"layer {self.id} ({self.name}): f_out={self.f_out} inconsistent "
                    f"with (f_in={self.f_in}, k={self.k}, stride={self.stride}, "
                    f"pad={self.pad}); expected {want}")
        elif self.f_out != self.f_in:
            raise NetworkError(
                f"layer {self.id} ({self.name}): {self.kind.name} must preserve "
                f"the spatial side (f_in={self.f_in}, f_out={self.f_out})")
        if self.kind is LayerKind.PWC and self.k != 1:
            raise NetworkError(f"layer {self.id} ({self.name}): PWC requires k=1")
        if self.kind in (LayerKind.DWC, LayerKind.SCB_ADD) and self.n != self.m:
            raise NetworkError(
                f"layer {self.id} ({self.name}): {self.kind.name} requires n == m")
        if self.kind is LayerKind.SCB_ADD and self.shortcut_src is None:
            raise NetworkError(
                f"layer {self.id} ({self.name}): SCB_ADD requires shortcut_src")
        if self.m % self.groups or self.n % self.groups:
            raise NetworkError(
                f"layer {self.id} ({self.name}): groups={self.groups} must divide "
                f"m={self.m} and n={self.n}")


@dataclass(frozen=True)
class ScbBlock:
    """A skip-connection block: member layers, the join, and shortcut data.

    ``bypass`` is True when the shortcut carries stored data past the main
    branch (identity residual, or the untouched half of a channel split).
    Blocks whose shortcut source is itself a member layer (two computing
    branches) carry no stored shortcut data.
    """

    id: int
    member_ids: tuple[int, ...]
    join: LayerSpec
    main_branch: tuple[LayerSpec, ...]
    bypass: bool
    shortcut_channels: int  # channels held by the shortcut branch (0 if not bypass)

    @property
    def side(self):
        return self.join.f_out


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    input_side: int
    input_channels: int
    bits: int
    layers: tuple[LayerSpec, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.layers)

    def layer(self, lid):
        return self.layers[lid]

    def source_of(self, layer: LayerSpec) -> LayerSpec | None:
        """The layer feeding this one along its input edge."""
        if layer.src is not None:
            return self.layers[layer.src]
        return self.layers[layer.id - 1] if layer.id > 0 else None

    def scb_blocks(self) -> dict[int, ScbBlock]:
        groups: dict[int, list[LayerSpec]] = {}
        for lay in self.layers:
            if lay.scb is not None:
                groups.setdefault(lay.scb, []).append(lay)
        blocks = {}
        for bid, members in groups.items():
            joins = [l for l in members if l.kind is LayerKind.SCB_ADD]
            if len(joins) != 1:
                raise NetworkError(f"SCB block {bid}: expected exactly one join layer")
            join = joins[0]
            member_ids = {l.id for l in members}
            bypass = join.shortcut_src not in member_ids
            if bypass:
                main_src = self.source_of(join)
                sc = join.n - main_src.n if main_src.n < join.n else join.n
            else:
                sc = 0
            # Main branch: the source chain feeding the join, within the block.
            main = []
            cur = self.source_of(join)
            while cur is not None and cur.id in member_ids:
                main.append(cur)
                cur = self.source_of(cur)
            main.reverse()
            blocks[bid] = ScbBlock(bid, tuple(sorted(member_ids)), join,
                                   tuple(main), bypass, sc)
        return blocks

    def validate(self):
        for i, lay in enumerate(self.layers):
            if lay.id != i:
                raise NetworkError(f"layer {lay.name}: id {lay.id} != position {i}")
            lay.validate()
            src = self.layers[lay.src] if lay.src is not None else \
                (self.layers[i - 1] if i > 0 else None)
            if lay.src is not None and lay.src >= i:
                raise NetworkError(f"layer {lay.id} ({lay.name}): src must point backward")
            if src is None:
                if (lay.f_in, lay.m) != (self.input_side, self.input_channels):
                    raise NetworkError(
                        f"layer {lay.id} ({lay.name}): first layer must consume the "
                        f"network input ({self.input_side}, {self.input_channels})")
                continue
            if lay.f_in != src.f_out:
                raise NetworkError(
                    f"layer {lay.id} ({lay.name}): f_in={lay.f_in} != f_out={src.f_out} "
                    f"of source layer {src.id} ({src.name})")
            if lay.kind is LayerKind.SCB_ADD:
                self._validate_join(lay, src)
            elif lay.m != src.n:
                # A block entry may consume half the channels of its input
                # (channel split); the other half rejoins at the concat join.
                if not (lay.scb is not None and 2 * lay.m == src.n):
                    raise NetworkError(
                        f"layer {lay.id} ({lay.name}): m={lay.m} != n={src.n} of "
                        f"source layer {src.id} ({src.name})")
        for lay in self.layers:
            if lay.shortcut_src is not None and lay.shortcut_src >= lay.id:
                raise NetworkError(
                    f"layer {lay.id} ({lay.name}): shortcut_src must point backward")
        self.scb_blocks()

    def _validate_join(self, lay: LayerSpec, src: LayerSpec):
        sc = self.layers[lay.shortcut_src]
        if sc.f_out != lay.f_out or src.f_out != lay.f_in:
            raise NetworkError(
                f"layer {lay.id} ({lay.name}): join sides disagree "
                f"(main {src.f_out}, shortcut {sc.f_out}, join {lay.f_out})")
        add = src.n == lay.n and sc.n == lay.n
        concat_branches = src.n + sc.n == lay.n
        concat_split = 2 * src.n == lay.n and sc.n == lay.n
        if not (add or concat_branches or concat_split):
            raise NetworkError(
                f"layer {lay.id} ({lay.name}): join channels disagree "
                f"(main {src.n} + shortcut {sc.n} vs join {lay.n})")


def fm_bytes(layer: LayerSpec, which: str, bits: int) -> int:
    """Feature-map size in bytes on the chosen side of a layer."""
    if which == "input":
        elems = layer.f_in * layer.f_in * layer.m
    elif which == "output":
        elems = layer.f_out * layer.f_out * layer.n
    else:
        raise ValueError(f"which must be 'input' or 'output', got {which!r}")
    return elems * bits // 8


# ---------------------------------------------------------------------------
# text format

_INT_FIELDS = {"id", "f_in", "f_out", "m", "n", "k", "stride", "pad", "groups",
               "src", "shortcut", "scb", "input", "channels", "bits"}


def _parse_fields(parts, where):
    out = {}
    for part in parts:
        if "=" not in part:
            raise NetworkError(f"{where}: expected key=value, got {part!r}")
        key, _, val = part.partition("=")
        if key in _INT_FIELDS:
            try:
                val = int(val)
            except ValueError:
                raise NetworkError(f"{where}: field {key} must be an integer, "
                                   f"got {val!r}") from None
        out[key] = val
    return out


def parse_network(text: str, source: str = "<string>") -> NetworkSpec:
    name = None
    input_side = input_channels = bits = None
    layers = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        rectype, *parts = line.split()
        fields = _parse_fields(parts, where)
        if rectype == "network":
            name = fields.get("name")
            input_side = fields.get("input")
            input_channels = fields.get("channels")
            bits = fields.get("bits", 8)
            if name is None or input_side is None or input_channels is None:
                raise NetworkError(f"{where}: network record needs "
                                   f"name=, input= and channels=")
        elif rectype == "layer":
            missing = {"id", "name", "kind", "f_in", "m", "n"} - set(fields)
            if missing:
                raise NetworkError(f"{where}: layer record missing "
                                   f"{', '.join(sorted(missing))}")
            try:
                kind = LayerKind(fields["kind"].lower())
            except ValueError:
                raise NetworkError(f"{where}: unknown layer kind "
                                   f"{fields['kind']!r}") from None
            k = fields.get("k", 1)
            stride = fields.get("stride", 1)
            pad = fields.get("pad", 0)
            if "f_out" in fields:
                f_out = fields["f_out"]
            elif kind in WINDOWED_KINDS:
                f_out = conv_out_side(fields["f_in"], k, stride, pad)
            else:
                f_out = fields["f_in"]
            layers.append(LayerSpec(
                id=fields["id"], name=fields["name"], kind=kind,
                f_in=fields["f_in"], f_out=f_out, m=fields["m"], n=fields["n"],
                k=k, stride=stride, pad=pad, groups=fields.get("groups", 1),
                src=fields.get("src"), shortcut_src=fields.get("shortcut"),
                scb=fields.get("scb")))
        else:
            raise NetworkError(f"{where}: unknown record type {rectype!r}")
    if name is None:
        raise NetworkError(f"{source}: no network record found")
    net = NetworkSpec(name=name, input_side=input_side,
                      input_channels=input_channels, bits=bits,
                      layers=tuple(layers))
    net.validate()
    return net


def load_network(path) -> NetworkSpec:
    path = Path(path)
    return parse_network(path.read_text(encoding="utf-8"), source=str(path))


def format_network(net: NetworkSpec) -> str:
    lines = [f"network name={net.name} input={net.input_side} "
             f"channels={net.input_channels} bits={net.bits}"]
    for lay in net.layers:
        parts = [f"layer id={lay.id}", f"name={lay.name}",
                 f"kind={lay.kind.value}", f"f_in={lay.f_in}",
                 f"f_out={lay.f_out}", f"m={lay.m}", f"n={lay.n}",
                 f"k={lay.k}", f"stride={lay.stride}", f"pad={lay.pad}"]
        if lay.groups != 1:
            parts.append(f"groups={lay.groups}")
        if lay.src is not None:
            parts.append(f"src={lay.src}")
        if lay.shortcut_src is not None:
            parts.append(f"shortcut={lay.shortcut_src}")
        if lay.scb is not None:
            parts.append(f"scb={lay.scb}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def save_network(net: NetworkSpec, path):
    Path(path).write_text(format_network(net), encoding="utf-8")


BUILTIN_NAMES = ("mobilenet_v1", "mobilenet_v2", "shufflenet_v1", "shufflenet_v2")


def builtin_network(name: str) -> NetworkSpec:
    if name not in BUILTIN_NAMES:
        raise NetworkError(f"unknown builtin network {name!r}; "
                           f"available: {', '.join(BUILTIN_NAMES)}")
    data = _pkg_files("streamdse.networks").joinpath(f"{name}.net")
    return parse_network(data.read_text(encoding="utf-8"), source=f"builtin:{name}")


def builtin_networks() -> list[NetworkSpec]:
    """The four benchmark networks at 224x224, 8-bit."""
    return [builtin_network(name) for name in BUILTIN_NAMES]
