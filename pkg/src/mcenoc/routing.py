"""Offline route computation for Benes networks.

Headers are computed on the radix-2 network by the classical looping
decomposition: connections are 2-coloured by walking the alternating
constraint chains of the outermost stage pair (each chain started at the
lowest unprocessed source, first assignment to the upper subnetwork),
then the two half-size subnetworks are routed recursively. A header for
source q reads most-significant-bit first; its trailing log2(N) bits
always spell the destination.

Wider-switch networks consume the identical bit string regrouped per
their stage plan. When the middle stage is wider than two ports the
radix-2 string is one group longer than the plan needs: the middle
crossbar takes the sub-destination bits directly, so the m-1 looping
bits ahead of them are dropped. Either way, correctness is established
by simulating the routes against the actual wiring, never assumed from
the construction.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .topology import StagePlan, Topology


@dataclass(frozen=True)
class Permutation:
    """A bijection src -> mapping[src] on [0, N)."""

    mapping: tuple[int, ...]

    def __init__(self, mapping):
        object.__setattr__(self, "mapping", tuple(mapping))
        n = len(self.mapping)
        if sorted(self.mapping) != list(range(n)):
            raise ValueError(f"not a bijection on [0, {n}): {list(self.mapping)}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def rotation(cls, n: int, r: int) -> "Permutation":
        return cls((s + r) % n for s in range(n))

    @classmethod
    def shuffled(cls, n: int, rng: random.Random) -> "Permutation":
        m = list(range(n))
        rng.shuffle(m)
        return cls(m)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.mapping)
        for s, d in enumerate(self.mapping):
            inv[d] = s
        return Permutation(inv)

    def __len__(self) -> int:
        return len(self.mapping)

    def __getitem__(self, src: int) -> int:
        return self.mapping[src]

    def __iter__(self):
        return iter(self.mapping)


@dataclass(frozen=True)
class RouteHeader:
    """Configuration bits for one route, grouped per stage."""

    bits: str
    grouping: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != sum(self.grouping):
            raise ValueError(
                f"header length {len(self.bits)} does not match grouping {self.grouping}"
            )
        if set(self.bits) - {"0", "1"}:
            raise ValueError(f"header must be binary, got {self.bits!r}")

    def groups(self) -> tuple[str, ...]:
        out, pos = [], 0
        for g in self.grouping:
            out.append(self.bits[pos : pos + g])
            pos += g
        return tuple(out)

    def stage_values(self) -> tuple[int, ...]:
        return tuple(int(g, 2) for g in self.groups())

    def __str__(self) -> str:
        return "-".join(self.groups())


@dataclass
class RouteSet:
    """Headers keyed by source node; need not cover every node."""

    headers: dict[int, RouteHeader] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.headers)

    def __getitem__(self, src: int) -> RouteHeader:
        return self.headers[src]

    def items(self):
        return sorted(self.headers.items())

    def to_json(self) -> str:
        return json.dumps({str(s): h.bits for s, h in self.items()}, indent=0)

    @classmethod
    def from_json(cls, text: str, plan: StagePlan) -> "RouteSet":
        raw = json.loads(text)
        grouping = plan.port_bits
        return cls({int(s): RouteHeader(b, grouping) for s, b in raw.items()})


def _loop_route(perm: list[int]) -> list[list[int]]:
    """Radix-2 header bits per source for a full permutation (recursive)."""
    n = len(perm)
    if n == 2:
        return [[perm[0]], [perm[1]]]
    inv = [0] * n
    for s, d in enumerate(perm):
        inv[d] = s
    color: list[int | None] = [None] * n
    for s0 in range(n):
        if color[s0] is not None:
            continue
        s, c = s0, 0
        while color[s] is None:
            color[s] = c
            t = inv[perm[s] ^ 1]  # shares s's output switch
            if color[t] is None:
                color[t] = 1 - c
            elif color[t] != 1 - c:  # cannot happen: chains alternate evenly
                raise AssertionError("looping chain parity broken")
            s = t ^ 1  # shares t's input switch
            c = 1 - color[t]
    half = n // 2
    sub = [[0] * half, [0] * half]
    for s in range(n):
        sub[color[s]][s // 2] = perm[s] // 2
    sub_bits = [_loop_route(sub[0]), _loop_route(sub[1])]
    out = []
    for s in range(n):
        c = color[s]
        out.append([c] + sub_bits[c][s // 2] + [perm[s] & 1])
    return out


def _fit_to_plan(bits: list[int], plan: StagePlan) -> RouteHeader:
    """Regroup a radix-2 bit list for an arbitrary stage plan.

    Drops the m-1 looping bits ahead of the middle group when the middle
    stage is a 2**m-port crossbar with m > 1 (the crossbar consumes the
    sub-destination directly).
    """
    p_target = plan.total_header_bits
    m = plan.middle.port_bits
    if m > 1:
        q = (len(bits) + 1) // 2 - m  # radix-2 stages ahead of the centre
        bits = bits[:q] + bits[q + m - 1 :]
    if len(bits) != p_target:
        raise ValueError(
            f"cannot fit {len(bits)}-bit route onto plan needing {p_target} bits"
        )
    return RouteHeader("".join(map(str, bits)), plan.port_bits)


def route_permutation(topology: Topology, permutation: Permutation) -> RouteSet:
    """Conflict-free headers realizing a full permutation on the topology."""
    n = topology.n_nodes
    if len(permutation) != n:
        raise ValueError(
            f"permutation size {len(permutation)} does not match network size {n}"
        )
    bitlists = _loop_route(list(permutation.mapping))
    plan = topology.plan
    return RouteSet({s: _fit_to_plan(b, plan) for s, b in enumerate(bitlists)})


def regroup_header(radix2_bits, plan: StagePlan) -> RouteHeader:
    """Regroup a radix-2 header bit string per a target stage plan.

    The bit string is unchanged; only the per-stage grouping differs.
    Raises ValueError on length mismatch.
    """
    if not isinstance(radix2_bits, str):
        radix2_bits = "".join(str(int(b)) for b in radix2_bits)
    if len(radix2_bits) != plan.total_header_bits:
        raise ValueError(
            f"length mismatch: {len(radix2_bits)}-bit header vs "
            f"{plan.total_header_bits}-bit plan"
        )
    return RouteHeader(radix2_bits, plan.port_bits)


def single_route_header(topology: Topology, src: int, dst: int) -> RouteHeader:
    """Header routing src -> dst on an otherwise idle network.

    Looping bits are zero; the destination bits close the header.
    """
    n = topology.n_nodes
    if not (0 <= src < n and 0 <= dst < n):
        raise ValueError(f"endpoints ({src}, {dst}) out of range for N={n}")
    logn = n.bit_length() - 1
    radix2_len = 2 * logn - 1
    dst_bits = [(dst >> (logn - 1 - i)) & 1 for i in range(logn)]
    bits = [0] * (radix2_len - logn) + dst_bits
    return _fit_to_plan(bits, topology.plan)


def trace_path(
    topology: Topology, src: int, header: RouteHeader
) -> list[tuple[int, int, int]]:
    """Port walk of a header: list of (stage, in_port, out_port)."""
    plan = topology.plan
    if header.grouping != plan.port_bits:
        raise ValueError("header grouping does not match the stage plan")
    port = src
    path = []
    for k, (st, r) in enumerate(zip(plan.stages, header.stage_values())):
        d = st.degree
        out = (port // d) * d + r
        path.append((k, port, out))
        if k < plan.n_stages - 1:
            port = topology.forward_map(k)[out]
    return path


def decode_destination(topology: Topology, src: int, header: RouteHeader) -> int:
    """Endpoint a header reaches from src, by walking the wiring."""
    return trace_path(topology, src, header)[-1][2]


@dataclass
class RouteOutcome:
    src: int
    opened: bool
    destination: int | None
    expected: int
    rejected_at_stage: int | None = None

    @property
    def correct(self) -> bool:
        return self.opened and self.destination == self.expected


@dataclass
class RouteSetReport:
    outcomes: list[RouteOutcome]
    mode: str

    @property
    def zero_conflict(self) -> bool:
        return all(o.opened for o in self.outcomes)

    @property
    def all_correct(self) -> bool:
        return all(o.correct for o in self.outcomes)

    @property
    def opened(self) -> int:
        return sum(o.opened for o in self.outcomes)

    @property
    def rejected(self) -> int:
        return sum(not o.opened for o in self.outcomes)

    def __str__(self) -> str:
        return (
            f"routes={len(self.outcomes)} opened={self.opened} "
            f"rejected={self.rejected} correct={sum(o.correct for o in self.outcomes)} "
            f"({self.mode})"
        )


def _walk_verify(topology: Topology, routeset: RouteSet) -> RouteSetReport:
    # Lockstep claim check: all headers start together, so every route's
    # stage-k claim lands on the same cycle and conflicts reduce to
    # duplicate output-port claims per stage, lowest local input port
    # winning.
    plan = topology.plan
    paths = {s: trace_path(topology, s, h) for s, h in routeset.items()}
    expected = {s: paths[s][-1][2] for s in paths}
    alive = dict(paths)
    outcomes: dict[int, RouteOutcome] = {}
    for k, st in enumerate(plan.stages):
        d = st.degree
        claims: dict[int, list[tuple[int, int]]] = {}
        for s, path in alive.items():
            _, in_port, out_port = path[k]
            claims.setdefault(out_port, []).append((in_port % d, s))
        for out_port, entries in claims.items():
            if len(entries) > 1:
                entries.sort()
                for _, loser in entries[1:]:
                    outcomes[loser] = RouteOutcome(
                        loser, False, None, expected[loser], rejected_at_stage=k
                    )
                    del alive[loser]
    for s in alive:
        outcomes[s] = RouteOutcome(s, True, expected[s], expected[s])
    return RouteSetReport([outcomes[s] for s in sorted(outcomes)], mode="walk")


def verify_routeset(
    topology: Topology, routeset: RouteSet, mode: str = "sim", network=None
) -> RouteSetReport:
    """Drive all headers concurrently and report per-route outcomes.

    mode="sim" runs the cycle-accurate network; mode="walk" uses the
    lockstep claim reduction (exact for simultaneous setup and far
    faster, used as the independent cross-check).
    """
    if mode == "walk":
        return _walk_verify(topology, routeset)
    if mode != "sim":
        raise ValueError(f"unknown verify mode {mode!r}")
    from . import netsim  # deferred: netsim drives the simulator

    expected = {
        s: decode_destination(topology, s, h) for s, h in routeset.items()
    }
    results = netsim.settle_routes(topology, routeset, network=network)
    outcomes = []
    for s in sorted(routeset.headers):
        opened, dest, stage = results[s]
        outcomes.append(
            RouteOutcome(s, opened, dest, expected[s], rejected_at_stage=stage)
        )
    return RouteSetReport(outcomes, mode="sim")
