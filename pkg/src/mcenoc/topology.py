"""Benes network construction: stage plans, inter-stage wiring, diagrams.

An N-node network (N a power of two) is assembled from crossbar switches
of degree B = 2**switch_bits. When N is an exact power of B the network
has 2*log_B(N) - 1 uniform stages. Otherwise the middle stage narrows:
it uses switches of 2**m ports where m = log2(N / B**(X-1)) and
X = ceil(log_B(N)), giving 2*X - 1 stages in total. Every stage plan is
palindromic, and the total header length P is the sum of per-stage bits.

Inter-stage wiring follows the butterfly exchange. The canonical
bijection for the boundary `n` steps outward from the middle stage acts
within blocks of size 2**m * B**(n+1) (capped at N): port i maps to
j = ((k + k // block) % block) + origin with k = (i - origin) * B, which
sends port w of sub-block c to pin c of outward switch w. The second
half of the network mirrors the first, so physical boundary b and
boundary S-2-b carry mutually inverse maps.

The network is folded: node q drives input port q of the first stage and
receives output port q of the last stage.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace


class TopologyError(ValueError):
    """Invalid network parameters or a malformed structure."""


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class NetworkSpec:
    """Size parameters of a buildable network.

    n_nodes must be a power of two, at least 4; switch_bits gives the
    full-size switch degree B = 2**switch_bits, which may not exceed
    n_nodes.
    """

    n_nodes: int
    switch_bits: int

    def __post_init__(self):
        if not _is_pow2(self.n_nodes) or self.n_nodes < 4:
            raise TopologyError(
                f"node count must be a power of two >= 4, got {self.n_nodes}"
            )
        if self.switch_bits < 1:
            raise TopologyError(f"switch_bits must be >= 1, got {self.switch_bits}")
        if (1 << self.switch_bits) > self.n_nodes:
            raise TopologyError(
                f"switch degree {1 << self.switch_bits} exceeds node count {self.n_nodes}"
            )

    @property
    def switch_degree(self) -> int:
        return 1 << self.switch_bits


@dataclass(frozen=True)
class StageSpec:
    """One switching stage: switches of 2**port_bits ports each."""

    port_bits: int
    switch_count: int

    @property
    def degree(self) -> int:
        return 1 << self.port_bits


@dataclass(frozen=True)
class StagePlan:
    """Ordered stage specs for one network; always palindromic."""

    stages: tuple[StageSpec, ...]

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def half_depth(self) -> int:
        """Number of boundaries on each side of the middle stage."""
        return (len(self.stages) - 1) // 2

    @property
    def total_header_bits(self) -> int:
        return sum(st.port_bits for st in self.stages)

    @property
    def port_bits(self) -> tuple[int, ...]:
        return tuple(st.port_bits for st in self.stages)

    @property
    def middle(self) -> StageSpec:
        return self.stages[self.half_depth]

    @property
    def is_uniform(self) -> bool:
        return len({st.port_bits for st in self.stages}) == 1

    def describe(self) -> str:
        """One-line human summary, e.g. '5 stages of 2-port switches; P=5'."""
        if self.is_uniform:
            return (
                f"{self.n_stages} stages of {self.stages[0].degree}-port switches; "
                f"P={self.total_header_bits}"
            )
        parts = ", ".join(
            f"{st.degree}-port ×{st.switch_count}" for st in self.stages
        )
        return f"{self.n_stages} stages: {parts}; P={self.total_header_bits}"


@dataclass(frozen=True)
class WiringMap:
    """Forward port bijections for every physical boundary.

    boundaries[b][o] is the input port of stage b+1 wired to output port
    o of stage b.
    """

    boundaries: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Topology:
    spec: NetworkSpec
    plan: StagePlan
    wiring: WiringMap
    folded: bool = True

    @property
    def n_nodes(self) -> int:
        return self.spec.n_nodes

    @property
    def n_stages(self) -> int:
        return self.plan.n_stages

    @property
    def header_bits(self) -> int:
        return self.plan.total_header_bits

    def forward_map(self, boundary: int) -> tuple[int, ...]:
        return self.wiring.boundaries[boundary]


def plan_stages(n_nodes: int, switch_bits: int) -> StagePlan:
    """Compute the stage plan for an n_nodes network of 2**switch_bits-port
    switches.

    n_nodes == 2 is accepted for the degenerate single 2-port stage used
    by the analytic timing model; buildable topologies require >= 4.
    """
    if not _is_pow2(n_nodes) or n_nodes < 2:
        raise TopologyError(f"node count must be a power of two >= 2, got {n_nodes}")
    if switch_bits < 1:
        raise TopologyError(f"switch_bits must be >= 1, got {switch_bits}")
    x = n_nodes.bit_length() - 1  # log2(N)
    p = switch_bits
    if p > x:
        raise TopologyError(
            f"switch degree {1 << p} exceeds node count {n_nodes}"
        )
    if x % p == 0:
        n_half = x // p
        bits = [p] * (2 * n_half - 1)
    else:
        n_half = -(-x // p)  # ceil
        m = x - p * (n_half - 1)
        bits = [p] * (n_half - 1) + [m] + [p] * (n_half - 1)
    stages = tuple(StageSpec(b, n_nodes >> b) for b in bits)
    return StagePlan(stages)


def wire_boundary(
    boundary_index: int, spec: NetworkSpec, plan: StagePlan
) -> tuple[int, ...]:
    """Canonical bijection for the boundary `boundary_index` steps out from
    the middle stage (0 = adjacent to the middle).

    Maps port i on the middle-side stage to port j on the outward stage;
    the identical map serves the mirrored boundary in the other half.
    """
    s = plan.half_depth
    if not 0 <= boundary_index < s:
        raise TopologyError(
            f"boundary index {boundary_index} out of range [0, {s})"
        )
    n = spec.n_nodes
    deg = spec.switch_degree
    block = min(plan.middle.degree * deg ** (boundary_index + 1), n)
    out = [0] * n
    for i in range(n):
        o = (i // block) * block
        k = (i - o) * deg
        out[i] = (k + k // block) % block + o
    return tuple(out)


def _invert(bijection: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(bijection)
    for i, j in enumerate(bijection):
        inv[j] = i
    return tuple(inv)


def build_topology(spec: NetworkSpec) -> Topology:
    """Construct the full folded topology for a NetworkSpec."""
    plan = plan_stages(spec.n_nodes, spec.switch_bits)
    s = plan.half_depth
    canonical = [wire_boundary(n, spec, plan) for n in range(s)]
    forward: list[tuple[int, ...]] = []
    for b in range(plan.n_stages - 1):
        if b < s:
            # input half: the canonical map points outward, invert it
            forward.append(_invert(canonical[s - 1 - b]))
        else:
            forward.append(canonical[b - s])
    return Topology(spec=spec, plan=plan, wiring=WiringMap(tuple(forward)))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[CheckResult]
    routable: int = 0
    routability_total: int = 0

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        lines = [
            f"[{'PASS' if c.passed else 'FAIL'}] {c.name}"
            + (f": {c.detail}" if c.detail else "")
            for c in self.checks
        ]
        return "\n".join(lines)


def validate(
    topology: Topology,
    routability_samples: int = 100,
    seed: int = 0,
) -> ValidationReport:
    """Structural and behavioural checks on a constructed topology.

    Checks each boundary for bijectivity, the plan for palindromic
    symmetry and port-count consistency, mirror symmetry of the wiring,
    permutation preservation under random switch settings, and
    routability: exhaustive over all N! permutations for N <= 8, a
    seeded random sample otherwise.
    """
    plan, wiring = topology.plan, topology.wiring
    n = topology.n_nodes
    checks: list[CheckResult] = []

    bad = [
        b
        for b, bij in enumerate(wiring.boundaries)
        if sorted(bij) != list(range(n))
    ]
    checks.append(
        CheckResult(
            "boundary bijections",
            not bad,
            f"non-bijective boundaries: {bad}" if bad else f"{len(wiring.boundaries)} ok",
        )
    )

    bits = plan.port_bits
    palindromic = bits == bits[::-1]
    counts_ok = all(st.switch_count * st.degree == n for st in plan.stages)
    checks.append(
        CheckResult(
            "stage plan",
            palindromic and counts_ok and plan.n_stages % 2 == 1,
            f"port_bits={list(bits)} P={plan.total_header_bits}",
        )
    )

    mirror_ok = True
    nb = len(wiring.boundaries)
    for b in range(nb):
        if wiring.boundaries[b] != _invert(wiring.boundaries[nb - 1 - b]):
            mirror_ok = False
            break
    checks.append(CheckResult("mirror symmetry", mirror_ok))

    # arbitrary legal switch settings must keep the stage-to-stage map
    # a bijection
    rng = random.Random(seed)
    preserved = True
    for _ in range(20):
        ports = list(range(n))
        for k, st in enumerate(plan.stages):
            d = st.degree
            perms = [rng.sample(range(d), d) for _ in range(st.switch_count)]
            ports = [(q // d) * d + perms[q // d][q % d] for q in ports]
            if k < plan.n_stages - 1:
                fwd = wiring.boundaries[k]
                ports = [fwd[q] for q in ports]
        if sorted(ports) != list(range(n)):
            preserved = False
            break
    checks.append(CheckResult("permutation preservation", preserved))

    from . import routing  # deferred: routing depends on this module

    if n <= 8:
        import itertools

        total = routable = 0
        first_bad = None
        for perm in itertools.permutations(range(n)):
            total += 1
            rs = routing.route_permutation(topology, routing.Permutation(perm))
            rep = routing.verify_routeset(topology, rs, mode="walk")
            if rep.zero_conflict and rep.all_correct:
                routable += 1
            elif first_bad is None:
                first_bad = perm
        checks.append(
            CheckResult(
                "routability (exhaustive)",
                routable == total,
                f"{routable}/{total} permutations"
                + (f", first failure {first_bad}" if first_bad else ""),
            )
        )
    else:
        total = routable = 0
        for _ in range(routability_samples):
            total += 1
            perm = routing.Permutation.shuffled(n, rng)
            rs = routing.route_permutation(topology, perm)
            rep = routing.verify_routeset(topology, rs, mode="walk")
            if rep.zero_conflict and rep.all_correct:
                routable += 1
        checks.append(
            CheckResult(
                "routability (sampled)",
                routable == total,
                f"{routable}/{total} random permutations",
            )
        )
    report = ValidationReport(checks, routable=routable, routability_total=total)
    return report


def tamper_boundary(topology: Topology, boundary: int, port: int) -> Topology:
    """Return a copy with one wiring entry duplicated (a deliberate fault,
    for exercising validation and endpoint-correctness checks)."""
    bad = list(topology.wiring.boundaries[boundary])
    bad[port] = bad[(port + 1) % len(bad)]
    boundaries = list(topology.wiring.boundaries)
    boundaries[boundary] = tuple(bad)
    return replace(topology, wiring=WiringMap(tuple(boundaries)))


def _switch_spans(plan: StagePlan) -> list[list[tuple[int, int]]]:
    # per stage, per switch: (first port, degree)
    spans = []
    for st in plan.stages:
        d = st.degree
        spans.append([(w * d, d) for w in range(st.switch_count)])
    return spans


def emit_diagram(topology: Topology, format: str = "dot") -> str:
    """Render the topology as deterministic DOT or TikZ text."""
    if format == "dot":
        return _emit_dot(topology)
    if format == "tikz":
        return _emit_tikz(topology)
    raise TopologyError(f"unknown diagram format {format!r}")


def _emit_dot(topology: Topology) -> str:
    plan = topology.plan
    n = topology.n_nodes
    lines = ["digraph benes {", "  rankdir=LR;", "  node [shape=record];"]
    for k, st in enumerate(plan.stages):
        d = st.degree
        for w in range(st.switch_count):
            ins = "|".join(f"<i{c}>{c}" for c in range(d))
            outs = "|".join(f"<o{c}>{c}" for c in range(d))
            lines.append(
                f'  s{k}_w{w} [label="{{{{{ins}}}|s{k}w{w}|{{{outs}}}}}"];'
            )
    for q in range(n):
        lines.append(f'  n{q} [shape=ellipse, label="n{q}"];')
    d0 = plan.stages[0].degree
    dl = plan.stages[-1].degree
    last = plan.n_stages - 1
    for q in range(n):
        lines.append(f"  n{q} -> s0_w{q // d0}:i{q % d0};")
    for b, fwd in enumerate(topology.wiring.boundaries):
        da = plan.stages[b].degree
        db = plan.stages[b + 1].degree
        for o in range(n):
            j = fwd[o]
            lines.append(
                f"  s{b}_w{o // da}:o{o % da} -> s{b + 1}_w{j // db}:i{j % db};"
            )
    for q in range(n):
        lines.append(f"  s{last}_w{q // dl}:o{q % dl} -> n{q};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _emit_tikz(topology: Topology) -> str:
    plan = topology.plan
    n = topology.n_nodes
    xstep, ystep = 2.4, 0.5
    lines = [
        "\\begin{tikzpicture}[x=1cm,y=1cm]",
        "  % switches: s<stage>_w<switch>, ports top to bottom",
    ]
    for k, st in enumerate(plan.stages):
        d = st.degree
        x = k * xstep
        for w in range(st.switch_count):
            y_top = -(w * d) * ystep + 0.25 * ystep
            y_bot = -((w + 1) * d - 1) * ystep - 0.25 * ystep
            lines.append(
                f"  \\draw ({x:.2f},{y_top:.2f}) rectangle "
                f"({x + 0.8:.2f},{y_bot:.2f});"
            )
            lines.append(
                f"  \\node at ({x + 0.4:.2f},{(y_top + y_bot) / 2:.2f}) "
                f"{{\\tiny s{k}w{w}}};"
            )
            for c in range(d):
                y = -(w * d + c) * ystep
                lines.append(
                    f"  \\coordinate (s{k}_w{w}_p{c}l) at ({x:.2f},{y:.2f});"
                )
                lines.append(
                    f"  \\coordinate (s{k}_w{w}_p{c}r) at ({x + 0.8:.2f},{y:.2f});"
                )
    for b, fwd in enumerate(topology.wiring.boundaries):
        da = plan.stages[b].degree
        db = plan.stages[b + 1].degree
        for o in range(n):
            j = fwd[o]
            lines.append(
                f"  \\draw (s{b}_w{o // da}_p{o % da}r) -- "
                f"(s{b + 1}_w{j // db}_p{j % db}l);"
            )
    d0 = plan.stages[0].degree
    dl = plan.stages[-1].degree
    last = plan.n_stages - 1
    for q in range(n):
        lines.append(
            f"  \\node[left=2pt] at (s0_w{q // d0}_p{q % d0}l) {{\\tiny n{q}}};"
        )
        lines.append(
            f"  \\node[right=2pt] at (s{last}_w{q // dl}_p{q % dl}r) {{\\tiny n{q}}};"
        )
    lines.append("\\end{tikzpicture}")
    return "\n".join(lines) + "\n"
