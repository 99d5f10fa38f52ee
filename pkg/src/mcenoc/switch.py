"""Cycle model of one crossbar switching element.

Forward signals per port: clm (claim / connection hold), act (data
valid strobe) and dat (serial data). Backward signals: err (reject /
error) and cts (clear to send). An input port in Wait shifts one dat
bit into its accumulator on every cycle with clm and act both high,
most significant bit first; clm high with act low stalls the
accumulator, and dropping clm resets it. Once port_bits bits have
arrived the port claims the addressed output: it wins only if the
output is idle and no lower-numbered input completes a claim for the
same output on the same cycle, otherwise it enters Reject and holds
err upstream until clm drops.

Established connections forward clm/act/dat through a one-deep buffer
(one cycle of latency) and register the output's err/cts backwards at
the same depth. An error on the connected output takes priority over
everything else: the port enters Abort on the next cycle with err held
upstream, and one cycle after that the claimed output is released and
its forward signals are cleared. Releases (teardown or abort) become
visible to new claims one cycle later, so a claim raced against a
release always loses.

All state and outputs are registered: step() consumes one cycle of
inputs and produces the next cycle's outputs. Instances may be stepped
in parallel within a simulation cycle provided inputs are snapshotted
first.
"""

from __future__ import annotations

from enum import IntEnum


class PortState(IntEnum):
    WAIT = 0
    ACCEPT = 1
    REJECT = 2
    ABORT = 3


WAIT = PortState.WAIT
ACCEPT = PortState.ACCEPT
REJECT = PortState.REJECT
ABORT = PortState.ABORT


class Switch:
    """A 2**port_bits-port crossbar with in-band route setup."""

    __slots__ = (
        "port_bits",
        "n_ports",
        "state",
        "bits_seen",
        "accum",
        "direction",
        "owner",
        "out_clm",
        "out_act",
        "out_dat",
        "bwd_err",
        "bwd_cts",
        "_quiet",
    )

    def __init__(self, port_bits: int):
        if port_bits < 1:
            raise ValueError(f"port_bits must be >= 1, got {port_bits}")
        self.port_bits = port_bits
        self.n_ports = 1 << port_bits
        self.reset()

    def reset(self) -> None:
        n = self.n_ports
        self.state = [WAIT] * n
        self.bits_seen = [0] * n
        self.accum = [0] * n
        self.direction = [0] * n
        self.owner: list[int | None] = [None] * n
        self.out_clm = [0] * n
        self.out_act = [0] * n
        self.out_dat = [0] * n
        self.bwd_err = [0] * n
        self.bwd_cts = [1] * n
        self._quiet = True

    def is_idle(self) -> bool:
        """True iff every port is in Wait with no claim bits in progress."""
        return all(st == WAIT for st in self.state) and not any(self.bits_seen)

    def step(self, in_clm, in_act, in_dat, in_err, in_cts) -> None:
        """Advance one cycle.

        in_clm/in_act/in_dat index by input port; in_err/in_cts index by
        output port (the downstream side's backward drive).
        """
        if self._quiet:
            if 1 not in in_clm:
                return
            self._quiet = False

        n = self.n_ports
        p = self.port_bits
        state = self.state
        bits_seen = self.bits_seen
        accum = self.accum
        direction = self.direction
        owner = self.owner
        bwd_err = self.bwd_err
        bwd_cts = self.bwd_cts

        new_clm = [0] * n
        new_act = [0] * n
        new_dat = [0] * n
        pending: list[tuple[int, int]] = []
        releases: list[int] = []

        for q in range(n):
            st = state[q]
            if st == WAIT:
                if in_clm[q]:
                    if in_act[q]:
                        accum[q] = (accum[q] << 1) | (in_dat[q] & 1)
                        bits_seen[q] += 1
                        if bits_seen[q] == p:
                            pending.append((q, accum[q]))
                elif bits_seen[q]:
                    bits_seen[q] = 0
                    accum[q] = 0
                bwd_err[q] = 0
                bwd_cts[q] = 1
            elif st == ACCEPT:
                r = direction[q]
                if in_err[r]:
                    # downstream error wins over teardown; let the buffered
                    # cycle drain, clear the output on the next step
                    state[q] = ABORT
                    new_clm[r] = in_clm[q]
                    new_act[r] = in_act[q]
                    new_dat[r] = in_dat[q]
                    bwd_err[q] = 1
                    bwd_cts[q] = 1
                elif not in_clm[q]:
                    # upstream teardown: forward the de-assert, free the
                    # output for claims starting next cycle
                    state[q] = WAIT
                    bits_seen[q] = 0
                    accum[q] = 0
                    releases.append(r)
                    new_act[r] = in_act[q]
                    new_dat[r] = in_dat[q]
                    bwd_err[q] = 0
                    bwd_cts[q] = 1
                else:
                    new_clm[r] = 1
                    new_act[r] = in_act[q]
                    new_dat[r] = in_dat[q]
                    bwd_err[q] = 0
                    bwd_cts[q] = in_cts[r]
            elif st == REJECT:
                if not in_clm[q]:
                    state[q] = WAIT
                    bits_seen[q] = 0
                    accum[q] = 0
                    bwd_err[q] = 0
                else:
                    bwd_err[q] = 1
                bwd_cts[q] = 1
            else:  # ABORT
                r = direction[q]
                if owner[r] == q:
                    releases.append(r)
                if not in_clm[q]:
                    state[q] = WAIT
                    bits_seen[q] = 0
                    accum[q] = 0
                    bwd_err[q] = 0
                else:
                    bwd_err[q] = 1
                bwd_cts[q] = 1

        if pending:
            by_target: dict[int, list[int]] = {}
            for q, r in pending:
                bits_seen[q] = 0
                accum[q] = 0
                by_target.setdefault(r, []).append(q)
            for r, claimants in by_target.items():
                claimants.sort()
                winners = (
                    self._grant(r, claimants) if owner[r] is None else ()
                )
                for q in claimants:
                    if q in winners:
                        state[q] = ACCEPT
                        direction[q] = r
                        owner[r] = q
                        new_clm[r] = 1  # connection latched; data follows
                    else:
                        state[q] = REJECT
                        bwd_err[q] = 1

        for r in releases:
            owner[r] = None

        self.out_clm = new_clm
        self.out_act = new_act
        self.out_dat = new_dat

        if (
            1 not in in_clm
            and 1 not in new_clm
            and 1 not in new_act
            and self.is_idle()
        ):
            self._quiet = True

    def _grant(self, r: int, claimants: list[int]) -> tuple[int, ...]:
        # arbitration seam: lowest input port wins a simultaneous claim
        return (claimants[0],)
