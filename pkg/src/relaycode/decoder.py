"""Destination-side iterative decoder.

Schedule per iteration: all source decoders first (direct-link metrics
plus a-priori from the inner decoder), then interleave their coded-bit
extrinsics into the inner decoder, whose extrinsic is de-interleaved as
the next iteration's a-priori.  Relay-link metrics go only to the inner
decoder; final decisions are sign decisions on the per-source
information-bit a-posteriori LLRs (LLR 0 decides bit 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .relay import Permutation, StrategyConfig, relay_transmit_length
from .siso import inner_decode, outer_decode

EARLY_STOP_NONE = "none"
EARLY_STOP_STABLE = "stable-decisions"


@dataclass(frozen=True)
class DecodeConfig:
    strategy: StrategyConfig
    perm: Permutation
    max_iterations: int = 15
    early_stop: str = EARLY_STOP_STABLE

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.early_stop not in (EARLY_STOP_NONE, EARLY_STOP_STABLE):
            raise ValueError(f"unknown early-stop mode {self.early_stop!r}")


@dataclass
class DecodeOutcome:
    decisions: list[np.ndarray]
    iterations_used: int
    per_iteration_trace: list[tuple[int, int, int]] | None = field(
        default=None
    )


def decode(
    source_chan: list[np.ndarray],
    relay_chan: np.ndarray,
    cfg: DecodeConfig,
    truth: list[np.ndarray] | None = None,
) -> DecodeOutcome:
    """Iterative joint decoding of all sources.

    When ``truth`` (per-source information bits) is given, a trace of
    (iteration, source, residual bit errors) rows is returned alongside
    the decisions.
    """
    strategy = cfg.strategy
    if len(source_chan) != len(strategy.source_specs):
        raise ValueError("one channel LLR vector required per source")
    total = sum(np.asarray(c).size for c in source_chan)
    if total != len(cfg.perm):
        raise ValueError(
            f"codeword lengths sum to {total}, permutation has {len(cfg.perm)}"
        )
    relay_chan = np.ascontiguousarray(relay_chan, dtype=np.float64)
    expected = relay_transmit_length(strategy, total)
    if relay_chan.size != expected:
        raise ValueError(
            f"relay evidence length {relay_chan.size}, expected {expected}"
        )

    apriori_concat = np.zeros(total)
    trace: list[tuple[int, int, int]] | None = [] if truth is not None else None
    decisions: list[np.ndarray] = []
    previous: list[np.ndarray] | None = None
    iterations_used = cfg.max_iterations

    for iteration in range(1, cfg.max_iterations + 1):
        ext_concat, app_infos = outer_decode(
            list(strategy.source_specs),
            source_chan,
            apriori_concat,
            termination=strategy.source_termination,
        )
        decisions = [(app < 0).astype(np.int8) for app in app_infos]
        if trace is not None:
            for src, (dec, ref) in enumerate(zip(decisions, truth)):
                errs = int(np.count_nonzero(dec != np.asarray(ref)))
                trace.append((iteration, src, errs))
        if (
            cfg.early_stop == EARLY_STOP_STABLE
            and previous is not None
            and all(np.array_equal(d, p) for d, p in zip(decisions, previous))
        ):
            iterations_used = iteration
            break
        previous = decisions
        if iteration == cfg.max_iterations:
            break
        apriori_xtilde = cfg.perm.interleave(ext_concat)
        ext_xtilde = inner_decode(strategy, relay_chan, apriori_xtilde)
        apriori_concat = cfg.perm.deinterleave(ext_xtilde)

    return DecodeOutcome(
        decisions=decisions,
        iterations_used=iterations_used,
        per_iteration_trace=trace,
    )
