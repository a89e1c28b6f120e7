"""Soft-input soft-output building blocks.

LLR convention throughout: L = ln P(bit=0) / P(bit=1); positive means 0.
Every public operation clips its output to +-LLR_MAX so no infinity or
NaN ever leaves this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .relay import (
    STRATEGY_A,
    StrategyConfig,
    depuncture_llrs,
)
from .trellis import TERMINATED, TRUNCATED, GeneratorSpec, Trellis, build_trellis

LLR_MAX = 30.0


def clip_llrs(values) -> np.ndarray:
    return np.clip(np.asarray(values, dtype=np.float64), -LLR_MAX, LLR_MAX)


@dataclass(frozen=True)
class SisoResult:
    """A-posteriori and extrinsic LLRs from one SISO pass.

    ext_info = app_info - apriori on input bits; ext_coded (when requested)
    is the extrinsic on coded bits relative to the channel input.
    """

    app_info: np.ndarray
    ext_info: np.ndarray
    ext_coded: np.ndarray | None = None


def boxplus(a, b):
    """LLR of the XOR of two bits with independent LLRs a and b.

    Vectorized, numerically stable form of 2*atanh(tanh(a/2)*tanh(b/2));
    expects finite (clipped) inputs.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    mag = np.minimum(np.abs(a), np.abs(b))
    sign = np.where((a >= 0) == (b >= 0), 1.0, -1.0)
    out = (sign * mag
           + np.log1p(np.exp(-np.abs(a + b)))
           - np.log1p(np.exp(-np.abs(a - b))))
    return out if out.ndim else float(out)


def boxplus_many(values) -> float:
    """Left fold of boxplus over a 1-D array (empty fold = certainty of 0)."""
    return float(_kernels.boxplus_fold(
        np.ascontiguousarray(values, dtype=np.float64)
    ))


def bcjr(
    trellis: Trellis,
    chan_llr,
    apriori_llr,
    termination: str = TERMINATED,
    want_coded: bool = False,
) -> SisoResult:
    """Exact log-MAP (BCJR) pass over the trellis.

    chan_llr carries one LLR per coded bit, apriori_llr one per input bit
    (tail steps included, normally 0 there).  Terminated mode pins both
    boundary states to 0; truncated mode leaves the final state free.
    """
    if termination not in (TERMINATED, TRUNCATED):
        raise ValueError(f"unknown termination mode {termination!r}")
    chan = np.ascontiguousarray(chan_llr, dtype=np.float64)
    apri = np.ascontiguousarray(apriori_llr, dtype=np.float64)
    n_out = trellis.outputs_per_step
    if chan.size != apri.size * n_out:
        raise ValueError(
            f"channel length {chan.size} != {n_out} x {apri.size} steps"
        )
    if apri.size == 0:
        raise ValueError("empty input")
    app_info, app_coded = _kernels.bcjr_core(
        trellis.next_state,
        trellis.output_bits,
        chan,
        apri,
        termination == TERMINATED,
        want_coded,
    )
    ext_coded = clip_llrs(app_coded - chan) if want_coded else None
    return SisoResult(
        app_info=clip_llrs(app_info),
        ext_info=clip_llrs(app_info - apri),
        ext_coded=ext_coded,
    )


def spc_parity_priors(member_llrs, group_size: int) -> np.ndarray:
    """Prior on each group's parity bit: boxplus over its J members."""
    member_llrs = np.ascontiguousarray(member_llrs, dtype=np.float64)
    if member_llrs.size % group_size:
        raise ValueError("length not divisible by group size")
    return clip_llrs(_kernels.spc_group_priors(member_llrs, group_size))


def spc_siso(apriori_members, ext_parity, group_size: int) -> np.ndarray:
    """Redistribute parity-bit extrinsics to the group members.

    Member j of group m receives boxplus(ext_parity[m], boxplus of the
    other J-1 members' priors) - the check-node extrinsic.
    """
    members = np.ascontiguousarray(apriori_members, dtype=np.float64)
    parity = np.ascontiguousarray(ext_parity, dtype=np.float64)
    if members.size % group_size:
        raise ValueError("member length not divisible by group size")
    if parity.size * group_size != members.size:
        raise ValueError("one parity extrinsic required per group")
    return clip_llrs(
        _kernels.spc_member_extrinsics(members, parity, group_size)
    )


def inner_decode(
    strategy: StrategyConfig,
    relay_chan,
    apriori_xtilde,
) -> np.ndarray:
    """One inner SISO pass; returns the extrinsic on the interleaved
    codeword estimate.

    Strategy A: boxplus-group the priors, run the inner BCJR on the parity
    bits, redistribute through the parity groups.  Strategy B: de-puncture
    the relay evidence and run the inner BCJR directly.
    """
    inner = strategy.inner_trellis
    apri = np.ascontiguousarray(apriori_xtilde, dtype=np.float64)
    relay_chan = np.ascontiguousarray(relay_chan, dtype=np.float64)
    n = apri.size
    if strategy.variant == STRATEGY_A:
        group = strategy.j
        if n % group:
            raise ValueError("group size must divide the interleaved length")
        steps = n // group
        if relay_chan.size != steps * inner.outputs_per_step:
            raise ValueError(
                f"relay evidence length {relay_chan.size} != "
                f"{steps * inner.outputs_per_step}"
            )
        parity_priors = spc_parity_priors(apri, group)
        res = bcjr(inner, relay_chan, parity_priors, termination=TRUNCATED)
        return spc_siso(apri, res.ext_info, group)
    full_len = n * inner.outputs_per_step
    full = depuncture_llrs(relay_chan, full_len, strategy.rho)
    res = bcjr(inner, full, apri, termination=TRUNCATED)
    return res.ext_info


def outer_decode(
    source_specs: list[GeneratorSpec],
    source_chan: list[np.ndarray],
    apriori_from_inner,
    termination: str = TERMINATED,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """One pass over all source decoders.

    apriori_from_inner is the de-interleaved extrinsic on the whole
    concatenated codeword; it is split per source segment and combined
    with that source's own channel LLRs.  Returns the concatenated
    coded-bit extrinsic (for re-interleaving toward the inner decoder) and
    the per-source information-bit a-posteriori LLRs.
    """
    if len(source_specs) != len(source_chan):
        raise ValueError("one channel LLR vector required per source")
    apri = np.ascontiguousarray(apriori_from_inner, dtype=np.float64)
    total = sum(np.asarray(c).size for c in source_chan)
    if apri.size != total:
        raise ValueError(
            f"inner a-priori length {apri.size} != concatenated length {total}"
        )
    ext_segments = []
    app_infos = []
    offset = 0
    for spec, chan in zip(source_specs, source_chan):
        tr = build_trellis(spec)
        chan = np.ascontiguousarray(chan, dtype=np.float64)
        if chan.size % tr.outputs_per_step:
            raise ValueError("segment length not a whole number of steps")
        steps = chan.size // tr.outputs_per_step
        seg = apri[offset:offset + chan.size]
        offset += chan.size
        res = bcjr(tr, chan + seg, np.zeros(steps), termination,
                   want_coded=True)
        # app_coded - seg: the source channel evidence stays in the message
        ext_segments.append(clip_llrs(res.ext_coded + chan))
        tail = spec.memory if termination == TERMINATED else 0
        app_infos.append(res.app_info[:steps - tail])
    return np.concatenate(ext_segments), app_infos
