"""Relay-side processing: per-source decode-and-re-encode, concatenation,
S-random interleaving and the two redundancy-generation strategies
(parity grouping with group size J, or rate-1 encoding followed by a
regular puncturer with permeability rho)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .trellis import (
    TERMINATED,
    TRUNCATED,
    GeneratorSpec,
    Trellis,
    build_trellis,
    encode,
    num_steps,
)

STRATEGY_A = "A"
STRATEGY_B = "B"


class InterleaverConstructionError(RuntimeError):
    """Spread constraint could not be met; lower S."""


@dataclass(frozen=True)
class StrategyConfig:
    """Relay encoding strategy plus the constituent encoder specs.

    Variant A groups the interleaved bits into groups of ``j`` and forwards
    their parities through the inner encoder; variant B encodes everything
    with the inner encoder and keeps a ``rho`` fraction of its output.
    """

    variant: str
    inner_spec: GeneratorSpec
    source_specs: tuple[GeneratorSpec, ...]
    j: int | None = None
    rho: Fraction | None = None
    source_termination: str = TERMINATED

    def __post_init__(self):
        if self.variant == STRATEGY_A:
            if self.j is None or self.j < 1:
                raise ValueError("variant A requires group size j >= 1")
        elif self.variant == STRATEGY_B:
            if self.rho is None or not (0 < self.rho <= 1):
                raise ValueError("variant B requires permeability 0 < rho <= 1")
            object.__setattr__(self, "rho", Fraction(self.rho))
        else:
            raise ValueError(f"unknown strategy variant {self.variant!r}")
        if self.source_termination not in (TERMINATED, TRUNCATED):
            raise ValueError(f"bad termination {self.source_termination!r}")

    @property
    def inner_trellis(self) -> Trellis:
        return build_trellis(self.inner_spec)

    def source_trellises(self) -> list[Trellis]:
        return [build_trellis(s) for s in self.source_specs]


@dataclass(frozen=True)
class Permutation:
    """Bijection on 0..N-1 with a verified spread property.

    forward[i] is the output position of input index i; inputs closer than
    ``spread`` land more than ``spread`` apart.
    """

    forward: np.ndarray
    spread: int
    seed: int

    def __post_init__(self):
        self.forward.setflags(write=False)

    def __len__(self) -> int:
        return self.forward.size

    def interleave(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.size != self.forward.size:
            raise ValueError("length mismatch with permutation")
        out = np.empty_like(x)
        out[self.forward] = x
        return out

    def deinterleave(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y)
        if y.size != self.forward.size:
            raise ValueError("length mismatch with permutation")
        return y[self.forward]

    def save(self, path) -> None:
        Path(path).write_text(
            "\n".join(str(int(v)) for v in self.forward) + "\n"
        )

    @classmethod
    def load(cls, path, spread: int = 0, seed: int = 0) -> "Permutation":
        values = [int(line) for line in Path(path).read_text().split()]
        forward = np.asarray(values, dtype=np.int64)
        if sorted(values) != list(range(len(values))):
            raise ValueError(f"{path} does not hold a permutation")
        return cls(forward=forward, spread=spread, seed=seed)


def verify_spread(forward: np.ndarray, spread: int) -> bool:
    """Exhaustive pairwise check of the spread property."""
    n = forward.size
    for i in range(n):
        for j in range(i + 1, min(i + spread + 1, n)):
            if abs(int(forward[i]) - int(forward[j])) <= spread:
                return False
    return True


def default_spread(n: int) -> int:
    return int(np.floor(np.sqrt(n / 2)))


def _fits(out, position, value, spread, upto) -> bool:
    lo = max(0, position - spread)
    hi = min(upto, position + spread + 1)
    for j in range(lo, hi):
        if j != position and abs(int(out[j]) - value) <= spread:
            return False
    return True


def _swap_repair(out, i, pool, spread, rng) -> int | None:
    """Dead-end escape: move some leftover candidate to an earlier
    position j and bring that position's value forward to slot i.  Only
    positions outside slot i's window are considered, so both checks stay
    local.  Returns the pool index consumed, or None."""
    positions = rng.permutation(max(0, i - spread))
    for idx, cand in enumerate(pool):
        for j in positions:
            value = int(out[j])
            if not _fits(out, i, value, spread, i):
                continue
            if _fits(out, j, int(cand), spread, i):
                out[i] = value
                out[j] = cand
                return idx
    return None


def make_s_random_interleaver(
    n: int, spread: int, seed: int, max_restarts: int = 100
) -> Permutation:
    """Rejection-based spread-constrained permutation of size n.

    Greedy placement from a shuffled candidate pool; dead ends are escaped
    by swap repair against earlier positions, with full restarts as a
    fallback.  Deterministic given (n, spread, seed).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if spread < 0:
        raise ValueError("spread must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence([n, spread, seed]))
    for _ in range(max_restarts):
        pool = list(rng.permutation(n))
        out = np.empty(n, dtype=np.int64)
        failed = False
        for i in range(n):
            window = out[max(0, i - spread):i]
            placed = False
            for idx, cand in enumerate(pool):
                if spread == 0 or np.all(np.abs(window - cand) > spread):
                    out[i] = cand
                    pool.pop(idx)
                    placed = True
                    break
            if not placed:
                idx = _swap_repair(out, i, pool, spread, rng)
                if idx is None:
                    failed = True
                    break
                pool.pop(idx)
        if not failed:
            if not verify_spread(out, spread):
                raise AssertionError("spread verification failed")
            return Permutation(forward=out, spread=spread, seed=seed)
    raise InterleaverConstructionError(
        f"no spread-{spread} permutation of size {n} found in "
        f"{max_restarts} attempts; lower the spread"
    )


def spc_encode(bits, group_size: int) -> np.ndarray:
    """Modulo-2 sum of every group of ``group_size`` consecutive bits."""
    bits = np.asarray(bits, dtype=np.int8)
    if group_size < 1:
        raise ValueError("group size must be >= 1")
    if bits.size % group_size:
        raise ValueError(
            f"length {bits.size} not divisible by group size {group_size}"
        )
    return np.bitwise_xor.reduce(bits.reshape(-1, group_size), axis=1)


def survivor_positions(n: int, rho) -> np.ndarray:
    """Indices kept by the regular puncturer.

    For rho = 1/g this keeps the last bit of every group of g consecutive
    bits; general rationals spread survivors as evenly as possible.
    """
    rho = Fraction(rho)
    if not (0 < rho <= 1):
        raise ValueError("rho must be in (0, 1]")
    if (n * rho).denominator != 1:
        raise ValueError(f"rho * n = {rho} * {n} is not an integer")
    t = np.arange(n, dtype=np.int64)
    p, q = rho.numerator, rho.denominator
    keep = ((t + 1) * p) // q > (t * p) // q
    return np.nonzero(keep)[0]


def puncture(bits, rho) -> np.ndarray:
    bits = np.asarray(bits)
    return bits[survivor_positions(bits.size, rho)]


def depuncture_llrs(llrs, full_length: int, rho) -> np.ndarray:
    """Inverse of :func:`puncture` for soft values: punctured positions get
    LLR 0 (no evidence)."""
    llrs = np.asarray(llrs, dtype=np.float64)
    pos = survivor_positions(full_length, rho)
    if llrs.size != pos.size:
        raise ValueError(
            f"{llrs.size} survivors given, pattern expects {pos.size}"
        )
    full = np.zeros(full_length)
    full[pos] = llrs
    return full


def relay_transmit_length(config: StrategyConfig, concat_length: int) -> int:
    """Length of the relay's transmit word for a concatenation of
    ``concat_length`` bits."""
    inner = config.inner_trellis
    if config.variant == STRATEGY_A:
        if concat_length % config.j:
            raise ValueError("group size must divide the concatenated length")
        return (concat_length // config.j) * inner.outputs_per_step
    coded = concat_length * inner.outputs_per_step
    return int(coded * config.rho)


def encode_relay_word(config: StrategyConfig, xtilde: np.ndarray) -> np.ndarray:
    """Deterministic strategy chain applied to the interleaved codeword
    estimate (parity grouping + inner encoding, or inner encoding +
    puncturing)."""
    inner = config.inner_trellis
    if config.variant == STRATEGY_A:
        grouped = spc_encode(xtilde, config.j)
        return encode(inner, grouped, termination=TRUNCATED)
    coded = encode(inner, np.asarray(xtilde, dtype=np.int8),
                   termination=TRUNCATED)
    return puncture(coded, config.rho)


def relay_process(
    received_per_source: list[np.ndarray],
    config: StrategyConfig,
    perm: Permutation,
) -> np.ndarray:
    """Decode every source, re-encode the hard decisions into codeword
    estimates, concatenate, interleave and run the strategy chain.

    Re-encoding guarantees each estimate is a valid codeword of its source
    code even when the relay decodes in error.
    """
    from .siso import bcjr  # deferred: siso depends on this module

    if len(received_per_source) != len(config.source_specs):
        raise ValueError("one received LLR vector required per source")
    estimates = []
    for chan, spec in zip(received_per_source, config.source_specs):
        tr = build_trellis(spec)
        chan = np.asarray(chan, dtype=np.float64)
        if chan.size % tr.outputs_per_step:
            raise ValueError("received length not a whole number of steps")
        steps = chan.size // tr.outputs_per_step
        tail = spec.memory if config.source_termination == TERMINATED else 0
        k = steps - tail
        if k < 1:
            raise ValueError("received word too short for this code")
        result = bcjr(tr, chan, np.zeros(steps), config.source_termination)
        u_hat = (result.app_info[:k] < 0).astype(np.int8)
        estimates.append(encode(tr, u_hat, config.source_termination))
    concat = np.concatenate(estimates)
    if concat.size != len(perm):
        raise ValueError(
            f"concatenated length {concat.size} != permutation size {len(perm)}"
        )
    return encode_relay_word(config, perm.interleave(concat))


def effective_rate(q: int, k: int, config: StrategyConfig) -> Fraction:
    """Overall system rate K/N' using nominal (untailed) lengths."""
    if q < 1 or k < 1:
        raise ValueError("q and k must be positive")
    if len(config.source_specs) not in (1, q):
        raise ValueError("config must carry one spec, or one per source")
    specs = (config.source_specs * q if len(config.source_specs) == 1
             else config.source_specs)
    total_k = q * k
    n_concat = sum(k * s.outputs_per_step for s in specs)
    r_inner = config.inner_spec.nominal_rate
    if config.variant == STRATEGY_A:
        n_relay = Fraction(n_concat, config.j) / r_inner
    else:
        n_relay = Fraction(n_concat) * config.rho / r_inner
    if n_relay.denominator != 1:
        raise ValueError("relay word length is not an integer")
    return Fraction(total_k, n_concat + n_relay)


def exact_rate(q: int, k: int, config: StrategyConfig) -> Fraction:
    """Overall rate including termination tails (the bits actually sent)."""
    specs = (config.source_specs * q if len(config.source_specs) == 1
             else config.source_specs)
    n_concat = 0
    for s in specs:
        tr = build_trellis(s)
        n_concat += tr.outputs_per_step * num_steps(
            tr, k, config.source_termination
        )
    n_relay = relay_transmit_length(config, n_concat)
    return Fraction(q * k, n_concat + n_relay)
