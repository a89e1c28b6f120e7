"""Binary convolutional code machinery.

Generator polynomials are octal-coded, MSB-first: the most significant bit
of the (memory+1)-bit field is the tap on the current input, the least
significant bit the tap on the oldest delay element.  Worked example for
the classical memory-2 code (5, 7):

    5 = 101 -> 1 + D^2          7 = 111 -> 1 + D + D^2

so input 1,0,0,0 produces output pairs (1,1),(0,1),(1,1),(0,0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

TERMINATED = "terminated"
TRUNCATED = "truncated"


class GeneratorSpecError(ValueError):
    """Malformed generator specification."""


@dataclass(frozen=True)
class GeneratorSpec:
    """Convolutional encoder description.

    feedforward_polys are the octal numerator polynomials (one per output
    bit); feedback_poly, when present, makes the encoder recursive.  For a
    systematic encoder the input bit itself is emitted first, before the
    outputs of feedforward_polys.
    """

    feedforward_polys: tuple[int, ...]
    feedback_poly: int | None = None
    systematic: bool = False
    memory: int = field(init=False, default=0)

    def __post_init__(self):
        if not self.feedforward_polys and not self.systematic:
            raise GeneratorSpecError("encoder needs at least one output")
        polys = list(self.feedforward_polys)
        if self.feedback_poly is not None:
            polys.append(self.feedback_poly)
        for p in polys:
            if p <= 0:
                raise GeneratorSpecError(f"zero or negative polynomial: {p}")
        memory = max(p.bit_length() for p in polys) - 1
        if self.feedback_poly is not None:
            # MSB-first: the degree-0 tap is the top bit of the field.
            if not (self.feedback_poly >> memory) & 1:
                raise GeneratorSpecError(
                    "feedback polynomial must have a degree-0 tap"
                )
        object.__setattr__(self, "memory", memory)

    @property
    def outputs_per_step(self) -> int:
        return len(self.feedforward_polys) + (1 if self.systematic else 0)

    @property
    def nominal_rate(self):
        from fractions import Fraction

        return Fraction(1, self.outputs_per_step)

    def taps(self, poly: int) -> np.ndarray:
        """Coefficients (c_0 .. c_memory) of ``poly`` under the MSB-first
        convention, c_j multiplying D^j."""
        width = self.memory + 1
        return np.array(
            [(poly >> (width - 1 - j)) & 1 for j in range(width)], dtype=np.int8
        )


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse strings like ``"1,5/7"`` (systematic recursive), ``"5,7"``
    (feedforward) or ``"5/7"`` (rate-1 recursive).

    The comma-separated numerator list precedes the optional ``/feedback``
    part; a leading ``1`` numerator together with feedback denotes the
    systematic branch.
    """
    text = text.strip()
    if not text:
        raise GeneratorSpecError("empty generator spec")
    if "/" in text:
        num_part, _, fb_part = text.partition("/")
        try:
            feedback = int(fb_part.strip(), 8)
        except ValueError as exc:
            raise GeneratorSpecError(f"bad octal feedback {fb_part!r}") from exc
    else:
        num_part, feedback = text, None
    nums = []
    for tok in num_part.split(","):
        tok = tok.strip()
        try:
            nums.append(int(tok, 8))
        except ValueError as exc:
            raise GeneratorSpecError(f"bad octal polynomial {tok!r}") from exc
    systematic = False
    if feedback is not None and len(nums) >= 1 and nums[0] == 1:
        # "1,5/7": leading unit numerator is the systematic branch.
        systematic = len(nums) > 1
        if systematic:
            nums = nums[1:]
    return GeneratorSpec(
        feedforward_polys=tuple(nums),
        feedback_poly=feedback,
        systematic=systematic,
    )


@dataclass(frozen=True)
class Trellis:
    """Controller-canonical state-transition graph of a GeneratorSpec.

    next_state[s, u] and output_bits[s, u, :] describe the branch taken
    from state ``s`` on input bit ``u``; term_input[s] is the input that
    steers the feedback register one step toward state 0.  Arrays are
    frozen after construction and safe to share across workers.
    """

    spec: GeneratorSpec
    num_states: int
    outputs_per_step: int
    next_state: np.ndarray
    output_bits: np.ndarray
    term_input: np.ndarray

    def __post_init__(self):
        self.next_state.setflags(write=False)
        self.output_bits.setflags(write=False)
        self.term_input.setflags(write=False)


@lru_cache(maxsize=None)
def build_trellis(spec: GeneratorSpec) -> Trellis:
    """Build the trellis realizing ``spec`` in controller canonical form.

    State bit j-1 (LSB first) holds the content of the j-th delay element,
    so state 0 is the all-zero register.
    """
    m = spec.memory
    num_states = 1 << m
    n_out = spec.outputs_per_step
    numerators = [spec.taps(p) for p in spec.feedforward_polys]
    fb = spec.taps(spec.feedback_poly) if spec.feedback_poly is not None else None

    next_state = np.zeros((num_states, 2), dtype=np.int64)
    output_bits = np.zeros((num_states, 2, n_out), dtype=np.int8)
    term_input = np.zeros(num_states, dtype=np.int8)

    for s in range(num_states):
        reg = [(s >> j) & 1 for j in range(m)]  # reg[0] newest
        fb_sum = 0
        if fb is not None:
            fb_sum = int(np.bitwise_xor.reduce(
                [fb[j + 1] & reg[j] for j in range(m)] or [0]
            ))
        term_input[s] = fb_sum if fb is not None else 0
        for u in (0, 1):
            w = u ^ fb_sum if fb is not None else u
            outs = []
            if spec.systematic:
                outs.append(u)
            for taps in numerators:
                y = taps[0] & w
                for j in range(m):
                    y ^= taps[j + 1] & reg[j]
                outs.append(int(y))
            output_bits[s, u, :] = outs
            next_state[s, u] = ((s << 1) | w) & (num_states - 1)

    return Trellis(
        spec=spec,
        num_states=num_states,
        outputs_per_step=n_out,
        next_state=next_state,
        output_bits=output_bits,
        term_input=term_input,
    )


def _as_bits(info) -> np.ndarray:
    bits = np.asarray(info, dtype=np.int8)
    if bits.ndim != 1 or bits.size < 1:
        raise ValueError("info must be a nonempty 1-D bit sequence")
    return bits


def encode(trellis: Trellis, info, termination: str = TERMINATED) -> np.ndarray:
    """Encode a bit sequence by walking the trellis.

    Terminated mode appends ``memory`` tail steps (tail inputs chosen
    through the feedback so the final state is 0); truncated mode stops at
    the last information bit.  Output length is outputs_per_step times the
    number of steps.
    """
    bits = _as_bits(info)
    if termination not in (TERMINATED, TRUNCATED):
        raise ValueError(f"unknown termination mode {termination!r}")
    n_out = trellis.outputs_per_step
    m = trellis.spec.memory
    tail = m if termination == TERMINATED else 0
    out = np.zeros((bits.size + tail) * n_out, dtype=np.int8)
    s = 0
    for t, u in enumerate(bits):
        out[t * n_out:(t + 1) * n_out] = trellis.output_bits[s, u]
        s = trellis.next_state[s, u]
    for j in range(tail):
        u = int(trellis.term_input[s])
        t = bits.size + j
        out[t * n_out:(t + 1) * n_out] = trellis.output_bits[s, u]
        s = trellis.next_state[s, u]
    if termination == TERMINATED and s != 0:
        raise AssertionError("termination failed to reach state 0")
    return out


def encode_rate1(trellis: Trellis, bits) -> np.ndarray:
    """Stream-style (truncated) encoding with a rate-1 trellis."""
    if trellis.outputs_per_step != 1:
        raise ValueError("encode_rate1 requires a rate-1 trellis")
    return encode(trellis, bits, termination=TRUNCATED)


def num_steps(trellis: Trellis, num_info_bits: int, termination: str) -> int:
    """Trellis steps taken when encoding ``num_info_bits`` bits."""
    tail = trellis.spec.memory if termination == TERMINATED else 0
    return num_info_bits + tail


def codeword_length(trellis: Trellis, num_info_bits: int, termination: str) -> int:
    return trellis.outputs_per_step * num_steps(trellis, num_info_bits, termination)
