"""Coded cooperation for multi-source relay networks: distributed
serially concatenated coding with iterative decoding."""

from .channel import (
    AWGN,
    RAYLEIGH,
    ChannelOutput,
    NetworkGeometry,
    SnrTriple,
    ber_bpsk_awgn,
    ber_bpsk_rayleigh,
    channel_llr,
    compute_gains,
    derive_snrs,
    transmit,
)
from .decoder import DecodeConfig, DecodeOutcome, decode
from .exit import (
    ExitCurve,
    exit_curve_inner,
    exit_curve_outer,
    find_threshold,
    gaussian_apriori,
    j_function,
    j_inverse,
    measure_mi,
    tunnel_open,
)
from .limits import (
    RateAllocation,
    achievable_rate_2user,
    achievable_rate_multiuser,
    bpsk_capacity,
    capacity_threshold,
    decodable,
    threshold_table,
)
from .relay import (
    InterleaverConstructionError,
    Permutation,
    StrategyConfig,
    effective_rate,
    encode_relay_word,
    make_s_random_interleaver,
    puncture,
    relay_process,
    spc_encode,
)
from .simulate import (
    ExperimentConfig,
    FerRecord,
    emit_results,
    parse_results,
    run_fer,
    run_noncoop_baseline,
)
from .siso import (
    LLR_MAX,
    SisoResult,
    bcjr,
    boxplus,
    boxplus_many,
    inner_decode,
    outer_decode,
    spc_parity_priors,
    spc_siso,
)
from .trellis import (
    TERMINATED,
    TRUNCATED,
    GeneratorSpec,
    Trellis,
    build_trellis,
    encode,
    encode_rate1,
    parse_generator_spec,
)

__version__ = "0.1.0"
