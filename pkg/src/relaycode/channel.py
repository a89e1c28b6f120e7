"""BPSK links: path-loss geometry, per-link SNR derivation, AWGN and fast
Rayleigh fading with perfect CSI, and coherent channel LLRs.

Energy convention: E_b is the energy of each transmitted coded bit
(E_b = E_s = 1), so sigma^2 = 1 / (2 * 10^(gamma/10)).  Pass ``rate`` to
transmit() to switch to per-information-bit energy accounting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .siso import clip_llrs

AWGN = "awgn"
RAYLEIGH = "rayleigh"
_MODEL_ALIASES = {
    "awgn": AWGN,
    "rayleigh": RAYLEIGH,
    "fast-rayleigh": RAYLEIGH,
}


def canonical_model(name: str) -> str:
    try:
        return _MODEL_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown channel model {name!r}") from None


@dataclass(frozen=True)
class NetworkGeometry:
    """Distance ratios relative to the source-destination distance, plus
    the path-loss exponent."""

    dsr_ratio: float = 0.25
    drd_ratio: float = 0.75
    path_loss_exponent: float = 3.52

    def __post_init__(self):
        if not (0 < self.dsr_ratio <= 1) or not (0 < self.drd_ratio <= 1):
            raise ValueError("distance ratios must lie in (0, 1]")
        if not (2 <= self.path_loss_exponent <= 6):
            raise ValueError("path-loss exponent must lie in [2, 6]")


@dataclass(frozen=True)
class SnrTriple:
    gamma_sd_db: float
    gamma_sr_db: float
    gamma_rd_db: float


@dataclass(frozen=True)
class ChannelOutput:
    observations: np.ndarray
    fading: np.ndarray
    noise_variance: float


def compute_gains(geometry: NetworkGeometry) -> tuple[float, float]:
    """Path-loss gains (dB) of the source-relay and relay-destination
    links relative to the direct link: g = 10 n log10(d_sd / d_xx)."""
    n = geometry.path_loss_exponent
    g_sr = 10.0 * n * np.log10(1.0 / geometry.dsr_ratio)
    g_rd = 10.0 * n * np.log10(1.0 / geometry.drd_ratio)
    return float(g_sr), float(g_rd)


def derive_snrs(gamma_sd_db: float, geometry: NetworkGeometry) -> SnrTriple:
    g_sr, g_rd = compute_gains(geometry)
    return SnrTriple(
        gamma_sd_db=float(gamma_sd_db),
        gamma_sr_db=float(gamma_sd_db) + g_sr,
        gamma_rd_db=float(gamma_sd_db) + g_rd,
    )


def noise_variance(gamma_db: float, rate: float = 1.0) -> float:
    """Per-sample noise variance sigma^2 = N_0/2 for unit symbol energy."""
    return 1.0 / (2.0 * rate * 10.0 ** (gamma_db / 10.0))


def transmit(
    bits,
    gamma_db: float,
    model: str,
    rng: np.random.Generator,
    rate: float = 1.0,
) -> ChannelOutput:
    """BPSK-modulate (0 -> +1, 1 -> -1) and push through one orthogonal
    link.  Fast Rayleigh draws an i.i.d. amplitude per symbol with
    E[h^2] = 1, known to the receiver."""
    bits = np.asarray(bits)
    model = canonical_model(model)
    sigma2 = noise_variance(gamma_db, rate)
    x = 1.0 - 2.0 * bits.astype(np.float64)
    if model == RAYLEIGH:
        h = rng.rayleigh(scale=np.sqrt(0.5), size=bits.size)
    else:
        h = np.ones(bits.size)
    y = h * x + np.sqrt(sigma2) * rng.standard_normal(bits.size)
    return ChannelOutput(observations=y, fading=h, noise_variance=sigma2)


def channel_llr(out: ChannelOutput) -> np.ndarray:
    """Coherent LLR 2 h y / sigma^2 under L = ln P(0)/P(1)."""
    return clip_llrs(2.0 * out.fading * out.observations
                     / out.noise_variance)


def ber_bpsk_awgn(gamma_db: float) -> float:
    """Uncoded BPSK bit error probability over AWGN: Q(sqrt(2 Eb/N0))."""
    g = 10.0 ** (gamma_db / 10.0)
    return float(0.5 * erfc(np.sqrt(g)))


def ber_bpsk_rayleigh(gamma_db: float) -> float:
    """Uncoded coherent BPSK over fast Rayleigh fading:
    (1/2)(1 - sqrt(g/(1+g)))."""
    g = 10.0 ** (gamma_db / 10.0)
    return float(0.5 * (1.0 - np.sqrt(g / (1.0 + g))))
