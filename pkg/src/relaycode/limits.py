"""Information-theoretic limits: BPSK-constrained capacities, the
decode-and-forward decodability inequalities, achievable rates and the
capacity-threshold search for the symmetric multi-source relay network.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import (
    AWGN,
    RAYLEIGH,
    NetworkGeometry,
    SnrTriple,
    canonical_model,
    derive_snrs,
)

# Gauss-Hermite nodes: E[g(Z)] for Z ~ N(0,1); Gauss-Laguerre nodes:
# E[g(T)] for T ~ Exp(1).  Both cached at module import.
_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(96)
_GL_NODES, _GL_WEIGHTS = np.polynomial.laguerre.laggauss(96)

#: Constraint handling for the threshold search (see capacity_threshold).
SUM_CONSTRAINED = "sum"
PER_USER = "per-user"

#: Energy accounting for capacity arguments.  "coded": gamma is Es/N0 of
#: each transmitted symbol (the simulator's convention).  "info": gamma is
#: Eb/N0 per information bit, so Es/N0 = R_eff * gamma; the published
#: threshold table follows this convention.
ENERGY_CODED = "coded"
ENERGY_INFO = "info"


def _awgn_bpsk_capacity_linear(es_n0: float) -> float:
    """BPSK-input AWGN capacity (bits/use) at linear SNR Es/N0."""
    if es_n0 <= 0.0:
        return 0.0
    if not np.isfinite(es_n0):
        return 1.0
    # C = 1 - E[log2(1 + exp(-L))], L = 2(1 + sigma Z)/sigma^2, Z ~ N(0,1)
    sigma2 = 1.0 / (2.0 * es_n0)
    sigma = np.sqrt(sigma2)
    z = np.sqrt(2.0) * _GH_NODES
    llr = 2.0 * (1.0 + sigma * z) / sigma2
    integrand = np.log1p(np.exp(-np.abs(llr))) + np.maximum(-llr, 0.0)
    expectation = float(np.dot(_GH_WEIGHTS, integrand)) / np.sqrt(np.pi)
    return float(np.clip(1.0 - expectation / np.log(2.0), 0.0, 1.0))


def _rayleigh_bpsk_capacity_linear(es_n0: float) -> float:
    """Ergodic BPSK capacity over fast Rayleigh fading with perfect CSI:
    the h^2 ~ Exp(1) expectation of the conditional AWGN capacity."""
    if es_n0 <= 0.0:
        return 0.0
    if not np.isfinite(es_n0):
        return 1.0
    values = np.array(
        [_awgn_bpsk_capacity_linear(t * es_n0) for t in _GL_NODES]
    )
    return float(np.clip(np.dot(_GL_WEIGHTS, values), 0.0, 1.0))


@lru_cache(maxsize=None)
def _capacity_cached(gamma_db: float, model: str) -> float:
    es_n0 = np.inf if gamma_db == np.inf else 10.0 ** (gamma_db / 10.0)
    if model == AWGN:
        return _awgn_bpsk_capacity_linear(es_n0)
    return _rayleigh_bpsk_capacity_linear(es_n0)


def bpsk_capacity(gamma_db: float, model: str = RAYLEIGH) -> float:
    """BPSK-input capacity in bits per channel use at Es/N0 = gamma (dB)."""
    if gamma_db == -np.inf:
        return 0.0
    return _capacity_cached(float(gamma_db), canonical_model(model))


@dataclass(frozen=True)
class RateAllocation:
    """Per-node time fractions (theta_1..theta_q, theta_r) and the rate
    ratio sigma between the two users."""

    theta: tuple[float, ...]
    sigma: float = 1.0

    def __post_init__(self):
        if any(t < 0 for t in self.theta):
            raise ValueError("time fractions must be nonnegative")
        if abs(sum(self.theta) - 1.0) > 1e-12:
            raise ValueError("time fractions must sum to 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


def decodable(
    k: tuple[int, int],
    n: tuple[int, int],
    n_relay: int,
    cap_s1r: float,
    cap_s2r: float,
    cap_s1d: float,
    cap_s2d: float,
    cap_rd: float,
) -> bool:
    """The five reliability inequalities for the two-user relay network
    (non-strict, exactly as stated)."""
    k1, k2 = k
    n1, n2 = n
    if min(k1, k2, n1, n2) <= 0 or n_relay < 0:
        raise ValueError("lengths must be positive")
    return (
        k1 <= n1 * cap_s1r
        and k2 <= n2 * cap_s2r
        and k1 <= n1 * cap_s1d + n_relay * cap_rd
        and k2 <= n2 * cap_s2d + n_relay * cap_rd
        and k1 + k2 <= n1 * cap_s1d + n2 * cap_s2d + n_relay * cap_rd
    )


def achievable_rate_2user(
    alloc: RateAllocation,
    snrs: SnrTriple,
    model: str = RAYLEIGH,
) -> float:
    """Achievable rate R'_1 for the two-user network: the five-term
    minimum over the decodability constraints with sigma = R'_2/R'_1.

    The last (sum-rate) constraint bounds (1 + sigma) R'_1, so it enters
    the minimum divided by (1 + sigma).
    """
    if len(alloc.theta) != 3:
        raise ValueError("two-user allocation needs (theta_1, theta_2, theta_r)")
    t1, t2, tr = alloc.theta
    s = alloc.sigma
    c_sr = bpsk_capacity(snrs.gamma_sr_db, model)
    c_sd = bpsk_capacity(snrs.gamma_sd_db, model)
    c_rd = bpsk_capacity(snrs.gamma_rd_db, model)
    return min(
        t1 * c_sr,
        t2 * c_sr / s,
        t1 * c_sd + tr * c_rd,
        (t2 * c_sd + tr * c_rd) / s,
        (t1 * c_sd + t2 * c_sd + tr * c_rd) / (1.0 + s),
    )


def achievable_rate_multiuser(
    q: int,
    gamma_sd_db: float,
    geometry: NetworkGeometry,
    model: str = RAYLEIGH,
    constraint: str = PER_USER,
    energy: str = ENERGY_CODED,
) -> float:
    """Per-user achievable rate R'_i with equal time allocation
    theta_i = theta_r = 1/(q+1).

    constraint="per-user" evaluates the published closed form
    C(gamma_sd)/(q+1) + C(gamma_rd)/(2(q+1)) for every user.  Its relay
    terms summed over users exceed the relay's time share for q > 2, so
    constraint="sum" additionally enforces the sum-rate inequality
    (q R'_i <= [q C(gamma_sd) + C(gamma_rd)]/(q+1)) together with the
    per-user and relay-decoding constraints.

    energy="info" rescales every link SNR by the system rate q/(2(q+1))
    before evaluating capacities (Eb per information bit).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    shift = _energy_shift_db(q, energy)
    snrs = derive_snrs(gamma_sd_db + shift, geometry)
    c_sd = bpsk_capacity(snrs.gamma_sd_db, model)
    c_rd = bpsk_capacity(snrs.gamma_rd_db, model)
    per_user = c_sd / (q + 1) + c_rd / (2 * (q + 1))
    if constraint == PER_USER:
        return per_user
    if constraint != SUM_CONSTRAINED:
        raise ValueError(f"unknown constraint mode {constraint!r}")
    c_sr = bpsk_capacity(snrs.gamma_sr_db, model)
    relay_limit = c_sr / (q + 1)
    direct_plus_relay = (c_sd + c_rd) / (q + 1)
    sum_limit = (q * c_sd + c_rd) / (q * (q + 1))
    return min(per_user, relay_limit, direct_plus_relay, sum_limit)


def _energy_shift_db(q: int, energy: str) -> float:
    if energy == ENERGY_CODED:
        return 0.0
    if energy == ENERGY_INFO:
        r_eff = q / (2.0 * (q + 1.0))
        return 10.0 * np.log10(r_eff)
    raise ValueError(f"unknown energy mode {energy!r}")


def capacity_threshold(
    q: int,
    geometry: NetworkGeometry | None = None,
    model: str = RAYLEIGH,
    constraint: str = SUM_CONSTRAINED,
    energy: str = ENERGY_INFO,
    resolution_db: float = 0.001,
    bracket: tuple[float, float] = (-20.0, 20.0),
) -> float:
    """Smallest gamma_sd (dB) at which the system sum rate reaches
    R_eff = q / (2(q+1)); bisection over the monotone rate function.

    Defaults (sum-rate constraint, per-information-bit energy) reproduce
    the published capacity-threshold column; the per-user form without the
    sum constraint is q-independent at this target and is exposed for
    comparison.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    geometry = geometry or NetworkGeometry()
    target = q / (2.0 * (q + 1.0))

    def sum_rate(gamma_db: float) -> float:
        return q * achievable_rate_multiuser(
            q, gamma_db, geometry, model, constraint, energy
        )

    lo, hi = bracket
    if sum_rate(lo) >= target or sum_rate(hi) < target:
        raise ValueError(
            f"target rate {target:.4f} not bracketed in [{lo}, {hi}] dB"
        )
    while hi - lo > resolution_db:
        mid = 0.5 * (lo + hi)
        if sum_rate(mid) >= target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def threshold_table(
    qs=(2, 4, 8, 16, 20, 30, 50, 100),
    geometry: NetworkGeometry | None = None,
    model: str = RAYLEIGH,
    energy: str = ENERGY_INFO,
) -> list[dict]:
    """Capacity-threshold table: for each q, the sum-constrained and
    per-user-form thresholds plus the target system rate."""
    geometry = geometry or NetworkGeometry()
    rows = []
    for q in qs:
        rows.append(
            {
                "q": q,
                "threshold_db": capacity_threshold(
                    q, geometry, model, SUM_CONSTRAINED, energy
                ),
                "threshold_per_user_db": capacity_threshold(
                    q, geometry, model, PER_USER, energy
                ),
                "r_eff": q / (2.0 * (q + 1.0)),
            }
        )
    return rows
