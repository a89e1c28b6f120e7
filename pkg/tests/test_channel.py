import numpy as np
import pytest

from relaycode.channel import (
    ChannelOutput,
    NetworkGeometry,
    ber_bpsk_awgn,
    ber_bpsk_rayleigh,
    channel_llr,
    compute_gains,
    derive_snrs,
    noise_variance,
    transmit,
)


def test_published_geometry_gains():
    g_sr, g_rd = compute_gains(NetworkGeometry())
    assert g_sr == pytest.approx(21.19, abs=0.01)
    assert g_rd == pytest.approx(4.40, abs=0.01)


def test_colocated_gain_is_zero():
    g_sr, g_rd = compute_gains(
        NetworkGeometry(dsr_ratio=1.0, drd_ratio=1.0)
    )
    assert g_sr == 0.0 and g_rd == 0.0


def test_geometry_validation():
    with pytest.raises(ValueError):
        NetworkGeometry(dsr_ratio=0.0)
    with pytest.raises(ValueError):
        NetworkGeometry(path_loss_exponent=1.5)


def test_derive_snrs_additive():
    snrs = derive_snrs(0.0, NetworkGeometry())
    assert snrs.gamma_sr_db == pytest.approx(21.19, abs=0.01)
    assert snrs.gamma_rd_db == pytest.approx(4.40, abs=0.01)
    snrs = derive_snrs(1.57, NetworkGeometry())
    assert snrs.gamma_rd_db == pytest.approx(5.97, abs=0.01)


def test_degenerate_geometry_all_equal():
    snrs = derive_snrs(2.5, NetworkGeometry(dsr_ratio=1.0, drd_ratio=1.0))
    assert snrs.gamma_sd_db == snrs.gamma_sr_db == snrs.gamma_rd_db == 2.5


def test_noise_variance_at_zero_db():
    assert noise_variance(0.0) == pytest.approx(0.5)


def test_awgn_bpsk_mapping(rng):
    bits = np.array([0, 1, 0, 1], dtype=np.int8)
    out = transmit(bits, 60.0, "awgn", rng)  # essentially noiseless
    assert np.allclose(out.observations, [1, -1, 1, -1], atol=1e-2)
    assert np.all(out.fading == 1.0)


def test_rayleigh_unit_power(rng):
    out = transmit(np.zeros(10 ** 6, dtype=np.int8), 0.0, "rayleigh", rng)
    assert np.mean(out.fading ** 2) == pytest.approx(1.0, abs=0.005)


def test_channel_llr_formula():
    out = ChannelOutput(observations=np.array([1.0, 0.0]),
                        fading=np.array([1.0, 1.0]),
                        noise_variance=0.5)
    llr = channel_llr(out)
    assert llr[0] == pytest.approx(4.0)
    assert llr[1] == 0.0


def test_llr_sign_recovers_bits_noiseless(rng):
    bits = rng.integers(0, 2, 256).astype(np.int8)
    out = transmit(bits, 50.0, "rayleigh", rng)
    llr = channel_llr(out)
    assert np.array_equal((llr < 0).astype(np.int8), bits)


def test_info_bit_energy_mode():
    assert noise_variance(0.0, rate=0.5) == pytest.approx(1.0)


@pytest.mark.parametrize("gamma_db", [0.0, 2.0, 4.0])
def test_uncoded_awgn_ber_matches_q_function(gamma_db, rng):
    n = 400_000
    bits = rng.integers(0, 2, n).astype(np.int8)
    llr = channel_llr(transmit(bits, gamma_db, "awgn", rng))
    hard = (llr < 0).astype(np.int8)
    p_hat = np.mean(hard != bits)
    p = ber_bpsk_awgn(gamma_db)
    sigma = np.sqrt(p * (1 - p) / n)
    assert abs(p_hat - p) < 3 * sigma + 1e-12


@pytest.mark.parametrize("gamma_db", [0.0, 3.0, 6.0])
def test_uncoded_rayleigh_ber_matches_closed_form(gamma_db, rng):
    n = 400_000
    bits = rng.integers(0, 2, n).astype(np.int8)
    llr = channel_llr(transmit(bits, gamma_db, "rayleigh", rng))
    hard = (llr < 0).astype(np.int8)
    p_hat = np.mean(hard != bits)
    p = ber_bpsk_rayleigh(gamma_db)
    sigma = np.sqrt(p * (1 - p) / n)
    assert abs(p_hat - p) < 3 * sigma


def test_llr_consistency(rng):
    """Empirical P(bit=0 | L) must match 1/(1+exp(-L)) in LLR bins."""
    n = 600_000
    bits = rng.integers(0, 2, n).astype(np.int8)
    llr = channel_llr(transmit(bits, 0.0, "rayleigh", rng))
    edges = np.array([-6, -4, -2, -1, 0, 1, 2, 4, 6])
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (llr >= lo) & (llr < hi)
        if sel.sum() < 3000:
            continue
        p_emp = np.mean(bits[sel] == 0)
        p_model = np.mean(1.0 / (1.0 + np.exp(-llr[sel])))
        assert p_emp == pytest.approx(p_model, abs=0.02)


def test_orthogonal_links_use_independent_streams(rng):
    bits = np.zeros(1000, dtype=np.int8)
    a = transmit(bits, 0.0, "awgn", np.random.default_rng(1))
    b = transmit(bits, 0.0, "awgn", np.random.default_rng(2))
    assert not np.allclose(a.observations, b.observations)
