"""Numba-compiled hot loops: log-MAP forward/backward, boxplus folds,
trellis walks.  Pure float64, no fastmath, so results are bit-identical
across runs, platforms and worker counts."""

import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True, inline="always")
def _lae(a, b):
    # log(exp(a) + exp(b)), exact log-MAP (max-star with correction term)
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + np.log1p(np.exp(b - a))


@njit(cache=True)
def boxplus_pair(a, b):
    # sign(a)sign(b)min(|a|,|b|) + log1p(e^-|a+b|) - log1p(e^-|a-b|)
    if a == np.inf:
        return b
    if b == np.inf:
        return a
    if a == NEG_INF:
        return -b
    if b == NEG_INF:
        return -a
    mag = min(abs(a), abs(b))
    s = mag if (a >= 0) == (b >= 0) else -mag
    return s + np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))


@njit(cache=True)
def boxplus_fold(values):
    acc = np.inf
    for i in range(values.shape[0]):
        acc = boxplus_pair(acc, values[i])
    return acc


@njit(cache=True)
def spc_group_priors(member_llrs, group_size):
    """Forward SPC direction: boxplus of each group of J member LLRs,
    giving the prior on that group's parity bit."""
    n_groups = member_llrs.shape[0] // group_size
    out = np.empty(n_groups)
    for g in range(n_groups):
        acc = np.inf
        for j in range(group_size):
            acc = boxplus_pair(acc, member_llrs[g * group_size + j])
        out[g] = acc
    return out


@njit(cache=True)
def spc_member_extrinsics(member_llrs, parity_ext, group_size):
    """Check-node extrinsic for every group member: boxplus of the parity
    extrinsic with the other J-1 members' LLRs (leave-one-out via
    prefix/suffix folds)."""
    n_groups = parity_ext.shape[0]
    out = np.empty(member_llrs.shape[0])
    prefix = np.empty(group_size + 1)
    suffix = np.empty(group_size + 1)
    for g in range(n_groups):
        base = g * group_size
        prefix[0] = np.inf
        for j in range(group_size):
            prefix[j + 1] = boxplus_pair(prefix[j], member_llrs[base + j])
        suffix[group_size] = np.inf
        for j in range(group_size - 1, -1, -1):
            suffix[j] = boxplus_pair(suffix[j + 1], member_llrs[base + j])
        for j in range(group_size):
            loo = boxplus_pair(prefix[j], suffix[j + 1])
            out[base + j] = boxplus_pair(parity_ext[g], loo)
    return out


@njit(cache=True)
def trellis_encode(next_state, output_bits, bits, steps, term_input):
    """Walk the trellis for `steps` steps; inputs beyond len(bits) are the
    termination inputs from term_input."""
    n_out = output_bits.shape[2]
    out = np.empty(steps * n_out, dtype=np.int8)
    s = 0
    for t in range(steps):
        u = bits[t] if t < bits.shape[0] else term_input[s]
        for o in range(n_out):
            out[t * n_out + o] = output_bits[s, u, o]
        s = next_state[s, u]
    return out


@njit(cache=True)
def bcjr_core(next_state, output_bits, chan_llr, apriori_llr, terminated,
              want_coded):
    """Exact log-MAP forward-backward pass.

    chan_llr holds one LLR per coded bit (steps * n_out entries), apriori
    one LLR per input bit (steps entries); LLR = ln P(0)/P(1).  Returns
    (app_info, app_coded); app_coded is empty unless requested.
    """
    num_states = next_state.shape[0]
    n_out = output_bits.shape[2]
    steps = apriori_llr.shape[0]

    # Branch metrics: gamma[t, s, u] with per-step constants dropped
    gamma = np.empty((steps, num_states, 2))
    for t in range(steps):
        for s in range(num_states):
            for u in range(2):
                g = 0.5 * (1.0 - 2.0 * u) * apriori_llr[t]
                for o in range(n_out):
                    c = output_bits[s, u, o]
                    g += 0.5 * (1.0 - 2.0 * c) * chan_llr[t * n_out + o]
                gamma[t, s, u] = g

    alpha = np.full((steps + 1, num_states), NEG_INF)
    alpha[0, 0] = 0.0
    for t in range(steps):
        for s in range(num_states):
            a = alpha[t, s]
            if a == NEG_INF:
                continue
            for u in range(2):
                ns = next_state[s, u]
                alpha[t + 1, ns] = _lae(alpha[t + 1, ns], a + gamma[t, s, u])
        mx = alpha[t + 1, 0]
        for s in range(1, num_states):
            if alpha[t + 1, s] > mx:
                mx = alpha[t + 1, s]
        for s in range(num_states):
            alpha[t + 1, s] -= mx

    beta = np.full((steps + 1, num_states), NEG_INF)
    if terminated:
        beta[steps, 0] = 0.0
    else:
        for s in range(num_states):
            beta[steps, s] = 0.0
    for t in range(steps - 1, -1, -1):
        for s in range(num_states):
            acc = NEG_INF
            for u in range(2):
                ns = next_state[s, u]
                b = beta[t + 1, ns]
                if b != NEG_INF:
                    acc = _lae(acc, b + gamma[t, s, u])
            beta[t, s] = acc
        mx = beta[t, 0]
        for s in range(1, num_states):
            if beta[t, s] > mx:
                mx = beta[t, s]
        for s in range(num_states):
            beta[t, s] -= mx

    app_info = np.empty(steps)
    app_coded = np.empty(steps * n_out if want_coded else 0)
    for t in range(steps):
        num0 = NEG_INF
        num1 = NEG_INF
        for s in range(num_states):
            a = alpha[t, s]
            if a == NEG_INF:
                continue
            for u in range(2):
                ns = next_state[s, u]
                b = beta[t + 1, ns]
                if b == NEG_INF:
                    continue
                metric = a + gamma[t, s, u] + b
                if u == 0:
                    num0 = _lae(num0, metric)
                else:
                    num1 = _lae(num1, metric)
        app_info[t] = num0 - num1
        if want_coded:
            for o in range(n_out):
                c0 = NEG_INF
                c1 = NEG_INF
                for s in range(num_states):
                    a = alpha[t, s]
                    if a == NEG_INF:
                        continue
                    for u in range(2):
                        ns = next_state[s, u]
                        b = beta[t + 1, ns]
                        if b == NEG_INF:
                            continue
                        metric = a + gamma[t, s, u] + b
                        if output_bits[s, u, o] == 0:
                            c0 = _lae(c0, metric)
                        else:
                            c1 = _lae(c1, metric)
                app_coded[t * n_out + o] = c0 - c1
    return app_info, app_coded
