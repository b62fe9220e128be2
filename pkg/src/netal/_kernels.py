"""Compiled inner loops for the heat-bath chains.

The hot path avoids lgamma calls by indexing precomputed log-gamma tables
(arguments are always integer counts plus the fixed prior offsets), and
uses a splitmix64 stream so chain output depends only on the seed, never
on scheduling.  All accumulators are int64 (probabilities in 2^-36
fixed point), which keeps ensemble merges exactly associative.

Kernels are compiled with nogil so independent chains can run on worker
threads.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FIXED_POINT_SCALE = float(2**36)

_U11 = np.uint64(11)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 2.0**-53


@njit(inline="always")
def _rng_next(state):
    state = state + _GOLD
    z = state
    z = (z ^ (z >> _U30)) * _MIX1
    z = (z ^ (z >> _U27)) * _MIX2
    z = z ^ (z >> _U31)
    return z, state


@njit(inline="always")
def _uniform(state):
    z, state = _rng_next(state)
    return (z >> _U11) * _INV53, state


@njit(inline="always")
def _cell_cap(ni, nj, diag, mode):
    if mode == 0:  # directed, loops
        return ni * nj
    if mode == 1:  # directed, no loops
        return ni * nj - (ni if diag else 0)
    if diag:
        if mode == 2:  # undirected, no loops
            return ni * (ni - 1) // 2
        return ni * (ni + 1) // 2  # undirected, loops
    return ni * nj


@njit(inline="always")
def _cell_term(e, cap, la, lb, lc):
    return la[e] + lb[cap - e] - lc[cap]


@njit(inline="always")
def _profile(v, t, out_idx, out_ptr, in_idx, in_ptr, directed, kv_out, kv_in):
    """Bucket v's incident edges by neighbor group; returns the self-loop count."""
    for g in range(kv_out.shape[0]):
        kv_out[g] = 0
        kv_in[g] = 0
    self_loop = 0
    for p in range(out_ptr[v], out_ptr[v + 1]):
        w = out_idx[p]
        if w == v:
            self_loop = 1
        else:
            kv_out[t[w]] += 1
    if directed:
        for p in range(in_ptr[v], in_ptr[v + 1]):
            u = in_idx[p]
            if u != v:
                kv_in[t[u]] += 1
    return self_loop


@njit(inline="always")
def _candidate_logweight(c, k, n_vec, e, mode, kv_out, kv_in, self_loop, la, lb, lc):
    """Log-likelihood change of placing the held-out vertex in group c,
    relative to the vertex-absent baseline (candidate-independent constant
    dropped).  n_vec and e must not include the vertex."""
    acc = 0.0
    nc = n_vec[c]
    nc1 = nc + 1
    if mode >= 2:  # undirected: canonical cells (min, max)
        for g in range(k):
            if g == c:
                continue
            i, j = (c, g) if c < g else (g, c)
            eb = e[i, j]
            en = eb + kv_out[g]
            cb = _cell_cap(nc, n_vec[g], False, mode)
            cn = _cell_cap(nc1, n_vec[g], False, mode)
            acc += _cell_term(en, cn, la, lb, lc) - _cell_term(eb, cb, la, lb, lc)
        eb = e[c, c]
        en = eb + kv_out[c] + self_loop
        cb = _cell_cap(nc, nc, True, mode)
        cn = _cell_cap(nc1, nc1, True, mode)
        acc += _cell_term(en, cn, la, lb, lc) - _cell_term(eb, cb, la, lb, lc)
    else:
        for g in range(k):
            if g == c:
                continue
            ng = n_vec[g]
            eb = e[c, g]
            en = eb + kv_out[g]
            acc += _cell_term(en, nc1 * ng, la, lb, lc) - _cell_term(eb, nc * ng, la, lb, lc)
            eb = e[g, c]
            en = eb + kv_in[g]
            acc += _cell_term(en, ng * nc1, la, lb, lc) - _cell_term(eb, ng * nc, la, lb, lc)
        eb = e[c, c]
        en = eb + kv_out[c] + kv_in[c] + self_loop
        cb = _cell_cap(nc, nc, True, mode)
        cn = _cell_cap(nc1, nc1, True, mode)
        acc += _cell_term(en, cn, la, lb, lc) - _cell_term(eb, cb, la, lb, lc)
    return acc


@njit(inline="always")
def _shift_vertex(group, k, n_vec, e, mode, kv_out, kv_in, self_loop, sign):
    if mode >= 2:
        for g in range(k):
            i, j = (group, g) if group <= g else (g, group)
            e[i, j] += sign * kv_out[g]
    else:
        for g in range(k):
            e[group, g] += sign * kv_out[g]
            e[g, group] += sign * kv_in[g]
    e[group, group] += sign * self_loop
    n_vec[group] += sign


@njit(cache=True, nogil=True)
def init_chain_state(k, n, out_idx, out_ptr, directed, mode, pinned, unqueried, rng_state):
    """Random initial assignment (pins respected) plus its block counts."""
    t = np.empty(n, dtype=np.int64)
    for v in range(n):
        t[v] = pinned[v]
    for i in range(unqueried.shape[0]):
        z, rng_state = _rng_next(rng_state)
        t[unqueried[i]] = np.int64(z % np.uint64(k))
    n_vec = np.zeros(k, dtype=np.int64)
    for v in range(n):
        n_vec[t[v]] += 1
    e = np.zeros((k, k), dtype=np.int64)
    for u in range(n):
        for p in range(out_ptr[u], out_ptr[u + 1]):
            w = out_idx[p]
            if directed:
                e[t[u], t[w]] += 1
            elif w > u:
                i, j = (t[u], t[w]) if t[u] <= t[w] else (t[w], t[u])
                e[i, j] += 1
            elif w == u:
                e[t[u], t[u]] += 1
    return t, n_vec, e, rng_state


@njit(inline="always")
def _heat_bath_step(
    s,
    rng_state,
    t,
    n_vec,
    e,
    k,
    out_idx,
    out_ptr,
    in_idx,
    in_ptr,
    directed,
    mode,
    la,
    lb,
    lc,
    unqueried,
    burnin_steps,
    last_flush,
    marg,
    cond_fp,
    ent_fp,
    visits,
    kv_out,
    kv_in,
    logw,
    w,
):
    z, rng_state = _rng_next(rng_state)
    v = unqueried[np.int64(z % np.uint64(unqueried.shape[0]))]
    a = t[v]
    self_loop = _profile(v, t, out_idx, out_ptr, in_idx, in_ptr, directed, kv_out, kv_in)
    _shift_vertex(a, k, n_vec, e, mode, kv_out, kv_in, self_loop, -1)
    mx = -np.inf
    for c in range(k):
        lw = _candidate_logweight(c, k, n_vec, e, mode, kv_out, kv_in, self_loop, la, lb, lc)
        logw[c] = lw
        if lw > mx:
            mx = lw
    tot = 0.0
    for c in range(k):
        w[c] = np.exp(logw[c] - mx)
        tot += w[c]
    u, rng_state = _uniform(rng_state)
    target = u * tot
    b = k - 1
    cum = 0.0
    for c in range(k):
        cum += w[c]
        if target < cum:
            b = c
            break
    _shift_vertex(b, k, n_vec, e, mode, kv_out, kv_in, self_loop, +1)
    recording = s >= burnin_steps
    if b != a:
        if recording:
            marg[v, a] += s - last_flush[v]
            last_flush[v] = s
        t[v] = b
    if recording:
        visits[v] += 1
        ent = 0.0
        for c in range(k):
            pc = w[c] / tot
            if pc > 0.0:
                ent -= pc * np.log(pc)
            cond_fp[v, c] += np.int64(pc * FIXED_POINT_SCALE + 0.5)
        ent_fp[v] += np.int64(ent * FIXED_POINT_SCALE + 0.5)
    return rng_state


@njit(cache=True, nogil=True)
def run_chain_kernel(
    k,
    n,
    out_idx,
    out_ptr,
    in_idx,
    in_ptr,
    directed,
    mode,
    la,
    lb,
    lc,
    pinned,
    unqueried,
    steps,
    burnin_steps,
    seed,
    marg,
    cond_fp,
    ent_fp,
    visits,
):
    """One chain: random init, `steps` heat-bath updates, post-burn-in
    occupancy / conditional accumulation.  Returns the final state."""
    rng_state = np.uint64(seed)
    t, n_vec, e, rng_state = init_chain_state(
        k, n, out_idx, out_ptr, directed, mode, pinned, unqueried, rng_state
    )
    last_flush = np.full(n, burnin_steps, dtype=np.int64)
    kv_out = np.zeros(k, dtype=np.int64)
    kv_in = np.zeros(k, dtype=np.int64)
    logw = np.zeros(k, dtype=np.float64)
    w = np.zeros(k, dtype=np.float64)
    for s in range(steps):
        rng_state = _heat_bath_step(
            s, rng_state, t, n_vec, e, k,
            out_idx, out_ptr, in_idx, in_ptr, directed, mode, la, lb, lc,
            unqueried, burnin_steps, last_flush,
            marg, cond_fp, ent_fp, visits, kv_out, kv_in, logw, w,
        )
    for v in range(n):
        marg[v, t[v]] += steps - last_flush[v]
    return t


@njit(cache=True, nogil=True)
def run_pair_kernel(
    k,
    n,
    out_idx,
    out_ptr,
    in_idx,
    in_ptr,
    directed,
    mode,
    la,
    lb,
    lc,
    pinned,
    unqueried,
    steps,
    burnin_steps,
    seed1,
    seed2,
    thin,
    marg,
    cond_fp,
    ent_fp,
    visits,
    aa_num,
    aa_den,
):
    """Two independent chains advanced in lockstep; every `thin` post-burn-in
    steps their states feed the pairwise agreement tallies."""
    rs1 = np.uint64(seed1)
    rs2 = np.uint64(seed2)
    t1, n1, e1, rs1 = init_chain_state(
        k, n, out_idx, out_ptr, directed, mode, pinned, unqueried, rs1
    )
    t2, n2, e2, rs2 = init_chain_state(
        k, n, out_idx, out_ptr, directed, mode, pinned, unqueried, rs2
    )
    lf1 = np.full(n, burnin_steps, dtype=np.int64)
    lf2 = np.full(n, burnin_steps, dtype=np.int64)
    kv_out = np.zeros(k, dtype=np.int64)
    kv_in = np.zeros(k, dtype=np.int64)
    logw = np.zeros(k, dtype=np.float64)
    w = np.zeros(k, dtype=np.float64)
    for s in range(steps):
        rs1 = _heat_bath_step(
            s, rs1, t1, n1, e1, k,
            out_idx, out_ptr, in_idx, in_ptr, directed, mode, la, lb, lc,
            unqueried, burnin_steps, lf1,
            marg, cond_fp, ent_fp, visits, kv_out, kv_in, logw, w,
        )
        rs2 = _heat_bath_step(
            s, rs2, t2, n2, e2, k,
            out_idx, out_ptr, in_idx, in_ptr, directed, mode, la, lb, lc,
            unqueried, burnin_steps, lf2,
            marg, cond_fp, ent_fp, visits, kv_out, kv_in, logw, w,
        )
        if s >= burnin_steps and (s - burnin_steps) % thin == 0:
            agree = 0
            for v in range(n):
                if t1[v] == t2[v]:
                    agree += 1
            for v in range(n):
                if t1[v] == t2[v]:
                    aa_num[v] += agree
                    aa_den[v] += 1
    for v in range(n):
        marg[v, t1[v]] += steps - lf1[v]
        marg[v, t2[v]] += steps - lf2[v]


@njit(cache=True, nogil=True)
def conditional_probs_kernel(
    k, t, n_vec, e, v, out_idx, out_ptr, in_idx, in_ptr, directed, mode, la, lb, lc
):
    """The heat-bath conditional the step sampler draws from (test hook)."""
    kv_out = np.zeros(k, dtype=np.int64)
    kv_in = np.zeros(k, dtype=np.int64)
    self_loop = _profile(v, t, out_idx, out_ptr, in_idx, in_ptr, directed, kv_out, kv_in)
    a = t[v]
    _shift_vertex(a, k, n_vec, e, mode, kv_out, kv_in, self_loop, -1)
    logw = np.empty(k)
    for c in range(k):
        logw[c] = _candidate_logweight(c, k, n_vec, e, mode, kv_out, kv_in, self_loop, la, lb, lc)
    _shift_vertex(a, k, n_vec, e, mode, kv_out, kv_in, self_loop, +1)
    mx = logw.max()
    w = np.exp(logw - mx)
    return w / w.sum()
