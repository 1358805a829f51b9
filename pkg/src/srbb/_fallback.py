"""Pure numpy versions of the compiled kernels.

Accumulations run in the same order as the Cython loops so that both
backends return identical bits.
"""
import numpy as np

STEP, BUMP, TABLE = 0, 1, 2


def _v(r2, kind, eta, R, tab_r, tab_v):
    R2 = R * R
    inside = r2 <= R2
    if kind == STEP:
        out = np.where(inside, eta, 0.0)
    elif kind == BUMP:
        t = 1.0 - r2 / R2
        out = np.where(inside, eta * t * t, 0.0)
    else:
        r = np.sqrt(r2)
        n = len(tab_r)
        lo = np.clip(np.searchsorted(tab_r, r, side="right") - 1, 0, n - 2)
        hi = lo + 1
        t = (r - tab_r[lo]) / (tab_r[hi] - tab_r[lo])
        val = tab_v[lo] + t * (tab_v[hi] - tab_v[lo])
        val = np.where(r <= tab_r[0], tab_v[0], val)
        val = np.where(r >= tab_r[-1], tab_v[-1], val)
        out = np.where(inside, val, 0.0)
    return out


def pair_energies(paths, n_legs, M, dt, kind, eta, R, tab_r, tab_v, out):
    n, _, d = paths.shape
    idx = np.arange(n_legs)[:, None] * M + np.arange(M + 1)[None, :]
    legs = paths[:, idx, :]  # (n, k, M+1, d)
    out[...] = 0.0
    for off in range(1, n_legs):
        a = legs[:, : n_legs - off]
        b = legs[:, off:]
        r2 = np.zeros(a.shape[:-1])
        for c in range(d):
            diff = a[..., c] - b[..., c]
            r2 = r2 + diff * diff
        vals = _v(r2, kind, eta, R, tab_r, tab_v)
        acc = np.zeros(vals.shape[:-1])
        for t in range(M + 1):
            w = 0.5 * dt if t == 0 or t == M else dt
            acc = acc + w * vals[..., t]
        i = np.arange(n_legs - off)
        out[:, i, i + off] = acc
        out[:, i + off, i] = acc


def signed_graph_sums(u_edges, masks, group, out):
    n, E = u_edges.shape
    if len(masks) == 0:
        return
    masks = np.asarray(masks)
    group = np.asarray(group)
    size = 1 << int(np.max(masks)).bit_length()
    if size > 1 << 24:
        _graph_sums_direct(u_edges, masks, group, out)
        return
    rows = max(1, (1 << 24) // size)
    for s0 in range(0, n, rows):
        _graph_sums_table(u_edges[s0:s0 + rows], masks, group, out[s0:s0 + rows], size)


def _graph_sums_table(u_edges, masks, group, out, size):
    n = u_edges.shape[0]
    prod = np.empty((n, size))
    prod[:, 0] = 1.0
    # prod[m] = prod[m without its lowest bit] * (-u[lowest bit]); the lowest
    # factor is applied last, i.e. factors are multiplied from the top bit down
    for m in range(1, size):
        low = (m & -m).bit_length() - 1
        prod[:, m] = prod[:, m & (m - 1)] * (-u_edges[:, low])
    for g in np.unique(group):
        sel = masks[group == g]
        cols = np.concatenate([out[:, g:g + 1], prod[:, sel]], axis=1)
        out[:, g] = np.cumsum(cols, axis=1)[:, -1]


def _graph_sums_direct(u_edges, masks, group, out):
    # one mask at a time; used when the full subset table would not fit
    E = u_edges.shape[1]
    for m, g in zip(masks.tolist(), group.tolist()):
        prod = np.ones(u_edges.shape[0])
        for e in range(E - 1, -1, -1):
            if (m >> e) & 1:
                prod = prod * (-u_edges[:, e])
        out[:, g] = out[:, g] + prod


def sample_partitions(cdf, u, out):
    n, N = u.shape
    m = np.full(n, N, dtype=np.int64)
    rows = np.arange(n)
    t = 0
    while True:
        active = m > 0
        if not active.any():
            break
        x = u[:, t]
        lo = np.zeros(n, dtype=np.int64)
        hi = np.maximum(m - 1, 0)
        while True:
            go = lo < hi
            if not go.any():
                break
            mid = (lo + hi) >> 1
            gt = cdf[m, mid] > x
            hi = np.where(go & gt, mid, hi)
            lo = np.where(go & ~gt, mid + 1, lo)
        k = lo + 1
        np.add.at(out, (rows[active], k[active]), 1)
        m = np.where(active, m - k, m)
        t += 1
