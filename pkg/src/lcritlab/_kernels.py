"""Numba kernels: hot loops behind evaluation, sampling and discrepancy sweeps."""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_PI = 6.283185307179586
_UNIT = 2.0**-53


@njit(parallel=True, cache=True)
def joint_log_l_kernel(row_hash, prime_key, w_flat, seg_off, seg_count, seg_r, seg_j, out):
    """Accumulate sum_i w[g, i] * z_i^{r_g} into out[b, j_g] for every row b.

    z_i = exp(2 pi i u) with u the splitmix64-mixed hash of (row, prime),
    matching lcritlab.rng exactly. Segments must be sorted by ascending r.
    Rows are independent, so the parallel schedule cannot change results.
    """
    n_rows = row_hash.shape[0]
    m = prime_key.shape[0]
    n_seg = seg_off.shape[0]
    for b in prange(n_rows):
        acc = np.zeros(n_seg, dtype=np.complex128)
        h0 = row_hash[b]
        for i in range(m):
            h = prime_key[i] ^ h0
            h = (h ^ (h >> _S30)) * _M1
            h = (h ^ (h >> _S27)) * _M2
            h = h ^ (h >> _S31)
            u = ((h >> _S11) + 0.5) * _UNIT
            th = _TWO_PI * u
            z = complex(math.cos(th), math.sin(th))
            zr = 1.0 + 0.0j
            rc = 0
            for g in range(n_seg):
                if i < seg_count[g]:
                    r = seg_r[g]
                    while rc < r:
                        zr = zr * z
                        rc += 1
                    acc[g] += w_flat[seg_off[g] + i] * zr
        for g in range(n_seg):
            out[b, seg_j[g]] += acc[g]


@njit(cache=True)
def fill_multiplicative_phases(spf, wprime, out):
    """Extend unit phases from primes to all integers via smallest prime factors.

    ``spf[m]`` is the smallest prime factor of m (0 marks m prime),
    ``wprime[p]`` holds p^{-it} at prime indices. out[m] = m^{-it}.
    """
    out[0] = 0.0 + 0.0j
    if len(out) > 1:
        out[1] = 1.0 + 0.0j
    for m in range(2, len(out)):
        p = spf[m]
        if p == 0:
            out[m] = wprime[m]
        else:
            out[m] = out[p] * out[m // p]


@njit(cache=True)
def _merge_up(pos, tot, mxp, mxs, mxb, mnp, mns, mnb):
    while pos > 1:
        pos >>= 1
        l = 2 * pos
        r = l + 1
        tot[pos] = tot[l] + tot[r]
        mxp[pos] = max(mxp[l], tot[l] + mxp[r])
        mxs[pos] = max(mxs[r], tot[r] + mxs[l])
        mxb[pos] = max(max(mxb[l], mxb[r]), mxs[l] + mxp[r])
        mnp[pos] = min(mnp[l], tot[l] + mnp[r])
        mns[pos] = min(mns[r], tot[r] + mns[l])
        mnb[pos] = min(min(mnb[l], mnb[r]), mns[l] + mnp[r])


@njit(parallel=True, cache=True)
def box_sweep_2d(order, starts, yrank, w, my):
    """Max |signed weight| over axis-aligned closed boxes of weighted 2-D points.

    Points come sorted by x-rank (``order``), with ``starts`` delimiting the
    x-rank groups. For each left x-rank the y-axis segment tree accumulates
    points group by group; the tree maintains max/min subarray sums over
    contiguous y-rank ranges, i.e. over all boxes. The empty box counts as 0.
    """
    mx = starts.shape[0] - 1
    size = 1
    while size < max(my, 1):
        size <<= 1
    best = np.zeros(mx, dtype=np.int64)
    for i1 in prange(mx):
        tot = np.zeros(2 * size, dtype=np.int64)
        mxp = np.zeros(2 * size, dtype=np.int64)
        mxs = np.zeros(2 * size, dtype=np.int64)
        mxb = np.zeros(2 * size, dtype=np.int64)
        mnp = np.zeros(2 * size, dtype=np.int64)
        mns = np.zeros(2 * size, dtype=np.int64)
        mnb = np.zeros(2 * size, dtype=np.int64)
        loc = np.int64(0)
        for i2 in range(i1, mx):
            for k in range(starts[i2], starts[i2 + 1]):
                idx = order[k]
                pos = size + yrank[idx]
                tot[pos] += w[idx]
                v = tot[pos]
                mxp[pos] = max(v, 0)
                mxs[pos] = max(v, 0)
                mxb[pos] = max(v, 0)
                mnp[pos] = min(v, 0)
                mns[pos] = min(v, 0)
                mnb[pos] = min(v, 0)
                _merge_up(pos, tot, mxp, mxs, mxb, mnp, mns, mnb)
            cand = max(mxb[1], -mnb[1])
            if cand > loc:
                loc = cand
        best[i1] = loc
    out = np.int64(0)
    for i in range(mx):
        if best[i] > out:
            out = best[i]
    return out


@njit(cache=True)
def _kadane_2d(r2, r3, w, count, m3):
    """Exact 2-D max |signed box sum| on a small point set via Kadane rows."""
    best = np.int64(0)
    m2 = np.int64(0)
    for i in range(count):
        if r2[i] + 1 > m2:
            m2 = r2[i] + 1
    col = np.zeros(m3, dtype=np.int64)
    for k1 in range(m2):
        col[:] = 0
        for k2 in range(k1, m2):
            for i in range(count):
                if r2[i] == k2:
                    col[r3[i]] += w[i]
            run_max = np.int64(0)
            run_min = np.int64(0)
            for j in range(m3):
                run_max = max(run_max + col[j], 0)
                run_min = min(run_min + col[j], 0)
                if run_max > best:
                    best = run_max
                if -run_min > best:
                    best = -run_min
    return best


@njit(cache=True)
def box_sweep_4d(r0, r1, r2, r3, w, m0, m1, m3):
    """Exact max |signed box sum| in four dimensions by nested slab sweeps.

    Cost grows roughly like n^6 in the worst case; callers cap the point
    count and fall back to the grid estimator beyond it.
    """
    n = r0.shape[0]
    best = np.int64(0)
    idx01 = np.empty(n, dtype=np.int64)
    sub2 = np.empty(n, dtype=np.int64)
    sub3 = np.empty(n, dtype=np.int64)
    subw = np.empty(n, dtype=np.int64)
    for i1 in range(m0):
        c01 = 0
        for i2 in range(i1, m0):
            for i in range(n):
                if r0[i] == i2:
                    idx01[c01] = i
                    c01 += 1
            for j1 in range(m1):
                cs = 0
                for j2 in range(j1, m1):
                    changed = False
                    for k in range(c01):
                        i = idx01[k]
                        if r1[i] == j2:
                            sub2[cs] = r2[i]
                            sub3[cs] = r3[i]
                            subw[cs] = w[i]
                            cs += 1
                            changed = True
                    if not changed and j2 > j1:
                        continue
                    cand = _kadane_2d(sub2, sub3, subw, cs, m3)
                    if cand > best:
                        best = cand
    return best
