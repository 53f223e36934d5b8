"""Numba-compiled tree kernels (fast backend).

Draw-for-draw mirror of ``numpy_impl``: same splitmix64 stream, same scan
order, same tie-breaking.  Unweighted trees match the numpy backend bit for
bit because all impurity bookkeeping stays in int64; weighted trees match
whenever feature values are tie-free (float accumulation order inside a
run of equal values is backend-dependent).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 2.0 ** -53

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _mix(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return state, z


@njit(**_JIT)
def build_tree(X, y, n_classes, max_depth, min_split, mtry, random_thresh,
               bootstrap, seed):
    n, d = X.shape
    state = seed

    samples = np.empty(n, dtype=np.int64)
    if bootstrap:
        for i in range(n):
            state, z = _mix(state)
            samples[i] = np.int64(z % np.uint64(n))
    else:
        for i in range(n):
            samples[i] = i

    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    counts = np.zeros((cap, n_classes), dtype=np.float64)

    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)
    sp = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    sp = 1
    node_count = 1

    cnt = np.empty(n_classes, dtype=np.int64)
    cntl = np.empty(n_classes, dtype=np.int64)
    feats = np.empty(d, dtype=np.int64)
    vals = np.empty(n, dtype=np.float64)
    cbuf = np.empty(n, dtype=np.int64)
    part = np.empty(n, dtype=np.int64)

    while sp > 0:
        sp -= 1
        node = stack_node[sp]
        start = stack_start[sp]
        end = stack_end[sp]
        depth = stack_depth[sp]
        m = end - start

        for c in range(n_classes):
            cnt[c] = 0
        for i in range(start, end):
            cnt[y[samples[i]]] += 1
        maxc = 0
        for c in range(n_classes):
            counts[node, c] = cnt[c]
            if cnt[c] > maxc:
                maxc = cnt[c]
        if depth >= max_depth or m < min_split or maxc == m:
            continue

        if mtry >= d:
            n_sub = d
            for idx in range(d):
                feats[idx] = idx
        else:
            n_sub = mtry
            for idx in range(d):
                feats[idx] = idx
            for j in range(mtry):
                state, z = _mix(state)
                r = j + np.int64(z % np.uint64(d - j))
                tmp = feats[j]
                feats[j] = feats[r]
                feats[r] = tmp
            # insertion-sort the subset so ties favor the lowest feature index
            for a in range(1, mtry):
                key = feats[a]
                b = a - 1
                while b >= 0 and feats[b] > key:
                    feats[b + 1] = feats[b]
                    b -= 1
                feats[b + 1] = key

        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        for si in range(n_sub):
            f = feats[si]
            for j in range(m):
                row = samples[start + j]
                vals[j] = X[row, f]
                cbuf[j] = y[row]
            if random_thresh:
                lo = vals[0]
                hi = vals[0]
                for j in range(1, m):
                    v = vals[j]
                    if v < lo:
                        lo = v
                    if v > hi:
                        hi = v
                if lo == hi:
                    continue
                state, z = _mix(state)
                thr = lo + ((z >> _S11) * _INV53) * (hi - lo)
                if not thr < hi:
                    thr = lo
                nl = 0
                for c in range(n_classes):
                    cntl[c] = 0
                for j in range(m):
                    if vals[j] <= thr:
                        cntl[cbuf[j]] += 1
                        nl += 1
                if nl == 0 or nl == m:
                    continue
                ssql = np.int64(0)
                ssqr = np.int64(0)
                for c in range(n_classes):
                    ssql += cntl[c] * cntl[c]
                    rr = cnt[c] - cntl[c]
                    ssqr += rr * rr
                score = ssql / nl + ssqr / (m - nl)
                if score > best_score:
                    best_score = score
                    best_f = f
                    best_thr = thr
            else:
                order = np.argsort(vals[:m])
                for c in range(n_classes):
                    cntl[c] = 0
                ssql = np.int64(0)
                ssqr = np.int64(0)
                for c in range(n_classes):
                    ssqr += cnt[c] * cnt[c]
                f_score = -np.inf
                f_thr = 0.0
                for j in range(m - 1):
                    o = order[j]
                    c = cbuf[o]
                    ssql += 2 * cntl[c] + 1
                    ssqr += 1 - 2 * (cnt[c] - cntl[c])
                    cntl[c] += 1
                    vj = vals[o]
                    vj1 = vals[order[j + 1]]
                    if vj < vj1:
                        nl = j + 1
                        score = ssql / nl + ssqr / (m - nl)
                        if score > f_score:
                            f_score = score
                            f_thr = (vj + vj1) / 2.0
                if f_score > best_score:
                    best_score = f_score
                    best_f = f
                    best_thr = f_thr
        if best_f < 0:
            continue

        n_left = 0
        for i in range(start, end):
            if X[samples[i], best_f] <= best_thr:
                part[n_left] = samples[i]
                n_left += 1
        n_right = 0
        for i in range(start, end):
            if not X[samples[i], best_f] <= best_thr:
                part[n_left + n_right] = samples[i]
                n_right += 1
        for j in range(m):
            samples[start + j] = part[j]

        lid = node_count
        rid = node_count + 1
        node_count += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack_node[sp] = rid
        stack_start[sp] = start + n_left
        stack_end[sp] = end
        stack_depth[sp] = depth + 1
        sp += 1
        stack_node[sp] = lid
        stack_start[sp] = start
        stack_end[sp] = start + n_left
        stack_depth[sp] = depth + 1
        sp += 1

    k = node_count
    return feature[:k].copy(), threshold[:k].copy(), left[:k].copy(), \
        right[:k].copy(), counts[:k].copy()


@njit(**_JIT)
def build_tree_weighted(X, y, w, n_classes, max_depth, min_split):
    n, d = X.shape
    samples = np.arange(n)

    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    counts = np.zeros((cap, n_classes), dtype=np.float64)

    stack_node = np.empty(cap, dtype=np.int64)
    stack_start = np.empty(cap, dtype=np.int64)
    stack_end = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    sp = 1
    node_count = 1

    hard = np.empty(n_classes, dtype=np.int64)
    wl_c = np.empty(n_classes, dtype=np.float64)
    wt_c = np.empty(n_classes, dtype=np.float64)
    vals = np.empty(n, dtype=np.float64)
    cvec = np.empty(n, dtype=np.int64)
    wvec = np.empty(n, dtype=np.float64)
    part = np.empty(n, dtype=np.int64)

    while sp > 0:
        sp -= 1
        node = stack_node[sp]
        start = stack_start[sp]
        end = stack_end[sp]
        depth = stack_depth[sp]
        m = end - start

        for c in range(n_classes):
            hard[c] = 0
            wt_c[c] = 0.0
        for i in range(start, end):
            row = samples[i]
            hard[y[row]] += 1
            wt_c[y[row]] += w[row]
        maxc = 0
        for c in range(n_classes):
            counts[node, c] = wt_c[c]
            if hard[c] > maxc:
                maxc = hard[c]
        if depth >= max_depth or m < min_split or maxc == m:
            continue

        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        for f in range(d):
            for j in range(m):
                row = samples[start + j]
                vals[j] = X[row, f]
                cvec[j] = y[row]
                wvec[j] = w[row]
            order = np.argsort(vals[:m])
            # totals accumulated in sorted order, matching the numpy cumsum
            for c in range(n_classes):
                wt_c[c] = 0.0
            wtot = 0.0
            for j in range(m):
                o = order[j]
                wt_c[cvec[o]] += wvec[o]
                wtot += wvec[o]
            for c in range(n_classes):
                wl_c[c] = 0.0
            wl = 0.0
            f_score = -np.inf
            f_thr = 0.0
            for j in range(m - 1):
                o = order[j]
                wl_c[cvec[o]] += wvec[o]
                wl += wvec[o]
                vj = vals[o]
                vj1 = vals[order[j + 1]]
                if vj < vj1:
                    wr = wtot - wl
                    if wl > 0.0 and wr > 0.0:
                        ssql = 0.0
                        ssqr = 0.0
                        for c in range(n_classes):
                            ssql += wl_c[c] * wl_c[c]
                            rr = wt_c[c] - wl_c[c]
                            ssqr += rr * rr
                        score = ssql / wl + ssqr / wr
                        if score > f_score:
                            f_score = score
                            f_thr = (vj + vj1) / 2.0
            if f_score > best_score:
                best_score = f_score
                best_f = f
                best_thr = f_thr
        if best_f < 0:
            continue

        n_left = 0
        for i in range(start, end):
            if X[samples[i], best_f] <= best_thr:
                part[n_left] = samples[i]
                n_left += 1
        if n_left == 0 or n_left == m:
            continue
        n_right = 0
        for i in range(start, end):
            if not X[samples[i], best_f] <= best_thr:
                part[n_left + n_right] = samples[i]
                n_right += 1
        for j in range(m):
            samples[start + j] = part[j]

        lid = node_count
        rid = node_count + 1
        node_count += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack_node[sp] = rid
        stack_start[sp] = start + n_left
        stack_end[sp] = end
        stack_depth[sp] = depth + 1
        sp += 1
        stack_node[sp] = lid
        stack_start[sp] = start
        stack_end[sp] = start + n_left
        stack_depth[sp] = depth + 1
        sp += 1

    k = node_count
    return feature[:k].copy(), threshold[:k].copy(), left[:k].copy(), \
        right[:k].copy(), counts[:k].copy()


@njit(**_JIT)
def apply_tree(X, feature, threshold, left, right):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out
