"""Pure-numpy tree kernels (reference backend).

The numba backend mirrors these functions draw-for-draw: both use the same
splitmix64 stream and integer-exact impurity arithmetic, so trees built by
either backend are identical bit for bit.  Split scores maximize
``ssq_left/n_left + ssq_right/n_right`` where ``ssq`` is the sum of squared
class counts; this is a monotone transform of the weighted Gini impurity.
"""

from __future__ import annotations

import numpy as np

_M64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0 ** -53


def _mix(state):
    state = (state + _GAMMA) & _M64
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & _M64
    z = ((z ^ (z >> 27)) * _MIX2) & _M64
    z ^= z >> 31
    return state, z


def _feature_subset(state, d, mtry):
    """Partial Fisher-Yates; returns (state, ascending feature indices)."""
    feats = np.arange(d, dtype=np.int64)
    for j in range(mtry):
        state, z = _mix(state)
        r = j + z % (d - j)
        feats[j], feats[r] = feats[r], feats[j]
    subset = np.sort(feats[:mtry])
    return state, subset


def _best_exact_split(vals, cls, total, m, n_classes):
    """Best midpoint split of one feature column; (-inf, 0, 0) if none."""
    order = np.argsort(vals, kind="quicksort")
    sv = vals[order]
    sc = cls[order]
    ind = np.zeros((m, n_classes), dtype=np.int64)
    ind[np.arange(m), sc] = 1
    cum = ind.cumsum(axis=0)[:-1]
    nl = np.arange(1, m, dtype=np.int64)
    ssql = np.sum(cum * cum, axis=1)
    cr = total[None, :] - cum
    ssqr = np.sum(cr * cr, axis=1)
    score = ssql / nl + ssqr / (m - nl)
    score[sv[:-1] >= sv[1:]] = -np.inf
    j = int(np.argmax(score))
    if score[j] == -np.inf:
        return -np.inf, 0.0, 0
    return float(score[j]), float((sv[j] + sv[j + 1]) / 2.0), int(nl[j])


def _threshold_split(vals, cls, total, m, n_classes, thr):
    """Score of a fixed-threshold split; (-inf, 0) if one side is empty."""
    mask = vals <= thr
    nl = int(mask.sum())
    if nl == 0 or nl == m:
        return -np.inf, 0
    cl = np.bincount(cls[mask], minlength=n_classes).astype(np.int64)
    cr = total - cl
    ssql = int(np.sum(cl * cl))
    ssqr = int(np.sum(cr * cr))
    return ssql / nl + ssqr / (m - nl), nl


def build_tree(X, y, n_classes, max_depth, min_split, mtry, random_thresh,
               bootstrap, seed):
    """Grow one classification tree; returns flat preorder-numbered arrays.

    Output: (feature, threshold, left, right, counts) where ``feature`` is
    -1 at leaves and ``counts`` holds per-node class counts of the rows
    (bootstrap rows, if any) routed through each node.
    """
    n, d = X.shape
    state = int(seed) & _M64
    if bootstrap:
        samples = np.empty(n, dtype=np.int64)
        for i in range(n):
            state, z = _mix(state)
            samples[i] = z % n
    else:
        samples = np.arange(n, dtype=np.int64)

    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    counts = np.zeros((cap, n_classes), dtype=np.float64)

    stack = [(0, 0, n, 0)]
    node_count = 1
    while stack:
        node, start, end, depth = stack.pop()
        rows = samples[start:end]
        m = end - start
        cls = y[rows]
        cnt = np.bincount(cls, minlength=n_classes).astype(np.int64)
        counts[node] = cnt
        if depth >= max_depth or m < min_split or int(cnt.max()) == m:
            continue

        if mtry >= d:
            subset = np.arange(d, dtype=np.int64)
        else:
            state, subset = _feature_subset(state, d, mtry)

        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        for f in subset:
            vals = X[rows, f]
            if random_thresh:
                lo = float(vals.min())
                hi = float(vals.max())
                if lo == hi:
                    continue
                state, z = _mix(state)
                thr = lo + ((z >> 11) * _INV53) * (hi - lo)
                if not thr < hi:
                    thr = lo
                score, _ = _threshold_split(vals, cls, cnt, m, n_classes, thr)
            else:
                score, thr, _ = _best_exact_split(vals, cls, cnt, m, n_classes)
            if score > best_score:
                best_score = score
                best_f = int(f)
                best_thr = thr
        if best_f < 0:
            continue

        mask = X[rows, best_f] <= best_thr
        n_left = int(mask.sum())
        samples[start:end] = np.concatenate([rows[mask], rows[~mask]])
        lid = node_count
        rid = node_count + 1
        node_count += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack.append((rid, start + n_left, end, depth + 1))
        stack.append((lid, start, start + n_left, depth + 1))

    k = node_count
    return feature[:k].copy(), threshold[:k].copy(), left[:k].copy(), \
        right[:k].copy(), counts[:k].copy()


def _best_weighted_split(vals, cls, w, m, n_classes):
    """Best midpoint split under sample weights; mirrors the numba scan."""
    order = np.argsort(vals, kind="quicksort")
    sv = vals[order]
    sc = cls[order]
    sw = w[order]
    ind = np.zeros((m, n_classes), dtype=np.float64)
    ind[np.arange(m), sc] = sw
    cum = ind.cumsum(axis=0)
    wtot_c = cum[-1]
    cum = cum[:-1]
    cw = sw.cumsum()
    wtot = float(cw[-1])
    wl = cw[:-1]
    wr = wtot - wl
    ssql = np.sum(cum * cum, axis=1)
    crm = wtot_c[None, :] - cum
    ssqr = np.sum(crm * crm, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        score = ssql / wl + ssqr / wr
    score[(sv[:-1] >= sv[1:]) | (wl <= 0.0) | (wr <= 0.0)] = -np.inf
    j = int(np.argmax(score))
    if score[j] == -np.inf:
        return -np.inf, 0.0
    return float(score[j]), float((sv[j] + sv[j + 1]) / 2.0)


def build_tree_weighted(X, y, w, n_classes, max_depth, min_split):
    """Weighted tree over all features, no bootstrap (boosting base learner)."""
    n, d = X.shape
    samples = np.arange(n, dtype=np.int64)

    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    counts = np.zeros((cap, n_classes), dtype=np.float64)

    stack = [(0, 0, n, 0)]
    node_count = 1
    while stack:
        node, start, end, depth = stack.pop()
        rows = samples[start:end]
        m = end - start
        cls = y[rows]
        wn = w[rows]
        ind = np.zeros((m, n_classes), dtype=np.float64)
        ind[np.arange(m), cls] = wn
        wcnt = ind.cumsum(axis=0)[-1]
        counts[node] = wcnt
        hard = np.bincount(cls, minlength=n_classes)
        if depth >= max_depth or m < min_split or int(hard.max()) == m:
            continue

        best_score = -np.inf
        best_f = -1
        best_thr = 0.0
        for f in range(d):
            vals = X[rows, f]
            score, thr = _best_weighted_split(vals, cls, wn, m, n_classes)
            if score > best_score:
                best_score = score
                best_f = f
                best_thr = thr
        if best_f < 0:
            continue

        mask = X[rows, best_f] <= best_thr
        n_left = int(mask.sum())
        if n_left == 0 or n_left == m:
            continue
        samples[start:end] = np.concatenate([rows[mask], rows[~mask]])
        lid = node_count
        rid = node_count + 1
        node_count += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack.append((rid, start + n_left, end, depth + 1))
        stack.append((lid, start, start + n_left, depth + 1))

    k = node_count
    return feature[:k].copy(), threshold[:k].copy(), left[:k].copy(), \
        right[:k].copy(), counts[:k].copy()


def apply_tree(X, feature, threshold, left, right):
    """Leaf node id reached by each row."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    while True:
        f = feature[node]
        active = np.nonzero(f >= 0)[0]
        if active.size == 0:
            return node
        cur = node[active]
        go_left = X[active, f[active]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
