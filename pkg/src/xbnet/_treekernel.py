"""Compiled exact-greedy tree growing on presorted feature columns.

Every node owns the range ``[lo, hi)`` of each row of ``srt``; row ``f`` lists the
node's samples in ascending order of feature ``f``.  Splitting a node stably
partitions each row's range, so the ordering is never recomputed.
"""

import numpy as np
from numba import njit

TIE_TOL = 1e-12


@njit(cache=True)
def _split_gain(GL, HL, G, H, lam, gamma):
    GR = G - GL
    HR = H - HL
    return 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam)) - gamma


@njit(cache=True)
def node_best_split(X, srt, g, h, lo, hi, lam, gamma, min_hess):
    """Return (gain, feature, threshold) of the best split of one node; feature -1 if none valid.

    Candidates are midpoints between consecutive distinct values.  Ties within
    TIE_TOL of the maximum go to the lowest feature, then the lowest threshold.
    """
    F = X.shape[1]
    G = 0.0
    H = 0.0
    for p in range(lo, hi):
        s = srt[0, p]
        G += g[s]
        H += h[s]
    best = -np.inf
    for f in range(F):
        GL = 0.0
        HL = 0.0
        for p in range(lo, hi - 1):
            s = srt[f, p]
            GL += g[s]
            HL += h[s]
            if X[s, f] < X[srt[f, p + 1], f] and HL >= min_hess and H - HL >= min_hess:
                gn = _split_gain(GL, HL, G, H, lam, gamma)
                if gn > best:
                    best = gn
    if best == -np.inf or not np.isfinite(best):
        return best, -1, 0.0
    for f in range(F):
        GL = 0.0
        HL = 0.0
        for p in range(lo, hi - 1):
            s = srt[f, p]
            GL += g[s]
            HL += h[s]
            nxt = srt[f, p + 1]
            if X[s, f] < X[nxt, f] and HL >= min_hess and H - HL >= min_hess:
                gn = _split_gain(GL, HL, G, H, lam, gamma)
                if gn >= best - TIE_TOL:
                    a = X[s, f]
                    b = X[nxt, f]
                    thr = a + (b - a) / 2.0
                    if not (a < thr and thr <= b):
                        thr = b
                    return best, f, thr
    return best, -1, 0.0


@njit(cache=True)
def grow_tree(X, order, g, h, max_depth, lam, gamma, min_hess, eta,
              feature, threshold, left, right, value, gain, feature_gain, leaf_of):
    """Grow one tree into the preallocated node arrays; returns the node count.

    ``order`` is (F, n) ascending sample order per feature.  ``leaf_of`` receives
    each sample's leaf id and ``feature_gain`` is incremented in place.
    """
    F, n = order.shape
    srt = order.copy()
    tmp = np.empty(n, dtype=np.int64)
    go_left = np.zeros(n, dtype=np.bool_)
    cap = feature.shape[0]
    stack_node = np.empty(cap, dtype=np.int64)
    stack_lo = np.empty(cap, dtype=np.int64)
    stack_hi = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)
    top = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n
    stack_depth[0] = 0
    top = 1
    count = 1
    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        depth = stack_depth[top]
        best = -1.0
        f = -1
        thr = 0.0
        if depth < max_depth and hi - lo >= 2:
            best, f, thr = node_best_split(X, srt, g, h, lo, hi, lam, gamma, min_hess)
        if f < 0 or not best > 0.0:
            G = 0.0
            H = 0.0
            for p in range(lo, hi):
                s = srt[0, p]
                G += g[s]
                H += h[s]
            feature[node] = -1
            value[node] = -G / (H + lam) * eta
            for p in range(lo, hi):
                leaf_of[srt[0, p]] = node
            continue
        feature[node] = f
        threshold[node] = thr
        gain[node] = best
        feature_gain[f] += best
        nl = 0
        for p in range(lo, hi):
            s = srt[f, p]
            go_left[s] = X[s, f] < thr
            if go_left[s]:
                nl += 1
        for ff in range(F):
            a = lo
            b = lo + nl
            for p in range(lo, hi):
                s = srt[ff, p]
                if go_left[s]:
                    tmp[a] = s
                    a += 1
                else:
                    tmp[b] = s
                    b += 1
            for p in range(lo, hi):
                srt[ff, p] = tmp[p]
        left[node] = count
        right[node] = count + 1
        # right pushed first so the left subtree is numbered and grown first
        stack_node[top] = count + 1
        stack_lo[top] = lo + nl
        stack_hi[top] = hi
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = count
        stack_lo[top] = lo
        stack_hi[top] = lo + nl
        stack_depth[top] = depth + 1
        top += 1
        count += 2
    return count


@njit(cache=True)
def _probs(raw, K, prob):
    n = raw.shape[0]
    if K == 2:
        for s in range(n):
            p1 = 0.5 * (1.0 + np.tanh(0.5 * raw[s, 0]))
            prob[s, 0] = 1.0 - p1
            prob[s, 1] = p1
    else:
        for s in range(n):
            m = raw[s, 0]
            for k in range(1, K):
                if raw[s, k] > m:
                    m = raw[s, k]
            tot = 0.0
            for k in range(K):
                prob[s, k] = np.exp(raw[s, k] - m)
                tot += prob[s, k]
            for k in range(K):
                prob[s, k] /= tot


@njit(cache=True)
def boost(X, order, y, K, base, max_depth, lam, gamma, min_hess, eta,
          feature, threshold, left, right, value, gain, counts, feature_gain, logloss):
    """Newton boosting; round r, output k lands in row (r, k) of the node arrays.

    Binary (K == 2) grows one logistic tree per round, otherwise one softmax tree
    per class per round.  ``logloss`` receives the training log loss after each round.
    """
    n = X.shape[0]
    R, T = counts.shape
    raw = np.empty((n, T))
    for s in range(n):
        for k in range(T):
            raw[s, k] = base[k]
    prob = np.empty((n, K))
    g = np.empty(n)
    h = np.empty(n)
    leaf_of = np.empty(n, dtype=np.int64)
    _probs(raw, K, prob)
    for r in range(R):
        for k in range(T):
            c = 1 if K == 2 else k
            for s in range(n):
                p = prob[s, c]
                g[s] = p - (1.0 if y[s] == c else 0.0)
                h[s] = p * (1.0 - p)
            counts[r, k] = grow_tree(X, order, g, h, max_depth, lam, gamma, min_hess, eta,
                                     feature[r, k], threshold[r, k], left[r, k], right[r, k],
                                     value[r, k], gain[r, k], feature_gain, leaf_of)
            for s in range(n):
                raw[s, k] += value[r, k, leaf_of[s]]
        _probs(raw, K, prob)
        tot = 0.0
        for s in range(n):
            q = prob[s, y[s]]
            tot -= np.log(q if q > 1e-15 else 1e-15)
        logloss[r] = tot / n


@njit(cache=True)
def predict_raw(X, base, feature, threshold, left, right, value):
    n = X.shape[0]
    R, T, _ = feature.shape
    raw = np.empty((n, T))
    for s in range(n):
        for k in range(T):
            acc = base[k]
            for r in range(R):
                node = 0
                while feature[r, k, node] >= 0:
                    if X[s, feature[r, k, node]] < threshold[r, k, node]:
                        node = left[r, k, node]
                    else:
                        node = right[r, k, node]
                acc += value[r, k, node]
            raw[s, k] = acc
    return raw
