"""Compiled inner loops: tree growth and online linear learners.

Randomness inside a kernel uses numba's per-thread Mersenne Twister, seeded
at kernel entry with a seed drawn from the caller's PCG64 stream.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _entropy(wpos, wneg):
    total = wpos + wneg
    h = 0.0
    if wpos > 0.0:
        p = wpos / total
        h -= p * np.log2(p)
    if wneg > 0.0:
        q = wneg / total
        h -= q * np.log2(q)
    return h


@njit(cache=True)
def _xlogx(v):
    return v * np.log2(v) if v > 0.0 else 0.0


@njit(cache=True)
def _children(wpos, wneg, lpos, lneg, table):
    """Total-weight times weighted child entropy, i.e. sum over children of W_c * H_c.

    With unit weights all weights are integer counts and ``table[k] = k log2 k``
    replaces the logarithms.
    """
    rpos = wpos - lpos
    rneg = wneg - lneg
    if table.shape[0] > 0:
        il = int(lpos)
        jl = int(lneg)
        ir = int(rpos)
        jr = int(rneg)
        return (table[il + jl] - table[il] - table[jl]) + (table[ir + jr] - table[ir] - table[jr])
    return (_xlogx(lpos + lneg) - _xlogx(lpos) - _xlogx(lneg)) + (_xlogx(rpos + rneg) - _xlogx(rpos) - _xlogx(rneg))


@njit(cache=True)
def grow_tree(X, y, w, max_depth, min_split, max_features, random_thresholds, capacity, seed):
    """Grow one binary tree by weighted entropy gain.

    Returns (feature, threshold, left, right, value, n_nodes). Leaves have
    feature -1; ``value`` is the weighted positive fraction of the node.
    Samples with ``x <= threshold`` go left.
    """
    np.random.seed(seed)
    n, d = X.shape
    feature = np.full(capacity, -1, np.int64)
    threshold = np.zeros(capacity)
    left = np.full(capacity, -1, np.int64)
    right = np.full(capacity, -1, np.int64)
    value = np.zeros(capacity)

    order = np.arange(n)
    scratch = np.empty(n, np.int64)
    st_node = np.empty(capacity, np.int64)
    st_start = np.empty(capacity, np.int64)
    st_end = np.empty(capacity, np.int64)
    st_depth = np.empty(capacity, np.int64)
    feats = np.arange(d)
    unit = True
    for i in range(n):
        if w[i] != 1.0:
            unit = False
            break
    table = np.empty(n + 1 if unit else 0)
    if unit:
        table[0] = 0.0
        for k in range(1, n + 1):
            table[k] = k * np.log2(k)

    top = 1
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = n
    st_depth[0] = 0
    n_nodes = 1

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        m = end - start

        wpos = 0.0
        wneg = 0.0
        for k in range(start, end):
            i = order[k]
            if y[i] == 1:
                wpos += w[i]
            else:
                wneg += w[i]
        total = wpos + wneg
        value[node] = wpos / total if total > 0.0 else 0.0
        if depth >= max_depth or m < min_split or wpos == 0.0 or wneg == 0.0:
            continue
        if n_nodes + 2 > capacity:
            continue

        parent_h = _entropy(wpos, wneg)
        if max_features < d:
            np.random.shuffle(feats)
        best_gain = -1.0
        best_f = -1
        best_t = 0.0
        visited = 0
        vals = np.empty(m)
        for fi in range(d):
            f = feats[fi]
            vmin = np.inf
            vmax = -np.inf
            for k in range(m):
                v = X[order[start + k], f]
                vals[k] = v
                if v < vmin:
                    vmin = v
                if v > vmax:
                    vmax = v
            if vmax <= vmin:
                continue
            visited += 1
            if random_thresholds:
                t = vmin + np.random.random() * (vmax - vmin)
                if t >= vmax:
                    t = vmin
                lpos = 0.0
                lneg = 0.0
                for k in range(m):
                    if vals[k] <= t:
                        i = order[start + k]
                        if y[i] == 1:
                            lpos += w[i]
                        else:
                            lneg += w[i]
                g = parent_h - _children(wpos, wneg, lpos, lneg, table) / total
                if g > best_gain or (g == best_gain and (f < best_f or (f == best_f and t < best_t))):
                    best_gain = g
                    best_f = f
                    best_t = t
            else:
                srt = np.argsort(vals, kind="mergesort")
                lpos = 0.0
                lneg = 0.0
                for k in range(m - 1):
                    i = order[start + srt[k]]
                    if y[i] == 1:
                        lpos += w[i]
                    else:
                        lneg += w[i]
                    a = vals[srt[k]]
                    b = vals[srt[k + 1]]
                    if a < b:
                        t = 0.5 * (a + b)
                        if t >= b:
                            t = a
                        g = parent_h - _children(wpos, wneg, lpos, lneg, table) / total
                        if g > best_gain or (g == best_gain and (f < best_f or (f == best_f and t < best_t))):
                            best_gain = g
                            best_f = f
                            best_t = t
            if visited >= max_features:
                break

        if best_f < 0:
            continue

        # stable partition of order[start:end] on the chosen split
        nl = 0
        for k in range(start, end):
            if X[order[k], best_f] <= best_t:
                scratch[nl] = order[k]
                nl += 1
        nr = nl
        for k in range(start, end):
            if X[order[k], best_f] > best_t:
                scratch[nr] = order[k]
                nr += 1
        for k in range(m):
            order[start + k] = scratch[k]

        feature[node] = best_f
        threshold[node] = best_t
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        left[node] = lc
        right[node] = rc
        st_node[top] = rc
        st_start[top] = start + nl
        st_end[top] = end
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = lc
        st_start[top] = start
        st_end[top] = start + nl
        st_depth[top] = depth + 1
        top += 1

    return feature, threshold, left, right, value, n_nodes


@njit(cache=True)
def tree_values(feature, threshold, left, right, value, X):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]
    return out


@njit(cache=True)
def perceptron(X, s, eta, max_epochs, seed):
    """Rosenblatt updates on signed labels ``s``; stops after a clean epoch."""
    np.random.seed(seed)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(max_epochs):
        mistakes = 0
        for i in np.random.permutation(n):
            m = b
            for j in range(d):
                m += w[j] * X[i, j]
            if s[i] * m <= 0.0:
                for j in range(d):
                    w[j] += eta * s[i] * X[i, j]
                b += eta * s[i]
                mistakes += 1
        if mistakes == 0:
            break
    return w, b


@njit(cache=True)
def passive_aggressive(X, s, C, max_epochs, seed):
    """PA-I with the bias folded in as a constant unit feature."""
    np.random.seed(seed)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(max_epochs):
        updates = 0
        for i in np.random.permutation(n):
            m = b
            sq = 1.0
            for j in range(d):
                m += w[j] * X[i, j]
                sq += X[i, j] * X[i, j]
            loss = 1.0 - s[i] * m
            if loss > 0.0:
                tau = min(C, loss / sq)
                for j in range(d):
                    w[j] += tau * s[i] * X[i, j]
                b += tau * s[i]
                updates += 1
        if updates == 0:
            break
    return w, b


@njit(cache=True)
def sgd_hinge(X, s, lam, eta0, epochs, seed):
    """Per-sample subgradient steps on ``lam/2 |w|^2 + hinge``."""
    np.random.seed(seed)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for e in range(epochs):
        lr = eta0 / (1.0 + e * lam)
        for i in np.random.permutation(n):
            m = b
            for j in range(d):
                m += w[j] * X[i, j]
            shrink = 1.0 - lr * lam
            for j in range(d):
                w[j] *= shrink
            if s[i] * m < 1.0:
                for j in range(d):
                    w[j] += lr * s[i] * X[i, j]
                b += lr * s[i]
    return w, b
