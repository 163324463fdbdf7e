"""Numba kernels for the hot loops: exact G(m,p) exploration and Glauber sweeps.

Everything here is driven by numba's own Mersenne-Twister stream, seeded
explicitly per call; results are deterministic functions of (arguments, seed).
The binomial sampler is exact inversion (no normal approximation), chunked so
the starting pmf (1-p)^n never underflows.
"""

import numpy as np
from numba import njit

# Keep (1-p)^n representable per inversion chunk: n*|log1p(-p)| <= 600.
_CHUNK_LOG_CAP = 600.0


@njit(cache=True)
def _binomial_chunk(n, p):
    # inversion: walk the cdf; exact for any n, p in [0,1)
    if n <= 0 or p <= 0.0:
        return 0
    u = np.random.random()
    q = 1.0 - p
    pmf = q ** n
    cdf = pmf
    k = 0
    ratio = p / q
    while u > cdf and k < n:
        pmf *= ratio * (n - k) / (k + 1)
        k += 1
        cdf += pmf
    return k


@njit(cache=True)
def _binomial(n, p):
    if n <= 0 or p <= 0.0:
        return 0
    cap = int(_CHUNK_LOG_CAP / max(-np.log1p(-p), 1e-300))
    if cap < 1:
        cap = 1
    total = 0
    left = n
    while left > cap:
        total += _binomial_chunk(cap, p)
        left -= cap
    total += _binomial_chunk(left, p)
    return total


@njit(cache=True)
def _explore(m, p, seed):
    """Component sizes and edge surpluses of G(m,p) via the exploration process.

    Each vertex, when processed, resolves its pairs against (a) all still
    unvisited vertices (binomial draw: new members) and (b) the rest of the
    current frontier (binomial draw: surplus edges).  Every unordered pair is
    resolved exactly once; the returned pair count must equal C(m,2).
    """
    np.random.seed(seed)
    sizes = np.empty(m, np.int64)
    surpluses = np.empty(m, np.int64)
    ncomp = 0
    unvisited = m
    pairs = 0
    while unvisited > 0:
        unvisited -= 1  # take one root for a new component
        size = 1
        frontier = 1
        surplus = 0
        while frontier > 0:
            frontier -= 1  # process one discovered vertex
            pairs += unvisited + frontier
            grow = _binomial(unvisited, p)
            extra = _binomial(frontier, p)
            unvisited -= grow
            size += grow
            frontier += grow
            surplus += extra
        sizes[ncomp] = size
        surpluses[ncomp] = surplus
        ncomp += 1
    return sizes[:ncomp], surpluses[:ncomp], pairs


@njit(cache=True)
def _component_stats(adj, n, buf, small_threshold, interval_lo, interval_hi):
    """Label components of the open graph; return packed observables.

    Output vector:
    [ncomp, L1, L2, R1, R2, isolated, R_tilde, count(I_1), ..., count(I_k)].
    `buf` is an int64 scratch array of length >= 2n.
    """
    nk = interval_lo.shape[0]
    out = np.zeros(7 + nk, np.float64)
    visited = buf[:n]
    stack = buf[n:2 * n]
    visited[:] = 0
    l1 = 0
    l2 = 0
    r1 = 0.0
    r_tilde = 0.0
    ncomp = 0
    isolated = 0
    for s in range(n):
        if visited[s]:
            continue
        visited[s] = 1
        top = 0
        stack[top] = s
        top += 1
        size = 0
        while top > 0:
            top -= 1
            v = stack[top]
            size += 1
            for w in range(n):
                if adj[v, w] and not visited[w]:
                    visited[w] = 1
                    stack[top] = w
                    top += 1
        ncomp += 1
        r1 += float(size) * size
        if size <= small_threshold:
            r_tilde += float(size) * size
        if size == 1:
            isolated += 1
        if size > l1:
            l2 = l1
            l1 = size
        elif size > l2:
            l2 = size
        for k in range(nk):
            if interval_lo[k] < size <= interval_hi[k]:
                out[7 + k] += 1.0
                break
    out[0] = ncomp
    out[1] = l1
    out[2] = l2
    out[3] = r1
    out[4] = r1 - float(l1) * l1
    out[5] = isolated
    out[6] = r_tilde
    return out


@njit(cache=True)
def _glauber_kernel(adj, n, p, q, steps, seed, record_every, small_threshold,
                    interval_lo, interval_hi):
    """Run `steps` heat-bath edge updates in place on the adjacency matrix.

    Records, every `record_every` steps, the row
    [step, open_count, ncomp, L1, L2, R1, R2, isolated, R_tilde, N_1..N_k].
    A selected closed-or-open slot {a,b} is a cut edge iff a and b are
    disconnected in the configuration minus that edge.
    """
    np.random.seed(seed)
    p_cut = p / (p + q * (1.0 - p))
    nk = interval_lo.shape[0]
    nrec = 0 if record_every <= 0 else steps // record_every
    rec = np.zeros((nrec, 9 + nk), np.float64)
    buf = np.zeros(2 * n, np.int64)
    visited = np.zeros(n, np.int64)
    stack = np.zeros(n, np.int64)
    open_count = 0
    for a in range(n):
        for b in range(a + 1, n):
            if adj[a, b]:
                open_count += 1
    stamp = 0
    ri = 0
    for t in range(steps):
        # uniform edge slot of the complete graph
        a = np.random.randint(0, n)
        b = np.random.randint(0, n - 1)
        if b >= a:
            b += 1
        was_open = adj[a, b]
        # connectivity of a..b avoiding the slot itself
        stamp += 1
        cut = True
        visited[a] = stamp
        top = 0
        stack[top] = a
        top += 1
        while top > 0 and cut:
            top -= 1
            v = stack[top]
            for w in range(n):
                if adj[v, w] and visited[w] != stamp:
                    if (v == a and w == b) or (v == b and w == a):
                        continue
                    if w == b:
                        cut = False
                        break
                    visited[w] = stamp
                    stack[top] = w
                    top += 1
        p_open = p_cut if cut else p
        now_open = np.random.random() < p_open
        adj[a, b] = now_open
        adj[b, a] = now_open
        if now_open and not was_open:
            open_count += 1
        elif was_open and not now_open:
            open_count -= 1
        if record_every > 0 and (t + 1) % record_every == 0 and ri < nrec:
            cs = _component_stats(adj, n, buf, small_threshold, interval_lo, interval_hi)
            rec[ri, 0] = t + 1
            rec[ri, 1] = open_count
            rec[ri, 2:] = cs
            ri += 1
    return rec
