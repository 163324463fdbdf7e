"""Exact-law G(m,p) component sampling plus an exhaustive tiny-m oracle.

The sampler realizes the exploration process: each processed vertex resolves
its undecided pairs with one binomial draw against the unvisited set (new
members) and one against the remaining frontier (surplus edges), so every pair
is decided by exactly one Bernoulli(p) and the size multiset carries the exact
G(m,p) law.  A component's surplus is (edges - size + 1); surplus 0 means tree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from ._kernels import _explore

_SEED_BOUND = 2 ** 32


@dataclass(frozen=True)
class PercolationOutcome:
    sizes: np.ndarray
    surpluses: np.ndarray
    m: int
    p: float

    def __post_init__(self):
        if int(self.sizes.sum()) != self.m:
            raise ValueError("component sizes must sum to m")
        if len(self.surpluses) and int(self.surpluses.min()) < 0:
            raise ValueError("surpluses must be nonnegative")

    def size_multiset(self) -> Tuple[int, ...]:
        return tuple(sorted((int(s) for s in self.sizes), reverse=True))

    @property
    def edges(self) -> int:
        return int(self.sizes.sum()) - len(self.sizes) + int(self.surpluses.sum())


def sample_components(m: int, p: float, rng: np.random.Generator) -> PercolationOutcome:
    """Sample the component sizes (and surpluses) of G(m,p)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must be in [0,1); build the complete graph directly for p=1 (got {p})")
    if m == 0:
        return PercolationOutcome(sizes=np.empty(0, np.int64),
                                  surpluses=np.empty(0, np.int64), m=0, p=p)
    seed = int(rng.integers(_SEED_BOUND))
    sizes, surpluses, pairs = _explore(m, p, seed)
    if pairs != m * (m - 1) // 2:
        raise AssertionError(f"pair coverage {pairs} != C({m},2)")
    return PercolationOutcome(sizes=sizes, surpluses=surpluses, m=m, p=p)


def exact_gnp_small(m: int, p: float) -> Dict[Tuple[int, ...], float]:
    """Exact size-multiset distribution of G(m,p) by edge-subset enumeration.

    Multisets are keyed as size tuples sorted descending.  Refuses m > 6
    (2^15 graphs is the agreed cap).
    """
    if m > 6:
        raise ValueError(f"exact enumeration capped at m=6, got {m}")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0,1]")
    if m == 0:
        return {(): 1.0}
    edges = list(itertools.combinations(range(m), 2))
    ne = len(edges)
    out: Dict[Tuple[int, ...], float] = {}
    for mask in range(1 << ne):
        parent = list(range(m))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        k = 0
        for i, (a, b) in enumerate(edges):
            if mask >> i & 1:
                k += 1
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
        prob = p ** k * (1.0 - p) ** (ne - k)
        counts: Dict[int, int] = {}
        for v in range(m):
            r = find(v)
            counts[r] = counts.get(r, 0) + 1
        key = tuple(sorted(counts.values(), reverse=True))
        out[key] = out.get(key, 0.0) + prob
    total = sum(out.values())
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"enumeration mass {total} != 1")
    return out


def tree_count_statistics(n: int, p: float, k_list: Sequence[int],
                          replicas: int, rng: np.random.Generator
                          ) -> Dict[int, Tuple[float, float]]:
    """Monte Carlo mean and variance of t_k, the number of size-k trees.

    Trees are the surplus-0 components of independent G(n,p) samples; one
    sample per replica, each on its own spawned stream.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    ks = [int(k) for k in k_list]
    counts = np.zeros((replicas, len(ks)), dtype=np.float64)
    streams = rng.spawn(replicas)
    for i, sub in enumerate(streams):
        out = sample_components(n, p, sub)
        tree_sizes = out.sizes[out.surpluses == 0]
        for j, k in enumerate(ks):
            counts[i, j] = np.count_nonzero(tree_sizes == k)
    return {k: (float(counts[:, j].mean()), float(counts[:, j].var(ddof=1)) if replicas > 1 else 0.0)
            for j, k in enumerate(ks)}
