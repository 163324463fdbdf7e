"""Heat-bath single-edge dynamics on an explicit small complete graph.

State is the open-edge subset over the C(n,2) slots of K_n, in lexicographic
(i < j) order.  One step picks a uniform slot e and re-samples it: if e is a
cut edge (its endpoints are disconnected without it) it opens with probability
p/(p + q(1-p)), otherwise with probability p.  That ratio is exactly the
heat-bath acceptance for the Gibbs weights, since closing a cut edge adds one
component (a factor q) while a non-cut edge changes nothing but the edge count.

Single steps are plain Python; trajectories run in a compiled kernel since the
chain needs ~C(n,2) steps per sweep.  n is capped at 5000: connectivity is
answered by a bounded BFS, which is only sane while states stay small.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._kernels import _glauber_kernel
from .mean_field import (IntervalSpec, StatsReport, default_interval_spec,
                         omega_default)
from .model_core import ModelParams

_N_CAP = 5000
_SEED_BOUND = 2 ** 32


def _num_slots(n: int) -> int:
    return n * (n - 1) // 2


def slot_of(n: int, i: int, j: int) -> int:
    """Lexicographic slot index of the edge {i, j}, i < j."""
    if not 0 <= i < j < n:
        raise ValueError(f"need 0 <= i < j < n, got ({i},{j}) with n={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def endpoints_of(n: int, slot: int) -> Tuple[int, int]:
    if not 0 <= slot < _num_slots(n):
        raise ValueError(f"slot {slot} out of range for n={n}")
    i = 0
    offset = slot
    row = n - 1
    while offset >= row:
        offset -= row
        i += 1
        row -= 1
    return i, i + 1 + offset


@dataclass(frozen=True)
class EdgeConfig:
    """Open-edge bitset over K_n slots; component labels are rebuilt on demand."""

    n: int
    open: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.n > _N_CAP:
            raise ValueError(f"n must be in [1, {_N_CAP}]")
        if len(self.open) != _num_slots(self.n):
            raise ValueError("open bitset length must be C(n,2)")

    @classmethod
    def empty(cls, n: int) -> "EdgeConfig":
        return cls(n=n, open=np.zeros(_num_slots(n), dtype=bool))

    @classmethod
    def full(cls, n: int) -> "EdgeConfig":
        return cls(n=n, open=np.ones(_num_slots(n), dtype=bool))

    def open_edge_count(self) -> int:
        return int(self.open.sum())

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        slots = np.flatnonzero(self.open)
        for s in slots:
            i, j = endpoints_of(self.n, int(s))
            adj[i, j] = adj[j, i] = True
        return adj

    def component_index(self) -> np.ndarray:
        """Vertex -> component label of the open graph."""
        adj = self.adjacency()
        labels = np.full(self.n, -1, dtype=np.int64)
        nxt = 0
        for s in range(self.n):
            if labels[s] >= 0:
                continue
            stack = [s]
            labels[s] = nxt
            while stack:
                v = stack.pop()
                for w in np.flatnonzero(adj[v]):
                    if labels[w] < 0:
                        labels[w] = nxt
                        stack.append(int(w))
            nxt += 1
        return labels

    def component_sizes(self) -> np.ndarray:
        labels = self.component_index()
        return np.bincount(labels).astype(np.int64)


def heat_bath_open_probability(params: ModelParams, cut: bool) -> float:
    p, q = params.p, params.q
    if q < 1.0:
        raise ValueError(f"heat-bath chain needs q >= 1, got {q}")
    p_cut = p / (p + q * (1.0 - p))
    assert p_cut <= p + 1e-15  # q >= 1 makes the cut-edge probability smaller
    return p_cut if cut else p


def is_cut_edge(config: EdgeConfig, slot: int) -> bool:
    """True iff the slot's endpoints are disconnected in the open graph minus it."""
    a, b = endpoints_of(config.n, slot)
    adj = config.adjacency()
    adj[a, b] = adj[b, a] = False
    seen = np.zeros(config.n, dtype=bool)
    seen[a] = True
    stack = [a]
    while stack:
        v = stack.pop()
        for w in np.flatnonzero(adj[v]):
            if w == b:
                return False
            if not seen[w]:
                seen[w] = True
                stack.append(int(w))
    return True


def glauber_step(config: EdgeConfig, params: ModelParams,
                 rng: np.random.Generator) -> EdgeConfig:
    """One heat-bath update of a uniformly chosen edge slot."""
    slot = int(rng.integers(_num_slots(config.n)))
    p_open = heat_bath_open_probability(params, is_cut_edge(config, slot))
    new_open = config.open.copy()
    new_open[slot] = rng.random() < p_open
    return EdgeConfig(n=config.n, open=new_open)


@dataclass
class GlauberTrajectory:
    reports: List[StatsReport]
    open_edges: List[int]
    steps: List[int]
    final: EdgeConfig


def glauber_trajectory(start: EdgeConfig, params: ModelParams, steps: int,
                       observers: Sequence[str], rng: np.random.Generator, *,
                       record_every: int = 1,
                       interval_spec: Optional[IntervalSpec] = None,
                       small_threshold: Optional[int] = None) -> GlauberTrajectory:
    """Run `steps` kernel updates, recording stats every `record_every` steps."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    n = start.n
    if interval_spec is None:
        interval_spec = default_interval_spec(n)
    if small_threshold is None:
        small_threshold = max(1, int(omega_default(max(n, 2))[1]))
    if steps == 0:
        return GlauberTrajectory(reports=[], open_edges=[], steps=[], final=start)

    ks = range(1, interval_spec.k_max + 1)
    lo = np.array([interval_spec.bounds(k)[0] for k in ks], dtype=np.float64)
    hi = np.array([interval_spec.bounds(k)[1] for k in ks], dtype=np.float64)
    adj = start.adjacency()
    seed = int(rng.integers(_SEED_BOUND))
    rec = _glauber_kernel(adj, n, params.p, params.q, steps, seed,
                          record_every, small_threshold, lo, hi)

    reports: List[StatsReport] = []
    open_edges: List[int] = []
    step_ids: List[int] = []
    for row in rec:
        # row: step, open, ncomp, L1, L2, R1, R2, isolated, R_tilde, N_1..N_k
        interval_counts = {k: int(row[9 + idx]) for idx, k in enumerate(ks)}
        reports.append(StatsReport(
            L1=int(row[3]), L2=int(row[4]), R1=int(row[5]), R2=int(row[6]),
            R_tilde=int(row[8]), isolated=int(row[7]),
            interval_counts=interval_counts))
        open_edges.append(int(row[1]))
        step_ids.append(int(row[0]))
    final = EdgeConfig(n=n, open=_adjacency_to_slots(adj, n))
    return GlauberTrajectory(reports=reports, open_edges=open_edges,
                             steps=step_ids, final=final)


def _adjacency_to_slots(adj: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n, k=1)
    return adj[iu].astype(bool)
