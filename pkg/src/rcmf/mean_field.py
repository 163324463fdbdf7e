"""The exchangeable mean-field configuration and its observables.

A configuration is fully described by its multiset of component sizes; vertex
labels are irrelevant on the complete graph.  Components carry stable integer
ids so that couplings and activation traces can refer to them across steps.

Observables follow the usual susceptibility bookkeeping: L_i are the ranked
component sizes, R_i = sum of squared sizes from rank i down, R_tilde the
squared mass of components no larger than a threshold B, plus counts of
components per dyadic-tower size interval

    I_k = ( vartheta n^{2/3} / (2 g^{2^k}),  vartheta n^{2/3} / g^{2^k} ],

for k = 1..k_max.  Intervals are half-open so the counts are disjoint even at
shared endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import math

import numpy as np


@dataclass(frozen=True)
class ComponentState:
    """Identified component sizes summing to n; arrays are id-ordered."""

    ids: np.ndarray
    sizes: np.ndarray
    n: int
    next_id: int

    def __post_init__(self):
        if len(self.ids) != len(self.sizes):
            raise ValueError("ids and sizes must be parallel")
        if len(self.sizes) and int(self.sizes.min()) <= 0:
            raise ValueError("component sizes must be positive")
        if int(self.sizes.sum()) != self.n:
            raise ValueError("sizes must sum to n")
        if len(self.ids) != len(np.unique(self.ids)):
            raise ValueError("component ids must be unique")

    @property
    def num_components(self) -> int:
        return len(self.sizes)

    def size_multiset(self) -> Tuple[int, ...]:
        return tuple(sorted(int(s) for s in self.sizes))


def from_sizes(sizes: Sequence[int]) -> ComponentState:
    """Fresh state from a size sequence; ids are 0..k-1 in input order."""
    arr = np.asarray(sizes, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("need at least one component")
    if arr.min() <= 0:
        raise ValueError("component sizes must be positive")
    k = arr.size
    return ComponentState(ids=np.arange(k, dtype=np.int64), sizes=arr.copy(),
                          n=int(arr.sum()), next_id=k)


@dataclass(frozen=True)
class IntervalSpec:
    """Size intervals I_k for k=1..k_max; g_value >= 2 keeps them disjoint."""

    vartheta: float
    g_value: float
    n: int
    k_max: int = field(default=-1)

    def __post_init__(self):
        if self.vartheta <= 0:
            raise ValueError("vartheta must be positive")
        if self.g_value < 2:
            raise ValueError("g_value must be >= 2 for disjoint intervals")
        if self.k_max < 0:
            object.__setattr__(self, "k_max", self._compute_k_max())

    def _compute_k_max(self) -> int:
        k = 0
        while self.bounds(k + 1)[0] >= 1.0:
            k += 1
            if k > 64:
                break
        return k

    def bounds(self, k: int) -> Tuple[float, float]:
        hi = self.vartheta * self.n ** (2.0 / 3.0) / self.g_value ** (2 ** k)
        return 0.5 * hi, hi

    def counts(self, sizes: np.ndarray) -> Dict[int, int]:
        out = {}
        for k in range(1, self.k_max + 1):
            lo, hi = self.bounds(k)
            out[k] = int(np.count_nonzero((sizes > lo) & (sizes <= hi)))
        return out


def default_interval_spec(n: int, vartheta: float = 4.0, g_value: float = 2.0) -> IntervalSpec:
    return IntervalSpec(vartheta=vartheta, g_value=g_value, n=n)


@dataclass(frozen=True)
class StatsReport:
    """One configuration's observables."""

    L1: int
    L2: int
    R1: int
    R2: int
    R_tilde: int
    isolated: int
    interval_counts: Dict[int, int]
    tree_counts: Optional[Dict[int, int]] = None

    def as_dict(self) -> Dict[str, float]:
        return {"L1": self.L1, "L2": self.L2, "R1": self.R1, "R2": self.R2,
                "R_tilde": self.R_tilde, "isolated": self.isolated,
                "interval_counts": dict(self.interval_counts)}


def stats(state: ComponentState, interval_spec: IntervalSpec,
          small_threshold: int) -> StatsReport:
    """All observables in one pass over the size array."""
    if small_threshold < 1:
        raise ValueError("small_threshold must be >= 1")
    s = state.sizes
    sq = s.astype(np.float64) ** 2
    r1 = int(sq.sum())
    if len(s) >= 2:
        top2 = np.partition(s, len(s) - 2)[-2:]
        l1, l2 = int(top2.max()), int(top2.min())
    else:
        l1, l2 = int(s[0]), 0
    return StatsReport(
        L1=l1,
        L2=l2,
        R1=r1,
        R2=r1 - l1 * l1,
        R_tilde=int(sq[s <= small_threshold].sum()),
        isolated=int(np.count_nonzero(s == 1)),
        interval_counts=interval_spec.counts(s),
    )


def omega_default(n: int) -> Tuple[float, float]:
    """Slow threshold scale: omega = max(2, ln ln ln ln n), and B = n^{2/3}/omega.

    The quadruple log is negative (or undefined) for any practical n, so the
    clamp at 2 is what actually matters at desk scale; omega is a knob, this
    is its safe default.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    x = float(n)
    for _ in range(4):
        if x <= 0.0:
            x = float("-inf")
            break
        x = math.log(x)
    omega = max(2.0, x) if math.isfinite(x) else 2.0
    return omega, n ** (2.0 / 3.0) / omega
