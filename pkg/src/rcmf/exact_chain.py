"""Exhaustive oracles on tiny complete graphs: exact Gibbs vector, exact
transition matrices for the three chains, spectral gaps and mixing times.

States are the 2^C(n,2) edge subsets of K_n, indexed by bitmask over the
lexicographic (i < j) slot order.  Everything is dense; n is capped at 4
(64 states), which is what makes "exact" affordable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .model_core import ModelParams

_N_CAP = 4


def _edges(n: int) -> List[Tuple[int, int]]:
    return list(itertools.combinations(range(n), 2))


def _components_of_mask(n: int, mask: int, edges: List[Tuple[int, int]]) -> List[List[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, (a, b) in enumerate(edges):
        if mask >> i & 1:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups: Dict[int, List[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def _check_n(n: int, params: ModelParams) -> None:
    if n > _N_CAP:
        raise ValueError(f"exact enumeration capped at n={_N_CAP}, got {n}")
    if params.n != n:
        raise ValueError(f"params.n={params.n} disagrees with n={n}")


@dataclass
class ChainMatrix:
    states: List[int]
    matrix: np.ndarray
    pi: np.ndarray

    def stationarity_residual(self) -> float:
        return float(np.max(np.abs(self.pi @ self.matrix - self.pi)))

    def reversibility_residual(self) -> float:
        flow = self.pi[:, None] * self.matrix
        return float(np.max(np.abs(flow - flow.T)))


def gibbs_exact(n: int, params: ModelParams) -> np.ndarray:
    """Normalized Gibbs vector over all edge subsets of K_n."""
    _check_n(n, params)
    edges = _edges(n)
    ne = len(edges)
    p, q = params.p, params.q
    w = np.empty(1 << ne)
    for mask in range(1 << ne):
        k = bin(mask).count("1")
        c = len(_components_of_mask(n, mask, edges))
        w[mask] = p ** k * (1 - p) ** (ne - k) * q ** c
    return w / w.sum()


def _percolation_law_on_slots(slots: List[int], p: float) -> Dict[int, float]:
    """Distribution of the open subset (as a mask) over the given edge slots."""
    out: Dict[int, float] = {}
    ns = len(slots)
    for sub in range(1 << ns):
        mask = 0
        k = 0
        for i, s in enumerate(slots):
            if sub >> i & 1:
                mask |= 1 << s
                k += 1
        out[mask] = out.get(mask, 0.0) + p ** k * (1 - p) ** (ns - k)
    return out


def cm_matrix_exact(n: int, params: ModelParams, *, allow_q1: bool = False) -> ChainMatrix:
    """Exact one-step law of the component-activation chain.

    Activation subsets of the components are enumerated with their product
    probabilities; edges with both endpoints active are resampled at rate p,
    all other edges survive untouched.  An open edge can never straddle the
    active/inactive boundary (its endpoints share a component); this is
    asserted per state.
    """
    _check_n(n, params)
    if params.q <= 1.0 and not (allow_q1 and params.q == 1.0):
        raise ValueError(f"activation dynamics needs q > 1 (or the q=1 flag), got q={params.q}")
    r = 1.0 / params.q
    edges = _edges(n)
    ne = len(edges)
    slot_of = {e: i for i, e in enumerate(edges)}
    nstates = 1 << ne
    P = np.zeros((nstates, nstates))
    for x in range(nstates):
        comps = _components_of_mask(n, x, edges)
        k = len(comps)
        for act in range(1 << k):
            prob_act = 1.0
            active: List[int] = []
            for i in range(k):
                if act >> i & 1:
                    prob_act *= r
                    active.extend(comps[i])
                else:
                    prob_act *= 1.0 - r
            if prob_act == 0.0:
                continue
            active_set = set(active)
            resample = [slot_of[e] for e in edges
                        if e[0] in active_set and e[1] in active_set]
            keep_mask = 0
            for i, (a, b) in enumerate(edges):
                if x >> i & 1:
                    in_a, in_b = a in active_set, b in active_set
                    assert in_a == in_b, "open edge straddles the activation boundary"
                    if not in_a:
                        keep_mask |= 1 << i
            for sub_mask, prob_perc in _percolation_law_on_slots(resample, params.p).items():
                P[x, keep_mask | sub_mask] += prob_act * prob_perc
    return ChainMatrix(states=list(range(nstates)), matrix=P,
                       pi=gibbs_exact(n, params))


def sw_matrix_exact(n: int, params: ModelParams) -> ChainMatrix:
    """Exact one-step law of the color-class re-percolation chain (integer q).

    Components are colored uniformly; every within-class pair is resampled at
    rate p and all cross-class edges come out closed (they were closed before,
    since an open edge forces equal colors).
    """
    _check_n(n, params)
    q = params.q
    if q != int(q) or q < 1:
        raise ValueError(f"color dynamics needs integer q >= 1, got {q}")
    q = int(q)
    edges = _edges(n)
    ne = len(edges)
    slot_of = {e: i for i, e in enumerate(edges)}
    nstates = 1 << ne
    P = np.zeros((nstates, nstates))
    for x in range(nstates):
        comps = _components_of_mask(n, x, edges)
        k = len(comps)
        prob_color = q ** (-k)
        for coloring in itertools.product(range(q), repeat=k):
            classes: Dict[int, List[int]] = {}
            for i, c in enumerate(coloring):
                classes.setdefault(c, []).extend(comps[i])
            resample = []
            for verts in classes.values():
                vs = set(verts)
                resample.extend(slot_of[e] for e in edges
                                if e[0] in vs and e[1] in vs)
            for sub_mask, prob_perc in _percolation_law_on_slots(resample, params.p).items():
                P[x, sub_mask] += prob_color * prob_perc
    return ChainMatrix(states=list(range(nstates)), matrix=P,
                       pi=gibbs_exact(n, params))


def glauber_matrix_exact(n: int, params: ModelParams, *, allow_q1: bool = False) -> ChainMatrix:
    """Exact one-step law of the heat-bath single-edge chain."""
    _check_n(n, params)
    if params.q < 1.0:
        raise ValueError(f"heat-bath chain needs q >= 1, got {params.q}")
    edges = _edges(n)
    ne = len(edges)
    nstates = 1 << ne
    p = params.p
    p_cut = p / (p + params.q * (1 - p))
    P = np.zeros((nstates, nstates))
    for x in range(nstates):
        for i, (a, b) in enumerate(edges):
            without = x & ~(1 << i)
            comps = _components_of_mask(n, without, edges)
            connected = any(a in c and b in c for c in comps)
            p_open = p if connected else p_cut
            P[x, x | (1 << i)] += p_open / ne
            P[x, without] += (1 - p_open) / ne
    return ChainMatrix(states=list(range(nstates)), matrix=P,
                       pi=gibbs_exact(n, params))


def spectral_gap(chain: ChainMatrix, tol: float = 1e-9) -> float:
    """1 - (second largest eigenvalue modulus) of the pi-symmetrized matrix."""
    if chain.reversibility_residual() > tol:
        raise ValueError("spectral gap requires a reversible chain")
    d = np.sqrt(chain.pi)
    sym = (d[:, None] * chain.matrix) / d[None, :]
    vals = np.linalg.eigvalsh(0.5 * (sym + sym.T))
    mods = np.sort(np.abs(vals))[::-1]
    return float(1.0 - mods[1])


def _tv(row: np.ndarray, pi: np.ndarray) -> float:
    return 0.5 * math.fsum(abs(float(a) - float(b)) for a, b in zip(row, pi))


def mixing_time_exact(chain: ChainMatrix, eps: float = 0.25,
                      max_steps: int = 100000) -> int:
    """Smallest t with max-over-starts TV(P^t(x, .), pi) <= eps."""
    pi = chain.pi
    pt = np.eye(len(pi))
    for t in range(max_steps + 1):
        worst = max(_tv(pt[i], pi) for i in range(len(pi)))
        if worst <= eps:
            return t
        pt = pt @ chain.matrix
    raise RuntimeError(f"no mixing within {max_steps} steps")


def cm_step_edge(n: int, mask: int, params: ModelParams,
                 rng: np.random.Generator, *, allow_q1: bool = False) -> int:
    """Simulate one activation step at the edge level (tiny n only).

    Companion sampler for the exact matrix: used to cross-check simulated
    transition frequencies against cm_matrix_exact.
    """
    _check_n(n, params)
    if params.q <= 1.0 and not (allow_q1 and params.q == 1.0):
        raise ValueError("needs q > 1 or the q=1 flag")
    r = 1.0 / params.q
    edges = _edges(n)
    comps = _components_of_mask(n, mask, edges)
    active: set = set()
    for comp in comps:
        if rng.random() < r:
            active.update(comp)
    new_mask = 0
    for i, (a, b) in enumerate(edges):
        if a in active and b in active:
            if rng.random() < params.p:
                new_mask |= 1 << i
        elif mask >> i & 1:
            in_a, in_b = a in active, b in active
            assert in_a == in_b, "open edge straddles the activation boundary"
            new_mask |= 1 << i
    return new_mask
