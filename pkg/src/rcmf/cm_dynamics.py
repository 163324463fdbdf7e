"""Component-activation dynamics on the mean-field configuration.

One step: activate each component independently with probability 1/q, delete
the activated components, and replace them by a fresh G(A, p) sample on the
A activated vertices.  Inactive components keep their ids and sizes.  The
integer-q color variant recolors every component uniformly in {1..q} and
re-percolates each color class independently.

q = 1 (activate everything, i.e. full re-randomization to G(n,p)) is outside
the dynamics proper and is only reachable through an explicit flag; it is kept
as a distribution oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from .mean_field import (ComponentState, IntervalSpec, StatsReport,
                         default_interval_spec, from_sizes, omega_default, stats)
from .model_core import ModelParams, drift_evaluate
from .percolation import sample_components

OBSERVER_NAMES = frozenset({"stats", "sq_tracker", "drift_residual", "step_trace"})


@dataclass(frozen=True)
class StepTrace:
    """Bookkeeping for one activation/percolation step."""

    activated_ids: np.ndarray
    active_vertices: int
    largest_activated: bool
    new_component_ids: np.ndarray
    new_component_surpluses: np.ndarray


@dataclass
class SQTracker:
    """Tracks the distinguished component set S and Q = R1 - (squared mass of S).

    Rules per step: members of S activated by the dynamics leave S; the largest
    newly created component joins S (ties broken toward the lowest fresh id).
    """

    s_ids: Set[int]
    q_value: float

    @classmethod
    def fresh(cls) -> "SQTracker":
        return cls(s_ids=set(), q_value=0.0)

    def update(self, state: ComponentState, trace: StepTrace) -> None:
        self.s_ids -= set(int(i) for i in trace.activated_ids)
        if len(trace.new_component_ids):
            new_ids = trace.new_component_ids
            pos = {int(cid): i for i, cid in enumerate(state.ids)}
            new_sizes = np.array([state.sizes[pos[int(cid)]] for cid in new_ids])
            best = new_ids[int(np.argmax(new_sizes))]  # argmax -> lowest id wins ties
            self.s_ids.add(int(best))
        sq = state.sizes.astype(np.float64) ** 2
        in_s = np.isin(state.ids, np.fromiter(self.s_ids, dtype=np.int64, count=len(self.s_ids)))
        self.q_value = float(sq.sum() - sq[in_s].sum())


def _check_q(params: ModelParams, allow_q1: bool) -> float:
    if params.q > 1.0:
        return 1.0 / params.q
    if allow_q1 and params.q == 1.0:
        return 1.0
    raise ValueError(f"activation dynamics needs q > 1 (or the explicit q=1 flag), got q={params.q}")


def cm_step(state: ComponentState, params: ModelParams, rng: np.random.Generator,
            *, allow_q1: bool = False) -> Tuple[ComponentState, StepTrace]:
    """One activation/percolation step; returns the new state and its trace."""
    r = _check_q(params, allow_q1)
    k = state.num_components
    bits = rng.random(k) < r
    active = int(state.sizes[bits].sum())
    # representative largest component: lowest id among the maximal sizes
    largest_idx = int(np.argmax(state.sizes))
    outcome = sample_components(active, params.p, rng)
    n_new = len(outcome.sizes)
    new_ids = np.arange(state.next_id, state.next_id + n_new, dtype=np.int64)
    new_state = ComponentState(
        ids=np.concatenate([state.ids[~bits], new_ids]),
        sizes=np.concatenate([state.sizes[~bits], outcome.sizes]),
        n=state.n,
        next_id=state.next_id + n_new,
    )
    trace = StepTrace(
        activated_ids=state.ids[bits].copy(),
        active_vertices=active,
        largest_activated=bool(bits[largest_idx]),
        new_component_ids=new_ids,
        new_component_surpluses=outcome.surpluses,
    )
    return new_state, trace


def sw_step(state: ComponentState, params: ModelParams,
            rng: np.random.Generator) -> ComponentState:
    """Color-class re-percolation step; q must be a positive integer."""
    q = params.q
    if q != int(q) or q < 1:
        raise ValueError(f"color dynamics needs integer q >= 1, got {q}")
    q = int(q)
    colors = rng.integers(0, q, size=state.num_components)
    sizes_parts: List[np.ndarray] = []
    next_id = state.next_id
    id_parts: List[np.ndarray] = []
    for c in range(q):
        m_c = int(state.sizes[colors == c].sum())
        outcome = sample_components(m_c, params.p, rng)
        sizes_parts.append(outcome.sizes)
        id_parts.append(np.arange(next_id, next_id + len(outcome.sizes), dtype=np.int64))
        next_id += len(outcome.sizes)
    return ComponentState(ids=np.concatenate(id_parts),
                          sizes=np.concatenate(sizes_parts),
                          n=state.n, next_id=next_id)


@dataclass
class TrajectoryResult:
    reports: List[StatsReport]
    sq_series: Optional[List[float]] = None
    drift_residuals: Optional[List[Tuple[int, float]]] = None
    traces: Optional[List[StepTrace]] = None
    active_counts: Optional[List[int]] = None
    lambda_events: Optional[List[bool]] = None


def run_trajectory(start: ComponentState, params: ModelParams, steps: int,
                   observers: Sequence[str], rng: np.random.Generator, *,
                   allow_q1: bool = False,
                   interval_spec: Optional[IntervalSpec] = None,
                   small_threshold: Optional[int] = None) -> TrajectoryResult:
    """Run `steps` activation steps, emitting one StatsReport per step.

    Observers: "stats" (always on), "sq_tracker", "drift_residual" (recorded
    only on steps that activate the largest component while L1/n >= 0.01, to
    stay clear of the undefined region of phi), "step_trace".
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    unknown = set(observers) - OBSERVER_NAMES
    if unknown:
        raise ValueError(f"unknown observers: {sorted(unknown)}")
    if interval_spec is None:
        interval_spec = default_interval_spec(start.n)
    if small_threshold is None:
        small_threshold = max(1, int(omega_default(max(start.n, 2))[1]))

    want_sq = "sq_tracker" in observers
    want_drift = "drift_residual" in observers
    want_trace = "step_trace" in observers

    result = TrajectoryResult(reports=[], active_counts=[], lambda_events=[])
    tracker = SQTracker.fresh() if want_sq else None
    if want_sq:
        result.sq_series = []
    if want_drift:
        result.drift_residuals = []
    if want_trace:
        result.traces = []

    state = start
    for t in range(steps):
        theta_before = float(state.sizes.max()) / state.n
        state_next, trace = cm_step(state, params, rng, allow_q1=allow_q1)
        report = stats(state_next, interval_spec, small_threshold)
        result.reports.append(report)
        result.active_counts.append(trace.active_vertices)
        result.lambda_events.append(trace.largest_activated)
        if want_trace:
            result.traces.append(trace)
        if want_sq:
            tracker.update(state_next, trace)
            result.sq_series.append(tracker.q_value)
        if want_drift and trace.largest_activated and theta_before >= 0.01:
            ev = drift_evaluate(theta_before, params.lam, params.q)
            if ev.phi_value is not None:
                residual = report.L1 / state.n - ev.phi_value
                result.drift_residuals.append((t, residual))
        state = state_next
    return result


def worst_starts(n: int) -> Tuple[ComponentState, ComponentState]:
    """The two extreme starts: one giant component, and all singletons."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return from_sizes([n]), from_sizes([1] * n)
