"""Coupling machinery: size matchings, coupled steps, random-walk and binomial
couplings, and the exact local-limit-theorem check.

Two copies of the chain are coupled through a maximal equal-size matching of
their components.  Matched pairs can be driven by shared randomness; unmatched
components always receive their own Bernoulli(1/q) activation draws.  When the
two copies activate the same number of vertices, a single percolation outcome
is appended to both and the copies only grow more alike; otherwise each copy
percolates independently.

Two activation modes are provided:

* plain    -- every matched pair is activated jointly and every unmatched
              component independently (the textbook construction; the
              activation discrepancy D is then a centered sum over unmatched
              components).
* corrected -- after the unmatched draws produce a deficit, matched pairs are
              spent on canceling it: per size class (largest first) the pair
              activations evolve independently, performing a lazy symmetric
              walk on the deficit, and are mirrored once the deficit drops
              below the class size; the leftover is absorbed exactly by a
              maximal-coupling shift of the two binomial counts of matched
              isolated vertices.  This is the executable form of the
              random-walk/binomial correction ladder; without it the chains
              essentially never activate equal counts at realistic sizes.

Draw order is fixed and documented per mode so runs are reproducible from the
seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import stats as sstats

from .cm_dynamics import worst_starts
from .mean_field import ComponentState, IntervalSpec, default_interval_spec
from .model_core import ModelParams
from .percolation import sample_components

# ---------------------------------------------------------------------------
# matching


@dataclass(frozen=True)
class CouplingState:
    """Maximal equal-size matching between two copies plus its summaries."""

    matching: np.ndarray            # (k, 2) id pairs, sizes equal within a pair
    z_value: float                  # squared mass of all unmatched components
    matched_interval_counts: Dict[int, int]
    discrepancy: Optional[int] = None


@dataclass(frozen=True)
class _MatchIndex:
    """Positional view of a matching (id-free, used by the activation code)."""

    mx: np.ndarray                  # matched positions in X, size-ascending
    my: np.ndarray                  # matched positions in Y, aligned with mx
    ux: np.ndarray                  # unmatched positions in X
    uy: np.ndarray                  # unmatched positions in Y
    msizes: np.ndarray              # sizes of matched pairs (ascending)


def _match_positions(X: ComponentState, Y: ComponentState) -> _MatchIndex:
    ox = np.lexsort((X.ids, X.sizes))
    oy = np.lexsort((Y.ids, Y.sizes))
    sx = X.sizes[ox]
    sy = Y.sizes[oy]
    vals_x, start_x, cnt_x = np.unique(sx, return_index=True, return_counts=True)
    vals_y, start_y, cnt_y = np.unique(sy, return_index=True, return_counts=True)
    common, ix, iy = np.intersect1d(vals_x, vals_y, return_indices=True)
    take = np.minimum(cnt_x[ix], cnt_y[iy])

    def _pick(starts, takes):
        if len(takes) == 0:
            return np.empty(0, np.int64)
        return np.concatenate([np.arange(s, s + t) for s, t in zip(starts, takes)])

    px = _pick(start_x[ix], take)
    py = _pick(start_y[iy], take)
    mask_x = np.zeros(len(sx), dtype=bool)
    mask_x[px] = True
    mask_y = np.zeros(len(sy), dtype=bool)
    mask_y[py] = True
    return _MatchIndex(mx=ox[px], my=oy[py], ux=ox[~mask_x], uy=oy[~mask_y],
                       msizes=sx[px])


def build_matching(X: ComponentState, Y: ComponentState,
                   interval_spec: Optional[IntervalSpec] = None) -> CouplingState:
    """Maximal per-size matching; pairs are taken greedily in id order."""
    if X.n != Y.n:
        raise ValueError(f"copies must share n, got {X.n} != {Y.n}")
    if interval_spec is None:
        interval_spec = default_interval_spec(X.n)
    idx = _match_positions(X, Y)
    z = float((X.sizes[idx.ux].astype(np.float64) ** 2).sum()
              + (Y.sizes[idx.uy].astype(np.float64) ** 2).sum())
    pairs = np.stack([X.ids[idx.mx], Y.ids[idx.my]], axis=1) if len(idx.mx) \
        else np.empty((0, 2), np.int64)
    return CouplingState(matching=pairs, z_value=z,
                         matched_interval_counts=interval_spec.counts(idx.msizes))


# ---------------------------------------------------------------------------
# activation couplings


@dataclass(frozen=True)
class ActivationOutcome:
    active_x_ids: np.ndarray
    active_y_ids: np.ndarray
    active_x_mask: np.ndarray       # over X positions
    active_y_mask: np.ndarray
    discrepancy: int                # A(X) - A(Y)


def _activation_rate(params: ModelParams, allow_q1: bool) -> float:
    if params.q > 1.0:
        return 1.0 / params.q
    if allow_q1 and params.q == 1.0:
        return 1.0
    raise ValueError(f"coupled activation needs q > 1 (or the q=1 flag), got {params.q}")


def matched_activation(X: ComponentState, Y: ComponentState,
                       coupling: CouplingState, params: ModelParams,
                       rng: np.random.Generator, *,
                       allow_q1: bool = False) -> ActivationOutcome:
    """Plain coupled activation: matched pairs share one Bernoulli(1/q) draw,
    unmatched components draw independently.

    Draw order: matched pairs (size-ascending), then X-unmatched, then
    Y-unmatched.  E[D] = 0 and Var(D) = (1/q)(1-1/q) * z_value.
    """
    r = _activation_rate(params, allow_q1)
    idx = _match_positions(X, Y)
    if len(idx.mx) != len(coupling.matching):
        raise ValueError("coupling state does not match the given copies")
    mbits = rng.random(len(idx.mx)) < r
    xbits = rng.random(len(idx.ux)) < r
    ybits = rng.random(len(idx.uy)) < r
    ax = np.zeros(X.num_components, dtype=bool)
    ay = np.zeros(Y.num_components, dtype=bool)
    ax[idx.mx[mbits]] = True
    ay[idx.my[mbits]] = True
    ax[idx.ux[xbits]] = True
    ay[idx.uy[ybits]] = True
    d = int(X.sizes[ax].sum() - Y.sizes[ay].sum())
    return ActivationOutcome(active_x_ids=X.ids[ax], active_y_ids=Y.ids[ay],
                             active_x_mask=ax, active_y_mask=ay, discrepancy=d)


def _shifted_binomial_counts(m: int, r: float, shift: int,
                             rng: np.random.Generator) -> Tuple[int, int]:
    """Sample (KX, KY), both Binomial(m, r), maximizing Pr[KX - KY = shift].

    Maximal coupling of the law of KX with the shifted law of KY: with
    probability 1 - TV the pair lands on the overlap and differs by exactly
    `shift`; otherwise both are drawn from their residual laws independently.
    Either way both marginals stay Binomial(m, r).
    """
    if abs(shift) > m:
        return int(rng.binomial(m, r)), int(rng.binomial(m, r))
    f = sstats.binom.pmf(np.arange(m + 1), m, r)
    # overlap of L(KX) and L(KY + shift), indexed by the KX value
    o = np.zeros(m + 1)
    if shift >= 0:
        o[shift:] = np.minimum(f[shift:], f[: m + 1 - shift])
    else:
        o[: m + 1 + shift] = np.minimum(f[: m + 1 + shift], f[-shift:])
    po = float(o.sum())
    if rng.random() < po:
        k = min(int(np.searchsorted(np.cumsum(o), rng.random() * po)), m)
        return k, k - shift
    res_x = np.maximum(f - o, 0.0)
    res_y = f.copy()
    if shift >= 0:
        res_y[: m + 1 - shift] -= o[shift:]
    else:
        res_y[-shift:] -= o[: m + 1 + shift]
    res_y = np.maximum(res_y, 0.0)
    sx, sy = float(res_x.sum()), float(res_y.sum())
    if sx <= 0.0 or sy <= 0.0:  # numerically exhausted residual
        return int(rng.binomial(m, r)), int(rng.binomial(m, r))
    kx = min(int(np.searchsorted(np.cumsum(res_x), rng.random() * sx)), m)
    ky = min(int(np.searchsorted(np.cumsum(res_y), rng.random() * sy)), m)
    return kx, ky


def corrected_activation(X: ComponentState, Y: ComponentState,
                         params: ModelParams, rng: np.random.Generator, *,
                         allow_q1: bool = False,
                         correction_size_cap: Optional[int] = None) -> ActivationOutcome:
    """Discrepancy-correcting coupled activation (see module docstring).

    Draw order: rank-paired unmatched draws, then per matched size class
    (descending, sizes >= 2) the triple (x-walk bits, y-walk bits, mirror
    bits), then the isolated-pair binomial shift.

    `correction_size_cap` restricts the walking ladder to classes of size
    <= cap (larger matched classes are mirrored); decay measurements use it
    to keep corrections from touching sizes that carry unmatched mass.
    """
    r = _activation_rate(params, allow_q1)
    idx = _match_positions(X, Y)
    ax = np.zeros(X.num_components, dtype=bool)
    ay = np.zeros(Y.num_components, dtype=bool)

    # unmatched: rank-pair by descending size across copies so comparable
    # components share one draw; the deficit only accumulates size gaps
    ux = idx.ux[np.argsort(-X.sizes[idx.ux], kind="stable")]
    uy = idx.uy[np.argsort(-Y.sizes[idx.uy], kind="stable")]
    k_common = min(len(ux), len(uy))
    deficit = 0  # running A(X) - A(Y)
    if k_common:
        bits = rng.random(k_common) < r
        ax[ux[:k_common][bits]] = True
        ay[uy[:k_common][bits]] = True
        deficit += int(X.sizes[ux[:k_common]][bits].sum()
                       - Y.sizes[uy[:k_common]][bits].sum())
    for pos, state, mask, sign in ((ux[k_common:], X, ax, +1),
                                   (uy[k_common:], Y, ay, -1)):
        if len(pos):
            tail_bits = rng.random(len(pos)) < r
            mask[pos[tail_bits]] = True
            deficit += sign * int(state.sizes[pos][tail_bits].sum())

    # matched classes, largest size first; walk while |deficit| >= class size
    msizes = idx.msizes
    uniq = np.unique(msizes)
    for s in uniq[::-1]:
        if s < 2:
            continue
        sel = msizes == s
        mx_s, my_s = idx.mx[sel], idx.my[sel]
        m_s = len(mx_s)
        xb = rng.random(m_s) < r
        yb = rng.random(m_s) < r
        mb = rng.random(m_s) < r
        if correction_size_cap is not None and s > correction_size_cap:
            ax[mx_s[mb]] = True
            ay[my_s[mb]] = True
            continue
        s_int = int(s)
        steps = s_int * (xb.astype(np.int64) - yb.astype(np.int64))
        prefix = deficit + np.concatenate(([0], np.cumsum(steps)[:-1]))
        frozen = np.abs(prefix) < s_int
        j0 = int(np.argmax(frozen)) if frozen.any() else m_s
        walk = np.zeros(m_s, dtype=bool)
        walk[:j0] = True
        x_eff = np.where(walk, xb, mb)
        y_eff = np.where(walk, yb, mb)
        ax[mx_s[x_eff]] = True
        ay[my_s[y_eff]] = True
        deficit += int(steps[:j0].sum())

    # isolated matched pairs absorb the leftover exactly when possible
    sel1 = msizes == 1
    m1 = int(sel1.sum())
    if m1:
        mx1, my1 = idx.mx[sel1], idx.my[sel1]
        kx, ky = _shifted_binomial_counts(m1, r, -deficit, rng)
        perm_x = rng.permutation(m1)
        perm_y = rng.permutation(m1)
        ax[mx1[perm_x[:kx]]] = True
        ay[my1[perm_y[:ky]]] = True
        deficit += kx - ky

    return ActivationOutcome(active_x_ids=X.ids[ax], active_y_ids=Y.ids[ay],
                             active_x_mask=ax, active_y_mask=ay,
                             discrepancy=int(deficit))


# ---------------------------------------------------------------------------
# coupled steps and experiments


def _replace_active(state: ComponentState, active_mask: np.ndarray,
                    sizes_new: np.ndarray) -> ComponentState:
    n_new = len(sizes_new)
    new_ids = np.arange(state.next_id, state.next_id + n_new, dtype=np.int64)
    return ComponentState(
        ids=np.concatenate([state.ids[~active_mask], new_ids]),
        sizes=np.concatenate([state.sizes[~active_mask], sizes_new]),
        n=state.n, next_id=state.next_id + n_new)


def coupled_percolation_step(X: ComponentState, Y: ComponentState,
                             params: ModelParams, rng: np.random.Generator, *,
                             correct: bool = True, allow_q1: bool = False,
                             interval_spec: Optional[IntervalSpec] = None,
                             correction_size_cap: Optional[int] = None
                             ) -> Tuple[ComponentState, ComponentState, CouplingState]:
    """One coupled chain step.

    Runs the coupled activation (corrected or plain), then percolates: with a
    zero discrepancy one outcome is appended to both copies (X's sample drawn
    first when they differ).  The returned CouplingState is rebuilt on the new
    copies and carries this step's discrepancy.
    """
    if interval_spec is None:
        interval_spec = default_interval_spec(X.n)
    if correct:
        act = corrected_activation(X, Y, params, rng, allow_q1=allow_q1,
                                   correction_size_cap=correction_size_cap)
    else:
        coupling = build_matching(X, Y, interval_spec)
        act = matched_activation(X, Y, coupling, params, rng, allow_q1=allow_q1)
    a_x = int(X.sizes[act.active_x_mask].sum())
    a_y = int(Y.sizes[act.active_y_mask].sum())
    if act.discrepancy != a_x - a_y:
        raise AssertionError("activation bookkeeping out of sync")
    if a_x == a_y:
        shared = sample_components(a_x, params.p, rng)
        new_x = _replace_active(X, act.active_x_mask, shared.sizes)
        new_y = _replace_active(Y, act.active_y_mask, shared.sizes)
    else:
        out_x = sample_components(a_x, params.p, rng)
        out_y = sample_components(a_y, params.p, rng)
        new_x = _replace_active(X, act.active_x_mask, out_x.sizes)
        new_y = _replace_active(Y, act.active_y_mask, out_y.sizes)
    coupling_new = build_matching(new_x, new_y, interval_spec)
    coupling_new = CouplingState(matching=coupling_new.matching,
                                 z_value=coupling_new.z_value,
                                 matched_interval_counts=coupling_new.matched_interval_counts,
                                 discrepancy=act.discrepancy)
    return new_x, new_y, coupling_new


@dataclass
class CouplingExperiment:
    coalescence_steps: np.ndarray   # -1 where max_steps was exhausted
    max_steps: int
    success_fraction: float

    def median_steps(self) -> float:
        done = self.coalescence_steps[self.coalescence_steps > 0]
        return float(np.median(done)) if len(done) else float("nan")


def coupling_time_experiment(n: int, q: float, lam: float, replicas: int,
                             max_steps: int, rng: np.random.Generator, *,
                             correct: bool = True,
                             allow_q1: bool = False) -> CouplingExperiment:
    """Coupled chains from the two extreme starts until the size multisets agree.

    Coalescence is z_value == 0 (equal multisets); once reached it is absorbing.
    """
    params = ModelParams(n=n, q=q, lam=lam)
    streams = rng.spawn(replicas)
    taken = np.full(replicas, -1, dtype=np.int64)
    for i, sub in enumerate(streams):
        X, Y = worst_starts(n)
        if build_matching(X, Y).z_value == 0:
            taken[i] = 0
            continue
        for t in range(1, max_steps + 1):
            X, Y, coupling = coupled_percolation_step(
                X, Y, params, sub, correct=correct, allow_q1=allow_q1)
            if coupling.z_value == 0:
                taken[i] = t
                break
    return CouplingExperiment(coalescence_steps=taken, max_steps=max_steps,
                              success_fraction=float((taken >= 0).mean()))


@dataclass
class ZDecaySeries:
    z_series: np.ndarray            # (replicas, steps+1), z before each step
    d_series: np.ndarray            # (replicas, steps), per-step discrepancy
    thinned_series: np.ndarray      # (replicas, steps), squared mass of
                                    # surviving previously-unmatched components


def z_decay_experiment(n: int, q: float, lam: float, replicas: int,
                       burn_steps: int, measure_steps: int,
                       rng: np.random.Generator, *,
                       correction_size_cap: Optional[int] = None,
                       couple_until_z: Optional[float] = None,
                       couple_cap_steps: int = 0) -> ZDecaySeries:
    """Track Z across coupled steps after an independent burn-in.

    Both copies first run independently from the extreme starts (the matching
    is meaningless while one copy still has a giant), then the corrected
    coupling runs and Z, the per-step discrepancy, and the thinned unmatched
    mass (the survivors of the step's unmatched set, before re-matching) are
    recorded.
    """
    from .cm_dynamics import cm_step

    params = ModelParams(n=n, q=q, lam=lam)
    streams = rng.spawn(replicas)
    z = np.zeros((replicas, measure_steps + 1))
    d = np.zeros((replicas, measure_steps), dtype=np.int64)
    thinned = np.zeros((replicas, measure_steps))
    for i, sub in enumerate(streams):
        X, Y = worst_starts(n)
        for _ in range(burn_steps):
            X, _ = cm_step(X, params, sub)
            Y, _ = cm_step(Y, params, sub)
        if couple_until_z is not None:
            # pre-couple with the full ladder so measurement starts from a
            # configuration the capped correction can keep on the D=0 path
            for _ in range(couple_cap_steps):
                coupling = build_matching(X, Y)
                if coupling.z_value <= couple_until_z:
                    break
                X, Y, _ = coupled_percolation_step(X, Y, params, sub)
        coupling = build_matching(X, Y)
        z[i, 0] = coupling.z_value
        for t in range(measure_steps):
            idx = _match_positions(X, Y)
            un_ids_x, un_ids_y = X.ids[idx.ux], Y.ids[idx.uy]
            X, Y, coupling = coupled_percolation_step(
                X, Y, params, sub, correction_size_cap=correction_size_cap)
            z[i, t + 1] = coupling.z_value
            d[i, t] = coupling.discrepancy
            surv_x = np.isin(X.ids, un_ids_x)
            surv_y = np.isin(Y.ids, un_ids_y)
            thinned[i, t] = float((X.sizes[surv_x].astype(np.float64) ** 2).sum()
                                  + (Y.sizes[surv_y].astype(np.float64) ** 2).sum())
    return ZDecaySeries(z_series=z, d_series=d, thinned_series=thinned)


# ---------------------------------------------------------------------------
# random-walk couplings


@dataclass(frozen=True)
class WalkSpec:
    """Lazy symmetric walk with per-step sizes c_i: +-c_i w.p. r each, else 0."""

    step_sizes: np.ndarray
    A: int
    r: float
    d: int = 0

    def __post_init__(self):
        if self.A <= 0:
            raise ValueError("A must be positive")
        if not 0.0 < self.r <= 0.5:
            raise ValueError("r must be in (0, 1/2]")
        if self.d < 0:
            raise ValueError("d must be >= 0")
        c = np.asarray(self.step_sizes)
        if len(c) == 0 or c.min() < self.A:
            raise ValueError("need nonempty step sizes with c_i >= A")


def wilson_interval(successes: int, trials: int, z: float = 3.0) -> Tuple[float, float]:
    """Wilson score interval (z=3 by default: generous slack for bound checks)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _walk_steps(spec: WalkSpec, trials: int, rng: np.random.Generator) -> np.ndarray:
    c = np.asarray(spec.step_sizes, dtype=np.int64)
    u = rng.random((trials, len(c)))
    return c * ((u < spec.r).astype(np.int64) - (u >= 1.0 - spec.r).astype(np.int64))


@dataclass
class RwMaxTailReport:
    y: int
    p_max: float
    p_sum: float
    ci_max: Tuple[float, float]
    ci_sum: Tuple[float, float]
    trials: int

    @property
    def holds_with_slack(self) -> bool:
        # empirical LHS >= 2 * empirical RHS minus the intervals' slack
        slack = (self.p_max - self.ci_max[0]) + 2.0 * (self.ci_sum[1] - self.p_sum)
        return self.p_max >= 2.0 * self.p_sum - slack


def rw_max_tail(spec: WalkSpec, y: int, trials: int,
                rng: np.random.Generator) -> RwMaxTailReport:
    """Estimate Pr[max_k S_k >= y] and Pr[S_n >= y + 8A + 1] for the walk."""
    c = np.asarray(spec.step_sizes)
    if c.max() > 4 * spec.A:
        raise ValueError("maximum bound requires c_i <= 4A")
    steps = _walk_steps(spec, trials, rng)
    s = np.cumsum(steps, axis=1)
    m_hit = int((s.max(axis=1) >= y).sum())
    s_hit = int((s[:, -1] >= y + 8 * spec.A + 1).sum())
    return RwMaxTailReport(y=y, p_max=m_hit / trials, p_sum=s_hit / trials,
                           ci_max=wilson_interval(m_hit, trials),
                           ci_sum=wilson_interval(s_hit, trials), trials=trials)


@dataclass
class RwCouplingReport:
    success: float
    bound: float
    ci: Tuple[float, float]
    trials: int

    @property
    def passes_with_slack(self) -> bool:
        slack = self.success - self.ci[0]
        return self.success >= self.bound - slack


def rw_difference_coupling(spec: WalkSpec, trials: int,
                           rng: np.random.Generator) -> RwCouplingReport:
    """Mirror coupling for two copies of the walk: independent while the running
    difference is below d, identical afterwards; success is X - Y in [d, d+2A].

    The comparison bound is 1 - delta (d+A) / (A sqrt(m)) with delta = 10/sqrt(r).
    """
    c = np.asarray(spec.step_sizes)
    if c.max() > 2 * spec.A:
        raise ValueError("difference coupling requires c_i <= 2A")
    m = len(c)
    d = spec.d
    bound = 1.0 - (10.0 / math.sqrt(spec.r)) * (d + spec.A) / (spec.A * math.sqrt(m))
    if d == 0:
        # D_0 = 0 >= d: both copies mirrored from the start
        return RwCouplingReport(success=1.0, bound=bound,
                                ci=wilson_interval(trials, trials), trials=trials)
    sx = _walk_steps(spec, trials, rng)
    sy = _walk_steps(spec, trials, rng)
    diff = np.cumsum(sx - sy, axis=1)
    hit = diff >= d
    any_hit = hit.any(axis=1)
    first = np.argmax(hit, axis=1)
    final = np.where(any_hit, diff[np.arange(trials), first], diff[:, -1])
    ok = int(((final >= d) & (final <= d + 2 * spec.A)).sum())
    return RwCouplingReport(success=ok / trials, bound=bound,
                            ci=wilson_interval(ok, trials), trials=trials)


@dataclass
class BinomialShiftReport:
    success: float
    exact_success: float
    ci: Tuple[float, float]
    trials: int


def binomial_shift_coupling(m: int, r: float, y: int, trials: int,
                            rng: np.random.Generator) -> BinomialShiftReport:
    """Couple two Binomial(m, r) draws to differ by exactly y.

    Maximal coupling of the shifted laws; the exact success probability is the
    overlap mass 1 - TV(Bin(m,r), Bin(m,r)+y), reported alongside the
    empirical frequency.
    """
    if y < 0:
        raise ValueError("y must be >= 0")
    if not 0.0 < r < 1.0:
        raise ValueError("r must be in (0,1)")
    if y > m:
        return BinomialShiftReport(success=0.0, exact_success=0.0,
                                   ci=(0.0, 0.0), trials=trials)
    ks = np.arange(0, m + 1)
    f = sstats.binom.pmf(ks, m, r)
    g = np.zeros_like(f)
    g[y:] = f[: m + 1 - y]       # law of (Y + y) on 0..m grid
    exact = float(np.minimum(f, g).sum())
    ok = 0
    for _ in range(trials):
        kx, ky = _shifted_binomial_counts(m, r, y, rng)
        ok += kx - ky == y
    return BinomialShiftReport(success=ok / trials, exact_success=exact,
                               ci=wilson_interval(ok, trials), trials=trials)


# ---------------------------------------------------------------------------
# local limit theorem by exact convolution

_TABLE_CELL_CAP = 10 ** 8


@dataclass(frozen=True)
class LLTInstance:
    """Independent two-point summands: X_i = c_i w.p. r, else 0."""

    sizes: np.ndarray
    r: float

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError("r must be in (0,1)")
        s = np.asarray(self.sizes)
        if len(s) == 0 or s.min() < 1:
            raise ValueError("sizes must be positive integers")

    @property
    def mu(self) -> float:
        return self.r * float(np.sum(self.sizes))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.r * (1.0 - self.r) * float(np.sum(np.asarray(self.sizes, dtype=np.float64) ** 2)))


@dataclass
class LLTReport:
    sup_error: float                # sup over the window of sigma * |exact - gaussian|
    worst_a: int
    total_mass_error: float
    mu: float
    sigma: float
    window: Tuple[int, int]


def llt_exact_check(instance: LLTInstance) -> LLTReport:
    """Exact law of S = sum X_i by sequential convolution vs the Gaussian density.

    The error is measured in the local-limit normalization: sigma * |P[S=a] -
    density(a)| over integers a within one sigma of the mean.
    """
    sizes = np.asarray(instance.sizes, dtype=np.int64)
    total = int(sizes.sum())
    if total + 1 > _TABLE_CELL_CAP:
        raise MemoryError(
            f"convolution table needs {total + 1} cells "
            f"(cap {_TABLE_CELL_CAP}); reduce the instance")
    r = instance.r
    table = np.zeros(total + 1)
    table[0] = 1.0
    top = 0
    for c in sizes:
        c = int(c)
        top += c
        seg = table[: top + 1]
        shifted = np.zeros_like(seg)
        shifted[c:] = seg[:-c] if c > 0 else seg
        table[: top + 1] = (1.0 - r) * seg + r * shifted
    mass_err = abs(float(table.sum()) - 1.0)
    mu, sigma = instance.mu, instance.sigma
    lo = max(0, int(math.ceil(mu - sigma)))
    hi = min(total, int(math.floor(mu + sigma)))
    a = np.arange(lo, hi + 1)
    gauss = np.exp(-((a - mu) ** 2) / (2.0 * sigma * sigma)) / (math.sqrt(2.0 * math.pi) * sigma)
    err = sigma * np.abs(table[a] - gauss)
    worst = int(np.argmax(err))
    return LLTReport(sup_error=float(err[worst]), worst_a=int(a[worst]),
                     total_mass_error=mass_err, mu=mu, sigma=sigma,
                     window=(lo, hi))


def llt_instance_from_critical_sample(n: int, rng: np.random.Generator,
                                      r: float = 0.5) -> LLTInstance:
    """Sizes of a critical G(n, 1/n) sample truncated at n^{2/3}/omega.

    This realizes the hypotheses under which the local limit theorem is
    expected to hold: many isolated vertices, squared mass controlled, no
    component above the slow-threshold scale.
    """
    from .mean_field import omega_default

    out = sample_components(n, 1.0 / n, rng)
    _, b_omega = omega_default(n)
    sizes = np.sort(out.sizes[out.sizes <= b_omega])
    return LLTInstance(sizes=sizes, r=r)
