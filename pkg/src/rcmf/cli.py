"""Reproducible experiment runner.

Subcommands wire the library modules behind a flat scenario model: every run
resolves to a Scenario, every stochastic run requires a seed (flag, config
file, or the RCMF_SEED environment variable), and artifacts are a CSV body
(byte-identical across reruns of the same scenario) plus a summary.json that
carries the resolved scenario, timings and any derived quantities.

Replica k always draws from the stream keyed by (seed, k), so outputs never
depend on the replica count or the degree of parallelism.

Exit codes: 0 ok, 2 usage, 3 domain error, 4 io error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .cm_dynamics import run_trajectory, worst_starts
from .coupling import (WalkSpec, coupling_time_experiment, llt_exact_check,
                       llt_instance_from_critical_sample, rw_difference_coupling,
                       rw_max_tail)
from .exact_chain import (cm_matrix_exact, glauber_matrix_exact,
                          mixing_time_exact, spectral_gap, sw_matrix_exact)
from .glauber import EdgeConfig, glauber_trajectory
from .mean_field import default_interval_spec, from_sizes, omega_default
from .model_core import ModelParams, drift_evaluate
from .percolation import sample_components, tree_count_statistics

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

CSV_SCHEMA_LINE = "# schema=1"


class DomainError(Exception):
    pass


@dataclass
class Scenario:
    subcommand: str
    n: int = 0
    q: float = 0.0
    lam: float = 0.0
    p: Optional[float] = None
    steps: int = 0
    replicas: int = 1
    max_steps: int = 0
    seed: Optional[int] = None
    observers: List[str] = field(default_factory=list)
    output_path: str = "."
    format: str = "csv"
    omega_override: Optional[float] = None
    vartheta: float = 4.0
    g_value: float = 2.0
    grid: float = 0.01
    start: str = "full"
    record_every: int = 1
    threads: int = 0
    trials: int = 100000
    walk_a: int = 1
    walk_m: int = 100
    walk_d: int = 0
    walk_r: float = 0.5
    walk_y: int = 0
    k_list: List[int] = field(default_factory=lambda: [1, 2, 4, 8])

    def as_dict(self) -> Dict:
        return {k: v for k, v in self.__dict__.items()}


def replica_rng(seed: int, replica: int) -> np.random.Generator:
    """Stream for replica k, keyed by (seed, k); independent of replica count."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(replica,)))


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_SCHEMA_LINE + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_summary(path: str, scenario: Scenario, extra: Dict, started: float) -> None:
    body = {
        "scenario": scenario.as_dict(),
        "version": __version__,
        "wall_time_s": time.time() - started,
        **extra,
    }
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


def _require_seed(sc: Scenario) -> int:
    if sc.seed is not None:
        return sc.seed
    env = os.environ.get("RCMF_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise DomainError(f"RCMF_SEED is not an integer: {env!r}") from exc
    raise DomainError("stochastic subcommands need --seed (or RCMF_SEED)")


def _params(sc: Scenario) -> ModelParams:
    try:
        if sc.p is not None:
            return ModelParams.from_edge_probability(sc.n, sc.p, sc.q)
        return ModelParams(n=sc.n, q=sc.q, lam=sc.lam)
    except ValueError as exc:
        raise DomainError(str(exc)) from exc


def _ensure_outdir(sc: Scenario) -> str:
    path = sc.output_path
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise IOError(f"output path not writable: {path}: {exc}") from exc
    return path


# ---------------------------------------------------------------------------
# per-subcommand runners

_TRAJ_HEADER = ["step", "L1", "L2", "R1", "R2", "R_tilde", "isolated", "A",
                "lambda_event", "drift_residual"]


def _one_cm_replica(args) -> List[List]:
    sc, replica, seed = args
    params = _params(sc)
    rng = replica_rng(seed, replica)
    start_full, start_empty = worst_starts(sc.n)
    start = start_full if sc.start == "full" else start_empty
    spec = default_interval_spec(sc.n, vartheta=sc.vartheta, g_value=sc.g_value)
    omega, b_omega = omega_default(max(sc.n, 2))
    if sc.omega_override is not None:
        omega = sc.omega_override
        b_omega = sc.n ** (2.0 / 3.0) / omega
    observers = sc.observers or ["stats"]
    if "drift_residual" not in observers:
        observers = list(observers) + ["drift_residual"]
    result = run_trajectory(start, params, sc.steps, observers, rng,
                            interval_spec=spec,
                            small_threshold=max(1, int(b_omega)))
    residuals = dict(result.drift_residuals or [])
    rows = []
    for t, rep in enumerate(result.reports):
        rows.append([t + 1, rep.L1, rep.L2, rep.R1, rep.R2, rep.R_tilde,
                     rep.isolated, result.active_counts[t],
                     int(result.lambda_events[t]),
                     residuals.get(t, float("nan"))])
    return rows


def run_simulate(sc: Scenario) -> Dict:
    seed = _require_seed(sc)
    outdir = _ensure_outdir(sc)
    jobs = [(sc, k, seed) for k in range(sc.replicas)]
    results = _map_jobs(_one_cm_replica, jobs, sc)
    files = []
    for k, rows in enumerate(results):
        path = os.path.join(outdir, f"trajectory_{k:04d}.csv")
        write_csv(path, _TRAJ_HEADER, rows)
        files.append(path)
    return {"files": files}


def _one_glauber_replica(args) -> List[List]:
    sc, replica, seed = args
    params = _params(sc)
    rng = replica_rng(seed, replica)
    start = EdgeConfig.empty(sc.n) if sc.start == "empty" else EdgeConfig.full(sc.n)
    traj = glauber_trajectory(start, params, sc.steps, sc.observers, rng,
                              record_every=max(1, sc.record_every))
    rows = []
    for i, rep in enumerate(traj.reports):
        rows.append([traj.steps[i], rep.L1, rep.L2, rep.R1, rep.R2,
                     rep.R_tilde, rep.isolated, "", "", "",
                     traj.open_edges[i]])
    return rows


def run_glauber(sc: Scenario) -> Dict:
    seed = _require_seed(sc)
    outdir = _ensure_outdir(sc)
    jobs = [(sc, k, seed) for k in range(sc.replicas)]
    results = _map_jobs(_one_glauber_replica, jobs, sc)
    files = []
    header = _TRAJ_HEADER + ["open_edges"]
    for k, rows in enumerate(results):
        path = os.path.join(outdir, f"glauber_{k:04d}.csv")
        write_csv(path, header, rows)
        files.append(path)
    return {"files": files}


def run_drift(sc: Scenario) -> Dict:
    if sc.q <= 1.0:
        raise DomainError(f"drift needs q > 1, got {sc.q}")
    outdir = _ensure_outdir(sc)
    rows = []
    grid = sc.grid
    n_pts = int(round(1.0 / grid))
    for i in range(1, n_pts + 1):
        theta = i * grid
        if theta > 1.0:
            break
        ev = drift_evaluate(theta, sc.lam, sc.q)
        rows.append([theta,
                     ev.phi_value if ev.phi_value is not None else float("nan"),
                     ev.drift_value if ev.drift_value is not None else float("nan")])
    path = os.path.join(outdir, "drift.csv")
    write_csv(path, ["theta", "phi", "f"], rows)
    return {"files": [path]}


def _one_couple_replica(args) -> int:
    sc, replica, seed = args
    rng = replica_rng(seed, replica)
    exp = coupling_time_experiment(sc.n, sc.q, sc.lam, 1, sc.max_steps, rng)
    return int(exp.coalescence_steps[0])


def run_couple(sc: Scenario) -> Dict:
    seed = _require_seed(sc)
    outdir = _ensure_outdir(sc)
    jobs = [(sc, k, seed) for k in range(sc.replicas)]
    steps = _map_jobs(_one_couple_replica, jobs, sc)
    path = os.path.join(outdir, "coalescence.csv")
    write_csv(path, ["replica", "steps"], [[k, s] for k, s in enumerate(steps)])
    arr = np.array(steps)
    done = arr[arr >= 0]
    return {"files": [path],
            "success_fraction": float((arr >= 0).mean()),
            "median_steps": float(np.median(done)) if len(done) else None}


def run_exact(sc: Scenario) -> Dict:
    params = _params(sc)
    try:
        cm = cm_matrix_exact(sc.n, params)
        gd = glauber_matrix_exact(sc.n, params)
        sw = sw_matrix_exact(sc.n, params) if float(sc.q).is_integer() else None
    except ValueError as exc:
        raise DomainError(str(exc)) from exc
    out = {
        "params": {"n": sc.n, "p": params.p, "q": sc.q},
        "gap_cm": spectral_gap(cm),
        "gap_gd": spectral_gap(gd),
        "tmix_cm": mixing_time_exact(cm),
        "tmix_gd": mixing_time_exact(gd),
        "stationarity_residual": max(cm.stationarity_residual(),
                                     gd.stationarity_residual()),
        "reversibility_residual": max(cm.reversibility_residual(),
                                      gd.reversibility_residual()),
    }
    if sw is not None:
        out["gap_sw"] = spectral_gap(sw)
        out["stationarity_residual"] = max(out["stationarity_residual"],
                                           sw.stationarity_residual())
        out["reversibility_residual"] = max(out["reversibility_residual"],
                                            sw.reversibility_residual())
    return out


def run_llt(sc: Scenario) -> Dict:
    seed = _require_seed(sc)
    rng = replica_rng(seed, 0)
    inst = llt_instance_from_critical_sample(sc.n, rng, r=sc.walk_r)
    report = llt_exact_check(inst)
    return {"m": len(inst.sizes), "mu": report.mu, "sigma": report.sigma,
            "sup_error": report.sup_error, "worst_a": report.worst_a,
            "total_mass_error": report.total_mass_error,
            "window": list(report.window)}


def run_rw(sc: Scenario) -> Dict:
    seed = _require_seed(sc)
    rng = replica_rng(seed, 0)
    sizes = rng.integers(sc.walk_a, 2 * sc.walk_a + 1, size=sc.walk_m)
    spec = WalkSpec(step_sizes=sizes, A=sc.walk_a, r=sc.walk_r, d=sc.walk_d)
    coup = rw_difference_coupling(spec, sc.trials, rng)
    tail = rw_max_tail(spec, sc.walk_y, sc.trials, rng)
    return {"coupling": {"success": coup.success, "bound": coup.bound,
                         "ci": list(coup.ci), "passes": coup.passes_with_slack},
            "max_tail": {"y": tail.y, "p_max": tail.p_max, "p_sum": tail.p_sum,
                         "holds": tail.holds_with_slack}}


def run_stats(sc: Scenario) -> Dict:
    seed = _require_seed(sc)
    outdir = _ensure_outdir(sc)
    params = _params(sc)
    rng = replica_rng(seed, 0)
    table = tree_count_statistics(sc.n, params.p, sc.k_list, sc.replicas, rng)
    rows = [[k, mean, var] for k, (mean, var) in sorted(table.items())]
    path = os.path.join(outdir, "tree_counts.csv")
    write_csv(path, ["k", "mean", "var"], rows)
    sizes = sample_components(sc.n, params.p, replica_rng(seed, 1)).sizes
    return {"files": [path],
            "sample": {"L1": int(sizes.max()), "components": int(len(sizes)),
                       "isolated": int((sizes == 1).sum())}}


def _map_jobs(fn, jobs, sc: Scenario):
    workers = sc.threads if sc.threads > 0 else (os.cpu_count() or 1)
    workers = min(workers, len(jobs))
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


_RUNNERS = {
    "simulate": run_simulate,
    "glauber": run_glauber,
    "drift": run_drift,
    "couple": run_couple,
    "exact": run_exact,
    "llt": run_llt,
    "rw": run_rw,
    "stats": run_stats,
}


def run(scenario: Scenario) -> int:
    """Execute one scenario; writes artifacts and the summary, returns exit code."""
    started = time.time()
    try:
        extra = _RUNNERS[scenario.subcommand](scenario)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, IOError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        outdir = _ensure_outdir(scenario)
        write_summary(os.path.join(outdir, "summary.json"), scenario, extra, started)
    except (OSError, IOError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _load_config(path: str) -> Dict[str, str]:
    """Flat key=value lines; '#' starts a comment."""
    out: Dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def _build_parser() -> argparse.ArgumentParser:
    # defaults live on Scenario; SUPPRESS keeps unset flags out of the namespace
    # so config-file values are only overridden by flags actually given
    S = argparse.SUPPRESS
    ap = argparse.ArgumentParser(prog="rcmf",
                                 description="mean-field random-cluster dynamics lab")
    ap.add_argument("--config", default=None,
                    help="flat key=value scenario file; flags win")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(sp, needs_params=True):
        if needs_params:
            sp.add_argument("--n", type=int, default=S)
            sp.add_argument("--q", type=float, default=S)
            sp.add_argument("--lambda", dest="lam", type=float, default=S)
            sp.add_argument("--p", type=float, default=S)
        sp.add_argument("--seed", type=int, default=S)
        sp.add_argument("--out", dest="output_path", default=S)
        sp.add_argument("--threads", type=int, default=S)

    sp = sub.add_parser("simulate", help="component-activation trajectories")
    common(sp)
    sp.add_argument("--steps", type=int, default=S)
    sp.add_argument("--replicas", type=int, default=S)
    sp.add_argument("--start", choices=["full", "empty"], default=S)
    sp.add_argument("--observers", nargs="*", default=S)
    sp.add_argument("--vartheta", type=float, default=S)
    sp.add_argument("--g-value", dest="g_value", type=float, default=S)
    sp.add_argument("--omega-override", dest="omega_override", type=float, default=S)

    sp = sub.add_parser("glauber", help="heat-bath edge-update trajectories")
    common(sp)
    sp.add_argument("--steps", type=int, default=S)
    sp.add_argument("--replicas", type=int, default=S)
    sp.add_argument("--start", choices=["full", "empty"], default=S)
    sp.add_argument("--record-every", dest="record_every", type=int, default=S)
    sp.add_argument("--observers", nargs="*", default=S)

    sp = sub.add_parser("drift", help="tabulate theta, phi, f over a grid")
    common(sp, needs_params=False)
    sp.add_argument("--q", type=float, default=S)
    sp.add_argument("--lambda", dest="lam", type=float, default=S)
    sp.add_argument("--grid", type=float, default=S)

    sp = sub.add_parser("couple", help="coalescence-time experiment")
    common(sp)
    sp.add_argument("--replicas", type=int, default=S)
    sp.add_argument("--max-steps", dest="max_steps", type=int, default=S)

    sp = sub.add_parser("exact", help="exact matrices on tiny graphs")
    common(sp)

    sp = sub.add_parser("llt", help="local-limit check on a critical sample")
    common(sp)
    sp.add_argument("--r", dest="walk_r", type=float, default=S)

    sp = sub.add_parser("rw", help="random-walk coupling and maximum-tail checks")
    common(sp, needs_params=False)
    sp.add_argument("--A", dest="walk_a", type=int, default=S)
    sp.add_argument("--m", dest="walk_m", type=int, default=S)
    sp.add_argument("--d", dest="walk_d", type=int, default=S)
    sp.add_argument("--r", dest="walk_r", type=float, default=S)
    sp.add_argument("--y", dest="walk_y", type=int, default=S)
    sp.add_argument("--trials", type=int, default=S)

    sp = sub.add_parser("stats", help="random-graph statistics (tree counts)")
    common(sp)
    sp.add_argument("--replicas", type=int, default=S)
    sp.add_argument("--k-list", dest="k_list", type=int, nargs="*", default=S)
    return ap


def build_scenario(argv: Sequence[str]) -> Scenario:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    sc = Scenario(subcommand=ns.subcommand)
    if getattr(ns, "config", None):
        try:
            cfg = _load_config(ns.config)
        except OSError as exc:
            raise IOError(f"cannot read config: {exc}") from exc
        for key, val in cfg.items():
            if not hasattr(sc, key):
                raise DomainError(f"unknown config key: {key}")
            cur = getattr(sc, key)
            if isinstance(cur, list):
                parsed = [type(cur[0])(v) if cur else v for v in val.split()]
                setattr(sc, key, parsed)
            elif isinstance(cur, bool):
                setattr(sc, key, val.lower() in ("1", "true", "yes"))
            elif isinstance(cur, int):
                setattr(sc, key, int(val))
            elif isinstance(cur, float):
                setattr(sc, key, float(val))
            else:
                setattr(sc, key, val)
    for key, val in vars(ns).items():
        if key in ("config", "subcommand"):
            continue
        if hasattr(sc, key):
            setattr(sc, key, val)
    return sc


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        scenario = build_scenario(argv)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, IOError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(scenario)


if __name__ == "__main__":
    sys.exit(main())
