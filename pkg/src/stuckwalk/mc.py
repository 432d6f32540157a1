"""Reproducible Monte-Carlo batches.

Every run gets its own seed derived from (master_seed, run_index) by a
fixed avalanche mix, so the batch output is a pure function of its config:
identical across platforms, worker counts, and scheduling orders.
Aggregation sorts results by run index and uses integer counters, never
order-sensitive floating-point accumulation.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .analysis import batch_stats, compare_profile, detect_localization
from .errors import StuckWalkError
from .rng import derive_seed
from .spectrum import Params
from .walk import simulate

__all__ = ["BatchConfig", "derive_seed", "run_batch", "range_saturation"]


@dataclass(frozen=True)
class BatchConfig:
    params: Params
    runs: int
    steps: int
    master_seed: int
    engine: str = "direct"          # "direct" or "rubin"
    workers: int = 1
    tail_fraction: float = 0.5

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.steps < 1000:
            raise ValueError(f"steps must be >= 1000, got {self.steps}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.engine not in ("direct", "rubin"):
            raise ValueError(f"unknown engine {self.engine!r}")


@dataclass
class BatchResult:
    config: BatchConfig
    summaries: list                 # index-ordered; None where a run failed
    aggregate: object               # BatchAggregate
    failures: list = field(default_factory=list)  # {run, seed, reason}
    first_step_right: int = 0


def _run_one(config: BatchConfig, index: int):
    """Simulate + analyze a single run.  Top-level so it pickles."""
    seed = derive_seed(config.master_seed, index)
    try:
        if config.engine == "rubin":
            from .rubin import simulate_rubin
            traj, _bank = simulate_rubin(config.params, config.steps, seed)
        else:
            traj = simulate(config.params, config.steps, seed)
        summary = detect_localization(traj, config.tail_fraction)
        if summary.localized and 0 <= summary.size - 2 <= config.params.L + 1:
            compare_profile(summary, config.params)
        first_right = 1 if traj.positions[1] == 1 else 0
        return index, seed, summary, first_right, None
    except StuckWalkError as exc:
        return index, seed, None, 0, f"{type(exc).__name__}: {exc}"


def run_batch(config: BatchConfig) -> BatchResult:
    """Execute all runs (in parallel if workers > 1) and aggregate.

    Per-run failures are recorded with their seed for replay; the batch
    itself fails only if more than 1% of runs fail.
    """
    indices = range(config.runs)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            raw = list(pool.map(_run_one, [config] * config.runs, indices,
                                chunksize=max(1, config.runs // (4 * config.workers))))
    else:
        raw = [_run_one(config, i) for i in indices]
    raw.sort(key=lambda r: r[0])

    summaries = [None] * config.runs
    failures = []
    first_right = 0
    for index, seed, summary, fr, reason in raw:
        if reason is not None:
            failures.append({"run": index, "seed": seed, "reason": reason})
            continue
        summaries[index] = summary
        first_right += fr
    ok = [s for s in summaries if s is not None]
    if len(failures) > 0.01 * config.runs:
        raise StuckWalkError(
            f"{len(failures)}/{config.runs} runs failed; first: {failures[0]}")
    aggregate = batch_stats(ok, config.params)
    aggregate.first_step_right_frac = first_right / len(ok) if ok else None
    return BatchResult(config=config, summaries=summaries,
                       aggregate=aggregate, failures=failures,
                       first_step_right=first_right)


def _range_prefix(positions, checkpoints):
    """Visited range (min, max) after each checkpoint step count."""
    out = []
    lo = hi = 0
    it = iter(sorted(checkpoints))
    nxt = next(it)
    for k, p in enumerate(positions):
        if p < lo:
            lo = p
        elif p > hi:
            hi = p
        while k == nxt:
            out.append((lo, hi))
            nxt = next(it, None)
            if nxt is None:
                return out
    while nxt is not None:
        out.append((lo, hi))
        nxt = next(it, None)
    return out


def range_saturation(config: BatchConfig, checkpoints) -> dict:
    """Fraction of runs whose visited range stops growing between the last
    two checkpoints."""
    cps = sorted(int(c) for c in checkpoints)
    if len(cps) < 2:
        raise ValueError("need at least two checkpoints")
    frozen = 0
    total = 0
    per_run = []
    for i in range(config.runs):
        seed = derive_seed(config.master_seed, i)
        traj = simulate(config.params, max(cps[-1], 1000), seed)
        ranges = _range_prefix(traj.positions, cps)
        is_frozen = ranges[-1] == ranges[-2]
        frozen += is_frozen
        total += 1
        per_run.append({"run": i, "ranges": ranges, "frozen": bool(is_frozen)})
    return {"fraction_frozen": frozen / total, "checkpoints": cps,
            "runs": per_run}
