"""Localization detection and comparison with the candidate profiles.

A trajectory localizes when, over the tail of the run, the walk keeps
visiting every site of a fixed interval at a sustained rate.  The
normalized edge local-time increments over that tail are then compared
with the closed-form candidate profile of matching window size.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import NoTheory, TooShort
from .linsys import solve_closed
from .spectrum import Params
from .walk import Trajectory

WILSON_Z = 1.959963984540054  # two-sided 95%

# A window site must collect at least tail_len/(SUSTAIN_DIVISOR * size)
# visits over the tail to count as recurrent at finite horizon.
SUSTAIN_DIVISOR = 10

MIN_TRAJECTORY = 1000


@dataclass
class RunSummary:
    """Tail diagnostics of one trajectory."""

    window: tuple               # (a, b), sites visited during the tail
    size: int                   # b - a + 1
    localized: bool
    profile: list               # normalized interior edge local times (tail)
    deviation: float            # vs matching closed-form profile, nan if n/a
    stream_rate: dict           # interior site -> |Delta_k(j)| / k at final k
    range_final: tuple          # (min, max) site ever visited
    seed: int = None
    tail_fraction: float = 0.5
    sustain_threshold: float = 0.0

    def as_dict(self):
        return {
            "window": list(self.window),
            "size": self.size,
            "localized": self.localized,
            "profile": list(self.profile),
            "deviation": self.deviation,
            "stream_rate": {str(j): v for j, v in self.stream_rate.items()},
            "range_final": list(self.range_final),
        }


def _edge_counts(positions, start, stop):
    """Crossing counts per edge index j (edge {j-1, j}) over steps
    start..stop-1 of the position sequence."""
    pos = np.asarray(positions[start:stop + 1], dtype=np.int64)
    edges = np.maximum(pos[:-1], pos[1:])
    counts = {}
    for j, c in zip(*np.unique(edges, return_counts=True)):
        counts[int(j)] = int(c)
    return counts


def _total_edge_lt(positions):
    return _edge_counts(positions, 0, len(positions) - 1)


def _stream(lt, j, alpha):
    g = lt.get
    return -alpha * g(j - 1, 0) + g(j, 0) - g(j + 1, 0) + alpha * g(j + 2, 0)


def detect_localization(traj: Trajectory, tail_fraction: float = 0.5) -> RunSummary:
    """Estimate the localization window from the final tail of a run.

    The window is the set of sites visited during the last ``tail_fraction``
    of the steps; the run counts as localized when that set is an interval
    each of whose sites is visited at least tail_len/(10*size) times.  The
    profile is built from edge local-time increments over the tail only.
    """
    steps = traj.steps
    if steps < MIN_TRAJECTORY:
        raise TooShort(
            f"need >= {MIN_TRAJECTORY} steps, got {steps}")
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError(f"tail_fraction must be in (0,1), got {tail_fraction}")
    pos = traj.positions
    t0 = steps - int(steps * tail_fraction)
    tail = np.asarray(pos[t0:], dtype=np.int64)
    tail_len = len(tail) - 1
    visited = np.unique(tail)
    a, b = int(visited[0]), int(visited[-1])
    size = b - a + 1
    threshold = tail_len / (SUSTAIN_DIVISOR * size)
    is_interval = len(visited) == size
    localized = is_interval
    if is_interval:
        counts = np.bincount(tail - a, minlength=size)
        localized = bool(np.all(counts >= threshold))

    edge_tail = _edge_counts(pos, t0, steps)
    inner = [edge_tail.get(j, 0) for j in range(a + 1, b + 1)]
    total = sum(inner)
    profile = [c / total for c in inner] if total else [0.0] * len(inner)

    lt_final = _total_edge_lt(pos)
    alpha = traj.params.alpha if traj.params else None
    stream_rate = {}
    if alpha is not None:
        for j in range(a + 1, b):
            stream_rate[j] = abs(_stream(lt_final, j, alpha)) / steps

    return RunSummary(
        window=(a, b), size=size, localized=localized,
        profile=profile, deviation=float("nan"), stream_rate=stream_rate,
        range_final=(min(pos), max(pos)), seed=traj.seed,
        tail_fraction=tail_fraction, sustain_threshold=threshold)


def compare_profile(summary: RunSummary, params: Params) -> RunSummary:
    """Fill in the max abs deviation of the tail profile from the
    closed-form candidate of matching window size (K = size - 2).

    Size L+3 windows are compared against the K = L+1 candidate.  Larger
    windows have no closed form and raise NoTheory.
    """
    K = summary.size - 2
    if K > params.L + 1:
        raise NoTheory(
            f"window size {summary.size} exceeds L+3 = {params.L + 3}; "
            "no closed-form profile")
    if K < 0:
        raise NoTheory(f"window size {summary.size} too small to compare")
    target = solve_closed(K, params.alpha).l[1:K + 2]
    prof = np.asarray(summary.profile)
    if len(prof) != len(target):
        raise NoTheory(
            f"profile length {len(prof)} does not match K = {K}")
    summary.deviation = float(np.max(np.abs(prof - target)))
    return summary


def stream_decay(traj: Trajectory, checkpoints) -> dict:
    """|Delta_k(j)|/k at the given step counts, for each interior site of
    the detected window (all visited sites if detection is not possible)."""
    pos = traj.positions
    steps = traj.steps
    cps = sorted({int(c) for c in checkpoints if 1 <= int(c) <= steps})
    try:
        summ = detect_localization(traj)
        a, b = summ.window
        sites = list(range(a + 1, b))
    except TooShort:
        sites = list(range(min(pos) + 1, max(pos)))
    if not sites:
        sites = [0]
    series = {j: [] for j in sites}
    lt = {}
    prev = 0
    for k in cps:
        for m in range(prev, k):
            j = max(pos[m], pos[m + 1])
            lt[j] = lt.get(j, 0) + 1
        prev = k
        alpha = traj.params.alpha
        for j in sites:
            series[j].append((k, abs(_stream(lt, j, alpha)) / k))
    return series


def wilson_interval(successes: int, n: int, z: float = WILSON_Z):
    """Wilson score confidence interval for a binomial fraction."""
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class BatchAggregate:
    """Order-independent aggregate over a list of run summaries."""

    runs: int
    size_histogram: dict
    frac_localized: float
    frac_L2: float
    frac_L3: float
    ci_L2: tuple
    ci_L3: tuple
    mean_deviation: float
    max_deviation: float
    first_step_right_frac: float = None

    def as_dict(self):
        return {
            "runs": self.runs,
            "size_histogram": {str(k): v for k, v in
                               sorted(self.size_histogram.items())},
            "frac_localized": self.frac_localized,
            "frac_L2": self.frac_L2,
            "frac_L3": self.frac_L3,
            "ci_L2": list(self.ci_L2),
            "ci_L3": list(self.ci_L3),
            "mean_deviation": self.mean_deviation,
            "max_deviation": self.max_deviation,
        }


def batch_stats(summaries, params: Params) -> BatchAggregate:
    """Histogram of localization sizes, fractions at L+2 / L+3 with Wilson
    intervals, and profile deviations among the size-(L+2) runs."""
    if not summaries:
        raise ValueError("batch_stats needs at least one summary")
    n = len(summaries)
    hist = {}
    n_loc = n_l2 = n_l3 = 0
    devs = []
    for s in summaries:
        key = s.size if s.localized else -1
        hist[key] = hist.get(key, 0) + 1
        if not s.localized:
            continue
        n_loc += 1
        if s.size == params.L + 2:
            n_l2 += 1
            d = s.deviation
            if d != d:  # not yet compared
                d = compare_profile(s, params).deviation
            devs.append(d)
        elif s.size == params.L + 3:
            n_l3 += 1
    return BatchAggregate(
        runs=n, size_histogram=hist,
        frac_localized=n_loc / n, frac_L2=n_l2 / n, frac_L3=n_l3 / n,
        ci_L2=wilson_interval(n_l2, n), ci_L3=wilson_interval(n_l3, n),
        mean_deviation=float(np.mean(devs)) if devs else float("nan"),
        max_deviation=float(np.max(devs)) if devs else float("nan"))
