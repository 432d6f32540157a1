"""Continuous-time embedding of the walk via racing exponential clocks.

Each oriented edge (y, y+-1) carries a sequence of exponential clocks; the
k-th clock's raw duration has mean

    f_pm(y, k) = exp(2 beta [2(1+alpha) k - alpha 1{y+-1=0} + (1+alpha) 1{+-y<0}]),

and while the walker sits at y a clock's raw amount is consumed at rate
w(n) = exp(4 beta alpha n), n the visit count of the clock's target site.
The first clock to ring wins the race; the walker crosses that edge
instantaneously and the loser's residual is suspended.  The embedded jump
chain has the law of the discrete walk.

All residuals and ring times live in the log domain: w overflows double
precision after a few dozen visits, while log-domain depletion keeps
~1e-12 relative precision.  A numerically non-positive loser residual (or
an exact tie) raises ConstructionFailure rather than silently clamping.
"""

from dataclasses import dataclass, field
from math import exp, inf, log, log1p
from math import expm1 as math_expm1

import numpy as np


def _logaddexp(a: float, b: float) -> float:
    if a == -inf:
        return b
    if b == -inf:
        return a
    if a < b:
        a, b = b, a
    return a + log1p(exp(b - a))


def _safe_exp(x: float) -> float:
    try:
        return exp(x)
    except OverflowError:
        return inf

from .errors import ConstructionFailure
from .rng import keyed_std_exponential, philox
from .spectrum import Params
from .walk import Trajectory


class WeightSpec:
    """The clock-mean functions f_pm and the race weight w, in log domain.

    Defaults implement the two-factor rewrite of the jump law; custom
    positive functions may be supplied (w must be non-decreasing).
    """

    def __init__(self, alpha, beta, log_f_plus=None, log_f_minus=None,
                 log_w=None):
        self.alpha = alpha
        self.beta = beta
        self._log_f_plus = log_f_plus
        self._log_f_minus = log_f_minus
        self._log_w = log_w

    @classmethod
    def for_params(cls, params: Params) -> "WeightSpec":
        return cls(params.alpha, params.beta)

    def log_f(self, y: int, direction: int, n: int) -> float:
        if direction > 0 and self._log_f_plus is not None:
            return self._log_f_plus(y, n)
        if direction < 0 and self._log_f_minus is not None:
            return self._log_f_minus(y, n)
        a, b = self.alpha, self.beta
        target_origin = (y + direction) == 0
        behind = (direction * y) < 0
        return 2.0 * b * (2.0 * (1.0 + a) * n - a * target_origin
                          + (1.0 + a) * behind)

    def log_w(self, n: int) -> float:
        if self._log_w is not None:
            return self._log_w(n)
        return 4.0 * self.beta * self.alpha * n


def sample_clock(f_mean: float, rng) -> float:
    """log of one exponential raw clock amount with the given mean."""
    if f_mean <= 0.0:
        raise ValueError(f"clock mean must be > 0, got {f_mean}")
    return log(f_mean) + log(rng.standard_exponential())


class SequentialClockSource:
    """Clock draws taken in order of first use from one Philox stream."""

    def __init__(self, seed: int, block: int = 4096):
        self._gen = philox(seed)
        self._block = block
        self._buf = []
        self._i = 0

    def log_std_exponential(self, y, direction, k) -> float:
        if self._i == len(self._buf):
            self._buf = np.log(
                self._gen.standard_exponential(self._block)).tolist()
            self._i = 0
        v = self._buf[self._i]
        self._i += 1
        return v


class KeyedClockSource:
    """Stateless clock draws keyed by (site, direction, clock index).

    Order-independent, so two coupled walks see the identical collection
    without materializing it.  ``overrides`` pins raw values for chosen
    clocks (the held-out clock of a coupling experiment).
    """

    def __init__(self, seed: int, overrides=None):
        self._seed = seed
        self._overrides = dict(overrides or {})

    def log_std_exponential(self, y, direction, k) -> float:
        ov = self._overrides.get((y, direction, k))
        if ov is not None:
            return log(ov)  # interpreted as the raw xi itself, mean folded out
        return log(keyed_std_exponential(self._seed, y, 3 + direction, k))


@dataclass
class Clock:
    """Per-oriented-edge clock state.

    Consumed real time lives in the log domain (log_consumed = log T_y+-):
    clock means grow like exp(4 beta (1+alpha) k) with the clock index, so
    the raw accumulators overflow doubles long before interesting horizons.
    ``consumed_real`` exposes the linear value (inf once it overflows).
    """

    index: int = 0
    log_residual: float = None
    log_pending: float = -inf   # accrued sitting time not yet committed
    log_consumed: float = -inf  # log of the T accumulator

    @property
    def consumed_real(self) -> float:
        return _safe_exp(self.log_consumed)


@dataclass
class ClockBank:
    """All per-oriented-edge clock state of one trajectory."""

    clocks: dict = field(default_factory=dict)
    jumps: int = 0
    tail_snapshot: dict = field(default_factory=dict)  # (y,s) -> log_consumed
    tail_jump_mark: int = 0

    def clock(self, y: int, direction: int) -> Clock:
        key = (y, direction)
        c = self.clocks.get(key)
        if c is None:
            c = self.clocks[key] = Clock()
        return c


class RubinEngine:
    """One continuous-time walk driven by a clock source."""

    def __init__(self, params: Params, clock_source, weights: WeightSpec = None,
                 record_crossings: bool = False, record_races: bool = False):
        self.params = params
        self.weights = weights or WeightSpec.for_params(params)
        self.source = clock_source
        self.pos = 0
        self.log_time = -inf
        self.positions = [0]
        self.visits = {}  # Z: visit counts, start at 0 excluded
        self.bank = ClockBank()
        self.crossings = {} if record_crossings else None
        self.races = [] if record_races else None  # (site, winner, log_e)

    @property
    def time(self) -> float:
        return _safe_exp(self.log_time)

    def _armed(self, y: int, direction: int) -> Clock:
        c = self.bank.clock(y, direction)
        if c.log_residual is None:
            k = c.index
            c.log_residual = (self.weights.log_f(y, direction, k)
                              + self.source.log_std_exponential(y, direction, k))
            c.log_pending = -inf
        return c

    def race_step(self):
        """Run one race at the current site; returns (direction, elapsed)."""
        y = self.pos
        z = self.visits.get
        cp = self._armed(y, 1)
        cm = self._armed(y, -1)
        ring_p = cp.log_residual - self.weights.log_w(z(y + 1, 0))
        ring_m = cm.log_residual - self.weights.log_w(z(y - 1, 0))
        if ring_p == ring_m:
            raise ConstructionFailure(
                f"exact clock tie at site {y} after {self.bank.jumps} jumps")
        if ring_p < ring_m:
            direction, winner, loser, log_e, ring_l = 1, cp, cm, ring_p, ring_m
        else:
            direction, winner, loser, log_e, ring_l = -1, cm, cp, ring_m, ring_p
        # deplete the loser: its raw amount shrinks by the consumed fraction
        frac = exp(log_e - ring_l)
        if frac >= 1.0:
            raise ConstructionFailure(
                f"loser residual exhausted at site {y} after {self.bank.jumps} jumps")
        loser.log_residual += log1p(-frac)
        loser.log_pending = _logaddexp(loser.log_pending, log_e)
        winner.log_consumed = _logaddexp(
            winner.log_consumed, _logaddexp(winner.log_pending, log_e))
        winner.log_pending = -inf
        winner.log_residual = None
        winner.index += 1
        self.log_time = _logaddexp(self.log_time, log_e)
        if self.races is not None:
            self.races.append((y, direction, log_e))
        self.pos = y + direction
        self.visits[self.pos] = z(self.pos, 0) + 1
        self.positions.append(self.pos)
        self.bank.jumps += 1
        if self.crossings is not None:
            zlo = min(y, self.pos)
            self.crossings.setdefault(zlo, []).append(
                (z(zlo + 1, 0), z(zlo, 0)))
        return direction, _safe_exp(log_e)


def race(engine: RubinEngine):
    """One race at the engine's current site: (direction, elapsed time)."""
    return engine.race_step()


def simulate_rubin(params: Params, jumps: int, seed: int,
                   weights: WeightSpec = None):
    """Full construction for a fixed number of jumps.

    Returns (Trajectory of the embedded walk, ClockBank with per-edge
    consumed-time accumulators and a snapshot at the 90% jump mark).
    """
    if jumps < 0:
        raise ValueError(f"jumps must be >= 0, got {jumps}")
    engine = RubinEngine(params, SequentialClockSource(seed), weights)
    mark = (9 * jumps) // 10
    engine.bank.tail_jump_mark = mark
    for k in range(jumps):
        if k == mark:
            engine.bank.tail_snapshot = {
                key: c.log_consumed for key, c in engine.bank.clocks.items()}
        engine.race_step()
    traj = Trajectory(positions=engine.positions, seed=seed, params=params)
    return traj, engine.bank


def ty_report(bank: ClockBank) -> dict:
    """Per-site consumed-time accumulators and tail-increment diagnostics.

    tail_fraction is the share of (T_y+ + T_y-) accumulated during the
    last 10% of jumps; a vanishing value signals the geometric decay of
    clock rates at that site (finite-sum trend, no almost-sure claim).
    """
    sites = sorted({y for (y, _s) in bank.clocks})
    report = {}
    for y in sites:
        lp = bank.clocks.get((y, 1), Clock()).log_consumed
        lm = bank.clocks.get((y, -1), Clock()).log_consumed
        lp0 = bank.tail_snapshot.get((y, 1), -inf)
        lm0 = bank.tail_snapshot.get((y, -1), -inf)
        log_total = _logaddexp(lp, lm)
        log_mark = _logaddexp(lp0, lm0)
        if log_total == -inf:
            frac = 0.0
        elif log_mark == -inf:
            frac = 1.0
        else:
            # tail/total = 1 - T_mark/T_total, stable for huge accumulators
            frac = max(0.0, -math_expm1(log_mark - log_total))
        report[y] = {
            "t_plus": _safe_exp(lp),
            "t_minus": _safe_exp(lm),
            "log_t_plus": lp,
            "log_t_minus": lm,
            "tail_fraction": frac,
        }
    return report


@dataclass
class CoupleReport:
    """Pathwise monotone-coupling check for a held-out clock."""

    site: int
    u1: float
    u2: float
    positions1: list
    positions2: list
    compared: int
    violations: int


def couple(hold_out: int, u1: float, u2: float, shared_seed: int,
           jumps: int, params: Params, weights: WeightSpec = None) -> CoupleReport:
    """Run two walks on one shared clock collection, differing only in the
    first plus-clock at ``hold_out`` (u1 for walk 1, u2 for walk 2).

    With u1 < u2, walk 1's clock collection dominates walk 2's, and at the
    matched i-th crossing of every non-oriented edge {z, z+1} the visit
    counts must satisfy Z1(z+1) >= Z2(z+1) and Z1(z) <= Z2(z).
    """
    engines = []
    for u in (u1, u2):
        src = KeyedClockSource(shared_seed, overrides={(hold_out, 1, 0): u})
        eng = RubinEngine(params, src, weights, record_crossings=True)
        for _ in range(jumps):
            eng.race_step()
        engines.append(eng)
    e1, e2 = engines
    compared = violations = 0
    for z in set(e1.crossings) | set(e2.crossings):
        pairs1 = e1.crossings.get(z, [])
        pairs2 = e2.crossings.get(z, [])
        for (zr1, zl1), (zr2, zl2) in zip(pairs1, pairs2):
            compared += 1
            if zr1 < zr2 or zl1 > zl2:
                violations += 1
    return CoupleReport(site=hold_out, u1=u1, u2=u2,
                        positions1=e1.positions, positions2=e2.positions,
                        compared=compared, violations=violations)


def equivalence_report(params: Params, horizon: int, runs: int,
                       seed: int) -> dict:
    """Compare the embedded walk's path law with the exact discrete law.

    Draws ``runs`` embedded trajectories of length ``horizon`` and returns
    the total-variation distance to the exact law plus a chi-square
    goodness-of-fit p-value (cells with expected count < 5 pooled).
    """
    from scipy.stats import chisquare

    from .walk import exact_path_law

    law = exact_path_law(params, horizon)
    emp = sample_embedded_paths(params, horizon, runs, seed)
    paths = sorted(law)
    expected = np.array([law[p] * runs for p in paths])
    observed = np.array([emp.get(p, 0) for p in paths], dtype=float)
    tv = 0.5 * float(np.sum(np.abs(observed / runs
                                   - expected / runs)))
    # pool small-expectation cells so the chi-square approximation holds
    order = np.argsort(expected)
    exp_s, obs_s = expected[order], observed[order]
    pooled_e, pooled_o = [], []
    acc_e = acc_o = 0.0
    for e, o in zip(exp_s, obs_s):
        acc_e += e
        acc_o += o
        if acc_e >= 5.0:
            pooled_e.append(acc_e)
            pooled_o.append(acc_o)
            acc_e = acc_o = 0.0
    if acc_e > 0.0 and pooled_e:
        pooled_e[-1] += acc_e
        pooled_o[-1] += acc_o
    stat, pvalue = chisquare(pooled_o, f_exp=pooled_e)
    return {
        "horizon": horizon, "runs": runs, "seed": seed,
        "alpha": params.alpha, "beta": params.beta,
        "tv_distance": tv, "chi2_stat": float(stat),
        "chi2_pvalue": float(pvalue), "cells": len(pooled_e),
    }


def sample_embedded_paths(params: Params, horizon: int, runs: int,
                          seed: int) -> dict:
    """Empirical law of the embedded walk's first ``horizon`` jumps.

    Vectorized across ``runs`` independent trajectories (same construction
    as RubinEngine, advanced in lockstep); returns {position tuple: count}.
    Used for the distributional-equivalence check against the exact
    discrete path law.
    """
    a, b = params.alpha, params.beta
    S = 2 * horizon + 3
    origin = horizon + 1
    coords = np.arange(S) - origin
    rng = philox(seed)

    pos = np.full(runs, origin, dtype=np.int64)
    Z = np.zeros((runs, S), dtype=np.int64)
    N = np.zeros((runs, S, 2), dtype=np.int64)  # [..., 0]=minus, [..., 1]=plus
    logres = np.zeros((runs, S, 2))
    armed = np.zeros((runs, S, 2), dtype=bool)
    codes = np.zeros(runs, dtype=np.int64)
    idx = np.arange(runs)
    log_w_coef = 4.0 * b * a

    for _ in range(horizon):
        for si, s in ((0, -1), (1, 1)):
            cur = armed[idx, pos, si]
            k = N[idx, pos, si]
            target = coords[pos] + s
            log_f = 2.0 * b * (2.0 * (1.0 + a) * k
                               - a * (target == 0)
                               + (1.0 + a) * (s * coords[pos] < 0))
            draw = log_f + np.log(rng.standard_exponential(runs))
            logres[idx, pos, si] = np.where(cur, logres[idx, pos, si], draw)
            armed[idx, pos, si] = True
        ring_m = logres[idx, pos, 0] - log_w_coef * Z[idx, pos - 1]
        ring_p = logres[idx, pos, 1] - log_w_coef * Z[idx, pos + 1]
        right = ring_p < ring_m
        if np.any(ring_p == ring_m):
            raise ConstructionFailure("exact clock tie in vectorized sampler")
        log_e = np.minimum(ring_p, ring_m)
        ring_l = np.maximum(ring_p, ring_m)
        li = np.where(right, 0, 1)
        with np.errstate(invalid="raise"):
            logres[idx, pos, li] += np.log1p(-np.exp(log_e - ring_l))
        wi = 1 - li
        armed[idx, pos, wi] = False
        N[idx, pos, wi] += 1
        pos = pos + np.where(right, 1, -1)
        Z[idx, pos] += 1
        codes = 2 * codes + right
    counts = np.bincount(codes, minlength=1 << horizon)
    out = {}
    for code in np.nonzero(counts)[0]:
        p = 0
        path = []
        for i in range(horizon - 1, -1, -1):
            p += 1 if (code >> i) & 1 else -1
            path.append(p)
        out[tuple(path)] = int(counts[code])
    return out
