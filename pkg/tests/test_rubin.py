import math

import numpy as np
import pytest

from stuckwalk import rubin, walk
from stuckwalk.errors import ConstructionFailure
from stuckwalk.rng import philox
from stuckwalk.spectrum import Params

P21 = Params.make(2.0, 1.0)
P205 = Params.make(2.0, 0.5)


class FixedExp:
    """Stub rng returning prescribed standard-exponential draws."""

    def __init__(self, values):
        self.values = list(values)

    def standard_exponential(self):
        return self.values.pop(0)


# ------------------------------------------------------------ sample_clock


def test_sample_clock_unit_draw():
    assert rubin.sample_clock(1.0, FixedExp([1.0])) == 0.0


def test_sample_clock_mean():
    gen = philox(5)
    vals = [math.exp(rubin.sample_clock(3.0, gen)) for _ in range(200000)]
    assert np.mean(vals) == pytest.approx(3.0, abs=0.02)


def test_sample_clock_rejects_bad_mean():
    with pytest.raises(ValueError):
        rubin.sample_clock(0.0, FixedExp([1.0]))


# ------------------------------------------------------------ weights


def test_weight_spec_defaults():
    ws = rubin.WeightSpec.for_params(P21)
    # at the origin both first clocks have mean 1
    assert ws.log_f(0, 1, 0) == 0.0
    assert ws.log_f(0, -1, 0) == 0.0
    # stepping toward the origin: target-origin factor -alpha plus the
    # "behind" factor (1 + alpha), net 2 beta (1) for alpha=2, beta=1
    assert ws.log_f(1, -1, 0) == pytest.approx(2.0)
    assert ws.log_f(-1, 1, 0) == pytest.approx(2.0)
    # stepping outward from outside the origin: no extra factors
    assert ws.log_f(2, 1, 0) == 0.0
    assert ws.log_f(-2, -1, 0) == 0.0
    # clock-index growth factor
    assert ws.log_f(0, 1, 1) == pytest.approx(2.0 * 2.0 * 3.0)
    assert ws.log_w(3) == pytest.approx(4.0 * 1.0 * 2.0 * 3)


def test_weight_identity_joint_replay():
    # log w(Z_k(y+1)) - log f+(y, N_k(y, y+1)) must equal
    # 2 beta (-l_k(y+1) + alpha l_k(y+2)) at every visited state
    ws = rubin.WeightSpec.for_params(P21)
    traj, _ = rubin.simulate_rubin(P21, 2000, seed=31)
    pos = traj.positions
    a, b = 2.0, 1.0
    Z, lt, N = {}, {}, {}
    for k in range(len(pos) - 1):
        y = pos[k]
        lhs_p = ws.log_w(Z.get(y + 1, 0)) - ws.log_f(y, 1, N.get((y, 1), 0))
        rhs_p = 2.0 * b * (-lt.get(y + 1, 0) + a * lt.get(y + 2, 0))
        assert lhs_p == pytest.approx(rhs_p, abs=1e-9 * max(1, abs(rhs_p)))
        lhs_m = ws.log_w(Z.get(y - 1, 0)) - ws.log_f(y, -1, N.get((y, -1), 0))
        rhs_m = 2.0 * b * (-lt.get(y, 0) + a * lt.get(y - 1, 0))
        assert lhs_m == pytest.approx(rhs_m, abs=1e-9 * max(1, abs(rhs_m)))
        nxt = pos[k + 1]
        s = nxt - y
        N[(y, s)] = N.get((y, s), 0) + 1
        j = max(y, nxt)
        lt[j] = lt.get(j, 0) + 1
        Z[nxt] = Z.get(nxt, 0) + 1


# ------------------------------------------------------------ race


def _keyed_engine(overrides, seed=77, params=P21):
    src = rubin.KeyedClockSource(seed, overrides=overrides)
    return rubin.RubinEngine(params, src)


def test_race_documented_example():
    # xi- = 0.7, xi+ = 0.3 at the origin, w(0) = 1: jump +1 at time 0.3,
    # loser keeps raw residual 0.4
    eng = _keyed_engine({(0, 1, 0): 0.3, (0, -1, 0): 0.7})
    direction, elapsed = rubin.race(eng)
    assert direction == 1
    assert elapsed == pytest.approx(0.3, rel=1e-12)
    loser = eng.bank.clock(0, -1)
    assert math.exp(loser.log_residual) == pytest.approx(0.4, rel=1e-12)


def test_race_tie_is_construction_failure():
    eng = _keyed_engine({(0, 1, 0): 0.5, (0, -1, 0): 0.5})
    with pytest.raises(ConstructionFailure):
        rubin.race(eng)


def test_race_first_step_symmetric():
    n = 20000
    right = 0
    for i in range(n):
        eng = rubin.RubinEngine(P21, rubin.SequentialClockSource(i))
        d, _ = eng.race_step()
        right += d == 1
    assert right / n == pytest.approx(0.5, abs=0.011)


def test_residual_decreases_across_suspensions():
    eng = rubin.RubinEngine(P21, rubin.SequentialClockSource(123))
    seen = {}
    for _ in range(500):
        y = eng.pos
        before = {s: eng.bank.clock(y, s).log_residual for s in (1, -1)}
        eng.race_step()
        for s in (1, -1):
            c = eng.bank.clock(y, s)
            if before[s] is not None and c.log_residual is not None:
                # non-strict: a depletion below ~1e-16 relative is not
                # representable in the log-domain residual
                assert c.log_residual <= before[s]


# ------------------------------------------------------------ simulate


def test_simulate_rubin_zero_jumps():
    traj, bank = rubin.simulate_rubin(P21, 0, seed=1)
    assert traj.positions == [0]
    assert rubin.ty_report(bank) == {}


def test_simulate_rubin_deterministic():
    t1, _ = rubin.simulate_rubin(P21, 500, seed=9)
    t2, _ = rubin.simulate_rubin(P21, 500, seed=9)
    assert t1.positions == t2.positions


def test_no_construction_failure_long_run():
    traj, _ = rubin.simulate_rubin(P21, 100000, seed=17)
    assert len(traj.positions) == 100001


def test_ty_accounting_identity():
    # T_y+- equals the log-sum of the race durations committed to it
    eng = rubin.RubinEngine(P21, rubin.SequentialClockSource(41),
                            record_races=True)
    for _ in range(3000):
        eng.race_step()
    last_win = {}
    for i, (y, s, _log_e) in enumerate(eng.races):
        last_win[(y, s)] = i
    for key, c in eng.bank.clocks.items():
        if key not in last_win:
            assert c.log_consumed == -math.inf
            continue
        y, _s = key
        logs = [log_e for i, (site, _w, log_e) in enumerate(eng.races)
                if site == y and i <= last_win[key]]
        expect = logs[0]
        for v in logs[1:]:
            expect = np.logaddexp(expect, v)
        assert c.log_consumed == pytest.approx(expect, abs=1e-9)


def test_ty_boundary_tail_fraction_small():
    traj, bank = rubin.simulate_rubin(P21, 10000, seed=7)
    rep = rubin.ty_report(bank)
    sites = sorted(rep)
    # outermost sites: clock activity froze long before the tail
    assert rep[sites[0]]["tail_fraction"] < 1e-6
    assert rep[sites[-1]]["tail_fraction"] < 1e-6
    for r in rep.values():
        assert r["t_plus"] >= 0.0 and r["t_minus"] >= 0.0


def test_embedded_law_matches_exact_sequential():
    horizon, n = 4, 20000
    law = walk.exact_path_law(P21, horizon)
    counts = {}
    for i in range(n):
        traj, _ = rubin.simulate_rubin(P21, horizon, seed=50000 + i)
        key = tuple(traj.positions[1:])
        counts[key] = counts.get(key, 0) + 1
    tv = 0.5 * sum(abs(counts.get(p, 0) / n - q) for p, q in law.items())
    assert tv < 0.02


def test_vectorized_sampler_matches_sequential():
    horizon, n = 5, 30000
    emp = rubin.sample_embedded_paths(P205, horizon, n, seed=13)
    assert sum(emp.values()) == n
    law = walk.exact_path_law(P205, horizon)
    tv = 0.5 * sum(abs(emp.get(p, 0) / n - q) for p, q in law.items())
    assert tv < 0.02


def test_equivalence_report():
    rep = rubin.equivalence_report(P21, 6, 100000, seed=42)
    assert rep["tv_distance"] <= 0.01
    assert rep["chi2_pvalue"] > 0.001


# ------------------------------------------------------------ coupling


def test_couple_identical_u():
    rep = rubin.couple(0, 0.5, 0.5, shared_seed=99, jumps=200, params=P21)
    assert rep.positions1 == rep.positions2
    assert rep.violations == 0


def test_couple_tiny_u_first_jump_right():
    rep = rubin.couple(0, 1e-300, 0.5, shared_seed=5, jumps=50, params=P21)
    assert rep.positions1[1] == 1


def test_couple_no_violations_randomized():
    from stuckwalk.rng import keyed_uniform

    total = 0
    for i in range(60):
        ua = keyed_uniform(2024, 1, i)
        ub = keyed_uniform(2024, 2, i)
        u1, u2 = min(ua, ub), max(ua, ub)
        rep = rubin.couple(0, u1, u2, shared_seed=3000 + i, jumps=400,
                           params=P21)
        total += rep.compared
        assert rep.violations == 0
    assert total > 0
