"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (python3 tests/test_acceptance.py) or through pytest, where the
lines are collected into an "acceptance criteria" section of the summary.
"""

import time
from fractions import Fraction as F

import mpmath as mp
import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from liouville_verify.claims import verify_all
from liouville_verify.coefficients import (EPS_GRID, FrameParams, Multipliers, ProblemParams,
                                           coefficients, critical_p, k_set, solve_S, square_gap,
                                           tau_value)
from liouville_verify.exact import QuadExt, as_interval, exact_sign
from liouville_verify.identities import TOL, run_suite
from liouville_verify.shooter import (ShotConfig, default_heights, lane_emden_error,
                                      scaling_check, sweep)
from liouville_verify.thresholds import (closing_certificate, discriminant_delta,
                                         lemma_m2_lt_m1, m1, m2, small_n_verify)
from liouville_verify.young import p_grid, scan


def report(number, title, ok, seconds, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({seconds:.1f} s){'  ' + detail if detail else ''}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def test_criterion_1_identity_suite():
    s, secs = timed(lambda: run_suite(trials=1000, seed=0, dims=(3, 5, 7, 10)))
    worst = max(r for c in s.configs for r in c.max_residual.values())
    neg = s.negative_control
    ok = s.passed and worst < TOL and neg["median"] > 1e-3 and neg["min"] > TOL and secs < 30
    report(1, "identity suite, 1000 jets x 8 configurations", ok, secs,
           f"max residual {worst:.2e}, negative-control median {neg['median']:.2e}")
    assert s.passed and worst < TOL
    assert neg["median"] > 1e-3 and neg["min"] > TOL
    assert secs < 30


def test_criterion_2_claims():
    reps, secs = timed(lambda: verify_all(n_max=500))
    by = {r.claim: r for r in reps}
    certs = {c.name: c.ok for r in reps for c in r.certificates}
    needed = ["h1 < 0 on [9, inf)", "2.5n^4 - 4.2n^3 + 29n^2 - 34n + 4 > 0 on [7, inf)",
              "D1 D2 = (2 + sqrt(Delta'))/(n-1)"]
    closing = closing_certificate().positive
    ok = (all(r.ok for r in reps) and all(certs.get(k) for k in needed) and closing
          and secs < 60)
    report(2, "claims 1-10 to n_max = 500 with certificates", ok, secs,
           ", ".join(f"{c}:{by[c].verdict}" for c in sorted(by)))
    assert all(r.ok for r in reps), [(r.claim, r.verdict) for r in reps if not r.ok]
    assert all(certs.get(k) for k in needed) and closing
    assert secs < 60


def test_criterion_3_constants():
    def work():
        return (m1(7, F(9, 5)), m2(7, F(9, 5)), discriminant_delta(7, F(9, 5)),
                discriminant_delta(8, F(5, 3)))
    (M1, rep2, d7, d8), secs = timed(work)
    ref = oracles.m1_uncollapsed(7, F(9, 5))
    agree = abs(oracles.mpf(M1.mid) - ref) < mp.mpf(10) ** -6
    widths = all(x.width < F(1, 10**6) for x in (M1, rep2.value, d7, d8))
    ok = (M1.certainly_gt(F(26, 10)) and agree and rep2.value.certainly_lt(F(8, 10))
          and d7.certainly_gt(F(284, 1000)) and d8.certainly_gt(F(322, 1000)) and widths)
    report(3, "M1 > 2.6, M2 < 0.8, Delta bounds at n = 7, 8", ok, secs,
           f"M1 = {float(M1.mid):.9f}, M2 = {float(rep2.value.mid):.6f}, "
           f"Delta7 = {float(d7.mid):.6f}, Delta8 = {float(d8.mid):.6f}")
    assert M1.certainly_gt(F(26, 10)) and agree
    assert rep2.value.certainly_lt(F(8, 10))
    assert d7.certainly_gt(F(284, 1000)) and d8.certainly_gt(F(322, 1000))
    assert widths


def test_criterion_4_lemma():
    tab, secs = timed(lambda: lemma_m2_lt_m1(range(7, 101), p_points=20))
    ok = tab.certified and not tab.inconclusive and len(tab.rows) == 94 * 20
    report(4, "M2 < M1 for n in [7, 100], 20 p-points each", ok, secs,
           f"{len(tab.rows)} points, {len(tab.inconclusive)} inconclusive")
    assert ok


def test_criterion_5_small_n():
    def work():
        good = {n: [small_n_verify(n, p) for p in p_grid(n, 20)] for n in (3, 4, 5, 6)}
        bad = [small_n_verify(7, p) for p in p_grid(7, 20)]
        return good, bad
    (good, bad), secs = timed(work)
    holds = all(r.holds for rows in good.values() for r in rows)
    fails7 = all(not r.holds for r in bad)
    u_ok = all(r.U == (1 + r.q / n if n < 5 else 1 + 2 * r.q / n)
               for n, rows in good.items() for r in rows)
    ok = holds and fails7 and u_ok
    report(5, "K3 >= eps0, K5 >= sqrt(eps0) for n = 3..6; n = 7 fails", ok, secs)
    assert holds and u_ok
    assert fails7


def _invariants():
    out = {}
    # b2 at the root: exact for eps = 0, bracketed for eps > 0
    exact_ok = bracket_ok = True
    for n in range(7, 41):
        frame = FrameParams.large_gamma(n)
        exact_ok &= coefficients(ProblemParams.critical(n), frame).b2 == 0
    for n in (7, 8, 20):
        for eps in EPS_GRID:
            b2 = as_interval(coefficients(ProblemParams.critical(n),
                                          FrameParams.large_gamma(n, eps)).b2)
            bracket_ok &= b2.contains(0) and b2.mag() < F(1, 10**12)
    out["b2"] = exact_ok and bracket_ok
    # structural zeros and the three B0 forms
    zeros = b0 = True
    for n in range(3, 41):
        for gamma in (0, 3, 5):
            S = solve_S(n, gamma)
            frame = FrameParams.adapted(n, gamma, S, -gamma - 1)
            co = coefficients(ProblemParams.critical(n), frame)
            zeros &= co.b3 == 0 and co.b5 == co.c2
            b0 &= (co.a2 + co.a1 / (n - 1) == co.B0
                   == co.Lam * (1 + gamma + F(1, n - 1)) == co.a1 * (F(n, n - 1) + gamma))
    out["b3, b5"] = zeros
    out["B0"] = b0
    # 10^4 random admissible tuples for the square identity
    rng = np.random.default_rng(2024)
    ctx = {}
    sq = True
    for _ in range(10_000):
        n = int(rng.integers(7, 31))
        if n not in ctx:
            prob = ProblemParams.critical(n)
            frame = FrameParams.large_gamma(n)
            ctx[n] = (prob, frame, coefficients(prob, frame))
        prob, frame, co = ctx[n]
        P, T, U = (F(int(k), 64) for k in rng.integers(0, 257, 3))
        mult = Multipliers(P, T, U)
        ks = k_set(co, mult, prob, frame)
        gap = square_gap(co, mult, prob, frame)
        sq &= ks.K6 - ks.K2 - ks.K3 == gap and exact_sign(gap) >= 0
    out["K6 - K2 - K3 square"] = sq
    # tau on an S-grid
    tau_ok = True
    for n in range(3, 21):
        for k in range(1, 200):
            S = F(k, 200)
            tau = tau_value(n, S, (1 - S) / (n - 1))
            tau_ok &= tau >= 0 and ((tau == 0) == (S == F(1, n)))
        tau_ok &= tau_value(n, F(1, n), F(1, n)) == 0
    out["tau"] = tau_ok
    return out


def test_criterion_6_structural_invariants():
    out, secs = timed(_invariants)
    ok = all(out.values())
    report(6, "structural invariants", ok, secs,
           ", ".join(f"{k}:{'ok' if v else 'FAIL'}" for k, v in out.items()))
    assert ok, out


def test_criterion_7_young():
    def work():
        scans = [scan(n, "small-gamma") for n in range(3, 51)]
        scans += [scan(n, "large-gamma") for n in range(7, 51)]
        return scans
    scans, secs = timed(work)
    bad = [(s.n, s.choice) for s in scans if not s.feasible]
    ok = not bad
    report(7, "Young exponent feasibility for n in [3, 50]", ok, secs,
           f"{len(scans)} scans, infeasible: {bad or 'none'}")
    assert ok


def test_criterion_8_shooter():
    def work():
        le = lane_emden_error(3, 10.0)
        cfg = ShotConfig(5, 2, M=1, a=1, r_max=20)
        crit = {k: scaling_check(cfg, k) for k in (0.5, 2, 5)}
        pert = {k: scaling_check(ShotConfig(5, 2, M=1, a=1, r_max=20, q_shift=0.05), k)
                for k in (0.5, 2, 5)}
        sweeps = [sweep(5, 2, M, default_heights(10, 0.1, 10)) for M in (0.5, 1, 4)]
        return le, crit, pert, sweeps
    (le, crit, pert, sweeps), secs = timed(work)
    crossed = all(set(s.classes) == {"crossed"} and s.consistent for s in sweeps)
    ok = (le < 1e-6 and max(crit.values()) < 1e-6 and min(pert.values()) > 1e-3 and crossed
          and secs < 20)
    report(8, "shooter validation", ok, secs,
           f"Lane-Emden {le:.1e}, scaling {max(crit.values()):.1e}, "
           f"perturbed {min(pert.values()):.1e}")
    assert le < 1e-6
    assert max(crit.values()) < 1e-6 and min(pert.values()) > 1e-3
    assert crossed
    assert secs < 20


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
