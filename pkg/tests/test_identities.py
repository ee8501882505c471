import json
from dataclasses import replace
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_verify.coefficients import (FrameParams, Multipliers, ProblemParams, critical_p,
                                           solve_S)
from liouville_verify.errors import DomainError, GatingError
from liouville_verify.identities import (FREE_IDENTITIES, IDENTITIES, TOL, TOL_EXTENDED,
                                         DivergenceBundle, Jet3, _env, _identity_i,
                                         _identity_v, cauchy_schwarz_gap, disambiguation,
                                         divergences, oracle_divergences, pde_residuals,
                                         relative_residual, residual, run_suite, sample_jet,
                                         scaling_coherence, splitmix64, structure_inequality,
                                         suite_frame, trace_invariants, trial_seeds)

seeds = st.integers(0, 2**32 - 1)
DIMS = (3, 5, 7, 10)
CHOICES = ("small-gamma", "large-gamma")


def setup(n, choice, M=1):
    prob = ProblemParams(n, critical_p(n), M=M)
    return prob, suite_frame(n, choice, prob)


def jet_for(ident, seed, n, prob, **kw):
    return sample_jet(seed, n, "free" if ident in FREE_IDENTITIES else "pde", prob, **kw)


def with_oracle(jet, alpha, gamma, prob, frame):
    e = _env(jet, alpha, gamma, prob, frame, "float")
    return replace(e, div=DivergenceBundle(**oracle_divergences(jet, alpha, gamma, prob)))


# -- jets ----------------------------------------------------------------------

def test_sample_jet_reproducible_and_in_range():
    a, b = sample_jet(42, 3), sample_jet(42, 3)
    assert a.v == b.v and np.array_equal(a.hessian, b.hessian) and np.array_equal(a.third, b.third)
    assert 0.5 <= a.v <= 1.5 and 0.5 <= a.g <= 1.5


def test_pde_trace_constraint_simple_case():
    prob = ProblemParams(5, 2, M=0)
    jet = sample_jet(3, 5, "pde", prob)
    assert abs(jet.laplacian + jet.v**2) < 1e-14


@given(seeds, st.sampled_from(DIMS))
def test_pde_residuals_vanish(seed, n):
    prob = ProblemParams(n, critical_p(n), M=F(3, 2), N=F(2, 3))
    assert max(abs(r) for r in pde_residuals(sample_jet(seed, n, "pde", prob), prob)) < 1e-12


def test_jet_symmetry_enforced():
    H = np.eye(3)
    H[0, 1] = 1
    with pytest.raises(ValueError):
        Jet3(3, 1.0, 1.0, H, np.zeros((3, 3, 3)))


def test_splitmix_reference_vector():
    # first output of splitmix64 seeded with 0
    assert splitmix64(0)[1] == 0xE220A8397B1DCDAF
    assert trial_seeds(5, 4) == trial_seeds(5, 4)
    assert len(set(trial_seeds(1, 1000))) == 1000


# -- worked examples -------------------------------------------------------------

@given(seeds, st.sampled_from(DIMS), st.sampled_from(CHOICES))
def test_identity_iii_is_algebraic(seed, n, choice):
    prob, frame = setup(n, choice)
    jet = sample_jet(seed, n)
    assert residual("iii", jet, frame.alpha, frame.gamma, prob, frame) < 1e-12


def test_identity_i_example_against_oracle():
    prob = ProblemParams.critical(4)
    frame = FrameParams.adapted(4, 3, solve_S(4, 3), -2)
    jet = sample_jet(7, 4)
    assert residual("i", jet, -2, 3, prob, frame) < TOL
    e = with_oracle(jet, F(-2), F(3), prob, frame)
    assert relative_residual(*_identity_i(e)) < TOL


def test_master_identity_example_against_oracle():
    prob = ProblemParams(7, F(9, 5), M=1)
    frame = FrameParams.large_gamma(7)
    jet = sample_jet(11, 7, "pde", prob)
    assert residual("v", jet, frame.alpha, frame.gamma, prob, frame) < TOL
    e = with_oracle(jet, frame.alpha, frame.gamma, prob, frame)
    assert relative_residual(*_identity_v(e)) < TOL


@settings(max_examples=40)
@given(seeds, st.sampled_from(DIMS), st.fractions(-6, 2, max_denominator=7),
       st.sampled_from([0, 3, 4, F(9, 2)]))
def test_chain_rule_divergences_match_finite_differences(seed, n, alpha, gamma):
    prob = ProblemParams(n, critical_p(n), M=1)
    jet = sample_jet(seed, n, "pde", prob)
    d = divergences(jet, alpha, gamma, prob).as_dict()
    o = oracle_divergences(jet, alpha, gamma, prob)
    for k, val in o.items():
        assert abs(d[k] - val) <= 1e-7 * (1 + abs(val)), k


# -- residuals across configurations ----------------------------------------------

@settings(max_examples=40)
@given(seeds, st.sampled_from(DIMS), st.sampled_from(CHOICES), st.sampled_from([0, F(1, 2), 2]))
def test_all_identities_float(seed, n, choice, M):
    prob, frame = setup(n, choice, M)
    for ident in IDENTITIES:
        jet = jet_for(ident, seed, n, prob)
        assert residual(ident, jet, frame.alpha, frame.gamma, prob, frame) < TOL, ident


@pytest.mark.parametrize("choice", CHOICES)
@pytest.mark.parametrize("ident", IDENTITIES)
def test_all_identities_extended_precision(ident, choice):
    prob, frame = setup(7, choice)
    for seed in (1, 2, 3):
        jet = jet_for(ident, seed, 7, prob)
        assert residual(ident, jet, frame.alpha, frame.gamma, prob, frame,
                        backend="mpmath") < TOL_EXTENDED


@pytest.mark.parametrize("gamma,S,alpha", [(0, F(1, 5), -2), (4, F(1, 3), -3), (6, F(2, 7), 1)])
@pytest.mark.parametrize("ident", IDENTITIES)
def test_all_identities_exact_zero(ident, gamma, S, alpha):
    # integer p and M = 0 keep every power rational
    prob = ProblemParams(5, 2, M=0)
    frame = FrameParams.adapted(5, gamma, S, alpha)
    jet = jet_for(ident, 9, 5, prob, exact=True)
    assert residual(ident, jet, alpha, gamma, prob, frame, backend="exact") == 0


def test_exact_backend_rejects_irrational_powers():
    prob = ProblemParams(7, F(9, 5), M=1)
    frame = FrameParams.small_gamma(7, F(9, 5), F(1, 10**4))
    jet = sample_jet(1, 7, "free", exact=True)
    with pytest.raises(DomainError):
        residual("i", jet, frame.alpha, 0, prob, frame, backend="exact")


# -- toggles and controls ---------------------------------------------------------------

def test_disambiguation_single_reading_passes():
    out = disambiguation(trials=10, seed=3)
    assert out["g11_base=alpha"]["passes"] and not out["g11_base=gamma"]["passes"]
    assert out["sum_form=corrected"]["passes"] and not out["sum_form=literal"]["passes"]
    assert out["g11_base=gamma"]["ii"] > 1e-3


def test_negative_control_free_jet_fails_master_identity():
    prob, frame = setup(7, "large-gamma")
    res = [residual("v", sample_jet(s, 7, "free"), frame.alpha, frame.gamma, prob, frame)
           for s in trial_seeds(0, 200)]
    assert np.median(res) > 1e-3
    assert min(res) > TOL


# -- invariants and the structure inequality --------------------------------------------

@given(seeds, st.sampled_from(DIMS), st.sampled_from(CHOICES))
def test_trace_invariants_and_cauchy_schwarz(seed, n, choice):
    prob, frame = setup(n, choice)
    jet = sample_jet(seed, n)
    g_tr, e_tr = trace_invariants(jet, frame)
    assert abs(g_tr) < 1e-12 and abs(e_tr) < 1e-12
    assert cauchy_schwarz_gap(jet, frame) >= -1e-12


def test_trace_invariants_exact():
    frame = FrameParams.adapted(5, 4, F(1, 3), -3)
    jet = sample_jet(4, 5, exact=True)
    assert trace_invariants(jet, frame, "exact") == (0, 0)


@settings(max_examples=40)
@given(seeds, st.sampled_from(DIMS), st.sampled_from(CHOICES),
       st.tuples(*[st.sampled_from([0, F(1, 2), 1, 3])] * 3))
def test_structure_inequality(seed, n, choice, ptu):
    prob, frame = setup(n, choice)
    chk = structure_inequality(sample_jet(seed, n, "pde", prob), prob, frame, Multipliers(*ptu))
    assert chk.ok
    assert chk.value <= TOL * chk.scale
    assert abs(chk.value + chk.gap) <= TOL * chk.scale


def test_structure_inequality_gated_on_b2():
    prob = ProblemParams(7, F(9, 5), M=1)
    frame = FrameParams.adapted(7, 3, F(1, 3), -4)
    with pytest.raises(GatingError):
        structure_inequality(sample_jet(1, 7, "pde", prob), prob, frame, Multipliers())


@given(seeds, st.sampled_from([F(1, 2), 2, 3]))
def test_scaling_coherence_at_critical_q(seed, k):
    prob, frame = setup(7, "large-gamma")
    out = scaling_coherence(sample_jet(seed, 7, "pde", prob), prob, frame, k)
    assert out["signs_agree"] and out["argmax_same"]
    assert out["log_ratio_spread"] < 1e-9


def test_scaling_coherence_broken_off_critical_q():
    prob, frame = setup(7, "large-gamma")
    out = scaling_coherence(sample_jet(5, 7, "pde", prob), prob, frame, 2,
                            q_override=prob.q + F(1, 20))
    assert out["log_ratio_spread"] > 1e-3


# -- errors and suite ---------------------------------------------------------------------

def test_domain_errors():
    prob, frame = setup(5, "small-gamma")
    jet = sample_jet(1, 5)
    bad_v = Jet3(5, -0.5, jet.g, jet.hessian, jet.third)
    bad_g = Jet3(5, jet.v, 0.0, jet.hessian, jet.third)
    for j in (bad_v, bad_g):
        with pytest.raises(DomainError):
            residual("i", j, frame.alpha, frame.gamma, prob, frame)
    with pytest.raises(ValueError):
        residual("vii", jet, frame.alpha, frame.gamma, prob, frame)
    with pytest.raises(DomainError):
        sample_jet(1, 2)


def test_suite_small_run_is_deterministic():
    a = run_suite(trials=15, seed=4, dims=(3, 7))
    b = run_suite(trials=15, seed=4, dims=(3, 7), jobs=2)
    assert a.passed
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
