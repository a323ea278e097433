import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyadic_mhd import analysis
from dyadic_mhd.analysis import (
    VerificationReport,
    energy_law_residuals,
    first_negative,
    integrability_accumulator,
    lyapunov_gradient,
    lyapunov_rate,
    lyapunov_rate_lower_bound,
    positivity_watch,
    random_damped_state,
    riccati_monitor,
    run_suite,
    spectral_front,
    verify_parameter_conditions,
    verify_triple_lemma,
    verify_young_chain,
)
from dyadic_mhd.errors import InsufficientDataError, ParameterError, VariantError
from dyadic_mhd.functionals import LyapunovCoeffs, lyapunov, select_coefficients
from dyadic_mhd.integrator import Event, EventKind, StepControls, Trajectory, integrate_adaptive
from dyadic_mhd.shell_model import ModelSpec, ShellState, rhs_vector

from conftest import geometric_state


def traj(states, model=None):
    model = model or ModelSpec("sys2", 2, 3.5, n_shells=states[0].n)
    return Trajectory(model, tuple(states), (Event(states[-1].t, EventKind.COMPLETED),))


# triple lemma

def test_triple_zero_state():
    r = verify_triple_lemma(ShellState.zeros(4), 2, 0.25, 3.5)
    assert r.ok and all(e.residual == 0 for e in r.entries)


def test_triple_single_mode_example():
    s = ShellState(0.0, np.array([1.0, 0, 0]), np.zeros(3))
    e = verify_triple_lemma(s, 2, 0, 3.5, c0=1.0)["triple.i.a"]
    assert e.lhs == pytest.approx(2 ** 3.5) and e.rhs == pytest.approx(8.0) and e.satisfied


def test_triple_hypothesis_gate():
    s = geometric_state(5)
    r = verify_triple_lemma(s, 2, 0.25, 3.0)
    skipped = {e.condition_id for e in r.skipped()}
    assert {"triple.i.a", "triple.ii.a"} <= skipped
    assert not any(cid.startswith("triple.iii") for cid in skipped)
    assert r.ok


def test_triple_part_i_not_applicable_for_signed_states():
    s = ShellState(0.0, np.array([1.0, -1.0]), np.zeros(2))
    assert not verify_triple_lemma(s, 2, 0.25, 3.5)["triple.i.a"].applicable


def test_triple_detects_a_wrong_constant():
    # c0 far above the sharp constant must be caught on a single mode
    s = ShellState(0.0, np.array([1.0, 0, 0]), np.zeros(3))
    assert not verify_triple_lemma(s, 2, 0, 3.5, c0=10.0)["triple.i.a"].satisfied


def test_triple_random_states(rng):
    for _ in range(300):
        s = random_damped_state(rng, 10)
        assert verify_triple_lemma(s, 2, 0.25, 3.5).ok


# Young chains

def test_young_zero_pair_example():
    s = ShellState(0.0, np.array([1.0, 0.0, 1.0]), np.ones(3))
    e = verify_young_chain(s, 2, 0.25, 3.5, "mhd")["mhd.young.1"]
    assert e.lhs == 0 and e.satisfied


def test_young_all_ones_example():
    s = ShellState(0.0, np.ones(3), np.ones(3))
    r = verify_young_chain(s, 2, 0.25, 3.5, "mhd")
    assert r.ok and len(r.ids()) == 8
    assert len(verify_young_chain(s, 2, 0.25, 3.5, "hall").ids()) == 7


def test_young_rejects_negative_entries():
    s = ShellState(0.0, np.array([1.0, 1.0, -0.5]), np.ones(3))
    with pytest.raises(ParameterError, match="a_3"):
        verify_young_chain(s, 2, 0.25, 3.5, "mhd")


@given(st.lists(st.floats(0, 1e4), min_size=12, max_size=12),
       st.sampled_from([2.0, 3.0, 4.0]), st.floats(3.05, 4.5), st.floats(0.0, 1.0),
       st.sampled_from(["mhd", "hall"]))
def test_young_property(values, lam, theta, gamma, variant):
    s = ShellState(0.0, np.array(values[:6]), np.array(values[6:]))
    assert verify_young_chain(s, lam, gamma, theta, variant).ok


# parameter conditions

def test_conditions_selector_output_passes():
    c = select_coefficients("mhd", 2, 0.25, 3.5)
    r = verify_parameter_conditions(c, 2, 0.25, 3.5)
    assert r.ok and {"mhd.cond.1", "mhd.cond.6"} <= set(r.ids())


def test_conditions_worked_violation():
    c = LyapunovCoeffs("mhd", 0.25, 1.0, 0.01, 0.01, 0.01, 1, 0, 0, 1)
    e = verify_parameter_conditions(c, 2, 0.25, 3.5)["mhd.cond.4"]
    assert not e.satisfied
    # the dominant terms quoted for this example: 2(2^0.5 - 1) against c1 * 2^3.5 / 2
    assert 2 * (2 ** 0.5 - 1) == pytest.approx(0.828, abs=1e-3)
    assert e.residual < 2 * (2 ** 0.5 - 1) - 0.5 * 2 ** 3.5


def test_conditions_zero_coefficients_fail_first_condition():
    c = LyapunovCoeffs("mhd", 0.25, 0, 0, 0, 0, 1, 0, 0, 1)
    assert verify_parameter_conditions(c, 2, 0.25, 3.5).violations()[0].condition_id == "mhd.cond.1"


# report plumbing

def test_report_text_and_aggregate():
    a = VerificationReport((analysis.make_entry("x", 2.0, 1.0),))
    b = VerificationReport((analysis.make_entry("x", 1.0, 2.0),))
    agg = VerificationReport.aggregate([a, b])
    assert not agg.ok and agg["x"].failures == 1 and agg["x"].samples == 2
    line = agg.to_text().strip()
    assert line.startswith("x ") and "FAIL" in line and line.endswith("1/2")


def test_run_suite_is_deterministic():
    r1 = run_suite("all", 2, 3.5, 0.25, seed=7, count=50)
    r2 = run_suite("all", 2, 3.5, 0.25, seed=7, count=50)
    assert r1.to_text() == r2.to_text() and r1.ok


def test_run_suite_rejects_unknown_suite():
    with pytest.raises(ParameterError):
        run_suite("nope", 2, 3.5, 0.25)


# Lyapunov rate

@pytest.mark.parametrize("variant,d_i", [("mhd", 0.0), ("hall", 1.0), ("hall", 0.3)])
def test_lyapunov_rate_matches_chain_rule(variant, d_i, rng):
    m = ModelSpec("sys2", 2, 3.5, nu=0.3, mu=0.7, d_i=d_i, n_shells=9)
    c = select_coefficients(variant, 2, 0.25, 3.5, 0.3, 0.7)
    for _ in range(25):
        s = ShellState(0.0, rng.standard_normal(9), rng.standard_normal(9))
        grad = lyapunov_gradient(s, c, 2)
        terms = grad * rhs_vector(m, s.vector())
        direct = math.fsum(terms)
        assert lyapunov_rate(m, s, c) == pytest.approx(direct, abs=1e-11 * math.fsum(np.abs(terms)))


def test_lyapunov_gradient_matches_finite_differences(rng):
    c = select_coefficients("mhd", 2, 0.25, 3.5)
    s = ShellState(0.0, rng.random(5), rng.random(5))
    g = lyapunov_gradient(s, c, 2)
    y = s.vector()
    for k in range(10):
        e = np.zeros(10)
        e[k] = 1e-6
        up = lyapunov(ShellState.from_vector(0, y + e), c, 2)
        dn = lyapunov(ShellState.from_vector(0, y - e), c, 2)
        assert g[k] == pytest.approx((up - dn) / 2e-6, rel=1e-6, abs=1e-8)


def test_lyapunov_rate_variant_checks():
    c = select_coefficients("mhd", 2, 0.25, 3.5)
    with pytest.raises(VariantError):
        lyapunov_rate(ModelSpec("sys1", 2, 3.5, n_shells=3), geometric_state(3), c)
    with pytest.raises(ParameterError):
        lyapunov_rate(ModelSpec("sys2", 2, 3.5, d_i=1, n_shells=3), geometric_state(3), c)


@pytest.mark.parametrize("variant", ["mhd", "hall"])
@pytest.mark.parametrize("visc", [0.0, 0.01, 1.0])
def test_rate_lower_bound_holds_away_from_truncation(variant, visc, rng):
    # the bound drops the cubic gain the truncated top shell would provide,
    # so test states whose last three shells are empty
    n = 14
    m = ModelSpec("sys2", 2, 3.5, nu=visc, mu=visc, d_i=1.0 if variant == "hall" else 0.0, n_shells=n)
    c = select_coefficients(variant, 2, 0.25, 3.5, visc, visc)
    for _ in range(300):
        s = random_damped_state(rng, n)
        a, b = s.a.copy(), s.b.copy()
        a[-3:] = b[-3:] = 0
        s = ShellState(0.0, a, b)
        rate = lyapunov_rate(m, s, c)
        bound = lyapunov_rate_lower_bound(m, s, c)
        assert rate >= bound - 1e-10 * max(abs(rate), abs(bound), 1e-300)


def test_rate_lower_bound_hall_needs_unit_d_i():
    c = select_coefficients("hall", 2, 0.25, 3.5)
    with pytest.raises(ParameterError):
        lyapunov_rate_lower_bound(ModelSpec("sys2", 2, 3.5, n_shells=3), geometric_state(3), c)


# spectral front

def test_spectral_front():
    assert spectral_front(ShellState.zeros(4)) == 0
    s = ShellState(0.0, np.array([1.0, 0.5, 0.05, 0.001]), np.zeros(4))
    assert spectral_front(s) == 2
    assert spectral_front(s, fraction=1e-4) == 3


# Riccati monitor

def const_traj(value=1.0, n=3, count=5):
    return traj([ShellState(0.1 * k, np.full(n, value), np.zeros(n)) for k in range(count)])


def test_riccati_constant_trajectory_unsatisfied():
    c = select_coefficients("mhd", 2, 0.25, 3.5)
    rep = riccati_monitor(const_traj(), c, 2)
    assert len(rep.samples) == 3 and not any(s.satisfied for s in rep.samples)


def test_riccati_zero_level_has_zero_bound():
    c = select_coefficients("mhd", 2, 0.25, 3.5)
    rep = riccati_monitor(const_traj(0.0), c, 2)
    assert all(s.bound == 0 and s.satisfied for s in rep.samples)


def test_riccati_needs_three_samples():
    with pytest.raises(InsufficientDataError):
        riccati_monitor(const_traj(count=2), select_coefficients("mhd", 2, 0.25, 3.5))


def test_riccati_large_data_positive_initial_slope():
    n = 24
    m = ModelSpec("sys2", 2, 3.5, n_shells=n)
    c = select_coefficients("mhd", 2, 0.25, 3.5)
    s0 = geometric_state(n, 10, 10)
    assert lyapunov_rate(m, s0, c) > 0
    tr = integrate_adaptive(m, s0, StepControls(t_end=2e-6, diag_interval=1e-6, dt_init=1e-12,
                                                 dt_min=1e-300, rel_tol=1e-10, abs_tol=1e-14))
    rep = riccati_monitor(tr, c)
    assert rep.above_threshold and rep.samples[0].dLdt > 0


# positivity watch

def test_positivity_examples():
    pos = [geometric_state(4, t=0.1 * k) for k in range(3)]
    assert positivity_watch(traj(pos)) is None
    bad = geometric_state(4, t=0.1)
    b = bad.b.copy()
    b[2] = -1.0
    states = [pos[0], ShellState(0.1, bad.a, b), pos[2]]
    hit = positivity_watch(traj(states))
    assert tuple(hit) == (0.1, 3, "b", -1.0)


def test_positivity_threshold_is_relative():
    s = ShellState(0.0, np.array([1.0, -1e-13]), np.zeros(2))
    assert first_negative(s) is None
    s = ShellState(0.0, np.array([1.0, -1e-11]), np.zeros(2))
    assert first_negative(s).shell == 2


# integrability accumulator

def test_integrability_constant_and_zero():
    states = [ShellState(t, np.array([1.0, 0]), np.zeros(2)) for t in np.linspace(0, 2, 5)]
    # ||e1||_s = lam**s, so the integrand is (2**1)**3 = 8
    assert integrability_accumulator(traj(states), 2, 1, 1) == pytest.approx(16)
    assert integrability_accumulator(const_traj(0.0), 2, 1, 1) == 0


def test_integrability_converges_under_refinement():
    m = ModelSpec("sys2", 2, 3.5, nu=0.1, mu=0.1, n_shells=10)
    # smooth data: the integrand has no unresolved initial transient
    s0 = geometric_state(10, 1, 0.5, ratio=0.25)
    coarse = integrate_adaptive(m, s0, StepControls(t_end=1, diag_interval=0.01))
    fine = integrate_adaptive(m, s0, StepControls(t_end=1, diag_interval=0.0025))
    vc = integrability_accumulator(coarse, 2, 1.25, 1.25)
    vf = integrability_accumulator(fine, 2, 1.25, 1.25)
    assert math.isfinite(vc) and vc == pytest.approx(vf, rel=1e-2)


# energy law

def test_energy_law_residuals_small_for_viscous_run():
    m = ModelSpec("sys2", 2, 3.5, nu=0.05, mu=0.02, d_i=1.0, n_shells=12)
    tr = integrate_adaptive(m, geometric_state(12, 1, 0.7), StepControls(t_end=0.5, diag_interval=0.05))
    res = energy_law_residuals(tr)
    assert len(res) == len(tr.samples) - 1 and np.max(res) <= 10 * 1e-8


def test_energy_law_needs_dissipation_record():
    with pytest.raises(InsufficientDataError):
        energy_law_residuals(const_traj())
