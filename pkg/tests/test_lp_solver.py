import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import binom

from conftest import instance
from lpext.errors import ConfigurationError, ConvergenceError
from lpext.lp_solver import (DescentOptions, default_starts, eps_stages, objective,
                             objective_and_gradient, solve_lp_direct, uniqueness_probe,
                             variational_residual_p)
from lpext.verifier import gradient_check


def direct(name, p, starts=4, seed=0):
    prob = instance(name, p).problem
    return prob, *solve_lp_direct(prob, default_starts(prob, starts, seed))


def test_problem_rejects_bad_p():
    prob = instance("disc_p1").problem
    for p in (0.0, -1.0, 2.5):
        with pytest.raises(ConfigurationError):
            prob.with_p(p)


def test_eps_ladder_ends_at_target():
    assert list(eps_stages(1e-8)) == [1e-2, 1e-4, 1e-6, 1e-8]
    assert list(eps_stages(1e-3)) == [1e-2, 1e-3]


@pytest.mark.parametrize("p", [0.5, 1.0, 1.5])
def test_unweighted_disc_constant_is_minimal(p):
    # mean-value bound: int_D |g|^p >= pi |g(0)|^p, attained by g = 1
    prob, F, cert = direct("disc_p1", p)
    expected = np.zeros(len(F.coeffs))
    expected[0] = 1
    np.testing.assert_allclose(F.coeffs, expected, atol=1e-6)
    assert objective(F.coeffs, prob, 0.0) == pytest.approx(math.pi, rel=1e-6)


@pytest.mark.parametrize("p", [0.5, 1.0, 1.5])
def test_polydisc_minimiser_is_independent_of_z2(p):
    prob, F, cert = direct("polydisc", p)
    expected = np.zeros(len(F.coeffs))
    expected[:2] = 1
    np.testing.assert_allclose(F.coeffs, expected, atol=1e-5)
    # closed form pi * int_D |1+z|^p = pi^2 sum |binom(p/2, k)|^2 / (k+1); the
    # integrand is not polynomial, so the rule is only accurate to ~1e-3
    k = np.arange(100_000)
    exact = math.pi ** 2 * np.sum(binom(p / 2, k) ** 2 / (k + 1))
    assert objective(F.coeffs, prob, 0.0) == pytest.approx(exact, rel=1e-3)


@pytest.mark.parametrize("p", [1.0, 1.5])
def test_starts_agree_in_convex_regime(p):
    _, _, cert = direct("points", p, starts=5)
    assert cert.dispersion <= 1e-6
    assert not cert.flagged


def test_p2_delegates_to_l2():
    prob, F, cert = direct("polydisc", 2.0)
    assert cert.objective == pytest.approx(1.5 * math.pi ** 2, rel=1e-8)
    assert cert.starts[0].iterations == 0


def test_minimality_along_admissible_lines(rng):
    prob, F, _ = direct("points", 1.5)
    J0 = objective(F.coeffs, prob)
    fs = prob.feasible
    for _ in range(20):
        h = fs.null @ (rng.standard_normal(fs.free_dim) + 1j * rng.standard_normal(fs.free_dim))
        for t in (1e-3, 1e-2, 0.1, 1j * 0.05):
            assert objective(F.coeffs + t * h, prob) >= J0 * (1 - 1e-12)


def test_variational_residual_small_at_minimiser_and_large_elsewhere():
    prob, F, _ = direct("polydisc", 1.0)
    assert variational_residual_p(F, prob) <= 1e-5
    assert variational_residual_p(instance("polydisc", 1.0).naive, prob) >= 1e-2


def test_selection_is_deterministic():
    _, F1, c1 = direct("ball", 0.5, seed=7)
    _, F2, c2 = direct("ball", 0.5, seed=7)
    assert F1 == F2 and c1.selected == c2.selected


def test_iteration_cap_raises_with_trace():
    prob = instance("points", 1.5).problem
    with pytest.raises(ConvergenceError) as exc:
        solve_lp_direct(prob, default_starts(prob, 1, 0), DescentOptions(max_iter=2))
    assert len(exc.value.trace) == 2


def test_gradient_matches_finite_differences(rng):
    for p in (0.5, 1.0, 1.5):
        prob = instance("points", p).problem
        assert gradient_check(prob, rng, points=5) <= 1e-6


def test_gradient_is_projected():
    prob = instance("polydisc", 1.0).problem
    _, g = objective_and_gradient(prob.feasible.particular + 0.1, prob)
    assert np.all(g[list(prob.feasible.split.constrained)] == 0)


@given(y=st.lists(st.floats(-2, 2), min_size=10, max_size=10))
def test_energy_matches_smoothed_definition(y):
    prob = instance("points", 0.5).problem
    c = prob.feasible.point(np.array(y[:5]) + 1j * np.array(y[5:]))
    g = prob.V @ c
    ref = np.sum(prob.quad.weights * prob.base_density * (np.abs(g) ** 2 + 1e-8) ** 0.25)
    assert objective(c, prob) == pytest.approx(ref, rel=1e-13)


def test_uniqueness_probe_reports_clusters():
    prob = instance("ball", 0.5).problem
    rep = uniqueness_probe(prob, trials=4, seed=0)
    assert rep.trials == 4 and rep.count >= 1
    assert sum(len(c["members"]) for c in rep.clusters) == 4
    with pytest.raises(ValueError):
        uniqueness_probe(instance("ball", 1.0).problem, trials=2, seed=0)
