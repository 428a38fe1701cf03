import numpy as np
import pytest

from conftest import instance
from lpext.errors import ConvergenceError
from lpext.irls import (IrlsSchedule, IrlsStep, descent_check, difference_orthogonality,
                        fixed_point_residual, irls_solve, norm_transfer_residual, reweight,
                        reweighted_density)
from lpext.l2_solver import make_l2_problem, solve_l2
from lpext.lp_solver import default_starts, solve_lp_direct


def test_reweighting_formula():
    vals = np.array([0.0, 1.0, 2.0])
    dens = reweighted_density(vals, 1.0, np.ones(3), 1e-2)
    np.testing.assert_allclose(dens, (vals ** 2 + 1e-2) ** -0.5)
    np.testing.assert_array_equal(reweighted_density(vals, 2.0, np.full(3, 0.5), 1e-2), 0.5)


def test_reweight_requires_positive_eps():
    F = instance("disc_p1").naive
    with pytest.raises(ValueError):
        reweight(F, 1.0, 1.0, 0.0, np.zeros((1, 1)))


def test_p2_is_one_solve():
    prob = instance("polydisc", 2.0).problem
    F, cert, trace = irls_solve(prob, cross_check=False)
    F2, _ = solve_l2(make_l2_problem(prob.feasible, prob.base_density, prob.quad, V=prob.V))
    assert F == F2 and len(trace) == 1 and cert.converged


@pytest.mark.parametrize("name,p", [("points", 0.5), ("points", 1.0), ("polydisc", 0.5),
                                    ("ball", 1.5)])
def test_irls_matches_direct_solver(name, p):
    prob = instance(name, p).problem
    F_d, _ = solve_lp_direct(prob, default_starts(prob, 3, 0))
    F_i, cert, trace = irls_solve(prob, reference=F_d)
    assert cert.converged
    assert cert.cross_check_relative <= 1e-4
    assert fixed_point_residual(F_i, prob) <= 1e-6
    assert descent_check(trace)


def test_iterates_settle_quickly_for_radial_instance():
    _, cert, trace = irls_solve(instance("disc_weighted", 1.0).problem, cross_check=False)
    assert cert.iterations <= 3


def test_iteration_cap():
    prob = instance("points", 1.0).problem
    with pytest.raises(ConvergenceError) as exc:
        irls_solve(prob, schedule=IrlsSchedule(max_iter=2), cross_check=False)
    assert len(exc.value.trace) == 2


def test_identities_at_the_fixed_point():
    prob = instance("points", 1.5).problem
    F, cert, _ = irls_solve(prob, cross_check=False)
    assert norm_transfer_residual(F, prob) <= 1e-4
    assert difference_orthogonality(F, F, prob) == 0.0
    assert difference_orthogonality(F, instance("points", 1.5).naive, prob) > 1e-3


def test_descent_check_flags_increase():
    ok = [IrlsStep(0, 1e-2, 2.0, 1.5, 0.1, 0.0), IrlsStep(1, 1e-2, 1.5, 1.4, 0.1, 0.0)]
    assert descent_check(ok)
    up = ok + [IrlsStep(2, 1e-2, 1.4, 1.6, 0.1, 0.0)]
    assert not descent_check(up)
    # a change of eps may raise the energy without counting as ascent
    eps_change = [IrlsStep(0, 1e-2, 2.0, 1.5, 0.1, 0.0), IrlsStep(1, 1e-4, 1.0, 0.9, 0.1, 0.0)]
    assert descent_check(eps_change)
