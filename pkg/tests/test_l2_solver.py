import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import instance
from lpext.l2_solver import make_l2_problem, orthogonality_residual, solve_l2


def l2_problem(inst):
    prob = inst.problem
    return make_l2_problem(prob.feasible, prob.base_density, prob.quad, V=prob.V)


def test_gaussian_weight_disc_closed_form():
    # radial weight, data at the centre: the constant is minimal, norm^2 = pi (1 - 1/e)
    F, rep = solve_l2(l2_problem(instance("disc_weighted")))
    expected = np.zeros(len(F.coeffs))
    expected[0] = 1
    np.testing.assert_allclose(F.coeffs, expected, atol=1e-13)
    assert rep.objective == pytest.approx(math.pi * (1 - math.exp(-1)), rel=1e-12)
    assert not rep.regularized


def test_unweighted_disc_is_pi():
    F, rep = solve_l2(l2_problem(instance("disc_p1")))
    assert rep.objective == pytest.approx(math.pi, rel=1e-12)


def test_polydisc_closed_form():
    # F = 1 + z1 with |F|^2 integrated over the bidisc: pi * (pi + pi/2)
    F, rep = solve_l2(l2_problem(instance("polydisc")))
    assert rep.objective == pytest.approx(1.5 * math.pi ** 2, rel=1e-12)
    assert rep.orthogonality <= 1e-12


@pytest.mark.parametrize("name", ["disc_weighted", "polydisc", "ball", "points"])
def test_methods_agree(name):
    prob = l2_problem(instance(name))
    a, _ = solve_l2(prob, "normal")
    b, rep = solve_l2(prob, "nullspace")
    np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-11)
    assert rep.orthogonality <= 1e-10


def test_unknown_method():
    with pytest.raises(ValueError):
        solve_l2(l2_problem(instance("disc_p1")), "svd")


@pytest.mark.parametrize("name", ["points", "polydisc"])
@given(y=st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                  min_size=30, max_size=30))
def test_pythagoras_and_minimality(name, y):
    prob = l2_problem(instance(name))
    F, rep = solve_l2(prob)
    fs = prob.feasible
    h = fs.null @ np.array(y[: fs.free_dim])
    G = prob.gram
    lhs = G.quadratic(F.coeffs + h)
    assert lhs == pytest.approx(rep.objective + G.quadratic(h), rel=1e-10, abs=1e-10)
    assert lhs >= rep.objective * (1 - 1e-12)


def test_orthogonality_detects_non_minimiser():
    inst = instance("polydisc")
    prob = l2_problem(inst)
    assert orthogonality_residual(inst.naive, prob) > 1e-2


def test_reweighted_density_changes_answer():
    inst = instance("points")
    prob = inst.problem
    dens = prob.base_density * (1 + np.abs(prob.quad.nodes[:, 0]) ** 2)
    a, _ = solve_l2(make_l2_problem(prob.feasible, prob.base_density, prob.quad, V=prob.V))
    b, rep = solve_l2(make_l2_problem(prob.feasible, dens, prob.quad, V=prob.V))
    assert np.linalg.norm(a.coeffs - b.coeffs) > 1e-4
    assert rep.orthogonality <= 1e-10
