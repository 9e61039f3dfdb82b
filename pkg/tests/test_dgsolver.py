"""DG solver: projection, upwind operator, time marching, errors, sampling."""

import math

import numpy as np
import pytest

from siac import dgsolver as dg
from siac import postproc as pp


@pytest.fixture(scope="module")
def sine():
    return dg.sine_advection_1d()


def dense_operator(mesh, k, speed=1.0):
    """Assemble the semi-discrete operator by applying rhs to unit vectors."""
    n = mesh.elements[0]
    dim = n * (k + 1)
    problem = dg.AdvectionProblem((speed,), lambda x: 0 * np.asarray(x), 1.0)
    op = np.zeros((dim, dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        f = dg.DGField(mesh, k, e.reshape(n, k + 1))
        op[:, i] = dg.rhs(f, problem).ravel()
    return op


class TestProjection:
    def test_constant_exact(self):
        mesh = dg.interval_mesh(0.0, 1.0, 8)
        f = dg.project_function(lambda x: np.full_like(np.asarray(x, dtype=float), 3.0), mesh, 2)
        assert np.allclose(f.coeffs[:, 0], 3.0 * math.sqrt(mesh.h[0]), atol=1e-15)
        assert np.allclose(f.coeffs[:, 1:], 0.0, atol=1e-15)

    def test_linear_reproduced(self):
        mesh = dg.interval_mesh(0.0, 1.0, 4)
        f = dg.project_function(lambda x: np.asarray(x), mesh, 1)
        xs = np.linspace(0.01, 0.99, 37)
        assert np.allclose(dg.sample(f, xs), xs, atol=1e-14)

    def test_sine_projection_order(self, sine):
        # oracle: quadrature of (u0 - projection)^2 under refinement
        errs = []
        for n in (10, 20, 40):
            mesh = dg.interval_mesh(0.0, 1.0, n)
            f = dg.project_initial(sine, mesh, 1)
            errs.append(dg.l2_error(f, sine.initial))
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert all(abs(o - 2.0) < 0.1 for o in orders)


class TestRHS:
    def test_constant_steady(self):
        mesh = dg.interval_mesh(0.0, 1.0, 8)
        problem = dg.AdvectionProblem((1.0,), lambda x: np.ones_like(np.asarray(x, dtype=float)), 1.0)
        f = dg.project_initial(problem, mesh, 2)
        assert np.max(np.abs(dg.rhs(f, problem))) < 1e-13

    def test_impulse_flows_downwind(self):
        mesh = dg.interval_mesh(0.0, 1.0, 8)
        problem = dg.AdvectionProblem((1.0,), lambda x: 0 * np.asarray(x), 1.0)
        coeffs = np.zeros((8, 2))
        coeffs[5, :] = 1.0
        du = dg.rhs(dg.DGField(mesh, 1, coeffs), problem)
        assert np.any(du[5] != 0.0)
        assert np.any(du[6] != 0.0)  # outflow enters the right neighbour
        assert np.all(du[4] == 0.0)  # nothing moves upwind
        assert np.all(du[7] == 0.0)

    def test_negative_speed_mirrors(self):
        mesh = dg.interval_mesh(0.0, 1.0, 8)
        problem = dg.AdvectionProblem((-1.0,), lambda x: 0 * np.asarray(x), 1.0)
        coeffs = np.zeros((8, 2))
        coeffs[5, :] = 1.0
        du = dg.rhs(dg.DGField(mesh, 1, coeffs), problem)
        assert np.any(du[4] != 0.0)
        assert np.all(du[6] == 0.0)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_spectral_radius_scaling(self, k):
        # oracle: dense eigenvalues on a small mesh
        rho = {}
        for n in (8, 16):
            mesh = dg.interval_mesh(0.0, 1.0, n)
            rho[n] = max(abs(np.linalg.eigvals(dense_operator(mesh, k))))
        h8 = 1.0 / 8.0
        scaled = rho[8] * h8 / (2 * k + 1)
        assert 0.3 < scaled < 3.0
        assert rho[16] / rho[8] == pytest.approx(2.0, rel=0.15)


class TestSolve:
    def test_t_zero_returns_projection(self, sine):
        mesh = dg.interval_mesh(0.0, 1.0, 12)
        prob0 = dg.AdvectionProblem(sine.speed, sine.initial, 0.0)
        f = dg.solve(prob0, mesh, 2)
        assert np.array_equal(f.coeffs, dg.project_initial(prob0, mesh, 2).coeffs)
        assert f.time == 0.0

    def test_reference_error_value_k1(self, sine):
        f = dg.solve(sine, dg.interval_mesh(0.0, 1.0, 20), 1, cfl=0.05)
        err = dg.l2_error(f, sine.exact(1.0))
        assert err == pytest.approx(4.60e-3, rel=0.03)

    @pytest.mark.parametrize("k", [1, 2])
    def test_convergence_order(self, k, sine):
        errs = []
        for n in (10, 20, 40):
            f = dg.solve(sine, dg.interval_mesh(0.0, 1.0, n), k, cfl=0.05)
            errs.append(dg.l2_error(f, sine.exact(1.0)))
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert all(abs(o - (k + 1)) < 0.25 for o in orders)

    def test_mass_conserved(self):
        problem = dg.AdvectionProblem(
            (1.0,), lambda x: 2.0 + np.sin(2 * np.pi * np.asarray(x)), 0.5
        )
        mesh = dg.interval_mesh(0.0, 1.0, 16)
        f0 = dg.project_initial(problem, mesh, 2)
        fT = dg.solve(problem, mesh, 2)
        assert abs(fT.mass() - f0.mass()) < 1e-13 * abs(f0.mass())

    def test_l2_stable(self, sine):
        mesh = dg.interval_mesh(0.0, 1.0, 16)
        f0 = dg.project_initial(sine, mesh, 2)
        fT = dg.solve(sine, mesh, 2)
        assert fT.norm() <= f0.norm() + 1e-12

    def test_unstable_run_detected(self, sine):
        with pytest.raises(dg.UnstableRunError):
            dg.solve(sine, dg.interval_mesh(0.0, 1.0, 32), 3, cfl=20.0)

    def test_negative_time_rejected(self, sine):
        bad = dg.AdvectionProblem((1.0,), sine.initial, -1.0)
        with pytest.raises(ValueError):
            dg.solve(bad, dg.interval_mesh(0.0, 1.0, 8), 1)

    def test_lands_exactly_on_final_time(self, sine):
        f = dg.solve(sine, dg.interval_mesh(0.0, 1.0, 12), 1, cfl=0.043)
        assert f.time == sine.final_time


class TestSample:
    def test_midpoints_match_modal_sum(self, sine):
        mesh = dg.interval_mesh(0.0, 1.0, 10)
        f = dg.project_initial(sine, mesh, 2)
        mids = mesh.centers(0)
        vals = dg.sample(f, mids)
        scale = dg.modal_scale(2, mesh.h[0])
        # P_m(0) = 1, 0, -1/2
        want = f.coeffs[:, 0] * scale[0] - 0.5 * f.coeffs[:, 2] * scale[2]
        assert np.allclose(vals, want, atol=1e-14)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_monomial_projection_sampled(self, k):
        mesh = dg.interval_mesh(0.0, 1.0, 6)
        f = dg.project_function(lambda x: np.asarray(x) ** k, mesh, k)
        xs = np.random.default_rng(2).uniform(0.0, 1.0, 50)
        assert np.allclose(dg.sample(f, xs), xs**k, atol=1e-13)

    def test_interface_side_convention(self, sine):
        f = dg.solve(sine, dg.interval_mesh(0.0, 1.0, 10), 1, cfl=0.05)
        edge = f.mesh.edges(0)[3]
        right = dg.sample(f, [edge], side="right")[0]
        left = dg.sample(f, [edge], side="left")[0]
        assert right != left  # genuine DG interface jump
        # default is the right trace
        assert dg.sample(f, [edge])[0] == right

    def test_periodic_right_end_wraps(self, sine):
        mesh = dg.interval_mesh(0.0, 1.0, 10)
        f = dg.project_initial(sine, mesh, 2)
        assert dg.sample(f, [1.0])[0] == dg.sample(f, [0.0])[0]

    def test_interface_jump_decay_order(self, sine):
        # oracle: refinement sweep of the largest interface jump
        jumps = []
        for n in (10, 20, 40):
            f = dg.solve(sine, dg.interval_mesh(0.0, 1.0, n), 2, cfl=0.05)
            jumps.append(float(np.max(dg.interface_jumps(f))))
        orders = [math.log2(a / b) for a, b in zip(jumps, jumps[1:])]
        assert all(o > 2.0 for o in orders)  # at least k+1 - 1; typically ~ k+1

    def test_sample_needs_1d(self):
        mesh = dg.rectangle_mesh((0, 1), (0, 1), 4, 4)
        f = dg.project_function(lambda x, y: np.asarray(x) * 0 + 1.0, mesh, 1)
        with pytest.raises(ValueError):
            dg.sample(f, [0.5])


class TestTwoDimensional:
    def test_y_independent_matches_1d(self):
        prob2 = dg.AdvectionProblem(
            (1.0, 1.0), lambda x, y: np.sin(2 * np.pi * np.asarray(x)) + 0.0 * np.asarray(y), 0.3
        )
        prob1 = dg.AdvectionProblem((1.0,), lambda x: np.sin(2 * np.pi * np.asarray(x)), 0.3)
        mesh2 = dg.rectangle_mesh((0, 1), (0, 1), 12, 12)
        mesh1 = dg.interval_mesh(0, 1, 12)
        f2 = dg.solve(prob2, mesh2, 2, cfl=0.05)
        f1 = dg.solve(prob1, mesh1, 2, cfl=0.05)
        hy = mesh2.h[1]
        # modal slice: 2D coefficients are the 1D ones times sqrt(hy) in mode 0
        for jy in range(12):
            assert np.allclose(f2.coeffs[:, jy, :, 0], f1.coeffs * math.sqrt(hy), atol=1e-12)
            assert np.allclose(f2.coeffs[:, jy, :, 1:], 0.0, atol=1e-12)

    def test_2d_constant_steady(self):
        prob = dg.AdvectionProblem((1.0, 1.0), lambda x, y: np.ones_like(np.asarray(x, dtype=float) + np.asarray(y)), 0.1)
        mesh = dg.rectangle_mesh((0, 1), (0, 1), 6, 6)
        f = dg.project_initial(prob, mesh, 1)
        assert np.max(np.abs(dg.rhs(f, prob))) < 1e-13

    def test_2d_sample_value(self):
        prob = dg.sine_advection_2d()
        mesh = dg.rectangle_mesh((0, 2 * math.pi), (0, 2 * math.pi), 8, 8)
        f = dg.project_initial(prob, mesh, 2)
        x, y = 1.17, 2.94
        assert dg.sample2d(f, x, y) == pytest.approx(math.sin(x + y), abs=2e-3)

    def test_normalized_error_convention(self):
        prob = dg.sine_advection_2d()
        mesh = dg.rectangle_mesh((0, 2 * math.pi), (0, 2 * math.pi), 8, 8)
        f = dg.project_initial(prob, mesh, 1)
        plain = dg.l2_error(f, prob.initial)
        normed = dg.l2_error(f, prob.initial, normalized=True)
        assert plain == pytest.approx(normed * 2 * math.pi, rel=1e-14)


class TestFieldIO:
    def test_roundtrip_1d(self, sine, tmp_path):
        f = dg.solve(sine, dg.interval_mesh(0.0, 1.0, 10), 2, cfl=0.05)
        path = tmp_path / "field.json"
        f.save(path)
        g = dg.DGField.load(path)
        assert g.degree == f.degree
        assert g.time == f.time
        assert np.array_equal(g.coeffs, f.coeffs)
        assert g.mesh == f.mesh

    def test_roundtrip_2d(self, tmp_path):
        prob = dg.sine_advection_2d()
        mesh = dg.rectangle_mesh((0, 2 * math.pi), (0, 2 * math.pi), 4, 4)
        f = dg.project_initial(prob, mesh, 1)
        path = tmp_path / "field2.json"
        f.save(path)
        g = dg.DGField.load(path)
        assert np.array_equal(g.coeffs, f.coeffs)

    def test_rejects_foreign_document(self):
        with pytest.raises(ValueError):
            dg.DGField.from_dict({"format": "nope"})


class TestDividedDifferenceTheorem:
    def test_divided_difference_error_order(self, sine):
        # refinement oracle for the half-step difference of the error
        errs = []
        k = 2
        for n in (10, 20, 40):
            f = dg.solve(sine, dg.interval_mesh(0.0, 1.0, n), k, cfl=0.05)
            h = f.mesh.h[0]
            exact = sine.exact(1.0)
            m = 8 * n
            delta = 1.0 / m
            xs = (np.arange(m) + 0.25) * delta
            g = exact(xs) - dg.sample(f, xs)
            dd = pp.divided_difference(g, h=h, spacing=delta)
            errs.append(float(np.sqrt(np.mean(dd**2))))
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert all(abs(o - (k + 1)) < 0.3 for o in orders)
