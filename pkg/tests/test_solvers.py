"""Tests for the relaxation solvers and the explicit PDE schemes."""
import logging
import math

import numpy as np
import pytest
from scipy import special as sc

import series
import solvers
from errors import ConfigError, DomainError, StabilityError
from series import FractalSeries
from solvers import DiffusionModel, GridFunction, HeatModel, RelaxationProblem, WaveModel
from special import FractalOrder


def gaussian(x):
    return math.exp(-x * x)


class TestRelaxationProblem:
    @pytest.mark.parametrize("c", [0.0, -1.0, float("nan")])
    def test_rate_must_be_positive(self, c):
        with pytest.raises(ConfigError):
            RelaxationProblem(FractalOrder(0.5), c, 1.0)

    def test_rate(self):
        assert RelaxationProblem(FractalOrder(0.5), 4.0, 1.0).rate == pytest.approx(2.0)


class TestRelaxExact:
    def test_classical_decay(self):
        prob = RelaxationProblem(FractalOrder(1), 1.0, 2.0)
        assert solvers.relax_exact(prob, [1.0]) == pytest.approx([2 / math.e], rel=1e-12)

    def test_initial_value(self, alpha):
        prob = RelaxationProblem(FractalOrder(alpha), 3.0, 1.5)
        assert solvers.relax_exact(prob, [0.0]) == [1.5]

    def test_half_order(self):
        """y0 E_{1/2}(-1) = e erfc(1)."""
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        value = solvers.relax_exact(prob, [1.0])[0]
        assert value == pytest.approx(math.e * sc.erfc(1.0), rel=1e-12)
        assert value == pytest.approx(0.427584, rel=1e-5)

    def test_matches_exponential(self):
        prob = RelaxationProblem(FractalOrder(1), 0.7, 3.0)
        times = np.linspace(0, 10, 101)
        values = solvers.relax_exact(prob, times)
        expected = [3.0 * math.exp(-0.7 * t) for t in times]
        assert values == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9, 1.0])
    def test_positive_and_decreasing(self, alpha):
        prob = RelaxationProblem(FractalOrder(alpha), 1.0, 1.0)
        values = solvers.relax_exact(prob, np.linspace(0, 3, 1000))
        assert all(v > 0 for v in values)
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_long_times(self):
        """Late times stay positive and match e**(c t) erfc(sqrt(c t)) at alpha = 1/2."""
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        values = solvers.relax_exact(prob, [0.0, 25.0, 49.0])
        assert values == pytest.approx([1.0, sc.erfcx(5.0), sc.erfcx(7.0)], rel=1e-10)

    def test_empty_grid(self):
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        with pytest.raises(ConfigError):
            solvers.relax_exact(prob, [])

    def test_negative_time(self):
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        with pytest.raises(DomainError):
            solvers.relax_exact(prob, [-0.5, 1.0])

    def test_descending_grid(self):
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        with pytest.raises(ConfigError):
            solvers.relax_exact(prob, [1.0, 0.5])


class TestRelaxSeries:
    def test_classical_taylor(self):
        prob = RelaxationProblem(FractalOrder(1), 1.0, 1.0)
        S = solvers.relax_series(prob, 0.0, 6)
        expected = tuple((-1) ** k / math.factorial(k) for k in range(7))
        assert S.coeffs == pytest.approx(expected, rel=1e-12)

    def test_constant_term_is_exact_value(self, alpha):
        prob = RelaxationProblem(FractalOrder(alpha), 2.0, 1.5)
        S = solvers.relax_series(prob, 0.8, 10)
        assert S.coeffs[0] == pytest.approx(solvers.relax_exact(prob, [0.8])[0], rel=1e-14)

    def test_shifted_classical_expansion(self):
        prob = RelaxationProblem(FractalOrder(1), 1.0, 1.0)
        S = solvers.relax_series(prob, 1.0, 20)
        assert series.series_eval(S, 1.1) == pytest.approx(math.exp(-1.1), abs=1e-8)

    def test_negative_centre(self):
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        with pytest.raises(DomainError):
            solvers.relax_series(prob, -1.0)


class TestRelaxResidual:
    def test_series_solves_equation(self, alpha):
        """Every residual coefficient of the series solution vanishes."""
        prob = RelaxationProblem(FractalOrder(alpha), 2.0, 1.0)
        S = solvers.relax_series(prob, 0.0, 20)
        residual = solvers.relax_residual(S, 2.0, prob.order)
        assert len(residual) == 20
        for k, r in enumerate(residual):
            assert abs(r) <= 1e-12 * abs(prob.rate * S.coeffs[k])

    def test_constant_does_not_solve(self):
        S = FractalSeries(FractalOrder(0.5), 0.0, [3.0])
        assert solvers.relax_residual(S, 4.0, FractalOrder(0.5)) == pytest.approx([6.0])

    def test_zero_series(self):
        S = FractalSeries(FractalOrder(0.5), 0.0, [])
        assert solvers.relax_residual(S, 1.0, FractalOrder(0.5)) == [0.0]

    def test_order_mismatch(self):
        S = FractalSeries(FractalOrder(0.5), 0.0, [1.0, 1.0])
        with pytest.raises(ConfigError):
            solvers.relax_residual(S, 1.0, FractalOrder(0.9))


class TestRelaxSeriesDefect:
    def test_vanishes_at_alpha_one(self):
        prob = RelaxationProblem(FractalOrder(1), 1.0, 1.0)
        assert solvers.relax_series_defect(prob, 1.0, 1.5) < 1e-10

    def test_vanishes_at_origin(self):
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        assert solvers.relax_series_defect(prob, 0.0, 1.0) < 1e-10

    def test_reported_below_one(self):
        """Away from the origin the shifted expansion drifts from the exact solution."""
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        assert solvers.relax_series_defect(prob, 1.0, 1.5) > 1e-2


class TestRelaxStep:
    def test_times(self):
        assert solvers.relax_times(0.25, 1.0) == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_euler_first_order(self):
        """At alpha = 1 halving dt halves the maximum error."""
        prob = RelaxationProblem(FractalOrder(1), 1.0, 1.0)

        def max_error(dt):
            values = solvers.relax_step(prob, dt, 1.0)
            exact = solvers.relax_exact(prob, solvers.relax_times(dt, 1.0))
            return max(abs(v - e) for v, e in zip(values, exact))

        assert max_error(0.01) / max_error(0.005) == pytest.approx(2.0, rel=0.2)

    def test_zero_initial_value(self):
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 0.0)
        assert all(v == 0.0 for v in solvers.relax_step(prob, 0.1, 1.0))

    def test_contraction(self):
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        values = solvers.relax_step(prob, 0.01, 1.0)
        assert len(values) == 101
        assert all(v > 0 for v in values)
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_divergent_step(self):
        prob = RelaxationProblem(FractalOrder(1), 1.0, 1.0)
        with pytest.raises(StabilityError):
            solvers.relax_step(prob, 2.5, 5.0)

    def test_oscillating_step_warns(self, caplog):
        prob = RelaxationProblem(FractalOrder(1), 1.0, 1.0)
        with caplog.at_level(logging.WARNING, logger="solvers"):
            values = solvers.relax_step(prob, 1.5, 3.0)
        assert values == pytest.approx([1.0, -0.5, 0.25])
        assert "oscillate" in caplog.text

    @pytest.mark.parametrize("dt, T", [(0.0, 1.0), (0.5, -1.0), (2.0, 1.0)])
    def test_invalid_steps(self, dt, T):
        prob = RelaxationProblem(FractalOrder(0.5), 1.0, 1.0)
        with pytest.raises(ConfigError):
            solvers.relax_step(prob, dt, T)


class TestPdeSolve:
    def test_heat_kernel(self):
        """Classical diffusion of a Gaussian against the closed-form kernel."""
        model = DiffusionModel(FractalOrder(1), 1.0, gaussian)
        x = np.linspace(-10, 10, 400)
        t = np.linspace(0, 0.1, 201)
        grid = solvers.pde_solve(model, x, t)
        expected = np.exp(-x ** 2 / 1.4) / math.sqrt(1.4)
        assert np.max(np.abs(grid.values[-1] - expected)) < 1e-3

    def test_mass_and_positivity(self):
        model = DiffusionModel(FractalOrder(1), 1.0, gaussian)
        x = np.linspace(-10, 10, 400)
        grid = solvers.pde_solve(model, x, np.linspace(0, 0.1, 201))
        mass = grid.values.sum(axis=1)
        assert np.all(np.abs(mass - mass[0]) < 1e-6 * mass[0])
        assert np.all(grid.values >= 0)

    def test_single_time_node(self):
        model = DiffusionModel(FractalOrder(0.5), 2.0, gaussian)
        x = np.linspace(-1, 1, 5)
        grid = solvers.pde_solve(model, x, [0.0])
        assert grid.values.shape == (1, 5)
        assert list(grid.values[0]) == pytest.approx([gaussian(v) for v in x])

    def test_heat_equilibrium(self):
        """An insulated rod at uniform temperature stays there."""
        model = HeatModel(FractalOrder(1), kappa=1.0, conductivity=1.0, transfer=0.0, ambient=5.0, initial=2.0, length=1.0)
        grid = solvers.pde_solve(model, np.linspace(0, 1, 21), np.linspace(0, 0.1, 101))
        assert np.allclose(grid.values, 2.0, rtol=0, atol=1e-12)

    def test_heat_relaxes_towards_ambient(self, alpha):
        model = HeatModel(FractalOrder(alpha), kappa=1.0, conductivity=1.0, transfer=2.0, ambient=5.0, initial=2.0, length=1.0)
        x = np.linspace(0, 1, 11)
        dx = 0.1
        # time step giving a stability ratio of 0.4
        dt = (0.4 * dx ** (2 * alpha) / math.gamma(1 + alpha)) ** (1 / alpha)
        grid = solvers.pde_solve(model, x, dt * np.arange(200))
        final = grid.values[-1]
        assert np.all(final >= 2.0 - 1e-12)
        assert np.all(final <= 5.0 + 1e-12)
        assert final[-1] > 2.0

    def test_kappa_divides_the_spatial_term(self):
        def rod(kappa):
            return HeatModel(FractalOrder(1), kappa=kappa, conductivity=1.0, transfer=0.0, ambient=0.0, initial=1.0, length=1.0)

        x = np.linspace(0, 1, 11)
        assert rod(4.0).coefficient == 0.25
        with pytest.raises(StabilityError):
            solvers.pde_solve(rod(1.0), x, [0.0, 0.008])
        assert solvers.pde_solve(rod(4.0), x, [0.0, 0.008]).values.shape == (2, 11)

    def test_wave_first_step(self):
        """The first step adds rate * dt**alpha / Gamma(1 + alpha) inside the domain."""
        order = FractalOrder(0.5)
        model = WaveModel(order, rate=lambda x: 1.0)
        x = np.linspace(0, 1, 11)
        grid = solvers.pde_solve(model, x, [0.0, 1e-4])
        assert grid.values[1, 1:-1] == pytest.approx(np.full(9, 0.01 / math.gamma(1.5)), rel=1e-12)
        assert grid.values[1, 0] == 0.0
        assert grid.values[1, -1] == 0.0

    def test_stability_limit(self):
        model = DiffusionModel(FractalOrder(1), 1.0, gaussian)
        x = np.linspace(-1, 1, 21)
        with pytest.raises(StabilityError):
            solvers.pde_solve(model, x, [0.0, 0.01])

    def test_unstable_run_allowed(self, caplog):
        model = DiffusionModel(FractalOrder(1), 1.0, gaussian)
        x = np.linspace(-1, 1, 21)
        with caplog.at_level(logging.WARNING, logger="solvers"):
            grid = solvers.pde_solve(model, x, [0.0, 0.01, 0.02], allow_unstable=True)
        assert grid.values.shape == (3, 21)
        assert "stability ratio" in caplog.text

    def test_blow_up(self):
        model = DiffusionModel(FractalOrder(1), 1.0, lambda x: math.sin(40 * x))
        x = np.linspace(-1, 1, 41)
        with pytest.raises(StabilityError):
            solvers.pde_solve(model, x, 0.01 * np.arange(2000), allow_unstable=True)

    @pytest.mark.parametrize("x", [[0.0, 1.0], [0.0, 0.1, 0.5, 1.0], [1.0, 0.5, 0.0]])
    def test_bad_space_grid(self, x):
        model = DiffusionModel(FractalOrder(1), 1.0, gaussian)
        with pytest.raises(ConfigError):
            solvers.pde_solve(model, x, [0.0, 1e-4])

    def test_heat_grid_must_span_rod(self):
        model = HeatModel(FractalOrder(1), 1.0, 1.0, 0.0, 0.0, 1.0, 2.0)
        with pytest.raises(ConfigError):
            solvers.pde_solve(model, np.linspace(0, 1, 11), [0.0])

    @pytest.mark.parametrize("kwargs", [{"kappa": 0.0}, {"length": -1.0}, {"transfer": -1.0}, {"ambient": math.inf}])
    def test_invalid_heat_model(self, kwargs):
        params = dict(order=FractalOrder(1), kappa=1.0, conductivity=1.0, transfer=0.0, ambient=0.0, initial=1.0, length=1.0)
        params.update(kwargs)
        with pytest.raises(ConfigError):
            HeatModel(**params)

    def test_invalid_diffusion_model(self):
        with pytest.raises(ConfigError):
            DiffusionModel(FractalOrder(1), 0.0, gaussian)


class TestGridFunction:
    def test_csv(self):
        grid = GridFunction((0.0, 0.5), (0.0, 0.25), np.array([[1.0, 2.0], [0.1, 3.0]]))
        assert grid.to_csv() == "t,0,0.5\n0,1,2\n0.25,0.10000000000000001,3\n"

    def test_to_dict(self):
        grid = GridFunction((0.0, 1.0), (0.0,), np.array([[1.0, 2.0]]))
        assert grid.to_dict() == {"x_nodes": [0.0, 1.0], "t_nodes": [0.0], "values": [[1.0, 2.0]]}

    def test_shape_mismatch(self):
        with pytest.raises(ConfigError):
            GridFunction((0.0, 1.0), (0.0,), np.zeros((2, 2)))
