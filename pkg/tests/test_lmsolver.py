"""Tests for the bounded Levenberg-Marquardt solver."""

import math

import numpy as np
import pytest

from bioinverse.errors import (
    ConfigError,
    ModelFailure,
    NoIntersection,
    PerturbationUnderflow,
    SingularSystem,
)
from bioinverse.lmsolver import (
    LMConfig,
    ParameterSpec,
    err_grad,
    err_res,
    fd_jacobian,
    fd_jacobian_columns,
    lm_step,
    perturb,
    read_trace_csv,
    run,
    update_mu,
    write_trace_csv,
)


class CountingResidual:
    """Wraps a residual function and counts calls."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)


def noise_floor_residual(x):
    """Scalar residual whose magnitude never drops below 1e-7."""
    e = x[0] - 0.3
    return np.array([e + 1e-7 * np.sign(e)])


@pytest.fixture
def box2():
    return ParameterSpec(names=["a", "b"], lower=[-10.0, -10.0], upper=[10.0, 10.0])


class TestParameterSpec:
    """Test ParameterSpec validation and bound checks."""

    def test_valid_spec(self):
        """Test a spec with units."""
        spec = ParameterSpec(
            names=["E", "nu"], lower=[1.0, -0.9], upper=[1e4, 0.45], units=["Pa", ""]
        )
        assert spec.size == 2
        assert spec.unit(0) == "Pa"

    def test_lower_must_be_below_upper(self):
        """Test that equal bounds are rejected."""
        with pytest.raises(ValueError, match="lower < upper"):
            ParameterSpec(names=["a"], lower=[1.0], upper=[1.0])

    def test_duplicate_names(self):
        """Test that parameter names must be unique."""
        with pytest.raises(ValueError, match="unique"):
            ParameterSpec(names=["a", "a"], lower=[0.0, 0.0], upper=[1.0, 1.0])

    def test_length_mismatch(self):
        """Test that bounds must match the names."""
        with pytest.raises(ValueError, match="equal length"):
            ParameterSpec(names=["a", "b"], lower=[0.0], upper=[1.0, 1.0])

    def test_contains_is_strict(self):
        """Test that points on a bound are outside."""
        spec = ParameterSpec(names=["a"], lower=[0.0], upper=[2.0])
        assert spec.contains([1.0])
        assert not spec.contains([2.0])
        assert not spec.contains([0.0])
        assert spec.violations([2.0]) == ["a"]


class TestLMConfig:
    """Test LMConfig defaults and invariants."""

    def test_defaults(self):
        """Test the default tuning values."""
        config = LMConfig()
        assert config.alpha == 1e-5
        assert config.beta == 1e-3
        assert config.mu0 == 1e-3
        assert config.eps_grad == 1e-8
        assert config.eps_res == 0.0
        assert config.mu_blowup == 1e6

    def test_zero_perturbation_rejected(self):
        """Test that alpha + beta must be positive."""
        with pytest.raises(ValueError, match="alpha \\+ beta"):
            LMConfig(alpha=0.0, beta=0.0)

    def test_invalid_values(self):
        """Test negative alpha, zero mu0 and n_max below one."""
        with pytest.raises(ValueError):
            LMConfig(alpha=-1.0)
        with pytest.raises(ValueError):
            LMConfig(mu0=0.0)
        with pytest.raises(ValueError):
            LMConfig(n_max=0)


class TestPerturb:
    """Test the finite-difference perturbation."""

    def test_relative_and_absolute_parts(self):
        """Test x_i = 400 with the default alpha and beta."""
        x_tilde, delta = perturb([400.0, 0.3], 0, 1e-5, 1e-3)
        assert delta == pytest.approx(0.40001, rel=1e-12)
        assert x_tilde[0] == pytest.approx(400.40001, rel=1e-14)
        assert x_tilde[1] == 0.3

    def test_zero_component(self):
        """Test that only alpha remains at x_i = 0."""
        _, delta = perturb([0.0], 0, 1e-5, 1e-3)
        assert delta == pytest.approx(1e-5)

    def test_negative_perturbation(self):
        """Test that the perturbation follows the sign of x_i."""
        x_tilde, delta = perturb([-0.01], 0, 0.0, 1e-3)
        assert delta == pytest.approx(-1e-5)
        assert x_tilde[0] == pytest.approx(-0.01001)

    def test_input_not_modified(self):
        """Test that perturb returns a copy."""
        x = np.array([1.0, 2.0])
        perturb(x, 1, 1e-5, 1e-3)
        assert x.tolist() == [1.0, 2.0]

    def test_underflow(self):
        """Test that a vanishing perturbation raises."""
        with pytest.raises(PerturbationUnderflow):
            perturb([0.0], 0, 0.0, 1e-3)

    def test_invalid_index(self):
        """Test that an out-of-range index raises."""
        with pytest.raises(IndexError):
            perturb([1.0], 3, 1e-5, 1e-3)


class TestFdJacobian:
    """Test the forward-difference Jacobian."""

    def test_linear_residual_is_exact(self):
        """Test that an affine residual gives its matrix."""
        A = np.array([[2.0, 0.0], [0.0, 3.0], [1.0, 1.0]])
        b = np.array([1.0, -1.0, 0.5])
        fn = lambda x: A @ x - b  # noqa: E731
        x = np.array([0.7, -0.2])
        J = fd_jacobian(fn, x, fn(x), 1e-5, 1e-3)
        np.testing.assert_allclose(J, A, rtol=1e-10, atol=1e-10)

    def test_quadratic_forward_difference(self):
        """Test (x + delta)^2 - x^2 over delta = 2x + delta."""
        fn = lambda x: np.array([x[0] ** 2])  # noqa: E731
        J = fd_jacobian(fn, [1.0], fn(np.array([1.0])), 1e-5, 1e-3)
        assert J[0, 0] == pytest.approx(2.001010, abs=1e-9)

    def test_constant_residual(self):
        """Test that a constant residual has a zero Jacobian."""
        fn = lambda x: np.array([1.0, 2.0, 3.0])  # noqa: E731
        J = fd_jacobian(fn, [0.5, 0.5], fn(None), 1e-5, 1e-3)
        assert np.all(J == 0.0)

    def test_matches_analytic_jacobian(self):
        """Test a nonlinear residual against its analytic Jacobian within 2e-3."""

        def fn(x):
            return np.array([x[0] ** 2, x[0] * x[1], math.sin(x[1])])

        x = np.array([1.3, 0.7])
        analytic = np.array([[2.6, 0.0], [0.7, 1.3], [0.0, math.cos(0.7)]])
        J = fd_jacobian(fn, x, fn(x), 1e-5, 1e-3)
        np.testing.assert_allclose(J, analytic, rtol=2e-3, atol=1e-14)

    def test_first_order_against_central_differences(self):
        """Test that the forward-difference error is bounded by the step size."""

        def fn(x):
            return np.array([x[0] ** 2, x[0] * x[1], math.sin(x[1])])

        x = np.array([1.3, 0.7])
        J = fd_jacobian(fn, x, fn(x), 1e-5, 1e-3)
        deltas = 1e-5 + 1e-3 * x
        central = np.empty_like(J)
        for i, delta in enumerate(deltas / 10.0):
            e = np.zeros(2)
            e[i] = delta
            central[:, i] = (fn(x + e) - fn(x - e)) / (2.0 * delta)
        assert np.all(np.abs(J - central) <= 1.01 * deltas[None, :])

    def test_sign_flip_at_upper_bound(self):
        """Test that a perturbation crossing a bound is mirrored and reported."""
        spec = ParameterSpec(names=["a"], lower=[0.0], upper=[1.0])
        fn = lambda x: 3.0 * x  # noqa: E731
        x = np.array([0.9995])
        J, flipped = fd_jacobian_columns(fn, x, fn(x), 1e-5, 1e-3, spec)
        assert flipped == [0]
        assert J[0, 0] == pytest.approx(3.0, rel=1e-9)

    def test_failure_reports_column(self):
        """Test that a failing perturbed evaluation names its column."""

        def fn(x):
            if x[1] > 0.5:
                raise NoIntersection(0, 1.0)
            return np.array([x[0], x[1]])

        x = np.array([0.5, 0.5])
        with pytest.raises(ModelFailure) as excinfo:
            fd_jacobian(fn, x, fn(x), 1e-5, 1e-3)
        assert excinfo.value.index == 1
        assert isinstance(excinfo.value.cause, NoIntersection)

    def test_non_model_errors_propagate(self):
        """Test that programming errors are not wrapped."""

        def fn(x):
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError, match="boom"):
            fd_jacobian(fn, [1.0], [0.0], 1e-5, 1e-3)

    def test_concurrent_columns_identical(self):
        """Test that threaded assembly matches sequential assembly bit for bit."""

        def fn(x):
            return np.array([np.exp(x[0]) * x[1], x[2] ** 3, x[0] * x[1] * x[2], np.cos(x[1])])

        x = np.array([0.1, 0.2, 0.3])
        sequential = fd_jacobian(fn, x, fn(x), 1e-5, 1e-3, workers=1)
        threaded = fd_jacobian(fn, x, fn(x), 1e-5, 1e-3, workers=3)
        assert np.array_equal(sequential, threaded)


class TestLmStep:
    """Test the damped normal-equation step."""

    def test_undamped_identity(self):
        """Test mu = 0 on the identity."""
        step = lm_step(np.eye(2), [1.0, -2.0], 0.0)
        np.testing.assert_allclose(step, [-1.0, 2.0])

    def test_damped_identity(self):
        """Test mu = 1 halves the step on the identity."""
        step = lm_step(np.eye(2), [1.0, -2.0], 1.0)
        np.testing.assert_allclose(step, [-0.5, 1.0])

    def test_matches_dense_solve(self):
        """Test a random system against an explicit dense solve."""
        rng = np.random.default_rng(11)
        J = rng.standard_normal((5, 3))
        r = rng.standard_normal(5)
        normal = J.T @ J
        expected = np.linalg.solve(normal + 0.3 * np.diag(np.diag(normal)), -J.T @ r)
        np.testing.assert_allclose(lm_step(J, r, 0.3), expected, rtol=1e-12, atol=1e-12)

    def test_parameter_units_do_not_matter(self):
        """Test that rescaling a parameter rescales its step without raising."""
        rng = np.random.default_rng(5)
        J = rng.standard_normal((8, 3))
        r = rng.standard_normal(8)
        scales = np.array([1e-7, 1.0, 1e5])
        base = lm_step(J, r, 1e-3)
        scaled = lm_step(J * scales, r, 1e-3)
        np.testing.assert_allclose(scaled * scales, base, rtol=1e-9)

    def test_zero_column_is_singular(self):
        """Test that an insensitive parameter raises SingularSystem."""
        J = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(SingularSystem) as excinfo:
            lm_step(J, [1.0, 1.0], 1e-3)
        assert excinfo.value.code == 6
        assert excinfo.value.parameters == [1]


class TestErrorMeasures:
    """Test err_grad and err_res."""

    def test_err_grad(self):
        """Test zero residual and the 3-4-5 case."""
        assert err_grad(np.eye(2), [0.0, 0.0]) == 0.0
        assert err_grad(np.eye(2), [3.0, 4.0]) == pytest.approx(5.0)

    def test_err_grad_random(self):
        """Test against a direct matrix-vector product."""
        rng = np.random.default_rng(3)
        J = rng.standard_normal((6, 2))
        r = rng.standard_normal(6)
        assert err_grad(J, r) == pytest.approx(math.hypot(*(J.T @ r)), rel=1e-14)

    def test_err_res(self):
        """Test the RMS of constant and simple residuals."""
        assert err_res([0.1, 0.1, 0.1, 0.1]) == pytest.approx(0.1)
        assert err_res([0.0, 0.0]) == 0.0
        assert err_res([3.0, 4.0]) == pytest.approx(3.5355339, rel=1e-7)

    def test_err_res_empty(self):
        """Test that an empty residual raises."""
        with pytest.raises(ValueError):
            err_res([])


class TestUpdateMu:
    """Test the regularization update rule."""

    def test_improved_scales(self):
        """Test that an improved step scales mu by the gradient ratio."""
        assert update_mu(1.0, 0.5, 1.0, True) == pytest.approx(0.5)

    def test_not_improved_unchanged(self):
        """Test that mu stays when the residual worsened."""
        assert update_mu(1.0, 0.5, 1.0, False) == 1.0
        assert update_mu(2.0, 1.3, 1.0, False) == 2.0

    def test_previous_must_be_positive(self):
        """Test the precondition on the previous gradient error."""
        with pytest.raises(ValueError):
            update_mu(1.0, 0.5, 0.0, True)


class TestRun:
    """Test the full bounded iteration."""

    def test_linear_problem(self, box2):
        """Test near-Newton convergence on x - (1, 2)."""
        result = run(lambda x: x - np.array([1.0, 2.0]), [5.0, 5.0], box2)
        assert result.status == "converged_grad"
        assert result.converged
        np.testing.assert_allclose(result.x, [1.0, 2.0], atol=1e-8)
        assert result.iterations <= 5
        assert result.err_grad < 1e-8

    def test_first_step_hits_least_squares_solution(self):
        """Test that one step with tiny mu lands on the normal-equation solution."""
        rng = np.random.default_rng(2024)
        A = rng.standard_normal((10, 3))
        assert np.linalg.cond(A) < 1e3
        b = rng.standard_normal(10)
        expected = np.linalg.solve(A.T @ A, A.T @ b)
        spec = ParameterSpec(names=["a", "b", "c"], lower=[-100.0] * 3, upper=[100.0] * 3)
        config = LMConfig(mu0=1e-12, n_max=1, eps_grad=0.0)
        result = run(lambda x: A @ x - b, np.zeros(3), spec, config)
        assert result.iterations == 1
        assert result.status == "max_iterations"
        np.testing.assert_allclose(result.x, expected, rtol=1e-8, atol=1e-12)

    def test_mu_blowup_when_optimum_outside_bounds(self):
        """Test the bounded scalar toy terminates without result."""
        spec = ParameterSpec(names=["a"], lower=[0.0], upper=[2.0])
        counter = CountingResidual(lambda x: x - 5.0)
        config = LMConfig(mu0=1e-3, mu_blowup=1e6)
        result = run(counter, [1.0], spec, config)

        assert result.status == "mu_blowup"
        assert result.failed
        assert result.mu > config.mu0 * config.mu_blowup
        assert 1.0 < result.x[0] < 2.0
        # declines are free: only the base point, Jacobians and accepted steps cost calls
        assert counter.calls == result.evaluations == 2 * (result.iterations + 1)

        declined = [rec for rec in result.trace if rec.status == "declined_bounds"]
        assert declined
        for before, after in zip(result.trace, result.trace[1:]):
            if before.status == "declined_bounds" and after.k == before.k:
                assert after.mu == pytest.approx(2.0 * before.mu)

    def test_evaluation_budget(self):
        """Test exactly n_x + 1 residual calls per completed iteration."""

        def fn(x):
            return np.array([x[0] ** 2 - 2.0, x[0] * x[1] - 1.0, x[1] + x[2] - 3.0, x[2] - 1.5])

        spec = ParameterSpec(names=["a", "b", "c"], lower=[0.1] * 3, upper=[5.0] * 3)
        counter = CountingResidual(fn)
        result = run(counter, [1.0, 1.0, 1.0], spec)
        assert result.iterations >= 2
        assert counter.calls == result.evaluations == (spec.size + 1) * (result.iterations + 1)

    def test_trace_structure(self):
        """Test ordering of records and feasibility of accepted iterates."""
        spec = ParameterSpec(names=["a"], lower=[0.0], upper=[2.0])
        result = run(lambda x: x - 5.0, [1.0], spec)
        ks = [rec.k for rec in result.trace]
        assert ks == sorted(ks)
        accepted = [rec.k for rec in result.trace if rec.status == "accepted"]
        assert accepted == list(range(len(accepted)))
        assert [rec.status for rec in result.trace].count("terminated") == 1
        assert result.trace[-1].status == "terminated"
        assert result.trace[-1].outcome == "mu_blowup"
        for rec in result.trace:
            assert spec.contains(rec.x)

    def test_converged_res_at_solution(self, box2):
        """Test that starting on the solution stops via eps_res."""
        config = LMConfig(eps_res=1e-12)
        result = run(lambda x: x - np.array([1.0, 2.0]), [1.0, 2.0], box2, config)
        assert result.status == "converged_res"
        assert result.iterations == 0
        assert result.evaluations == 3

    def test_noise_floor_needs_relaxed_tolerance(self):
        """Test that a residual floor blocks eps_grad=1e-8 but not 1e-6."""
        spec = ParameterSpec(names=["a"], lower=[0.0], upper=[2.0])
        strict = run(noise_floor_residual, [0.9], spec, LMConfig(eps_grad=1e-8, n_max=30))
        relaxed = run(noise_floor_residual, [0.9], spec, LMConfig(eps_grad=1e-6, n_max=30))
        assert strict.status == "max_iterations"
        assert strict.iterations == 30
        assert relaxed.status == "converged_grad"
        assert relaxed.x[0] == pytest.approx(0.3, abs=1e-6)

    def test_model_failure_at_base_point(self, box2):
        """Test that an unevaluable start yields model_failure."""

        def fn(x):
            raise NoIntersection(2, 1.0)

        result = run(fn, [0.0, 0.0], box2)
        assert result.status == "model_failure"
        assert result.failure["data"]["index"] is None
        assert result.failure["data"]["cause"]["type"] == "NoIntersection"
        assert result.trace[-1].outcome == "model_failure"

    def test_model_failure_in_jacobian(self, box2):
        """Test that a failing perturbed column is recorded."""

        def fn(x):
            if x[1] > 0.5:
                raise NoIntersection(0, 1.0)
            return x - 0.2

        result = run(fn, [0.4, 0.5], box2)
        assert result.status == "model_failure"
        assert result.failure["data"]["index"] == 1
        assert result.x == [0.4, 0.5]

    def test_singular_system_propagates(self, box2):
        """Test that an insensitive parameter raises."""
        with pytest.raises(SingularSystem):
            run(lambda x: np.array([x[0] - 1.0, 2.0 * x[0] + 1.0]), [0.0, 0.0], box2)

    def test_initial_guess_outside_bounds(self, box2):
        """Test that x0 must be strictly inside the box."""
        with pytest.raises(ConfigError, match="strictly inside"):
            run(lambda x: x, [10.0, 0.0], box2)

    def test_initial_guess_wrong_size(self, box2):
        """Test that x0 must match the parameter count."""
        with pytest.raises(ConfigError, match="expected 2"):
            run(lambda x: x, [1.0], box2)

    def test_deterministic(self):
        """Test that repeated and threaded runs give identical traces."""

        def fn(x):
            return np.array([x[0] ** 2 - 2.0, x[0] * x[1] - 1.0, np.sin(x[1]) - 0.5])

        spec = ParameterSpec(names=["a", "b"], lower=[0.1, 0.1], upper=[3.0, 3.0])
        first = run(fn, [1.0, 1.0], spec)
        second = run(fn, [1.0, 1.0], spec)
        threaded = run(fn, [1.0, 1.0], spec, workers=2)
        assert first.model_dump() == second.model_dump()
        assert first.model_dump() == threaded.model_dump()


class TestTraceCsv:
    """Test trace CSV export."""

    def test_columns_and_rows(self, tmp_path):
        """Test header and one row per proposal."""
        spec = ParameterSpec(names=["a"], lower=[0.0], upper=[2.0])
        result = run(lambda x: x - 5.0, [1.0], spec)
        path = write_trace_csv(result.trace, tmp_path / "trace.csv")
        header = path.read_text().splitlines()[0]
        assert header == "k,status,mu,err_res_mm,err_grad,x_0"

        rows = read_trace_csv(path)
        assert len(rows) == len(result.trace)
        assert rows[-1]["status"] == "terminated"
        assert rows[0]["x_0"] == 1.0
        assert rows[0]["mu"] == result.trace[0].mu

    def test_empty_trace(self, tmp_path):
        """Test that an empty trace cannot be written."""
        with pytest.raises(ValueError):
            write_trace_csv([], tmp_path / "trace.csv")

    def test_not_a_trace(self, tmp_path):
        """Test that a foreign CSV is rejected."""
        path = tmp_path / "other.csv"
        path.write_text("x_mm,y_mm\n0,0\n")
        with pytest.raises(ConfigError):
            read_trace_csv(path)
