import math

import numpy as np
import pytest

from tfse.caputo import l1_weights
from tfse.errors import HistoryIncomplete, MemoryBudgetExceeded
from tfse.experiments import make_problem
from tfse.grid import ComplexField, MeshSpec, interior_l2, sample, sine_mode
from tfse.linsolve import make_solver, solve_dense_reference
from tfse.stepper import (
    History,
    Nonlinearity,
    SchrodingerProblem,
    assemble_rhs,
    derivative_bound_ratio,
    run,
    scheme_residual,
    shifted_operator,
    step,
)


def random_block(rng, m):
    return rng.standard_normal((m - 1, m - 1)) + 1j * rng.standard_normal((m - 1, m - 1))


class TestAssembleRhs:
    def test_zero_data(self):
        mesh = MeshSpec(0.5, M=6, N=4)
        k = l1_weights(0.5, mesh.tau, mesh.N)
        hist = History(mesh)
        hist.append(np.zeros((5, 5)))
        rhs = assemble_rhs(1, hist, k, Nonlinearity.cubic(), None, mesh)
        assert not np.any(rhs.values)

    def test_first_level_by_hand(self):
        mesh = MeshSpec(0.5, M=4, N=1)  # tau = 1
        k = l1_weights(0.5, 1.0, 1)
        s = sine_mode(1, 1, 4)
        hist = History(mesh)
        hist.append(s)
        rhs = assemble_rhs(1, hist, k, Nonlinearity.zero(), None, mesh)
        want = (1j / math.gamma(1.5)) * 1.0 * s.values
        assert np.allclose(rhs.values, want, rtol=1e-14, atol=0)

    def test_second_level_by_hand(self):
        mesh = MeshSpec(0.3, M=2, N=2)
        k = l1_weights(0.3, mesh.tau, 2)
        u0, u1 = 0.7 - 0.2j, -0.4 + 1.1j
        hist = History(mesh)
        hist.append(np.array([[u0]]))
        hist.append(np.array([[u1]]))

        def g(x, y, t):
            return (x + 2 * y) * t + 0j

        rhs = assemble_rhs(2, hist, k, Nonlinearity.cubic(), g, mesh)
        a0, a1 = 1.0, 2 ** 0.7 - 1.0
        mu = 0.5**0.3 * math.gamma(1.7)
        want = (1j / mu) * ((a0 - a1) * u1 + a1 * u0) - abs(u1) ** 2 * u1 + (0.5 + 1.0) * 1.0
        assert rhs.interior[0, 0] == pytest.approx(want, rel=1e-14)

    def test_incomplete(self):
        mesh = MeshSpec(0.5, M=4, N=4)
        k = l1_weights(0.5, mesh.tau, 4)
        hist = History(mesh)
        hist.append(np.zeros((3, 3)))
        with pytest.raises(HistoryIncomplete):
            assemble_rhs(2, hist, k, Nonlinearity.cubic(), None, mesh)


class TestStep:
    def test_zero_fixed_point(self):
        mesh = MeshSpec(0.5, M=8, N=10)
        problem = SchrodingerProblem(mesh, ComplexField.zeros(8))
        hist = run(problem)
        assert len(hist) == 11
        assert not np.any(hist.levels)

    def test_first_step_matches_dense(self):
        problem = make_problem(1, 0.5, 4, 4)
        mesh = problem.mesh
        k = l1_weights(0.5, mesh.tau, mesh.N)
        hist = History(mesh)
        hist.append(problem.u0)
        op = shifted_operator(k, mesh)
        u1 = step(1, hist, k, problem.nonlinearity, problem.forcing, make_solver(op, "dst"))
        rhs = assemble_rhs(1, hist, k, problem.nonlinearity, problem.forcing, mesh)
        ref = solve_dense_reference(op, rhs)
        assert np.max(np.abs(u1.values - ref.values)) <= 1e-11 * np.max(np.abs(ref.values))

    def test_single_step_run(self):
        problem = make_problem(2, 0.4, 1, 6)
        hist = run(problem)
        k = l1_weights(0.4, 1.0, 1)
        h0 = History(problem.mesh)
        h0.append(problem.u0)
        u1 = step(1, h0, k, problem.nonlinearity, None, make_solver(shifted_operator(k, problem.mesh)))
        assert np.array_equal(hist.block(1), u1.interior)

    def test_backends_agree(self):
        problem = make_problem(1, 0.6, 12, 10)
        a = run(problem, "dst")
        b = run(problem, "dense")
        assert np.max(np.abs(a.levels - b.levels)) <= 1e-11 * np.max(np.abs(b.levels))

    def test_precomputed_forcing(self):
        problem = make_problem(1, 0.5, 16, 5)
        a = run(problem)
        b = run(problem, precompute_forcing=True)
        assert np.array_equal(a.levels, b.levels)

    def test_memory_cap(self):
        problem = make_problem(2, 0.5, 100, 20)
        with pytest.raises(MemoryBudgetExceeded):
            run(problem, memory_cap=1000)


class TestRun:
    def test_deterministic(self):
        problem = make_problem(1, 0.5, 40, 9)
        a, b = run(problem), run(problem)
        assert a.levels.tobytes() == b.levels.tobytes()

    def test_bounded_smooth_problem(self):
        problem = make_problem(2, 0.5, 64, 50)
        hist = run(problem)
        u0_max = np.max(np.abs(problem.u0.values))
        observed = max(np.max(np.abs(hist.block(n))) for n in range(len(hist)))
        assert observed <= u0_max + 1
        assert observed <= 2

    def test_halving_error(self):
        from tfse.experiments import manufactured_errors

        e1 = manufactured_errors(0.5, 256, 16).local_error
        e2 = manufactured_errors(0.5, 512, 23).local_error
        assert math.log2(e1 / e2) == pytest.approx(1.0, abs=0.15)

    @pytest.mark.parametrize("example", [1, 2, 3])
    def test_derivative_bound(self, example):
        problem = make_problem(example, 0.5, 32, 12)
        hist = run(problem)
        k = l1_weights(0.5, problem.mesh.tau, 32)
        assert derivative_bound_ratio(hist, k) <= 1.0

    @pytest.mark.parametrize("example", [1, 3])
    def test_scheme_residual(self, example):
        problem = make_problem(example, 0.7, 20, 16)
        hist = run(problem)
        for n in range(1, 21):
            res, scale = scheme_residual(hist, problem, n)
            assert res <= 1e-10 * scale

    def test_superposition_without_nonlinearity(self):
        rng = np.random.default_rng(7)
        m, N = 10, 8
        mesh = MeshSpec(0.45, M=m, N=N)
        zero = Nonlinearity.zero()
        u0a = ComplexField.from_interior(random_block(rng, m))
        u0b = ComplexField.from_interior(random_block(rng, m))
        ca, cb = rng.standard_normal(3), rng.standard_normal(3)

        def ga(x, y, t):
            return (ca[0] * x + ca[1] * y * 1j + ca[2] * t) * x * (1 - x) * y * (1 - y)

        def gb(x, y, t):
            return (cb[0] + cb[1] * t**2 + 1j * cb[2] * x) * np.sin(np.pi * x) * y * (1 - y)

        a, b = 0.8 - 0.3j, -1.7 + 0.2j
        ra = run(SchrodingerProblem(mesh, u0a, zero, ga))
        rb = run(SchrodingerProblem(mesh, u0b, zero, gb))
        combo = SchrodingerProblem(mesh, a * u0a + b * u0b, zero, lambda x, y, t: a * ga(x, y, t) + b * gb(x, y, t))
        rc = run(combo)
        want = a * ra.levels + b * rb.levels
        assert np.linalg.norm(rc.levels - want) <= 1e-11 * np.linalg.norm(want)


def test_nonlinearity_term():
    u = np.array([3 + 4j, 1j])
    assert np.allclose(Nonlinearity.cubic().term(u), np.abs(u) ** 2 * u)
    assert not np.any(Nonlinearity.zero().term(u))
    quartic = Nonlinearity(lambda s: s**2, "quartic")
    assert np.allclose(quartic.term(u), np.abs(u) ** 4 * u)


def test_problem_rejects_mismatched_u0():
    with pytest.raises(ValueError):
        SchrodingerProblem(MeshSpec(0.5, M=4, N=2), ComplexField.zeros(5))


def test_history_field_roundtrip():
    mesh = MeshSpec(0.5, M=5, N=2)
    u = sample(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y) * (1 + 2j), mesh)
    hist = History(mesh)
    hist.append(u)
    assert np.array_equal(hist.field(0).values, u.values)
    assert interior_l2(hist.block(0), mesh.h) > 0
