"""Ground state solver and mountain-pass geometry checks."""

import math

import numpy as np
import pytest

from graphvar import (
    HypothesisError,
    InputError,
    VertexFunction,
    ball,
    h_norm,
    local_dirichlet_energy,
    mp_geometry_check,
    nonlinearity,
    solve_yamabe,
    yamabe_energy,
)

from conftest import random_graph


def scalar_report(path3, hval, q=4.0):
    b = ball(path3, "b", 1)
    h = VertexFunction.constant(path3, hval)
    return b, h, solve_yamabe(path3, b, h, q, tol=1e-12)


class TestNonlinearity:
    def test_scalar_values(self):
        f, big_f = nonlinearity(2.0, 4.0)
        assert f == 8.0 and big_f == 4.0
        f, big_f = nonlinearity(-2.0, 3.0)
        assert f == -4.0 and big_f == pytest.approx(8.0 / 3.0)

    def test_array_values(self):
        f, big_f = nonlinearity(np.array([-1.0, 0.0, 3.0]), 3.0)
        assert np.allclose(f, [-1.0, 0.0, 9.0])
        assert np.allclose(big_f, [1.0 / 3.0, 0.0, 9.0])

    def test_rejects_subcritical_power(self):
        with pytest.raises(InputError, match="q > 2"):
            nonlinearity(1.0, 2.0)


class TestSolver:
    def test_scalar_oracle_h_one(self, path3):
        # interior {b}: 2u + u = u^3 -> u = sqrt(3), J = (1/2)*3 - 9/4... no:
        # ||u||^2 = 3u^2 = 9, J = 9/2 - 9/4 = 2.25
        b, h, rep = scalar_report(path3, 1.0)
        assert rep.u("b") == pytest.approx(math.sqrt(3.0), abs=1e-10)
        assert rep.energy == pytest.approx(2.25, abs=1e-10)
        assert rep.residual <= 1e-12
        assert rep.nehari_defect <= 1e-10

    def test_scalar_oracle_h_two(self, path3):
        b, h, rep = scalar_report(path3, 2.0)
        assert rep.u("b") == pytest.approx(2.0, abs=1e-10)

    def test_energy_identity_and_nonnegativity(self):
        rng = np.random.default_rng(127)
        for trial in range(8):
            g = random_graph(rng, int(rng.integers(5, 12)))
            region = ball(g, g.ids[0], 2)
            h = VertexFunction.from_array(g, rng.uniform(0.5, 3.0, len(g)))
            q = float(rng.uniform(2.5, 6.0))
            rep = solve_yamabe(g, region, h, q, tol=1e-11, rng_seed=trial)
            norm2 = local_dirichlet_energy(g, region, rep.u, h)
            assert rep.energy == pytest.approx((0.5 - 1.0 / q) * norm2, rel=1e-8)
            assert rep.energy > 0.0
            assert rep.nehari_defect <= 1e-8 * max(1.0, norm2)
            assert min(rep.u.values.values()) >= -1e-12

    def test_agrees_with_functional(self, path3):
        b, h, rep = scalar_report(path3, 1.0)
        assert yamabe_energy(path3, b, h, 4.0, rep.u) == pytest.approx(rep.energy)

    def test_whole_graph_energy(self, path3):
        h = VertexFunction.constant(path3, 1.0)
        u = VertexFunction.constant(path3, 1.0)
        # ||u||_H^2 = 0 + 3, int F = 3/4
        assert yamabe_energy(path3, None, h, 4.0, u) == pytest.approx(0.75)
        assert h_norm(path3, u, h) == pytest.approx(math.sqrt(3.0))

    def test_rejects_bad_power_and_bad_h(self, path3):
        b = ball(path3, "b", 1)
        h = VertexFunction.constant(path3, 1.0)
        with pytest.raises(InputError, match="q > 2"):
            solve_yamabe(path3, b, h, 2.0)
        h_bad = VertexFunction({"a": 1.0, "b": -0.5, "c": 1.0})
        with pytest.raises(HypothesisError, match="'b'"):
            solve_yamabe(path3, b, h_bad, 4.0)

    def test_bracket_orders_the_level(self):
        rng = np.random.default_rng(131)
        g = random_graph(rng, 10)
        region = ball(g, g.ids[0], 2)
        h = VertexFunction.constant(g, 1.0)
        rep = solve_yamabe(g, region, h, 4.0)
        assert 0.0 < rep.bracket_lo <= rep.bracket_hi
        assert rep.bracket_hi == rep.energy

    def test_warm_start_converges_fast(self, path3):
        b, h, rep = scalar_report(path3, 1.0)
        again = solve_yamabe(path3, b, h, 4.0, tol=1e-12, start=rep.u)
        assert again.iterations <= 2
        assert again.u("b") == pytest.approx(rep.u("b"), abs=1e-11)


class TestGeometry:
    def test_landscape_holds_at_solver_delta(self, path3):
        b, h, rep = scalar_report(path3, 1.0)
        geom = mp_geometry_check(path3, b, h, 4.0, rep.delta)
        assert geom.ok
        assert geom.origin_value == 0.0
        assert geom.sphere_min > 0.0
        assert geom.spike_norm > rep.delta and geom.spike_value < 0.0

    def test_huge_delta_reported_not_raised(self, path3):
        b = ball(path3, "b", 1)
        h = VertexFunction.constant(path3, 1.0)
        # on the delta-sphere J = delta^2/2 - delta^4/(4*9) < 0 for delta > 3*sqrt(2)
        geom = mp_geometry_check(path3, b, h, 4.0, delta=10.0)
        assert not geom.sphere_ok
        assert not geom.ok

    def test_delta_must_be_positive(self, path3):
        b = ball(path3, "b", 1)
        h = VertexFunction.constant(path3, 1.0)
        with pytest.raises(InputError, match="delta"):
            mp_geometry_check(path3, b, h, 4.0, delta=0.0)
