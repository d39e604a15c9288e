"""Norms, hypothesis constants, embedding inequalities, Poincare constants."""

import math

import numpy as np
import pytest
import scipy.linalg

from graphvar import (
    DegenerateInputError,
    HypothesisConstants,
    HypothesisError,
    InputError,
    VertexFunction,
    ball,
    check_embeddings,
    dirichlet_lq_constant,
    dirichlet_matrix,
    h_inner,
    h_norm,
    interpolation_check,
    local_dirichlet_energy,
    lq_norm,
    pointwise_distance_bound,
    poincare_constant,
    lp_embedding_constant,
    trudinger_moser_bound,
    w12_norm,
)

from conftest import random_graph, random_function


class TestNorms:
    def test_l2_of_bump(self, path3, bump):
        assert lq_norm(path3, bump, 2.0) == 1.0

    def test_sup_norm(self, path3):
        u = VertexFunction({"a": -3.0, "b": 1.0, "c": 2.0})
        assert lq_norm(path3, u, math.inf) == 3.0

    def test_l1_with_measure(self):
        g = random_graph(np.random.default_rng(0), 8)
        u = random_function(np.random.default_rng(1), g)
        expected = sum(g.measure_of(x) * abs(u(x)) for x in g.ids)
        assert lq_norm(g, u, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_q_below_one_rejected(self, path3, bump):
        with pytest.raises(InputError, match="q >= 1"):
            lq_norm(path3, bump, 0.5)

    def test_w12_of_bump(self, path3, bump):
        assert w12_norm(path3, bump) == pytest.approx(math.sqrt(3.0), rel=1e-15)

    def test_h_norm_weights_mass(self, path3, bump):
        h2 = VertexFunction.constant(path3, 2.0)
        assert h_norm(path3, bump, h2) == pytest.approx(2.0, rel=1e-15)

    def test_h_norm_rejects_sign(self, path3, bump):
        h = VertexFunction({"a": 1.0, "b": -1.0, "c": 1.0})
        with pytest.raises(HypothesisError, match="'b'"):
            h_norm(path3, bump, h)

    def test_h_inner_polarization(self):
        rng = np.random.default_rng(2)
        g = random_graph(rng, 9)
        h = VertexFunction.from_array(g, rng.uniform(0.5, 3.0, len(g)))
        u, v = random_function(rng, g), random_function(rng, g)
        upv = VertexFunction.from_array(g, u.to_array(g) + v.to_array(g))
        umv = VertexFunction.from_array(g, u.to_array(g) - v.to_array(g))
        polar = 0.25 * (h_norm(g, upv, h) ** 2 - h_norm(g, umv, h) ** 2)
        assert h_inner(g, u, v, h) == pytest.approx(polar, rel=1e-10, abs=1e-12)


class TestLocalEnergy:
    def test_bump_energy_with_unit_h(self, path3, bump):
        b = ball(path3, "b", 1)
        one = VertexFunction.constant(path3, 1.0)
        assert local_dirichlet_energy(path3, b, bump, one) == 3.0

    def test_without_h_counts_edges_only(self, path3, bump):
        b = ball(path3, "b", 1)
        assert local_dirichlet_energy(path3, b, bump) == 2.0

    def test_support_leak_names_vertex(self, path3):
        b = ball(path3, "b", 1)
        u = VertexFunction({"b": 1.0, "c": 0.5})
        with pytest.raises(InputError, match="'c'"):
            local_dirichlet_energy(path3, b, u)

    def test_exact_zero_outside_is_fine(self, path3, bump):
        b = ball(path3, "b", 1)
        local_dirichlet_energy(path3, b, bump)  # (0,1,0) leaks nothing


class TestHypothesisConstants:
    def test_defaults_validate(self, path3):
        HypothesisConstants(a0=1.0).validate_against(path3)

    def test_bad_a0(self):
        with pytest.raises(HypothesisError, match="a0"):
            HypothesisConstants(a0=0.0)

    def test_mu0_violation_names_vertex(self):
        g = WeightedGraph = None
        from graphvar import WeightedGraph

        g = WeightedGraph([("a", "b", 1.0)], {"a": 0.25})
        with pytest.raises(HypothesisError, match="'a'"):
            HypothesisConstants(a0=1.0, mu0=0.5).validate_against(g)

    def test_w0_violation_names_edge(self, path3):
        with pytest.raises(HypothesisError, match="'a'.*'b'|'b'.*'a'"):
            HypothesisConstants(a0=1.0, w0=2.0).validate_against(path3)

    def test_h_below_a0_names_vertex(self, path3):
        h = VertexFunction({"a": 1.0, "b": 0.25, "c": 1.0})
        with pytest.raises(HypothesisError, match="'b'"):
            HypothesisConstants(a0=0.5).validate_against(path3, h)


class TestExplicitConstants:
    def test_lp_constant_unit_case(self):
        # w0 = mu(O) = 1, p = 2: max(1 + sqrt2, sqrt2) = 1 + sqrt2
        assert lp_embedding_constant(1.0, 1.0, 2.0) == pytest.approx(1.0 + math.sqrt(2.0))

    def test_lp_constant_small_p_penalty(self):
        # p < 1 multiplies by 2^(1/p)
        c1 = lp_embedding_constant(1.0, 1.0, 0.5)
        assert c1 == pytest.approx(4.0 * (1.0 + 4.0))  # 2^2 * (1 + 2^2/1)

    def test_dirichlet_lq_extremes(self):
        assert dirichlet_lq_constant(2.0, 0.5, 2.0) == pytest.approx(1.0 / math.sqrt(2.0))
        assert dirichlet_lq_constant(math.inf, 0.5, 2.0) == pytest.approx(1.0)

    def test_dirichlet_lq_needs_q_geq_2(self):
        with pytest.raises(InputError):
            dirichlet_lq_constant(1.5, 1.0, 1.0)


class TestEmbeddings:
    def test_fuzz_all_hold(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            g = random_graph(rng, int(rng.integers(5, 25)))
            consts = HypothesisConstants(
                a0=1.0,
                mu0=float(g.mu.min()),
                w0=float(g.edge_w.min()),
                p=float(rng.uniform(2.5, 5.0)),
                q=2.0,
            )
            u = random_function(rng, g, scale=float(rng.uniform(0.1, 10.0)))
            rep = check_embeddings(g, consts, u, origin=g.ids[0])
            assert rep.all_hold, [c for c in rep.checks if not c.holds]
            assert {c.name for c in rep.checks} == {"sup", "lp", "interpolation"}

    def test_interpolation_included_when_q_between(self):
        g = random_graph(np.random.default_rng(29), 10)
        consts = HypothesisConstants(a0=1.0, mu0=float(g.mu.min()), p=3.0, q=1.5)
        rep = check_embeddings(g, consts, random_function(np.random.default_rng(31), g))
        assert rep["interpolation"].holds

    def test_lp_needs_origin(self, path3, bump):
        consts = HypothesisConstants(a0=1.0, w0=1.0, p=2.0)
        with pytest.raises(HypothesisError, match="origin|base"):
            check_embeddings(path3, consts, bump)

    def test_sup_tightness_on_single_spike(self):
        # equality case: one vertex carries everything when graph is tiny
        g = random_graph(np.random.default_rng(37), 5)
        consts = HypothesisConstants(a0=1.0, mu0=float(g.mu.min()))
        u = VertexFunction.dirac(g.ids[2], 5.0)
        rep = check_embeddings(g, consts, u)
        chk = rep["sup"]
        assert chk.holds and chk.lhs <= chk.rhs

    def test_pointwise_bound_random(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            g = random_graph(rng, int(rng.integers(4, 15)))
            consts = HypothesisConstants(a0=1.0, w0=float(g.edge_w.min()))
            u = random_function(rng, g)
            x, o = (g.ids[int(i)] for i in rng.integers(0, len(g.ids), size=2))
            bound, holds = pointwise_distance_bound(g, consts, u, x, o)
            assert holds and abs(u(x)) <= bound + 1e-12

    def test_pointwise_needs_w0(self, path3, bump):
        with pytest.raises(HypothesisError, match="w0"):
            pointwise_distance_bound(path3, HypothesisConstants(a0=1.0), bump, "a", "b")

    def test_interpolation_exact_on_random(self):
        rng = np.random.default_rng(43)
        g = random_graph(rng, 12)
        u = random_function(rng, g)
        lhs, rhs = interpolation_check(g, u, 1.5, 4.0)
        assert lhs <= rhs + 1e-10

    def test_interpolation_range_guard(self, path3, bump):
        with pytest.raises(InputError, match="1 < q < p"):
            interpolation_check(path3, bump, 3.0, 2.0)


class TestTrudingerMoser:
    def test_scalar_frozen_case(self, path3, bump):
        b = ball(path3, "b", 1)
        g = VertexFunction.constant(path3, 1.0)
        consts = HypothesisConstants(a0=1.0, mu0=1.0)
        lhs, rhs, holds = trudinger_moser_bound(path3, b, consts, g, bump, 0.25)
        assert lhs == pytest.approx(1.0)  # log(1 * e^1)
        assert rhs == pytest.approx(math.log(3.0) + 1.0 + 0.75)
        assert holds

    def test_fuzz_eps_grid(self):
        rng = np.random.default_rng(47)
        for _ in range(25):
            g = random_graph(rng, int(rng.integers(6, 20)))
            o = g.ids[0]
            b = ball(g, o, 2)
            consts = HypothesisConstants(a0=1.0, mu0=float(g.mu.min()))
            mask = np.zeros(len(g))
            mask[b.interior_idx] = 1.0
            u = VertexFunction.from_array(g, rng.standard_normal(len(g)) * mask)
            gw = VertexFunction.from_array(g, np.exp(-g.distances_from(o).astype(float)))
            for eps in (0.125, 0.25):
                lhs, rhs, holds = trudinger_moser_bound(g, b, consts, gw, u, eps)
                assert holds, (lhs, rhs)

    def test_zero_mass_degenerate(self, path3, bump):
        b = ball(path3, "b", 1)
        g = VertexFunction.dirac("a", 1.0)  # supported on the boundary only
        consts = HypothesisConstants(a0=1.0, mu0=1.0)
        with pytest.raises(DegenerateInputError, match="vanishes"):
            trudinger_moser_bound(path3, b, consts, g, bump, 0.25)

    def test_negative_g_rejected(self, path3, bump):
        b = ball(path3, "b", 1)
        g = VertexFunction({"b": -1.0})
        consts = HypothesisConstants(a0=1.0, mu0=1.0)
        with pytest.raises(HypothesisError, match="'b'"):
            trudinger_moser_bound(path3, b, consts, g, bump, 0.25)

    def test_bad_eps(self, path3, bump):
        b = ball(path3, "b", 1)
        g = VertexFunction.constant(path3, 1.0)
        with pytest.raises(InputError, match="eps"):
            trudinger_moser_bound(path3, b, HypothesisConstants(a0=1.0, mu0=1.0), g, bump, 0.0)


class TestPoincare:
    def test_scalar_value(self, path3):
        assert poincare_constant(path3, ball(path3, "b", 1)) == 0.5

    def test_against_dense_eigensolver(self):
        rng = np.random.default_rng(53)
        for _ in range(8):
            g = random_graph(rng, int(rng.integers(6, 18)))
            b = ball(g, g.ids[0], int(rng.integers(2, 4)))
            if len(b.interior_idx) == len(g):
                continue
            dense = dirichlet_matrix(g, b).toarray()
            m = np.diag(g.mu[b.interior_idx])
            lam = scipy.linalg.eigh(dense, m, eigvals_only=True)[0]
            assert poincare_constant(g, b) == pytest.approx(1.0 / lam, rel=1e-6)

    def test_nondecreasing_in_radius(self):
        g = random_graph(np.random.default_rng(59), 30)
        o = g.ids[0]
        values = []
        for k in range(1, 5):
            b = ball(g, o, k)
            if len(b.interior_idx) == len(g):
                break
            values.append(poincare_constant(g, b))
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_full_cover_rejected(self, path3):
        with pytest.raises(InputError, match="exhausts"):
            poincare_constant(path3, ball(path3, "b", 5))
