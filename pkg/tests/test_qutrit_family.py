import math

import numpy as np
import pytest
from scipy.linalg import expm

from qmarkov.operators import OperandError, check_density, random_probes, trace_norm
from qmarkov.qutrit_family import (D1, D2, D3, G, K2, RHO_A, RHO_B,
                                   ConstantsTable, MapParams, RateFunction,
                                   continuity_report, dephasing_generator,
                                   family, gamma_family, lambda_t,
                                   load_params, make_E, rotated_ket)

SEED = 5


def unit(i, j):
    m = np.zeros((3, 3), dtype=complex)
    m[i, j] = 1.0
    return m


class TestConstants:
    def test_sign_matrices_are_involutions(self):
        for D in (D1, D2, D3):
            assert np.allclose(D @ D, np.eye(3))

    def test_target_states_are_densities(self):
        check_density(RHO_A)
        check_density(RHO_B)
        assert np.allclose(RHO_A, np.diag([1.0, 0.0, 1.0]) / 2)
        assert np.allclose(RHO_B, np.diag([0.0, 1.0, 1.0]) / 2)

    def test_rotation_generator_block(self):
        # G^2 restricted to the 1-2 block is the identity there
        assert np.allclose((G @ G)[:2, :2], np.eye(2))
        assert np.allclose(G[2], 0.0)

    def test_rotated_ket_matches_expm(self):
        for angle in (0.0, 0.7, 1.5):
            assert np.allclose(rotated_ket(angle),
                               expm(1j * G * angle) @ np.array([0.0, 1.0, 0.0]))

    def test_table_copies(self):
        table = ConstantsTable()
        table.D1[0, 0] = 99.0
        assert D1[0, 0] == -1.0


class TestRateFunction:
    def test_default_pole(self):
        r = RateFunction()
        assert r.f(0.0) == 0.0
        assert r.f(0.5) == pytest.approx(0.5)
        assert math.isinf(r.f(1.0))
        assert r.g(0.5) == pytest.approx(-math.log(0.5))
        assert math.isinf(r.g(1.0))

    def test_f_monotone(self):
        r = RateFunction()
        taus = np.linspace(0.0, 0.99, 50)
        vals = [r.f(t) for t in taus]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_custom_gamma_integrates(self):
        r = RateFunction(gamma_fn=lambda s: 2.0)
        assert r.g(0.3) == pytest.approx(0.6, abs=1e-10)

    def test_tabulated(self):
        r = RateFunction(kind="custom-tabulated",
                         table=((0.0, 0.0), (0.5, 1.0), (0.9, 5.0)))
        assert r.f(0.25) == pytest.approx(0.5)
        assert math.isinf(r.f(1.0))
        with pytest.raises(OperandError):
            RateFunction(kind="custom-tabulated", table=((0.0, 0.0), (0.5, -1.0)))

    def test_bad_kind(self):
        with pytest.raises(OperandError):
            RateFunction(kind="nope")


class TestParams:
    def test_defaults_in_window(self):
        assert MapParams().in_contractive_window

    def test_validation(self):
        with pytest.raises(OperandError):
            MapParams(t2=0.5)
        with pytest.raises(OperandError):
            MapParams(theta=4.0)
        with pytest.raises(OperandError):
            MapParams(delta=0.9)

    def test_config_roundtrip(self, tmp_path):
        cfg = tmp_path / "params.cfg"
        cfg.write_text("# comment\ntheta = 1.45\nt1=0.5\nt2=1\nt3=2\nt4=3\n"
                       "delta = 1.1\nrate = default-pole\n")
        p = load_params(cfg)
        assert p.theta == 1.45 and p.t1 == 0.5 and p.delta == 1.1

    def test_config_rejects_unknown(self, tmp_path):
        cfg = tmp_path / "params.cfg"
        cfg.write_text("thetaa = 1\n")
        with pytest.raises(OperandError):
            load_params(cfg)


class TestElementaryMaps:
    def test_e1_action(self):
        X = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]])
        assert np.allclose(make_E(1).apply(X), np.diag([1.0, 4.0, 6.0]), atol=1e-14)

    def test_e3_targets(self):
        E3 = make_E(3)
        assert np.allclose(E3.apply(unit(0, 0)), RHO_A, atol=1e-14)
        assert np.allclose(E3.apply(unit(1, 1)), RHO_B, atol=1e-14)

    def test_e4_rotated_target(self):
        theta = 1.5
        ket = np.array([math.sin(theta), math.cos(theta), 0.0])
        out = make_E(4, MapParams(theta=theta)).apply(unit(1, 1))
        assert np.allclose(out, 2 * np.outer(ket, ket), atol=1e-12)

    def test_index_range(self):
        with pytest.raises(OperandError):
            make_E(5)


class TestGammaFamilies:
    def test_gamma1_matches_expm_oracle(self):
        params = MapParams()
        L0 = dephasing_generator().matrix
        for tau in np.arange(0.1, 0.95, 0.1):
            g = params.gamma_rate.g(tau)
            dense = expm(g * L0)
            assert np.max(np.abs(gamma_family(1, tau).matrix - dense)) < 1e-10

    def test_gamma1_coefficients(self):
        for tau in np.arange(0.1, 0.95, 0.1):
            S = gamma_family(1, tau)
            decay = math.exp(4 * math.log1p(-tau))  # e^{-4 g} for the pole rate
            for i in range(3):
                for j in range(3):
                    expected = 1.0 if i == j else decay
                    assert S.apply(unit(i, j))[i, j] == pytest.approx(expected,
                                                                     abs=1e-10)

    def test_gamma1_limit_is_e1(self):
        assert np.allclose(gamma_family(1, 1.0).matrix, make_E(1).matrix)

    def test_gamma23_limits(self):
        assert np.allclose(gamma_family(2, 0.0).matrix, np.eye(9))
        assert np.allclose(gamma_family(2, 1.0).matrix, make_E(2).matrix)
        assert np.allclose(gamma_family(3, 1.0).matrix, make_E(3).matrix)

    def test_gamma4_endpoints(self):
        g0 = gamma_family(4, 0.0)
        assert np.allclose(g0.apply(RHO_A), RHO_A, atol=1e-14)
        assert np.allclose(g0.apply(RHO_B), RHO_B, atol=1e-14)
        g1 = gamma_family(4, 1.0)
        ket = rotated_ket(1.5)
        assert np.allclose(g1.apply(RHO_A), np.outer(ket * 0, ket * 0)
                           + np.diag([1.0, 0.0, 0.0]), atol=1e-14)
        assert np.allclose(g1.apply(RHO_B), np.outer(ket, ket.conj()), atol=1e-14)

    def test_gamma23_tp_on_their_images(self):
        probes = random_probes(3, 20, SEED).probes
        E1 = make_E(1)
        E2E1_in = [E1.apply(X) for X in probes]
        for tau in (0.2, 0.7):
            G2 = gamma_family(2, tau)
            for Y in E2E1_in:
                assert abs(np.trace(G2.apply(Y)) - np.trace(Y)) < 1e-12
        from qmarkov.superops import compose
        stack = compose(make_E(2), E1)
        for tau in (0.2, 0.7):
            G3 = gamma_family(3, tau)
            for X in probes:
                Y = stack.apply(X)
                assert abs(np.trace(G3.apply(Y)) - np.trace(Y)) < 1e-12

    def test_tau_out_of_range(self):
        with pytest.raises(OperandError):
            gamma_family(2, 1.5)


class TestLambdaFamily:
    def test_identity_at_zero(self):
        assert np.allclose(lambda_t(0.0).matrix, np.eye(9))

    def test_segment_end_closed_forms(self):
        # entrywise via matrix-unit probes against the three dephasing stages
        for i in range(3):
            for j in range(3):
                X = unit(i, j)
                out1 = lambda_t(1.0).apply(X)
                exp1 = X if i == j else np.zeros((3, 3))
                assert np.max(np.abs(out1 - exp1)) < 1e-12
                out2 = lambda_t(2.0).apply(X)
                exp2 = np.diag([X[0, 0], X[1, 1] + X[2, 2], 0.0])
                assert np.max(np.abs(out2 - exp2)) < 1e-12
                out3 = lambda_t(3.0).apply(X)
                exp3 = np.diag([X[0, 0], X[1, 1] + X[2, 2],
                                X[0, 0] + X[1, 1] + X[2, 2]]) / 2
                assert np.max(np.abs(out3 - exp3)) < 1e-12

    def test_final_time_pure_targets(self):
        theta = 1.5
        ket = rotated_ket(theta)
        out1 = lambda_t(4.0).apply(unit(0, 0))
        out2 = lambda_t(4.0).apply(unit(1, 1))
        assert np.max(np.abs(out1 - np.diag([1.0, 0.0, 0.0]))) < 1e-12
        assert np.max(np.abs(out2 - np.outer(ket, ket.conj()))) < 1e-12

    def test_domain(self):
        with pytest.raises(OperandError):
            lambda_t(-0.1)
        with pytest.raises(OperandError):
            lambda_t(4.1)

    def test_cp_tp_on_grid(self):
        from qmarkov.superops import choi_min_eigenvalue
        probes = random_probes(3, 20, SEED).probes
        for t in np.linspace(0.0, 4.0, 41):
            S = lambda_t(t)
            assert choi_min_eigenvalue(S) >= -1e-10
            for X in probes[:5]:
                assert abs(np.trace(S.apply(X)) - np.trace(X)) <= 1e-10

    def test_segment2_norm_formula(self):
        # ||Lambda_t X||_1 = |x11| + |x22 + (1 - e^-f1) x33| + e^-f1 |x33|
        params = MapParams()
        rng = np.random.default_rng(SEED)
        for _ in range(10):
            x11, x22, x33 = rng.standard_normal(3)
            X = np.diag([x11, x22, x33])
            for t in (1.0, 1.3, 1.8):
                w = math.exp(-params.f1_spec.f(t - 1.0))
                expected = abs(x11) + abs(x22 + (1 - w) * x33) + w * abs(x33)
                assert trace_norm(lambda_t(t, params).apply(X)) == pytest.approx(
                    expected, abs=1e-10)


class TestContinuity:
    def test_gaps_shrink(self):
        report = continuity_report()
        for entry in report.values():
            gaps = entry["gap"]
            assert gaps[0] > gaps[1] > gaps[2]
            assert gaps[2] < 1e-3

    def test_t3_junction_despite_nontrivial_gamma4(self):
        # Gamma4_0 != identity, but Gamma4_0 E3 = E3 keeps the junction closed
        from qmarkov.superops import compose
        g0 = gamma_family(4, 0.0)
        assert not np.allclose(g0.matrix, np.eye(9))
        stack = compose(make_E(3), compose(make_E(2), make_E(1)))
        assert np.allclose(compose(g0, stack).matrix, stack.matrix, atol=1e-14)

    def test_smooth_variant_derivative_gaps_shrink(self):
        report = continuity_report(MapParams(theta=1.55, delta=1.05),
                                   derivative=True)
        for entry in report.values():
            dgaps = entry["derivative_gap"]
            assert dgaps[0] > dgaps[1] > dgaps[2]

    def test_epsilon_validation(self):
        with pytest.raises(OperandError):
            continuity_report(eps_ladder=(0.9,))


def test_family_callable_binds_params():
    params = MapParams(theta=1.45)
    fam = family(params)
    assert np.allclose(fam(4.0).matrix, lambda_t(4.0, params).matrix)
