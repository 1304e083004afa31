import numpy as np
import pytest

from crnf.series import HoloSeries, MixedSeries
from crnf.hypersurfaces import Hypersurface, model_D, sphere
from crnf.maps import FormalMap, apply_map
from crnf.normal_space import is_in_normal_space, project_normal
from crnf.full_nf import (
    NormalFormError,
    NormalizationP,
    check_G0,
    detect_model,
    factor_map,
    model_phi,
    normal_form,
    solve_L,
    validate_P,
)
from conftest import perturbed_model, random_real_perturbation


class TestValidateP:
    def test_identity_is_valid(self):
        P = NormalizationP.identity(3)
        assert validate_P(P, 2, np.diag([1.0, 0.5]))

    def test_unitary_orthogonal_linear_part(self):
        P = NormalizationP.identity(3)
        P.A = np.diag([-1.0, 1.0]).astype(complex)  # unitary and preserves R
        P.B = np.array([0.3 + 1j, -2.0])
        assert validate_P(P, 2, np.diag([1.0, 0.5]))

    def test_scaling_violation_rejected(self):
        P = NormalizationP.identity(3)
        P.A = 2.0 * np.eye(2, dtype=complex)
        assert not validate_P(P, 2, np.diag([1.0, 0.5]))

    def test_zero_c_rejected(self):
        P = NormalizationP.identity(2)
        P.c = 0.0
        assert not validate_P(P, 1, np.diag([1.0]))

    def test_lambda_zero_allows_dilation(self):
        P = NormalizationP.identity(2)
        P.c = 4.0
        P.A = 2.0 * np.eye(1, dtype=complex)
        assert validate_P(P, 1, np.diag([0.0]))

    def test_json_round_trip(self):
        P = NormalizationP.identity(3)
        P.B = np.array([1j, 0.5])
        P.d2 = P.d2 + 0.25
        Q = NormalizationP.from_json_dict(P.to_json_dict())
        assert Q.n == P.n and np.allclose(Q.B, P.B) and np.allclose(Q.d2, P.d2)


class TestCheckG0:
    def test_identity(self):
        assert check_G0(FormalMap.identity(2, 8))

    def test_cubic_constant_rejected(self):
        n, T = 2, 8
        I = FormalMap.identity(n, T)
        Tm = FormalMap(
            [I.fs[0] + HoloSeries.monomial(n, T, (3, 0), 0, 0.1), I.fs[1]], I.g
        )
        assert not check_G0(Tm)

    def test_quadratic_fn_constant_rejected(self):
        n, T = 2, 8
        I = FormalMap.identity(n, T)
        Tm = FormalMap(
            [I.fs[0], I.fs[1] + HoloSeries.monomial(n, T, (2, 0), 0, 0.1)], I.g
        )
        assert not check_G0(Tm)

    def test_real_diagonal_zw_rejected_imag_allowed(self):
        n, T = 2, 8
        I = FormalMap.identity(n, T)
        bad = FormalMap(
            [I.fs[0] + HoloSeries.monomial(n, T, (1, 0), 1, 0.1), I.fs[1]], I.g
        )
        good = FormalMap(
            [I.fs[0] + HoloSeries.monomial(n, T, (1, 0), 1, 0.1j), I.fs[1]], I.g
        )
        assert not check_G0(bad)
        assert check_G0(good)


class TestDetectModel:
    def test_model_detected(self):
        r, R = detect_model(model_D(3, 8, (1.0, 0.5)))
        assert r == 2
        assert np.max(np.abs(R - np.diag([1.0, 0.5]))) < 1e-12

    def test_sphere_rejected(self):
        with pytest.raises(ValueError):
            detect_model(sphere(2, 8))

    def test_missing_cubic_rejected(self):
        n, T = 2, 8
        from crnf.hypersurfaces import hermitian_quadric

        M = Hypersurface(hermitian_quadric(n, T, r=1, s=0))
        with pytest.raises(ValueError):
            detect_model(M)


class TestSolveL:
    def test_pure_type_forces_g(self):
        """For a purely (k,0) + (0,k) input with k >= 3 the only
        contribution is from Re(i g), so g_k = -2i F_{k0} exactly.
        (For k = 2 the conjugate of the p_R f^n term also lands in type
        (2,0), so the identity holds only in the k >= 3 branch.)"""
        n = 2
        for a, m in [((3, 1), 0), ((2, 1), 1)]:
            c = 0.7 - 0.2j
            F = (
                MixedSeries.monomial(n, 8, a, (0,) * n, m, c)
                + MixedSeries.monomial(n, 8, (0,) * n, a, m, np.conj(c))
            )
            sol = solve_L(F, 1, np.diag([1.0]))
            assert abs(sol.g.coeff(a, m) - (-2j * c)) < 1e-9
            assert sol.N.norm() < 1e-9

    def test_weighted_homogeneity_required(self):
        n = 2
        F = (
            MixedSeries.monomial(n, 8, (2, 2), (0, 0), 0, 1.0).realified()
            + MixedSeries.monomial(n, 8, (3, 2), (0, 0), 0, 1.0).realified()
        )
        with pytest.raises(ValueError):
            solve_L(F, 1, np.diag([1.0]))

    def test_reality_required(self):
        n = 2
        F = MixedSeries.monomial(n, 8, (2, 2), (0, 0), 0, 1.0)
        with pytest.raises(ValueError):
            solve_L(F, 1, np.diag([1.0]))

    @pytest.mark.parametrize(
        "n,lam", [(2, (0.0,)), (2, (1.0,)), (3, (1.0, 0.5))]
    )
    def test_solution_solves_the_equation(self, n, lam, rng):
        """Applying the solved map must leave exactly the remainder N at
        that degree."""
        trunc = 8
        R = np.diag(lam)
        M0 = model_D(n, trunc, lam)
        for nu in (4, 5):
            F = random_real_perturbation(
                n, trunc, rng, nterms=40, min_deg=nu
            ).weighted_component(nu)
            if F.norm() == 0:
                continue
            sol = solve_L(F, n - 1, R)
            assert sol.sigma_min > 1e-8 * sol.sigma_max
            assert sol.residual < 1e-9 * max(1.0, F.norm())
            M = Hypersurface(M0.phi + F)
            out = apply_map(M, sol.to_map(trunc))
            D = (out.phi - M0.phi).weighted_component(nu)
            assert (D - sol.N).norm() < 1e-9 * max(1.0, F.norm())
            assert is_in_normal_space(sol.N, n - 1, R)


class TestNormalForm:
    def test_model_is_fixed(self):
        M = model_D(2, 8, (1.0,))
        res = normal_form(M)
        assert res.N.norm() < 1e-12
        assert res.T.distance(FormalMap.identity(2, 8)) < 1e-12

    def test_already_normal_is_fixed(self):
        n, trunc = 2, 8
        lam = (1.0,)
        M = perturbed_model(n, trunc, lam, seed=3)
        res = normal_form(M)
        res2 = normal_form(res.M_out)
        assert res2.T.distance(FormalMap.identity(n, trunc)) < 1e-9
        assert (res2.N - res.N).norm() < 1e-9

    @pytest.mark.parametrize("n,lam", [(2, (0.0,)), (2, (1.0,)), (3, (1.0, 0.5))])
    def test_output_properties(self, n, lam):
        trunc = 8
        M = perturbed_model(n, trunc, lam, seed=7)
        res = normal_form(M)
        assert is_in_normal_space(res.N, res.r, res.R)
        assert check_G0(res.T)
        assert (apply_map(M, res.T).phi - res.M_out.phi).norm() < 1e-9
        assert (
            res.M_out.phi - model_phi(n, trunc, res.r, res.R) - res.N
        ).norm() < 1e-9
        for d in res.diagnostics:
            assert d["residual"] < 1e-8
            assert d["sigma_min"] > 0

    def test_deterministic(self):
        M = perturbed_model(2, 8, (1.0,), seed=9)
        r1, r2 = normal_form(M), normal_form(M)
        assert (r1.N - r2.N).norm() == 0.0
        assert r1.T.distance(r2.T) == 0.0

    def test_invalid_P_rejected(self):
        M = model_D(2, 8, (1.0,))
        P = NormalizationP.identity(2)
        P.A = 3.0 * np.eye(1, dtype=complex)
        with pytest.raises(ValueError):
            normal_form(M, P)

    def test_degree_bounds(self):
        M = model_D(2, 8, (1.0,))
        with pytest.raises(ValueError):
            normal_form(M, degree=9)
        with pytest.raises(ValueError):
            normal_form(M, degree=3)

    def test_json_shape(self):
        res = normal_form(perturbed_model(2, 8, (1.0,), seed=4), degree=5)
        d = res.to_json_dict()
        assert set(d) == {"N", "T", "diagnostics"}
        rows = d["diagnostics"]["per_degree"]
        assert [row["nu"] for row in rows] == [4, 5]
        assert all(
            set(row) == {"nu", "dim", "sigma_min", "residual"} for row in rows
        )


class TestFactorMap:
    def test_round_trip(self):
        n, trunc = 2, 8
        lam = (1.0,)
        P = NormalizationP.identity(n)
        P.B = np.array([0.2 - 0.1j])
        P.a3 = 0.1 * np.arange(P.a3.size).reshape(P.a3.shape) * (1 + 1j)
        P.cdiag = np.array([0.3])
        P.d2 = np.array([0.1j, 0.0, -0.2])
        assert validate_P(P, n - 1, np.diag(lam))
        I = FormalMap.identity(n, trunc)
        Tg = FormalMap(
            [I.fs[0] + HoloSeries.monomial(n, trunc, (2, 0), 1, 0.05j), I.fs[1]],
            I.g + HoloSeries.monomial(n, trunc, (4, 0), 0, 0.02),
        )
        assert check_G0(Tg)
        Phi = Tg.compose(P.to_map(trunc))
        T2, P2 = factor_map(Phi)
        assert check_G0(T2)
        assert abs(P2.c - P.c) < 1e-10
        assert np.max(np.abs(P2.A - P.A)) < 1e-10
        assert np.max(np.abs(P2.B - P.B)) < 1e-10
        assert np.max(np.abs(P2.a3 - P.a3)) < 1e-10
        assert np.max(np.abs(P2.cdiag - P.cdiag)) < 1e-10
        assert np.max(np.abs(P2.d2 - P.d2)) < 1e-10
        recomposed = T2.compose(P2.to_map(trunc))
        assert recomposed.distance(Phi) < 1e-9
