"""Lie微分・ソリトン残差・解かれた解とポテンシャルのテスト"""

import math

import numpy as np
import pytest

from geometry import parse_mass_spec, vaidya_metric
from jet import PHI, R, THETA, U, Point4, const_field, evaluate, jet_coord
from lsq_fit import SampleGrid
from soliton import (
    PDE_EQUATIONS,
    RADIAL_SCALES,
    FlowType,
    PotentialConvention,
    PotentialSpec,
    SeparationFamily,
    SolitonParams,
    SolvedSolution,
    VectorField4,
    advection_from_values,
    advection_term_11,
    classify,
    closed_form_gradient,
    correspondence_factors,
    gamma_forcing_residual,
    lie_derivative,
    lie_derivative_from_jets,
    lie_transcription_gaps,
    lie_vaidya_transcribed,
    metric_gradient,
    pde_system_residuals,
    potential_field,
    random_vector_field,
    separation_family_fields,
    separation_pde_residual,
    separation_sum_fields,
    soliton_residual,
    solved_vector_field,
    transcribed_from_jets,
    verify_gradient_soliton,
)
from utils import ExistenceViolationError, InvalidInputError, SingularEvaluationError

OFF_DIAGONAL_AGREEMENT = [c for c in zip(*np.triu_indices(4)) if c not in ((0, 0), (3, 3))]


@pytest.fixture
def grid_4x4():
    """各座標4点ずつのグリッド"""
    return SampleGrid.from_ranges({
        "u": (0.0, 2.0, 4),
        "r": (1.0, 4.0, 4),
        "theta": (math.pi / 4, 3 * math.pi / 4, 4),
        "phi": (0.0, 3 * math.pi / 2, 4),
    }).points()


class TestLieDerivative:
    """一般公式のLie微分と転記版の成分"""

    def test_time_translation_with_linear_mass(self):
        g = vaidya_metric(parse_mass_spec("linear:1,0"))
        p = Point4(1.0, 2.0, math.pi / 2, 0.0)
        L = lie_derivative(g, VectorField4.single(U, const_field(1.0)), p)
        expected = np.zeros((4, 4))
        expected[U, U] = 1.0
        np.testing.assert_allclose(L, expected, atol=1e-14)

    def test_time_translation_is_killing_for_constant_mass(self, point):
        g = vaidya_metric(parse_mass_spec("const:1"))
        L = lie_derivative(g, VectorField4.single(U, const_field(1.0)), point)
        assert np.all(L == 0.0)

    def test_radial_field_transcribed(self):
        p = Point4(0.0, 2.0, math.pi / 3, 0.0)
        X = VectorField4.single(R, lambda q: jet_coord(R, q))
        m = parse_mass_spec("zero")
        assert lie_vaidya_transcribed(X, m, p)[THETA, THETA] == pytest.approx(8.0)
        assert lie_derivative(vaidya_metric(m), X, p)[THETA, THETA] == pytest.approx(8.0)

    def test_symmetric(self, mass, point, random_fields):
        g = vaidya_metric(mass)
        for X in random_fields:
            L = lie_derivative(g, X, point)
            np.testing.assert_array_equal(L, L.T)

    def test_transcription_gaps(self, mass, point, random_fields):
        r, s = point.r, math.sin(point.theta)
        for X in random_fields:
            gap = lie_transcription_gaps(X, mass, point)
            B = evaluate(X.B, point)
            D = evaluate(X.D, point)
            for c in OFF_DIAGONAL_AGREEMENT:
                assert gap[c] == pytest.approx(0.0, abs=1e-9)
            assert gap[U, U] - advection_term_11(X, mass, point) == pytest.approx(-B.grad[U], abs=1e-9)
            assert gap[PHI, PHI] == pytest.approx(2.0 * (r ** 2 * s ** 2 - r) * D.grad[PHI], abs=1e-9)

    def test_linearity(self, mass, point, random_fields):
        g = vaidya_metric(mass)
        X, Y = random_fields[:2]
        combined = lie_derivative(g, X.scaled(0.7) + Y.scaled(-1.3), point)
        expected = 0.7 * lie_derivative(g, X, point) - 1.3 * lie_derivative(g, Y, point)
        np.testing.assert_allclose(combined, expected, atol=1e-9)

    def test_zero_field(self, mass, point):
        assert np.all(lie_derivative(vaidya_metric(mass), VectorField4.zero(), point) == 0.0)

    def test_precomputed_components(self, mass, point, random_fields):
        sample = vaidya_metric(mass).sample(point)
        for X in random_fields:
            jets = X.jets(point)
            np.testing.assert_array_equal(lie_derivative_from_jets(sample, jets), lie_derivative(vaidya_metric(mass), X, point))
            np.testing.assert_array_equal(transcribed_from_jets(jets, mass, point), lie_vaidya_transcribed(X, mass, point))
            assert advection_from_values(jets[U].value, jets[R].value, mass, point) == advection_term_11(X, mass, point)


class TestSolitonParams:
    """κ = 2β - (p + 1/2)."""

    def test_kappa_is_exact(self):
        assert SolitonParams(1.25).kappa == 2.0
        assert SolitonParams(1.25, 2.0).kappa == 0.0

    def test_from_kappa(self):
        params = SolitonParams.from_kappa(2.0)
        assert params.beta == 1.25
        assert params.kappa == 2.0

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            SolitonParams(math.nan)
        with pytest.raises(InvalidInputError):
            SolitonParams(1.0, n=3)


class TestSolvedSolution:
    """質量0の背景での解かれたベクトル場"""

    def test_field_values(self, point):
        X = solved_vector_field(SolvedSolution(2.0, 0.5, 0.25))
        values = [jet.value for jet in X.jets(point)]
        assert values == pytest.approx([point.u + 0.5, point.r, 0.0, 0.25])

    def test_residual_vanishes(self, rng, grid_4x4):
        g = vaidya_metric(parse_mass_spec("zero"))
        for _ in range(20):
            beta, p, Psi, psi3 = rng.uniform(-2.0, 2.0, 4)
            params = SolitonParams(beta, p)
            X = solved_vector_field(SolvedSolution(params.kappa, Psi, psi3))
            worst = max(np.max(np.abs(soliton_residual(g, X, params, q))) for q in grid_4x4)
            assert worst < 1e-10

    @pytest.mark.parametrize("kappa", [-2.0, -0.5, 0.5, 3.0])
    def test_constant_mass_breaks_solution(self, kappa, point):
        params = SolitonParams.from_kappa(kappa)
        X = solved_vector_field(SolvedSolution(kappa))
        E = soliton_residual(vaidya_metric(parse_mass_spec("const:1")), X, params, point)
        assert E[U, U] == pytest.approx(-kappa / point.r, abs=1e-12)
        assert np.max(np.abs(E)) >= abs(kappa) / point.r - 1e-12

    def test_pde_system_vanishes(self, point):
        X = solved_vector_field(SolvedSolution(1.5, -0.3, 0.7))
        residuals = pde_system_residuals(X, parse_mass_spec("zero"), 1.5, point)
        assert residuals.shape == (10,)
        np.testing.assert_allclose(residuals, 0.0, atol=1e-12)

    def test_pde_first_equation_with_mass(self, point):
        X = solved_vector_field(SolvedSolution(2.0))
        residuals = pde_system_residuals(X, parse_mass_spec("const:1"), 2.0, point)
        assert residuals[0] == pytest.approx(-1.0 / point.r)


class TestCorrespondence:
    """各方程式と対応する残差成分の比"""

    EXPECTED = {"eq1": 0.5, "eq2": -0.5, "eq3": 0.5, "eq5": 1.0, "eq6": 1.0,
                "eq7": 1.0, "eq8": 1.0, "eq9": 1.0, "eq10": 1.0}

    def test_factors(self, small_grid, random_fields):
        entries = correspondence_factors(
            random_fields[0], parse_mass_spec("sinoff:1,2"), SolitonParams(1.25), small_grid.points(),
        )
        assert [entry.equation for entry in entries] == [name for name, _ in PDE_EQUATIONS]
        by_name = {entry.equation: entry for entry in entries}
        for name, factor in self.EXPECTED.items():
            assert by_name[name].constant, name
            assert by_name[name].factor == pytest.approx(factor, abs=1e-9)

    def test_phi_phi_ratio_depends_on_r(self, small_grid, random_fields):
        entries = correspondence_factors(
            random_fields[0], parse_mass_spec("sinoff:1,2"), SolitonParams(1.25), small_grid.points(),
        )
        eq4 = next(entry for entry in entries if entry.equation == "eq4")
        assert eq4.component == (PHI, PHI)
        assert not eq4.constant
        assert eq4.factor is None
        assert eq4.fit_residual > 1e-6

    @pytest.mark.parametrize("radii", [(1.0, 4.0, 3), (2.0, 2.0, 1)], ids=["varying-r", "single-r"])
    def test_phi_phi_scaled_by_radius(self, random_fields, radii):
        grid = SampleGrid.from_ranges({
            "u": (0.0, 2.0, 2),
            "r": radii,
            "theta": (math.pi / 4, 3 * math.pi / 4, 2),
            "phi": (0.0, 3 * math.pi / 2, 2),
        })
        entries = correspondence_factors(
            random_fields[0], parse_mass_spec("sinoff:1,2"), SolitonParams(1.25), grid.points(), scales=RADIAL_SCALES,
        )
        assert len(entries) == len(PDE_EQUATIONS) + 1
        scaled = entries[-1]
        assert (scaled.equation, scaled.scale, scaled.component) == ("eq4", "1/(2r)", (PHI, PHI))
        assert scaled.constant
        assert scaled.factor == pytest.approx(1.0, abs=1e-9)

    def test_single_radius_ratio_looks_constant(self, random_fields):
        grid = SampleGrid.from_ranges({
            "u": (0.0, 2.0, 2), "r": (2.0, 2.0, 1), "theta": (0.5, 1.0, 2), "phi": (0.0, 1.0, 2),
        })
        entries = correspondence_factors(random_fields[0], parse_mass_spec("sinoff:1,2"), SolitonParams(1.25), grid.points())
        eq4 = next(entry for entry in entries if entry.equation == "eq4")
        assert eq4.constant
        assert eq4.factor == pytest.approx(0.25, abs=1e-9)

    def test_empty_grid(self, random_fields):
        with pytest.raises(InvalidInputError):
            correspondence_factors(random_fields[0], parse_mass_spec("zero"), SolitonParams(1.0), [])


class TestSeparationFamily:
    """Q = Φ(φ)Θ(θ) の変数分離による C, D"""

    @pytest.mark.parametrize("gamma,psi1,psi2", [(0.5, 1.0, 0.0), (1.0, 1.0, -0.5), (2.0, 0.3, 0.7)])
    def test_pde_satisfied(self, gamma, psi1, psi2):
        fam = SeparationFamily(gamma, psi1, psi2)
        for theta in (math.pi / 8, math.pi / 6, math.pi / 3):
            for phi in (0.0, 0.5, 1.0):
                assert separation_pde_residual(fam, Point4(0.0, 1.0, theta, phi)) == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("gamma", [0.0, 1.0, 4.0])
    def test_pde_at_random_points(self, rng, gamma):
        for _ in range(20):
            fam = SeparationFamily(gamma, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
            p = Point4(rng.uniform(0.0, 2.0), rng.uniform(1.0, 3.0), rng.uniform(0.1, 1.2), rng.uniform(-1.0, 1.0))
            assert abs(separation_pde_residual(fam, p)) < 1e-10

    def test_gamma_zero_is_constant(self, point):
        C, D = separation_family_fields(SeparationFamily(0.0, 1.5, 0.5))
        assert evaluate(C, point).value == 0.0
        assert evaluate(D, point).value == 2.0
        assert separation_pde_residual(SeparationFamily(0.0), point) == 0.0

    def test_outside_band(self):
        _, D = separation_family_fields(SeparationFamily(1.0))
        with pytest.raises(SingularEvaluationError):
            evaluate(D, Point4(0.0, 1.0, math.pi / 2 - 1e-4, 0.0))
        with pytest.raises(SingularEvaluationError):
            evaluate(D, Point4(0.0, 1.0, 2.0, 0.0))

    def test_negative_gamma(self):
        with pytest.raises(InvalidInputError):
            SeparationFamily(-1.0)

    def test_forcing(self):
        p = Point4(0.0, 1.0, math.pi / 4, 0.0)
        assert gamma_forcing_residual(SeparationFamily(1.0, 1.0, 0.0), 2.0, p) == pytest.approx(-4.0)
        assert gamma_forcing_residual(SeparationFamily(0.0), 2.0, p) == 0.0
        assert gamma_forcing_residual(SeparationFamily(1.0, 0.0, 0.0), 2.0, p) == 0.0

    def test_sum_is_additive(self):
        p = Point4(0.0, 1.0, math.pi / 6, 0.4)
        families = [SeparationFamily(1.0), SeparationFamily(4.0, 0.5, 0.5)]
        _, D = separation_sum_fields(families)
        expected = sum(evaluate(separation_family_fields(fam)[1], p).value for fam in families)
        assert evaluate(D, p).value == pytest.approx(expected)


class TestPotential:
    """質量0の背景で X = ∇f となるスカラーポテンシャル f"""

    def test_gradient_matches_closed_form(self, mass, point):
        f = potential_field(PotentialSpec(1.5, 0.2, 0.1))
        g = vaidya_metric(mass)
        np.testing.assert_allclose(metric_gradient(g, f, point), closed_form_gradient(mass, f, point), atol=1e-12)

    def test_radial_gradient(self):
        p = Point4(1.0, 2.0, math.pi / 3, 0.0)
        f = lambda q: jet_coord(R, q)
        # ∇r = g^{rj}: (-1, 1 - 2m/r, 0, 0)
        np.testing.assert_allclose(
            metric_gradient(vaidya_metric(parse_mass_spec("const:0.5")), f, p), [-1.0, 0.5, 0.0, 0.0], atol=1e-14,
        )

    def test_consistent_convention(self, grid_4x4):
        report = verify_gradient_soliton(PotentialSpec(2.0, 0.3, 1.0), SolvedSolution(2.0, 0.3), grid_4x4)
        assert report.convention is PotentialConvention.G2_CONSISTENT
        assert report.max < 1e-10

    def test_printed_convention_deviates_in_r(self, grid_4x4):
        kappa = 2.0
        spec = PotentialSpec(kappa, 0.3, convention=PotentialConvention.AS_PRINTED_R5)
        report = verify_gradient_soliton(spec, SolvedSolution(kappa, 0.3), grid_4x4)
        us = np.array([p.u for p in report.points])
        np.testing.assert_allclose(report.deviations[:, 1], np.abs(kappa * us), atol=1e-10)
        assert report.max_by_component[0] < 1e-10
        _, component, value = report.worst()
        assert component == 1
        assert value == pytest.approx(kappa * 2.0)

    def test_conventions_agree_without_kappa(self, grid_4x4):
        for convention in PotentialConvention:
            report = verify_gradient_soliton(PotentialSpec(0.0, 0.7, convention=convention), SolvedSolution(0.0, 0.7), grid_4x4)
            assert report.max < 1e-12

    def test_rotation_has_no_potential(self, grid_4x4):
        with pytest.raises(ExistenceViolationError):
            verify_gradient_soliton(PotentialSpec(1.0), SolvedSolution(1.0, 0.0, 1.0), grid_4x4)

    def test_empty_grid(self):
        with pytest.raises(InvalidInputError):
            verify_gradient_soliton(PotentialSpec(1.0), SolvedSolution(1.0), [])

    def test_flags(self):
        assert PotentialConvention.from_flag("r5") is PotentialConvention.AS_PRINTED_R5
        assert PotentialConvention.from_flag("g2").flag == "g2"
        with pytest.raises(InvalidInputError):
            PotentialConvention.from_flag("g3")


class TestClassify:
    """β の符号によるフローの分類"""

    @pytest.mark.parametrize("beta,expected", [
        (1.25, FlowType.EXPANDING),
        (0.0, FlowType.STEADY),
        (-0.0, FlowType.STEADY),
        (-0.3, FlowType.SHRINKING),
        (1e-300, FlowType.EXPANDING),
    ])
    def test_classify(self, beta, expected):
        assert classify(beta) is expected

    def test_scale_invariant(self):
        for beta in (-1.0, -0.3, 0.5, 2.0):
            assert classify(beta) is classify(7.5 * beta)

    def test_non_finite(self):
        with pytest.raises(InvalidInputError):
            classify(math.inf)


class TestRandomFields:
    """乱数ベクトル場の再現性"""

    def test_seeded(self, point):
        a = random_vector_field(np.random.default_rng(7))
        b = random_vector_field(np.random.default_rng(7))
        assert [jet.value for jet in a.jets(point)] == [jet.value for jet in b.jets(point)]
