"""
Lie微分検査

乱数で作ったベクトル場について一般公式と転記版の成分を比べ、
方程式系とソリトン残差の対応係数を当てはめます。
"""

import logging

import numpy as np

from config import (
    CORRESPONDENCE_MASS,
    DEFAULT_MASSES,
    LIE_SAMPLE_POINTS,
    RANDOM_FIELD_COUNT,
    RANDOM_SEED,
)
from geometry import parse_mass_spec, vaidya_metric
from jet import R, U, const_field
from lsq_fit import UPPER_INDICES
from models import CheckResult, RunConfig
from report import aggregate_check
from soliton import (
    RADIAL_SCALES,
    VectorField4,
    advection_from_values,
    correspondence_factors,
    lie_derivative_from_jets,
    lie_derivative_from_sample,
    random_vector_field,
    transcribed_from_jets,
)

logger = logging.getLogger(__name__)

# 方程式ごとの期待される係数（None は比が r に依存する組。換算後の係数は SCALED_FACTORS）
EXPECTED_FACTORS = {
    "eq1": 0.5,
    "eq2": -0.5,
    "eq3": 0.5,
    "eq4": None,
    "eq5": 1.0,
    "eq6": 1.0,
    "eq7": 1.0,
    "eq8": 1.0,
    "eq9": 1.0,
    "eq10": 1.0,
}
SCALED_FACTORS = {"eq4": 1.0}

# 一般公式と一致しない転記版の成分
GAP_COMPONENTS = ((0, 0), (3, 3))

# 線形性の検査に使う係数と、その対象にするベクトル場の数
LINEAR_COEFFICIENTS = (0.7, -1.3)
LINEARITY_FIELDS = 10


class LieChecks:
    """Lie微分の検査群"""

    name = "lie"

    def __init__(self, config: RunConfig):
        self.config = config
        self.tolerances = config.tolerances

    def run(self) -> list[CheckResult]:
        rng = np.random.default_rng(RANDOM_SEED)
        fields = [random_vector_field(rng) for _ in range(RANDOM_FIELD_COUNT)]
        points = self.config.sample_grid().points()
        count = min(LIE_SAMPLE_POINTS, len(points))
        samples = [sorted(rng.choice(len(points), size=count, replace=False)) for _ in fields]
        field_points = [[points[i] for i in idx] for idx in samples]

        # ベクトル場の成分は質量関数によらない
        field_jets = [[X.jets(p) for p in pts] for X, pts in zip(fields, field_points)]
        linear_jets = self._linearity_jets(fields, field_points)

        results = []
        for m in self.config.mass_functions(DEFAULT_MASSES):
            results.extend(self._check_mass(m, field_points, field_jets, linear_jets))
        results.extend(self._check_correspondence(fields[0], points))
        return results

    @staticmethod
    def _linearity_jets(fields, field_points) -> list[list[tuple]]:
        # 線形性の対象: 各点での (aX + bY, Y) の成分
        a, b = LINEAR_COEFFICIENTS
        table = []
        for index in range(min(LINEARITY_FIELDS, len(fields))):
            X = fields[index]
            Y = fields[(index + 1) % len(fields)]
            combined = X.scaled(a) + Y.scaled(b)
            table.append([(combined.jets(p), Y.jets(p)) for p in field_points[index]])
        return table

    def _check_mass(self, m, field_points, field_jets, linear_jets) -> list[CheckResult]:
        g = vaidya_metric(m)
        agree, advected, phi_phi, linear, killing = [], [], [], [], []
        a, b = LINEAR_COEFFICIENTS
        first_samples = []
        for index, (points, jets_at) in enumerate(zip(field_points, field_jets)):
            for k, (p, jets) in enumerate(zip(points, jets_at)):
                sample = g.sample(p)
                if index == 0:
                    first_samples.append(sample)
                generic = lie_derivative_from_jets(sample, jets)
                gap = generic - transcribed_from_jets(jets, m, p)
                agree.extend((p, c, gap[c]) for c in UPPER_INDICES if c not in GAP_COMPONENTS)
                advected.append((p, (0, 0), gap[0, 0] - advection_from_values(jets[U].value, jets[R].value, m, p)))
                phi_phi.append((p, (3, 3), gap[3, 3]))

                if index < len(linear_jets):
                    combined, other = linear_jets[index][k]
                    mixed = (
                        lie_derivative_from_jets(sample, combined)
                        - a * generic
                        - b * lie_derivative_from_jets(sample, other)
                    )
                    linear.extend((p, c, mixed[c]) for c in UPPER_INDICES)

        killing_field = VectorField4.single(U, const_field(1.0))
        for sample in first_samples:
            L = lie_derivative_from_sample(sample, killing_field)
            killing.extend((sample.point, c, L[c]) for c in UPPER_INDICES)

        tol = self.tolerances["lie"]
        label = m.spec
        results = [
            aggregate_check(f"lie_transcribed[{label}]", agree, tol),
            aggregate_check(
                f"lie_advection_11[{label}]", advected, tol, finding=True,
                detail={"note": "一般公式 - 転記版 - 移流項 = -∂uB"},
            ),
            aggregate_check(
                f"lie_phi_phi[{label}]", phi_phi, tol, finding=True,
                detail={"note": "一般公式 - 転記版 = 2(r² sin²θ - r)∂φD"},
            ),
            aggregate_check(f"lie_linearity[{label}]", linear, tol),
            self._killing_result(m, killing, field_points[0], tol),
        ]
        for result in results:
            logger.info("[LIE] %s: %s (max %.3e)", result.name, result.verdict, result.max)
        return results

    @staticmethod
    def _killing_result(m, samples, points, tol) -> CheckResult:
        # ∂u は m' = 0 のときだけKilling場
        expect_killing = all(m.evaluate(p.u)[1] == 0.0 for p in points)
        result = aggregate_check(f"killing_u[{m.spec}]", samples, tol)
        if not expect_killing:
            result.verdict = "pass" if result.max > tol else "fail"
        result.detail = {"expected_killing": expect_killing}
        return result

    def _check_correspondence(self, X, points) -> list[CheckResult]:
        m = parse_mass_spec(CORRESPONDENCE_MASS)
        params = self.config.soliton_params()
        tol = self.tolerances["correspondence"]
        results = []
        for entry in correspondence_factors(X, m, params, points, tol, scales=RADIAL_SCALES):
            if entry.scale is None:
                expected = EXPECTED_FACTORS[entry.equation]
                suffix = ""
            else:
                expected = SCALED_FACTORS[entry.equation]
                suffix = f"·{entry.scale}"
            if expected is None:
                # 比は r に依存する。判定は換算後の項目で行う
                verdict = "finding"
            else:
                verdict = "pass" if entry.constant and abs(entry.factor - expected) <= tol else "fail"
            i, j = entry.component
            results.append(CheckResult(
                name=f"correspondence[{entry.equation}~({i + 1},{j + 1}){suffix}]",
                max=entry.fit_residual,
                rms=entry.fit_residual,
                worst_component=f"({i + 1},{j + 1})",
                verdict=verdict,
                tolerance=tol,
                detail={"factor": entry.factor, "expected_factor": expected, "scale": entry.scale, "mass": m.spec},
            ))
            logger.info("[LIE] %s: %s (係数 %s)", results[-1].name, verdict, entry.factor)
        return results


def setup(config: RunConfig) -> LieChecks:
    return LieChecks(config)
