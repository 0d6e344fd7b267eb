"""
曲率検査

Vaidya計量の数値曲率をRicciの閉形式、スカラー曲率0、Riemannの対称性、
逆計量の恒等式と照合します。Riemann成分表と転記版の逆計量は不一致を finding として残します。
"""

import logging
import math

import numpy as np

from config import DEFAULT_MASSES, DIM, FD_STEP
from geometry import (
    closed_form_inverse,
    closed_form_ricci,
    curvature_from_sample,
    inverse_from_sample,
    printed_inverse,
    riemann_oracle_from_bundle,
    vaidya_metric,
)
from jet import R, THETA, Point4
from lsq_fit import UPPER_INDICES
from models import CheckResult, RunConfig
from report import aggregate_check
from utils import InvalidInputError

logger = logging.getLogger(__name__)


class CurvatureChecks:
    """曲率の検査群"""

    name = "curvature"

    def __init__(self, config: RunConfig):
        self.config = config
        self.tolerances = config.tolerances

    def run(self) -> list[CheckResult]:
        grid = self.config.sample_grid()
        results = []
        for m in self.config.mass_functions(DEFAULT_MASSES):
            results.extend(self._check_mass(m, grid.points()))
        return results

    def _check_mass(self, m, points) -> list[CheckResult]:
        g = vaidya_metric(m)
        ricci, scalar, symmetry, identity, inverse, printed, oracle, fd = ([] for _ in range(8))
        signs = set()
        for p in points:
            sample = g.sample(p)
            inv = inverse_from_sample(sample)
            bundle = curvature_from_sample(sample, inv)

            ricci_gap = bundle.ricci - closed_form_ricci(m, p)
            identity_gap = sample.g @ inv.g - np.eye(DIM)
            inverse_gap = inv.g - closed_form_inverse(m, p)
            printed_gap = inv.g - printed_inverse(m, p)
            for component in UPPER_INDICES:
                ricci.append((p, component, ricci_gap[component]))
                identity.append((p, component, identity_gap[component]))
                inverse.append((p, component, inverse_gap[component]))
                printed.append((p, component, printed_gap[component]))
            scalar.append((p, "R", bundle.scalar))
            symmetry.extend((p, key, value) for key, value in bundle.symmetry_defects().items())

            report = riemann_oracle_from_bundle(m, bundle)
            signs.add(report.best_sign)
            oracle.extend((p, entry.label, entry.discrepancy(report.best_sign)) for entry in report.entries)

            fd.extend(self._christoffel_fd(g, p, bundle))

        tol = self.tolerances
        label = m.spec
        results = [
            aggregate_check(f"ricci_closed_form[{label}]", ricci, tol["curvature"]),
            aggregate_check(f"scalar_curvature[{label}]", scalar, tol["curvature"]),
            aggregate_check(f"riemann_symmetry[{label}]", symmetry, tol["curvature"]),
            aggregate_check(f"christoffel_fd[{label}]", fd, tol["fd"]),
            aggregate_check(f"inverse_metric[{label}]", identity, tol["inverse"]),
            aggregate_check(f"inverse_closed_form[{label}]", inverse, tol["inverse"]),
            aggregate_check(f"inverse_as_printed[{label}]", printed, tol["inverse"], finding=True),
            aggregate_check(
                f"riemann_oracle[{label}]", oracle, tol["curvature"], finding=True,
                detail={"best_signs": sorted(signs)},
            ),
        ]
        for result in results:
            logger.info("[CURVATURE] %s: %s (max %.3e)", result.name, result.verdict, result.max)
        return results

    @staticmethod
    def _christoffel_fd(g, p, bundle) -> list[tuple]:
        # ∂_k Γ を差分と比べる（誤差は max(1, |∂_k Γ|) で割った相対値）
        samples = []
        for k in range(DIM):
            h = _fd_step(p, k)
            direction = _stencil_direction(p, k, h)
            if direction == 0.0:
                plus = _christoffel_at(g, p.shifted(k, h))
                minus = _christoffel_at(g, p.shifted(k, -h))
                numeric = (plus - minus) / (2.0 * h)
            else:
                # 定義域の端では内側への2次精度の片側差分
                step = direction * h
                near = _christoffel_at(g, p.shifted(k, step))
                far = _christoffel_at(g, p.shifted(k, 2.0 * step))
                numeric = (-3.0 * bundle.christoffel + 4.0 * near - far) / (2.0 * step)
            exact = bundle.christoffel_grad[k]
            gap = np.abs(numeric - exact) / np.maximum(1.0, np.abs(exact))
            index = np.unravel_index(int(np.argmax(gap)), gap.shape)
            samples.append((p, f"∂{k + 1}Γ{tuple(int(i) + 1 for i in index)}", float(gap[index])))
        return samples


def _fd_step(p: Point4, k: int) -> float:
    # r = 0 と極に近いほど刻みを小さくする
    if k == R:
        return FD_STEP * min(1.0, p.r)
    if k == THETA:
        return FD_STEP * min(1.0, math.sin(p.theta))
    return FD_STEP


def _stencil_direction(p: Point4, k: int, h: float) -> float:
    """中心差分が使えれば 0、使えなければ定義域の内側の向き (±1)"""
    try:
        p.shifted(k, h)
    except InvalidInputError:
        return -1.0
    try:
        p.shifted(k, -h)
    except InvalidInputError:
        return 1.0
    return 0.0


def _christoffel_at(g, p: Point4) -> np.ndarray:
    return curvature_from_sample(g.sample(p)).christoffel


def setup(config: RunConfig) -> CurvatureChecks:
    return CurvatureChecks(config)
