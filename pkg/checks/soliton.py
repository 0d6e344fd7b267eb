"""
ソリトン検査

解かれた解のベクトル場についてソリトン残差と10本の方程式の残差を評価します。
m ≠ 0 では解にならないため、その質量関数を指定すると fail になります。
"""

import logging

from geometry import vaidya_metric
from lsq_fit import UPPER_INDICES
from models import CheckResult, RunConfig
from report import aggregate_check
from soliton import PDE_EQUATIONS, SolvedSolution, pde_system_residuals, soliton_residual, solved_vector_field

logger = logging.getLogger(__name__)


class SolitonChecks:
    """解かれた解の検査群"""

    name = "soliton"

    def __init__(self, config: RunConfig):
        self.config = config
        self.tolerances = config.tolerances

    def run(self) -> list[CheckResult]:
        params = self.config.soliton_params()
        solution = SolvedSolution(params.kappa, self.config.capital_psi, self.config.psi3)
        X = solved_vector_field(solution)
        points = self.config.sample_grid().points()
        logger.info(
            "[SOLITON] κ = %.6g, Ψ = %.6g, ψ₃ = %.6g, α = %.6g",
            params.kappa, solution.Psi, solution.psi3, params.alpha,
        )

        results = []
        for m in self.config.mass_functions(("zero",)):
            g = vaidya_metric(m)
            residual, pde = [], []
            for p in points:
                E = soliton_residual(g, X, params, p)
                residual.extend((p, c, E[c]) for c in UPPER_INDICES)
                values = pde_system_residuals(X, m, params.kappa, p)
                pde.extend((p, name, value) for (name, _), value in zip(PDE_EQUATIONS, values))
            detail = {"kappa": params.kappa, "mass": m.spec}
            results.append(aggregate_check(f"soliton_residual[{m.spec}]", residual, self.tolerances["soliton"], detail=detail))
            results.append(aggregate_check(f"pde_system[{m.spec}]", pde, self.tolerances["pde"], detail=detail))

        for result in results:
            mark = "✓" if result.verdict == "pass" else "✗"
            logger.info("[SOLITON] %s %s (max %.3e)", mark, result.name, result.max)
        return results


def setup(config: RunConfig) -> SolitonChecks:
    return SolitonChecks(config)
