"""
スカラーポテンシャル検査

m = 0 で ∇f と解かれた解のベクトル場を2つのポテンシャルの書き方で比べます。
選んだ書き方は pass/fail、もう一方は finding として残します。
"""

import logging

from config import COORD_NAMES, DEFAULT_MASSES, DIM
from geometry import vaidya_metric
from models import CheckResult, RunConfig
from report import aggregate_check, create_failure
from soliton import (
    PotentialConvention,
    PotentialSpec,
    SolvedSolution,
    closed_form_gradient,
    metric_gradient,
    potential_field,
    verify_gradient_soliton,
)
from utils import ExistenceViolationError

logger = logging.getLogger(__name__)


class PotentialChecks:
    """勾配ソリトンの検査群"""

    name = "potential"

    def __init__(self, config: RunConfig):
        self.config = config
        self.tolerances = config.tolerances

    def run(self) -> list[CheckResult]:
        params = self.config.soliton_params()
        selected = PotentialConvention.from_flag(self.config.convention)
        solution = SolvedSolution(params.kappa, self.config.capital_psi, self.config.psi3)
        points = self.config.sample_grid().points()

        results = []
        for convention in (PotentialConvention.G2_CONSISTENT, PotentialConvention.AS_PRINTED_R5):
            spec = PotentialSpec(params.kappa, self.config.capital_psi, self.config.capital_psi2, convention)
            try:
                deviation = verify_gradient_soliton(spec, solution, points)
            except ExistenceViolationError as e:
                logger.error("[SOLITON] ✗ %s", e)
                results.append(create_failure("potential_existence", str(e), {"psi3": solution.psi3}))
                break
            samples = [
                (p, COORD_NAMES[k], deviation.deviations[i, k])
                for i, p in enumerate(deviation.points)
                for k in range(DIM)
            ]
            results.append(aggregate_check(
                f"potential[{convention.value}]",
                samples,
                self.tolerances["potential"],
                finding=convention is not selected,
                detail={
                    "selected": convention is selected,
                    "max_by_component": dict(zip(COORD_NAMES, deviation.max_by_component)),
                },
            ))

        spec = PotentialSpec(params.kappa, self.config.capital_psi, self.config.capital_psi2, selected)
        f = potential_field(spec)
        for m in self.config.mass_functions(DEFAULT_MASSES):
            g = vaidya_metric(m)
            samples = []
            for p in points:
                gap = metric_gradient(g, f, p) - closed_form_gradient(m, f, p)
                samples.extend((p, COORD_NAMES[k], gap[k]) for k in range(DIM))
            results.append(aggregate_check(f"gradient_paths[{m.spec}]", samples, self.tolerances["gradient"]))

        for result in results:
            logger.info("[SOLITON] %s: %s (max %.3e)", result.name, result.verdict, result.max)
        return results


def setup(config: RunConfig) -> PotentialChecks:
    return PotentialChecks(config)
