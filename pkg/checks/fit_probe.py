"""
最小二乗探索の検査

基底のプリセットごとに質量関数の残差フロアを測り、m = 0 の場合だけ
ソリトンが見つかることを確かめます。
"""

import logging

from config import BASIS_SV_MIN, DEFAULT_PROBE_MASSES
from lsq_fit import BASIS_PRESETS, basis_preset, check_basis_independence, nonexistence_probe, solved_pattern
from models import CheckResult, RunConfig
from utils import format_component

logger = logging.getLogger(__name__)


class FitProbeChecks:
    """非存在の探索"""

    name = "fit-probe"

    def __init__(self, config: RunConfig):
        self.config = config
        self.tolerances = config.tolerances

    def run(self) -> list[CheckResult]:
        params = self.config.soliton_params()
        grid = self.config.sample_grid()
        masses = self.config.mass_functions(DEFAULT_PROBE_MASSES)
        names = [self.config.basis] if self.config.basis else list(BASIS_PRESETS)
        tol = self.tolerances

        results = []
        for name in names:
            basis = basis_preset(name)
            smallest = check_basis_independence(basis, grid)
            results.append(CheckResult(
                name=f"basis_independence[{name}]",
                max=smallest,
                rms=smallest,
                verdict="pass" if smallest > BASIS_SV_MIN else "fail",
                tolerance=BASIS_SV_MIN,
                detail={"columns": basis.labels},
            ))

            probe = nonexistence_probe(masses, basis, grid, params, tol["fit_zero"], tol["fit_separation"])
            zero_floor = probe.zero_floor
            for result in probe.results:
                if result.mass in probe.zero_masses:
                    verdict = "pass" if result.residual_rms < tol["fit_zero"] else "fail"
                else:
                    verdict = "pass" if result.residual_rms > tol["fit_separation"] * zero_floor else "fail"
                results.append(CheckResult(
                    name=f"fit_floor[{name}][{result.mass}]",
                    max=result.residual_max,
                    rms=result.residual_rms,
                    worst_point=result.worst_point,
                    worst_component=format_component(*result.worst_component) if result.worst_component else None,
                    verdict=verdict,
                    detail=result.to_dict(),
                ))
                if result.mass in probe.zero_masses:
                    deviation = solved_pattern(result, params.kappa)
                    suffix = "" if result.mass == "zero" else f"[{result.mass}]"
                    results.append(CheckResult(
                        name=f"fit_pattern[{name}]{suffix}",
                        max=deviation,
                        rms=deviation,
                        verdict="pass" if deviation <= tol["fit_pattern"] else "finding",
                        tolerance=tol["fit_pattern"],
                        detail={"kappa": params.kappa, "coefficients": result.coefficients},
                    ))

            results.append(CheckResult(
                name=f"nonexistence_probe[{name}]",
                max=zero_floor,
                rms=zero_floor,
                verdict="pass" if probe.passed else "fail",
                tolerance=tol["fit_zero"],
                detail={
                    "floors": probe.floors(),
                    "fit_zero": probe.fit_zero,
                    "separation": probe.separation,
                    "grid": probe.grid_id,
                },
            ))
            mark = "✓" if probe.passed else "✗"
            logger.info("[FIT] %s 非存在の探索 (%s): フロア(zero) = %.3e", mark, name, zero_floor)
        return results


def setup(config: RunConfig) -> FitProbeChecks:
    return FitProbeChecks(config)
