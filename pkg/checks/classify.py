"""
フロー分類検査

β の符号でフローを分類し、正の定数倍で分類が変わらないことを確かめます。
"""

import logging

from config import CLASSIFY_SAMPLE_BETAS
from models import CheckResult, RunConfig
from soliton import classify

logger = logging.getLogger(__name__)

SCALES = (1e-3, 0.5, 2.0, 1e3)


class ClassifyChecks:
    """β による分類"""

    name = "classify"

    def __init__(self, config: RunConfig):
        self.config = config

    def run(self) -> list[CheckResult]:
        betas = (self.config.beta,) if self.config.beta is not None else CLASSIFY_SAMPLE_BETAS
        results = []
        for beta in betas:
            flow = classify(beta)
            invariant = all(classify(c * beta) is flow for c in SCALES)
            results.append(CheckResult(
                name=f"classify[beta={beta:g}]",
                max=0.0,
                rms=0.0,
                verdict="pass" if invariant else "fail",
                detail={"beta": beta, "flow": flow.value, "scale_invariant": invariant},
            ))
            logger.info("[CLASSIFY] β = %g → %s", beta, flow.value)
        return results


def setup(config: RunConfig) -> ClassifyChecks:
    return ClassifyChecks(config)
