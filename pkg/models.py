"""
データモデルモジュール

実行設定（RunConfig）、検査結果（CheckResult）、レポート（ResidualReport）を定義します。
"""

from dataclasses import dataclass, field

from config import (
    DEFAULT_BETA,
    DEFAULT_GRID,
    DEFAULT_P,
    DEFAULT_PSI,
    DEFAULT_PSI1_SEPARATION,
    DEFAULT_PSI2_POTENTIAL,
    DEFAULT_PSI2_SEPARATION,
    DEFAULT_PSI3,
    DEFAULT_TOLERANCES,
    TOOL_VERSION,
)
from geometry import MassFunction, parse_mass_spec
from lsq_fit import SampleGrid
from soliton import SolitonParams
from utils import InvalidInputError, format_point, parse_grid_spec

VERDICTS = ("pass", "fail", "finding")

# β, p と κ を両方指定したときの整合判定
KAPPA_CONSISTENCY = 1e-12


# ==================== 実行設定 ====================

@dataclass
class RunConfig:
    """
    CLIの1回の実行設定

    beta/p と kappa はどちらか一方の指定が基本で、両方ある場合は整合している必要があります。
    """

    command: str
    masses: tuple[str, ...] = ()
    beta: float | None = None
    p: float | None = None
    alpha: float = 0.0
    kappa: float | None = None
    capital_psi: float = DEFAULT_PSI
    psi3: float = DEFAULT_PSI3
    capital_psi2: float = DEFAULT_PSI2_POTENTIAL
    gamma: float | None = None
    psi1: float = DEFAULT_PSI1_SEPARATION
    psi2: float = DEFAULT_PSI2_SEPARATION
    grid: str | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    basis: str | None = None
    convention: str = "g2"
    output_format: str = "json"
    output_path: str | None = None

    def soliton_params(self) -> SolitonParams:
        """
        ソリトンのパラメータを解決

        Raises:
            InvalidInputError: β, p と κ が整合しない場合
        """
        p = DEFAULT_P if self.p is None else self.p
        if self.kappa is None:
            beta = DEFAULT_BETA if self.beta is None else self.beta
            return SolitonParams(beta, p, self.alpha)
        if self.beta is None:
            return SolitonParams.from_kappa(self.kappa, p, self.alpha)
        params = SolitonParams(self.beta, p, self.alpha)
        if abs(params.kappa - self.kappa) > KAPPA_CONSISTENCY:
            raise InvalidInputError(
                f"κ = {self.kappa} が 2β - (p + 1/2) = {params.kappa} と一致しません"
            )
        return params

    def mass_functions(self, default: tuple[str, ...] = ("zero",)) -> list[MassFunction]:
        """--mass の指定（なければ default）を解析"""
        return [parse_mass_spec(spec) for spec in (self.masses or default)]

    def sample_grid(self, base: dict = DEFAULT_GRID) -> SampleGrid:
        """--grid の指定を base に重ねたグリッド"""
        ranges = parse_grid_spec(self.grid, base) if self.grid else dict(base)
        return SampleGrid.from_ranges(ranges)

    def echo(self) -> dict:
        """レポートに載せる設定の写し"""
        return {
            "command": self.command,
            "masses": list(self.masses),
            "beta": self.beta,
            "p": self.p,
            "alpha": self.alpha,
            "kappa": self.kappa,
            "capital_psi": self.capital_psi,
            "psi3": self.psi3,
            "capital_psi2": self.capital_psi2,
            "gamma": self.gamma,
            "psi1": self.psi1,
            "psi2": self.psi2,
            "grid": self.grid,
            "basis": self.basis,
            "convention": self.convention,
            "tolerances": dict(sorted(self.tolerances.items())),
            "format": self.output_format,
            "out": self.output_path,
        }


# ==================== 検査結果 ====================

@dataclass
class CheckResult:
    """
    1つの検査の集計

    Attributes:
        name: 検査名
        max: |値| の最大
        rms: 値のRMS
        worst_point: 最大を与えた点
        worst_component: その成分やラベル
        verdict: "pass", "fail", "finding"
        tolerance: 判定に使った許容誤差
        detail: 追加情報
    """

    name: str
    max: float
    rms: float
    worst_point: object = None
    worst_component: str | None = None
    verdict: str = "pass"
    tolerance: float | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise InvalidInputError(f"未知の判定です: {self.verdict!r}")

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max": self.max,
            "rms": self.rms,
            "worst_point": format_point(self.worst_point),
            "worst_component": self.worst_component,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class ResidualReport:
    """1回の実行のレポート（検査のどれかが fail なら全体も fail）"""

    config: RunConfig
    checks: list[CheckResult] = field(default_factory=list)
    version: str = TOOL_VERSION
    wall_time: float = 0.0

    @property
    def verdict(self) -> str:
        return "fail" if any(check.failed for check in self.checks) else "pass"

    @property
    def exit_status(self) -> int:
        return 1 if self.verdict == "fail" else 0

    def to_dict(self) -> dict:
        return {
            "config": self.config.echo(),
            "checks": [check.to_dict() for check in self.checks],
            "verdict": self.verdict,
            "version": self.version,
            "wall_time": self.wall_time,
        }
