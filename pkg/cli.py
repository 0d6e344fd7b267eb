"""
コマンドラインインターフェース

Vaidya時空上の共形Ricci-Bourguignonソリトン検証エンジン

終了コード: 0 = 全検査 pass, 1 = 検証の失敗, 2 = 使い方の誤り・入出力エラー
"""

import argparse
import importlib
import logging
import sys
import time

from config import (
    DEFAULT_ALPHA,
    DEFAULT_PSI,
    DEFAULT_PSI1_SEPARATION,
    DEFAULT_PSI2_POTENTIAL,
    DEFAULT_PSI2_SEPARATION,
    DEFAULT_PSI3,
    TOOL_DESCRIPTION,
    TOOL_NAME,
    TOOL_VERSION,
)
from models import ResidualReport, RunConfig
from report import FORMATS, create_failure, emit
from utils import (
    InvalidInputError,
    SingularEvaluationError,
    UnderdeterminedSystemError,
    parse_tolerances,
    to_float,
)

logger = logging.getLogger(__name__)

# コマンドごとにロードする検査グループ
CHECKS_TO_LOAD = {
    "curvature": ["checks.curvature"],
    "lie": ["checks.lie"],
    "soliton-verify": ["checks.soliton"],
    "potential-verify": ["checks.potential"],
    "classify": ["checks.classify"],
    "fit-probe": ["checks.fit_probe"],
    "separation-verify": ["checks.separation"],
}
CHECKS_TO_LOAD["report-all"] = [name for names in CHECKS_TO_LOAD.values() for name in names]

COMMAND_HELP = {
    "curvature": "曲率の閉形式・対称性・逆計量を検査",
    "lie": "Lie微分の一般公式と転記版を比較",
    "soliton-verify": "解かれた解のソリトン残差を検査",
    "potential-verify": "スカラーポテンシャルの勾配を検査（両方の書き方）",
    "classify": "β によるフローの分類",
    "fit-probe": "最小二乗による非存在の探索",
    "separation-verify": "変数分離族のPDE残差と強制項を検査",
    "report-all": "すべての検査を実行",
}


def _real(text: str) -> float:
    try:
        return to_float(text)
    except InvalidInputError as e:
        raise argparse.ArgumentTypeError(str(e))


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mass", action="append", default=[], metavar="SPEC",
                        help="質量関数 zero | const:<v> | linear:<a>,<b> | poly:<c0>,... | sinoff:<amp>,<offset>（複数可）")
    parser.add_argument("--beta", type=_real, help="β")
    parser.add_argument("--p", type=_real, help="共形圧力 p")
    parser.add_argument("--alpha", type=_real, default=DEFAULT_ALPHA, help="α")
    parser.add_argument("--kappa", type=_real, help="κ = 2β - (p + 1/2) を直接指定")
    parser.add_argument("--Psi", dest="capital_psi", type=_real, default=DEFAULT_PSI, help="Ψ")
    parser.add_argument("--psi3", type=_real, default=DEFAULT_PSI3, help="ψ₃")
    parser.add_argument("--Psi2", dest="capital_psi2", type=_real, default=DEFAULT_PSI2_POTENTIAL, help="Ψ₂")
    parser.add_argument("--Gamma", dest="gamma", type=_real, help="Γ (>= 0)")
    parser.add_argument("--psi1", type=_real, default=DEFAULT_PSI1_SEPARATION, help="ψ₁")
    parser.add_argument("--psi2", type=_real, default=DEFAULT_PSI2_SEPARATION, help="ψ₂")
    parser.add_argument("--grid", help="u:<a>,<b>,<n>;r:...;theta:...;phi:...")
    parser.add_argument("--basis", choices=["minimal", "extended"], help="最小二乗の基底")
    parser.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="許容誤差の上書き（複数可）")
    parser.add_argument("--format", dest="output_format", choices=FORMATS, default="json", help="出力形式")
    parser.add_argument("--out", dest="output_path", help="出力先（省略時は標準出力）")
    parser.add_argument("--convention", choices=["r5", "g2"], default="g2", help="ポテンシャルの書き方")
    parser.add_argument("-v", "--verbose", action="store_true", help="詳細なログを表示")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description=TOOL_DESCRIPTION,
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in CHECKS_TO_LOAD:
        sub = subparsers.add_parser(command, help=COMMAND_HELP[command], allow_abbrev=False)
        _add_common_arguments(sub)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    解析済みの引数から RunConfig を作成

    Raises:
        InvalidInputError: 許容誤差の指定が不正な場合
    """
    return RunConfig(
        command=args.command,
        masses=tuple(args.mass),
        beta=args.beta,
        p=args.p,
        alpha=args.alpha,
        kappa=args.kappa,
        capital_psi=args.capital_psi,
        psi3=args.psi3,
        capital_psi2=args.capital_psi2,
        gamma=args.gamma,
        psi1=args.psi1,
        psi2=args.psi2,
        grid=args.grid,
        tolerances=parse_tolerances(args.tol),
        basis=args.basis,
        convention=args.convention,
        output_format=args.output_format,
        output_path=args.output_path,
    )


def run(config: RunConfig) -> ResidualReport:
    """
    コマンドに対応する検査グループをロードして実行

    Raises:
        InvalidInputError: 設定が不正な場合
        SingularEvaluationError: 定義域外での評価
    """
    if config.command not in CHECKS_TO_LOAD:
        raise InvalidInputError(f"未知のコマンドです: {config.command!r}")
    started = time.perf_counter()
    # 設定の整合性はどの検査よりも先に確かめる
    config.soliton_params()
    config.mass_functions()
    config.sample_grid()

    logger.info("━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━")
    logger.info("  %s v%s  (%s)", TOOL_NAME, TOOL_VERSION, config.command)
    logger.info("━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━")

    report = ResidualReport(config)
    logger.info("[INIT] 検査グループをロードしています...")
    for module_name in CHECKS_TO_LOAD[config.command]:
        try:
            group = importlib.import_module(module_name).setup(config)
            logger.info("  ✓ %s をロードしました", module_name)
        except ImportError as e:
            logger.error("  ✗ %s のロードに失敗しました: %s", module_name, e)
            report.checks.append(create_failure(module_name, str(e)))
            continue
        report.checks.extend(group.run())

    report.wall_time = time.perf_counter() - started
    failed = sum(check.failed for check in report.checks)
    logger.info("[READY] %d件の検査が完了しました (失敗 %d件, %.2f秒)", len(report.checks), failed, report.wall_time)
    return report


def main(argv: list[str] | None = None) -> int:
    """メイン関数"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
        force=True,
    )

    try:
        config = config_from_args(args)
        report = run(config)
    except (InvalidInputError, UnderdeterminedSystemError, SingularEvaluationError) as e:
        logger.error("[ERROR] %s", e)
        return 2

    try:
        emit(report, config.output_format, config.output_path)
    except OSError as e:
        logger.error("[ERROR] レポートを書き出せませんでした: %s", e)
        return 2
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
