"""
レポート作成モジュール

検査結果の集計と、JSON / CSV / テキストへの書き出しを提供します。
"""

import csv
import io
import json
import logging
import math
import os
import sys
from typing import Iterable

import numpy as np

from config import TOOL_NAME
from models import CheckResult, ResidualReport
from utils import InvalidInputError, format_component

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "text")

CSV_COLUMNS = ("name", "max", "rms", "worst_point", "worst_component", "verdict", "tolerance")

_MARKS = {"pass": "✓", "fail": "✗", "finding": "!"}


# ==================== 集計 ====================

def _component_label(component) -> str | None:
    if component is None or isinstance(component, str):
        return component
    if isinstance(component, tuple) and len(component) == 2:
        return format_component(*component)
    return str(component)


def aggregate_check(
    name: str,
    samples: Iterable[tuple],
    tolerance: float,
    finding: bool = False,
    detail: dict | None = None,
) -> CheckResult:
    """
    (点, 成分, 値) の並びから検査結果を作成

    Args:
        name: 検査名
        samples: (Point4 | None, 成分 (i, j) かラベル, 値)
        tolerance: 許容誤差（max がこれ以下なら pass）
        finding: 許容誤差を超えたとき fail ではなく finding にする
        detail: 追加情報

    Returns:
        CheckResult
    """
    samples = list(samples)
    if not samples:
        return CheckResult(name, 0.0, 0.0, verdict="pass", tolerance=tolerance, detail=detail or {})
    values = np.array([abs(float(value)) for _, _, value in samples])
    worst = int(np.argmax(values))
    point, component, _ = samples[worst]
    maximum = float(values[worst])
    rms = float(np.sqrt(np.mean(values ** 2)))
    if maximum <= tolerance:
        verdict = "pass"
    else:
        verdict = "finding" if finding else "fail"
    return CheckResult(
        name=name,
        max=maximum,
        rms=rms,
        worst_point=point,
        worst_component=_component_label(component),
        verdict=verdict,
        tolerance=tolerance,
        detail=detail or {},
    )


def create_finding(name: str, samples: Iterable[tuple], detail: dict | None = None) -> CheckResult:
    """
    不一致を記録するための結果（判定は常に finding）

    許容誤差なしで集計し、差の大きさだけを残します。
    """
    result = aggregate_check(name, samples, math.inf, detail=detail)
    result.verdict = "finding"
    result.tolerance = None
    return result


def create_failure(name: str, message: str, detail: dict | None = None) -> CheckResult:
    """検査自体を実行できなかった場合の結果"""
    return CheckResult(name, math.inf, math.inf, verdict="fail", detail={"error": message, **(detail or {})})


# ==================== 書き出し ====================

def _sanitize(value):
    # JSONに載らない値（非有限値、numpyの型、タプル）を変換する
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, np.ndarray):
        return _sanitize(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def render_json(report: ResidualReport) -> str:
    return json.dumps(_sanitize(report.to_dict()), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def render_csv(report: ResidualReport) -> str:
    """1検査1行"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for check in report.checks:
        row = _sanitize(check.to_dict())
        point = row["worst_point"]
        writer.writerow([
            row["name"],
            repr(row["max"]) if row["max"] is not None else "",
            repr(row["rms"]) if row["rms"] is not None else "",
            " ".join(repr(x) for x in point) if point else "",
            row["worst_component"] or "",
            row["verdict"],
            repr(row["tolerance"]) if row["tolerance"] is not None else "",
        ])
    return buffer.getvalue()


def render_text(report: ResidualReport) -> str:
    """人が読むための要約"""
    lines = [
        "━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━",
        f"  {TOOL_NAME} v{report.version}  ({report.config.command})",
        "━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━",
    ]
    for check in report.checks:
        mark = _MARKS[check.verdict]
        line = f"  {mark} {check.name}: max {check.max:.3e}, rms {check.rms:.3e}"
        if check.tolerance is not None:
            line += f" (許容 {check.tolerance:.1e})"
        if check.worst_component:
            line += f" 最悪成分 {check.worst_component}"
        if check.worst_point is not None:
            line += f" @ {check.worst_point}"
        lines.append(line)
    lines.append("━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━")
    lines.append(f"  判定: {report.verdict}  ({len(report.checks)}件, {report.wall_time:.2f}秒)")
    return "\n".join(lines) + "\n"


_RENDERERS = {
    "json": render_json,
    "csv": render_csv,
    "text": render_text,
}


def ensure_parent_dir(path: str) -> None:
    """出力先のディレクトリを作成"""
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(parent):
        os.makedirs(parent)
        logger.info("[REPORT] 出力ディレクトリを作成しました: %s", parent)


def emit(report: ResidualReport, fmt: str = "json", path: str | None = None) -> int:
    """
    レポートを書き出す

    Args:
        report: レポート
        fmt: "json", "csv", "text"
        path: 出力先（None なら標準出力）

    Returns:
        書き込んだバイト数

    Raises:
        InvalidInputError: 未知の形式
        OSError: 書き込めない場合
    """
    if fmt not in _RENDERERS:
        raise InvalidInputError(f"未知の出力形式です: {fmt!r} (json | csv | text)")
    data = _RENDERERS[fmt](report).encode("utf-8")
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        ensure_parent_dir(path)
        with open(path, "wb") as f:
            f.write(data)
        logger.info("[REPORT] レポートを書き出しました: %s (%d bytes)", path, len(data))
    return len(data)


def load_report_json(path: str) -> dict:
    """書き出したJSONレポートを読み戻す"""
    with open(path, encoding="utf-8") as f:
        return json.load(f)
