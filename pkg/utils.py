"""
ユーティリティ関数モジュール

例外クラスと、数値・フラグ文字列の変換などのヘルパー関数を提供します。
"""

import math

from config import DEFAULT_TOLERANCES


# ==================== 例外 ====================

class InvalidInputError(ValueError):
    """入力値が不正（非有限値、範囲外の添字、不正な仕様文字列など）"""


class SingularEvaluationError(ArithmeticError):
    """
    特異点での評価

    Args:
        message: エラーメッセージ
        point: 評価していたチャート上の点（分かっている場合）
    """

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.message = message
        self.point = point

    def with_point(self, point) -> "SingularEvaluationError":
        """点が未設定なら設定した同種の例外を返す"""
        if self.point is not None:
            return self
        return type(self)(self.message, point)

    def __str__(self) -> str:
        if self.point is None:
            return self.message
        return f"{self.message} (点: {self.point})"


class DegenerateMetricError(SingularEvaluationError):
    """計量が退化している（|det g| が下限以下）"""


class UnderdeterminedSystemError(ValueError):
    """方程式の数が未知数より少ない"""


class ExistenceViolationError(ValueError):
    """スカラーポテンシャルの存在条件 ψ₃ = 0 に反する"""


# ==================== 数値変換 ====================

def to_float(s: str | float | int) -> float:
    """
    文字列、浮動小数点数、整数を有限のfloatに変換します。

    Args:
        s: 変換する値

    Returns:
        float: 変換された値

    Raises:
        InvalidInputError: 変換できない値、または非有限値の場合
    """
    try:
        x = float(str(s).strip())
    except (TypeError, ValueError):
        raise InvalidInputError(f"数値が不正です: {s!r}")
    if not math.isfinite(x):
        raise InvalidInputError(f"有限でない数値です: {s!r}")
    return x


def require_finite(x: float, name: str = "値") -> float:
    """有限値でなければ InvalidInputError を送出"""
    if not math.isfinite(x):
        raise InvalidInputError(f"{name}が有限ではありません: {x!r}")
    return float(x)


# ==================== フラグ文字列 ====================

def parse_grid_spec(text: str, base: dict) -> dict:
    """
    グリッド指定文字列を解析

    Args:
        text: "u:0,2,4;r:1,4,4;theta:...;phi:..." 形式（一部の座標だけでも可）
        base: 省略された座標に使う既定値

    Returns:
        座標名 -> (開始, 終了, 点数) の辞書

    Raises:
        InvalidInputError: 書式が不正な場合
    """
    ranges = dict(base)
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        name, sep, body = part.partition(":")
        name = name.strip()
        if not sep or name not in base:
            raise InvalidInputError(f"グリッド指定が不正です: {part!r}")
        fields = body.split(",")
        if len(fields) != 3:
            raise InvalidInputError(f"グリッド指定は <開始>,<終了>,<点数> です: {part!r}")
        start, stop = to_float(fields[0]), to_float(fields[1])
        try:
            count = int(fields[2])
        except ValueError:
            raise InvalidInputError(f"点数が整数ではありません: {part!r}")
        if count < 1:
            raise InvalidInputError(f"点数は1以上です: {part!r}")
        ranges[name] = (start, stop, count)
    return ranges


def parse_tolerances(items: list[str] | None) -> dict:
    """
    --tol name=value の並びを既定の許容誤差表に重ねる

    Raises:
        InvalidInputError: 未知の名前、または数値が不正な場合
    """
    tolerances = dict(DEFAULT_TOLERANCES)
    for item in items or []:
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in tolerances:
            raise InvalidInputError(f"未知の許容誤差です: {item!r}")
        tolerance = to_float(value)
        if tolerance < 0:
            raise InvalidInputError(f"許容誤差は0以上です: {item!r}")
        tolerances[name] = tolerance
    return tolerances


# ==================== 表示 ====================

def format_component(i: int, j: int) -> str:
    """0始まりの添字を1始まりの表記にする"""
    return f"({i + 1},{j + 1})"


def format_point(point) -> list[float] | None:
    """点をJSONに載せられるリストにする"""
    if point is None:
        return None
    return [float(x) for x in point.as_tuple()]
