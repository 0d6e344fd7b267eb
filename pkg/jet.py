"""
ジェット演算モジュール

4座標 (u, r, θ, φ) 上の2階前進微分を提供します。
Jet2 は値・勾配・ヘッセ行列の組で、計量の成分、ベクトル場の成分、
ポテンシャルはすべて「点 -> Jet2」の写像（ScalarField）として表します。
"""

import math
import numbers
from dataclasses import dataclass
from typing import Callable

import numpy as np

from config import COORD_NAMES, DIM, POLE_TOL, R_MIN, THETA_MIN
from utils import InvalidInputError, SingularEvaluationError

# 座標の添字
U, R, THETA, PHI = range(DIM)

_INDEX_ALIASES = {
    "u": U, "r": R, "theta": THETA, "θ": THETA, "phi": PHI, "φ": PHI,
}


# ==================== チャート上の点 ====================

@dataclass(frozen=True)
class Point4:
    """
    チャート上の点 (u, r, θ, φ)

    r >= R_MIN と θ ∈ [THETA_MIN, π - THETA_MIN] を構築時に検査します。
    """

    u: float
    r: float
    theta: float
    phi: float

    def __post_init__(self):
        for name in COORD_NAMES:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidInputError(f"座標 {name} が有限ではありません: {value!r}")
            object.__setattr__(self, name, value)
        if self.r < R_MIN:
            raise InvalidInputError(f"r = {self.r} は下限 {R_MIN} 未満です（r = 0 は特異点）")
        if not THETA_MIN <= self.theta <= math.pi - THETA_MIN:
            raise InvalidInputError(f"θ = {self.theta} は [{THETA_MIN}, π - {THETA_MIN}] の外です")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.u, self.r, self.theta, self.phi)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())

    def shifted(self, index: int, h: float) -> "Point4":
        """index番目の座標をhだけずらした点"""
        values = list(self.as_tuple())
        values[coordinate_index(index)] += h
        return Point4(*values)

    def __str__(self) -> str:
        return f"(u={self.u:.6g}, r={self.r:.6g}, θ={self.theta:.6g}, φ={self.phi:.6g})"


def coordinate_index(index: int | str) -> int:
    """
    座標の添字を 0..3 に正規化

    Raises:
        InvalidInputError: 範囲外の添字、未知の座標名の場合
    """
    if isinstance(index, str):
        if index not in _INDEX_ALIASES:
            raise InvalidInputError(f"未知の座標名です: {index!r}")
        return _INDEX_ALIASES[index]
    if isinstance(index, bool) or not isinstance(index, numbers.Integral) or not 0 <= index < DIM:
        raise InvalidInputError(f"座標の添字は 0..3 です: {index!r}")
    return int(index)


# ==================== Jet2 ====================

def _symmetric(hess: np.ndarray) -> np.ndarray:
    # 上三角だけを採用して下三角を写す
    upper = np.triu(hess)
    return upper + np.triu(hess, 1).T


@dataclass(frozen=True, eq=False)
class Jet2:
    """
    値と1階・2階偏微分の組

    Attributes:
        value: 値
        grad: 1階偏微分（u, r, θ, φ の順）
        hess: 2階偏微分（対称）
    """

    value: float
    grad: np.ndarray
    hess: np.ndarray

    # numpyのスカラーが左辺でも __rmul__ などに委ねる
    __array_ufunc__ = None

    def __post_init__(self):
        grad = np.array(self.grad, dtype=float).reshape(DIM)
        hess = _symmetric(np.array(self.hess, dtype=float).reshape(DIM, DIM))
        value = float(self.value)
        if not (math.isfinite(value) and np.isfinite(grad).all() and np.isfinite(hess).all()):
            raise SingularEvaluationError("ジェットに非有限値が発生しました")
        grad.flags.writeable = False
        hess.flags.writeable = False
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "grad", grad)
        object.__setattr__(self, "hess", hess)

    def __add__(self, other):
        return jet_binary("add", self, _lift(other))

    def __radd__(self, other):
        return jet_binary("add", _lift(other), self)

    def __sub__(self, other):
        return jet_binary("sub", self, _lift(other))

    def __rsub__(self, other):
        return jet_binary("sub", _lift(other), self)

    def __mul__(self, other):
        return jet_binary("mul", self, _lift(other))

    def __rmul__(self, other):
        return jet_binary("mul", _lift(other), self)

    def __truediv__(self, other):
        return jet_binary("div", self, _lift(other))

    def __rtruediv__(self, other):
        return jet_binary("div", _lift(other), self)

    def __neg__(self):
        return jet_unary("neg", self)

    def __pow__(self, k):
        if isinstance(k, numbers.Integral) and not isinstance(k, bool):
            return jet_unary("pow_int", self, int(k))
        return pow_real(self, k)

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad.tolist()!r})"


ScalarField = Callable[[Point4], Jet2]


def _jet(value: float, grad: np.ndarray, hess: np.ndarray) -> Jet2:
    # 内部演算専用: grad/hess は新しく確保された形の正しい配列で、hess は対称
    value = float(value)
    if not math.isfinite(value + grad.sum() + hess.sum()):
        raise SingularEvaluationError("ジェットに非有限値が発生しました")
    grad.flags.writeable = False
    hess.flags.writeable = False
    jet = object.__new__(Jet2)
    object.__setattr__(jet, "value", value)
    object.__setattr__(jet, "grad", grad)
    object.__setattr__(jet, "hess", hess)
    return jet


def _lift(x) -> Jet2:
    if isinstance(x, Jet2):
        return x
    if isinstance(x, numbers.Real):
        return jet_const(float(x))
    raise TypeError(f"Jet2と演算できない型です: {type(x).__name__}")


# ==================== 基本演算 ====================

def jet_const(c: float) -> Jet2:
    """
    定数ジェット

    Raises:
        InvalidInputError: cが有限でない場合
    """
    if isinstance(c, bool) or not isinstance(c, numbers.Real) or not math.isfinite(c):
        raise InvalidInputError(f"定数が有限ではありません: {c!r}")
    return _jet(float(c), np.zeros(DIM), np.zeros((DIM, DIM)))


def jet_coord(index: int | str, p: Point4) -> Jet2:
    """座標関数のジェット（勾配は添字方向の単位ベクトル）"""
    index = coordinate_index(index)
    grad = np.zeros(DIM)
    grad[index] = 1.0
    return _jet(p.as_tuple()[index], grad, np.zeros((DIM, DIM)))


def coordinate_jets(p: Point4) -> tuple[Jet2, Jet2, Jet2, Jet2]:
    """(u, r, θ, φ) の座標ジェットをまとめて返す"""
    return tuple(jet_coord(i, p) for i in range(DIM))


def jet_binary(op: str, a: Jet2, b: Jet2) -> Jet2:
    """
    二項演算（Leibniz則・商の微分を2階まで）

    Args:
        op: "add", "sub", "mul", "div" のいずれか
        a: 左辺
        b: 右辺

    Returns:
        演算結果のジェット

    Raises:
        InvalidInputError: 未知の演算の場合
        SingularEvaluationError: bの値が0での除算
    """
    if op == "add":
        return _jet(a.value + b.value, a.grad + b.grad, a.hess + b.hess)
    if op == "sub":
        return _jet(a.value - b.value, a.grad - b.grad, a.hess - b.hess)
    if op == "mul":
        cross = np.outer(a.grad, b.grad)
        return _jet(
            a.value * b.value,
            a.value * b.grad + b.value * a.grad,
            a.value * b.hess + b.value * a.hess + cross + cross.T,
        )
    if op == "div":
        if b.value == 0.0:
            raise SingularEvaluationError("値が0のジェットで除算しました")
        return jet_binary("mul", a, _reciprocal(b))
    raise InvalidInputError(f"未知の二項演算です: {op!r}")


def _chain(a: Jet2, f0: float, f1: float, f2: float) -> Jet2:
    # f(a) の連鎖律: f0 = f(v), f1 = f'(v), f2 = f''(v)
    return _jet(f0, f1 * a.grad, f2 * np.outer(a.grad, a.grad) + f1 * a.hess)


def _reciprocal(a: Jet2) -> Jet2:
    v = a.value
    return _chain(a, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))


def _pow_int(a: Jet2, k: int) -> Jet2:
    v = a.value
    if k == 0:
        return jet_const(1.0)
    if k < 0 and v == 0.0:
        raise SingularEvaluationError(f"0 の負のべき乗です (k={k})")
    f1 = k * v ** (k - 1)
    f2 = 0.0 if k == 1 else k * (k - 1) * v ** (k - 2)
    return _chain(a, v ** k, f1, f2)


def jet_unary(op: str, a: Jet2, k: int | None = None) -> Jet2:
    """
    単項演算（連鎖律を2階まで）

    Args:
        op: "neg", "sin", "cos", "tan", "exp", "sqrt", "pow_int", "ln" のいずれか
        a: 引数
        k: pow_int の整数指数

    Returns:
        演算結果のジェット

    Raises:
        InvalidInputError: 未知の演算、pow_int に整数指数がない場合
        SingularEvaluationError: 定義域外（sqrt/ln の非正値、tan の極など）
    """
    v = a.value
    if op == "neg":
        return _jet(-v, -a.grad, -a.hess)
    if op == "sin":
        s, c = math.sin(v), math.cos(v)
        return _chain(a, s, c, -s)
    if op == "cos":
        s, c = math.sin(v), math.cos(v)
        return _chain(a, c, -s, -c)
    if op == "tan":
        if abs(math.cos(v)) < POLE_TOL:
            raise SingularEvaluationError(f"tan の極です (引数 {v!r})")
        return jet_binary("div", jet_unary("sin", a), jet_unary("cos", a))
    if op == "exp":
        try:
            e = math.exp(v)
        except OverflowError:
            raise SingularEvaluationError(f"exp がオーバーフローしました (引数 {v!r})")
        return _chain(a, e, e, e)
    if op == "sqrt":
        if v <= 0.0:
            raise SingularEvaluationError(f"sqrt の引数が正ではありません: {v!r}")
        s = math.sqrt(v)
        return _chain(a, s, 0.5 / s, -0.25 / (s * v))
    if op == "ln":
        if v <= 0.0:
            raise SingularEvaluationError(f"ln の引数が正ではありません: {v!r}")
        return _chain(a, math.log(v), 1.0 / v, -1.0 / (v * v))
    if op == "pow_int":
        if isinstance(k, bool) or not isinstance(k, numbers.Integral):
            raise InvalidInputError(f"pow_int には整数指数が必要です: {k!r}")
        return _pow_int(a, int(k))
    raise InvalidInputError(f"未知の単項演算です: {op!r}")


def pow_real(a: Jet2, x: float) -> Jet2:
    """
    実数べき a^x

    xが整数値なら pow_int と同じ。それ以外は a の値が正であることが必要です。
    """
    if not math.isfinite(x):
        raise InvalidInputError(f"指数が有限ではありません: {x!r}")
    if float(x).is_integer():
        return _pow_int(a, int(x))
    v = a.value
    if v <= 0.0:
        raise SingularEvaluationError(f"非整数べきの底が正ではありません: {v!r}")
    return _chain(a, v ** x, x * v ** (x - 1.0), x * (x - 1.0) * v ** (x - 2.0))


def sin(a: Jet2) -> Jet2:
    return jet_unary("sin", a)


def cos(a: Jet2) -> Jet2:
    return jet_unary("cos", a)


def tan(a: Jet2) -> Jet2:
    return jet_unary("tan", a)


def exp(a: Jet2) -> Jet2:
    return jet_unary("exp", a)


def sqrt(a: Jet2) -> Jet2:
    return jet_unary("sqrt", a)


def ln(a: Jet2) -> Jet2:
    return jet_unary("ln", a)


# ==================== スカラー場 ====================

def const_field(c: float) -> ScalarField:
    """定数のスカラー場"""
    jet = jet_const(c)
    return lambda p: jet


def coord_field(index: int | str) -> ScalarField:
    """座標関数のスカラー場"""
    index = coordinate_index(index)
    return lambda p: jet_coord(index, p)


ZERO_FIELD = const_field(0.0)


def evaluate(field: ScalarField, p: Point4) -> Jet2:
    """
    スカラー場を点で評価

    Raises:
        SingularEvaluationError: 評価が特異な場合（点を付けて送出）
    """
    try:
        return field(p)
    except SingularEvaluationError as e:
        if e.point is None:
            raise e.with_point(p) from e
        raise
