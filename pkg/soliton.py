"""
Lie微分・ソリトンモジュール

計量のLie微分、共形Ricci-Bourguignonソリトンの残差、成分ごとに書き下した
偏微分方程式系、解かれた解とスカラーポテンシャル、変数分離族、
β によるフローの分類を提供します。

一般公式 L_X g_ij = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k が基準で、
書き下した式（転記版）は照合用として文字どおりに実装しています。
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from config import DIM, THETA_MIN
from geometry import (
    ZERO_MASS,
    CurvatureBundle,
    MassFunction,
    Metric4,
    MetricSample,
    curvature_from_sample,
    inverse_from_sample,
    vaidya_metric,
)
from jet import (
    PHI,
    R,
    THETA,
    U,
    ZERO_FIELD,
    Jet2,
    Point4,
    ScalarField,
    const_field,
    coordinate_jets,
    cos,
    evaluate,
    exp,
    jet_const,
    jet_coord,
    sin,
    tan,
)
from utils import ExistenceViolationError, InvalidInputError, SingularEvaluationError, require_finite

logger = logging.getLogger(__name__)


# ==================== ベクトル場 ====================

@dataclass(frozen=True)
class VectorField4:
    """
    ベクトル場 X = A∂u + B∂r + C∂θ + D∂φ

    Attributes:
        A, B, C, D: 各座標方向の成分（ScalarField）
    """

    A: ScalarField
    B: ScalarField
    C: ScalarField
    D: ScalarField

    @classmethod
    def zero(cls) -> "VectorField4":
        return cls(ZERO_FIELD, ZERO_FIELD, ZERO_FIELD, ZERO_FIELD)

    @classmethod
    def single(cls, index: int, field: ScalarField) -> "VectorField4":
        """1成分だけを持つベクトル場"""
        components = [ZERO_FIELD] * DIM
        components[index] = field
        return cls(*components)

    @property
    def components(self) -> tuple[ScalarField, ScalarField, ScalarField, ScalarField]:
        return (self.A, self.B, self.C, self.D)

    def jets(self, p: Point4) -> tuple[Jet2, Jet2, Jet2, Jet2]:
        """点pで4成分を評価"""
        return tuple(evaluate(field, p) for field in self.components)

    def __add__(self, other: "VectorField4") -> "VectorField4":
        if not isinstance(other, VectorField4):
            return NotImplemented
        return VectorField4(*(
            (lambda p, a=a, b=b: a(p) + b(p)) for a, b in zip(self.components, other.components)
        ))

    def scaled(self, c: float) -> "VectorField4":
        c = require_finite(float(c), "係数")
        return VectorField4(*((lambda p, a=a: c * a(p)) for a in self.components))


def _values_and_gradients(jets: tuple[Jet2, ...]) -> tuple[np.ndarray, np.ndarray]:
    # dX[i, k] = ∂_i X^k
    values = np.array([jet.value for jet in jets])
    gradients = np.column_stack([jet.grad for jet in jets])
    return values, gradients


# ==================== Lie微分 ====================

def lie_derivative_from_sample(sample: MetricSample, X: VectorField4) -> np.ndarray:
    """評価済みの計量に対するLie微分（4×4 の対称行列）"""
    return lie_derivative_from_jets(sample, X.jets(sample.point))


def lie_derivative_from_jets(sample: MetricSample, jets: tuple[Jet2, ...]) -> np.ndarray:
    """評価済みの計量と、同じ点で評価済みの X の4成分からLie微分を組み立てる"""
    values, dX = _values_and_gradients(jets)
    transport = np.einsum("kj,ik->ij", sample.g, dX)
    return np.einsum("k,kij->ij", values, sample.dg) + transport + transport.T


def lie_derivative(g: Metric4, X: VectorField4, p: Point4) -> np.ndarray:
    """
    点pでの L_X g

    Args:
        g: 計量
        X: ベクトル場
        p: チャート上の点

    Returns:
        4×4 の対称行列
    """
    return lie_derivative_from_sample(g.sample(p), X)


def lie_vaidya_transcribed(X: VectorField4, m: MassFunction, p: Point4) -> np.ndarray:
    """
    Vaidya計量に対するLie微分の成分を転記版どおりに並べた 4×4 行列

    対角より下の成分は転記版の別名（対称な写し）です。
    (1,1) 成分は移流項を含まず、(4,4) 成分の ∂φD の係数は 2r のままです。
    """
    return transcribed_from_jets(X.jets(p), m, p)


def transcribed_from_jets(jets: tuple[Jet2, ...], m: MassFunction, p: Point4) -> np.ndarray:
    """点pで評価済みの X の4成分から転記版の行列を組み立てる"""
    mass, _, _ = m.evaluate(p.u)
    r = p.r
    s, c = math.sin(p.theta), math.cos(p.theta)
    g00 = (2.0 * mass - r) / r
    A, B, C, D = (jet.grad for jet in jets)
    b_value, c_value = jets[R].value, jets[THETA].value

    L = np.empty((DIM, DIM))
    L[U, U] = 2.0 * g00 * A[U] - B[U]
    L[U, R] = g00 * A[R] - B[R] - A[U]
    L[U, THETA] = g00 * A[THETA] - B[THETA] + r ** 2 * C[U]
    L[U, PHI] = g00 * A[PHI] - B[PHI] + r ** 2 * s ** 2 * D[U]
    L[R, R] = -2.0 * A[R]
    L[R, THETA] = r ** 2 * C[R] - A[THETA]
    L[R, PHI] = r ** 2 * s ** 2 * D[R] - A[PHI]
    L[THETA, THETA] = 2.0 * (r * b_value + r ** 2 * C[THETA])
    L[THETA, PHI] = r ** 2 * C[PHI] + r ** 2 * s ** 2 * D[THETA]
    L[PHI, PHI] = 2.0 * r * b_value * s ** 2 + 2.0 * r ** 2 * c_value * s * c + 2.0 * r * D[PHI]
    for i in range(DIM):
        for j in range(i):
            L[i, j] = L[j, i]
    return L


def advection_term_11(X: VectorField4, m: MassFunction, p: Point4) -> float:
    """(1,1) 成分の移流項 X^k ∂_k g_11 = 2m'A/r - 2mB/r²"""
    return advection_from_values(evaluate(X.A, p).value, evaluate(X.B, p).value, m, p)


def advection_from_values(a: float, b: float, m: MassFunction, p: Point4) -> float:
    mass, dm, _ = m.evaluate(p.u)
    return 2.0 * dm * a / p.r - 2.0 * mass * b / p.r ** 2


def lie_transcription_gaps(X: VectorField4, m: MassFunction, p: Point4) -> np.ndarray:
    """一般公式と転記版の成分の差（一般公式 - 転記版）"""
    return lie_derivative(vaidya_metric(m), X, p) - lie_vaidya_transcribed(X, m, p)


# ==================== ソリトンのパラメータ ====================

@dataclass(frozen=True)
class SolitonParams:
    """
    ソリトン方程式のパラメータ

    κ = 2β - (p + 2/n) は保持せず常に計算します。
    """

    beta: float
    p: float = 0.0
    alpha: float = 0.0
    n: int = DIM

    def __post_init__(self):
        if self.n != DIM:
            raise InvalidInputError(f"次元は {DIM} のみ対応しています: n = {self.n}")
        for name in ("beta", "p", "alpha"):
            object.__setattr__(self, name, require_finite(float(getattr(self, name)), name))

    @property
    def kappa(self) -> float:
        return 2.0 * self.beta - (self.p + 2.0 / self.n)

    @classmethod
    def from_kappa(cls, kappa: float, p: float = 0.0, alpha: float = 0.0) -> "SolitonParams":
        """κ を指定して β を逆算"""
        kappa = require_finite(float(kappa), "κ")
        return cls((kappa + p + 2.0 / DIM) / 2.0, p, alpha)


def soliton_background(sample: MetricSample, bundle: CurvatureBundle, params: SolitonParams) -> np.ndarray:
    """残差のうち X に依存しない部分 2S - κg - 2αRg"""
    return 2.0 * bundle.ricci - params.kappa * sample.g - 2.0 * params.alpha * bundle.scalar * sample.g


def soliton_residual_from_sample(sample: MetricSample, X: VectorField4, params: SolitonParams) -> np.ndarray:
    bundle = curvature_from_sample(sample, inverse_from_sample(sample))
    return lie_derivative_from_sample(sample, X) + soliton_background(sample, bundle, params)


def soliton_residual(g: Metric4, X: VectorField4, params: SolitonParams, p: Point4) -> np.ndarray:
    """
    ソリトン方程式の残差 L_X g + 2S - κg - 2αRg

    Returns:
        4×4 の対称行列（方程式が点pで成り立つとき零行列）
    """
    return soliton_residual_from_sample(g.sample(p), X, params)


# ==================== 偏微分方程式系 ====================

# 方程式の名前と、対応する残差の成分（0始まり）
PDE_EQUATIONS = (
    ("eq1", (U, U)),
    ("eq2", (R, R)),
    ("eq3", (THETA, THETA)),
    ("eq4", (PHI, PHI)),
    ("eq5", (U, R)),
    ("eq6", (U, THETA)),
    ("eq7", (U, PHI)),
    ("eq8", (R, THETA)),
    ("eq9", (R, PHI)),
    ("eq10", (THETA, PHI)),
)


def pde_system_residuals(X: VectorField4, m: MassFunction, kappa: float, p: Point4) -> np.ndarray:
    """
    転記版の10本の方程式の 左辺 - 右辺（方程式の順）

    Args:
        X: ベクトル場
        m: 質量関数
        kappa: κ
        p: チャート上の点

    Returns:
        長さ10の配列
    """
    mass, dm, _ = m.evaluate(p.u)
    r = p.r
    s, c = math.sin(p.theta), math.cos(p.theta)
    g00 = (2.0 * mass - r) / r
    jets = X.jets(p)
    a, b, c_value, _ = (jet.value for jet in jets)
    A, B, C, D = (jet.grad for jet in jets)

    return np.array([
        g00 * A[U] - B[U] + dm * a / r - mass * b / r ** 2 + 2.0 * dm / r ** 2 - 0.5 * kappa * g00,
        A[R],
        r * b + r ** 2 * C[THETA] - kappa * r ** 2 / 2.0,
        s ** 2 * b + r * s * c * c_value + r * s ** 2 * D[PHI] - r * kappa * s ** 2 / 2.0,
        g00 * A[R] - B[R] - A[U] + kappa,
        g00 * A[THETA] - B[THETA] + r ** 2 * C[U],
        g00 * A[PHI] - B[PHI] + r ** 2 * s ** 2 * D[U],
        r ** 2 * C[R] - A[THETA],
        r ** 2 * s ** 2 * D[R] - A[PHI],
        r ** 2 * C[PHI] + r ** 2 * s ** 2 * D[THETA],
    ])


@dataclass(frozen=True)
class CorrespondenceEntry:
    """
    方程式1本と残差成分1つの比の当てはめ結果

    Attributes:
        equation: 方程式の名前
        component: 対応する残差の成分（0始まり）
        factor: 比が定数とみなせる場合の値、そうでなければ None
        fit_residual: ‖e - c·s‖ / ‖e‖
        constant: 比が許容誤差内で定数か
        scale: 残差成分に掛けた点ごとの換算（なければ None）
    """

    equation: str
    component: tuple[int, int]
    factor: float | None
    fit_residual: float
    constant: bool
    scale: str | None = None


# 比が r に依存する方程式の換算: 方程式 = 係数 × 換算 × 残差成分
RADIAL_SCALES: dict[str, tuple[str, Callable[[Point4], float]]] = {
    "eq4": ("1/(2r)", lambda p: 0.5 / p.r),
}


def _ratio_entry(
    name: str, component: tuple[int, int], e: np.ndarray, s: np.ndarray, tolerance: float, scale: str | None = None,
) -> CorrespondenceEntry:
    ss = float(s @ s)
    if ss == 0.0:
        return CorrespondenceEntry(name, component, None, math.inf, False, scale)
    factor = float(e @ s) / ss
    norm = float(np.linalg.norm(e))
    fit = float(np.linalg.norm(e - factor * s)) / norm if norm > 0.0 else 0.0
    constant = fit <= tolerance
    logger.debug("[LIE] %s ~ %s (%s): 係数 %.6g, 当てはめ残差 %.3e", name, component, scale or "1", factor, fit)
    return CorrespondenceEntry(name, component, factor if constant else None, fit, constant, scale)


def correspondence_factors(
    X: VectorField4,
    m: MassFunction,
    params: SolitonParams,
    grid: list[Point4],
    tolerance: float = 1e-9,
    scales: dict[str, tuple[str, Callable[[Point4], float]]] | None = None,
) -> list[CorrespondenceEntry]:
    """
    各方程式の残差が、ソリトン残差の対応成分の定数倍になっているかを当てはめる

    比が定数にならない組は例外ではなく constant=False の項目として返します。
    scales に載っている方程式は、成分に換算を掛けた当てはめも続けて返します
    （方程式の順のあと、scale に換算名が入った項目）。
    """
    if not grid:
        raise InvalidInputError("グリッドが空です")
    g = vaidya_metric(m)
    equations = []
    components = []
    for p in grid:
        equations.append(pde_system_residuals(X, m, params.kappa, p))
        components.append(soliton_residual(g, X, params, p))
    equations = np.array(equations)
    components = np.array(components)

    entries = [
        _ratio_entry(name, (i, j), equations[:, k], components[:, i, j], tolerance)
        for k, (name, (i, j)) in enumerate(PDE_EQUATIONS)
    ]
    for k, (name, (i, j)) in enumerate(PDE_EQUATIONS):
        if name not in (scales or {}):
            continue
        label, scale = scales[name]
        weights = np.array([scale(p) for p in grid])
        entries.append(_ratio_entry(name, (i, j), equations[:, k], weights * components[:, i, j], tolerance, label))
    return entries


# ==================== 解かれた解 ====================

@dataclass(frozen=True)
class SolvedSolution:
    """A = κu/2 + Ψ, B = κr/2, C = 0, D = ψ₃"""

    kappa: float
    Psi: float = 0.0
    psi3: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "Psi", "psi3"):
            object.__setattr__(self, name, require_finite(float(getattr(self, name)), name))


def solved_vector_field(s: SolvedSolution) -> VectorField4:
    """解かれた解のベクトル場"""
    half = s.kappa / 2.0

    def A(p: Point4) -> Jet2:
        return half * jet_coord(U, p) + s.Psi

    def B(p: Point4) -> Jet2:
        return half * jet_coord(R, p)

    return VectorField4(A, B, ZERO_FIELD, const_field(s.psi3))


# ==================== 変数分離族 ====================

@dataclass(frozen=True)
class SeparationFamily:
    """
    Q = Φ(φ)Θ(θ) の変数分離で得られる C, D の族

    D = (ψ₁e^{√Γφ} + ψ₂e^{-√Γφ}) tan^Γθ
    C = -√Γ(ψ₁e^{√Γφ} - ψ₂e^{-√Γφ}) tan^{Γ+1}θ
    """

    Gamma: float
    psi1: float = 1.0
    psi2: float = 0.0

    def __post_init__(self):
        for name in ("Gamma", "psi1", "psi2"):
            object.__setattr__(self, name, require_finite(float(getattr(self, name)), name))
        if self.Gamma < 0.0:
            raise InvalidInputError(f"Γ は0以上です: {self.Gamma}")


def _require_band(p: Point4) -> None:
    if not THETA_MIN < p.theta < math.pi / 2 - THETA_MIN:
        raise SingularEvaluationError(
            f"θ = {p.theta} は tan^Γθ の評価帯 ({THETA_MIN}, π/2 - {THETA_MIN}) の外です", p
        )


def separation_family_fields(fam: SeparationFamily) -> tuple[ScalarField, ScalarField]:
    """
    変数分離族の (C, D)

    Γ > 0 の場合、θ が評価帯の外の点では SingularEvaluationError を送出します。
    """
    if fam.Gamma == 0.0:
        return ZERO_FIELD, const_field(fam.psi1 + fam.psi2)
    root = math.sqrt(fam.Gamma)

    def branches(p: Point4) -> tuple[Jet2, Jet2, Jet2]:
        _require_band(p)
        phi = jet_coord(PHI, p)
        return exp(root * phi), exp(-root * phi), tan(jet_coord(THETA, p))

    def C(p: Point4) -> Jet2:
        grow, decay, t = branches(p)
        return -root * (fam.psi1 * grow - fam.psi2 * decay) * t ** (fam.Gamma + 1.0)

    def D(p: Point4) -> Jet2:
        grow, decay, t = branches(p)
        return (fam.psi1 * grow + fam.psi2 * decay) * t ** fam.Gamma

    return C, D


def separation_sum_fields(families: list[SeparationFamily]) -> tuple[ScalarField, ScalarField]:
    """複数の Γ にわたる和の (C, D)"""
    fields = [separation_family_fields(fam) for fam in families]
    if not fields:
        return ZERO_FIELD, ZERO_FIELD

    def C(p: Point4) -> Jet2:
        return sum((evaluate(c, p) for c, _ in fields), jet_const(0.0))

    def D(p: Point4) -> Jet2:
        return sum((evaluate(d, p) for _, d in fields), jet_const(0.0))

    return C, D


def separation_pde_residual(fam: SeparationFamily, p: Point4) -> float:
    """∂φ²D - sinθcosθ·∂θD"""
    _, D = separation_family_fields(fam)
    jet = evaluate(D, p)
    return float(jet.hess[PHI, PHI] - math.sin(p.theta) * math.cos(p.theta) * jet.grad[THETA])


def gamma_forcing_residual(fam: SeparationFamily, kappa: float, p: Point4) -> float:
    """B = κr/2 と変数分離族の C, D を代入したときの3本目の方程式の残差（r²∂θC が残る）"""
    C, D = separation_family_fields(fam)
    half = kappa / 2.0
    X = VectorField4(ZERO_FIELD, lambda q: half * jet_coord(R, q), C, D)
    return float(pde_system_residuals(X, ZERO_MASS, kappa, p)[2])


# ==================== スカラーポテンシャル ====================

class PotentialConvention(str, Enum):
    """u² の項の符号の異なる2つのポテンシャルの書き方"""

    AS_PRINTED_R5 = "as-printed-R5"
    G2_CONSISTENT = "G2-consistent"

    @classmethod
    def from_flag(cls, flag: str) -> "PotentialConvention":
        """CLIの --convention r5|g2"""
        flags = {"r5": cls.AS_PRINTED_R5, "g2": cls.G2_CONSISTENT}
        if flag not in flags:
            raise InvalidInputError(f"未知のポテンシャル規約です: {flag!r}")
        return flags[flag]

    @property
    def flag(self) -> str:
        return "r5" if self is PotentialConvention.AS_PRINTED_R5 else "g2"


@dataclass(frozen=True)
class PotentialSpec:
    """
    スカラーポテンシャル

    as-printed-R5: f = -(κu/2)(r - u/2) - Ψ(r+u) + Ψ₂
    G2-consistent: f = -κur/2 - κu²/4 - Ψ(r+u) + Ψ₂
    """

    kappa: float
    Psi: float = 0.0
    Psi2: float = 0.0
    convention: PotentialConvention = PotentialConvention.G2_CONSISTENT


def potential_field(spec: PotentialSpec) -> ScalarField:
    """ポテンシャル f をスカラー場にする"""
    sign = 1.0 if spec.convention is PotentialConvention.AS_PRINTED_R5 else -1.0

    def f(p: Point4) -> Jet2:
        u, r, _, _ = coordinate_jets(p)
        return -spec.kappa * u * r / 2.0 + sign * spec.kappa * u * u / 4.0 - spec.Psi * (r + u) + spec.Psi2

    return f


def metric_gradient(g: Metric4, f: ScalarField, p: Point4) -> np.ndarray:
    """
    ∇f^j = g^{kj} ∂_k f

    Raises:
        DegenerateMetricError: 計量が退化している場合
    """
    inverse = inverse_from_sample(g.sample(p))
    return np.einsum("kj,k->j", inverse.g, evaluate(f, p).grad)


def closed_form_gradient(m: MassFunction, f: ScalarField, p: Point4) -> np.ndarray:
    """Vaidya計量での勾配の明示形 (-∂rf, -(∂uf + g_11 ∂rf), ∂θf/r², ∂φf/(r² sin²θ))"""
    mass, _, _ = m.evaluate(p.u)
    df = evaluate(f, p).grad
    r, s = p.r, math.sin(p.theta)
    g00 = (2.0 * mass - r) / r
    return np.array([
        -df[R],
        -(df[U] + g00 * df[R]),
        df[THETA] / r ** 2,
        df[PHI] / (r ** 2 * s ** 2),
    ])


@dataclass(frozen=True)
class GradientDeviation:
    """
    グリッド上の |∇f - X| の成分ごとの値

    Attributes:
        convention: 使ったポテンシャルの規約
        points: 評価した点
        deviations: [点, 成分] の配列
    """

    convention: PotentialConvention
    points: tuple[Point4, ...]
    deviations: np.ndarray

    @property
    def max_by_component(self) -> tuple[float, ...]:
        return tuple(float(x) for x in self.deviations.max(axis=0))

    @property
    def max(self) -> float:
        return float(self.deviations.max())

    def worst(self) -> tuple[Point4, int, float]:
        index, component = np.unravel_index(int(np.argmax(self.deviations)), self.deviations.shape)
        return self.points[index], int(component), float(self.deviations[index, component])


def verify_gradient_soliton(spec: PotentialSpec, s: SolvedSolution, grid: list[Point4]) -> GradientDeviation:
    """
    m = 0 で ∇f と解かれた解のベクトル場を比較

    Raises:
        ExistenceViolationError: ψ₃ ≠ 0（ポテンシャルが存在するには ψ₃ = 0 が必要）
        InvalidInputError: グリッドが空の場合
    """
    if s.psi3 != 0.0:
        raise ExistenceViolationError(f"スカラーポテンシャルが存在するには ψ₃ = 0 が必要です (ψ₃ = {s.psi3})")
    if not grid:
        raise InvalidInputError("グリッドが空です")
    g = vaidya_metric(ZERO_MASS)
    f = potential_field(spec)
    X = solved_vector_field(s)
    deviations = []
    for p in grid:
        field_values = np.array([jet.value for jet in X.jets(p)])
        deviations.append(np.abs(metric_gradient(g, f, p) - field_values))
    report = GradientDeviation(spec.convention, tuple(grid), np.array(deviations))
    logger.debug("[SOLITON] ポテンシャル (%s): 最大偏差 %.3e", spec.convention.value, report.max)
    return report


# ==================== フローの分類 ====================

class FlowType(str, Enum):
    """β の符号によるフローの分類"""

    EXPANDING = "expanding"
    STEADY = "steady"
    SHRINKING = "shrinking"


def classify(beta: float) -> FlowType:
    """
    β > 0 なら expanding、β = 0 なら steady、β < 0 なら shrinking

    Raises:
        InvalidInputError: β が有限でない場合
    """
    beta = require_finite(float(beta), "β")
    if beta > 0.0:
        return FlowType.EXPANDING
    if beta == 0.0:
        return FlowType.STEADY
    return FlowType.SHRINKING


# ==================== ランダムなベクトル場 ====================

RANDOM_TERM_COUNT = 8


def _random_component(coefficients: tuple[float, ...]) -> ScalarField:
    # 1, u, r, ur, r², sinθcosφ, u cosθ, sin u sinφ
    def field(p: Point4) -> Jet2:
        u, r, theta, phi = coordinate_jets(p)
        terms = (u, r, u * r, r * r, sin(theta) * cos(phi), u * cos(theta), sin(u) * sin(phi))
        total = jet_const(coefficients[0])
        for coefficient, term in zip(coefficients[1:], terms):
            total = total + coefficient * term
        return total

    return field


def random_vector_field(rng: np.random.Generator) -> VectorField4:
    """多項式と三角関数の項を一様乱数の係数で組み合わせたベクトル場"""
    return VectorField4(*(
        _random_component(tuple(float(x) for x in rng.uniform(-1.0, 1.0, RANDOM_TERM_COUNT)))
        for _ in range(DIM)
    ))
