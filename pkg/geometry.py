"""
幾何モジュール

Vaidya計量を構成し、逆計量・Christoffel記号・Riemann・Ricci・スカラー曲率を
計量の成分から直接計算します。成分ごとに書き下した閉形式（Ricci、逆計量、
Riemannの成分表）は独立した照合用の関数として提供します。
"""

import logging
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
from numpy.polynomial import Polynomial

from config import DET_MIN, DIM, RIEMANN_SIGN
from jet import PHI, R, THETA, U, Jet2, Point4, ScalarField, const_field, evaluate, jet_coord, sin
from utils import DegenerateMetricError, InvalidInputError, require_finite, to_float

logger = logging.getLogger(__name__)


# ==================== 質量関数 ====================

MASS_KINDS = ("zero", "constant", "linear", "polynomial", "sinusoidal-offset")

_PARAMETER_COUNTS = {"zero": 0, "constant": 1, "linear": 2, "sinusoidal-offset": 2}

_SPEC_PREFIXES = {
    "const": "constant",
    "linear": "linear",
    "poly": "polynomial",
    "sinoff": "sinusoidal-offset",
}


def _format_number(x: float) -> str:
    return str(int(x)) if x.is_integer() else repr(x)


@dataclass(frozen=True)
class MassFunction:
    """
    零的座標 u の質量関数 m(u)

    Attributes:
        kind: "zero", "constant", "linear", "polynomial", "sinusoidal-offset"
        parameters: 係数（linear は a, b で m = a·u + b、sinusoidal-offset は
            amp, offset で m = amp·sin u + offset）
    """

    kind: str
    parameters: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in MASS_KINDS:
            raise InvalidInputError(f"未知の質量関数です: {self.kind!r}")
        parameters = tuple(require_finite(float(c), "質量関数の係数") for c in self.parameters)
        expected = _PARAMETER_COUNTS.get(self.kind)
        if expected is not None and len(parameters) != expected:
            raise InvalidInputError(f"{self.kind} の係数は{expected}個です: {parameters}")
        if self.kind == "polynomial" and not parameters:
            raise InvalidInputError("polynomial には係数が1個以上必要です")
        object.__setattr__(self, "parameters", parameters)

    @cached_property
    def _polynomials(self) -> tuple[Polynomial, Polynomial, Polynomial]:
        # m, m', m''
        if self.kind == "constant":
            poly = Polynomial([self.parameters[0]])
        elif self.kind == "linear":
            a, b = self.parameters
            poly = Polynomial([b, a])
        else:
            poly = Polynomial(list(self.parameters))
        return poly, poly.deriv(1), poly.deriv(2)

    @property
    def spec(self) -> str:
        """CLIと共通の文字列表現"""
        if self.kind == "zero":
            return "zero"
        prefix = {v: k for k, v in _SPEC_PREFIXES.items()}[self.kind]
        return f"{prefix}:" + ",".join(_format_number(c) for c in self.parameters)

    def is_zero(self) -> bool:
        """m ≡ 0 か（係数がすべて0の const/linear/poly/sinoff も含む）"""
        return self.kind == "zero" or all(c == 0.0 for c in self.parameters)

    def evaluate(self, u: float) -> tuple[float, float, float]:
        """
        (m, m', m'') を返す

        Args:
            u: 零的座標
        """
        if self.kind == "zero":
            return (0.0, 0.0, 0.0)
        if self.kind == "sinusoidal-offset":
            amp, offset = self.parameters
            s, c = math.sin(u), math.cos(u)
            return (amp * s + offset, amp * c, -amp * s)
        poly, d1, d2 = self._polynomials
        return (float(poly(u)), float(d1(u)), float(d2(u)))

    def jet(self, p: Point4) -> Jet2:
        """チャート上のスカラー場としての m(u)"""
        m, dm, ddm = self.evaluate(p.u)
        grad = np.zeros(DIM)
        grad[U] = dm
        hess = np.zeros((DIM, DIM))
        hess[U, U] = ddm
        return Jet2(m, grad, hess)

    def __str__(self) -> str:
        return self.spec


ZERO_MASS = MassFunction("zero")


def parse_mass_spec(text: str) -> MassFunction:
    """
    質量関数の仕様文字列を解析

    Args:
        text: "zero" | "const:<v>" | "linear:<a>,<b>" | "poly:<c0>,<c1>,..." | "sinoff:<amp>,<offset>"

    Returns:
        MassFunction

    Raises:
        InvalidInputError: 書式が不正な場合
    """
    text = text.strip()
    if text == "zero":
        return ZERO_MASS
    prefix, sep, body = text.partition(":")
    if not sep or prefix not in _SPEC_PREFIXES or not body.strip():
        raise InvalidInputError(f"質量関数の指定が不正です: {text!r}")
    parameters = tuple(to_float(part) for part in body.split(","))
    return MassFunction(_SPEC_PREFIXES[prefix], parameters)


# ==================== 計量 ====================

@dataclass(frozen=True)
class MetricSample:
    """
    1点での計量とその1階・2階偏微分

    dg[k, i, j] = ∂_k g_ij、ddg[k, l, i, j] = ∂_k ∂_l g_ij
    """

    point: Point4
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray


@dataclass(frozen=True)
class Metric4:
    """
    4×4 の対称なスカラー場の行列

    entries[i][j] と entries[j][i] は同じスカラー場オブジェクトです。
    """

    entries: tuple
    signature_hint: str = "lorentzian"

    def __post_init__(self):
        if len(self.entries) != DIM or any(len(row) != DIM for row in self.entries):
            raise InvalidInputError("計量は 4×4 です")
        for i in range(DIM):
            for j in range(i + 1, DIM):
                if self.entries[i][j] is not self.entries[j][i]:
                    raise InvalidInputError(f"計量が対称ではありません: ({i + 1},{j + 1})")

    @classmethod
    def from_upper(cls, upper: dict, signature_hint: str = "lorentzian") -> "Metric4":
        """上三角の成分 {(i, j): ScalarField} から構成（未指定はゼロ場）"""
        zero = const_field(0.0)
        rows = [[zero] * DIM for _ in range(DIM)]
        for (i, j), entry in upper.items():
            rows[i][j] = entry
            rows[j][i] = entry
        return cls(tuple(tuple(row) for row in rows), signature_hint)

    @classmethod
    def constant(cls, matrix, signature_hint: str = "constant") -> "Metric4":
        """定数行列の計量（照合用の雛形）"""
        matrix = np.asarray(matrix, dtype=float)
        upper = {(i, j): const_field(float(matrix[i, j])) for i in range(DIM) for j in range(i, DIM)}
        return cls.from_upper(upper, signature_hint)

    def sample(self, p: Point4) -> MetricSample:
        """点pで全成分を評価"""
        g = np.empty((DIM, DIM))
        dg = np.empty((DIM, DIM, DIM))
        ddg = np.empty((DIM, DIM, DIM, DIM))
        for i in range(DIM):
            for j in range(i, DIM):
                jet = evaluate(self.entries[i][j], p)
                g[i, j] = g[j, i] = jet.value
                dg[:, i, j] = dg[:, j, i] = jet.grad
                ddg[:, :, i, j] = ddg[:, :, j, i] = jet.hess
        return MetricSample(p, g, dg, ddg)


def vaidya_metric(m: MassFunction) -> Metric4:
    """
    Eddington-Finkelstein座標でのVaidya計量

    g_11 = (2m - r)/r, g_12 = g_21 = -1, g_33 = r², g_44 = r² sin²θ
    """

    def g_uu(p: Point4) -> Jet2:
        r = jet_coord(R, p)
        return (2.0 * m.jet(p) - r) / r

    def g_theta(p: Point4) -> Jet2:
        r = jet_coord(R, p)
        return r * r

    def g_phi(p: Point4) -> Jet2:
        r = jet_coord(R, p)
        return (r * sin(jet_coord(THETA, p))) ** 2

    return Metric4.from_upper({
        (U, U): g_uu,
        (U, R): const_field(-1.0),
        (THETA, THETA): g_theta,
        (PHI, PHI): g_phi,
    })


# ==================== 逆計量 ====================

@dataclass(frozen=True)
class InverseSample:
    """1点での逆計量とその偏微分（添字の並びは MetricSample と同じ）"""

    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray


def inverse_from_sample(sample: MetricSample) -> InverseSample:
    """
    部分ピボット付きLU分解で値を逆行列にし、微分は恒等式で伝播する

    ∂g⁻¹ = -g⁻¹(∂g)g⁻¹
    ∂∂g⁻¹ = g⁻¹(∂g g⁻¹ ∂g + ∂g g⁻¹ ∂g - ∂∂g)g⁻¹

    Raises:
        DegenerateMetricError: |det g| <= DET_MIN の場合
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(sample.g)
    det = float(np.prod(np.diag(lu)))
    if not abs(det) > DET_MIN:
        raise DegenerateMetricError(f"計量が退化しています (|det| = {abs(det):.3e})", sample.point)
    ginv = scipy.linalg.lu_solve((lu, piv), np.eye(DIM))
    dginv = -np.einsum("ab,kbc,cd->kad", ginv, sample.dg, ginv)
    cross = np.einsum("kab,bc,lcd->klad", sample.dg, ginv, sample.dg)
    inner = cross + cross.transpose(1, 0, 2, 3) - sample.ddg
    ddginv = np.einsum("ab,klbc,cd->klad", ginv, inner, ginv)
    return InverseSample(ginv, dginv, ddginv)


def inverse_metric(g: Metric4, p: Point4) -> tuple:
    """
    点pでの逆計量を 4×4 の Jet2 として返す

    Raises:
        DegenerateMetricError: 計量が退化している場合
    """
    inv = inverse_from_sample(g.sample(p))
    return tuple(
        tuple(Jet2(inv.g[a, b], inv.dg[:, a, b], inv.ddg[:, :, a, b]) for b in range(DIM))
        for a in range(DIM)
    )


def closed_form_inverse(m: MassFunction, p: Point4) -> np.ndarray:
    """Vaidya逆計量の閉形式（角度成分は 1/r², 1/(r² sin²θ)）"""
    mass, _, _ = m.evaluate(p.u)
    r, s = p.r, math.sin(p.theta)
    inv = np.zeros((DIM, DIM))
    inv[U, R] = inv[R, U] = -1.0
    inv[R, R] = 1.0 - 2.0 * mass / r
    inv[THETA, THETA] = 1.0 / r ** 2
    inv[PHI, PHI] = 1.0 / (r ** 2 * s ** 2)
    return inv


def printed_inverse(m: MassFunction, p: Point4) -> np.ndarray:
    """転記版の逆計量の行列（角度成分が r², r² sin²θ のまま）"""
    inv = closed_form_inverse(m, p)
    inv[THETA, THETA] = p.r ** 2
    inv[PHI, PHI] = p.r ** 2 * math.sin(p.theta) ** 2
    return inv


# ==================== 曲率 ====================

@dataclass(frozen=True)
class CurvatureBundle:
    """
    1点での曲率一式

    Attributes:
        christoffel: Γ^a_bc を [a, b, c] に格納
        christoffel_grad: ∂_e Γ^a_bc を [e, a, b, c] に格納
        riemann: R^a_bcd
        riemann_lowered: R_abcd
        ricci: Ric_bd = R^a_bad
        scalar: R = g^bd Ric_bd
    """

    point: Point4
    christoffel: np.ndarray
    christoffel_grad: np.ndarray
    riemann: np.ndarray
    riemann_lowered: np.ndarray
    ricci: np.ndarray
    scalar: float

    def symmetry_defects(self) -> dict[str, float]:
        """対称性・第1Bianchi恒等式からのずれの最大値"""
        low = self.riemann_lowered
        return {
            "christoffel_symmetry": float(np.max(np.abs(self.christoffel - self.christoffel.transpose(0, 2, 1)))),
            "antisymmetry_first_pair": float(np.max(np.abs(low + low.transpose(1, 0, 2, 3)))),
            "antisymmetry_second_pair": float(np.max(np.abs(low + low.transpose(0, 1, 3, 2)))),
            "pair_exchange": float(np.max(np.abs(low - low.transpose(2, 3, 0, 1)))),
            "first_bianchi": float(np.max(np.abs(
                low + np.einsum("acdb->abcd", low) + np.einsum("adbc->abcd", low)
            ))),
            "ricci_symmetry": float(np.max(np.abs(self.ricci - self.ricci.T))),
        }


def curvature_from_sample(sample: MetricSample, inverse: InverseSample | None = None) -> CurvatureBundle:
    """
    計量の値と偏微分から曲率を組み立てる

    Riemannの符号は RIEMANN_SIGN で固定（Ric_uu = +2m'/r² になる向き）。
    """
    inv = inverse if inverse is not None else inverse_from_sample(sample)
    dg, ddg = sample.dg, sample.ddg

    # 第1種: [d, b, c] = ½(∂_b g_dc + ∂_c g_db - ∂_d g_bc)
    lower = 0.5 * (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg)
    dlower = 0.5 * (ddg.transpose(0, 2, 1, 3) + ddg.transpose(0, 2, 3, 1) - ddg)
    gamma = np.einsum("ad,dbc->abc", inv.g, lower)
    dgamma = np.einsum("ead,dbc->eabc", inv.dg, lower) + np.einsum("ad,edbc->eabc", inv.g, dlower)

    riemann = RIEMANN_SIGN * (
        np.einsum("cadb->abcd", dgamma)
        - np.einsum("dacb->abcd", dgamma)
        + np.einsum("ace,edb->abcd", gamma, gamma)
        - np.einsum("ade,ecb->abcd", gamma, gamma)
    )
    lowered = np.einsum("ae,ebcd->abcd", sample.g, riemann)
    ricci = np.einsum("abad->bd", riemann)
    scalar = float(np.einsum("bd,bd->", inv.g, ricci))
    return CurvatureBundle(sample.point, gamma, dgamma, riemann, lowered, ricci, scalar)


def curvature(g: Metric4, p: Point4) -> CurvatureBundle:
    """
    点pでの曲率一式

    Raises:
        DegenerateMetricError: 計量が退化している場合
    """
    return curvature_from_sample(g.sample(p))


def closed_form_ricci(m: MassFunction, p: Point4) -> np.ndarray:
    """Ricci行列の閉形式（(1,1) 成分だけが 2m'/r²）"""
    _, dm, _ = m.evaluate(p.u)
    ricci = np.zeros((DIM, DIM))
    ricci[U, U] = 2.0 * dm / p.r ** 2
    return ricci


# ==================== Riemann成分表との照合 ====================

def _r1212(m, dm, r, s):
    return -2.0 * m / r ** 3


def _r1313(m, dm, r, s):
    return (-2.0 * m + r ** 2 * dm - m) / r ** 2


def _r1323(m, dm, r, s):
    return m / r


def _r1424(m, dm, r, s):
    return m * s ** 2 / r


def _r1414(m, dm, r, s):
    return -(2.0 * m ** 2 - m * r + r ** 2 * dm) * s ** 2 / r ** 2


def _r3434(m, dm, r, s):
    return 2.0 * m * r * s ** 2


# (ラベル, 0始まりの添字, 成分式)
RIEMANN_LISTED = (
    ("R_1212", (U, R, U, R), _r1212),
    ("R_1313", (U, THETA, U, THETA), _r1313),
    ("R_1323", (U, THETA, R, THETA), _r1323),
    ("R_1424", (U, PHI, R, PHI), _r1424),
    ("R_1414", (U, PHI, U, PHI), _r1414),
    ("R_3434", (THETA, PHI, THETA, PHI), _r3434),
)


@dataclass(frozen=True)
class OracleEntry:
    """成分表の1成分と数値計算の比較"""

    label: str
    indices: tuple[int, int, int, int]
    listed: float
    numeric: float

    def discrepancy(self, sign: float) -> float:
        """符号 sign を数値側に掛けたときの差"""
        return abs(sign * self.numeric - self.listed)


@dataclass(frozen=True)
class RiemannOracleReport:
    """
    成分表との照合結果

    best_sign は全成分の差の和を最小にする全体符号（同点なら +1）。
    """

    point: Point4
    entries: tuple[OracleEntry, ...]
    best_sign: float

    @property
    def max_discrepancy(self) -> float:
        return max(entry.discrepancy(self.best_sign) for entry in self.entries)

    @property
    def worst_entry(self) -> OracleEntry:
        return max(self.entries, key=lambda entry: entry.discrepancy(self.best_sign))


def riemann_oracle_from_bundle(m: MassFunction, bundle: CurvatureBundle) -> RiemannOracleReport:
    """計算済みの曲率一式を成分表と比較"""
    p = bundle.point
    mass, dm, _ = m.evaluate(p.u)
    s = math.sin(p.theta)
    entries = tuple(
        OracleEntry(label, indices, float(formula(mass, dm, p.r, s)), float(bundle.riemann_lowered[indices]))
        for label, indices, formula in RIEMANN_LISTED
    )
    plus = sum(entry.discrepancy(1.0) for entry in entries)
    minus = sum(entry.discrepancy(-1.0) for entry in entries)
    return RiemannOracleReport(p, entries, 1.0 if plus <= minus else -1.0)


def compare_riemann_oracle(m: MassFunction, p: Point4) -> RiemannOracleReport:
    """
    転記版のRiemann成分表6個を数値計算と両方の符号で比較

    不一致は例外ではなく報告の内容です。
    """
    report = riemann_oracle_from_bundle(m, curvature(vaidya_metric(m), p))
    worst = report.worst_entry
    logger.debug(
        "[CURVATURE] 成分表照合 %s: 最大差 %.3e (%s, 符号 %+g)",
        p, report.max_discrepancy, worst.label, report.best_sign,
    )
    return report
