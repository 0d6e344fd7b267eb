"""
最小二乗探索モジュール

基底の線形結合でソリトンのベクトル場を探し、残差の下限（フロア）を測ります。
ソリトン方程式は X について線形なので、設計行列を組んで列ピボット付きQR分解で
一度解くだけで済みます。
"""

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from config import BASIS_SV_MIN, COORD_NAMES, DEFAULT_GRID, DEFAULT_TOLERANCES, DIM, RANK_RTOL
from geometry import MassFunction, curvature_from_sample, inverse_from_sample, vaidya_metric
from jet import R, THETA, U, Jet2, Point4, coordinate_jets, const_field, cos, jet_coord, sin
from soliton import SolitonParams, VectorField4, lie_derivative_from_sample, soliton_background
from utils import InvalidInputError, UnderdeterminedSystemError, format_component

logger = logging.getLogger(__name__)

# 上三角成分 (0,0), (0,1), ..., (3,3) の順
UPPER_INDICES = tuple((int(i), int(j)) for i, j in zip(*np.triu_indices(DIM)))


# ==================== サンプルグリッド ====================

def _format_number(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class SampleGrid:
    """
    座標ごとの等間隔グリッド

    Attributes:
        ranges: 座標名 -> (開始, 終了, 点数)
    """

    ranges: tuple[tuple[str, float, float, int], ...]

    def __post_init__(self):
        names = tuple(name for name, _, _, _ in self.ranges)
        if names != COORD_NAMES:
            raise InvalidInputError(f"グリッドの座標は {COORD_NAMES} の順です: {names}")
        for name, _, _, count in self.ranges:
            if count < 1:
                raise InvalidInputError(f"{name} の点数は1以上です: {count}")
        # 全点が定義域内であることをここで確かめる
        self.points()

    @classmethod
    def from_ranges(cls, ranges: dict) -> "SampleGrid":
        return cls(tuple(
            (name, float(ranges[name][0]), float(ranges[name][1]), int(ranges[name][2]))
            for name in COORD_NAMES
        ))

    @classmethod
    def default(cls) -> "SampleGrid":
        return cls.from_ranges(DEFAULT_GRID)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(start, stop, count) for _, start, stop, count in self.ranges]

    def points(self) -> list[Point4]:
        """u, r, θ, φ の順に辞書式に並べた点"""
        return [Point4(*values) for values in itertools.product(*self.axes())]

    @property
    def size(self) -> int:
        return math.prod(count for _, _, _, count in self.ranges)

    @property
    def identifier(self) -> str:
        """--grid と同じ書式"""
        return ";".join(
            f"{name}:{_format_number(start)},{_format_number(stop)},{count}"
            for name, start, stop, count in self.ranges
        )


# ==================== 基底 ====================

@dataclass(frozen=True)
class BasisColumn:
    """基底の1列（ラベルと1成分だけを持つベクトル場）"""

    label: str
    field: VectorField4


@dataclass(frozen=True)
class BasisSpec:
    """成分 (A, B, C, D) ごとの基底関数の並び"""

    name: str
    columns: tuple[BasisColumn, ...]

    @classmethod
    def from_components(cls, name: str, components: dict) -> "BasisSpec":
        """
        {"A": [(ラベル, ScalarField), ...], ...} から構成

        列のラベルは "A:u" のように成分名を前に付けます。
        """
        columns = []
        for index, component in enumerate("ABCD"):
            for label, scalar in components.get(component, []):
                columns.append(BasisColumn(f"{component}:{label}", VectorField4.single(index, scalar)))
        return cls(name, tuple(columns))

    @property
    def labels(self) -> list[str]:
        return [column.label for column in self.columns]

    def __len__(self) -> int:
        return len(self.columns)


def _u(p: Point4) -> Jet2:
    return jet_coord(U, p)


def _r(p: Point4) -> Jet2:
    return jet_coord(R, p)


def _sin_u(p: Point4) -> Jet2:
    return sin(jet_coord(U, p))


def _cos_u(p: Point4) -> Jet2:
    return cos(jet_coord(U, p))


def _sin_theta(p: Point4) -> Jet2:
    return sin(jet_coord(THETA, p))


def _cos_theta_sin_phi(p: Point4) -> Jet2:
    _, _, theta, phi = coordinate_jets(p)
    return cos(theta) * sin(phi)


def _cos_theta_cos_phi(p: Point4) -> Jet2:
    _, _, theta, phi = coordinate_jets(p)
    return cos(theta) * cos(phi)


def _sin_cos_theta_sin_phi(p: Point4) -> Jet2:
    _, _, theta, phi = coordinate_jets(p)
    return sin(theta) * cos(theta) * sin(phi)


def _sin_cos_theta_cos_phi(p: Point4) -> Jet2:
    _, _, theta, phi = coordinate_jets(p)
    return sin(theta) * cos(theta) * cos(phi)


ONE = const_field(1.0)


def minimal_basis() -> BasisSpec:
    """解かれた解を張る最小の基底 A: [1, u], B: [r], C: [], D: [1]"""
    return BasisSpec.from_components("minimal", {
        "A": [("1", ONE), ("u", _u)],
        "B": [("r", _r)],
        "D": [("1", ONE)],
    })


def extended_basis() -> BasisSpec:
    """
    minimal を含む拡張基底

    D の角度部分は θ = π/2 を含むグリッドでも評価できるよう sinθcosθ を使います。
    """
    return BasisSpec.from_components("extended", {
        "A": [("1", ONE), ("u", _u), ("r", _r), ("sin u", _sin_u), ("cos u", _cos_u)],
        "B": [("r", _r), ("1", ONE), ("u", _u)],
        "C": [("sin θ", _sin_theta), ("cos θ sin φ", _cos_theta_sin_phi), ("cos θ cos φ", _cos_theta_cos_phi)],
        "D": [("1", ONE), ("sin θ cos θ sin φ", _sin_cos_theta_sin_phi), ("sin θ cos θ cos φ", _sin_cos_theta_cos_phi)],
    })


BASIS_PRESETS = {
    "minimal": minimal_basis,
    "extended": extended_basis,
}


def basis_preset(name: str) -> BasisSpec:
    """
    名前から基底のプリセットを取得

    Raises:
        InvalidInputError: 未知のプリセット名
    """
    if name not in BASIS_PRESETS:
        raise InvalidInputError(f"未知の基底です: {name!r} (minimal | extended)")
    return BASIS_PRESETS[name]()


def _column_scale(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=0)
    return np.where(norms > 0.0, norms, 1.0)


def check_basis_independence(basis: BasisSpec, grid: SampleGrid) -> float:
    """
    基底のベクトル場の値を並べた行列（列を正規化）の最小特異値

    Killing場の列は設計行列ではゼロ列になるため、独立性は場の値で判定します。
    BASIS_SV_MIN より大きければ独立とみなします。
    """
    if not basis.columns:
        raise InvalidInputError("基底が空です")
    rows = []
    for p in grid.points():
        rows.append(np.array([[jet.value for jet in column.field.jets(p)] for column in basis.columns]).T)
    values = np.vstack(rows)
    smallest = float(scipy.linalg.svdvals(values / _column_scale(values))[-1])
    if smallest <= BASIS_SV_MIN:
        logger.warning("[FIT] 基底 %s が線形従属です (最小特異値 %.3e)", basis.name, smallest)
    return smallest


# ==================== 設計行列 ====================

@dataclass(frozen=True)
class LinearSystem:
    """
    design · x ≈ rhs

    行は点ごとに上三角10成分（点が外側、成分が内側）。
    """

    design: np.ndarray
    rhs: np.ndarray
    row_labels: tuple[tuple[int, tuple[int, int]], ...]
    column_labels: tuple[str, ...]
    points: tuple[Point4, ...]
    grid_id: str = ""
    basis_name: str = ""
    mass: str = ""


def assemble_design(basis: BasisSpec, grid: SampleGrid | list[Point4], m: MassFunction, params: SolitonParams) -> LinearSystem:
    """
    ソリトン残差の X に対する線形性から設計行列を組み立てる

    右辺は -(2S - κg - 2αRg) の上三角成分です。

    Raises:
        InvalidInputError: 基底またはグリッドが空の場合
    """
    points = grid.points() if isinstance(grid, SampleGrid) else list(grid)
    if not basis.columns:
        raise InvalidInputError("基底が空です")
    if not points:
        raise InvalidInputError("グリッドが空です")
    g = vaidya_metric(m)
    rows, rhs, labels = [], [], []
    upper = tuple(np.array(axis) for axis in zip(*UPPER_INDICES))
    for index, p in enumerate(points):
        sample = g.sample(p)
        bundle = curvature_from_sample(sample, inverse_from_sample(sample))
        background = soliton_background(sample, bundle, params)
        lie = [lie_derivative_from_sample(sample, column.field)[upper] for column in basis.columns]
        rows.append(np.column_stack(lie))
        rhs.append(-background[upper])
        labels.extend((index, component) for component in UPPER_INDICES)
    return LinearSystem(
        design=np.vstack(rows),
        rhs=np.concatenate(rhs),
        row_labels=tuple(labels),
        column_labels=tuple(basis.labels),
        points=tuple(points),
        grid_id=grid.identifier if isinstance(grid, SampleGrid) else "points",
        basis_name=basis.name,
        mass=m.spec,
    )


# ==================== 最小二乗 ====================

@dataclass(frozen=True)
class FitResult:
    """
    最小二乗の結果

    Attributes:
        coefficients: 列ラベル -> 係数
        residual_rms: 全行の残差のRMS
        residual_max: 残差の絶対値の最大
        condition: 採用したR対角の最大/最小
        rank: 数値ランク
        worst_point: 残差が最大の点
        worst_component: その成分（0始まり）
    """

    coefficients: dict
    residual_rms: float
    residual_max: float
    condition: float
    rank: int
    worst_point: Point4 | None
    worst_component: tuple[int, int] | None
    grid_id: str = ""
    basis_name: str = ""
    mass: str = ""

    def to_dict(self) -> dict:
        return {
            "mass": self.mass,
            "basis": self.basis_name,
            "grid": self.grid_id,
            "coefficients": dict(self.coefficients),
            "residual_rms": self.residual_rms,
            "residual_max": self.residual_max,
            "condition": self.condition,
            "rank": self.rank,
            "worst_component": format_component(*self.worst_component) if self.worst_component else None,
        }


def solve_least_squares(system: LinearSystem) -> FitResult:
    """
    列を正規化してから列ピボット付きQR分解で ‖design·x - rhs‖ を最小化

    数値ランクから外れた列の係数は0になります。

    Raises:
        UnderdeterminedSystemError: 行数が列数より少ない場合
    """
    design, rhs = system.design, system.rhs
    rows, cols = design.shape
    if rows < cols:
        raise UnderdeterminedSystemError(f"方程式 {rows} 本に対し未知数が {cols} 個あります")

    scale = _column_scale(design)
    q, r, perm = scipy.linalg.qr(design / scale, mode="economic", pivoting=True)
    diagonal = np.abs(np.diag(r))
    if diagonal.size == 0 or diagonal[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diagonal > RANK_RTOL * diagonal[0]))

    scaled = np.zeros(cols)
    if rank > 0:
        scaled[perm[:rank]] = scipy.linalg.solve_triangular(r[:rank, :rank], q[:, :rank].T @ rhs)
    x = scaled / scale

    residual = design @ x - rhs
    residual_max = float(np.max(np.abs(residual))) if residual.size else 0.0
    residual_rms = float(np.sqrt(np.mean(residual ** 2))) if residual.size else 0.0
    condition = float(diagonal[0] / diagonal[rank - 1]) if rank > 0 else math.inf

    worst_point = worst_component = None
    if residual.size:
        worst = int(np.argmax(np.abs(residual)))
        point_index, worst_component = system.row_labels[worst]
        worst_point = system.points[point_index]

    logger.debug(
        "[FIT] %s / %s: rank %d/%d, RMS %.3e, max %.3e",
        system.mass, system.basis_name, rank, cols, residual_rms, residual_max,
    )
    return FitResult(
        coefficients={label: float(c) for label, c in zip(system.column_labels, x)},
        residual_rms=residual_rms,
        residual_max=residual_max,
        condition=condition,
        rank=rank,
        worst_point=worst_point,
        worst_component=worst_component,
        grid_id=system.grid_id,
        basis_name=system.basis_name,
        mass=system.mass,
    )


def fit(basis: BasisSpec, grid: SampleGrid, m: MassFunction, params: SolitonParams) -> FitResult:
    return solve_least_squares(assemble_design(basis, grid, m, params))


def solved_pattern(result: FitResult, kappa: float) -> float:
    """
    係数が解かれた解 (A:u = κ/2, B:r = κ/2, 他は0) からどれだけずれているか

    Killing場の列（A:1, D:1）はピボットで0になるため、Ψ と ψ₃ は0として比べます。
    """
    expected = {"A:u": kappa / 2.0, "B:r": kappa / 2.0}
    return max(
        (abs(value - expected.get(label, 0.0)) for label, value in result.coefficients.items()),
        default=0.0,
    )


# ==================== 非存在の探索 ====================

@dataclass(frozen=True)
class ProbeReport:
    """
    質量関数ごとの残差フロアの比較

    m ≡ 0 の質量関数（係数がすべて0のものを含む）はどれも基準として扱います。
    passed = すべての基準で フロア < fit_zero かつ すべての非零質量で フロア(m) > separation · zero_floor
    """

    basis_name: str
    grid_id: str
    results: tuple[FitResult, ...]
    fit_zero: float
    separation: float
    passed: bool = False
    zero_masses: tuple[str, ...] = ("zero",)

    @property
    def zero_floor(self) -> float:
        """基準（m ≡ 0）のフロアのうち最大のもの"""
        return max(result.residual_rms for result in self.results if result.mass in self.zero_masses)

    def floors(self) -> dict[str, float]:
        return {result.mass: result.residual_rms for result in self.results}


def nonexistence_probe(
    mass_list: list[MassFunction],
    basis: BasisSpec,
    grid: SampleGrid,
    params: SolitonParams,
    fit_zero: float = DEFAULT_TOLERANCES["fit_zero"],
    separation: float = DEFAULT_TOLERANCES["fit_separation"],
) -> ProbeReport:
    """
    質量関数ごとに残差フロアを測り、m = 0 の場合だけ解があることを確かめる

    Raises:
        InvalidInputError: 質量関数のリストに m ≡ 0 のものが含まれていない場合
    """
    if not any(m.is_zero() for m in mass_list):
        raise InvalidInputError("非存在の探索には基準として m ≡ 0 の質量関数が必要です")
    zero_masses = tuple(m.spec for m in mass_list if m.is_zero())
    results = tuple(fit(basis, grid, m, params) for m in mass_list)
    zero_floor = max(result.residual_rms for result in results if result.mass in zero_masses)
    passed = zero_floor < fit_zero and all(
        result.residual_rms > separation * zero_floor for result in results if result.mass not in zero_masses
    )
    for result in results:
        logger.info("[FIT] フロア %s (%s): %.3e", result.mass, basis.name, result.residual_rms)
    return ProbeReport(basis.name, grid.identifier, results, fit_zero, separation, passed, zero_masses)
