"""
設定・定数モジュール

検証エンジン全体で使用される設定値と定数を定義します。
環境変数や設定ファイルは使いません（CLIフラグのみで上書きします）。
"""

import math

# ツール情報
TOOL_NAME = "vaidya-crb-verifier"
TOOL_VERSION = "1.0.0"
TOOL_DESCRIPTION = "Vaidya時空上の共形Ricci-Bourguignonソリトン検証エンジン"

# ==================== 座標・定義域 ====================

# 座標の並び (u, r, θ, φ) = 表示上の添字 (1, 2, 3, 4)
COORD_NAMES = ("u", "r", "theta", "phi")
DIM = 4

# r = 0 の特異点と sinθ = 0 を除外する
R_MIN = 1e-3
THETA_MIN = 1e-3

# tan の極判定（|cos| がこれ未満なら特異）
POLE_TOL = 1e-9

# 計量の非退化判定
DET_MIN = 1e-12

# Riemannの符号規約（Ric_uu = +2m'/r² となる向き）
RIEMANN_SIGN = -1.0

# ==================== 標準グリッド ====================

# (開始, 終了, 点数)
DEFAULT_GRID = {
    "u": (0.0, 2.0, 4),
    "r": (1.0, 4.0, 4),
    "theta": (math.pi / 4, 3 * math.pi / 4, 3),
    "phi": (0.0, 3 * math.pi / 2, 3),
}

# 変数分離族は tan^Γθ の極を避けて θ < π/2 の帯で評価する
SEPARATION_GRID = {
    "u": (0.0, 2.0, 2),
    "r": (1.0, 4.0, 2),
    "theta": (math.pi / 8, 3 * math.pi / 8, 3),
    "phi": (0.0, 1.5, 3),
}

# ==================== 既定パラメータ ====================

# κ = 2β - (p + 1/2) = 2
DEFAULT_BETA = 1.25
DEFAULT_P = 0.0
DEFAULT_ALPHA = 0.0

DEFAULT_PSI = 0.0
DEFAULT_PSI3 = 0.0
DEFAULT_PSI2_POTENTIAL = 0.0

DEFAULT_GAMMA = 1.0
DEFAULT_PSI1_SEPARATION = 1.0
DEFAULT_PSI2_SEPARATION = 0.0

# コマンド別の既定質量関数リスト
DEFAULT_MASSES = ("zero", "const:1", "linear:1,0", "sinoff:1,2")
DEFAULT_PROBE_MASSES = ("zero", "const:1", "linear:1,0")

# report-all で分類する β の値
CLASSIFY_SAMPLE_BETAS = (-1.0, -0.3, 0.0, 0.5, 2.0)

# ==================== 許容誤差 ====================

DEFAULT_TOLERANCES = {
    "curvature": 1e-9,       # Ricci・スカラー曲率・Riemann対称性
    "inverse": 1e-12,        # g·g⁻¹ = I
    "fd": 1e-6,              # 差分による照合
    "lie": 1e-9,             # 一般公式と転記式の一致
    "correspondence": 1e-9,  # 方程式と残差成分の比の当てはめ
    "soliton": 1e-9,         # ソリトン残差
    "pde": 1e-12,            # 10本の方程式の残差
    "potential": 1e-10,      # ∇f = X
    "gradient": 1e-12,       # 逆計量経由と閉形式の勾配の一致
    "separation": 1e-10,     # 変数分離PDE残差
    "forcing": 1e-3,         # Γ>0 で残るべき強制項の下限
    "fit_zero": 1e-8,        # m=0 の残差下限
    "fit_separation": 1e3,   # m≠0 と m=0 の残差比
    "fit_pattern": 1e-6,     # 復元した係数と解かれた解の差
}

# 差分照合のステップ
FD_STEP = 1e-5

# ==================== 最小二乗 ====================

# ピボット付きQRの数値ランク判定（|R_kk| <= RANK_RTOL·|R_00| を落とす）
RANK_RTOL = 1e-10

# 基底の線形独立性判定
BASIS_SV_MIN = 1e-8

# ==================== 乱数 ====================

# ランダムなベクトル場による検査を再現可能にする
RANDOM_SEED = 20240601
RANDOM_FIELD_COUNT = 50

# Lie微分の照合で1つのベクトル場を評価する点の数
LIE_SAMPLE_POINTS = 6

# 方程式と残差成分の比を当てはめる質量関数（m, m' がともに非零）
CORRESPONDENCE_MASS = "sinoff:1,2"
