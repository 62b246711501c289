"""数値許容誤差と既定パラメータ.

ライブラリ全体で共有する定数をここに集約する。
CLI の実行時設定（スレッド数・出力先）は環境変数から読み込む。
"""
import os


# 制約残差（U² = 1, A² = 0, B A + A B = 0 など）の既定許容誤差
CONSTRAINT_TOL = 1e-9

# 求積オラクルとの比較に使う相対許容誤差（打ち切り誤差が支配的）
ORACLE_RTOL = 1e-6

# 極の衝突判定（絶対値）
POLE_COLLISION_TOL = 1e-8

# 階数1判定: σ₂ ≤ RANK_RTOL · σ₁
RANK_RTOL = 1e-8

# 固有値の虚部がこれを超えたら実スペクトルとみなさない
REAL_SPECTRUM_TOL = 1e-8

# 単純スペクトル判定: 最小ギャップ > SIMPLICITY_TOL · max(1, 広がり)
SIMPLICITY_TOL = 1e-6

# 固有ベクトル行列の条件数がこれを超えたらグリッド再フィットに切り替える
CONDITION_LIMIT = 1e10

# Im λ ≥ -INJECTIVITY_MARGIN の固有値は実固有値とみなしエラー
INJECTIVITY_MARGIN = 1e-12

# 多ソリトン構成の不動点反復
FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 200

# 最小極間距離 ≥ SEPARATION_FACTOR · max_j 1/(1 - v_j²) を要求する
SEPARATION_FACTOR = 50.0

# 検証グリッド: 一様部分の点数と、極の実部まわりのオフセット（|Im z| 単位）
GRID_UNIFORM_POINTS = 401
GRID_POLE_OFFSETS = (0.0, 0.5, 1.0, 2.0)

# 極の追跡（時刻間の最近傍マッチング）で許す移動量の割合
POLE_MATCH_FRACTION = 0.5


def num_threads() -> int:
    """並列評価に使うワーカー数（HWM_NUM_THREADS、既定は CPU 数）."""
    value = os.environ.get("HWM_NUM_THREADS", "")
    if value.strip().isdigit() and int(value) > 0:
        return int(value)
    return os.cpu_count() or 1


def output_dir() -> str:
    """既定の出力ディレクトリ（HWM_OUTPUT_DIR、既定は outputs）."""
    return os.environ.get("HWM_OUTPUT_DIR", "outputs")
