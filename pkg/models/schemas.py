"""入出力・レポートのスキーマ定義.

設計方針:
  数値計算の本体は numpy 配列を保持する frozen dataclass で行い、
  ファイルに書き出すもの・ワークフローが返すレポートはすべてここの pydantic モデルを通す。
  複素数は {"re", "im"} オブジェクト、行列は行優先の入れ子リストで表す。
  出力 JSON には時刻などの非決定的な値を含めない（同じ入力から同じバイト列）。
"""
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class ComplexJSON(BaseModel):
    """複素数."""

    model_config = ConfigDict(extra="forbid")

    re: float = Field(default=0.0, description="実部")
    im: float = Field(default=0.0, description="虚部")

    @classmethod
    def of(cls, value: complex) -> "ComplexJSON":
        value = complex(value)
        return cls(re=value.real, im=value.imag)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


ComplexMatrixJSON = List[List[ComplexJSON]]


# ============================================================
# 有理写像
# ============================================================
class PoleJSON(BaseModel):
    """極と留数行列 A（階数1・冪零、読み込み時に A = e ξ* へ分解する）."""

    model_config = ConfigDict(extra="forbid")

    z: ComplexJSON = Field(description="下半平面の極")
    A: ComplexMatrixJSON = Field(description="留数行列（行優先）")


class RationalMapJSON(BaseModel):
    """Grassmann 値有理写像のワイヤ形式（未知のキーはエラー）."""

    model_config = ConfigDict(extra="forbid")

    d: int = Field(ge=1, description="行列サイズ")
    k: int = Field(ge=0, description="Grassmann 指数")
    U_inf: ComplexMatrixJSON = Field(description="無限遠での値 U∞")
    poles: List[PoleJSON] = Field(default_factory=list, description="極と留数（(Re z, Im z) 順）")
    sphere: bool = Field(default=False, description="Pauli 符号化された球面写像かどうか")


class ValidationReport(BaseModel):
    """制約検証の結果（残差は Frobenius ノルムの最大値）."""

    passed: bool = Field(description="全残差が許容誤差以下か")
    tol: float = Field(description="使用した許容誤差")
    grid_points: int = Field(default=0, description="検証グリッドの点数")
    involution_residual: float = Field(default=0.0, description="max ‖U(x)² - 1‖")
    hermitian_residual: float = Field(default=0.0, description="max ‖U(x) - U(x)*‖")
    nilpotency_residual: float = Field(default=0.0, description="max ‖A_j²‖")
    anticommutator_residual: float = Field(default=0.0, description="max ‖B_j A_j + A_j B_j‖")
    trace_deviation: float = Field(default=0.0, description="|Tr U∞ - (d - 2k)|")
    target_residual: float = Field(default=0.0, description="U∞ の Hermite 性・対合性の残差")
    min_pole_distance: Optional[float] = Field(default=None, description="極間の最小距離（N ≤ 1 では null）")
    violations: List[str] = Field(default_factory=list, description="違反した検査の一覧")


# ============================================================
# スペクトル・保存量
# ============================================================
class SpectralReport(BaseModel):
    """T|𝔥₁ の離散スペクトル."""

    eigenvalues: List[float] = Field(default_factory=list, description="T の固有値（昇順）")
    simple: bool = Field(default=True, description="T の固有値が単純か")
    simple_squared: bool = Field(default=True, description="T² の固有値が単純か（判別式の基準）")
    min_gap: Optional[float] = Field(default=None, description="T の固有値の最小間隔")
    discriminant: ComplexJSON = Field(default_factory=lambda: ComplexJSON(re=1.0), description="Id - T² の特性多項式の判別式")
    traces: Dict[str, float] = Field(default_factory=dict, description="保存量 I_p（キーは p）")
    essential_spectrum: List[float] = Field(default_factory=lambda: [-1.0, 1.0], description="本質スペクトル（常に {±1}）")


class ConservationRow(BaseModel):
    """1時刻分の保存量ドリフト."""

    t: float
    spectrum_drift: float = Field(default=0.0, description="最適対応後の固有値の最大ずれ")
    trace_drift: Dict[str, float] = Field(default_factory=dict, description="I_p のずれ")
    energy_drift: float = Field(default=0.0, description="エネルギーのずれ")
    constraint_residual: float = Field(default=0.0, description="グリッド上の max ‖U² - 1‖")
    max_im_pole: Optional[float] = Field(default=None, description="max Im z（負であるべき）")
    fallback: bool = Field(default=False, description="グリッド再フィットを使ったか")


class ConservationReport(BaseModel):
    """軌道全体の保存量ドリフト表."""

    rows: List[ConservationRow] = Field(default_factory=list)
    max_spectrum_drift: float = 0.0
    max_trace_drift: float = 0.0
    max_energy_drift: float = 0.0
    max_constraint_residual: float = 0.0


# ============================================================
# ソリトン分解
# ============================================================
class SolitonOutput(BaseModel):
    """解決されたソリトン1個."""

    v: float = Field(description="速度")
    y: float = Field(description="t = 0 での中心")
    delta: float = Field(description="深さ（> 0）")
    A: ComplexMatrixJSON = Field(description="留数行列")
    solitary_residual: float = Field(default=0.0, description="孤立波恒等式の残差")


class ConvergenceRow(BaseModel):
    """resolution_error の1行."""

    t: float
    sup: float = Field(description="グリッド上の sup ノルム誤差")
    Hs: Dict[str, float] = Field(default_factory=dict, description="Ḣ^s 誤差（キーは s）")


class ResolutionReportOutput(BaseModel):
    """ソリトン分解のレポート."""

    solitons: List[SolitonOutput] = Field(default_factory=list)
    w: List[ComplexJSON] = Field(default_factory=list, description="摂動データ w_n")
    convergence: List[ConvergenceRow] = Field(default_factory=list)
    slopes: Dict[str, float] = Field(default_factory=dict, description="誤差の log-log 傾き")


# ============================================================
# 実行設定
# ============================================================
class CayleyBasisConfig(BaseModel):
    """Cayley 基底による離散化の設定."""

    M: int = Field(default=64, ge=4, description="ℂ^d 成分あたりの基底関数の数")
    oversample: int = Field(default=8, ge=2, description="FFT 標本点数 = oversample · M")
    rank_tol: float = Field(default=1e-8, gt=0, description="Hankel 数値階数の相対閾値")


class RunConfig(BaseModel):
    """CLI 1回分の実行設定（JSON ファイルからも読み込める）."""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(default="run", description="出力ファイル名の接頭辞")
    command: Literal["build", "evolve", "spectrum", "resolve", "check"] = Field(default="build")
    kind: Literal["constant", "single", "multi", "stereographic", "random"] = Field(default="single")
    input_map: Optional[str] = Field(default=None, description="入力写像 JSON のパス")
    output_dir: Optional[str] = Field(default=None, description="出力ディレクトリ（未指定なら HWM_OUTPUT_DIR）")

    d: int = Field(default=2, ge=1)
    k: int = Field(default=1, ge=0)
    v: List[float] = Field(default_factory=lambda: [0.5], description="速度（single は先頭のみ）")
    y: List[float] = Field(default_factory=lambda: [0.0], description="中心")
    delta: float = Field(default=1.0, gt=0, description="single の深さ")
    P: List[ComplexJSON] = Field(default_factory=list, description="立体射影の分子（定数項から）")
    Q: List[ComplexJSON] = Field(default_factory=list, description="立体射影の分母（定数項から）")
    N: int = Field(default=2, ge=1, description="random の極の数")
    seed: int = Field(default=0, description="乱数シード")

    times: List[float] = Field(default_factory=lambda: [0.0, 1.0, 10.0])
    t_list: List[float] = Field(default_factory=lambda: [1e2, 1e3, 1e4])
    s_list: List[float] = Field(default_factory=lambda: [0.5, 1.0])
    x_min: float = Field(default=-20.0)
    x_max: float = Field(default=20.0)
    grid_points: int = Field(default=201, ge=2)
    tol: float = Field(default=1e-9, gt=0)
    suite: Literal["fast", "full"] = Field(default="fast")
    cayley: CayleyBasisConfig = Field(default_factory=CayleyBasisConfig)

    @field_validator("v")
    @classmethod
    def _check_velocities(cls, values: List[float]) -> List[float]:
        for value in values:
            if not -1.0 < value < 1.0:
                raise ValueError(f"速度は (-1, 1) の範囲である必要があります: {value}")
        return values


class CheckResult(BaseModel):
    """不変量検査1件."""

    name: str
    passed: bool
    value: float = Field(default=0.0, description="測定値")
    threshold: float = Field(default=0.0, description="合格閾値")
    detail: str = Field(default="", description="補足（スキップ理由など）")


class CheckReport(BaseModel):
    """不変量スイートの集計."""

    suite: str = Field(default="fast")
    passed: bool = Field(default=True)
    checks: List[CheckResult] = Field(default_factory=list)
