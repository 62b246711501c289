"""例外と警告の定義.

各例外は CLI の終了コード契約（0: 正常, 2: 検証, 3: 時間発展, 4: スペクトル）を
`exit_code` として持つ。
"""
from typing import Optional


class HWMError(Exception):
    """本パッケージの全例外の基底クラス."""

    exit_code = 1


class ConstraintViolationError(HWMError):
    """有理写像が Grassmann 制約を満たさない."""

    exit_code = 2

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class RankError(ConstraintViolationError):
    """留数行列が階数1の冪零行列でない."""


class StereographicError(ConstraintViolationError):
    """立体射影パラメータ (P, Q) が前提条件を満たさない."""


class SeparationError(ConstraintViolationError):
    """多ソリトン構成の極間距離が不足している."""


class ConvergenceError(ConstraintViolationError):
    """不動点反復が収束しない."""

    def __init__(self, message: str, pair: Optional[tuple] = None, epsilon: float = 0.0):
        super().__init__(message)
        self.pair = pair
        self.epsilon = epsilon


class LaxInjectivityError(HWMError):
    """X* + tT が実固有値を持つ（有効なデータでは起こり得ない）."""

    exit_code = 3


class PoleMatchingError(HWMError):
    """時刻間で極の対応付けが一意に決まらない."""

    exit_code = 3


class SpectrumError(HWMError):
    """固有値計算の失敗、または実でない・範囲外の固有値."""

    exit_code = 4


class DegenerateSpectrumError(SpectrumError):
    """離散スペクトルが単純でなく、ソリトン分解が適用できない."""


class FallbackRefitWarning(UserWarning):
    """対角化できない発展行列のためグリッド再フィットを使った."""


class DegenerateVelocityWarning(UserWarning):
    """等しい速度が指定され、スペクトルが縮退し得る."""
