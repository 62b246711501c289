"""閉形式の定数を独立に確かめるための求積・離散化オラクル.

いずれも遅く、既定のテスト実行からは外す（pytest の oracle マーカー）。

- quadrature_seminorm: Fourier 側の ∫|ξ|^{2s} ‖F̂(ξ)‖² dξ を QUADPACK で求積
- quadrature_energy: x 側の ½∫ Tr(V |D|V) dx
- fourier_probe: QAWF（cos/sin 重み・無限区間）による F̂(ξ)
- discrete_halfD: 差分ラプラシアンの平方根を Fourier 乗数とした |D| の近似（h² で収束）
- cayley_toeplitz / cayley_hankel: Cayley 基底 φ_k = ω^k/(√π(x+i)) による T_U, H_U の離散化
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional, Tuple, Union

import numpy as np
from scipy import integrate, linalg
from scipy.special import gamma, gammaincc

from hwm.rational_maps import (
    EnergyConvention,
    HalfDerivativeRep,
    MapLike,
    PoleExpansion,
    RationalMap,
    apply_halfD,
    pole_expansion,
)
from models.schemas import CayleyBasisConfig


QUAD_LIMIT = 400


# ============================================================
# Fourier 側の求積
# ============================================================
def fourier_closed_form(expansion: PoleExpansion, xi: float, part: Literal["full", "plus"] = "full") -> np.ndarray:
    """F̂(ξ) の閉形式（定数部分を除く）.

    ξ > 0: -2πi Σ A_n e^{-iξz_n}、ξ < 0: 2πi Σ A_n* e^{-iξz̄_n}（part="plus" では 0）。
    """
    d = expansion.d
    if xi > 0:
        return -2j * np.pi * np.einsum("n,nij->ij", np.exp(-1j * xi * expansion.poles), expansion.residues)
    if xi < 0 and part == "full":
        adjoint = np.conj(np.swapaxes(expansion.residues, -1, -2))
        return 2j * np.pi * np.einsum("n,nij->ij", np.exp(-1j * xi * np.conj(expansion.poles)), adjoint)
    return np.zeros((d, d), dtype=complex)


def quadrature_seminorm(map: MapLike, s: float) -> Tuple[float, float]:
    """‖F‖_{Ḣ^s} を求積し、(値, 誤差見積り) を返す.

    ‖F‖² = (1/π) ∫_0^∞ ξ^{2s} ‖F̂(ξ)‖²_F dξ を [0, Ξ]（Ξ = 40/min δ）で求積し、
    残りは Γ 関数による上界で見積もる。
    """
    if s <= 0:
        raise ValueError(f"s > 0 が必要です（s = {s}）")
    expansion = pole_expansion(map)
    if len(expansion.poles) == 0:
        return 0.0, 0.0

    depths = -expansion.poles.imag
    cutoff = 40.0 / depths.min()

    def integrand(xi: float) -> float:
        value = fourier_closed_form(expansion, xi)
        return xi ** (2 * s) * float(np.sum(np.abs(value) ** 2)) / np.pi

    squared, quad_error = integrate.quad(integrand, 0.0, cutoff, limit=QUAD_LIMIT, epsabs=0.0, epsrel=1e-12)

    # ‖F̂(ξ)‖² ≤ 4π² (Σ‖A_n‖)² e^{-2 δ_min ξ}
    amplitude = 4 * np.pi * np.sum(np.linalg.norm(expansion.residues, axis=(-2, -1))) ** 2
    rate = 2 * depths.min()
    tail = amplitude * gamma(2 * s + 1) * rate ** (-(2 * s + 1)) * gammaincc(2 * s + 1, rate * cutoff)

    value = np.sqrt(max(squared, 0.0))
    # d√x ≈ dx/(2√x)
    error = (quad_error + tail) / (2 * value) if value > 0 else np.sqrt(quad_error + tail)
    return float(value), float(error)


def _real_line_quad(integrand: Callable[[float], float], breakpoints: np.ndarray) -> Tuple[float, float]:
    lo = float(breakpoints.min()) - 1.0
    hi = float(breakpoints.max()) + 1.0
    left, e1 = integrate.quad(integrand, -np.inf, lo, limit=QUAD_LIMIT)
    middle, e2 = integrate.quad(integrand, lo, hi, points=breakpoints, limit=QUAD_LIMIT)
    right, e3 = integrate.quad(integrand, hi, np.inf, limit=QUAD_LIMIT)
    return left + middle + right, e1 + e2 + e3


def quadrature_energy(map: RationalMap, convention: EnergyConvention = "auto") -> Tuple[float, float]:
    """x 側の求積 ½∫ Tr(V |D|V) dx（V = U - U∞）によるエネルギーと誤差見積り."""
    expansion = pole_expansion(map)
    if len(expansion.poles) == 0:
        return 0.0, 0.0
    half = apply_halfD(expansion)

    def integrand(x: float) -> float:
        V = expansion(x) - expansion.constant
        return float(np.trace(V @ half(x)).real)

    seminorm_sq, error = _real_line_quad(integrand, np.unique(expansion.poles.real))
    if convention == "auto":
        is_sphere = map.d == 2 and abs(np.trace(map.U_inf)) < 1e-9
        convention = "sphere" if is_sphere else "matrix"
    scale = 0.25 if convention == "sphere" else 0.5
    return scale * seminorm_sq, scale * error


def fourier_probe(function: Union[PoleExpansion, HalfDerivativeRep, Callable], xi: float, d: Optional[int] = None) -> np.ndarray:
    """F̂(ξ) = ∫ F(x) e^{-iξx} dx を QAWF で求積する（ξ ≠ 0）.

    PoleExpansion は定数部分を除いて変換する。
    """
    if xi == 0:
        raise ValueError("ξ ≠ 0 が必要です（ξ → 0⁺ は小さな正の ξ で近似してください）")
    if isinstance(function, PoleExpansion):
        expansion = function

        def function(x):
            return expansion(x) - expansion.constant

        d = expansion.d
    elif isinstance(function, HalfDerivativeRep):
        d = function.coefficients.shape[-1]
    if d is None:
        d = np.asarray(function(0.0)).shape[-1]

    frequency = abs(xi)
    sign = np.sign(xi)
    result = np.zeros((d, d), dtype=complex)
    for a in range(d):
        for b in range(d):
            def even(x, part):
                value = function(x)[a, b] + function(-x)[a, b]
                return value.real if part == "re" else value.imag

            def odd(x, part):
                value = function(x)[a, b] - function(-x)[a, b]
                return value.real if part == "re" else value.imag

            # ∫ F e^{-iξx} = ∫_0^∞ (F(x) + F(-x)) cos ξx dx - i sign(ξ) ∫_0^∞ (F(x) - F(-x)) sin |ξ|x dx
            cos_re, _ = integrate.quad(even, 0, np.inf, args=("re",), weight="cos", wvar=frequency)
            cos_im, _ = integrate.quad(even, 0, np.inf, args=("im",), weight="cos", wvar=frequency)
            sin_re, _ = integrate.quad(odd, 0, np.inf, args=("re",), weight="sin", wvar=frequency)
            sin_im, _ = integrate.quad(odd, 0, np.inf, args=("im",), weight="sin", wvar=frequency)
            result[a, b] = complex(cos_re, cos_im) - 1j * sign * complex(sin_re, sin_im)
    return result


def discrete_halfD(map: MapLike, h: float, L: float = 2000.0) -> Tuple[np.ndarray, np.ndarray]:
    """周期格子 [-L, L) 上の |D| の差分近似（乗数 (2/h)|sin(ξh/2)|、中心差分ラプラシアンの平方根）.

    Returns:
        (格子点, 各点での近似値 (n, d, d))
    """
    if h <= 0 or L <= 0:
        raise ValueError("h > 0, L > 0 が必要です")
    count = int(round(2 * L / h))
    grid = -L + h * np.arange(count)
    expansion = pole_expansion(map)
    values = expansion(grid) - expansion.constant
    xi = 2 * np.pi * np.fft.fftfreq(count, d=h)
    symbol = (2 / h) * np.abs(np.sin(xi * h / 2))
    approx = np.fft.ifft(symbol[:, None, None] * np.fft.fft(values, axis=0), axis=0)
    return grid, approx


def halfD_multiplier_order(
    map: MapLike,
    steps=(0.2, 0.1, 0.05, 0.025),
    L: float = 2000.0,
    window: float = 20.0,
) -> Tuple[np.ndarray, float]:
    """apply_halfD と discrete_halfD の |x| ≤ window での sup 誤差と、その log-log 次数."""
    closed = apply_halfD(map)
    errors = []
    for h in steps:
        grid, approx = discrete_halfD(map, h, L)
        inside = np.abs(grid) <= window
        gap = approx[inside] - closed(grid[inside])
        errors.append(float(np.max(np.linalg.norm(gap, axis=(-2, -1)))))
    errors = np.array(errors)
    order = float(np.polyfit(np.log(steps), np.log(errors), 1)[0])
    return errors, order


# ============================================================
# Cayley 基底による離散化
# ============================================================
@dataclass(frozen=True, eq=False)
class CayleyResult:
    """Cayley 基底で打ち切った T_U, K_U の結果.

    Attributes:
        M: 打ち切りサイズ
        T: (M·d)×(M·d) の Toeplitz ブロック
        hankel_singular_values: Hankel ブロックの特異値（降順）
        rank: Hankel の数値階数（Kronecker 階数の推定）
        interior_eigenvalues: 𝔥₁ 上の Ritz 値（昇順）
        hankel_trace: Tr K_M（→ I₂）
        eigenvalue_change: M と 2M の内部固有値の差（比較しない場合は None）
        trace_change: M と 2M の Tr K の差
    """

    M: int
    T: np.ndarray
    hankel_singular_values: np.ndarray
    rank: int
    interior_eigenvalues: np.ndarray
    hankel_trace: float
    eigenvalue_change: Optional[float] = None
    trace_change: Optional[float] = None


def cayley_coefficients(map: RationalMap, count: int) -> np.ndarray:
    """Ũ(θ) = U(-cot(θ/2)) の Fourier 係数 c_n（FFT の並び、n は count を法とする）."""
    theta = 2 * np.pi * np.arange(count) / count
    samples = np.empty((count, map.d, map.d), dtype=complex)
    samples[0] = map.U_inf
    inner = theta[1:]
    samples[1:] = map(-1.0 / np.tan(inner / 2))
    return np.fft.fft(samples, axis=0) / count


def _block(coefficients: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    # ブロック [(k, a), (l, b)] = c_{rows[k] + cols[l]}[a, b]
    count, d, _ = coefficients.shape
    index = (rows[:, None] + cols[None, :]) % count
    blocks = coefficients[index]
    return blocks.transpose(0, 2, 1, 3).reshape(len(rows) * d, len(cols) * d)


def cayley_hankel(map: RationalMap, cfg: CayleyBasisConfig = CayleyBasisConfig()) -> Tuple[np.ndarray, np.ndarray, int]:
    """Hankel ブロック H[(k, a), (j, b)] = c_{k+j}[a, b]（k < M, 1 ≤ j）と特異値・数値階数."""
    count = cfg.oversample * cfg.M
    coefficients = cayley_coefficients(map, count)
    depth = count // 2 - cfg.M
    H = _block(coefficients, np.arange(cfg.M), np.arange(1, depth + 1))
    singular = linalg.svdvals(H)
    threshold = cfg.rank_tol * max(1.0, float(singular[0]) if singular.size else 0.0)
    return H, singular, int(np.sum(singular > threshold))


def _cayley_once(map: RationalMap, cfg: CayleyBasisConfig) -> CayleyResult:
    count = cfg.oversample * cfg.M
    coefficients = cayley_coefficients(map, count)
    indices = np.arange(cfg.M)
    # T[(k, a), (l, b)] = c_{k-l}[a, b]
    T = _block(coefficients, indices, -indices)
    H, singular, rank = cayley_hankel(map, cfg)
    K = H @ H.conj().T

    if rank:
        _, vectors = linalg.eigh(K)
        top = vectors[:, -rank:]
        ritz = top.conj().T @ T @ top
        interior = np.sort(linalg.eigvalsh(0.5 * (ritz + ritz.conj().T)))
    else:
        interior = np.zeros(0)
    return CayleyResult(
        M=cfg.M,
        T=T,
        hankel_singular_values=singular,
        rank=rank,
        interior_eigenvalues=interior,
        hankel_trace=float(np.trace(K).real),
    )


def cayley_toeplitz(map: RationalMap, cfg: CayleyBasisConfig = CayleyBasisConfig(), compare: bool = True) -> CayleyResult:
    """T_U の Cayley 基底離散化。compare=True なら 2M と比べた収束見積りを付ける."""
    result = _cayley_once(map, cfg)
    if not compare:
        return result
    refined = _cayley_once(map, cfg.model_copy(update={"M": 2 * cfg.M}))
    if refined.interior_eigenvalues.shape == result.interior_eigenvalues.shape:
        change = float(np.max(np.abs(refined.interior_eigenvalues - result.interior_eigenvalues), initial=0.0))
    else:
        change = float("inf")
    return CayleyResult(
        M=result.M,
        T=result.T,
        hankel_singular_values=result.hankel_singular_values,
        rank=result.rank,
        interior_eigenvalues=result.interior_eigenvalues,
        hankel_trace=result.hankel_trace,
        eigenvalue_change=change,
        trace_change=abs(refined.hankel_trace - result.hankel_trace),
    )
