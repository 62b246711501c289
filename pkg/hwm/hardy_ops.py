"""有限次元不変部分空間 𝔥₁ と Lax 作用素の行列表現.

有理写像 U に対して 𝔥₁ = span{ f_j = e_j/(x - z_j) } ⊂ L²₊(ℝ; ℂ^d) は
Toeplitz 作用素 T_U と X*（Hardy 空間のシフト生成子の随伴）の両方で不変であり、
その上で T_U, X*, Gram 形式, 境界汎関数 I₊ を厳密な行列として組み立てる。

行列値の Hardy 空間は列ごとに扱う（U の掛け算, X*, I₊ はいずれも列ごとに作用するため）。
Π₊V₀ の第 c 列は Σ_j V0[j, c] f_j と展開される。
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
from scipy import linalg

from hwm.config import REAL_SPECTRUM_TOL, SIMPLICITY_TOL
from hwm.errors import SpectrumError
from hwm.rational_maps import RationalMap, b_matrices, resultant
from models.schemas import ComplexJSON, SpectralReport


# Tr K_U = ‖U‖²_{Ḣ^{1/2}} · HANKEL_TRACE_CONSTANT
HANKEL_TRACE_CONSTANT = 1.0 / (4.0 * np.pi)

DEFAULT_TRACE_ORDERS = (2, 4)


@dataclass(frozen=True, eq=False)
class H1Basis:
    """極基底 f_j = e_j/(x - z_j) における 𝔥₁ の行列データ.

    Attributes:
        z: 極 (N,)
        e: 値域方向 (N, d)、行ごとに単位ベクトル
        xi: 余値域ベクトル (N, d)
        T: Toeplitz 作用素 (N, N)
        Z: X*|𝔥₁ = diag(z) (N, N)
        G: Gram 行列 G[k, j] = ⟨f_j, f_k⟩ (N, N)
        V0: Π₊V₀ の展開係数 (N, d)
        U_inf: 無限遠での値 (d, d)
    """

    z: np.ndarray
    e: np.ndarray
    xi: np.ndarray
    T: np.ndarray
    Z: np.ndarray
    G: np.ndarray
    V0: np.ndarray
    U_inf: np.ndarray

    @property
    def N(self) -> int:
        return len(self.z)

    @property
    def d(self) -> int:
        return self.U_inf.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.N == 0

    def inner(self, a, b) -> complex:
        """Gram 形式 ⟨a, b⟩_G = b* G a."""
        return complex(np.conj(b) @ self.G @ a)

    def expand(self, coeffs, x) -> np.ndarray:
        """Σ_j a_j e_j/(x - z_j) を（複素数の）点 x で評価する."""
        x = np.asarray(x, dtype=complex)
        weights = np.asarray(coeffs, dtype=complex) / (x[..., None] - self.z)
        return weights @ self.e


def empty_basis(U_inf) -> H1Basis:
    U_inf = np.asarray(U_inf, dtype=complex)
    d = U_inf.shape[0]
    return H1Basis(
        z=np.zeros(0, dtype=complex),
        e=np.zeros((0, d), dtype=complex),
        xi=np.zeros((0, d), dtype=complex),
        T=np.zeros((0, 0), dtype=complex),
        Z=np.zeros((0, 0), dtype=complex),
        G=np.zeros((0, 0), dtype=complex),
        V0=np.zeros((0, d), dtype=complex),
        U_inf=U_inf,
    )


def _toeplitz(z: np.ndarray, e: np.ndarray, xi: np.ndarray, B: np.ndarray) -> np.ndarray:
    # 非対角: T_kj = ⟨e_j, ξ_k⟩/(z_k - z_j)、対角: T_jj = ⟨B_j e_j, e_j⟩
    overlaps = np.conj(xi) @ e.T
    differences = z[:, None] - z[None, :]
    np.fill_diagonal(differences, 1.0)
    T = overlaps / differences
    np.fill_diagonal(T, np.einsum("ja,jab,jb->j", np.conj(e), B, e))
    return T


def _gram(z: np.ndarray, e: np.ndarray) -> np.ndarray:
    overlaps = np.conj(e) @ e.T
    return 2j * np.pi * overlaps / (np.conj(z)[:, None] - z[None, :])


def build_h1(map: RationalMap) -> H1Basis:
    """有理写像から 𝔥₁ の行列データを組み立てる（定数写像では空の基底）."""
    if map.N == 0:
        return empty_basis(map.U_inf)
    z = map.poles
    e = np.stack([pair.e for pair in map.residues])
    xi = np.stack([pair.xi for pair in map.residues])
    return H1Basis(
        z=z,
        e=e,
        xi=xi,
        T=_toeplitz(z, e, xi, b_matrices(map)),
        Z=np.diag(z),
        G=_gram(z, e),
        V0=np.conj(xi),
        U_inf=np.array(map.U_inf),
    )


def toeplitz_matrix(map: RationalMap, basis: H1Basis) -> np.ndarray:
    """基底 basis における T_U|𝔥₁ の行列."""
    if basis.is_empty:
        return np.zeros((0, 0), dtype=complex)
    return _toeplitz(basis.z, basis.e, basis.xi, b_matrices(map))


def gram_matrix(basis: H1Basis) -> np.ndarray:
    """G[k, j] = ⟨f_j, f_k⟩_{L²} = 2πi ⟨e_j, e_k⟩/(z̄_k - z_j)."""
    if basis.is_empty:
        return np.zeros((0, 0), dtype=complex)
    return _gram(basis.z, basis.e)


def iplus(basis: H1Basis, coeffs) -> np.ndarray:
    """I₊(Σ a_j f_j) = -2πi Σ a_j e_j."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if basis.is_empty:
        return np.zeros(basis.d, dtype=complex)
    return -2j * np.pi * (basis.e.T @ coeffs)


def reproduce_residual(basis: H1Basis, coeffs, z: complex) -> float:
    """‖(1/2πi) I₊[(X* - z)⁻¹ f] - f(z)‖（z ∈ ℂ₊）."""
    if np.imag(z) <= 0:
        raise ValueError(f"z は上半平面の点である必要があります（z = {z}）")
    coeffs = np.asarray(coeffs, dtype=complex)
    if basis.is_empty:
        return 0.0
    resolved = linalg.solve(basis.Z - z * np.eye(basis.N), coeffs)
    lhs = iplus(basis, resolved) / (2j * np.pi)
    return float(np.linalg.norm(lhs - basis.expand(coeffs, z)))


def gram_iplus_residual(basis: H1Basis, coeffs) -> float:
    """|Im⟨Za, a⟩_G + ‖I₊a‖²/4π| / max(1, ‖I₊a‖²/4π)（a は ⟨a, a⟩_G = 1 に正規化してから評価）."""
    if basis.is_empty:
        return 0.0
    a = np.asarray(coeffs, dtype=complex)
    a = a / np.sqrt(basis.inner(a, a).real)
    lhs = basis.inner(basis.Z @ a, a).imag
    rhs = -np.linalg.norm(iplus(basis, a)) ** 2 / (4 * np.pi)
    return float(abs(lhs - rhs) / max(1.0, abs(rhs)))


def commutator_residual(basis: H1Basis) -> float:
    """max_{k,j} |(ZT - TZ)_{kj} - ⟨e_j, ξ_k⟩|."""
    if basis.is_empty:
        return 0.0
    lhs = basis.Z @ basis.T - basis.T @ basis.Z
    return float(np.max(np.abs(lhs - np.conj(basis.xi) @ basis.e.T)))


def gram_selfadjoint_residual(basis: H1Basis) -> float:
    """‖GT - (GT)*‖（T の G-自己共役性）."""
    if basis.is_empty:
        return 0.0
    GT = basis.G @ basis.T
    return float(np.linalg.norm(GT - GT.conj().T))


# ============================================================
# スペクトル
# ============================================================
def _real_eigenvalues(matrix: np.ndarray, label: str) -> np.ndarray:
    try:
        values = linalg.eigvals(matrix)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SpectrumError(f"{label} の固有値計算に失敗しました: {exc}") from exc
    scale = max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)
    worst = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if worst > REAL_SPECTRUM_TOL * scale:
        raise SpectrumError(f"{label} の固有値が実数ではありません（max |Im λ| = {worst:.3e}）")
    return np.sort(values.real)


def _min_gap(values: np.ndarray) -> float:
    if values.size < 2:
        return float("inf")
    return float(np.min(np.diff(np.sort(values))))


def _is_simple(values: np.ndarray) -> bool:
    if values.size < 2:
        return True
    spread = float(values.max() - values.min())
    return _min_gap(values) > SIMPLICITY_TOL * max(1.0, spread)


def power_traces(matrix: np.ndarray, count: int) -> np.ndarray:
    """p_m = Tr(matrix^m), m = 1..count."""
    traces = np.empty(count, dtype=complex)
    power = np.eye(matrix.shape[0], dtype=complex)
    for m in range(count):
        power = power @ matrix
        traces[m] = np.trace(power)
    return traces


def characteristic_coefficients(matrix: np.ndarray) -> np.ndarray:
    """det(λ - matrix) の係数（定数項から）を冪トレースから求める.

    Newton の恒等式 k e_k = Σ_{i=1}^k (-1)^{i-1} e_{k-i} p_i（Plemelj–Smithies 公式の有限次元版）。
    """
    n = matrix.shape[0]
    traces = power_traces(matrix, n)
    elementary = np.zeros(n + 1, dtype=complex)
    elementary[0] = 1.0
    for k in range(1, n + 1):
        signs = (-1.0) ** np.arange(k)
        elementary[k] = np.sum(signs * elementary[k - 1::-1][:k] * traces[:k]) / k
    # λ^j の係数は (-1)^{n-j} e_{n-j}
    return np.array([(-1.0) ** (n - j) * elementary[n - j] for j in range(n + 1)])


def discriminant(matrix: np.ndarray) -> complex:
    """特性多項式の判別式 (-1)^{n(n-1)/2} Res(p, p')（モニック）."""
    n = matrix.shape[0]
    if n < 2:
        return complex(1.0)
    coeffs = characteristic_coefficients(matrix)
    derivative = np.arange(1, n + 1) * coeffs[1:]
    return (-1.0) ** (n * (n - 1) // 2) * resultant(coeffs, derivative)


def conserved_traces(basis: H1Basis, p_list: Sequence[float] = DEFAULT_TRACE_ORDERS) -> List[float]:
    """I_p = Σ μ_i^{p/2}（μ_i は Id - T² の固有値）."""
    if basis.is_empty:
        return [0.0 for _ in p_list]
    lax = _real_eigenvalues(basis.T, "T")
    mu = 1.0 - lax**2
    if np.any(mu < -REAL_SPECTRUM_TOL):
        raise SpectrumError(f"Id - T² に負の固有値があります（min = {mu.min():.3e}）")
    mu = np.clip(mu, 0.0, None)
    return [float(np.sum(mu ** (p / 2.0))) for p in p_list]


def energy_from_traces(I2: float, convention: str = "sphere") -> float:
    """I₂ からエネルギーを得る（球面規約 π I₂、行列規約 2π I₂）."""
    matrix_energy = 0.5 * I2 / HANKEL_TRACE_CONSTANT
    return matrix_energy / 2 if convention == "sphere" else matrix_energy


def lax_spectrum(basis: H1Basis, p_list: Sequence[float] = DEFAULT_TRACE_ORDERS) -> SpectralReport:
    """T|𝔥₁ の離散スペクトルと単純性・判別式・保存量."""
    if basis.is_empty:
        return SpectralReport(traces={_trace_key(p): 0.0 for p in p_list})

    eigenvalues = _real_eigenvalues(basis.T, "T")
    outside = eigenvalues[np.abs(eigenvalues) >= 1.0]
    if outside.size:
        raise SpectrumError(f"T の固有値が (-1, 1) の外にあります: {outside.tolist()}")

    K = np.eye(basis.N) - basis.T @ basis.T
    traces = conserved_traces(basis, p_list)
    gap = _min_gap(eigenvalues)
    return SpectralReport(
        eigenvalues=eigenvalues.tolist(),
        simple=_is_simple(eigenvalues),
        simple_squared=_is_simple(eigenvalues**2),
        min_gap=None if np.isinf(gap) else gap,
        discriminant=ComplexJSON.of(discriminant(K)),
        traces={_trace_key(p): value for p, value in zip(p_list, traces)},
    )


def _trace_key(p: float) -> str:
    return str(int(p)) if float(p).is_integer() else str(p)


def trace_dict(basis: H1Basis, p_list: Sequence[float] = DEFAULT_TRACE_ORDERS) -> Dict[str, float]:
    return {_trace_key(p): value for p, value in zip(p_list, conserved_traces(basis, p_list))}
