"""Grassmann 多様体値の有理写像.

U(x) = U∞ + Σ_j ( A_j/(x - z_j) + A_j*/(x - z̄_j) ),  z_j ∈ ℂ₋

の形の写像を表現し、評価・検証・閉形式の微積分（|D|, エネルギー, Sobolev 半ノルム）を
提供する。Fourier 変換は f̂(ξ) = ∫ f(x) e^{-iξx} dx の規約に従う。この規約では

    (1/(x - z))^(ξ) = -2πi e^{-iξz} 𝟙_{ξ>0}   (z ∈ ℂ₋)
    |D| (1/(x - z)) = i/(x - z)²

となり、以下の閉形式はすべてここから導かれる。
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import gamma

from hwm.config import (
    CONSTRAINT_TOL,
    GRID_POLE_OFFSETS,
    GRID_UNIFORM_POINTS,
    POLE_COLLISION_TOL,
    RANK_RTOL,
)
from hwm.errors import ConstraintViolationError, RankError, StereographicError
from models.schemas import ValidationReport


# Pauli 行列 σ₁, σ₂, σ₃
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# 位相ゲージで「有意」とみなす成分の大きさ
GAUGE_TOL = 1e-8


def _frozen(array, dtype=complex) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    out.setflags(write=False)
    return out


def _dagger(matrix: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(matrix, -1, -2))


# ============================================================
# ドメイン型
# ============================================================
@dataclass(frozen=True, eq=False)
class GrassmannTarget:
    """写像の値域 Gr_k(ℂ^d) と無限遠での値 U∞."""

    d: int
    k: int
    U_inf: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "U_inf", _frozen(self.U_inf))
        if self.U_inf.shape != (self.d, self.d):
            raise ValueError(f"U_inf の形状 {self.U_inf.shape} が d={self.d} と一致しません")
        if not 0 <= self.k <= self.d:
            raise ValueError(f"k={self.k} は [0, {self.d}] の範囲外です")

    @classmethod
    def from_matrix(cls, U_inf) -> "GrassmannTarget":
        """U∞ から d と k = (d - Tr U∞)/2 を読み取る."""
        U_inf = np.asarray(U_inf, dtype=complex)
        d = U_inf.shape[0]
        k = int(round((d - np.trace(U_inf).real) / 2))
        return cls(d=d, k=min(max(k, 0), d), U_inf=U_inf)

    @classmethod
    def standard(cls, d: int, k: int) -> "GrassmannTarget":
        """U∞ = diag(1,…,1,-1,…,-1)（-1 が k 個）."""
        diag = np.concatenate([np.ones(d - k), -np.ones(k)])
        return cls(d=d, k=k, U_inf=np.diag(diag).astype(complex))

    def residuals(self) -> dict:
        eye = np.eye(self.d)
        return {
            "hermitian": float(np.linalg.norm(self.U_inf - _dagger(self.U_inf))),
            "involution": float(np.linalg.norm(self.U_inf @ self.U_inf - eye)),
            "trace": float(abs(np.trace(self.U_inf) - (self.d - 2 * self.k))),
        }


def gauge_fix(e: np.ndarray, xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(e, ξ) の相互位相を固定する: e の最初の有意成分を正の実数にする."""
    e = np.asarray(e, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    significant = np.flatnonzero(np.abs(e) > GAUGE_TOL)
    if significant.size == 0:
        return e, xi
    lead = e[significant[0]]
    phase = lead / abs(lead)
    # e φ̄ (ξ φ̄)* = e ξ*
    return e * np.conj(phase), xi * np.conj(phase)


@dataclass(frozen=True, eq=False)
class ResiduePair:
    """極 z ∈ ℂ₋ と階数1の冪零留数 A = e ξ*."""

    z: complex
    e: np.ndarray
    xi: np.ndarray
    A: np.ndarray = field(init=False)

    def __post_init__(self):
        if not np.imag(self.z) < 0:
            raise ConstraintViolationError(f"極 z={self.z} が下半平面にありません")
        e, xi = gauge_fix(self.e, self.xi)
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "e", _frozen(e))
        object.__setattr__(self, "xi", _frozen(xi))
        object.__setattr__(self, "A", _frozen(np.outer(e, np.conj(xi))))

    @classmethod
    def from_matrix(cls, z: complex, A, tol: float = RANK_RTOL, nilpotent: bool = True) -> "ResiduePair":
        e, xi = rank1_factor(A, tol=tol, nilpotent=nilpotent)
        return cls(z=z, e=e, xi=xi)

    @classmethod
    def from_factors(cls, z: complex, direction, co_range) -> "ResiduePair":
        """A = direction ⊗ conj(co_range)^* の形から正規化して作る（direction は非正規化でよい）."""
        direction = np.asarray(direction, dtype=complex)
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise RankError("留数の値域方向がゼロです")
        return cls(z=z, e=direction / norm, xi=np.asarray(co_range, dtype=complex) * norm)


@dataclass(frozen=True, eq=False)
class RationalMap:
    """単純極の有理写像 U: ℝ → Gr_k(ℂ^d)."""

    target: GrassmannTarget
    residues: Tuple[ResiduePair, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "residues", tuple(self.residues))
        for pair in self.residues:
            if pair.e.shape != (self.target.d,):
                raise ValueError("留数の次元が写像の次元 d と一致しません")

    @classmethod
    def constant(cls, target: GrassmannTarget) -> "RationalMap":
        return cls(target=target, residues=())

    @property
    def d(self) -> int:
        return self.target.d

    @property
    def N(self) -> int:
        return len(self.residues)

    @property
    def U_inf(self) -> np.ndarray:
        return self.target.U_inf

    @property
    def poles(self) -> np.ndarray:
        return np.array([pair.z for pair in self.residues], dtype=complex)

    @property
    def residue_stack(self) -> np.ndarray:
        if not self.residues:
            return np.zeros((0, self.d, self.d), dtype=complex)
        return np.stack([pair.A for pair in self.residues])

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True, eq=False)
class PoleExpansion:
    """Hermite 完備化された単純極展開 C + Σ_n (A_n/(x - z_n) + A_n*/(x - z̄_n)).

    留数に制約は課さない（写像の差や実数値の成分関数 d=1 を表すのに使う）。
    """

    constant: np.ndarray
    poles: np.ndarray
    residues: np.ndarray

    def __post_init__(self):
        constant = np.atleast_2d(np.asarray(self.constant, dtype=complex))
        d = constant.shape[0]
        poles = np.asarray(self.poles, dtype=complex).reshape(-1)
        residues = np.asarray(self.residues, dtype=complex).reshape(len(poles), d, d)
        object.__setattr__(self, "constant", _frozen(constant))
        object.__setattr__(self, "poles", _frozen(poles))
        object.__setattr__(self, "residues", _frozen(residues))

    @classmethod
    def scalar(cls, constant: float, poles: Sequence[complex] = (), residues: Sequence[complex] = ()):
        """実数値スカラー有理関数 c + Σ (a_n/(x - z_n) + c.c.)."""
        return cls(
            constant=[[constant]],
            poles=list(poles),
            residues=np.asarray(residues, dtype=complex).reshape(-1, 1, 1),
        )

    @property
    def d(self) -> int:
        return self.constant.shape[0]

    def __call__(self, x):
        return self.constant + _hermitian_sum(self.poles, self.residues, x)


@dataclass(frozen=True, eq=False)
class SphereMap:
    """Pauli 符号化された球面値写像 u: ℝ → S²（d = 2, k = 1）."""

    map: RationalMap

    def __post_init__(self):
        if self.map.d != 2 or abs(np.trace(self.map.U_inf)) > CONSTRAINT_TOL:
            raise ConstraintViolationError("球面写像には d=2, Tr U∞ = 0 が必要です")

    @property
    def components(self) -> Tuple[PoleExpansion, PoleExpansion, PoleExpansion]:
        return pauli_decode(self)

    def u(self, x) -> np.ndarray:
        """u_k(x) = ½ Tr(U(x) σ_k) を実数配列 (..., 3) として返す."""
        U = evaluate(self.map, x)
        return 0.5 * np.einsum("...ij,kji->...k", U, PAULI).real


@dataclass(frozen=True, eq=False)
class HalfDerivativeRep:
    """|D|U の閉形式: Σ_j ( c_j/(x - z_j)² + c_j*/(x - z̄_j)² ),  c_j = i A_j."""

    poles: np.ndarray
    coefficients: np.ndarray

    def __call__(self, x):
        return _hermitian_sum(self.poles, self.coefficients, x, power=2)


MapLike = Union[RationalMap, PoleExpansion]


# ============================================================
# 評価
# ============================================================
def _principal_sum(poles: np.ndarray, residues: np.ndarray, x, power: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = residues.shape[-1] if residues.ndim == 3 else 1
    if len(poles) == 0:
        return np.zeros(x.shape + (d, d), dtype=complex)
    weights = 1.0 / (x[..., None] - poles) ** power
    return np.einsum("...n,nij->...ij", weights, residues)


def _hermitian_sum(poles, residues, x, power: int = 1) -> np.ndarray:
    principal = _principal_sum(np.asarray(poles), np.asarray(residues), x, power=power)
    return principal + _dagger(principal)


def evaluate(map: RationalMap, x) -> np.ndarray:
    """U(x) を評価する。x はスカラーまたは配列（結果の形状は x.shape + (d, d)）."""
    return map.U_inf + _hermitian_sum(map.poles, map.residue_stack, x)


def evaluate_derivative(map: MapLike, x) -> np.ndarray:
    """∂ₓU(x) = -Σ_j ( A_j/(x - z_j)² + h.c. )."""
    expansion = pole_expansion(map)
    return _hermitian_sum(expansion.poles, -expansion.residues, x, power=2)


def validation_grid(map: MapLike, points: int = GRID_UNIFORM_POINTS) -> np.ndarray:
    """一様グリッド [-L, L] と極の実部近傍の集中点の和集合."""
    poles = pole_expansion(map).poles
    if len(poles) == 0:
        return np.linspace(-10.0, 10.0, points)
    L = 10.0 * (1.0 + np.max(np.abs(poles.real)))
    clustered = [
        pole.real + sign * offset * abs(pole.imag)
        for pole in poles
        for offset in GRID_POLE_OFFSETS
        for sign in (-1.0, 1.0)
    ]
    return np.unique(np.concatenate([np.linspace(-L, L, points), clustered]))


# ============================================================
# 検証
# ============================================================
def b_matrices(map: RationalMap) -> np.ndarray:
    """B_j = U∞ + Σ_{k≠j} A_k/(z_j - z_k) + Σ_k A_k*/(z_j - z̄_k)."""
    z = map.poles
    A = map.residue_stack
    N = map.N
    B = np.empty((N, map.d, map.d), dtype=complex)
    for j in range(N):
        others = np.arange(N) != j
        holo = np.einsum("k,kab->ab", 1.0 / (z[j] - z[others]), A[others])
        anti = np.einsum("k,kab->ab", 1.0 / (z[j] - np.conj(z)), _dagger(A))
        B[j] = map.U_inf + holo + anti
    return B


def min_pole_distance(poles: np.ndarray) -> float:
    if len(poles) < 2:
        return float("inf")
    gaps = np.abs(poles[:, None] - poles[None, :])
    gaps[np.diag_indices(len(poles))] = np.inf
    return float(gaps.min())


def validate(map: RationalMap, tol: float = CONSTRAINT_TOL, grid=None) -> ValidationReport:
    """点ごとの制約と代数的制約の残差を報告する（例外は投げない）."""
    grid = validation_grid(map) if grid is None else np.asarray(grid, dtype=float)
    U = evaluate(map, grid)
    eye = np.eye(map.d)
    involution = float(np.max(np.linalg.norm(U @ U - eye, axis=(-2, -1))))
    hermitian = float(np.max(np.linalg.norm(U - _dagger(U), axis=(-2, -1))))

    A = map.residue_stack
    nilpotency = 0.0
    anticommutator = 0.0
    if map.N:
        nilpotency = float(np.max(np.linalg.norm(A @ A, axis=(-2, -1))))
        B = b_matrices(map)
        anticommutator = float(np.max(np.linalg.norm(B @ A + A @ B, axis=(-2, -1))))

    target = map.target.residuals()
    separation = min_pole_distance(map.poles)

    checks = {
        "involution_residual": involution,
        "hermitian_residual": hermitian,
        "nilpotency_residual": nilpotency,
        "anticommutator_residual": anticommutator,
        "trace_deviation": target["trace"],
        "target_residual": max(target["hermitian"], target["involution"]),
    }
    violations = [f"{name} = {value:.3e} > {tol:.1e}" for name, value in checks.items() if value > tol]
    if separation <= POLE_COLLISION_TOL:
        violations.append(f"min_pole_distance = {separation:.3e} ≤ {POLE_COLLISION_TOL:.1e}")

    return ValidationReport(
        passed=not violations,
        tol=tol,
        grid_points=int(grid.size),
        min_pole_distance=None if np.isinf(separation) else separation,
        violations=violations,
        **checks,
    )


def require_valid(map: RationalMap, tol: float = CONSTRAINT_TOL) -> RationalMap:
    report = validate(map, tol=tol)
    if not report.passed:
        raise ConstraintViolationError("有理写像が制約を満たしません: " + "; ".join(report.violations), report)
    return map


# ============================================================
# 階数1分解
# ============================================================
def rank1_factor(A, tol: float = RANK_RTOL, nilpotent: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """A = e ξ* (‖e‖ = 1, 正準ゲージ) に分解する（nilpotent=False なら冪零性は validate に任せる）."""
    A = np.asarray(A, dtype=complex)
    u, s, vh = np.linalg.svd(A)
    if s[0] <= np.finfo(float).eps:
        raise RankError("留数行列がゼロです（階数 0）")
    if len(s) > 1 and s[1] > tol * s[0]:
        raise RankError(f"留数行列の階数が1ではありません（σ₂/σ₁ = {s[1] / s[0]:.3e}）")
    e = u[:, 0]
    xi = s[0] * np.conj(vh[0])
    if nilpotent and abs(np.vdot(xi, e)) > tol * np.linalg.norm(xi) * 10:
        raise RankError(f"留数行列が冪零ではありません（⟨e, ξ⟩ = {np.vdot(xi, e):.3e}）")
    return gauge_fix(e, xi)


def kronecker_rank(map: RationalMap) -> int:
    """K_U の階数 = 下半平面の極の個数."""
    A = map.residue_stack
    if not map.N:
        return 0
    return int(np.sum(np.linalg.norm(A, axis=(-2, -1)) > np.finfo(float).eps))


# ============================================================
# Pauli 符号化
# ============================================================
def _merge_poles(components: Sequence[PoleExpansion]) -> np.ndarray:
    merged: list = []
    for component in components:
        for pole in component.poles:
            if all(abs(pole - known) > POLE_COLLISION_TOL for known in merged):
                merged.append(pole)
    return np.array(merged, dtype=complex)


def pauli_encode(u1: PoleExpansion, u2: PoleExpansion, u3: PoleExpansion, tol: float = CONSTRAINT_TOL) -> SphereMap:
    """実成分 (u₁, u₂, u₃) から U = u·σ を作る."""
    components = (u1, u2, u3)
    for index, component in enumerate(components, 1):
        if component.d != 1:
            raise ValueError(f"u{index} はスカラー（d=1）展開である必要があります")
        if abs(component.constant[0, 0].imag) > tol:
            raise ConstraintViolationError(f"u{index} の無限遠での値が実数ではありません")

    poles = _merge_poles(components)
    spins = np.zeros((len(poles), 3), dtype=complex)
    for k, component in enumerate(components):
        for pole, residue in zip(component.poles, component.residues[:, 0, 0]):
            n = int(np.argmin(np.abs(poles - pole)))
            spins[n, k] += residue

    u_inf = np.array([component.constant[0, 0].real for component in components])
    if abs(np.linalg.norm(u_inf) - 1.0) > tol:
        raise ConstraintViolationError(f"|u∞| = {np.linalg.norm(u_inf):.6f} ≠ 1")

    U_inf = np.einsum("k,kij->ij", u_inf, PAULI)
    residues = [
        ResiduePair.from_matrix(pole, np.einsum("k,kij->ij", spin, PAULI))
        for pole, spin in zip(poles, spins)
    ]
    sphere = SphereMap(RationalMap(GrassmannTarget(d=2, k=1, U_inf=U_inf), tuple(residues)))
    require_valid(sphere.map, tol=max(tol, CONSTRAINT_TOL))
    return sphere


def pauli_decode(sphere: SphereMap) -> Tuple[PoleExpansion, PoleExpansion, PoleExpansion]:
    """u_k = ½ Tr(U σ_k) を成分ごとのスカラー展開として返す."""
    map = sphere.map
    constants = 0.5 * np.einsum("ij,kji->k", map.U_inf, PAULI)
    spins = 0.5 * np.einsum("nij,kji->nk", map.residue_stack, PAULI)
    return tuple(
        PoleExpansion.scalar(constants[k].real, map.poles, spins[:, k]) for k in range(3)
    )


# ============================================================
# 立体射影パラメータ
# ============================================================
def resultant(p, q) -> complex:
    """Sylvester 行列式による終結式（係数は定数項から）."""
    p = npoly.polytrim(np.asarray(p, dtype=complex), tol=0)
    q = npoly.polytrim(np.asarray(q, dtype=complex), tol=0)
    m, n = len(p) - 1, len(q) - 1
    if m == 0 and n == 0:
        return complex(1.0)
    size = m + n
    sylvester = np.zeros((size, size), dtype=complex)
    for row in range(n):
        sylvester[row, row:row + m + 1] = p[::-1]
    for row in range(m):
        sylvester[n + row, row:row + n + 1] = q[::-1]
    return complex(np.linalg.det(sylvester))


def _polish_roots(coeffs: np.ndarray, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    derivative = npoly.polyder(coeffs)
    for _ in range(steps):
        slope = npoly.polyval(roots, derivative)
        safe = np.abs(slope) > 0
        roots = np.where(safe, roots - npoly.polyval(roots, coeffs) / np.where(safe, slope, 1.0), roots)
    return roots


def from_stereographic(P, Q, tol: float = 1e-10) -> Tuple[SphereMap, int]:
    """R = P/Q から u₁ + iu₂ = 2R/(|R|² + 1), u₃ = (|R|² - 1)/(|R|² + 1) を作る.

    P, Q は定数項から並べた複素係数。deg P = N ≥ 1, deg Q ≤ N - 1。
    """
    P = npoly.polytrim(np.asarray(P, dtype=complex), tol=0)
    Q = npoly.polytrim(np.asarray(Q, dtype=complex), tol=0)
    N = len(P) - 1
    if N < 1:
        raise StereographicError("deg P ≥ 1 が必要です")
    if not np.any(Q):
        raise StereographicError("Q ≢ 0 が必要です")
    if len(Q) - 1 > N - 1:
        raise StereographicError(f"deg Q = {len(Q) - 1} は deg P - 1 = {N - 1} 以下である必要があります")

    scale_p = np.max(np.abs(P))
    scale_q = np.max(np.abs(Q))
    if abs(resultant(P / scale_p, Q / scale_q)) <= tol:
        raise StereographicError("P と Q が共通因子を持ちます")

    P_bar, Q_bar = np.conj(P), np.conj(Q)
    denominator = npoly.polyadd(npoly.polymul(P, P_bar), npoly.polymul(Q, Q_bar)).real
    roots = _polish_roots(denominator, npoly.polyroots(denominator))
    spread = 1.0 + np.max(np.abs(roots))
    if min_pole_distance(roots) <= 1e-6 * spread:
        raise StereographicError(
            "|P|² + |Q|² が重根を持ちます。係数をわずかに摂動して単純根にしてください"
        )
    lower = roots[roots.imag < 0]
    if len(lower) != N:
        raise StereographicError(f"下半平面の根が {len(lower)} 個（期待値 {N}）")

    diagonal = npoly.polysub(npoly.polymul(P, P_bar), npoly.polymul(Q, Q_bar))
    upper = 2 * npoly.polymul(P_bar, Q)
    lower_left = 2 * npoly.polymul(P, Q_bar)
    slope = npoly.polyder(denominator)

    residues = []
    for root in np.sort_complex(lower):
        numerator = np.array(
            [
                [npoly.polyval(root, diagonal), npoly.polyval(root, upper)],
                [npoly.polyval(root, lower_left), -npoly.polyval(root, diagonal)],
            ]
        )
        residues.append(ResiduePair.from_matrix(root, numerator / npoly.polyval(root, slope), tol=1e-6))

    target = GrassmannTarget(d=2, k=1, U_inf=PAULI[2])
    return SphereMap(RationalMap(target, tuple(residues))), N


# ============================================================
# 閉形式の微積分
# ============================================================
def pole_expansion(map: MapLike) -> PoleExpansion:
    if isinstance(map, PoleExpansion):
        return map
    return PoleExpansion(constant=map.U_inf, poles=map.poles, residues=map.residue_stack)


def difference(a: MapLike, b: MapLike) -> PoleExpansion:
    """a - b の極展開（同じ位置の極があっても構わない）."""
    a, b = pole_expansion(a), pole_expansion(b)
    return PoleExpansion(
        constant=a.constant - b.constant,
        poles=np.concatenate([a.poles, b.poles]),
        residues=np.concatenate([a.residues, -b.residues]),
    )


def apply_halfD(map: MapLike) -> HalfDerivativeRep:
    """|D|U の閉形式表現を返す."""
    expansion = pole_expansion(map)
    return HalfDerivativeRep(poles=expansion.poles, coefficients=1j * expansion.residues)


def hwm_rhs(map: RationalMap, x) -> np.ndarray:
    """方程式の右辺 -(i/2)[U, |D|U] を評価する."""
    U = evaluate(map, x)
    W = apply_halfD(map)(x)
    return -0.5j * (U @ W - W @ U)


def seminorm_squared(map: MapLike, s: float) -> float:
    """‖F‖²_{Ḣ^s} = 4πΓ(2s+1) Σ_{n,m} ⟨A_n, A_m⟩_F (i(z_n - z̄_m))^{-(2s+1)}."""
    if s <= 0:
        raise ValueError(f"s > 0 が必要です（s = {s}）")
    expansion = pole_expansion(map)
    if len(expansion.poles) == 0:
        return 0.0
    A = expansion.residues
    z = expansion.poles
    overlaps = np.einsum("nij,mij->nm", A, np.conj(A))
    laplace = (1j * (z[:, None] - np.conj(z)[None, :])) ** (-(2 * s + 1))
    total = 4 * np.pi * gamma(2 * s + 1) * np.sum(overlaps * laplace)
    return max(float(total.real), 0.0)


def sobolev_seminorm(map: MapLike, s: float) -> float:
    """‖|D|^s (U - U∞)‖_{L²}（定数部分は寄与しない）."""
    return float(np.sqrt(seminorm_squared(map, s)))


EnergyConvention = Literal["auto", "sphere", "matrix"]


def energy(map: RationalMap, convention: EnergyConvention = "auto") -> float:
    """エネルギー E = ½‖U‖²_{Ḣ^{1/2}}.

    球面写像（d=2, Tr U∞ = 0）では u の規約 E(u) = ½‖u‖²_{Ḣ^{1/2}} = ¼‖U‖²_{Ḣ^{1/2}} を
    既定とする。基底状態ソリトンでは E(u) = (1 - v²)π。
    """
    if convention == "auto":
        is_sphere = map.d == 2 and abs(np.trace(map.U_inf)) < CONSTRAINT_TOL
        convention = "sphere" if is_sphere else "matrix"
    matrix_energy = 0.5 * seminorm_squared(map, 0.5)
    return matrix_energy / 2 if convention == "sphere" else matrix_energy


# ============================================================
# 対称性
# ============================================================
def _rebuild(target: GrassmannTarget, pairs) -> RationalMap:
    return canonical(RationalMap(target, tuple(pairs)))


def canonical(map: RationalMap) -> RationalMap:
    """極を (Re z, Im z) の順に並べる."""
    order = sorted(range(map.N), key=lambda n: (map.residues[n].z.real, map.residues[n].z.imag))
    return RationalMap(map.target, tuple(map.residues[n] for n in order))


def rotate(map: RationalMap, W) -> RationalMap:
    """U ↦ W U W*（W はユニタリ）."""
    W = np.asarray(W, dtype=complex)
    target = GrassmannTarget(d=map.d, k=map.target.k, U_inf=W @ map.U_inf @ W.conj().T)
    return _rebuild(target, (ResiduePair(z=p.z, e=W @ p.e, xi=W @ p.xi) for p in map.residues))


def translate(map: RationalMap, shift: float) -> RationalMap:
    """U(x - shift)."""
    return _rebuild(map.target, (ResiduePair(z=p.z + shift, e=p.e, xi=p.xi) for p in map.residues))


def rescale(map: RationalMap, lam: float) -> RationalMap:
    """U(x/λ), λ > 0: 極 z ↦ λz, 留数 A ↦ λA."""
    if lam <= 0:
        raise ValueError("λ > 0 が必要です")
    return _rebuild(map.target, (ResiduePair(z=lam * p.z, e=p.e, xi=lam * p.xi) for p in map.residues))


def reflect(map: RationalMap) -> RationalMap:
    """U ↦ -U(-x): 極 z ↦ -z̄, 留数 A ↦ A*, U∞ ↦ -U∞."""
    target = GrassmannTarget.from_matrix(-map.U_inf)
    return _rebuild(
        target,
        (ResiduePair.from_factors(-np.conj(p.z), p.xi, p.e) for p in map.residues),
    )


def max_distance(a: RationalMap, b: RationalMap, grid=None) -> float:
    """グリッド上の sup_x ‖U_a(x) - U_b(x)‖_F."""
    grid = validation_grid(a) if grid is None else grid
    return float(np.max(np.linalg.norm(evaluate(a, grid) - evaluate(b, grid), axis=(-2, -1))))
