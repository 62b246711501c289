"""孤立波・多ソリトンの構成とソリトン分解.

球面値の基底状態ソリトン（速度 v, 中心 y, 深さ δ）は

    U∞ = σ₃,   A = s·σ,   s = δ√(1-v²) (n₁ + i n₂),   z = y - iδ
    n₁ = e₁,   n₂ = (0, v, -√(1-v²))

で与えられ、s·s = 0 と B A + A B = 0 の両方を満たす。
多ソリトンは各スピンの向き n₁ + i n₂ を固定したまま、スカラー係数を不動点反復で決める。
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from hwm.config import (
    FIXED_POINT_MAX_ITER,
    FIXED_POINT_TOL,
    POLE_MATCH_FRACTION,
    SEPARATION_FACTOR,
)
from hwm.errors import (
    ConstraintViolationError,
    ConvergenceError,
    DegenerateSpectrumError,
    DegenerateVelocityWarning,
    PoleMatchingError,
    SeparationError,
    SpectrumError,
)
from hwm.flow import evolve
from hwm.hardy_ops import H1Basis, build_h1, iplus, lax_spectrum
from hwm.rational_maps import (
    PAULI,
    GrassmannTarget,
    PoleExpansion,
    RationalMap,
    ResiduePair,
    apply_halfD,
    difference,
    evaluate,
    evaluate_derivative,
    require_valid,
    sobolev_seminorm,
    validate,
    validation_grid,
)
from models.schemas import ConvergenceRow


@dataclass(frozen=True, eq=False)
class SolitonDatum:
    """速度 v・中心 y・深さ δ の孤立波 Q_v."""

    v: float
    y: float
    delta: float
    A: np.ndarray
    profile: RationalMap

    @property
    def pole(self) -> complex:
        return complex(self.y, -self.delta)

    def translated(self, t: float) -> PoleExpansion:
        """Q_v(x - vt) の極展開."""
        return PoleExpansion(
            constant=self.profile.U_inf,
            poles=[self.pole + self.v * t],
            residues=self.A[None, :, :],
        )


@dataclass(frozen=True, eq=False)
class ResolutionReport:
    """ソリトン分解の結果.

    Attributes:
        solitons: 速度の昇順に並んだ孤立波
        w: 摂動データ w_n = ⟨Zφ_n, φ_n⟩_G（Im w_n < 0）
        phi: G-正規直交な固有ベクトル（列）
        iplus_norms: ‖I₊(φ_n)‖²（= 4πδ_n）
        solitary_residuals: 各プロファイルの孤立波恒等式の残差
        convergence: resolution_error の行
    """

    solitons: Tuple[SolitonDatum, ...]
    w: np.ndarray
    phi: np.ndarray
    iplus_norms: np.ndarray
    solitary_residuals: np.ndarray
    convergence: List[ConvergenceRow] = field(default_factory=list)

    @property
    def velocities(self) -> np.ndarray:
        return np.array([s.v for s in self.solitons])

    @property
    def N(self) -> int:
        return len(self.solitons)

    def asymptotic_profile(self, t: float) -> PoleExpansion:
        """U^±(t) = Σ_n Q_{v_n}(x - v_n t) - (N - 1)U∞ の極展開."""
        if not self.solitons:
            return PoleExpansion(constant=np.zeros((1, 1)), poles=[], residues=np.zeros((0, 1, 1)))
        U_inf = self.solitons[0].profile.U_inf
        return PoleExpansion(
            constant=U_inf,
            poles=[s.pole + s.v * t for s in self.solitons],
            residues=np.stack([s.A for s in self.solitons]),
        )


# ============================================================
# 孤立波
# ============================================================
def spin_directions(v: float) -> Tuple[np.ndarray, np.ndarray]:
    """スピンの向き n₁ = e₁ と n₂ = n_v × n₁（n_v = (0, √(1-v²), v)）."""
    root = np.sqrt(1.0 - v * v)
    return np.array([1.0, 0.0, 0.0]), np.array([0.0, v, -root])


def _spin_matrix(spin: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", spin, PAULI)


def _check_velocity(v: float) -> None:
    if not -1.0 < v < 1.0:
        raise ConstraintViolationError(f"速度は |v| < 1 である必要があります（v = {v}）")


def _soliton_map(spins: Sequence[np.ndarray], poles: Sequence[complex]) -> RationalMap:
    target = GrassmannTarget(d=2, k=1, U_inf=PAULI[2])
    residues = tuple(ResiduePair.from_matrix(z, _spin_matrix(s)) for z, s in zip(poles, spins))
    return RationalMap(target, residues)


def ground_spin(v: float, delta: float = 1.0) -> np.ndarray:
    n1, n2 = spin_directions(v)
    return delta * np.sqrt(1.0 - v * v) * (n1 + 1j * n2)


def single_soliton(v: float, y: float = 0.0, delta: float = 1.0) -> SolitonDatum:
    """基底状態ソリトン Q_v（極 y - iδ）."""
    _check_velocity(v)
    if delta <= 0:
        raise ConstraintViolationError(f"深さは正である必要があります（δ = {delta}）")
    spin = ground_spin(v, delta)
    profile = require_valid(_soliton_map([spin], [complex(y, -delta)]))
    return SolitonDatum(v=v, y=y, delta=delta, A=np.array(profile.residues[0].A), profile=profile)


def spin_vector_candidates(v: float) -> Dict[str, float]:
    """スピンベクトルの2通りのスケーリングについて制約残差を返す.

    real_scaling は √(1-v²)(n₁ + i n₂)、imaginary_scaling は i√(1-v²)(n₁ + i n₂)。
    制約を満たすのは前者のみ。
    """
    n1, n2 = spin_directions(v)
    root = np.sqrt(1.0 - v * v)
    candidates = {"real_scaling": root, "imaginary_scaling": 1j * root}
    residuals = {}
    for name, scale in candidates.items():
        spin = scale * (n1 + 1j * n2)
        report = validate(_soliton_map([spin], [-1j]))
        residuals[name] = max(report.anticommutator_residual, abs(spin @ spin))
    return residuals


# ============================================================
# 多ソリトン
# ============================================================
def _closest_pair(poles: np.ndarray) -> Tuple[Tuple[int, int], float]:
    gaps = np.abs(poles[:, None] - poles[None, :])
    gaps[np.diag_indices(len(poles))] = np.inf
    j, k = np.unravel_index(np.argmin(gaps), gaps.shape)
    return (int(min(j, k)), int(max(j, k))), float(gaps[j, k])


def _fixed_point_step(spins: np.ndarray, poles: np.ndarray, minus: np.ndarray) -> np.ndarray:
    # c_j = -iδ_j (n₋ · m̄_j),  m̄_j = e₃ + Σ_{k≠j} (s_k/(z̄_j - z_k) + s̄_k/(z̄_j - z̄_k))
    N = len(poles)
    delta = -poles.imag
    plus = np.conj(minus)
    updated = np.empty_like(spins)
    for j in range(N):
        field_bar = np.array([0.0, 0.0, 1.0], dtype=complex)
        for k in range(N):
            if k != j:
                field_bar += spins[k] / (np.conj(poles[j]) - poles[k])
                field_bar += np.conj(spins[k]) / (np.conj(poles[j]) - np.conj(poles[k]))
        scalar = -1j * delta[j] * (minus[j] @ field_bar)
        updated[j] = scalar * plus[j]
    return updated


def multi_soliton(
    v_list: Sequence[float],
    z_list: Sequence[complex],
    tol: float = FIXED_POINT_TOL,
    max_iter: int = FIXED_POINT_MAX_ITER,
) -> RationalMap:
    """速度 v_j と極 z_j を持つ多ソリトン初期値を不動点反復で構成する."""
    v = np.asarray(v_list, dtype=float)
    poles = np.asarray(z_list, dtype=complex)
    if v.shape != poles.shape or v.size == 0:
        raise ValueError("v_list と z_list は同じ長さ（≥ 1）である必要があります")
    for value in v:
        _check_velocity(value)
    if np.any(poles.imag >= 0):
        raise ConstraintViolationError("すべての極は下半平面にある必要があります")

    if v.size > 1:
        pair, distance = _closest_pair(poles)
        required = SEPARATION_FACTOR * float(np.max(1.0 / (1.0 - v**2)))
        if distance < required:
            raise SeparationError(
                f"極 {pair[0]} と {pair[1]} の距離 {distance:.3f} が必要値 {required:.3f} より小さいです"
                f"（ε = {1.0 / distance:.3e}）"
            )
        if np.unique(v).size < v.size:
            warnings.warn(
                "等しい速度が指定されました。スペクトルが縮退している可能性があります",
                DegenerateVelocityWarning,
                stacklevel=2,
            )

    delta = -poles.imag
    directions = [spin_directions(value) for value in v]
    minus = np.array([n1 - 1j * n2 for n1, n2 in directions])
    spins = np.array([ground_spin(value, depth) for value, depth in zip(v, delta)])

    for _ in range(max_iter):
        updated = _fixed_point_step(spins, poles, minus)
        change = float(np.max(np.linalg.norm(updated - spins, axis=1)))
        spins = updated
        if change <= tol:
            break
    else:
        pair, distance = _closest_pair(poles) if v.size > 1 else ((0, 0), np.inf)
        raise ConvergenceError(
            f"不動点反復が {max_iter} 回で収束しません（極 {pair} の間隔 {distance:.3f}）",
            pair=pair,
            epsilon=1.0 / distance,
        )

    return require_valid(_soliton_map(spins, poles))


# ============================================================
# ソリトン分解
# ============================================================
def _gauge_columns(phi: np.ndarray) -> np.ndarray:
    phi = phi.copy()
    for n in range(phi.shape[1]):
        lead = phi[np.argmax(np.abs(phi[:, n])), n]
        phi[:, n] *= np.conj(lead) / abs(lead)
    return phi


def check_solitary(profile: RationalMap, v: float, grid=None) -> float:
    """max_x ‖-2iv Q'(x) - [Q(x), |D|Q(x)]‖_F."""
    grid = validation_grid(profile) if grid is None else np.asarray(grid, dtype=float)
    Q = evaluate(profile, grid)
    W = apply_halfD(profile)(grid)
    residual = -2j * v * evaluate_derivative(profile, grid) - (Q @ W - W @ Q)
    return float(np.max(np.linalg.norm(residual, axis=(-2, -1))))


def resolve(basis: H1Basis, U_inf=None) -> ResolutionReport:
    """単純な離散スペクトルから速度・中心・深さ・留数を取り出す."""
    U_inf = basis.U_inf if U_inf is None else np.asarray(U_inf, dtype=complex)
    if basis.is_empty:
        empty = np.zeros(0)
        return ResolutionReport((), empty.astype(complex), np.zeros((0, 0), complex), empty, empty)

    spectrum = lax_spectrum(basis)
    if not spectrum.simple:
        raise DegenerateSpectrumError(
            f"離散スペクトルが縮退しています（{spectrum.eigenvalues}）。ソリトン分解は適用できません"
        )

    GT = basis.G @ basis.T
    hermitian = 0.5 * (GT + GT.conj().T)
    gram = 0.5 * (basis.G + basis.G.conj().T)
    try:
        velocities, phi = linalg.eigh(hermitian, gram)
    except linalg.LinAlgError as exc:
        raise SpectrumError(f"G-固有値問題の解法に失敗しました: {exc}") from exc
    phi = _gauge_columns(phi)

    w = np.einsum("jn,jk,kn->n", np.conj(phi), basis.G @ basis.Z, phi)
    depths = -w.imag
    if np.any(depths <= 0):
        raise SpectrumError(f"Im w_n < 0 が成り立ちません（w = {w.tolist()}）")

    alpha = phi.conj().T @ basis.G @ basis.V0
    directions = phi.T @ basis.e
    target = GrassmannTarget.from_matrix(U_inf)

    solitons = []
    residuals = []
    norms = []
    for n in range(basis.N):
        pair = ResiduePair.from_factors(w[n], directions[n], np.conj(alpha[n]))
        profile = RationalMap(target, (pair,))
        solitons.append(
            SolitonDatum(v=float(velocities[n]), y=float(w[n].real), delta=float(depths[n]), A=np.array(pair.A), profile=profile)
        )
        residuals.append(check_solitary(profile, float(velocities[n])))
        norms.append(float(np.linalg.norm(iplus(basis, phi[:, n])) ** 2))

    return ResolutionReport(
        solitons=tuple(solitons),
        w=w,
        phi=phi,
        iplus_norms=np.array(norms),
        solitary_residuals=np.array(residuals),
    )


def _check_profile_match(actual: np.ndarray, predicted: np.ndarray, depths: np.ndarray) -> None:
    cost = np.abs(actual[:, None] - predicted[None, :])
    rows, cols = linear_sum_assignment(cost)
    mismatch = float(cost[rows, cols].max())
    if mismatch > POLE_MATCH_FRACTION * float(depths.min()):
        raise PoleMatchingError(f"極とプロファイルの対応が取れません（ずれ {mismatch:.3e}）")


def resolution_error(
    basis: H1Basis,
    report: ResolutionReport,
    t: float,
    s_list: Sequence[float] = (0.5,),
    grid=None,
) -> ConvergenceRow:
    """U(t) - U^±(t) の sup ノルムと Ḣ^s 半ノルム."""
    if abs(t) < 1:
        raise ValueError("|t| ≥ 1 が必要です")
    current = evolve(basis, t)
    asymptotic = report.asymptotic_profile(t)
    if report.N:
        _check_profile_match(current.poles, asymptotic.poles, np.array([s.delta for s in report.solitons]))
    gap = difference(current, asymptotic)
    grid = validation_grid(current) if grid is None else np.asarray(grid, dtype=float)
    sup = float(np.max(np.linalg.norm(gap(grid), axis=(-2, -1)))) if report.N else 0.0
    return ConvergenceRow(
        t=float(t),
        sup=sup,
        Hs={_s_key(s): sobolev_seminorm(gap, s) if report.N else 0.0 for s in s_list},
    )


def _s_key(s: float) -> str:
    return f"{s:g}"


def convergence_table(
    basis: H1Basis,
    report: ResolutionReport,
    t_list: Sequence[float],
    s_list: Sequence[float] = (0.5,),
) -> List[ConvergenceRow]:
    return [resolution_error(basis, report, t, s_list) for t in t_list]


def fit_slopes(rows: Sequence[ConvergenceRow]) -> Dict[str, float]:
    """誤差の log-log 傾き（誤差がゼロの系列は除く）."""
    times = np.log(np.abs([row.t for row in rows]))
    series = {"sup": [row.sup for row in rows]}
    for key in rows[0].Hs if rows else []:
        series[f"H{key}"] = [row.Hs[key] for row in rows]
    slopes = {}
    for name, values in series.items():
        values = np.asarray(values)
        if len(values) >= 2 and np.all(values > 0):
            slopes[name] = float(np.polyfit(times, np.log(values), 1)[0])
    return slopes


def resolution_drift(a: ResolutionReport, b: ResolutionReport, t: float) -> float:
    """時刻 0 の分解 a と時刻 t のスナップショットの分解 b の差（中心は y - vt で比較）."""
    if a.N != b.N:
        return float("inf")
    if not a.N:
        return 0.0
    drift = 0.0
    for left, right in zip(a.solitons, b.solitons):
        drift = max(
            drift,
            abs(left.v - right.v),
            abs(left.y - (right.y - right.v * t)),
            abs(left.delta - right.delta),
            float(np.linalg.norm(left.A - right.A)),
        )
    return drift


def resolution_invariance_check(basis: H1Basis, t: float) -> float:
    """スナップショットから作り直した 𝔥₁ の分解が時刻 0 の分解と一致するか."""
    return resolution_drift(resolve(basis), resolve(build_h1(evolve(basis, t))), t)


def pulled_back_poles(basis: H1Basis, report: ResolutionReport, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    時刻 t のスナップショットの極と留数をソリトンごとに並べ、極を z_n(t) - v_n t に引き戻す.

    Returns:
        (引き戻した極 (N,), 留数 (N, d, d))。順序は report.solitons に揃える
    """
    snapshot = evolve(basis, t)
    if snapshot.N != report.N:
        raise PoleMatchingError(f"極の個数 {snapshot.N} とソリトン数 {report.N} が一致しません")
    predicted = np.array([s.pole + s.v * t for s in report.solitons])
    _check_profile_match(snapshot.poles, predicted, np.array([s.delta for s in report.solitons]))
    rows, cols = linear_sum_assignment(np.abs(snapshot.poles[:, None] - predicted[None, :]))
    order = rows[np.argsort(cols)]
    poles = snapshot.poles[order] - report.velocities * t
    return poles, snapshot.residue_stack[order]


def scattering_check(basis: H1Basis, horizon: float) -> float:
    """
    t = ±horizon のスナップショットを t = 0 に引き戻したときの極・留数の差.

    散乱が自明なら差は horizon → ∞ で 0 に近づく（速さは 1/horizon）。
    """
    if horizon <= 0:
        raise ValueError("horizon は正である必要があります")
    report = resolve(basis)
    if not report.N:
        return 0.0
    forward_poles, forward_residues = pulled_back_poles(basis, report, horizon)
    backward_poles, backward_residues = pulled_back_poles(basis, report, -horizon)
    return max(
        float(np.max(np.abs(forward_poles - backward_poles))),
        float(np.max(np.linalg.norm(forward_residues - backward_residues, axis=(-2, -1)))),
    )
