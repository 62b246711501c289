"""明示的フロー公式による厳密な時間発展.

時刻 t の解は M(t) = Z + tT（X* + tT_{U₀} の 𝔥₁ への制限）だけで決まる:

    Π₊V(t, x) の第 c 列 = (1/2πi) I₊[(M(t) - x)^{-1} Π₊V₀ の第 c 列]
                      = -Σ_j w_j e_j,   (M(t) - x) w = V0[:, c]

M(t) = S Λ S^{-1} と対角化すれば、新しい極は λ_n(t)、留数は
A_n(t) = ẽ_n r_nᵀ（ẽ_n = Σ_j S_{jn} e_j, r = S^{-1} V0）となる。
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from hwm.config import CONDITION_LIMIT, INJECTIVITY_MARGIN, POLE_MATCH_FRACTION
from hwm.errors import FallbackRefitWarning, LaxInjectivityError, PoleMatchingError
from hwm.hardy_ops import H1Basis, build_h1, conserved_traces, lax_spectrum, DEFAULT_TRACE_ORDERS
from hwm.rational_maps import (
    GrassmannTarget,
    RationalMap,
    ResiduePair,
    canonical,
    energy,
    evaluate,
    hwm_rhs,
    max_distance,
    reflect,
    sobolev_seminorm,
    validate,
    validation_grid,
)
from models.schemas import ConservationReport, ConservationRow


@dataclass(frozen=True, eq=False)
class Snapshot:
    """時刻 t の有理表現。fallback はグリッド再フィットで得たことを示す."""

    t: float
    map: RationalMap
    fallback: bool = False


@dataclass(frozen=True, eq=False)
class Trajectory:
    initial: RationalMap
    basis: H1Basis
    times: Tuple[float, ...]
    snapshots: Tuple[Snapshot, ...]
    diagnostics: ConservationReport = field(default_factory=ConservationReport)

    @property
    def maps(self) -> List[RationalMap]:
        return [snapshot.map for snapshot in self.snapshots]


def _target(basis: H1Basis) -> GrassmannTarget:
    return GrassmannTarget.from_matrix(basis.U_inf)


def flow_matrix(basis: H1Basis, t: float) -> np.ndarray:
    """M(t) = Z + tT."""
    return basis.Z + t * basis.T


def _check_injectivity(eigenvalues: np.ndarray, t: float) -> None:
    worst = float(np.max(eigenvalues.imag))
    if worst >= -INJECTIVITY_MARGIN:
        raise LaxInjectivityError(
            f"Lax 単射性が破れています: t={t} で Z + tT が実固有値を持ちます（max Im λ = {worst:.3e}）"
        )


# ============================================================
# 時間発展
# ============================================================
def evolve_snapshot(basis: H1Basis, t: float) -> Snapshot:
    """時刻 t の有理表現を再抽出する."""
    target = _target(basis)
    if basis.is_empty:
        return Snapshot(t=t, map=RationalMap.constant(target))

    M = flow_matrix(basis, t)
    eigenvalues, S = linalg.eig(M)
    _check_injectivity(eigenvalues, t)

    if np.linalg.cond(S) > CONDITION_LIMIT:
        warnings.warn(
            f"t={t}: M(t) の固有ベクトル行列の条件数が大きいため、グリッド再フィットに切り替えます",
            FallbackRefitWarning,
            stacklevel=2,
        )
        return Snapshot(t=t, map=_refit(basis, t, eigenvalues), fallback=True)

    directions = S.T @ basis.e
    coefficients = linalg.solve(S, basis.V0)
    residues = [
        ResiduePair.from_factors(pole, direction, np.conj(row))
        for pole, direction, row in zip(eigenvalues, directions, coefficients)
    ]
    return Snapshot(t=t, map=canonical(RationalMap(target, tuple(residues))))


def evolve(basis: H1Basis, t: float) -> RationalMap:
    """フロー公式で時刻 t の写像を返す."""
    return evolve_snapshot(basis, t).map


def _plus_part(basis: H1Basis, t: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    shape = x.shape
    flat = x.reshape(-1)
    shifted = flow_matrix(basis, t)[None, :, :] - flat[:, None, None] * np.eye(basis.N)
    rhs = np.broadcast_to(basis.V0, (flat.size,) + basis.V0.shape)
    try:
        W = np.linalg.solve(shifted, rhs)
    except np.linalg.LinAlgError as exc:
        raise LaxInjectivityError(f"t={t}: (Z + tT - x) が実数 x で特異です") from exc
    plus = -np.einsum("ja,xjc->xac", basis.e, W)
    return plus.reshape(shape + (basis.d, basis.d))


def evaluate_flow(basis: H1Basis, t: float, x) -> np.ndarray:
    """U(t, x) を線形方程式の解から直接評価する（固有分解を経由しない）."""
    x = np.asarray(x, dtype=float)
    if basis.is_empty:
        return np.broadcast_to(basis.U_inf, x.shape + basis.U_inf.shape).copy()
    plus = _plus_part(basis, t, x)
    return basis.U_inf + plus + np.conj(np.swapaxes(plus, -1, -2))


def _refit_grid(poles: np.ndarray) -> np.ndarray:
    reach = 10.0 * (1.0 + np.max(np.abs(poles.real)))
    clustered = [p.real + o * abs(p.imag) for p in poles for o in np.linspace(-3.0, 3.0, 13)]
    return np.unique(np.concatenate([np.linspace(-reach, reach, 801), clustered]))


def _refit(basis: H1Basis, t: float, eigenvalues: np.ndarray) -> RationalMap:
    """固有値を極として Π₊V(t) を最小二乗で有理関数に当てはめ、留数を階数1に射影する."""
    grid = _refit_grid(eigenvalues)
    samples = _plus_part(basis, t, grid).reshape(grid.size, -1)
    design = 1.0 / (grid[:, None] - eigenvalues[None, :])
    fitted, *_ = linalg.lstsq(design, samples)
    residues = []
    for pole, flat in zip(eigenvalues, fitted):
        u, s, vh = np.linalg.svd(flat.reshape(basis.d, basis.d))
        residues.append(ResiduePair(z=pole, e=u[:, 0], xi=s[0] * np.conj(vh[0])))
    return canonical(RationalMap(_target(basis), tuple(residues)))


def trajectory(basis: H1Basis, times: Sequence[float], initial: Optional[RationalMap] = None) -> Trajectory:
    """複数時刻のスナップショットと診断量."""
    times = tuple(float(t) for t in times)
    snapshots = tuple(evolve_snapshot(basis, t) for t in times)
    initial = initial if initial is not None else evolve(basis, 0.0)
    traj = Trajectory(initial=initial, basis=basis, times=times, snapshots=snapshots)
    return Trajectory(
        initial=initial,
        basis=basis,
        times=times,
        snapshots=snapshots,
        diagnostics=conservation_report(traj),
    )


# ============================================================
# 診断
# ============================================================
def conservation_report(traj: Trajectory, p_list: Sequence[float] = DEFAULT_TRACE_ORDERS) -> ConservationReport:
    """各時刻で 𝔥₁ を作り直し、スペクトル・I_p・エネルギーの t = 0 からのずれを測る."""
    if traj.basis.is_empty:
        return ConservationReport()

    reference = lax_spectrum(traj.basis, p_list)
    reference_eigenvalues = np.array(reference.eigenvalues)
    reference_energy = energy(traj.initial)

    rows = []
    for snapshot in traj.snapshots:
        basis = build_h1(snapshot.map)
        eigenvalues = np.array(lax_spectrum(basis, p_list).eigenvalues)
        if eigenvalues.shape == reference_eigenvalues.shape:
            # 実数列は昇順に並べれば最適対応になる
            spectrum_drift = float(np.max(np.abs(eigenvalues - reference_eigenvalues)))
        else:
            spectrum_drift = float("inf")
        traces = conserved_traces(basis, p_list)
        rows.append(
            ConservationRow(
                t=snapshot.t,
                spectrum_drift=spectrum_drift,
                trace_drift={
                    key: abs(value - reference.traces[key])
                    for key, value in zip(reference.traces, traces)
                },
                energy_drift=abs(energy(snapshot.map) - reference_energy),
                constraint_residual=validate(snapshot.map).involution_residual,
                max_im_pole=float(np.max(snapshot.map.poles.imag)),
                fallback=snapshot.fallback,
            )
        )

    return ConservationReport(
        rows=rows,
        max_spectrum_drift=max(row.spectrum_drift for row in rows),
        max_trace_drift=max(max(row.trace_drift.values(), default=0.0) for row in rows),
        max_energy_drift=max(row.energy_drift for row in rows),
        max_constraint_residual=max(row.constraint_residual for row in rows),
    )


def default_step(t: float) -> float:
    return 1e-3 * max(1.0, abs(t))


def pde_residual(basis: H1Basis, t: float, h: Optional[float] = None, grid=None) -> float:
    """中心差分 (U(t+h) - U(t-h))/2h と -(i/2)[U, |D|U] の差の最大 Frobenius ノルム."""
    h = default_step(t) if h is None else h
    if h <= 0:
        raise ValueError("h > 0 が必要です")
    if basis.is_empty:
        return 0.0
    snapshot = evolve(basis, t)
    grid = validation_grid(snapshot) if grid is None else np.asarray(grid, dtype=float)
    derivative = (evaluate_flow(basis, t + h, grid) - evaluate_flow(basis, t - h, grid)) / (2 * h)
    return float(np.max(np.linalg.norm(derivative - hwm_rhs(snapshot, grid), axis=(-2, -1))))


def pde_residual_order(basis: H1Basis, t: float, hs: Sequence[float] = (1e-2, 1e-3, 1e-4), grid=None) -> Tuple[List[float], float]:
    """複数の h での残差と、log-log 最小二乗による収束次数."""
    if not basis.is_empty and grid is None:
        grid = validation_grid(evolve(basis, t))
    residuals = [pde_residual(basis, t, h, grid) for h in hs]
    if min(residuals) <= 0.0:
        return residuals, float("nan")
    slope, _ = np.polyfit(np.log(hs), np.log(residuals), 1)
    return residuals, float(slope)


def match_poles(reference: np.ndarray, poles: np.ndarray) -> np.ndarray:
    """poles を reference に最近傍で対応付ける並べ替えを返す.

    移動量が極間距離の POLE_MATCH_FRACTION 倍を超えると対応が曖昧とみなす。
    """
    cost = np.abs(reference[:, None] - poles[None, :])
    rows, cols = linear_sum_assignment(cost)
    order = cols[np.argsort(rows)]
    displacement = float(np.max(np.abs(poles[order] - reference))) if len(reference) else 0.0
    if len(reference) > 1:
        gaps = np.abs(reference[:, None] - reference[None, :])
        gaps[np.diag_indices(len(reference))] = np.inf
        if displacement > POLE_MATCH_FRACTION * gaps.min():
            raise PoleMatchingError(
                f"極の対応付けが曖昧です（移動量 {displacement:.3e}, 最小極間距離 {gaps.min():.3e}）"
            )
    return order


@dataclass(frozen=True)
class ResidueDynamicsResult:
    """Ȧ_n = Σ_{m≠n} [A_n, A_m]/(z_n - z_m)² の差分検査結果."""

    residual: float
    prefactor_i_residual: float
    pole_velocity_residual: float


def _interaction(poles: np.ndarray, residues: np.ndarray) -> np.ndarray:
    out = np.zeros_like(residues)
    for n in range(len(poles)):
        for m in range(len(poles)):
            if m != n:
                commutator = residues[n] @ residues[m] - residues[m] @ residues[n]
                out[n] += commutator / (poles[n] - poles[m]) ** 2
    return out


def residue_dynamics_check(basis: H1Basis, t: float, h: Optional[float] = None) -> ResidueDynamicsResult:
    """留数と極の運動方程式を中心差分で確かめる（PoleMatchingError は呼び出し側で扱う）."""
    h = default_step(t) if h is None else h
    if basis.is_empty:
        return ResidueDynamicsResult(0.0, 0.0, 0.0)

    center = evolve(basis, t)
    before = evolve(basis, t - h)
    after = evolve(basis, t + h)
    order_before = match_poles(center.poles, before.poles)
    order_after = match_poles(center.poles, after.poles)

    A = center.residue_stack
    A_dot = (after.residue_stack[order_after] - before.residue_stack[order_before]) / (2 * h)
    z_dot = (after.poles[order_after] - before.poles[order_before]) / (2 * h)
    interaction = _interaction(center.poles, A)
    velocities = np.diag(build_h1(center).T)

    def worst(difference: np.ndarray) -> float:
        return float(np.max(np.linalg.norm(difference, axis=(-2, -1))))

    return ResidueDynamicsResult(
        residual=worst(A_dot - interaction),
        prefactor_i_residual=worst(A_dot - 1j * interaction),
        pole_velocity_residual=float(np.max(np.abs(z_dot - velocities))),
    )


def pole_velocities(basis: H1Basis, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """時刻 t の極 z_n(t) と速度 ż_n = ⟨B_n e_n, e_n⟩."""
    snapshot = evolve(basis, t)
    return snapshot.poles, np.diag(build_h1(snapshot).T).copy()


# ============================================================
# 対称性による整合性検査
# ============================================================
def time_reversal_check(map: RationalMap, t: float, grid=None) -> float:
    """反転データ -u₀(-x) を -t まで発展させたものと、発展後の反転との差."""
    forward = reflect(evolve(build_h1(map), t))
    backward = evolve(build_h1(reflect(map)), -t)
    return max_distance(forward, backward, grid)


def group_consistency_check(basis: H1Basis, t1: float, t2: float, grid=None) -> float:
    """スナップショットから再出発した発展 evolve(evolve(t₁), t₂ - t₁) と evolve(t₂) の差."""
    direct = evolve(basis, t2)
    restarted = evolve(build_h1(evolve(basis, t1)), t2 - t1)
    return max_distance(direct, restarted, grid)


def seminorm_history(basis: H1Basis, times: Sequence[float], s_list: Sequence[float] = (0.5, 1.0, 2.0)) -> Dict[float, np.ndarray]:
    """各 s について ‖U(t) - U∞‖_{Ḣ^s} の時系列."""
    maps = [evolve(basis, t) for t in times]
    return {s: np.array([sobolev_seminorm(m, s) for m in maps]) for s in s_list}


def snapshot_values(traj: Trajectory, grid) -> np.ndarray:
    """(len(times), len(grid), d, d) の値配列."""
    return np.stack([evaluate(snapshot.map, grid) for snapshot in traj.snapshots])
