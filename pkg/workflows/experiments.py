"""初期データの構成・時間発展・スペクトル・ソリトン分解のワークフロー."""
import asyncio
from dataclasses import replace
from typing import List, Sequence, Tuple

import numpy as np

from hwm.config import num_threads
from hwm.flow import Snapshot, Trajectory, conservation_report, evolve_snapshot
from hwm.hardy_ops import build_h1, lax_spectrum
from hwm.rational_maps import GrassmannTarget, RationalMap, from_stereographic, require_valid, validate
from hwm.sampling import random_grassmann_map, random_sphere_map
from hwm.solitons import ResolutionReport, convergence_table, fit_slopes, multi_soliton, resolve, single_soliton
from models.schemas import RunConfig, SpectralReport, ValidationReport


def build_map(config: RunConfig) -> RationalMap:
    """RunConfig.kind に従って初期データを作る（検証に失敗すれば例外）."""
    if config.kind == "constant":
        return RationalMap.constant(GrassmannTarget.standard(config.d, config.k))
    if config.kind == "single":
        return single_soliton(config.v[0], config.y[0], config.delta).profile
    if config.kind == "multi":
        if len(config.v) != len(config.y):
            raise ValueError("multi には同じ長さの v と y が必要です")
        return multi_soliton(config.v, [complex(y, -1.0) for y in config.y])
    if config.kind == "stereographic":
        sphere, _ = from_stereographic(
            [c.to_complex() for c in config.P],
            [c.to_complex() for c in config.Q],
        )
        return sphere.map
    rng = np.random.default_rng(config.seed)
    if config.d == 2 and config.k == 1:
        return random_sphere_map(rng, config.N).map
    return require_valid(random_grassmann_map(rng, config.d, config.k, config.N))


async def run_build(config: RunConfig, verbose: bool = True) -> Tuple[RationalMap, ValidationReport]:
    """
    初期データを構成して検証する.

    Args:
        config: 実行設定（kind と各パラメータ）
        verbose: ログ表示

    Returns:
        (写像, 検証レポート)
    """
    if verbose:
        print("=" * 80)
        print(f"🔧 初期データを構成します（kind = {config.kind}）")
        print("=" * 80)

    map = await asyncio.to_thread(build_map, config)
    report = await asyncio.to_thread(validate, map, config.tol)

    if verbose:
        status = "✅ 検証に合格" if report.passed else "❌ 検証に失敗"
        print(f"{status}: d={map.d}, k={map.target.k}, N={map.N}")
        for pair in map.residues:
            print(f"   極 z = {pair.z.real:+.6f} {pair.z.imag:+.6f}i")
        for violation in report.violations:
            print(f"   ⚠️  {violation}")
        print()
    return map, report


async def run_evolve(
    map: RationalMap,
    times: Sequence[float],
    verbose: bool = True,
) -> Trajectory:
    """
    フロー公式で各時刻のスナップショットを並列に計算し、保存量の診断を付ける.

    Args:
        map: 初期データ
        times: 時刻のリスト
        verbose: ログ表示

    Returns:
        診断付きの Trajectory
    """
    basis = build_h1(map)
    limiter = asyncio.Semaphore(num_threads())

    if verbose:
        print("=" * 80)
        print(f"⏱️  時間発展を計算します（N = {basis.N}, 時刻数 = {len(times)}）")
        print("=" * 80)

    async def one(t: float) -> Snapshot:
        async with limiter:
            snapshot = await asyncio.to_thread(evolve_snapshot, basis, float(t))
        if verbose:
            tag = " [fallback]" if snapshot.fallback else ""
            print(f"   ✅ t = {t:g}{tag}")
        return snapshot

    snapshots: List[Snapshot] = await asyncio.gather(*(one(t) for t in times))
    traj = Trajectory(initial=map, basis=basis, times=tuple(float(t) for t in times), snapshots=tuple(snapshots))
    diagnostics = await asyncio.to_thread(conservation_report, traj)
    traj = replace(traj, diagnostics=diagnostics)

    if verbose:
        print("📊 保存量のドリフト")
        print(f"   スペクトル: {diagnostics.max_spectrum_drift:.3e}")
        print(f"   I_p:        {diagnostics.max_trace_drift:.3e}")
        print(f"   エネルギー: {diagnostics.max_energy_drift:.3e}")
        print(f"   制約残差:   {diagnostics.max_constraint_residual:.3e}")
        print()
    return traj


async def run_spectrum(map: RationalMap, verbose: bool = True) -> SpectralReport:
    """T|𝔥₁ の離散スペクトルを計算する."""
    report = await asyncio.to_thread(lambda: lax_spectrum(build_h1(map)))
    if verbose:
        print("=" * 80)
        print("🔍 Lax スペクトル")
        print("=" * 80)
        print(f"固有値: {report.eigenvalues}")
        print(f"単純: {report.simple}（T² 基準: {report.simple_squared}）")
        print(f"保存量: {report.traces}")
        print()
    return report


async def run_resolve(
    map: RationalMap,
    t_list: Sequence[float],
    s_list: Sequence[float],
    verbose: bool = True,
) -> Tuple[ResolutionReport, dict]:
    """
    ソリトン分解を行い、各時刻での誤差と log-log 傾きを求める.

    Args:
        map: 初期データ
        t_list: 誤差を測る時刻（|t| ≥ 1）
        s_list: Ḣ^s の指数
        verbose: ログ表示

    Returns:
        (収束表付きの ResolutionReport, 傾き)
    """
    basis = build_h1(map)
    if verbose:
        print("=" * 80)
        print("🧩 ソリトン分解を開始します")
        print("=" * 80)

    report = await asyncio.to_thread(resolve, basis)
    rows = await asyncio.to_thread(convergence_table, basis, report, t_list, s_list)
    report = replace(report, convergence=rows)
    slopes = fit_slopes(rows) if rows else {}

    if verbose:
        for soliton, residual in zip(report.solitons, report.solitary_residuals):
            print(
                f"   v = {soliton.v:+.6f}, y = {soliton.y:+.6f}, δ = {soliton.delta:.6f}"
                f"（孤立波残差 {residual:.2e}）"
            )
        for row in rows:
            print(f"   t = {row.t:g}: sup = {row.sup:.3e}, Ḣ^s = {row.Hs}")
        if slopes:
            print(f"📈 傾き: {slopes}")
        print()
    return report, slopes
