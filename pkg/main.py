"""半波写像シミュレータのメインエントリーポイント.

終了コード: 0 正常, 2 検証エラー, 3 時間発展エラー, 4 スペクトルエラー
"""
import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from hwm.config import output_dir as default_output_dir
from hwm.errors import ConstraintViolationError, HWMError
from hwm.serialization import (
    convergence_frame,
    is_sphere,
    read_map,
    resolution_to_output,
    samples_frame,
    write_csv,
    write_map,
    write_model,
)
from hwm.flow import snapshot_values
from hwm.rational_maps import require_valid
from models.schemas import ComplexJSON, RunConfig
from workflows import run_build, run_checks, run_evolve, run_resolve, run_spectrum


def _floats(text: str) -> List[float]:
    return [float(item) for item in text.split(",") if item.strip()]


def _complexes(text: str) -> List[ComplexJSON]:
    return [ComplexJSON.of(complex(item.replace(" ", ""))) for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="有理データに対する半波写像方程式の厳密シミュレータ")
    parser.add_argument("--output-dir", type=str, default=None, help="出力ディレクトリ（デフォルト: HWM_OUTPUT_DIR または outputs）")
    parser.add_argument("--name", type=str, default="run", help="出力ファイル名の接頭辞（デフォルト: run）")
    parser.add_argument("--quiet", action="store_true", help="進捗を表示しない")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="初期データを構成して JSON に書き出す")
    build.add_argument("kind", choices=["constant", "single", "multi", "stereographic", "random"])
    build.add_argument("--v", type=_floats, default=[0.5], help="速度（カンマ区切り）")
    build.add_argument("--y", type=_floats, default=[0.0], help="中心（カンマ区切り）")
    build.add_argument("--delta", type=float, default=1.0, help="single の深さ")
    build.add_argument("--d", type=int, default=2)
    build.add_argument("--k", type=int, default=1)
    build.add_argument("--P", type=_complexes, default=[], help="分子の係数（定数項から、例: 0,1）")
    build.add_argument("--Q", type=_complexes, default=[], help="分母の係数（定数項から）")
    build.add_argument("--N", type=int, default=2, help="random の極の数")
    build.add_argument("--seed", type=int, default=0)

    evolve = sub.add_parser("evolve", help="時間発展させてスナップショット・CSV・診断を書き出す")
    evolve.add_argument("map", type=str, help="写像 JSON")
    evolve.add_argument("--times", type=_floats, default=[0.0, 1.0, 10.0])
    evolve.add_argument("--x-min", type=float, default=-20.0)
    evolve.add_argument("--x-max", type=float, default=20.0)
    evolve.add_argument("--grid-points", type=int, default=201)

    spectrum = sub.add_parser("spectrum", help="Lax スペクトルを計算する")
    spectrum.add_argument("map", type=str)

    resolve = sub.add_parser("resolve", help="ソリトン分解と収束表")
    resolve.add_argument("map", type=str)
    resolve.add_argument("--t-list", type=_floats, default=[1e2, 1e3, 1e4])
    resolve.add_argument("--s-list", type=_floats, default=[0.5, 1.0])

    check = sub.add_parser("check", help="不変量スイートを実行する")
    check.add_argument("map", type=str)
    check.add_argument("--suite", choices=["fast", "full"], default="fast")
    check.add_argument("--cayley-M", type=int, default=64)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """argparse の結果を RunConfig にまとめる."""
    fields = {"name": args.name, "command": args.command, "output_dir": args.output_dir}
    if args.command == "build":
        fields.update(
            kind=args.kind, v=args.v, y=args.y, delta=args.delta, d=args.d, k=args.k,
            P=args.P, Q=args.Q, N=args.N, seed=args.seed,
        )
    else:
        fields["input_map"] = args.map
    if args.command == "evolve":
        fields.update(times=args.times, x_min=args.x_min, x_max=args.x_max, grid_points=args.grid_points)
    if args.command == "resolve":
        fields.update(t_list=args.t_list, s_list=args.s_list)
    if args.command == "check":
        fields.update(suite=args.suite, cayley={"M": args.cayley_M})
    return RunConfig(**fields)


def _report_error(exc: Exception, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    report = getattr(exc, "report", None)
    if report is not None:
        payload["report"] = report.model_dump()
    print(json.dumps(payload, ensure_ascii=False, indent=2), file=sys.stderr)
    return code


async def execute(config: RunConfig, verbose: bool = True) -> int:
    """
    RunConfig 1件を実行して成果物を書き出す.

    Args:
        config: 実行設定
        verbose: 詳細出力

    Returns:
        終了コード
    """
    out = Path(config.output_dir or default_output_dir())
    out.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []

    try:
        if config.command == "build":
            map, report = await run_build(config, verbose=verbose)
            if not report.passed:
                raise ConstraintViolationError("構成した写像が検証に失敗しました", report)
            written.append(write_map(out / f"{config.name}_map.json", map))
            return_code = 0

        else:
            map = read_map(config.input_map)
            if config.command != "check":
                require_valid(map, config.tol)

            if config.command == "evolve":
                traj = await run_evolve(map, config.times, verbose=verbose)
                grid = np.linspace(config.x_min, config.x_max, config.grid_points)
                for index, snapshot in enumerate(traj.snapshots):
                    written.append(write_map(out / f"{config.name}_snapshot_{index:03d}.json", snapshot.map))
                frame = samples_frame(traj.times, grid, snapshot_values(traj, grid), is_sphere(map))
                written.append(write_csv(out / f"{config.name}_samples.csv", frame))
                written.append(write_model(out / f"{config.name}_diagnostics.json", traj.diagnostics))
                return_code = 0

            elif config.command == "spectrum":
                report = await run_spectrum(map, verbose=verbose)
                written.append(write_model(out / f"{config.name}_spectrum.json", report))
                return_code = 0

            elif config.command == "resolve":
                report, slopes = await run_resolve(map, config.t_list, config.s_list, verbose=verbose)
                written.append(write_model(out / f"{config.name}_resolution.json", resolution_to_output(report, slopes)))
                written.append(write_csv(out / f"{config.name}_convergence.csv", convergence_frame(report.convergence)))
                return_code = 0

            else:
                report = await run_checks(map, suite=config.suite, cayley=config.cayley, verbose=verbose)
                written.append(write_model(out / f"{config.name}_check.json", report))
                failed_validation = any(c.name == "validate" and not c.passed for c in report.checks)
                return_code = 0 if report.passed else (2 if failed_validation else 1)

    except HWMError as exc:
        return _report_error(exc, exc.exit_code)
    except ValidationError as exc:
        return _report_error(exc, 2)
    except ValueError as exc:
        return _report_error(exc, 2)

    if verbose:
        print("\n" + "=" * 80)
        print("📁 結果を保存しました")
        print("=" * 80)
        for path in written:
            print(f"{path}")
        print("=" * 80)
    return return_code


async def main(argv: Optional[List[str]] = None) -> int:
    """メイン実行関数."""
    # .env ファイルから環境変数を読み込む
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ValidationError as exc:
        return _report_error(exc, 2)
    try:
        return await execute(config, verbose=not args.quiet)
    except Exception as e:
        print(f"\n❌ エラーが発生しました: {e}")
        raise


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
