"""入力ディレクトリ内の RunConfig をバッチ実行する."""
import argparse
import asyncio
import sys
from pathlib import Path
from typing import Dict, Optional

from dotenv import load_dotenv

from run_from_file import run_from_file


async def batch_run(
    input_dir: str = "inputs",
    output_dir: Optional[str] = None,
    output_subdir: bool = False,
    verbose: bool = True,
) -> Dict[str, int]:
    """
    入力ディレクトリ内の全 RunConfig を名前順に実行する.

    build を含む設定を先に書いておけば、後続の設定がその出力を input_map として参照できる。

    Args:
        input_dir: 設定ファイルが配置されたディレクトリ
        output_dir: 出力ディレクトリ（未指定なら各設定の値）
        output_subdir: 設定ごとにサブディレクトリを作成するか
        verbose: 詳細出力

    Returns:
        設定ファイル名 → 終了コード
    """
    input_path = Path(input_dir)

    if not input_path.exists():
        print(f"❌ エラー: 入力ディレクトリが見つかりません: {input_dir}")
        return {}

    config_files = sorted(input_path.glob("*.json"))

    if not config_files:
        print(f"❌ エラー: {input_dir} 内に設定ファイル (.json) が見つかりません")
        return {}

    print("=" * 80)
    print("📦 バッチ実行を開始します")
    print("=" * 80)
    print(f"入力ディレクトリ: {input_dir}")
    print(f"検出された設定ファイル: {len(config_files)}個")
    print()

    codes: Dict[str, int] = {}
    for config_file in config_files:
        print("\n" + "=" * 80)
        print(f"📄 処理中: {config_file.name}")
        print("=" * 80)

        current_output_dir = output_dir
        if output_subdir:
            current_output_dir = str(Path(output_dir or "outputs") / config_file.stem)

        code = await run_from_file(
            config_file=str(config_file),
            output_dir=current_output_dir,
            verbose=verbose,
        )
        codes[config_file.name] = code
        if code == 0:
            print(f"✅ 完了: {config_file.name}")
        else:
            print(f"❌ エラー: {config_file.name}（終了コード {code}）")

    print("\n" + "=" * 80)
    print("🎉 バッチ実行が完了しました")
    print("=" * 80)
    print(f"処理されたファイル数: {len(config_files)}")
    return codes


def main():
    """コマンドラインインターフェース."""
    load_dotenv()

    parser = argparse.ArgumentParser(
        description='複数の RunConfig をバッチ実行'
    )
    parser.add_argument(
        '--input-dir',
        type=str,
        default='inputs',
        help='設定ファイルが配置されたディレクトリ（デフォルト: inputs）'
    )
    parser.add_argument(
        '--output-dir',
        type=str,
        default=None,
        help='出力ディレクトリのパス（デフォルト: 各設定の値）'
    )
    parser.add_argument(
        '--output-subdir',
        action='store_true',
        help='設定ごとにサブディレクトリを作成（デフォルト: 無効）'
    )
    parser.add_argument(
        '--quiet',
        action='store_true',
        help='進捗を表示しない'
    )

    args = parser.parse_args()

    codes = asyncio.run(batch_run(
        input_dir=args.input_dir,
        output_dir=args.output_dir,
        output_subdir=args.output_subdir,
        verbose=not args.quiet,
    ))
    sys.exit(max(codes.values(), default=0))


if __name__ == "__main__":
    main()
