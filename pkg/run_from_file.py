"""RunConfig JSON ファイルから1回分の実行を行う."""
import argparse
import asyncio
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from main import execute
from models.schemas import RunConfig


async def run_from_file(
    config_file: str,
    output_dir: Optional[str] = None,
    verbose: bool = True,
) -> int:
    """
    ファイルから RunConfig を読み込んで実行する.

    Args:
        config_file: RunConfig JSON のパス
        output_dir: 出力ディレクトリ（指定時は設定ファイルの値を上書き）
        verbose: 詳細出力

    Returns:
        終了コード
    """
    config_path = Path(config_file)

    if not config_path.exists():
        print(f"❌ エラー: 設定ファイルが見つかりません: {config_file}")
        return 2

    try:
        config = RunConfig.model_validate_json(config_path.read_text(encoding="utf-8"))
    except ValidationError as e:
        print(f"❌ エラー: 設定ファイルが不正です: {config_file}")
        print(f"   {e}")
        return 2

    if output_dir is not None:
        config = config.model_copy(update={"output_dir": output_dir})

    # 入力写像の相対パスは設定ファイルの位置から解決する
    if config.input_map and not Path(config.input_map).is_absolute():
        candidate = config_path.parent / config.input_map
        if candidate.exists():
            config = config.model_copy(update={"input_map": str(candidate)})

    if verbose:
        print("=" * 80)
        print("📄 設定ファイルを読み込みました")
        print("=" * 80)
        print(f"ファイル: {config_file}")
        print(f"コマンド: {config.command}（{config.name}）")
        print()

    return await execute(config, verbose=verbose)


def main():
    """コマンドラインインターフェース."""
    load_dotenv()

    parser = argparse.ArgumentParser(
        description='RunConfig JSON ファイルから実行'
    )
    parser.add_argument(
        'config_file',
        type=str,
        help='RunConfig JSON のパス'
    )
    parser.add_argument(
        '--output-dir',
        type=str,
        default=None,
        help='出力ディレクトリのパス（デフォルト: 設定ファイルの値）'
    )
    parser.add_argument(
        '--quiet',
        action='store_true',
        help='進捗を表示しない'
    )

    args = parser.parse_args()

    sys.exit(asyncio.run(run_from_file(
        config_file=args.config_file,
        output_dir=args.output_dir,
        verbose=not args.quiet,
    )))


if __name__ == "__main__":
    main()
