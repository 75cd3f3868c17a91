#!/usr/bin/env python3
"""
二つの対象システムで平均SSR対SNRの図を再現するスクリプト

1. 両システムの適正条件を確認
2. (18x12,9,3)^3 のモンテカルロ実験を実行
3. (15x15,9,3)^3 のモンテカルロ実験を実行
4. 外部カーブ（任意）を重ねて図を再出力

中断しても同じ設定で再実行すれば保存済みの試行から再開します。
"""

import argparse
import asyncio
import subprocess
import sys
from datetime import datetime
from pathlib import Path

# プロジェクトルートを sys.path に追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

SYSTEMS = {
    "system_18x12": "(18x12,9,3)^3",
    "system_15x15": "(15x15,9,3)^3",
}


async def run_command(command: str, description: str) -> bool:
    """コマンドを実行して結果を表示"""
    print(f"🔄 {description}...")

    try:
        result = subprocess.run(
            command,
            shell=True,
            cwd=project_root,
            capture_output=True,
            text=True,
            check=True,
        )

        print(f"✅ {description} 完了")
        if result.stdout:
            print(f"   出力: {result.stdout.strip().splitlines()[-1]}")
        return True

    except subprocess.CalledProcessError as e:
        print(f"❌ {description} 失敗 (exit {e.returncode})")
        if e.stderr:
            print(f"   エラー: {e.stderr.strip()}")
        return False


async def main():
    parser = argparse.ArgumentParser(description="Reproduce the average SSR figures")
    parser.add_argument("--trials", type=int, help="Override the number of trials")
    parser.add_argument("--workers", type=int, help="Trials run in parallel")
    parser.add_argument("--overlay", type=str, help="CSV of externally produced curves")
    args = parser.parse_args()

    extra = ""
    if args.trials:
        extra += f" --trials {args.trials}"
    if args.workers:
        extra += f" --workers {args.workers}"

    print("🚀 平均SSR図の再現を開始します")
    print("=" * 60)
    timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")

    print("📐 ステップ1: 適正条件の確認")
    for name, label in SYSTEMS.items():
        await run_command(
            f"poetry run python -m src.main check --config configs/{name}.env",
            f"{label} の適正条件",
        )

    for step, (name, label) in enumerate(SYSTEMS.items(), start=2):
        print(f"\n📊 ステップ{step}: {label} の実験")
        success = await run_command(
            f"poetry run python -m src.main run --config configs/{name}.env{extra}",
            f"{label} のモンテカルロ実験",
        )
        if not success:
            print("❌ 実験に失敗しました。保存済みの試行は次回の実行で再利用されます。")
            sys.exit(1)

    if args.overlay:
        print("\n🖼  ステップ4: 外部カーブを重ねた図の出力")
        for name, label in SYSTEMS.items():
            await run_command(
                f"poetry run python -m src.main plot output/{name}/records.csv "
                f"output/{name}/ssr_overlay.svg --overlay {args.overlay} --title '{label}'",
                f"{label} の重ね描き",
            )

    print("=" * 60)
    print("🎉 全ての処理が完了しました！")
    print(f"⏰ 実行時刻: {timestamp}")
    print()
    print("📁 生成されたファイル:")
    for name in SYSTEMS:
        print(f"  - output/{name}/records.csv (試行ごとの結果)")
        print(f"  - output/{name}/records.jsonl (再開用の生レコード)")
        print(f"  - output/{name}/ssr.svg (平均SSR対SNR)")


if __name__ == "__main__":
    asyncio.run(main())
