#!/usr/bin/env python3
"""
FRFI-QKD 命令行启动脚本

在源码目录下直接运行：python scripts/frfi.py rate --theta 0.5
"""

import sys
from pathlib import Path

# 添加项目根目录到Python路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))


def main():
    """主函数"""
    from src.frfiqkd.cli.main import main as cli_main

    sys.exit(cli_main())


if __name__ == "__main__":
    main()
