"""
命令行入口

子命令：rate、sweep、figure、simulate、verify。
退出码：0 成功，1 自检失败，2 输入无效，3 输出失败。
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError

from .. import __version__
from ..analytics.sweeps import (
    CSV_COLUMNS,
    FIGURE_PRESETS,
    PER_PULSE_COLUMNS,
    SweepRunner,
    report_row,
    resolve_preset,
    rows_frame,
)
from ..data.models import SweepAxis
from ..reporting.plots import plot_rates
from ..reporting.tables import report_lines, write_counts, write_csv, write_metadata
from ..security.verification import run_verification
from ..simulation.channel import FRAME_CONVENTION, analyze
from ..simulation.protocol import (
    analyze_counts,
    estimate_tensor,
    run_sharded_simulation,
    run_simulation,
)
from ..utils.config import get_config, load_scenario_config, load_sweep_config, set_config
from ..utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_IO_FAILURE = 3

# simulate 报告：经验与解析结果并列
REPORT_COLUMNS = ["source"] + CSV_COLUMNS + ["r_frfi_stderr", "missing_cells"]


class InputError(ValueError):
    """命令行参数组合无效"""
    pass


def _add_global_arguments(parser: argparse.ArgumentParser, suppress: bool) -> None:
    """主解析器与子解析器共用的参数；子解析器用 SUPPRESS 避免覆盖主解析器的值"""

    def default(value: Any) -> Any:
        return argparse.SUPPRESS if suppress else value

    group = parser.add_argument_group("global options")
    group.add_argument("--config", default=default(None), help="JSON 场景配置文件")
    group.add_argument("--output", default=default(None), help="输出文件或目录")
    group.add_argument("--seed", type=int, default=default(0), help="64 位无符号随机种子")
    group.add_argument("--format", choices=["csv", "svg", "both"], default=default("both"),
                       help="figure 输出格式")
    group.add_argument("--log-level", default=default(None),
                       choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="日志级别")
    group.add_argument("--workers", type=int, default=default(None), help="并行线程/进程数")

    scenario = parser.add_argument_group("scenario overrides")
    scenario.add_argument("--theta", type=float, default=default(None), help="极角 θ（弧度）")
    scenario.add_argument("--phi", type=float, default=default(None), help="方位角 φ（弧度）")
    scenario.add_argument("--loss-db", type=float, default=default(None), help="总损耗（dB）")
    scenario.add_argument("--dark-rate", type=float, default=default(None), help="暗计数率")
    scenario.add_argument("--misalignment", type=float, default=default(None), help="失准误码率")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frfi",
        description="Fully reference-frame-independent QKD key-rate calculator and simulator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_global_arguments(parser, suppress=False)

    common = argparse.ArgumentParser(add_help=False)
    _add_global_arguments(common, suppress=True)

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    subparsers.add_parser("rate", parents=[common], help="解析计算单一场景的密钥率")

    sweep = subparsers.add_parser("sweep", parents=[common], help="单轴参数扫描并输出 CSV")
    sweep.add_argument("--axis", choices=[a.value for a in SweepAxis], default=None)
    sweep.add_argument("--start", type=float, default=None)
    sweep.add_argument("--stop", type=float, default=None)
    sweep.add_argument("--step", type=float, default=None)

    figure = subparsers.add_parser("figure", parents=[common], help="复现预设图形的曲线")
    figure.add_argument("preset", help="fig2 | fig3 | fig4")

    simulate = subparsers.add_parser("simulate", parents=[common], help="蒙特卡洛协议仿真")
    simulate.add_argument("--n-pulses", type=int, required=True, help="发送脉冲数")
    simulate.add_argument("--shards", type=int, default=None,
                          help="分片数（使用派生种子流，结果与单流不同）")

    verify = subparsers.add_parser("verify", parents=[common], help="随机态性质自检")
    verify.add_argument("--trials", type=int, default=100, help="随机态个数")

    return parser


def _scenario_overrides(args: argparse.Namespace) -> Dict[str, Optional[float]]:
    return {
        "theta_rad": args.theta,
        "phi_rad": args.phi,
        "loss_db": args.loss_db,
        "dark_rate": args.dark_rate,
        "misalignment": args.misalignment,
    }


def _emit(lines: Sequence[str]) -> None:
    sys.stdout.write("".join(f"{line}\n" for line in lines))


def cmd_rate(args: argparse.Namespace) -> int:
    scenario = load_scenario_config(args.config, _scenario_overrides(args))
    report = analyze(scenario)
    _emit(report_lines(report, scenario))
    if args.output:
        write_csv(rows_frame([report_row(scenario, report)]), args.output)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = load_sweep_config(
        args.config,
        _scenario_overrides(args),
        {"axis": args.axis, "start": args.start, "stop": args.stop, "step": args.step},
    )
    frame = SweepRunner(args.workers).run(spec)
    if args.output:
        write_csv(frame, args.output)
    else:
        config = get_config()
        frame.to_csv(sys.stdout, index=False, float_format=config.float_format, lineterminator="\n")
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    preset = resolve_preset(args.preset)
    figure = FIGURE_PRESETS[preset]
    base = load_scenario_config(args.config, _scenario_overrides(args))
    frame = SweepRunner(args.workers).run_figure(preset, base)

    config = get_config()
    output_dir = Path(args.output or ".")
    written: List[Path] = []
    if args.format in ("csv", "both"):
        written.append(write_csv(frame, output_dir / f"{preset.value}.csv"))
    if args.format in ("svg", "both"):
        written.append(plot_rates(frame, figure.protocols, output_dir / f"{preset.value}.svg",
                                  title=figure.title))
    written.append(write_metadata(
        {
            "preset": preset.value,
            "title": figure.title,
            "combos": [{"theta_rad": t, "phi_rad": p} for t, p in figure.combos],
            "protocols": [p.value for p in figure.protocols],
            "loss_grid_db": {
                "start": config.preset_loss_start,
                "stop": config.preset_loss_stop,
                "step": config.preset_loss_step,
            },
            "dark_rate": base.dark_rate,
            "misalignment": base.misalignment,
            "frame_convention": FRAME_CONVENTION,
            "columns": CSV_COLUMNS + PER_PULSE_COLUMNS,
            "version": __version__,
        },
        output_dir / f"{preset.value}.meta.json",
    ))
    _emit([f"wrote={path}" for path in written])
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario_config(args.config, _scenario_overrides(args))
    if args.shards is not None:
        table = run_sharded_simulation(scenario, args.n_pulses, args.seed, args.shards,
                                       max_workers=args.workers)
    else:
        table = run_simulation(scenario, args.n_pulses, args.seed)

    analytic = analyze(scenario)
    missing = estimate_tensor(table).missing_cells
    empirical = None if missing else analyze_counts(table)

    output = Path(args.output or "counts.csv")
    stem = output.with_suffix("")
    write_counts(table, output)
    write_metadata(table.metadata, f"{stem}.meta.json")

    rows: List[Dict[str, Any]] = []
    if empirical is None:
        # 空分组时经验行只保留来源与缺失分组
        rows.append({"source": "empirical", "missing_cells": " ".join(missing)})
    for source, report in (("empirical", empirical), ("analytic", analytic)):
        if report is None:
            continue
        row: Dict[str, Any] = {"source": source, "r_frfi_stderr": report.r_frfi_stderr,
                               "missing_cells": ""}
        row.update(report_row(scenario, report))
        rows.append(row)
    write_csv(pd.DataFrame(rows, columns=REPORT_COLUMNS), f"{stem}.report.csv")

    lines = [f"detected_pulses={table.detected_pulses}", f"emitted_pulses={table.emitted_pulses}"]
    if empirical is None:
        lines += ["empirical.status=incomplete", f"empirical.missing_cells={' '.join(missing)}"]
    else:
        lines += [f"empirical.{line}" for line in report_lines(empirical)]
    lines += [f"analytic.{line}" for line in report_lines(analytic)]
    _emit(lines)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    summary = run_verification(args.trials, args.seed)
    _emit([
        f"trials={summary.trials}",
        f"seed={summary.seed}",
        f"checks={summary.checks}",
        f"failures={len(summary.failures)}",
        f"status={'pass' if summary.passed else 'fail'}",
    ])
    for failure in summary.failures:
        print(
            f"FAIL trial={failure.trial} property={failure.name}: {failure.detail} "
            f"decomposition={failure.decomposition}",
            file=sys.stderr,
        )
    return EXIT_OK if summary.passed else EXIT_VERIFY_FAILED


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "rate": cmd_rate,
    "sweep": cmd_sweep,
    "figure": cmd_figure,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def _configure(args: argparse.Namespace) -> None:
    config = get_config().model_copy()
    if args.log_level:
        config.log_level = args.log_level
    if args.workers is not None:
        if args.workers < 1:
            raise InputError(f"--workers={args.workers} must be at least 1")
        config.workers = args.workers
    set_config(config)
    setup_logging(force=True)


def _check_seed(seed: int) -> None:
    if not 0 <= seed < 2**64:
        raise InputError(f"--seed={seed} must be an unsigned 64-bit integer")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI 主函数

    Args:
        argv: 参数列表，默认取 sys.argv[1:]

    Returns:
        退出码
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse 对无效参数以 2 退出，--help 以 0 退出
        return int(e.code or 0)

    try:
        _configure(args)
        _check_seed(args.seed)
        for name in ("theta", "phi", "loss_db", "dark_rate", "misalignment"):
            value = getattr(args, name)
            if value is not None and not math.isfinite(value):
                raise InputError(f"--{name.replace('_', '-')} must be finite")
        logger.debug("Running command", command=args.command)
        return COMMANDS[args.command](args)
    except OSError as e:
        print(f"error: cannot write output: {e}", file=sys.stderr)
        return EXIT_IO_FAILURE
    except ValidationError as e:
        print(f"error: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
