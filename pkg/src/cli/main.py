"""
CLI入口 - dimer-bell

子命令:
    enumerate        枚举最大二聚体覆盖
    classify         按对称群轨道分类
    classical-bound  经典界 β_C
    quantum-value    量子值 β_Q
    critical         逐类临界耦合 ε*_l / ε*_h
    sweep            单个类的 (ε, β_C, β_Q) 扫描
    bellmap          贝尔映射 T·α = b

配置优先级: 命令行参数 > 环境变量 (DIMER_BELL_*) > .env > 默认值
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import NoReturn

# 支持直接运行脚本时添加项目根目录到Python路径
if __name__ == "__main__":
    project_root = Path(__file__).parent.parent.parent
    if str(project_root) not in sys.path:
        sys.path.insert(0, str(project_root))

from src import __version__
from src.cli.commands import COMMANDS
from src.cli.error_handler import EXIT_OK, CLIUsageError, PartialFailureError, handle_error
from src.config import Settings, get_settings
from src.logging_config import configure_logging
from src.models.lattice import BoundaryCondition
from src.models.run import RunConfig, SearchConfig, SolverConfig, expand_grid

logger = logging.getLogger(__name__)


class DimerBellArgumentParser(argparse.ArgumentParser):
    """参数错误时抛出 CLIUsageError 而不是直接退出"""

    def error(self, message: str) -> NoReturn:
        raise CLIUsageError(message)


def _add_lattice_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="晶格边长 (≥3)")
    parser.add_argument(
        "--boundary",
        choices=[b.value for b in BoundaryCondition],
        required=True,
        help="边界条件",
    )
    parser.add_argument("--max-coverings", type=int, default=None, help="枚举覆盖数上限")
    parser.add_argument("--class-id", type=int, default=None, help="只处理该类")


def _add_epsilon_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--epsilon", type=float, action="append", default=[], help="ε值 (可重复)"
    )
    parser.add_argument("--grid", action="append", default=[], help="ε网格 a:b:step (两端包含)")
    parser.add_argument(
        "--wide-epsilon", action="store_true", help="允许ε超出配置的 [eps_min, eps_max]"
    )


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--solver", choices=["auto", "dense", "lanczos"], default="auto")
    parser.add_argument("--tol", type=float, default=None, help="Lanczos残差容差")
    parser.add_argument("--krylov-dim", type=int, default=None)
    parser.add_argument("--max-restarts", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器"""
    parser = DimerBellArgumentParser(
        prog="dimer-bell",
        description="二聚体覆盖上的CHSH贝尔不等式: 枚举、分类、经典界、量子值与临界耦合",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--cache-dir", default=None, help="缓存目录")
    parser.add_argument("--out", default=None, help="JSON输出路径")
    parser.add_argument("--log-level", default=None, help="DEBUG / INFO / WARNING / ERROR")
    parser.add_argument("--log-format", choices=["standard", "json"], default=None)

    sub = parser.add_subparsers(dest="command", required=True, parser_class=DimerBellArgumentParser)

    p = sub.add_parser("enumerate", help="枚举最大二聚体覆盖")
    _add_lattice_args(p)

    p = sub.add_parser("classify", help="按对称群轨道分类覆盖")
    _add_lattice_args(p)
    p.add_argument("--graph", action="store_true", help="同时输出轨道图")

    p = sub.add_parser("classical-bound", help="经典界 β_C")
    _add_lattice_args(p)
    _add_epsilon_args(p)
    p.add_argument("--method", choices=["transfer", "bruteforce"], default="transfer")
    p.add_argument("--group-by", choices=["column", "row"], default="column")
    p.add_argument("--recover-assignment", action="store_true", help="回溯给出最优策略赋值")

    p = sub.add_parser("quantum-value", help="量子值 β_Q")
    _add_lattice_args(p)
    _add_epsilon_args(p)
    _add_solver_args(p)

    p = sub.add_parser("critical", help="逐类临界耦合")
    _add_lattice_args(p)
    _add_epsilon_args(p)
    _add_solver_args(p)
    p.add_argument("--jobs", type=int, default=None, help="并行类数")
    p.add_argument("--representatives", type=int, default=1, help="每类计算的代表元数")
    p.add_argument("--root-tol", type=float, default=None)
    p.add_argument("--ratio-tol", type=float, default=None)
    p.add_argument("--csv", default=None, help="扫描CSV输出路径 (需要ε网格)")

    p = sub.add_parser("sweep", help="单个类的 (ε, β_C, β_Q) 扫描")
    _add_lattice_args(p)
    _add_epsilon_args(p)
    _add_solver_args(p)
    p.add_argument("--csv", default=None, help="CSV输出路径")

    p = sub.add_parser("bellmap", help="贝尔映射 T·α = b")
    p.add_argument("--m", type=int, default=2, help="每方测量数")
    p.add_argument("--angles", default=None, help="2m个逗号分隔的角度 (弧度)")
    p.add_argument(
        "--components", choices=["correlators", "full"], default="correlators"
    )

    return parser


def _collect_epsilons(args: argparse.Namespace) -> list[float]:
    epsilons = list(getattr(args, "epsilon", []) or [])
    for spec in getattr(args, "grid", []) or []:
        try:
            epsilons.extend(expand_grid(spec))
        except ValueError as e:
            raise CLIUsageError(str(e)) from e
    return epsilons


def _options(args: argparse.Namespace, settings: Settings) -> dict:
    names = ("method", "group_by", "recover_assignment", "graph", "csv", "m", "angles", "components")
    options = {name: getattr(args, name) for name in names if getattr(args, name, None) is not None}
    if args.command == "classical-bound":
        options["bruteforce_max_sites"] = settings.bruteforce_max_sites
    return options


def build_run_config(args: argparse.Namespace, settings: Settings) -> RunConfig:
    """
    合并配置与命令行参数

    Args:
        args: 解析后的参数
        settings: 环境配置

    Returns:
        RunConfig

    Raises:
        CLIUsageError: ε参数缺失或网格格式错误
        ValidationError: 配置值不合法
    """
    if args.command in ("classical-bound", "quantum-value", "sweep") and not (
        args.epsilon or args.grid
    ):
        raise CLIUsageError(f"{args.command} needs --epsilon or --grid")

    solver = SolverConfig.from_settings(
        settings,
        solver=getattr(args, "solver", None),
        lanczos_tol=getattr(args, "tol", None),
        krylov_dim=getattr(args, "krylov_dim", None),
        max_restarts=getattr(args, "max_restarts", None),
        seed=getattr(args, "seed", None),
    )
    search = SearchConfig.from_settings(
        settings,
        root_tol=getattr(args, "root_tol", None),
        ratio_tol=getattr(args, "ratio_tol", None),
    )
    return RunConfig(
        command=args.command,
        n=getattr(args, "n", None),
        boundary=getattr(args, "boundary", None),
        epsilons=_collect_epsilons(args),
        allow_wide_epsilon=getattr(args, "wide_epsilon", False),
        solver=solver,
        search=search,
        cache_dir=args.cache_dir or settings.cache_dir,
        out=args.out,
        jobs=getattr(args, "jobs", None) or settings.jobs,
        representatives=getattr(args, "representatives", 1),
        class_id=getattr(args, "class_id", None),
        max_coverings=getattr(args, "max_coverings", None) or settings.max_coverings,
        options=_options(args, settings),
    )


def main(argv: list[str] | None = None) -> int:
    """
    CLI主函数

    Args:
        argv: 参数列表 (默认 sys.argv[1:])

    Returns:
        退出码: 0 成功, 1 用法错误, 2 数值失败, 130 用户中断
    """
    try:
        settings = get_settings()
        args = build_parser().parse_args(argv)
        configure_logging(
            args.log_level or settings.log_level, args.log_format or settings.log_format
        )
        config = build_run_config(args, settings)
        logger.info(f"Running {config.command} (version {__version__})")

        payload = COMMANDS[config.command](config)
        failed = [r["class_id"] for r in payload.get("results", []) if r.get("error")]
        if failed:
            return handle_error(PartialFailureError(failed))
        return EXIT_OK
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0)
    except (KeyboardInterrupt, Exception) as e:
        return handle_error(e)


if __name__ == "__main__":
    sys.exit(main())
