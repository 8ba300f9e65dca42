"""
CLI子命令实现

每个 cmd_* 接收 RunConfig, 打印人类可读的表格, 写出JSON/CSV, 并返回输出数据。
所有输出都嵌入 RunConfig、版本号与输入内容哈希。
"""
import json
import logging
from pathlib import Path
from typing import Any

from .. import __version__
from ..models.bellmap import BellMapResult, Components, MeasurementAngles
from ..models.dimer import ClassFile, CoveringClass, CoveringFile, DimerCovering
from ..models.lattice import Lattice
from ..models.run import RunConfig
from ..services.bellmap_service import build_system, deterministic_minimum, solve_alpha
from ..services.critical_service import CriticalService, sweep
from ..services.dimer_service import class_statistics, classify, enumerate_maximal
from ..services.lattice_service import build_lattice
from ..services.quantum_service import quantum_value
from ..services.report_loader import ReportLoader
from ..services.tropical_service import classical_bound_bruteforce, classical_bound_transfer
from ..storage.covering_repository import CoveringRepository, lattice_key
from ..storage.json_store import LocalJSONStore
from ..storage.result_repository import (
    BoundCache,
    ResultRepository,
    write_json_file,
    write_sweep_csv,
)
from .error_handler import CLIUsageError

logger = logging.getLogger(__name__)


def provenance(config: RunConfig, inputs: dict[str, str | None]) -> dict[str, Any]:
    """可复现信息: 配置、版本、输入哈希"""
    return {
        "config": config.model_dump(mode="json"),
        "version": __version__,
        "inputs": inputs,
    }


def _lattice(config: RunConfig) -> Lattice:
    if config.n is None or config.boundary is None:
        raise CLIUsageError(f"{config.command} needs --n and --boundary")
    return build_lattice(config.n, config.boundary)


def _emit(config: RunConfig, payload: dict[str, Any], default_name: str | None = None) -> None:
    if config.out:
        write_json_file(config.out, payload)
        print(f"✓ 已写入 {config.out}")
    elif default_name:
        repo = ResultRepository(LocalJSONStore(config.cache_dir))
        repo.save(default_name, payload)
        print(f"✓ 已写入缓存 results/{default_name}.json")


def load_or_enumerate(
    config: RunConfig, lattice: Lattice, repo: CoveringRepository
) -> tuple[list[DimerCovering], str]:
    """优先读取缓存的覆盖文件, 否则枚举并保存"""
    coverings = repo.load_coverings(lattice.n, lattice.boundary)
    if coverings is None:
        coverings = enumerate_maximal(lattice, max_coverings=config.max_coverings)
        repo.save_coverings(lattice.n, lattice.boundary, coverings)
    else:
        logger.info(f"Loaded {len(coverings)} coverings from cache")
    return coverings, repo.coverings_hash(lattice.n, lattice.boundary)


def load_or_classify(
    config: RunConfig,
    lattice: Lattice,
    repo: CoveringRepository,
    coverings: list[DimerCovering],
) -> tuple[list[CoveringClass], str]:
    """优先读取缓存的类文件, 否则分类并保存"""
    classes = repo.load_classes(lattice.n, lattice.boundary, coverings)
    if classes is None:
        classes = classify(coverings, lattice.boundary)
        repo.save_classes(lattice.n, lattice.boundary, classes)
    return classes, repo.classes_hash(lattice.n, lattice.boundary)


def _selected(config: RunConfig, classes: list[CoveringClass]) -> list[CoveringClass]:
    if config.class_id is None:
        return classes
    chosen = [c for c in classes if c.class_id == config.class_id]
    if not chosen:
        raise CLIUsageError(f"class {config.class_id} does not exist ({len(classes)} classes)")
    return chosen


def _require_epsilons(config: RunConfig) -> list[float]:
    if not config.epsilons:
        raise CLIUsageError(f"{config.command} needs --epsilon or --grid")
    return config.epsilons


def _prepare(config: RunConfig):
    lattice = _lattice(config)
    repo = CoveringRepository(LocalJSONStore(config.cache_dir))
    coverings, coverings_hash = load_or_enumerate(config, lattice, repo)
    classes, classes_hash = load_or_classify(config, lattice, repo, coverings)
    inputs = {"coverings": coverings_hash, "classes": classes_hash}
    return lattice, coverings, classes, inputs


def cmd_enumerate(config: RunConfig) -> dict[str, Any]:
    """枚举最大覆盖, 写出覆盖文件并打印总数"""
    lattice = _lattice(config)
    repo = CoveringRepository(LocalJSONStore(config.cache_dir))
    coverings = enumerate_maximal(lattice, max_coverings=config.max_coverings)
    digest = repo.save_coverings(lattice.n, lattice.boundary, coverings)

    payload = CoveringFile.from_coverings(lattice.n, lattice.boundary, coverings).to_json_dict()
    payload.update(provenance(config, {"lattice": None}))
    payload["count"] = len(coverings)
    _emit(config, payload)

    print(f"✓ {lattice.n}x{lattice.n} {lattice.boundary.value}: {len(coverings)} coverings")
    print(f"  内容哈希: {digest}")
    return payload


def cmd_classify(config: RunConfig) -> dict[str, Any]:
    """分类覆盖, 写出类文件并打印 (类数, 最小, 最大) 统计"""
    lattice = _lattice(config)
    repo = CoveringRepository(LocalJSONStore(config.cache_dir))
    coverings, coverings_hash = load_or_enumerate(config, lattice, repo)

    graph = None
    if config.options.get("graph"):
        classes, graph = classify(coverings, lattice.boundary, with_graph=True)
    else:
        classes = classify(coverings, lattice.boundary)
    classes_hash = repo.save_classes(lattice.n, lattice.boundary, classes)
    stats = class_statistics(classes, lattice.n, lattice.boundary)

    payload = ClassFile.from_classes(classes).model_dump(mode="json")
    payload["statistics"] = stats.model_dump(mode="json")
    if graph is not None:
        payload["orbit_graph"] = [[e.source, e.op.value, e.target] for e in graph]
    payload.update(provenance(config, {"coverings": coverings_hash, "classes": classes_hash}))
    _emit(config, payload)

    print(ReportLoader().render("class_statistics.txt", stats=stats), end="")
    return payload


def cmd_classical_bound(config: RunConfig) -> dict[str, Any]:
    """每个类代表元在每个ε上的经典界"""
    epsilons = _require_epsilons(config)
    lattice, coverings, classes, inputs = _prepare(config)
    method = config.options.get("method", "transfer")
    recover = bool(config.options.get("recover_assignment"))
    group_by = config.options.get("group_by", "column")
    max_sites = int(config.options.get("bruteforce_max_sites", 10))

    rows = []
    for cls in _selected(config, classes):
        for eps in epsilons:
            if method == "bruteforce":
                result = classical_bound_bruteforce(
                    lattice, cls.representative, eps, max_sites=max_sites
                )
            else:
                result = classical_bound_transfer(
                    lattice,
                    cls.representative,
                    eps,
                    group_by=group_by,
                    recover_assignment=recover,
                    max_n=config.solver.transfer_max_n,
                )
            rows.append({"class_id": cls.class_id, **result.model_dump(mode="json")})

    payload = {"bounds": rows, **provenance(config, inputs)}
    _emit(config, payload)
    print(
        ReportLoader().render(
            "bounds_table.txt",
            title="经典界 β_C",
            n=lattice.n,
            boundary=lattice.boundary.value,
            value_label="beta_c",
            rows=[
                {**r, "value": r["beta_c"], "method": r["method"]} for r in rows
            ],
        ),
        end="",
    )
    return payload


def cmd_quantum_value(config: RunConfig) -> dict[str, Any]:
    """每个类代表元在每个ε上的量子值"""
    epsilons = _require_epsilons(config)
    lattice, coverings, classes, inputs = _prepare(config)

    rows = []
    for cls in _selected(config, classes):
        for eps in epsilons:
            result = quantum_value(lattice, cls.representative, eps, config.solver)
            rows.append(
                {"class_id": cls.class_id, "epsilon": eps, **result.model_dump(mode="json")}
            )

    payload = {"values": rows, **provenance(config, inputs)}
    _emit(config, payload)
    print(
        ReportLoader().render(
            "bounds_table.txt",
            title="量子值 β_Q",
            n=lattice.n,
            boundary=lattice.boundary.value,
            value_label="beta_q",
            rows=[{**r, "value": r["beta_q"]} for r in rows],
        ),
        end="",
    )
    return payload


def _csv_path(base: str, class_id: int, single: bool) -> Path:
    path = Path(base)
    if single:
        return path
    return path.with_name(f"{path.stem}_class{class_id}{path.suffix or '.csv'}")


def cmd_critical(config: RunConfig) -> dict[str, Any]:
    """
    逐类求违背区间并汇总

    单类数值失败记录在该类结果中, 不中断批处理。
    """
    lattice, coverings, classes, inputs = _prepare(config)
    selected = _selected(config, classes)
    store = LocalJSONStore(config.cache_dir)
    cache = BoundCache(store, lattice_key(lattice.n, lattice.boundary))
    service = CriticalService(lattice, config.solver, config.search, cache, jobs=config.jobs)

    results = service.run_sync(selected, coverings, representatives=config.representatives)
    summary = service.summarize(results)

    csv_base = config.options.get("csv")
    if csv_base:
        if not config.epsilons:
            raise CLIUsageError("--csv needs --epsilon or --grid for the sweep points")
        for cls in selected:
            points = sweep(lattice, cls.representative, config.epsilons, evaluator=service.evaluator)
            write_sweep_csv(_csv_path(csv_base, cls.class_id, len(selected) == 1), points)
    cache.flush()

    payload = {
        "results": [r.to_json_dict() for r in results],
        "summary": summary.model_dump(mode="json"),
        **provenance(config, inputs),
    }
    _emit(config, payload, default_name=f"critical_{lattice_key(lattice.n, lattice.boundary)}")
    print(ReportLoader().render("critical_summary.txt", results=results, summary=summary), end="")
    return payload


def cmd_sweep(config: RunConfig) -> dict[str, Any]:
    """单个类代表元的 (ε, β_C, β_Q) 扫描"""
    epsilons = _require_epsilons(config)
    lattice, coverings, classes, inputs = _prepare(config)
    class_id = config.class_id if config.class_id is not None else 0
    cls = _selected(config.model_copy(update={"class_id": class_id}), classes)[0]

    cache = BoundCache(LocalJSONStore(config.cache_dir), lattice_key(lattice.n, lattice.boundary))
    service = CriticalService(lattice, config.solver, config.search, cache)
    points = sweep(lattice, cls.representative, epsilons, evaluator=service.evaluator)
    cache.flush()

    csv_path = config.options.get("csv")
    if csv_path:
        write_sweep_csv(csv_path, points)
        print(f"✓ 已写入 {csv_path}")

    payload = {
        "class_id": cls.class_id,
        "points": [p.as_row() for p in points],
        **provenance(config, inputs),
    }
    _emit(config, payload)
    for p in points:
        print(f"  eps={p.epsilon:.4f}  beta_c={p.beta_c:.10f}  beta_q={p.beta_q:.10f}")
    return payload


def parse_angles(text: str) -> list[float]:
    """逗号分隔的弧度列表"""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise CLIUsageError(f"angles must be comma-separated numbers: {text}") from e


def cmd_bellmap(config: RunConfig) -> dict[str, Any]:
    """求解 T·α = b, 以JSON输出到stdout"""
    m = int(config.options.get("m", 2))
    angles_text = config.options.get("angles")
    angles = MeasurementAngles(m=m, theta=parse_angles(angles_text)) if angles_text else None
    components = Components(config.options.get("components", Components.CORRELATORS.value))

    system = solve_alpha(build_system(m, angles, components))
    result = BellMapResult.from_system(system, deterministic_minimum(system))

    payload = result.to_json_dict()
    if config.out:
        write_json_file(config.out, {**payload, **provenance(config, {})})
    print(json.dumps(payload, ensure_ascii=False, indent=2))
    return payload


COMMANDS = {
    "enumerate": cmd_enumerate,
    "classify": cmd_classify,
    "classical-bound": cmd_classical_bound,
    "quantum-value": cmd_quantum_value,
    "critical": cmd_critical,
    "sweep": cmd_sweep,
    "bellmap": cmd_bellmap,
}
