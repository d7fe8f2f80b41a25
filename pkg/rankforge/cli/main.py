"""
rankforge 命令行入口

子命令：
    field                          构造并描述有限域
    code build|mindist|verify-mrd|export
    aut order --method theory|count|oracle
    aut check --triple <json>
    equiv --mu --s --nu --u
    cert inequiv

退出码：0 成功；1 验证未通过；2 用法或参数错误。
"""
import argparse
import json
import sys
import time
from dataclasses import asdict, fields
from typing import Any, Dict, Optional, Sequence

from dotenv import load_dotenv

from rankforge.algebra.circulant import SpaceParams, field_for
from rankforge.algebra.field_tower import make_field, subfield_primitive
from rankforge.codes import automorphisms as aut
from rankforge.codes.bilinear_space import (
    AutTriple,
    BilinearSpace,
    apply_std,
    get_space,
    to_standard,
)
from rankforge.codes.mrd_codes import (
    CodeSpec,
    build_code,
    contains_all,
    default_mu,
    min_rank_distance,
    rank_distribution,
    verify_mrd,
)
from rankforge.cli.reports import emit_report
from rankforge.config.loader import dict_to_dataclass, get_config_center, load_mapping
from rankforge.config.schema import AutMethod, CodeKind, OutputFormat, RunConfig
from rankforge.core.exceptions import (
    BadParameters,
    ParseError,
    UnknownKey,
    ValidationException,
    is_usage_error,
    wrap_exception,
)
from rankforge.core.logging_config import get_logger, setup_logging, timed

logger = get_logger("cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class VerificationFailed(Exception):
    """结果已输出但验证未通过"""


# === 配置 ===

def load_config(path: Optional[str], flags: Dict[str, Any]) -> RunConfig:
    """
    组装 RunConfig：全局配置在下，JSON 配置文件居中，显式命令行参数在上

    未知键报 UnknownKey；预算从全局配置（含 RANKFORGE_BUDGET）起步，
    并行度、切块大小与输出格式缺省取全局配置的 parallel 与 output 段。
    """
    known = {f.name for f in fields(RunConfig)}
    data: Dict[str, Any] = {}
    if path:
        data = load_mapping(path)
        for key in data:
            if key not in known:
                raise UnknownKey(key)
    settings = get_config_center().load_rankforge_config()
    defaults = {
        "jobs": settings.parallel.jobs,
        "chunk_size": settings.parallel.chunk_size,
        "format": settings.output.format,
    }
    budgets = asdict(settings.budgets)
    budgets.update(data.get("budgets") or {})
    merged = {**defaults, **data, **{k: v for k, v in flags.items() if v is not None}}
    merged["budgets"] = budgets
    config = dict_to_dataclass(merged, RunConfig, strict=True)
    for name, amount in asdict(config.budgets).items():
        if not isinstance(amount, int) or amount <= 0:
            raise ValidationException(f"预算 {name} 必须为正整数")
    if config.chunk_size <= 0:
        raise ValidationException(f"chunk_size 必须为正整数，得到 {config.chunk_size}")
    return config


def _require(config: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(config, n) is None]
    if missing:
        raise BadParameters(f"{config.command} 缺少参数: {', '.join('--' + n for n in missing)}")


# === 参数解析 ===

def _add_code_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON 配置文件")
    parser.add_argument("--kind", choices=[k.value for k in CodeKind])
    parser.add_argument("--q", type=int)
    parser.add_argument("--m", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--t", type=int)
    parser.add_argument("--s", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--mu", type=int, help="μ 的规范整数")
    parser.add_argument("--g", type=int, nargs="+", help="Gabidulin 求值点（规范整数）")
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--output", help="报告路径，缺省为标准输出")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankforge", description="秩度量码构造与自同构群计算")
    sub = parser.add_subparsers(dest="group", required=True)

    p_field = sub.add_parser("field", help="构造并描述有限域")
    p_field.add_argument("--p", type=int, required=True)
    p_field.add_argument("--E", type=int, required=True)
    p_field.add_argument("--modulus", type=int, nargs="+", help="首一模多项式系数（低次在前）")
    p_field.add_argument("--output")

    p_code = sub.add_parser("code", help="码的构造与验证")
    code_sub = p_code.add_subparsers(dest="action", required=True)
    for action in ("build", "mindist", "verify-mrd", "export"):
        _add_code_args(code_sub.add_parser(action))

    p_aut = sub.add_parser("aut", help="自同构群")
    aut_sub = p_aut.add_subparsers(dest="action", required=True)
    p_order = aut_sub.add_parser("order")
    _add_code_args(p_order)
    p_order.add_argument("--method", choices=[m.value for m in AutMethod])
    p_order.add_argument("--no-transpose", dest="include_transpose", action="store_false",
                         default=None)
    p_check = aut_sub.add_parser("check")
    _add_code_args(p_check)
    p_check.add_argument("--triple", required=True, help="AutTriple 的 JSON 文本或文件路径")

    p_equiv = sub.add_parser("equiv", help="H 码之间的等价搜索")
    _add_code_args(p_equiv)
    p_equiv.add_argument("--nu", type=int)
    p_equiv.add_argument("--u", type=int)
    p_equiv.add_argument("--samples", type=int)
    p_equiv.add_argument("--seed", type=int)

    p_cert = sub.add_parser("cert", help="不等价证书")
    cert_sub = p_cert.add_subparsers(dest="action", required=True)
    _add_code_args(cert_sub.add_parser("inequiv"))
    return parser


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    skip = {"group", "action", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# === 子命令 ===

def _space(config: RunConfig) -> BilinearSpace:
    """空间实例；大域阶先按 table_budget 检查"""
    _require(config, "q", "m", "n")
    field_for(SpaceParams(config.q, config.m, config.n, config.k), config.budgets.table_budget)
    return get_space(config.q, config.m, config.n, config.k)


def _mu(config: RunConfig, value: Optional[int], t: int) -> int:
    if value is None:
        return default_mu(config.q, config.n, t, config.k, config.m)
    return _space(config).field.from_int(value)


def _code(config: RunConfig) -> CodeSpec:
    _require(config, "q", "m", "n", "t")
    field = _space(config).field
    kind = CodeKind(config.kind)
    mu = s = points = None
    if kind in (CodeKind.TWISTED, CodeKind.PUNCTURED):
        _require(config, "s")
        s = config.s
        mu = _mu(config, config.mu, config.t)
    if kind == CodeKind.GABIDULIN and config.g:
        points = field.from_ints(config.g)
    return build_code(kind, config.q, config.m, config.n, config.t, config.k, mu=mu, s=s,
                      points=points)


@timed()
def cmd_field(args: argparse.Namespace) -> Dict[str, Any]:
    budgets = get_config_center().load_rankforge_config().budgets
    field = make_field(args.p, args.E, args.modulus, table_budget=budgets.table_budget)
    return {
        "spec": field.spec.to_json(),
        "order": field.order,
        "primitive": field.to_int(1 % field.n1),
        "subfields": {str(D): field.to_int(subfield_primitive(field, field.p, D))
                      for D in range(1, field.E + 1) if field.E % D == 0},
    }


@timed()
def cmd_code(action: str, config: RunConfig) -> Dict[str, Any]:
    code = _code(config)
    budgets, jobs, chunk = config.budgets, config.jobs, config.chunk_size
    if action == "build":
        return code.to_json()
    if action == "mindist":
        distance = min_rank_distance(code, jobs, chunk, budget=budgets.max_codewords)
        return {"code": code.describe(), "min_distance": distance}
    if action == "export":
        dist = rank_distribution(code, jobs, chunk, budget=budgets.max_codewords)
        return {"code": code.describe(), "distribution": {str(r): c for r, c in dist.items()}}
    report = verify_mrd(code, jobs, chunk, budget=budgets.max_codewords)
    if not report["is_mrd"]:
        raise VerificationFailed(report)
    return report


@timed()
def cmd_aut_order(config: RunConfig) -> Dict[str, Any]:
    code_kind = CodeKind(config.kind)
    if code_kind not in (CodeKind.PHI, CodeKind.TWISTED):
        raise BadParameters("aut order 只支持 phi 与 twisted")
    _require(config, "q", "m", "n", "t")
    if code_kind == CodeKind.TWISTED:
        _require(config, "s")
    space = _space(config)
    method = AutMethod(config.method)
    mu = _mu(config, config.mu, config.t) if code_kind == CodeKind.TWISTED else None

    if method == AutMethod.THEORY:
        return {"method": method.value, **aut.closed_form_counts(space, config.t, config.s, mu)}
    if method == AutMethod.COUNT:
        if code_kind == CodeKind.PHI:
            report = aut.count_phi_aut(space, config.t, budget=config.budgets.max_oracle_tuples)
        else:
            report = aut.count_h_aut(space, mu, config.s, config.t)
        return {"method": method.value, **report.to_json()}

    code = _code(config)
    oracle = aut.brute_force_aut(code, config.include_transpose, config.jobs,
                                 budget=config.budgets.max_oracle_tuples)
    if code_kind == CodeKind.PHI:
        triples = aut.enumerate_phi_triples(space, config.t)
    else:
        triples = aut.enumerate_h_triples(space, config.t, mu, config.s)
    predicate = aut.predicate_std_set(space, triples)
    direct = set(oracle.direct)
    report = aut.AutReport(len(predicate), oracle_count=len(direct),
                           factors={"transpose_coset": oracle.counts["transpose"],
                                    "sets_equal": predicate == direct}).settle()
    if not report.agreement:
        raise VerificationFailed(report.to_json())
    return {"method": method.value, **report.to_json()}


def _load_triple(raw: str) -> Dict[str, Any]:
    text = raw
    if not raw.lstrip().startswith("{"):
        try:
            with open(raw, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise ParseError(f"无法读取三元组文件 {raw}", cause=e)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"三元组 JSON 解析失败: {e}", cause=e)
    if not isinstance(data, dict):
        raise ParseError("三元组必须是 JSON 对象")
    return data


@timed()
def cmd_aut_check(config: RunConfig) -> Dict[str, Any]:
    code = _code(config)
    space = code.space
    triple = AutTriple.from_json(space.field, config.triple)
    std = to_standard(space, triple)
    preserves = contains_all(code, apply_std(space, std, code.generators))
    out: Dict[str, Any] = {"triple": triple.to_json(space.field), "preserves": preserves}
    if code.kind == CodeKind.PHI:
        out["predicate"] = aut.phi_aut_predicate(space, triple, code.t)
    elif code.kind == CodeKind.TWISTED:
        out["predicate"] = aut.h_aut_predicate(space, triple, code.t, code.mu, code.s,
                                               check_hypotheses=False)
    return out


@timed()
def cmd_equiv(config: RunConfig) -> Dict[str, Any]:
    _require(config, "q", "m", "n", "t", "s", "u")
    space = _space(config)
    mu = _mu(config, config.mu, config.t)
    nu = _mu(config, config.nu, config.t)
    witness = aut.h_equivalence_search(space, mu, config.s, nu, config.u, config.t,
                                       budget=config.budgets.gl_budget)
    out: Dict[str, Any] = {
        "found": witness is not None,
        "witness": witness.to_json(space) if witness else None,
    }
    if witness is None and config.samples:
        source = build_code(CodeKind.TWISTED, config.q, config.m, config.n, config.t, config.k,
                            mu=mu, s=config.s)
        target = build_code(CodeKind.TWISTED, config.q, config.m, config.n, config.t, config.k,
                            mu=nu, s=config.u)
        out["sampled"] = aut.sample_equivalence_falsification(space, source, target,
                                                              config.samples, config.seed)
    return out


@timed()
def cmd_cert(config: RunConfig) -> Dict[str, Any]:
    _require(config, "q", "m", "n", "t", "s")
    space = _space(config)
    mu = _mu(config, config.mu, config.t)
    cert = aut.inequivalence_certificate(space, mu, config.s, config.t)
    if not cert.verdict:
        raise VerificationFailed(cert.to_json())
    return cert.to_json()


def _run_config(args: argparse.Namespace) -> Optional[RunConfig]:
    if args.group == "field":
        return None
    flags = _flags(args)
    flags["command"] = f"{args.group} {args.action}".strip() if hasattr(args, "action") else args.group
    if args.group == "aut" and args.action == "check":
        flags["triple"] = _load_triple(args.triple)
    return load_config(args.config, flags)


def dispatch(args: argparse.Namespace, config: Optional[RunConfig]) -> Dict[str, Any]:
    if args.group == "field":
        return cmd_field(args)
    if args.group == "code":
        return cmd_code(args.action, config)
    if args.group == "aut":
        return cmd_aut_order(config) if args.action == "order" else cmd_aut_check(config)
    if args.group == "equiv":
        return cmd_equiv(config)
    return cmd_cert(config)


def _output_target(args: argparse.Namespace, config: Optional[RunConfig]):
    if config is None:
        return OutputFormat.JSON, getattr(args, "output", None)
    return OutputFormat(config.format), config.output


def _fail(exc: Exception) -> int:
    """统一的失败出口：参数类错误退出码 2，其余 1"""
    err = wrap_exception(exc, message=f"内部错误: {exc}")
    logger.error(f"命令失败: {err}", extra=err.to_dict(), exc_info=err is not exc)
    print(str(err), file=sys.stderr)
    return EXIT_USAGE if is_usage_error(err) else EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    settings = get_config_center().load_rankforge_config()
    setup_logging(level=settings.logging.level, fmt_kind=settings.logging.format)

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    start = time.perf_counter()
    status = EXIT_OK
    try:
        config = _run_config(args)
        fmt, path = _output_target(args, config)
        result = dispatch(args, config)
    except VerificationFailed as e:
        result = e.args[0]
        status = EXIT_FAILED
    except Exception as e:
        return _fail(e)

    elapsed = (time.perf_counter() - start) * 1000
    try:
        emit_report(result, fmt, path, elapsed_ms=elapsed, write_meta=settings.output.write_meta)
    except Exception as e:
        return _fail(e)
    return status


if __name__ == "__main__":
    sys.exit(main())
