#!/usr/bin/env python3
"""
余弦-正弦方程稳定性实验室命令行界面
构造、偏差扫描、Hyers 投影、分类、验证与往返测试, 报告以 JSON 写到标准输出

退出码: 0 成功; 1 验证或分类失败(报告照常输出); 2 输入错误(信息写到标准错误)
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from classifier import Tolerances, classify, verify_case
from deviation import sup_deviation
from errors import MalformedInput, StabilityError
from families import FamilyParams, construct_case
from funcspace import DEFAULT_SCHEDULE, GFunction, descriptor_from_json
from group_core import GroupSpec, group_by_name, group_from_json, lattice
from hyers import DEFAULT_DEPTH, DEFAULT_TOL, additive_part
from logger_config import get_logger, setup_logger
from oracle import finite_trials, roundtrip_many, summarize

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


# ==================== JSON 输出 ====================

def _canonical(value) -> str:
    """键排序、浮点 17 位有效数字、inf/nan 写为 null 的 JSON 文本"""
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating, mpmath.mpf)):
        v = float(value)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        items = sorted((str(k), v) for k, v in value.items())
        return "{" + ",".join(f"{json.dumps(k, ensure_ascii=False)}:{_canonical(v)}" for k, v in items) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(_canonical(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_json(value) -> str:
    return _canonical(value)


def _emit(report: dict, out: Optional[str] = None):
    text = canonical_json(report)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        logger.info(f"报告已写入 {out}")
    print(text)


# ==================== 输入解析 ====================

def parse_schedule(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(r) for r in text.split(","))
    except ValueError:
        raise MalformedInput(f"schedule must be comma separated integers, got {text!r}")


def parse_seeds(text: str) -> List[int]:
    """'1..50' 或 '1,2,3'"""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(s) for s in text.split(",")]
    except ValueError:
        raise MalformedInput(f"seeds must look like '1..50' or '1,2,3', got {text!r}")


def _read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise MalformedInput(f"{path}: top level must be an object")
    return data


def load_group(data: dict) -> GroupSpec:
    if "group" not in data:
        return lattice(1)
    group = data["group"]
    if isinstance(group, str):
        return group_by_name(group)
    return group_from_json(group)


def load_fixture(path: str) -> Tuple[GroupSpec, dict]:
    """读取 fixture, 返回群与 {名字: GFunction}"""
    data = _read_json(path)
    group = load_group(data)
    functions = data.get("functions")
    if not isinstance(functions, dict):
        raise MalformedInput(f"{path}: 'functions' must be an object")
    return group, {name: GFunction(group, descriptor_from_json(desc)) for name, desc in functions.items()}


def load_triple(path: str) -> Tuple[GroupSpec, GFunction, GFunction, GFunction]:
    group, functions = load_fixture(path)
    missing = [n for n in ("f", "g", "h") if n not in functions]
    if missing:
        raise MalformedInput(f"{path}: fixture lacks {missing}")
    return group, functions["f"], functions["g"], functions["h"]


def load_params(path: str, case_id: int, group: GroupSpec = None) -> FamilyParams:
    data = _read_json(path)
    data = {**data, "case_id": case_id}
    return FamilyParams.from_json(data, group)


# ==================== 命令行 ====================

class StabilityCLI:
    """子命令分发; 每个 handle_* 返回退出码"""

    def __init__(self, args: argparse.Namespace):
        self.args = args

    def tolerances(self) -> Tolerances:
        a = self.args
        return Tolerances().replace(tol_exact=getattr(a, "tol_exact", None), tol_fit=getattr(a, "tol_fit", None),
                                    tau=getattr(a, "tau", None), tol_growth=getattr(a, "tol_growth", None))

    def handle_construct(self) -> int:
        params = load_params(self.args.params, self.args.case)
        construction = construct_case(params)
        _emit(construction.to_fixture(), self.args.out)
        return EXIT_OK

    def handle_deviation(self) -> int:
        _, f, g, h = load_triple(self.args.funcs)
        report = sup_deviation(f, g, h, self.args.schedule)
        _emit(report.to_json(), self.args.out)
        return EXIT_OK

    def handle_classify(self) -> int:
        _, f, g, h = load_triple(self.args.funcs)
        report = classify(f, g, h, self.args.schedule, self.tolerances())
        _emit(report.to_json(), self.args.out)
        return EXIT_OK if report.classified else EXIT_FAILED

    def handle_hyers(self) -> int:
        data = _read_json(self.args.func)
        group = load_group(data)
        if "function" in data:
            desc = data["function"]
        elif isinstance(data.get("functions"), dict) and self.args.name in data["functions"]:
            desc = data["functions"][self.args.name]
        else:
            raise MalformedInput(f"{self.args.func}: needs 'function' or functions[{self.args.name!r}]")
        result = additive_part(GFunction(group, descriptor_from_json(desc)), self.args.depth, self.args.tol,
                               self.args.schedule)
        _emit(result.to_json(), self.args.out)
        return EXIT_OK

    def handle_verify(self) -> int:
        group, f, g, h = load_triple(self.args.funcs)
        params = load_params(self.args.params, self.args.case, group)
        tol = self.tolerances()
        report = verify_case(self.args.case, params, f, g, h, self.args.schedule, tol.tol_fit, tol.tau,
                             tol.tol_exact, tol.tol_growth)
        _emit(report.to_json(), self.args.out)
        return EXIT_OK if report.classified else EXIT_FAILED

    def handle_oracle(self) -> int:
        if self.args.oracle == "finite":
            report = finite_trials(group_by_name(self.args.group), self.args.trials, self.args.seed,
                                   self.args.schedule)
            _emit(report.to_json(), self.args.out)
            return EXIT_OK if report.passed else EXIT_FAILED

        outcomes = roundtrip_many(self.args.case, self.args.seeds, self.args.noise, self.args.schedule,
                                  self.tolerances(), self.args.jobs)
        lines = [canonical_json(o.to_json()) for o in outcomes]
        if self.args.out:
            Path(self.args.out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        for line in lines:
            print(line)
        summary = summarize(outcomes)
        print(canonical_json(summary), file=sys.stderr)
        return EXIT_OK if summary["ok"] else EXIT_FAILED

    def run(self) -> int:
        handler = getattr(self, f"handle_{self.args.command}")
        return handler()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cosine-stability",
                                     description="Stability laboratory for f(xy)=f(x)g(y)+g(x)f(y)+h(x)h(y)")
    parser.add_argument("--log-level", default=None, help="DEBUG / INFO / WARNING / ERROR")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for oracle round trips")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, schedule=True, out=True):
        if schedule:
            p.add_argument("--schedule", type=parse_schedule, default=DEFAULT_SCHEDULE)
        if out:
            p.add_argument("--out", default=None)

    def tolerance_flags(p):
        p.add_argument("--tol-exact", type=float, default=None)
        p.add_argument("--tol-fit", type=float, default=None)
        p.add_argument("--tau", type=float, default=None)
        p.add_argument("--tol-growth", type=float, default=None, help="sup creep still read as bounded")

    p = sub.add_parser("construct", help="assemble (f, g, h) for a case")
    p.add_argument("--case", type=int, required=True)
    p.add_argument("--params", required=True)
    common(p, schedule=False)

    p = sub.add_parser("deviation", help="scan sup |psi|")
    p.add_argument("--funcs", required=True)
    common(p)

    p = sub.add_parser("classify", help="classify a fixture triple")
    p.add_argument("--funcs", required=True)
    common(p)
    tolerance_flags(p)

    p = sub.add_parser("hyers", help="dyadic additive projection")
    p.add_argument("--func", required=True)
    p.add_argument("--name", default="f")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common(p)

    p = sub.add_parser("verify", help="check the identities of one case")
    p.add_argument("--case", type=int, required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--funcs", required=True)
    common(p)
    tolerance_flags(p)

    p = sub.add_parser("oracle", help="brute-force checks")
    oracle_sub = p.add_subparsers(dest="oracle", required=True)
    q = oracle_sub.add_parser("roundtrip")
    q.add_argument("--case", type=int, required=True)
    q.add_argument("--seeds", type=parse_seeds, default=parse_seeds("1..50"))
    q.add_argument("--noise", type=float, default=0.01)
    common(q)
    tolerance_flags(q)
    q = oracle_sub.add_parser("finite")
    q.add_argument("--group", default="Z6")
    q.add_argument("--trials", type=int, default=100)
    q.add_argument("--seed", type=int, default=0)
    common(q)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """命令行入口, 返回退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse 已把用法信息写到标准错误
        return EXIT_INPUT if e.code else EXIT_OK
    setup_logger(args.log_level, force=args.log_level is not None)

    try:
        return StabilityCLI(args).run()
    except (StabilityError, json.JSONDecodeError, KeyError, OSError) as e:
        logger.error(f"{args.command} 失败: {type(e).__name__}: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
