#!/usr/bin/env python3
"""
统一日志配置模块
使用Loguru提供全局日志管理

标准输出留给JSON报告, 控制台日志一律写到标准错误。
日志级别与文件输出可以通过 .env 中的 LOG_LEVEL / LOG_TO_FILE / LOG_DIR 调整。
"""

import os
import sys
from datetime import datetime
from typing import Optional

from dotenv import load_dotenv
from loguru import logger

# 移除默认的handler
logger.remove()

# 全局日志配置
_log_initialized = False
_current_log_file = None
_sink_ids = []


def _env_flag(name: str, default: bool = False) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


def setup_logger(
    log_level: Optional[str] = None,
    console_output: bool = True,
    file_output: Optional[bool] = None,
    log_dir: Optional[str] = None,
    force: bool = False,
) -> Optional[str]:
    """
    设置全局日志系统

    Args:
        log_level: 日志级别 (DEBUG, INFO, WARNING, ERROR), 默认读取 LOG_LEVEL
        console_output: 是否输出到控制台(标准错误)
        file_output: 是否输出到文件, 默认读取 LOG_TO_FILE
        log_dir: 日志文件目录, 默认读取 LOG_DIR
        force: 已初始化时是否重新配置

    Returns:
        str: 日志文件路径 (仅控制台输出时为 None)
    """
    global _log_initialized, _current_log_file

    if _log_initialized and not force:
        return _current_log_file

    load_dotenv()
    log_level = (log_level or os.getenv("LOG_LEVEL", "WARNING")).upper()
    if file_output is None:
        file_output = _env_flag("LOG_TO_FILE")
    log_dir = log_dir or os.getenv("LOG_DIR", "logs")

    for sink_id in _sink_ids:
        logger.remove(sink_id)
    _sink_ids.clear()

    # 创建日志目录
    if file_output and not os.path.exists(log_dir):
        os.makedirs(log_dir)

    # 生成日志文件名
    timestamp = datetime.now().strftime("%Y%m%d")
    log_filename = f"cosine_stability_{timestamp}.log"
    log_filepath = os.path.join(log_dir, log_filename) if file_output else None
    _current_log_file = log_filepath

    # 控制台输出配置
    if console_output:
        _sink_ids.append(logger.add(
            sys.stderr,
            level=log_level,
            format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
                   "<level>{level: <8}</level> | "
                   "<cyan>{extra[name]}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
                   "<level>{message}</level>",
            colorize=True,
        ))

    # 文件输出配置
    if file_output:
        _sink_ids.append(logger.add(
            log_filepath,
            level=log_level,
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {extra[name]}:{function}:{line} - {message}",
            rotation="100 MB",
            retention="30 days",
            compression="zip",
            encoding="utf-8",
            enqueue=True,
            backtrace=True,
            diagnose=True,
        ))

    logger.configure(extra={"name": "root"})
    _log_initialized = True

    if file_output:
        logger.info(f"日志系统初始化完成，日志文件: {log_filepath}")
    else:
        logger.info("日志系统初始化完成（仅控制台输出）")

    return log_filepath


def get_logger(name: str = None):
    """
    获取logger实例

    Args:
        name: logger名称，通常使用 __name__

    Returns:
        loguru.Logger: logger实例
    """
    if not _log_initialized:
        setup_logger()

    if name:
        return logger.bind(name=name)
    return logger


def get_current_log_file() -> Optional[str]:
    """获取当前日志文件路径"""
    return _current_log_file


def log_verdict(step: str, verdict: str, **values):
    """记录分类器分支判定"""
    details = ", ".join(f"{k}={v}" for k, v in values.items())
    msg = f"分支 {step}: {verdict}"
    if details:
        msg += f" ({details})"
    classifier_logger.info(msg)


def log_scan(kernel: str, radius: int, pairs: int, sup: float):
    """记录一次窗口扫描"""
    scan_logger.debug(f"扫描 {kernel} 半径={radius} 点对={pairs} sup={sup:.6g}")


# 创建一些常用的logger实例
scan_logger = get_logger("scan")
classifier_logger = get_logger("classifier")
