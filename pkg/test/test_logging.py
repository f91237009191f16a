#!/usr/bin/env python3
"""
测试统一日志系统
"""

from loguru import logger

from logger_config import get_current_log_file, get_logger, log_verdict, setup_logger


def test_logging_to_file(tmp_path):
    """文件输出时分支判定写入日志文件"""
    log_file = setup_logger("DEBUG", console_output=False, file_output=True, log_dir=str(tmp_path), force=True)
    try:
        assert log_file is not None
        assert get_current_log_file() == log_file
        get_logger(__name__).info("开始测试日志系统")
        log_verdict("psi", "bounded", sup=0.5)
        logger.complete()
        text = open(log_file, encoding="utf-8").read()
        assert "开始测试日志系统" in text
        assert "分支 psi: bounded (sup=0.5)" in text
    finally:
        setup_logger("WARNING", file_output=False, force=True)
    assert get_current_log_file() is None


def test_setup_is_idempotent():
    first = setup_logger()
    assert setup_logger() == first
