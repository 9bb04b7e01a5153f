"""
日志管理模块

提供结构化日志记录功能
"""

import logging
import sys
from datetime import datetime
from functools import wraps
from pathlib import Path
from typing import List

import structlog

from .config import get_config


def setup_logging(force: bool = False):
    """设置日志配置"""
    config = get_config()

    # stdout 留给命令输出，日志写到 stderr
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if config.log_file:
        log_file_path = Path(config.log_file)
        log_file_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file_path, encoding="utf-8"))

    # 配置标准库logging
    logging.basicConfig(
        level=getattr(logging, config.log_level.upper(), logging.WARNING),
        format="%(message)s",
        handlers=handlers,
        force=force,
    )

    # 配置structlog
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="ISO"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.dev.ConsoleRenderer(colors=False)
            if config.is_development
            else structlog.processors.JSONRenderer(),
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


def get_logger(name: str = None) -> structlog.stdlib.BoundLogger:
    """获取日志记录器"""
    if not structlog.is_configured():
        setup_logging()

    return structlog.get_logger(name)


class LoggerMixin:
    """日志记录器混入类"""

    @property
    def logger(self) -> structlog.stdlib.BoundLogger:
        """获取当前类的日志记录器"""
        return get_logger(self.__class__.__name__)


def log_function_call(func):
    """函数调用日志装饰器"""

    @wraps(func)
    def wrapper(*args, **kwargs):
        logger = get_logger(func.__module__)
        logger.debug(
            "Function called",
            function=func.__name__,
            args_count=len(args),
            kwargs_keys=list(kwargs.keys()),
        )

        start_time = datetime.now()
        try:
            result = func(*args, **kwargs)
            execution_time = (datetime.now() - start_time).total_seconds()
            logger.debug(
                "Function completed",
                function=func.__name__,
                execution_time=execution_time,
            )
            return result
        except Exception as e:
            execution_time = (datetime.now() - start_time).total_seconds()
            logger.warning(
                "Function failed",
                function=func.__name__,
                execution_time=execution_time,
                error=str(e),
            )
            raise

    return wrapper
