import logging.config
from typing import Optional

import structlog

from app.config import Settings, settings as default_settings, shared_processors


def configure_logging(current: Optional[Settings] = None) -> None:
    """設定 structlog 與標準 logging"""
    current = current or default_settings

    logging.config.dictConfig(current.get_logging_config())

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            *shared_processors(),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
