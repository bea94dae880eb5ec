import math
from typing import Optional

import structlog
from pydantic_settings import BaseSettings, SettingsConfigDict


def shared_processors() -> list:
    """structlog 與標準 logging 共用的處理器"""
    return [
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso"),
    ]


class Settings(BaseSettings):
    """應用程式配置設定"""

    model_config = SettingsConfigDict(
        env_prefix="FMEVAL_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # 二值化設定
    ADAPTIVE_FACTOR: float = 2.0
    ADAPTIVE_EPSILON: float = 1e-9
    BINARY_BYTE_CUTOFF: int = 128

    # Fbw 權重設定
    FBW_SIGMA: float = 5.0
    FBW_KERNEL_SIZE: int = 7
    FBW_ALPHA: float = math.log(0.5) / 5
    FBW_BETA: float = 1.0

    # Meta-measure 設定
    GENERIC_RADIUS_RATIO: float = 0.25
    NOISE_MEAN: float = 0.5
    NOISE_STD: float = 0.15
    NOISE_THRESHOLD_FACTOR: float = 1.0
    KEEP_FRACTION: float = 0.8
    GOOD_MAP_F1: float = 0.8

    # 批次執行設定
    DEFAULT_SEED: int = 0
    DEFAULT_JOBS: int = 1
    SCORE_SIGNIFICANT_DIGITS: int = 12

    # 合成資料集設定
    SYNTH_IMAGES: int = 200
    SYNTH_WIDTH: int = 64
    SYNTH_HEIGHT: int = 64
    SYNTH_MODELS: int = 3

    # 日誌設定
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = False

    def validate_required_settings(self) -> list:
        """驗證設定值範圍"""
        invalid = []

        if not 0 < self.ADAPTIVE_EPSILON < 1:
            invalid.append("ADAPTIVE_EPSILON")

        if not 0 <= self.BINARY_BYTE_CUTOFF <= 255:
            invalid.append("BINARY_BYTE_CUTOFF")

        if self.FBW_SIGMA <= 0:
            invalid.append("FBW_SIGMA")

        # 核心大小必須為正奇數
        if self.FBW_KERNEL_SIZE < 1 or self.FBW_KERNEL_SIZE % 2 == 0:
            invalid.append("FBW_KERNEL_SIZE")

        if self.FBW_ALPHA >= 0:
            invalid.append("FBW_ALPHA")

        if self.FBW_BETA <= 0:
            invalid.append("FBW_BETA")

        if self.GENERIC_RADIUS_RATIO <= 0:
            invalid.append("GENERIC_RADIUS_RATIO")

        if self.NOISE_THRESHOLD_FACTOR <= 0:
            invalid.append("NOISE_THRESHOLD_FACTOR")

        if self.NOISE_STD < 0:
            invalid.append("NOISE_STD")

        if not 0 < self.KEEP_FRACTION <= 1:
            invalid.append("KEEP_FRACTION")

        if not 0 <= self.GOOD_MAP_F1 <= 1:
            invalid.append("GOOD_MAP_F1")

        if self.DEFAULT_JOBS < 1:
            invalid.append("DEFAULT_JOBS")

        if not 1 <= self.SCORE_SIGNIFICANT_DIGITS <= 17:
            invalid.append("SCORE_SIGNIFICANT_DIGITS")

        return invalid

    def get_fbw_config(self) -> dict:
        """獲取 Fbw 權重配置"""
        return {
            "sigma": self.FBW_SIGMA,
            "kernel_size": self.FBW_KERNEL_SIZE,
            "alpha": self.FBW_ALPHA,
        }

    def get_synth_config(self) -> dict:
        """獲取合成資料集配置"""
        return {
            "images": self.SYNTH_IMAGES,
            "width": self.SYNTH_WIDTH,
            "height": self.SYNTH_HEIGHT,
            "models": self.SYNTH_MODELS,
        }

    def get_logging_config(self) -> dict:
        """獲取日誌配置"""
        renderer = "json" if self.LOG_JSON else "console"
        return {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "console": {
                    "()": structlog.stdlib.ProcessorFormatter,
                    "processor": structlog.dev.ConsoleRenderer(colors=False),
                    "foreign_pre_chain": shared_processors(),
                },
                "json": {
                    "()": structlog.stdlib.ProcessorFormatter,
                    "processor": structlog.processors.JSONRenderer(),
                    "foreign_pre_chain": shared_processors(),
                },
            },
            "handlers": {
                "default": {
                    "formatter": renderer,
                    "class": "logging.StreamHandler",
                    "stream": "ext://sys.stderr",
                },
            },
            "root": {
                "level": self.LOG_LEVEL.upper(),
                "handlers": ["default"],
            },
        }


# 全域設定實例
settings = Settings()


def load_settings(env_file: Optional[str] = None) -> Settings:
    """載入設定，可指定額外的 .env 檔案"""
    if env_file:
        return Settings(_env_file=env_file)
    return settings


# 驗證設定
def validate_settings(current: Optional[Settings] = None):
    """驗證應用程式設定"""
    invalid = (current or settings).validate_required_settings()

    if invalid:
        raise ValueError(f"Invalid settings: {', '.join(invalid)}")
