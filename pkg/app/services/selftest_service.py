"""
Self-test service: compares the vectorised measures with the loop-based
reference implementations on seeded random pairs.
"""

from typing import List, Optional

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from app.config import Settings, settings as default_settings
from app.core.classic import FbwWeighting, fbw
from app.core.emeasure import e_measure
from app.core.reference import naive_e_measure, naive_fbw
from app.schemas.maps import BinaryMap
from app.utils.rng import item_stream

logger = structlog.get_logger(__name__)

GOLDEN_GT = [[1, 0], [0, 0]]
GOLDEN_FM = [[1, 1], [0, 0]]
GOLDEN_VALUE = 0.63865
GOLDEN_TOLERANCE = 1e-4
EMEASURE_TOLERANCE = 1e-10
FBW_TOLERANCE = 1e-9


class CheckResult(BaseModel):
    """單項自我檢查結果"""

    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    checked: int
    max_error: float
    detail: str = ""


def random_pair(rng: np.random.Generator, max_size: int) -> tuple:
    """隨機尺寸與前景密度的非常數二值圖對"""
    while True:
        h = int(rng.integers(2, max_size + 1))
        w = int(rng.integers(2, max_size + 1))
        gt = rng.random((h, w)) < rng.uniform(0.05, 0.6)
        fm = rng.random((h, w)) < rng.uniform(0.05, 0.6)
        if gt.any() and not gt.all():
            return BinaryMap(values=gt), BinaryMap(values=fm)


class SelftestService:
    """自我檢查服務"""

    def __init__(self, current: Optional[Settings] = None):
        self.settings = current or default_settings

    def check_golden(self) -> CheckResult:
        gt = BinaryMap.from_rows(GOLDEN_GT)
        fm = BinaryMap.from_rows(GOLDEN_FM)
        fast = e_measure(gt, fm)
        naive = naive_e_measure(gt, fm)
        error = max(abs(fast - GOLDEN_VALUE), abs(naive - GOLDEN_VALUE))
        return CheckResult(
            name="emeasure-golden",
            passed=error <= GOLDEN_TOLERANCE,
            checked=1,
            max_error=error,
            detail=f"fast={fast:.6f} naive={naive:.6f} expected={GOLDEN_VALUE}",
        )

    def check_emeasure(self, pairs: int, max_size: int, seed: int) -> CheckResult:
        rng = item_stream(seed, "selftest", "emeasure")
        worst = 0.0
        for _ in range(pairs):
            gt, fm = random_pair(rng, max_size)
            worst = max(worst, abs(e_measure(gt, fm) - naive_e_measure(gt, fm)))
        return CheckResult(
            name="emeasure-oracle",
            passed=worst <= EMEASURE_TOLERANCE,
            checked=pairs,
            max_error=worst,
            detail=f"max_side={max_size}",
        )

    def check_fbw(self, pairs: int, max_size: int, seed: int) -> CheckResult:
        weighting = FbwWeighting.from_settings(self.settings)
        rng = item_stream(seed, "selftest", "fbw")
        worst = 0.0
        for _ in range(pairs):
            gt, fm = random_pair(rng, max_size)
            fast = fbw(gt, fm, self.settings.FBW_BETA, weighting)
            naive = naive_fbw(
                gt, fm,
                beta=self.settings.FBW_BETA,
                sigma=weighting.sigma,
                kernel_size=weighting.kernel_size,
                alpha=weighting.alpha,
            )
            worst = max(worst, abs(fast - naive))
        return CheckResult(
            name="fbw-oracle",
            passed=worst <= FBW_TOLERANCE,
            checked=pairs,
            max_error=worst,
            detail=f"max_side={max_size}",
        )

    def run(
        self,
        pairs: int = 100,
        max_size: int = 64,
        fbw_max_size: int = 24,
        seed: int = 0,
    ) -> List[CheckResult]:
        """
        執行所有自我檢查。

        Args:
            pairs: 每項檢查的隨機圖對數量
            max_size: E-measure 檢查的最大邊長
            fbw_max_size: Fbw 檢查的最大邊長（參考實作為逐像素迴圈）
            seed: 主種子

        Returns:
            各項檢查結果
        """
        results = [
            self.check_golden(),
            self.check_emeasure(pairs, max_size, seed),
            self.check_fbw(pairs, min(fbw_max_size, max_size), seed),
        ]
        for result in results:
            log = logger.info if result.passed else logger.error
            log("Selftest check", name=result.name, passed=result.passed,
                checked=result.checked, max_error=result.max_error)
        return results
