"""
Batch scoring service: every (image, model map, measure) of a manifest.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import structlog

from app.config import Settings, settings as default_settings
from app.core.registry import resolve_measures
from app.schemas.manifest import ImageEntry
from app.schemas.run import PairFailure, RunConfig, ScoreRecord
from app.services.manifest_service import ManifestService

logger = structlog.get_logger(__name__)


class ScoreService:
    """批次評估業務邏輯服務"""

    def __init__(self, current: Optional[Settings] = None):
        self.settings = current or default_settings
        self.failures: List[PairFailure] = []

    def run_score_batch(self, cfg: RunConfig) -> List[ScoreRecord]:
        """
        計算清單中每組 (影像, 模型, 量測) 的分數。

        Args:
            cfg: 執行設定

        Returns:
            依 (影像 ID, 量測 ID, 模型) 排序的分數紀錄；與 jobs 數無關

        Raises:
            FileNotFoundError: 如果清單或其引用的檔案不存在
            ManifestError: 如果清單內容錯誤
            MeasureIdError: 如果量測 ID 無法辨識
        """
        measures = resolve_measures(cfg.measures, self.settings)
        manifest = ManifestService(cfg.manifest, self.settings)
        mode, threshold = cfg.threshold_mode
        self.failures = []

        def _score_image(entry: ImageEntry) -> Tuple[List[ScoreRecord], List[PairFailure]]:
            gt, models = manifest.load_image(entry, mode, threshold)
            records: List[ScoreRecord] = []
            failures: List[PairFailure] = []

            for name, fm in models.items():
                if fm.dimensions != gt.dimensions:
                    reason = f"dimension mismatch: GT {gt.dimensions}, map {fm.dimensions}"
                    failures.append(PairFailure(image_id=entry.id, model=name, reason=reason))
                    continue

                for measure_id, measure in measures.items():
                    outcome = measure(gt, fm)
                    records.append(
                        ScoreRecord(
                            image_id=entry.id,
                            measure=measure_id,
                            score=outcome.score,
                            degenerate=outcome.degenerate,
                            params={**outcome.params, "model": name},
                        )
                    )
            return records, failures

        logger.info("Score batch started", manifest=str(cfg.manifest), images=len(manifest.manifest.images),
                    measures=list(measures), jobs=cfg.jobs)

        entries = manifest.manifest.images
        if cfg.jobs == 1:
            results = [_score_image(entry) for entry in entries]
        else:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as executor:
                results = list(executor.map(_score_image, entries))

        records = [record for batch, _ in results for record in batch]
        for _, failures in results:
            for failure in failures:
                logger.error("Skipping pair", image_id=failure.image_id, model=failure.model, reason=failure.reason)
            self.failures.extend(failures)

        records.sort(key=lambda record: record.sort_key)
        logger.info("Score batch finished", records=len(records), failures=len(self.failures))
        return records
