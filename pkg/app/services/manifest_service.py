"""
Manifest service layer: reads corpus manifests, loads the maps they reference
and parses retrieval dump files.
"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import structlog
from pydantic import ValidationError as PydanticValidationError

from app.config import Settings, settings as default_settings
from app.core.maps import binarize_adaptive, binarize_fixed
from app.schemas.manifest import ImageEntry, Manifest, QueryEntry
from app.schemas.maps import BinaryMap
from app.schemas.meta import CandidateSet, HumanRankedTriple
from app.schemas.ranking import RetrievalDump
from app.schemas.run import PairFailure, ThresholdMode
from app.utils.image_io import load_binary, load_gray
from app.utils.validators import ManifestError

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]


def parse_dump_text(text: str, source: str = "<dumps>") -> Dict[str, RetrievalDump]:
    """
    解析檢索結果文字檔。

    格式：每筆查詢以 ``query <id>`` 開頭，接著最多 100 行
    ``<result id> <score>``，依名次排列；空行與 ``#`` 開頭的註解會被忽略。

    Args:
        text: 檔案內容
        source: 錯誤訊息中顯示的來源名稱

    Returns:
        以查詢 ID 為鍵的檢索結果

    Raises:
        ManifestError: 如果格式錯誤
    """
    dumps: Dict[str, RetrievalDump] = {}
    current_id: Optional[str] = None
    result_ids: List[str] = []
    scores: List[float] = []

    def _flush(line_no: int) -> None:
        if current_id is None:
            return
        if current_id in dumps:
            raise ManifestError(f"{source}:{line_no}: duplicate query {current_id}", field="dumps")
        try:
            dumps[current_id] = RetrievalDump(query_id=current_id, result_ids=result_ids, scores=scores)
        except PydanticValidationError as e:
            raise ManifestError(f"{source}: query {current_id}: {e.errors()[0]['msg']}", field="dumps")

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        tokens = line.split()
        if tokens[0] == "query":
            if len(tokens) != 2:
                raise ManifestError(f"{source}:{line_no}: expected 'query <id>'", field="dumps")
            _flush(line_no)
            current_id = tokens[1]
            result_ids = []
            scores = []
            continue

        if current_id is None:
            raise ManifestError(f"{source}:{line_no}: result line before any query", field="dumps")
        if len(tokens) != 2:
            raise ManifestError(f"{source}:{line_no}: expected '<result id> <score>'", field="dumps")
        try:
            scores.append(float(tokens[1]))
        except ValueError:
            raise ManifestError(f"{source}:{line_no}: invalid score {tokens[1]!r}", field="dumps")
        result_ids.append(tokens[0])

    _flush(-1)
    return dumps


def parse_dump_file(path: PathLike) -> Dict[str, RetrievalDump]:
    """讀取並解析檢索結果檔"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Retrieval dump file not found: {path}")
    return parse_dump_text(path.read_text(encoding="utf-8"), source=str(path))


class ManifestService:
    """資料集清單讀取服務"""

    def __init__(self, manifest_path: PathLike, current: Optional[Settings] = None):
        self.settings = current or default_settings
        self.path = Path(manifest_path)
        self.base_dir = self.path.parent
        self.manifest = self._load()

    def _load(self) -> Manifest:
        if not self.path.is_file():
            raise FileNotFoundError(f"Manifest file not found: {self.path}")

        try:
            data = json.loads(self.path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ManifestError(f"Manifest {self.path} is not valid JSON: {str(e)}", field="manifest")

        try:
            manifest = Manifest.model_validate(data)
        except PydanticValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise ManifestError(f"Invalid manifest {self.path}: {location}: {first['msg']}", field="manifest")

        logger.info("Manifest loaded", path=str(self.path), images=len(manifest.images))
        return manifest

    def resolve(self, relative: str) -> Path:
        """清單中的路徑以清單檔所在目錄為基準"""
        candidate = Path(relative)
        return candidate if candidate.is_absolute() else self.base_dir / candidate

    def load_model_map(
        self,
        path: Path,
        mode: ThresholdMode = ThresholdMode.ASIS,
        threshold: Optional[float] = None,
    ) -> BinaryMap:
        """
        依二值化模式載入模型輸出圖。

        Args:
            path: 圖檔路徑
            mode: asis 視為已二值化；fixed 以固定閾值；adaptive 以 2 × 平均
            threshold: fixed 模式的閾值

        Returns:
            二值圖
        """
        if mode == ThresholdMode.ASIS:
            return load_binary(path, self.settings.BINARY_BYTE_CUTOFF)
        gray = load_gray(path)
        if mode == ThresholdMode.FIXED:
            return binarize_fixed(gray, threshold)
        return binarize_adaptive(gray, self.settings.ADAPTIVE_FACTOR, self.settings.ADAPTIVE_EPSILON)

    def load_gt(self, path: Path) -> BinaryMap:
        """GT 一律視為二值圖"""
        return load_binary(path, self.settings.BINARY_BYTE_CUTOFF)

    def load_image(
        self,
        entry: ImageEntry,
        mode: ThresholdMode = ThresholdMode.ASIS,
        threshold: Optional[float] = None,
    ) -> Tuple[BinaryMap, Dict[str, BinaryMap]]:
        """
        載入單張影像的 GT 與模型輸出。

        Raises:
            FileNotFoundError: 如果任何檔案不存在
            MapFormatError: 如果圖檔格式不支援
        """
        gt = self.load_gt(self.resolve(entry.gt))
        models = {
            model.name: self.load_model_map(self.resolve(model.path), mode, threshold)
            for model in entry.models
        }
        return gt, models

    def candidate_sets(
        self,
        mode: ThresholdMode = ThresholdMode.ASIS,
        threshold: Optional[float] = None,
    ) -> Tuple[List[CandidateSet], List[PairFailure]]:
        """
        載入所有影像為 CandidateSet。

        尺寸與 GT 不符的模型輸出會被略過並記錄；沒有可用模型的影像不納入。

        Returns:
            (CandidateSet 清單, 略過的組合)
        """
        sets: List[CandidateSet] = []
        failures: List[PairFailure] = []

        for entry in self.manifest.images:
            gt, models = self.load_image(entry, mode, threshold)

            usable: Dict[str, BinaryMap] = {}
            for name, fm in models.items():
                if fm.dimensions != gt.dimensions:
                    reason = f"dimension mismatch: GT {gt.dimensions}, map {fm.dimensions}"
                    logger.error("Skipping pair", image_id=entry.id, model=name, reason=reason)
                    failures.append(PairFailure(image_id=entry.id, model=name, reason=reason))
                    continue
                usable[name] = fm

            if not usable:
                logger.warning("Image has no usable model maps", image_id=entry.id)
                continue
            sets.append(CandidateSet(image_id=entry.id, gt=gt, models=usable))

        return sets, failures

    def triples(self) -> List[HumanRankedTriple]:
        """
        人工排名三元組（FMDatabase 格式）。

        Raises:
            ManifestError: 如果清單沒有 triples 區段
        """
        if not self.manifest.triples:
            raise ManifestError(f"Manifest {self.path} has no 'triples' section", field="triples")

        return [
            HumanRankedTriple(
                image_id=entry.image_id,
                gt_path=self.resolve(entry.gt),
                map_paths=[self.resolve(p) for p in entry.maps],
                human_ranks=entry.ranks,
            )
            for entry in self.manifest.triples
        ]

    def retrieval(self) -> Tuple[Dict[str, RetrievalDump], List[QueryEntry]]:
        """
        檢索結果與每張影像的查詢對應。

        Raises:
            ManifestError: 如果清單沒有 retrieval 區段或查詢 ID 不存在
        """
        section = self.manifest.retrieval
        if section is None:
            raise ManifestError(f"Manifest {self.path} has no 'retrieval' section", field="retrieval")

        dumps = parse_dump_file(self.resolve(section.dumps))
        for query in section.queries:
            for query_id in [query.gt_query, *query.model_queries.values()]:
                if query_id not in dumps:
                    raise ManifestError(
                        f"image {query.image_id}: query {query_id} not found in {section.dumps}",
                        field="retrieval",
                    )
        return dumps, section.queries
