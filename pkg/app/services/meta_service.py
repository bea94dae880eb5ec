"""
Meta-measure service layer: good-image selection, trivial-map mis-ranking
(generic circle and Gaussian noise), human-ranking and application-ranking
correlation, and the wrong-GT switch test.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import structlog

from app.config import Settings, settings as default_settings
from app.core.classic import confusion, f_beta_outcome
from app.core.maps import resize_nn
from app.core.ranking import application_ranking, theta
from app.core.registry import MeasureFn, normalize_measure_id, resolve_measure
from app.core.synthetic import gaussian_noise_map, generic_circle
from app.schemas.manifest import QueryEntry
from app.schemas.maps import BinaryMap
from app.schemas.meta import CandidateSet, HumanRankedTriple, MetaMeasure, MetaResult, TrivialMapSource
from app.schemas.ranking import RankingList, RetrievalDump
from app.schemas.run import PairFailure, RunConfig
from app.services.manifest_service import ManifestService
from app.utils.image_io import load_binary
from app.utils.rng import item_stream
from app.utils.validators import (
    DimensionMismatchError,
    MapFormatError,
    ValidationError,
    validate_keep_fraction,
    validate_same_shape,
)

logger = structlog.get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

TrivialFactory = Callable[[CandidateSet, int], BinaryMap]
LoadedTriple = Tuple[HumanRankedTriple, BinaryMap, List[BinaryMap]]


class MetaService:
    """Meta-measure 業務邏輯服務"""

    def __init__(self, current: Optional[Settings] = None, jobs: int = 1):
        self.settings = current or default_settings
        self.jobs = max(1, jobs)
        self.failures: List[PairFailure] = []

    def _measure(self, measure_id: str) -> MeasureFn:
        return resolve_measure(measure_id, self.settings)

    def _map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """依輸入順序回傳結果，jobs > 1 時以執行緒池平行計算"""
        if self.jobs == 1 or len(items) < 2:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            return list(executor.map(fn, items))

    @staticmethod
    def _mean(values: Sequence[float]) -> float:
        return math.fsum(values) / len(values)

    def _model_mean(self, measure: MeasureFn, candidate: CandidateSet) -> float:
        return self._mean([measure(candidate.gt, fm).score for fm in candidate.models.values()])

    def select_good_images(
        self,
        sets: List[CandidateSet],
        measure_id: str,
        keep_fraction: Optional[float] = None,
    ) -> List[str]:
        """
        保留模型平均分數最高的影像。

        Args:
            sets: CandidateSet 清單
            measure_id: 量測 ID
            keep_fraction: 保留比例，預設取設定檔 KEEP_FRACTION

        Returns:
            依平均分數由高到低排列的影像 ID，數量為 max(1, floor(n × f))

        Raises:
            ValidationError: 如果輸入為空或比例不在 (0, 1]
        """
        if not sets:
            raise ValidationError("Cannot select images from an empty corpus", field="sets")
        keep_fraction = self.settings.KEEP_FRACTION if keep_fraction is None else keep_fraction
        validate_keep_fraction(keep_fraction)

        measure = self._measure(measure_id)
        means = self._map(lambda candidate: self._model_mean(measure, candidate), sets)

        ranked = sorted(zip(sets, means), key=lambda pair: (-pair[1], pair[0].image_id))
        keep = max(1, math.floor(len(sets) * keep_fraction + 1e-9))
        return [candidate.image_id for candidate, _ in ranked[:keep]]

    def trivial_map(self, source: TrivialMapSource, candidate: CandidateSet, seed: int) -> BinaryMap:
        """在 GT 尺寸上產生對照圖"""
        dims = candidate.gt.dimensions
        if TrivialMapSource(source) == TrivialMapSource.GENERIC:
            return generic_circle(dims, self.settings.GENERIC_RADIUS_RATIO)
        return gaussian_noise_map(
            dims, seed, self.settings.NOISE_MEAN, self.settings.NOISE_STD,
            key=candidate.image_id, factor=self.settings.NOISE_THRESHOLD_FACTOR,
        )

    def misrank_rate(
        self,
        sets: List[CandidateSet],
        source: TrivialMapSource,
        measure_id: str,
        seed: int,
        trivial_factory: Optional[TrivialFactory] = None,
    ) -> MetaResult:
        """
        對照圖分數高於模型平均分數的比例。

        Args:
            sets: 已篩選的 CandidateSet
            source: generic（置中圓）或 noise（高斯雜訊）
            measure_id: 量測 ID
            seed: 主種子
            trivial_factory: 自訂對照圖產生函數，None 時依 source 產生

        Returns:
            generic 對應 mm2，noise 對應 mm3
        """
        source = TrivialMapSource(source)
        meta_id = MetaMeasure.MM2 if source == TrivialMapSource.GENERIC else MetaMeasure.MM3
        measure = self._measure(measure_id)
        factory = trivial_factory or (lambda candidate, s: self.trivial_map(source, candidate, s))

        def _misranked(candidate: CandidateSet) -> bool:
            trivial = factory(candidate, seed)
            return measure(candidate.gt, trivial).score > self._model_mean(measure, candidate)

        flags = self._map(_misranked, sets)
        count = sum(flags)
        rate = count / len(sets) if sets else 0.0

        return MetaResult(
            meta_id=meta_id,
            measure_id=normalize_measure_id(measure_id),
            value=rate,
            population=len(sets),
            seed=seed,
        )

    def load_triples(
        self,
        triples: List[HumanRankedTriple],
        loader: Optional[Callable[[Path], BinaryMap]] = None,
    ) -> List[LoadedTriple]:
        """
        讀取三元組的 GT 與三張候選圖。

        無法讀取或尺寸不符的三元組會被略過並記錄在 failures。
        """
        loader = loader or (lambda path: load_binary(path, self.settings.BINARY_BYTE_CUTOFF))

        loaded = []
        for triple in triples:
            try:
                gt = load_binary(triple.gt_path, self.settings.BINARY_BYTE_CUTOFF)
                maps = [loader(path) for path in triple.map_paths]
                for path, fm in zip(triple.map_paths, maps):
                    validate_same_shape(gt.values, fm.values, f"GT and {path.name}")
            except (FileNotFoundError, MapFormatError, DimensionMismatchError) as e:
                logger.error("Skipping triple", image_id=triple.image_id, reason=str(e))
                self.failures.append(PairFailure(image_id=triple.image_id, model="triple", reason=str(e)))
                continue
            loaded.append((triple, gt, maps))
        return loaded

    def human_theta(self, loaded: List[LoadedTriple], measure_id: str, seed: int = 0) -> MetaResult:
        """已載入三元組的平均 θ"""
        measure = self._measure(measure_id)

        thetas = []
        for triple, gt, maps in loaded:
            keys = [f"map{i + 1}" for i in range(len(maps))]
            measured = RankingList.from_scores({k: measure(gt, fm).score for k, fm in zip(keys, maps)})
            human = RankingList.from_ranks(dict(zip(keys, triple.human_ranks)))
            thetas.append(theta(measured, human))

        if not thetas:
            raise ValidationError("No readable human-ranked triples", field="triples")

        return MetaResult(
            meta_id=MetaMeasure.MM4,
            measure_id=normalize_measure_id(measure_id),
            value=min(max(self._mean(thetas), 0.0), 2.0),
            population=len(thetas),
            seed=seed,
        )

    def mm4_human_theta(
        self,
        triples: List[HumanRankedTriple],
        measure_id: str,
        loader: Optional[Callable[[Path], BinaryMap]] = None,
        seed: int = 0,
    ) -> MetaResult:
        """
        量測排名與人工排名的平均 θ。

        Args:
            triples: 人工排名三元組
            measure_id: 量測 ID
            loader: 候選圖讀取函數，預設視為二值圖
            seed: 回報用的種子

        Raises:
            ValidationError: 如果沒有任何三元組可以評估
        """
        return self.human_theta(self.load_triples(triples, loader), measure_id, seed)

    def is_good_map(self, gt: BinaryMap, fm: BinaryMap) -> bool:
        return f_beta_outcome(confusion(gt, fm), 1.0).score >= self.settings.GOOD_MAP_F1

    def mm5_gt_switch_rate(self, sets: List[CandidateSet], measure_id: str, seed: int) -> MetaResult:
        """
        換成錯誤 GT 時分數反而更高的比例。

        只計入 F1 ≥ GOOD_MAP_F1 的 (影像, 模型)；錯誤 GT 由 (seed, 影像, 模型)
        的亂數串流從其他影像中均勻抽出，並以最近鄰縮放到模型輸出的尺寸。

        Raises:
            ValidationError: 如果影像少於兩張
        """
        if len(sets) < 2:
            raise ValidationError("GT switch needs at least two images", field="sets")
        measure = self._measure(measure_id)

        pairs = [
            (index, name, fm)
            for index, candidate in enumerate(sets)
            for name, fm in candidate.models.items()
            if self.is_good_map(candidate.gt, fm)
        ]

        def _switched(pair) -> bool:
            index, name, fm = pair
            candidate = sets[index]
            rng = item_stream(seed, candidate.image_id, name, "wrong-gt")
            other = int(rng.integers(len(sets) - 1))
            if other >= index:
                other += 1
            wrong_gt = resize_nn(sets[other].gt, fm.dimensions)
            return measure(wrong_gt, fm).score > measure(candidate.gt, fm).score

        flags = self._map(_switched, pairs)
        count = sum(flags)

        return MetaResult(
            meta_id=MetaMeasure.MM5,
            measure_id=normalize_measure_id(measure_id),
            value=count / len(pairs) if pairs else 0.0,
            population=len(pairs),
            seed=seed,
        )

    def mm1_application_theta(
        self,
        sets: List[CandidateSet],
        measure_id: str,
        dumps: Dict[str, RetrievalDump],
        queries: List[QueryEntry],
        seed: int = 0,
    ) -> MetaResult:
        """
        量測排名與檢索應用排名的平均 θ。

        每張影像的應用分數由 GT 查詢與各模型查詢的檢索結果計算，至少需要
        兩個模型才納入平均。

        Raises:
            ValidationError: 如果沒有任何影像可以評估
        """
        measure = self._measure(measure_id)
        by_id = {candidate.image_id: candidate for candidate in sets}

        thetas = []
        for query in queries:
            candidate = by_id.get(query.image_id)
            if candidate is None:
                logger.warning("Query refers to an unknown image", image_id=query.image_id)
                continue

            models = [name for name in candidate.models if name in query.model_queries]
            if len(models) < 2:
                logger.debug("Skipping image with fewer than two queried models", image_id=query.image_id)
                continue

            app_ranking = application_ranking(
                query.image_id,
                dumps[query.gt_query],
                {name: dumps[query.model_queries[name]] for name in models},
            )
            measured = RankingList.from_scores(
                {name: measure(candidate.gt, candidate.models[name]).score for name in models}
            )
            thetas.append(theta(measured, app_ranking))

        if not thetas:
            raise ValidationError("No image has retrieval results for at least two models", field="retrieval")

        return MetaResult(
            meta_id=MetaMeasure.MM1,
            measure_id=normalize_measure_id(measure_id),
            value=min(max(self._mean(thetas), 0.0), 2.0),
            population=len(thetas),
            seed=seed,
        )

    def run_meta(self, cfg: RunConfig, meta_id: MetaMeasure, measure_ids: Optional[List[str]] = None) -> List[MetaResult]:
        """
        依清單執行指定的 meta-measure。

        Args:
            cfg: 執行設定
            meta_id: mm1 到 mm5
            measure_ids: 量測 ID，None 時使用 cfg.measures

        Returns:
            每個量測一筆 MetaResult

        Raises:
            ManifestError: 如果清單缺少所需區段
        """
        meta_id = MetaMeasure(meta_id)
        self.jobs = cfg.jobs
        measure_ids = list(dict.fromkeys(normalize_measure_id(m) for m in (measure_ids or cfg.measures)))

        manifest = ManifestService(cfg.manifest, self.settings)
        mode, threshold = cfg.threshold_mode
        logger.info("Meta run started", meta=meta_id.value, measures=measure_ids, seed=cfg.seed, jobs=cfg.jobs)

        results: List[MetaResult] = []
        if meta_id == MetaMeasure.MM4:
            loaded = self.load_triples(
                manifest.triples(),
                loader=lambda path: manifest.load_model_map(path, mode, threshold),
            )
            for measure_id in measure_ids:
                results.append(self.human_theta(loaded, measure_id, cfg.seed))
        else:
            sets, failures = manifest.candidate_sets(mode, threshold)
            self.failures.extend(failures)
            if not sets:
                raise ValidationError(f"Manifest {cfg.manifest} has no usable images", field="images")

            if meta_id == MetaMeasure.MM1:
                dumps, queries = manifest.retrieval()
                for measure_id in measure_ids:
                    results.append(self.mm1_application_theta(sets, measure_id, dumps, queries, cfg.seed))
            elif meta_id == MetaMeasure.MM5:
                for measure_id in measure_ids:
                    results.append(self.mm5_gt_switch_rate(sets, measure_id, cfg.seed))
            else:
                source = TrivialMapSource.GENERIC if meta_id == MetaMeasure.MM2 else TrivialMapSource.NOISE
                by_id = {candidate.image_id: candidate for candidate in sets}
                for measure_id in measure_ids:
                    selected = [by_id[i] for i in self.select_good_images(sets, measure_id)]
                    results.append(self.misrank_rate(selected, source, measure_id, cfg.seed))

        for result in results:
            logger.info("Meta-measure computed", meta=result.meta_id.value, measure=result.measure_id,
                        value=result.value, population=result.population)
        return results
