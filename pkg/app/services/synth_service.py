"""
Synthetic corpus service: random blob GTs with mildly perturbed model maps,
optional human-ranked triples, written out as PNG files plus a manifest.
"""

from pathlib import Path
from typing import List, Optional, Tuple, Union

import structlog
from pydantic import BaseModel, ConfigDict

from app.config import Settings, settings as default_settings
from app.core.synthetic import PerturbKind, perturb, random_blob_gt
from app.schemas.manifest import ImageEntry, Manifest, ModelEntry, TripleEntry
from app.schemas.maps import BinaryMap, Dimensions
from app.schemas.meta import CandidateSet
from app.utils.image_io import save_binary
from app.utils.rng import item_stream
from app.utils.validators import DegenerateMapError, ValidationError

logger = structlog.get_logger(__name__)

# 三元組由輕到重的翻轉強度（‰）
TRIPLE_SEVERITIES = (10, 60, 150)
FALLBACK_FLIP = 10


class SyntheticTriple(BaseModel):
    """合成的人工排名三元組：maps[i] 的名次為 ranks[i]"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    image_id: str
    gt: BinaryMap
    maps: List[BinaryMap]
    ranks: List[int]


def image_id_for(index: int) -> str:
    return f"img{index:04d}"


def model_name_for(index: int) -> str:
    return f"model{index + 1}"


def _draw_perturbation(rng) -> Tuple[PerturbKind, int]:
    kind = list(PerturbKind)[int(rng.integers(len(PerturbKind)))]
    if kind == PerturbKind.FLIP_NOISE:
        # 0.5% 到 2%
        return kind, int(rng.integers(5, 21))
    if kind == PerturbKind.SHIFT:
        return kind, int(rng.integers(1, 3))
    return kind, 1


class SynthService:
    """合成資料集產生服務"""

    def __init__(self, current: Optional[Settings] = None):
        self.settings = current or default_settings

    def model_map(self, gt: BinaryMap, image_id: str, model: str, seed: int) -> BinaryMap:
        """以 (seed, 影像, 模型) 派生的擾動產生模型輸出"""
        rng = item_stream(seed, image_id, model)
        kind, magnitude = _draw_perturbation(rng)
        perturb_seed = int(rng.integers(2 ** 31))
        try:
            return perturb(gt, kind, magnitude, perturb_seed)
        except DegenerateMapError:
            logger.debug("Perturbation degenerate, falling back to flip-noise",
                         image_id=image_id, model=model, kind=kind.value)
            return perturb(gt, PerturbKind.FLIP_NOISE, FALLBACK_FLIP, perturb_seed)

    def generate_corpus(
        self,
        images: int,
        dims: Dimensions,
        seed: int,
        models: Optional[int] = None,
    ) -> List[CandidateSet]:
        """
        產生合成資料集。

        Args:
            images: 影像數量
            dims: 每張圖的尺寸
            seed: 主種子
            models: 每張影像的模型輸出數量

        Returns:
            CandidateSet 清單，影像 ID 依序為 img0000, img0001, ...
        """
        if images < 1:
            raise ValidationError(f"images must be positive, got {images}", field="images")
        models = models or self.settings.SYNTH_MODELS
        if models < 1:
            raise ValidationError(f"models must be positive, got {models}", field="models")

        sets = []
        for index in range(images):
            image_id = image_id_for(index)
            gt = random_blob_gt(dims, item_stream(seed, image_id, "gt"))
            maps = {
                model_name_for(j): self.model_map(gt, image_id, model_name_for(j), seed)
                for j in range(models)
            }
            sets.append(CandidateSet(image_id=image_id, gt=gt, models=maps))

        logger.info("Synthetic corpus generated", images=images, size=str(dims), models=models, seed=seed)
        return sets

    def generate_triples(self, sets: List[CandidateSet], seed: int) -> List[SyntheticTriple]:
        """每張影像產生三張嚴重程度遞增的圖，以打亂後的順序與名次輸出"""
        triples = []
        for candidate in sets:
            rng = item_stream(seed, candidate.image_id, "triple")
            severity_maps = []
            for severity in TRIPLE_SEVERITIES:
                noisy = perturb(candidate.gt, PerturbKind.FLIP_NOISE, severity, int(rng.integers(2 ** 31)))
                severity_maps.append(noisy)

            order = [int(i) for i in rng.permutation(len(TRIPLE_SEVERITIES))]
            triples.append(
                SyntheticTriple(
                    image_id=candidate.image_id,
                    gt=candidate.gt,
                    maps=[severity_maps[i] for i in order],
                    ranks=[i + 1 for i in order],
                )
            )
        return triples

    def write_corpus(
        self,
        out_dir: Union[str, Path],
        images: int,
        dims: Dimensions,
        seed: int,
        models: Optional[int] = None,
        triples: bool = False,
    ) -> Path:
        """
        產生並寫出合成資料集。

        目錄結構：gt/<id>.png、models/<model>/<id>.png、triples/<id>_<k>.png，
        清單 manifest.json 中的路徑相對於輸出目錄。

        Returns:
            manifest.json 的路徑
        """
        out_dir = Path(out_dir)
        sets = self.generate_corpus(images, dims, seed, models)

        entries = []
        for candidate in sets:
            gt_rel = f"gt/{candidate.image_id}.png"
            save_binary(candidate.gt, out_dir / gt_rel)

            model_entries = []
            for name, fm in candidate.models.items():
                rel = f"models/{name}/{candidate.image_id}.png"
                save_binary(fm, out_dir / rel)
                model_entries.append(ModelEntry(name=name, path=rel))
            entries.append(ImageEntry(id=candidate.image_id, gt=gt_rel, models=model_entries))

        triple_entries = None
        if triples:
            triple_entries = []
            for triple in self.generate_triples(sets, seed):
                paths = []
                for k, fm in enumerate(triple.maps, start=1):
                    rel = f"triples/{triple.image_id}_{k}.png"
                    save_binary(fm, out_dir / rel)
                    paths.append(rel)
                triple_entries.append(
                    TripleEntry(image_id=triple.image_id, gt=f"gt/{triple.image_id}.png",
                                maps=paths, ranks=triple.ranks)
                )

        manifest = Manifest(images=entries, triples=triple_entries)
        manifest_path = out_dir / "manifest.json"
        manifest_path.write_text(manifest.model_dump_json(indent=2, exclude_none=True) + "\n", encoding="utf-8")

        logger.info("Synthetic corpus written", path=str(manifest_path), images=len(entries),
                    triples=len(triple_entries or []))
        return manifest_path
