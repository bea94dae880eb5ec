from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.utils.validators import validate_permutation


class ModelEntry(BaseModel):
    name: str = Field(min_length=1)
    path: str


class ImageEntry(BaseModel):
    id: str = Field(min_length=1)
    gt: str
    models: List[ModelEntry] = Field(default_factory=list)

    @field_validator("models")
    @classmethod
    def _unique_models(cls, models):
        names = [m.name for m in models]
        if len(names) != len(set(names)):
            raise ValueError("model names must be unique per image")
        return models


class TripleEntry(BaseModel):
    image_id: str
    gt: str
    maps: List[str] = Field(min_length=3, max_length=3)
    ranks: List[int] = Field(min_length=3, max_length=3)

    @field_validator("ranks")
    @classmethod
    def _check_ranks(cls, ranks):
        if not validate_permutation(ranks, 3):
            raise ValueError(f"ranks must be a permutation of 1..3, got {ranks}")
        return ranks


class QueryEntry(BaseModel):
    image_id: str
    gt_query: str
    model_queries: Dict[str, str]


class RetrievalSection(BaseModel):
    dumps: str
    queries: List[QueryEntry] = Field(default_factory=list)


class Manifest(BaseModel):
    """資料集清單，路徑相對於清單檔所在目錄"""

    version: int = 1
    images: List[ImageEntry] = Field(default_factory=list)
    triples: Optional[List[TripleEntry]] = None
    retrieval: Optional[RetrievalSection] = None

    @model_validator(mode="after")
    def _unique_images(self):
        ids = [image.id for image in self.images]
        if len(ids) != len(set(ids)):
            raise ValueError("image ids must be unique")
        return self
