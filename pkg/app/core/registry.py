"""
Measure-id parsing and dispatch.

Supported ids: ``emeasure``, ``f1``, ``fbeta:<beta>``, ``iou``, ``fbw``.
"""

import re
from typing import Callable, Dict, List, Optional

from app.config import Settings, settings as default_settings
from app.core.classic import FbwWeighting, confusion, f_beta_id, f_beta_outcome, fbw_outcome, iou_outcome
from app.core.emeasure import e_measure_outcome
from app.schemas.maps import BinaryMap
from app.schemas.measures import MeasureOutcome
from app.utils.validators import MeasureIdError

MeasureFn = Callable[[BinaryMap, BinaryMap], MeasureOutcome]

KNOWN_MEASURES = ("emeasure", "f1", "fbeta:<beta>", "iou", "fbw")

_FBETA = re.compile(r"^fbeta:(?P<beta>[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)$")


def normalize_measure_id(measure_id: str) -> str:
    """統一量測 ID 寫法，fbeta:1 視為 f1"""
    text = measure_id.strip().lower()
    match = _FBETA.match(text)
    if match:
        beta = float(match.group("beta"))
        if beta <= 0:
            raise MeasureIdError(f"beta must be positive in {measure_id!r}", field="measures")
        return f_beta_id(beta)
    if text in ("emeasure", "f1", "iou", "fbw"):
        return text
    raise MeasureIdError(
        f"Unknown measure id {measure_id!r}; expected one of {', '.join(KNOWN_MEASURES)}",
        field="measures",
    )


def resolve_measure(measure_id: str, current: Optional[Settings] = None) -> MeasureFn:
    """
    取得量測函數。

    Args:
        measure_id: 量測 ID
        current: 設定（Fbw 權重常數來源）

    Returns:
        (gt, fm) -> MeasureOutcome 的函數

    Raises:
        MeasureIdError: 如果 ID 無法辨識
    """
    current = current or default_settings
    normalized = normalize_measure_id(measure_id)

    if normalized == "emeasure":
        return e_measure_outcome

    if normalized == "iou":
        return lambda gt, fm: iou_outcome(confusion(gt, fm))

    if normalized == "fbw":
        weighting = FbwWeighting.from_settings(current)
        beta = current.FBW_BETA
        return lambda gt, fm: fbw_outcome(gt, fm, beta=beta, weighting=weighting)

    beta = 1.0 if normalized == "f1" else float(normalized.split(":", 1)[1])
    return lambda gt, fm: f_beta_outcome(confusion(gt, fm), beta)


def resolve_measures(measure_ids: List[str], current: Optional[Settings] = None) -> Dict[str, MeasureFn]:
    """依序解析多個量測 ID，重複的 ID 只保留一個"""
    resolved: Dict[str, MeasureFn] = {}
    for measure_id in measure_ids:
        normalized = normalize_measure_id(measure_id)
        if normalized not in resolved:
            resolved[normalized] = resolve_measure(normalized, current)
    return resolved
