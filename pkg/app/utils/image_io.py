from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from app.config import settings
from app.schemas.maps import BinaryMap, GrayMap
from app.utils.validators import MapFormatError

PathLike = Union[str, Path]

SUPPORTED_MODES = ("L", "RGB", "1", "P")
LOSSY_FORMATS = ("JPEG", "WEBP", "MPO")


def _read_bytes(path: PathLike) -> np.ndarray:
    """讀取 8-bit 灰階或 RGB 圖檔，回傳 0..255 的 float 陣列"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Image file not found: {path}")

    try:
        with Image.open(path) as img:
            if img.format in LOSSY_FORMATS:
                raise MapFormatError(f"Lossy format {img.format} is not supported: {path}", field="path")
            if img.mode not in SUPPORTED_MODES:
                raise MapFormatError(
                    f"Unsupported image mode {img.mode} (expected 8-bit L, RGB or palette): {path}",
                    field="path",
                )
            if img.width < 1 or img.height < 1:
                raise MapFormatError(f"Zero-dimension image: {path}", field="path")

            # 調色盤圖先依調色盤展開為 RGB
            if img.mode == "P":
                img = img.convert("RGB")
            elif img.mode == "1":
                img = img.convert("L")
            data = np.asarray(img, dtype=np.float64)
    except UnidentifiedImageError as e:
        raise MapFormatError(f"Unreadable image file {path}: {str(e)}", field="path")

    # RGB 以三通道平均轉灰階
    if data.ndim == 3:
        data = data.mean(axis=2)
    return data


def load_gray(path: PathLike) -> GrayMap:
    """
    讀取灰階圖，數值除以 255 縮放到 [0, 1]。

    Args:
        path: 圖檔路徑

    Returns:
        灰階圖

    Raises:
        FileNotFoundError: 如果檔案不存在
        MapFormatError: 如果格式或位元深度不支援
    """
    return GrayMap(values=_read_bytes(path) / 255.0)


def load_binary(path: PathLike, cutoff: int = settings.BINARY_BYTE_CUTOFF) -> BinaryMap:
    """讀取宣告為二值的圖檔，位元組 >= cutoff 視為 1"""
    return BinaryMap(values=_read_bytes(path) >= cutoff)


def save_gray(g: GrayMap, path: PathLike) -> Path:
    """將灰階圖以 8-bit PNG 儲存"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.rint(g.values * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")
    return path


def save_binary(b: BinaryMap, path: PathLike) -> Path:
    """將二值圖以 0/255 的 8-bit PNG 儲存"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = (b.values * 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")
    return path
