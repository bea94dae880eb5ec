"""
Report service layer: score and meta-measure reports as CSV or JSON, and the
measure × meta-measure summary table.
"""

import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd
import structlog

from app import __version__
from app.config import Settings, settings as default_settings
from app.schemas.meta import MetaMeasure, MetaResult
from app.schemas.run import OutputFormat, RunConfig, ScoreRecord
from app.utils.validators import ValidationError

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

SCORE_COLUMNS = ["image_id", "measure", "score", "degenerate", "params"]
META_COLUMNS = ["meta", "measure", "value", "population", "seed"]
META_ORDER = [meta.value for meta in MetaMeasure]


class ReportService:
    """報表業務邏輯服務"""

    def __init__(self, current: Optional[Settings] = None):
        self.settings = current or default_settings

    @property
    def float_format(self) -> str:
        return f"%.{self.settings.SCORE_SIGNIFICANT_DIGITS}g"

    def _round(self, value: float) -> float:
        """以設定的有效位數序列化後再讀回"""
        return float(self.float_format % value)

    def _metadata(self, cfg: Optional[RunConfig]) -> Dict[str, Any]:
        return {
            "tool": "fmeval",
            "version": __version__,
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "seed": cfg.seed if cfg else self.settings.DEFAULT_SEED,
            "config": cfg.echo() if cfg else {},
        }

    def _to_csv(self, frame: pd.DataFrame) -> str:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format=self.float_format, lineterminator="\n")
        return buffer.getvalue()

    @staticmethod
    def write(content: str, path: Optional[PathLike]) -> Optional[Path]:
        if path is None:
            return None
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
        return path

    def render_scores(
        self,
        records: List[ScoreRecord],
        output_format: OutputFormat = OutputFormat.CSV,
        cfg: Optional[RunConfig] = None,
    ) -> str:
        """
        將分數紀錄轉為報表文字。

        Args:
            records: 分數紀錄（至少一筆）
            output_format: csv 或 json
            cfg: 回顯於 JSON 中的執行設定

        Returns:
            CSV（表頭 image_id,measure,score,degenerate,params，LF 換行）或 JSON 文字

        Raises:
            ValidationError: 如果沒有紀錄
        """
        if not records:
            raise ValidationError("Cannot emit an empty report", field="records")

        if OutputFormat(output_format) == OutputFormat.CSV:
            frame = pd.DataFrame(
                [
                    {
                        "image_id": r.image_id,
                        "measure": r.measure,
                        "score": r.score,
                        "degenerate": "true" if r.degenerate else "false",
                        "params": r.params_text(),
                    }
                    for r in records
                ],
                columns=SCORE_COLUMNS,
            )
            return self._to_csv(frame)

        document = {
            "metadata": self._metadata(cfg),
            "records": [
                {
                    "image_id": r.image_id,
                    "measure": r.measure,
                    "score": self._round(r.score),
                    "degenerate": r.degenerate,
                    "params": dict(sorted(r.params.items())),
                }
                for r in records
            ],
        }
        return json.dumps(document, indent=2, ensure_ascii=False) + "\n"

    def emit_report(
        self,
        records: List[ScoreRecord],
        output_format: OutputFormat = OutputFormat.CSV,
        path: Optional[PathLike] = None,
        cfg: Optional[RunConfig] = None,
    ) -> str:
        """
        輸出分數報表。

        Args:
            records: 分數紀錄
            output_format: csv 或 json
            path: 輸出檔案，None 時只回傳文字
            cfg: 執行設定

        Returns:
            報表文字

        Raises:
            ValidationError: 如果沒有紀錄
            OSError: 如果無法寫入
        """
        content = self.render_scores(records, output_format, cfg)
        written = self.write(content, path)
        if written:
            logger.info("Score report written", path=str(written), records=len(records),
                        format=OutputFormat(output_format).value)
        return content

    def emit_meta_report(
        self,
        results: List[MetaResult],
        output_format: OutputFormat = OutputFormat.CSV,
        path: Optional[PathLike] = None,
        cfg: Optional[RunConfig] = None,
    ) -> str:
        """輸出 meta-measure 報表（CSV 欄位 meta,measure,value,population,seed）"""
        if not results:
            raise ValidationError("Cannot emit an empty meta report", field="results")

        rows = [
            {
                "meta": r.meta_id.value,
                "measure": r.measure_id,
                "value": r.value,
                "population": r.population,
                "seed": r.seed,
            }
            for r in results
        ]

        if OutputFormat(output_format) == OutputFormat.CSV:
            content = self._to_csv(pd.DataFrame(rows, columns=META_COLUMNS))
        else:
            for row in rows:
                row["value"] = self._round(row["value"])
            content = json.dumps({"metadata": self._metadata(cfg), "results": rows}, indent=2) + "\n"

        written = self.write(content, path)
        if written:
            logger.info("Meta report written", path=str(written), results=len(results))
        return content

    @staticmethod
    def load_scores(path: PathLike) -> List[ScoreRecord]:
        """讀回 CSV 或 JSON 分數報表"""
        path = Path(path)
        if path.suffix.lower() == ".json":
            document = json.loads(path.read_text(encoding="utf-8"))
            return [ScoreRecord(**record) for record in document["records"]]

        frame = pd.read_csv(path, dtype={"image_id": str, "measure": str, "params": str}, keep_default_na=False)
        records = []
        for row in frame.itertuples(index=False):
            params = dict(item.split("=", 1) for item in row.params.split(";") if item)
            records.append(
                ScoreRecord(
                    image_id=row.image_id,
                    measure=row.measure,
                    score=float(row.score),
                    degenerate=str(row.degenerate).lower() == "true",
                    params=params,
                )
            )
        return records

    @staticmethod
    def load_meta_results(path: PathLike) -> List[MetaResult]:
        """讀回 CSV 或 JSON meta-measure 報表"""
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Meta report not found: {path}")

        if path.suffix.lower() == ".json":
            rows = json.loads(path.read_text(encoding="utf-8"))["results"]
        else:
            rows = pd.read_csv(path, dtype={"meta": str, "measure": str}).to_dict(orient="records")

        return [
            MetaResult(
                meta_id=row["meta"],
                measure_id=row["measure"],
                value=float(row["value"]),
                population=int(row["population"]),
                seed=int(row["seed"]),
            )
            for row in rows
        ]

    def build_meta_table(self, results: List[MetaResult]) -> pd.DataFrame:
        """
        量測 × meta-measure 的對照表。

        比率以百分比顯示，θ 取三位小數；同一格有多筆結果時取最後一筆。
        """
        if not results:
            raise ValidationError("No meta results to tabulate", field="results")

        frame = pd.DataFrame(
            [
                {
                    "measure": r.measure_id,
                    "meta": r.meta_id.value,
                    "cell": f"{r.value:.3f}" if r.meta_id.is_theta else f"{r.value * 100:.2f}%",
                }
                for r in results
            ]
        )
        frame = frame.drop_duplicates(subset=["measure", "meta"], keep="last")
        table = frame.pivot(index="measure", columns="meta", values="cell")
        columns = [meta for meta in META_ORDER if meta in table.columns]
        return table.reindex(columns=columns).fillna("-").sort_index()

    def render_meta_table(self, table: pd.DataFrame, output_format: str = "text") -> str:
        """以純文字或 CSV 呈現對照表"""
        if output_format == "csv":
            return self._to_csv(table.reset_index())
        return table.to_string() + "\n"
