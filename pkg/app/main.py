"""
Command-line front end: batch scoring, meta-measures, synthetic corpora,
self-test and meta summary tables.
"""

import functools
import sys
from pathlib import Path
from typing import List, Optional

import click
import structlog
from pydantic import ValidationError as PydanticValidationError

from app import __version__
from app.config import load_settings, validate_settings
from app.schemas.maps import Dimensions
from app.schemas.meta import MetaMeasure
from app.schemas.run import OutputFormat, RunConfig
from app.services.meta_service import MetaService
from app.services.report_service import ReportService
from app.services.score_service import ScoreService
from app.services.selftest_service import SelftestService
from app.services.synth_service import SynthService
from app.utils.logging_utils import configure_logging
from app.utils.validators import ValidationError, parse_measure_list, parse_size

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_PAIR_FAILURES = 1
EXIT_INPUT_ERROR = 2


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_INPUT_ERROR)


def handle_input_errors(command):
    """缺檔、清單錯誤與參數錯誤一律以結束碼 2 結束"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except FileNotFoundError as e:
            _fail(str(e))
        except ValidationError as e:
            _fail(e.message)
        except PydanticValidationError as e:
            first = e.errors()[0]
            _fail(f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}")
        except OSError as e:
            _fail(f"cannot write output: {str(e)}")

    return wrapper


def _setup(ctx: click.Context, env_file: Optional[str]):
    current = load_settings(env_file)
    try:
        validate_settings(current)
    except ValueError as e:
        _fail(str(e))
    configure_logging(current)
    ctx.obj = current
    return current


def run_options(command):
    """score 與 meta 共用的參數"""
    options = [
        click.option("--manifest", required=True, type=click.Path(dir_okay=False, path_type=Path),
                     help="資料集清單 (JSON)"),
        click.option("--measures", default="emeasure", show_default=True,
                     help="以逗號分隔的量測 ID：emeasure, f1, fbeta:<b>, iou, fbw"),
        click.option("--threshold", default="asis", show_default=True,
                     help="模型輸出二值化：asis | fixed:<t> | adaptive"),
        click.option("--seed", type=int, default=None, help="主種子"),
        click.option("--jobs", type=click.IntRange(min=1), default=None, help="平行數"),
        click.option("--format", "output_format", type=click.Choice([f.value for f in OutputFormat]),
                     default=OutputFormat.CSV.value, show_default=True),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="輸出檔案，預設輸出到 stdout"),
        click.option("--env-file", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="額外的設定檔 (.env)"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _run_config(current, manifest, measures, threshold, seed, jobs, output_format, out) -> RunConfig:
    return RunConfig(
        manifest=manifest,
        measures=parse_measure_list(measures),
        threshold=threshold,
        seed=current.DEFAULT_SEED if seed is None else seed,
        jobs=current.DEFAULT_JOBS if jobs is None else jobs,
        output_format=OutputFormat(output_format),
        out=out,
    )


def _report_failures(failures) -> int:
    for failure in failures:
        click.echo(f"skipped {failure.image_id}/{failure.model}: {failure.reason}", err=True)
    return EXIT_PAIR_FAILURES if failures else EXIT_OK


@click.group()
@click.version_option(__version__, prog_name="fmeval")
def cli():
    """前景圖評估工具：E-measure、傳統量測與 meta-measure。"""


@cli.command()
@run_options
@click.pass_context
@handle_input_errors
def score(ctx, manifest, measures, threshold, seed, jobs, output_format, out, env_file):
    """計算每組 (影像, 模型, 量測) 的分數。"""
    current = _setup(ctx, env_file)
    cfg = _run_config(current, manifest, measures, threshold, seed, jobs, output_format, out)

    service = ScoreService(current)
    records = service.run_score_batch(cfg)
    if records:
        content = ReportService(current).emit_report(records, cfg.output_format, cfg.out, cfg)
        if cfg.out is None:
            click.echo(content, nl=False)
    else:
        click.echo("warning: no records produced", err=True)

    sys.exit(_report_failures(service.failures))


@cli.command()
@click.option("--id", "meta_id", required=True, type=click.Choice([m.value for m in MetaMeasure]),
              help="meta-measure ID")
@run_options
@click.pass_context
@handle_input_errors
def meta(ctx, meta_id, manifest, measures, threshold, seed, jobs, output_format, out, env_file):
    """計算 meta-measure（mm1 到 mm5）。"""
    current = _setup(ctx, env_file)
    cfg = _run_config(current, manifest, measures, threshold, seed, jobs, output_format, out)

    service = MetaService(current, jobs=cfg.jobs)
    results = service.run_meta(cfg, MetaMeasure(meta_id), cfg.measures)
    content = ReportService(current).emit_meta_report(results, cfg.output_format, cfg.out, cfg)
    if cfg.out is None:
        click.echo(content, nl=False)

    sys.exit(_report_failures(service.failures))


@cli.command()
@click.option("--images", type=click.IntRange(min=1), default=None, help="影像數量")
@click.option("--size", default=None, help="尺寸 WxH")
@click.option("--models", type=click.IntRange(min=1), default=None, help="每張影像的模型輸出數")
@click.option("--seed", type=int, default=None, help="主種子")
@click.option("--triples", is_flag=True, default=False, help="另外產生人工排名三元組")
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path), help="輸出目錄")
@click.option("--env-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
@handle_input_errors
def synth(ctx, images, size, models, seed, triples, out, env_file):
    """產生合成資料集（PNG 圖檔與 manifest.json）。"""
    current = _setup(ctx, env_file)
    defaults = current.get_synth_config()
    if size:
        width, height = parse_size(size)
    else:
        width, height = defaults["width"], defaults["height"]

    manifest_path = SynthService(current).write_corpus(
        out,
        images=images or defaults["images"],
        dims=Dimensions(width=width, height=height),
        seed=current.DEFAULT_SEED if seed is None else seed,
        models=models or defaults["models"],
        triples=triples,
    )
    click.echo(str(manifest_path))


@cli.command()
@click.option("--pairs", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--max-size", type=click.IntRange(min=2, max=64), default=64, show_default=True)
@click.option("--fbw-max-size", type=click.IntRange(min=2, max=64), default=24, show_default=True,
              help="Fbw 檢查的最大邊長（參考實作為逐像素迴圈）")
@click.option("--seed", type=int, default=None)
@click.option("--env-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
@handle_input_errors
def selftest(ctx, pairs, max_size, fbw_max_size, seed, env_file):
    """以逐像素參考實作檢查量測結果。"""
    current = _setup(ctx, env_file)
    results = SelftestService(current).run(
        pairs=pairs, max_size=max_size, fbw_max_size=fbw_max_size,
        seed=current.DEFAULT_SEED if seed is None else seed,
    )
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        line = f"{status} {result.name} checked={result.checked} max_error={result.max_error:.3e}"
        click.echo(f"{line} {result.detail}".rstrip())

    sys.exit(EXIT_OK if all(r.passed for r in results) else EXIT_PAIR_FAILURES)


@cli.command()
@click.argument("reports", nargs=-1, required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--format", "output_format", type=click.Choice(["text", "csv"]), default="text", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--env-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
@handle_input_errors
def table(ctx, reports: List[Path], output_format, out, env_file):
    """彙整 meta 報表為 量測 × meta-measure 對照表。"""
    current = _setup(ctx, env_file)
    service = ReportService(current)

    results = [result for path in reports for result in service.load_meta_results(path)]
    content = service.render_meta_table(service.build_meta_table(results), output_format)
    if out is None:
        click.echo(content, nl=False)
    else:
        service.write(content, out)


def main():
    cli()


if __name__ == "__main__":
    main()
