"""결과 출력 - CSV / JSON 표와 실행 매니페스트"""

import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterable, Sequence

from . import __version__
from .errors import DomainError


@dataclass
class RunManifest:
    """실행 재현 정보 (명령, 전체 파라미터, 시드, 버전, 시각)"""
    command: str
    parameters: dict[str, Any]
    seeds: list[int] = field(default_factory=list)
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_dict(self) -> dict:
        return asdict(self)


def _cell(value: Any) -> Any:
    """CSV 셀 - float은 repr로 (왕복 가능, 실행 간 동일)"""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ""
    return value


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(rows: Iterable[dict], columns: Sequence[str], manifest: RunManifest) -> str:
    data = [{c: _json_value(row.get(c)) for c in columns} for row in rows]
    return json.dumps({"manifest": manifest.to_dict(), "data": data}, indent=2, ensure_ascii=False) + "\n"


def write_table(
    rows: Iterable[dict],
    columns: Sequence[str],
    fmt: str,
    out: str | None,
    manifest: RunManifest,
) -> str | None:
    """
    표 출력

    Args:
        rows: 행 목록 (dict)
        columns: 컬럼 순서
        fmt: "csv" 또는 "json"
        out: 출력 파일 경로 (None이면 stdout)
        manifest: CSV는 <out>.manifest.json 으로 따로, JSON은 문서 안에 포함

    Returns:
        CSV 매니페스트 파일 경로 (없으면 None)
    """
    rows = list(rows)
    if fmt == "csv":
        text = render_csv(rows, columns)
    elif fmt == "json":
        text = render_json(rows, columns, manifest)
    else:
        raise DomainError(f"알 수 없는 출력 형식: {fmt!r}")

    if out is None:
        sys.stdout.write(text)
        return None

    try:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        if fmt == "csv":
            sidecar = f"{out}.manifest.json"
            with open(sidecar, "w", encoding="utf-8") as f:
                json.dump(manifest.to_dict(), f, indent=2, ensure_ascii=False)
            return sidecar
    except OSError as e:
        raise DomainError(f"출력 파일 쓰기 실패 ({out}): {e}")
    return None


def write_document(payload: dict, out: str | None, manifest: RunManifest) -> None:
    """단일 JSON 문서 {"manifest": ..., "data": payload}"""
    text = json.dumps({"manifest": manifest.to_dict(), "data": payload}, indent=2, ensure_ascii=False) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise DomainError(f"출력 파일 쓰기 실패 ({out}): {e}")
