"""설정 - 환경변수 / 설정 파일 / 스윕 설정"""

import json
import logging
import math
import os
from dataclasses import dataclass, field, fields

from .errors import DomainError

logger = logging.getLogger(__name__)

CONFIG_PATH = os.path.expanduser("~/.eprw-config.json")
CUTOFF_ENV = "EPRW_DEFAULT_CUTOFF"

SWEEP_OUTPUTS = ("region", "witness", "visibility", "ppt_nu_minus")
OUTPUT_FORMATS = ("csv", "json")


@dataclass
class OracleSettings:
    """Fock 오라클 설정"""
    default_cutoff: int = 40  # 모드당 기저 상태 수
    truncation_eps: float = 1e-6  # 허용 trace 결손
    convergence_ceiling: int = 256  # convergence_check 상한
    max_dense_cutoff: int = 64  # verify에서 dense 행렬을 만들 최대 cutoff


def _parse_cutoff(raw: str) -> int:
    try:
        value = int(raw)
    except (TypeError, ValueError):
        raise DomainError(f"{CUTOFF_ENV}는 정수여야 함: {raw!r}")
    if value < 1:
        raise DomainError(f"{CUTOFF_ENV}는 1 이상이어야 함: {value}")
    return value


def load_settings(config_path: str | None = None) -> OracleSettings:
    """
    설정 로드 - 환경변수 > 설정 파일 > 기본값

    Args:
        config_path: JSON 설정 파일 (None이면 ~/.eprw-config.json)
    """
    settings = OracleSettings()
    path = config_path or CONFIG_PATH

    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
            known = {fld.name for fld in fields(OracleSettings)}
            for key, value in loaded.items():
                if key not in known:
                    continue
                # 기본값 타입에 맞춰 변환
                current = getattr(settings, key)
                setattr(settings, key, type(current)(value))
        except (OSError, ValueError, TypeError, AttributeError) as e:
            logger.warning("설정 파일 무시 (%s): %s", path, e)

    raw = os.environ.get(CUTOFF_ENV)
    if raw:
        settings.default_cutoff = _parse_cutoff(raw)

    return settings


def _range_triplet(name: str, raw) -> tuple[float, float, int]:
    try:
        lo, hi, steps = raw
        lo, hi, steps = float(lo), float(hi), int(steps)
    except (TypeError, ValueError):
        raise DomainError(f"{name}는 (min, max, steps) 형식이어야 함: {raw!r}")
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError(f"{name} 범위가 유한하지 않음: {raw!r}")
    if steps < 1:
        raise DomainError(f"{name} steps는 1 이상: {steps}")
    if lo > hi:
        raise DomainError(f"{name} min > max: {lo} > {hi}")
    return lo, hi, steps


@dataclass
class SweepConfig:
    """(n̄, m) 위상도 스윕 설정"""
    nbar_range: tuple[float, float, int] = (0.0, 3.0, 100)
    m_range: tuple[float, float, int] = (0.0, 3.0, 100)
    outputs: tuple[str, ...] = field(default_factory=lambda: SWEEP_OUTPUTS)
    format: str = "csv"

    def __post_init__(self):
        self.nbar_range = _range_triplet("nbar_range", self.nbar_range)
        self.m_range = _range_triplet("m_range", self.m_range)

        # 출력 컬럼은 정해진 순서로 정렬 (바이트 동일성)
        requested = set(self.outputs)
        unknown = requested - set(SWEEP_OUTPUTS)
        if unknown:
            raise DomainError(f"알 수 없는 출력 컬럼: {sorted(unknown)}")
        if not requested:
            raise DomainError("출력 컬럼이 비어 있음")
        self.outputs = tuple(o for o in SWEEP_OUTPUTS if o in requested)

        if self.format not in OUTPUT_FORMATS:
            raise DomainError(f"format은 {OUTPUT_FORMATS} 중 하나: {self.format!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def from_json(cls, path: str) -> "SweepConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, ValueError) as e:
            raise DomainError(f"스윕 설정 파일 읽기 실패 ({path}): {e}")
        if not isinstance(data, dict):
            raise DomainError(f"스윕 설정은 JSON 객체여야 함: {path}")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "nbar_range": list(self.nbar_range),
            "m_range": list(self.m_range),
            "outputs": list(self.outputs),
            "format": self.format,
        }
