"""평형 호모다인 검출 - Stokes 분산, 샷 노이즈 기준, 몬테카를로 샘플러"""

import csv
import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, TextIO

import numpy as np

from .errors import DegenerateInputError, DomainError
from .gaussian_core import TwoModeMoments
from .witness import stokes_statistics

logger = logging.getLogger(__name__)

GUARD_SIGMAS = 3.0
CROSSING_MARGIN = 1e-12
RECORD_COLUMNS = ("index", "x_c", "x_d")


@dataclass(frozen=True)
class LocalOscillator:
    """국부 발진기 α = |α|e^{iφ} (두 출력 모드에 같은 α로 결합)"""
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        amplitude = float(self.amplitude)
        phase = float(self.phase)
        if not (math.isfinite(amplitude) and amplitude >= 0):
            raise DomainError(f"LO 진폭은 0 이상: {self.amplitude}")
        if not math.isfinite(phase):
            raise DomainError(f"LO 위상이 유한하지 않음: {self.phase}")
        object.__setattr__(self, "amplitude", amplitude)
        object.__setattr__(self, "phase", phase % (2 * math.pi))

    @classmethod
    def from_alpha2(cls, alpha2: float, phi: float = 0.0) -> "LocalOscillator":
        if not (math.isfinite(alpha2) and alpha2 >= 0):
            raise DomainError(f"|α|²는 0 이상: {alpha2}")
        return cls(math.sqrt(alpha2), phi)

    @property
    def alpha(self) -> complex:
        return complex(self.amplitude * math.cos(self.phase), self.amplitude * math.sin(self.phase))

    @property
    def intensity(self) -> float:
        return self.amplitude ** 2


class ShotNoiseVerdict(str, Enum):
    BELOW = "BelowShotNoise"
    AT_OR_ABOVE = "AtOrAboveShotNoise"


@dataclass(frozen=True)
class VarianceReport:
    estimate: float
    std_error: float
    n_samples: int
    shot_noise: float
    verdict: ShotNoiseVerdict

    def to_dict(self) -> dict:
        data = asdict(self)
        data["verdict"] = self.verdict.value
        return data


# ==================== 해석적 분산 ====================

def rotated_quadrature_correlation(tm: TwoModeMoments, phi: float) -> float:
    """
    <X_c(φ)X_d(φ)>, X(φ) = (a e^{-iφ} + a† e^{iφ})/√2

    = Re(<cd> e^{-2iφ}) + Re<c†d>. EPR 계열에서 -m·cos 2φ.
    """
    rotation = complex(math.cos(2 * phi), -math.sin(2 * phi))
    return (complex(tm.corr_cd) * rotation).real + complex(tm.coh_cd).real


def rotated_quadrature_variance(tm: TwoModeMoments, phi: float, mode: str = "c") -> float:
    """<X(φ)²> = n̄ + 1/2 + Re(<a²> e^{-2iφ})"""
    if mode not in ("c", "d"):
        raise DomainError(f"모드는 c 또는 d: {mode!r}")
    nbar, sq = (tm.nbar_c, tm.sq_c) if mode == "c" else (tm.nbar_d, tm.sq_d)
    rotation = complex(math.cos(2 * phi), -math.sin(2 * phi))
    return nbar + 0.5 + (complex(sq) * rotation).real


def _displaced(tm: TwoModeMoments, lo: LocalOscillator, component: str):
    tm.validate()
    return stokes_statistics(tm, component, lo.alpha, lo.alpha)


def stokes_z_variance_exact(tm: TwoModeMoments, lo: LocalOscillator) -> float:
    """(ΔS_z)² = (n̄(n̄+1) - m²)/2 + (|α|²/2)(1 + 2(n̄ + m·cos 2φ))"""
    return _displaced(tm, lo, "z").variance


def stokes_z_variance_strong_lo(tm: TwoModeMoments, lo: LocalOscillator) -> float:
    """α에 대해 2차인 항만: (|α|²/2)(1 + 2(n̄ + m·cos 2φ))"""
    return _displaced(tm, lo, "z").lo_variance


def stokes_x_variance_exact(tm: TwoModeMoments, lo: LocalOscillator) -> float:
    """(ΔS_x)² = (n̄(n̄+1) + m²)/2 + (|α|²/2)<(X_c + X_d)²>"""
    return _displaced(tm, lo, "x").variance


def stokes_x_variance_strong_lo(tm: TwoModeMoments, lo: LocalOscillator) -> float:
    return _displaced(tm, lo, "x").lo_variance


def stokes_y_variance_exact(tm: TwoModeMoments, lo: LocalOscillator) -> float:
    """(ΔS_y)² = (n̄(n̄+1) + m²)/2 + (|α|²/2)<(X_c(φ+π/2) - X_d(φ+π/2))²>"""
    return _displaced(tm, lo, "y").variance


def stokes_y_variance_strong_lo(tm: TwoModeMoments, lo: LocalOscillator) -> float:
    return _displaced(tm, lo, "y").lo_variance


def stokes_mean(tm: TwoModeMoments, lo: LocalOscillator, component: str) -> float:
    """변위된 상태의 <S_i> (EPR 계열: <S_x> = |α|², <S_y> = <S_z> = 0)"""
    return _displaced(tm, lo, component).mean


def shot_noise_level(lo: LocalOscillator) -> float:
    """진공 입력의 분산 |α|²/2"""
    return lo.intensity / 2


_STRONG_FORMS = {
    "x": stokes_x_variance_strong_lo,
    "y": stokes_y_variance_strong_lo,
    "z": stokes_z_variance_strong_lo,
}


def shot_noise_verdicts(tm: TwoModeMoments, lo: LocalOscillator) -> dict[str, ShotNoiseVerdict]:
    """강한 LO 근사에서 S_x, S_y, S_z 각각이 샷 노이즈 아래인지"""
    shot = shot_noise_level(lo)
    verdicts = {}
    for name, strong in _STRONG_FORMS.items():
        below = strong(tm, lo) < shot - CROSSING_MARGIN
        verdicts[name] = ShotNoiseVerdict.BELOW if below else ShotNoiseVerdict.AT_OR_ABOVE
    return verdicts


# ==================== 몬테카를로 ====================

def quadrature_covariance(tm: TwoModeMoments, phi: float) -> np.ndarray:
    """(X_c(φ), X_d(φ)) 2×2 공분산"""
    cov = rotated_quadrature_correlation(tm, phi)
    return np.array([
        [rotated_quadrature_variance(tm, phi, "c"), cov],
        [cov, rotated_quadrature_variance(tm, phi, "d")],
    ])


def sample_quadrature_records(tm: TwoModeMoments, phi: float, n_samples: int, seed: int) -> np.ndarray:
    """
    (x_c, x_d) 쌍 샘플링 - 강한 LO 선형화 (광전류 차 ∝ 직교 성분)

    Args:
        tm: 두 모드 모멘트
        phi: LO 위상
        n_samples: 샘플 수 (>= 1)
        seed: 난수 시드 (같은 시드 -> 같은 레코드)

    Returns:
        shape (n_samples, 2) 배열
    """
    tm.validate()
    if int(n_samples) < 1:
        raise DomainError(f"샘플 수는 1 이상: {n_samples}")
    rng = np.random.default_rng(seed)
    return _draw(rng, quadrature_covariance(tm, phi), int(n_samples))


def _draw(rng: np.random.Generator, cov: np.ndarray, n: int) -> np.ndarray:
    return rng.multivariate_normal(np.zeros(2), cov, size=n, method="cholesky")


def sample_quadrature_records_sharded(
    tm: TwoModeMoments,
    phi: float,
    n_samples: int,
    seed: int,
    shards: int = 4,
) -> np.ndarray:
    """샤드별 시드를 (seed, shard) 로부터 유도해 나눠 샘플링"""
    tm.validate()
    if int(n_samples) < 1:
        raise DomainError(f"샘플 수는 1 이상: {n_samples}")
    if int(shards) < 1:
        raise DomainError(f"샤드 수는 1 이상: {shards}")

    cov = quadrature_covariance(tm, phi)
    sizes = [len(part) for part in np.array_split(np.arange(int(n_samples)), int(shards))]
    parts = []
    for shard, size in enumerate(sizes):
        if size == 0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence([seed, shard]))
        parts.append(_draw(rng, cov, size))
    logger.debug("샤드 %d개, 샘플 %d개", len(parts), n_samples)
    return np.concatenate(parts, axis=0)


def estimate_sz_variance(records: np.ndarray, lo: LocalOscillator) -> VarianceReport:
    """
    S_z ≈ (|α|/√2)(x_c - x_d) 의 표본 분산과 표준 오차

    std_error = sqrt((m̂₄ - s⁴(n-3)/(n-1)) / n), m̂₄ = 4차 중심 모멘트.
    estimate + 3·std_error < |α|²/2 일 때만 BelowShotNoise.
    """
    records = np.asarray(records, dtype=float)
    if records.ndim != 2 or records.shape[1] != 2:
        raise DomainError(f"레코드는 (n, 2) 배열이어야 함: shape {records.shape}")
    n = records.shape[0]
    if n < 2:
        raise DomainError(f"분산 추정에는 레코드 2개 이상 필요: {n}")

    s = (lo.amplitude / math.sqrt(2)) * (records[:, 0] - records[:, 1])
    estimate = float(np.var(s, ddof=1))
    m4 = float(np.mean((s - s.mean()) ** 4))
    std_error = math.sqrt(max((m4 - estimate ** 2 * (n - 3) / (n - 1)) / n, 0.0))
    if not std_error > 0:
        raise DegenerateInputError(
            f"S_z 표본이 상수 (|α| = {lo.amplitude:g}): 분산 추정과 판정이 불가능"
        )

    shot = shot_noise_level(lo)
    below = estimate + GUARD_SIGMAS * std_error < shot
    return VarianceReport(
        estimate=estimate,
        std_error=std_error,
        n_samples=n,
        shot_noise=shot,
        verdict=ShotNoiseVerdict.BELOW if below else ShotNoiseVerdict.AT_OR_ABOVE,
    )


def write_records_csv(records: Iterable, fp: TextIO) -> None:
    """index,x_c,x_d (헤더 포함)"""
    writer = csv.writer(fp, lineterminator="\r\n")
    writer.writerow(RECORD_COLUMNS)
    for i, (x_c, x_d) in enumerate(records):
        writer.writerow((i, repr(float(x_c)), repr(float(x_d))))


def read_records_csv(fp: TextIO) -> np.ndarray:
    reader = csv.reader(fp)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != RECORD_COLUMNS:
        raise DomainError(f"레코드 CSV 헤더가 {','.join(RECORD_COLUMNS)} 가 아님: {header}")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            rows.append((float(row[1]), float(row[2])))
        except (IndexError, ValueError):
            raise DomainError(f"{line_no}행 형식 오류: {row}")
    return np.array(rows, dtype=float).reshape(-1, 2)
