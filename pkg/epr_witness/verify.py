"""닫힌 식 vs Fock 오라클 검증"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .config import OracleSettings
from .errors import DomainError, EprWitnessError
from .fock_oracle import (
    convergence_check,
    epr_state,
    mode_operators,
    stokes_moments_oracle,
    variance,
    witness_expectation,
)
from .gaussian_core import TwoModeMoments
from .homodyne import (
    LocalOscillator,
    stokes_x_variance_exact,
    stokes_y_variance_exact,
    stokes_z_variance_exact,
)
from .witness import StokesMoments, hbt_witness_value, stokes_moments
from .witness import visibility as epr_visibility

logger = logging.getLogger(__name__)

STOKES_FIELDS = ("s0_mean", "sx2_no", "sy2_no", "sz2_no", "sx2", "sy2", "sz2")


def _witness(nbar: float, m: float) -> float:
    return hbt_witness_value(nbar, m).value


def _stokes(nbar: float, m: float) -> StokesMoments:
    return stokes_moments(TwoModeMoments.epr(nbar, m))


def _variances(nbar: float, m: float) -> dict[str, float]:
    tm = TwoModeMoments.epr(nbar, m)
    lo = LocalOscillator(0.0)
    return {
        "var_sx": stokes_x_variance_exact(tm, lo),
        "var_sy": stokes_y_variance_exact(tm, lo),
        "var_sz": stokes_z_variance_exact(tm, lo),
    }


@dataclass(frozen=True)
class ClosedForms:
    """검증 대상 닫힌 식 (테스트에서 일부러 틀린 식을 주입할 수 있음)"""
    witness: Callable[[float, float], float] = _witness
    visibility: Callable[[float, float], float] = epr_visibility
    stokes: Callable[[float, float], StokesMoments] = _stokes
    variances: Callable[[float, float], dict] = _variances


@dataclass
class PointResult:
    nbar: float
    m: float
    cutoff: int | None = None
    deviations: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def max_deviation(self) -> float:
        return max(self.deviations.values(), default=0.0)

    def failed_quantities(self, tolerance: float) -> list[str]:
        return sorted(k for k, v in self.deviations.items() if not v <= tolerance)

    def passed(self, tolerance: float) -> bool:
        return self.error is None and not self.failed_quantities(tolerance)

    def to_dict(self, tolerance: float) -> dict:
        return {
            "nbar": self.nbar,
            "m": self.m,
            "cutoff": self.cutoff,
            "max_deviation": self.max_deviation,
            "passed": self.passed(tolerance),
            "failed": self.failed_quantities(tolerance),
            "error": self.error,
        }


@dataclass
class VerificationReport:
    results: list[PointResult]
    tolerance: float

    @property
    def max_deviation(self) -> float:
        return max((r.max_deviation for r in self.results), default=0.0)

    @property
    def failures(self) -> list[PointResult]:
        return [r for r in self.results if not r.passed(self.tolerance)]

    @property
    def errors(self) -> list[PointResult]:
        return [r for r in self.results if r.error is not None]

    @property
    def passed(self) -> bool:
        return not self.failures


def default_grid(nbar_max: float = 2.0, steps: int = 5) -> list[tuple[float, float]]:
    """
    물리적 (n̄, m) 격자 - m = f·sqrt(n̄(n̄+1)), f ∈ [0, 1]

    f = 1 (순수 경계) 포함, 진공은 제외.
    """
    if steps < 1 or not (math.isfinite(nbar_max) and nbar_max > 0):
        raise DomainError(f"격자 설정 오류: nbar_max={nbar_max}, steps={steps}")
    points = []
    for nbar in np.linspace(nbar_max / steps, nbar_max, steps):
        bound = math.sqrt(nbar * (nbar + 1))
        for f in np.linspace(0.0, 1.0, steps):
            points.append((float(nbar), float(f * bound)))
    return points


def _deviation(closed: float, oracle: float) -> float:
    """절대 편차 |a - b|"""
    return abs(closed - oracle)


def verify_point(
    nbar: float,
    m: float,
    tolerance: float = 1e-6,
    cutoff: int | None = None,
    forms: ClosedForms | None = None,
    settings: OracleSettings | None = None,
) -> PointResult:
    """한 점에서 증인, 가시도, Stokes 모멘트, α=0 분산을 오라클과 비교"""
    forms = forms or ClosedForms()
    settings = settings or OracleSettings()
    result = PointResult(nbar, m)

    try:
        if cutoff is None:
            converged = convergence_check(nbar, m, tolerance, settings.convergence_ceiling)
            cutoff = min(converged, settings.max_dense_cutoff)
            if cutoff < converged:
                logger.warning("(%g, %g): cutoff %d -> %d 로 제한", nbar, m, converged, cutoff)
        result.cutoff = cutoff
        rho = epr_state(nbar, m, cutoff, eps=settings.truncation_eps, number_diagonal=True)

        oracle_w = witness_expectation(rho)
        result.deviations["witness"] = _deviation(forms.witness(nbar, m), oracle_w)
        result.deviations["visibility"] = _deviation(forms.visibility(nbar, m), 0.5 - oracle_w)

        closed_stokes = forms.stokes(nbar, m)
        oracle_stokes = stokes_moments_oracle(rho)
        for name in STOKES_FIELDS:
            result.deviations[name] = _deviation(getattr(closed_stokes, name), getattr(oracle_stokes, name))

        ops = mode_operators(cutoff)
        for name, closed in forms.variances(nbar, m).items():
            oracle = variance(rho, ops.stokes(name[-1]))
            result.deviations[name] = _deviation(closed, oracle)
    except EprWitnessError as e:
        result.error = f"{type(e).__name__}: {e}"
        logger.warning("(%g, %g) 검증 실패: %s", nbar, m, result.error)
    return result


def run_verification(
    points: Sequence[tuple[float, float]],
    tolerance: float = 1e-6,
    cutoff: int | None = None,
    workers: int = 1,
    forms: ClosedForms | None = None,
    settings: OracleSettings | None = None,
) -> VerificationReport:
    """
    격자 전체 검증 (workers > 1 이면 프로세스 풀, 결과 순서는 입력 순서)

    Args:
        points: (n̄, m) 목록
        tolerance: 허용 편차
        cutoff: 고정 cutoff (None이면 점마다 convergence_check)
        workers: 프로세스 수
        forms: 닫힌 식 (주입용)
    """
    task = partial(verify_point, tolerance=tolerance, cutoff=cutoff, forms=forms, settings=settings)
    nbars = [p[0] for p in points]
    ms = [p[1] for p in points]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(task, nbars, ms))
    else:
        results = [task(nbar, m) for nbar, m in points]

    report = VerificationReport(results, tolerance)
    logger.info("검증 %d점, 최대 편차 %.3e, 실패 %d", len(results), report.max_deviation, len(report.failures))
    return report
