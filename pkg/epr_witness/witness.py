"""얽힘 증인 - HBT 증인, HOM 가시도, Stokes 파라미터 표현"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, NamedTuple

import numpy as np

from .errors import DegenerateInputError, DomainError, InconsistentMomentsError, UnphysicalStateError
from .gaussian_core import (
    C, C_DAG, D, D_DAG,
    Ladder,
    ModeMoments,
    TwoModeMoments,
    normal_order,
    pair_moment,
    validate_mode,
    wick_moment,
)

if TYPE_CHECKING:
    from .homodyne import LocalOscillator

DEGENERATE_TOL = 1e-15
STOKES_AGREEMENT_TOL = 1e-10
INEQUALITY_MARGIN = 1e-12


class Verdict(str, Enum):
    SEPARABLE_CONSISTENT = "Separable-consistent"
    ENTANGLED = "Entangled"


@dataclass(frozen=True)
class WitnessVerdict:
    value: float
    verdict: Verdict

    @classmethod
    def from_value(cls, value: float) -> "WitnessVerdict":
        verdict = Verdict.ENTANGLED if value < 0 else Verdict.SEPARABLE_CONSISTENT
        return cls(float(value), verdict)


def _require_epr_point(nbar: float, m: float) -> None:
    verdict = validate_mode(ModeMoments(nbar, m))
    if not verdict.physical:
        raise UnphysicalStateError(f"비물리적 EPR 파라미터: nbar={nbar}, m={m}")
    if nbar == 0 and m == 0:
        raise DegenerateInputError("(n̄, m) = (0, 0): 진공은 간섭 신호가 없음")


def _scaled_squares(nbar: float, m: float) -> tuple[float, float]:
    """(n̄/s)², (|m|/s)², s = max(n̄, |m|) - 아주 작은 입력에서 언더플로 방지"""
    scale = max(nbar, abs(m))
    return (nbar / scale) ** 2, (abs(m) / scale) ** 2


# ==================== HBT / HOM ====================

def hbt_witness_value(nbar: float, m: float) -> WitnessVerdict:
    """<W> = (n̄² - |m|²) / (2(3n̄² + |m|²)), 음수면 얽힘"""
    _require_epr_point(nbar, m)
    n2, m2 = _scaled_squares(nbar, m)
    return WitnessVerdict.from_value((n2 - m2) / (2 * (3 * n2 + m2)))


def visibility(nbar: float, m: float) -> float:
    """2차 가시도 v = (n̄² + |m|²) / (3n̄² + |m|²), [1/3, 1]"""
    _require_epr_point(nbar, m)
    n2, m2 = _scaled_squares(nbar, m)
    return (n2 + m2) / (3 * n2 + m2)


def witness_from_visibility(v: float) -> float:
    """<W> = 1/2 - v"""
    v = float(v)
    if not (math.isfinite(v) and 0.0 <= v <= 1.0):
        raise DomainError(f"가시도는 [0, 1] 범위: {v}")
    return 0.5 - v


def hom_coincidence(tau: float, tau_c: float, v: float) -> float:
    """동시 검출 확률 p(τ) = 1 - v·exp(-(τ/τ_c)²)"""
    if not (math.isfinite(tau_c) and tau_c > 0):
        raise DomainError(f"tau_c는 양수여야 함: {tau_c}")
    if not (math.isfinite(v) and 0.0 <= v <= 1.0):
        raise DomainError(f"가시도는 [0, 1] 범위: {v}")
    return 1.0 - v * math.exp(-((tau / tau_c) ** 2))


def hom_curve(nbar: float, m: float, tau_c: float, taus: Iterable[float]) -> list[tuple[float, float]]:
    """EPR 상태의 HOM 딥 곡선 [(τ, p(τ)), ...]"""
    v = visibility(nbar, m)
    return [(float(t), hom_coincidence(float(t), tau_c, v)) for t in taus]


def _hbt_parts(tm: TwoModeMoments) -> tuple[float, float]:
    numerator = (
        2 * wick_moment(tm, (C_DAG, D_DAG, C, D))
        + wick_moment(tm, (D_DAG, D_DAG, C, C))
        + wick_moment(tm, (C_DAG, C_DAG, D, D))
    )
    # <:(I_c + I_d)²:>
    denominator = (
        wick_moment(tm, (C_DAG, C_DAG, C, C))
        + wick_moment(tm, (D_DAG, D_DAG, D, D))
        + 2 * wick_moment(tm, (C_DAG, D_DAG, C, D))
    )
    return numerator.real, denominator.real


def visibility_from_moments(tm: TwoModeMoments) -> float:
    """임의의 평균 0 가우시안 두 모드 상태에 대한 가시도 (Wick)"""
    tm.validate()
    numerator, denominator = _hbt_parts(tm)
    if denominator <= DEGENERATE_TOL:
        raise DegenerateInputError("<:(I_c + I_d)²:> = 0")
    return numerator / denominator


def hbt_witness_from_moments(tm: TwoModeMoments) -> WitnessVerdict:
    return WitnessVerdict.from_value(0.5 - visibility_from_moments(tm))


# ==================== Stokes 연산자 ====================

# S = Σ K[i, j] x_i† x_j, (x_0, x_1) = (c, d)
STOKES_FORMS = {
    "0": np.array([[0.5, 0.0], [0.0, 0.5]], dtype=complex),
    "x": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    "y": np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex),
    "z": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
}

_MODES = ((C, C_DAG), (D, D_DAG))  # (소멸, 생성)


def _stokes_form(name: str) -> np.ndarray:
    try:
        return STOKES_FORMS[name]
    except KeyError:
        raise DomainError(f"알 수 없는 Stokes 성분: {name!r} (0, x, y, z)")


def _bilinear_terms(form: np.ndarray) -> list[tuple[complex, tuple[Ladder, Ladder]]]:
    terms = []
    for i in range(2):
        for j in range(2):
            if form[i, j] != 0:
                terms.append((complex(form[i, j]), (_MODES[i][1], _MODES[j][0])))
    return terms


def _bilinear_mean(tm: TwoModeMoments, form: np.ndarray) -> complex:
    return sum(k * wick_moment(tm, ops) for k, ops in _bilinear_terms(form))


def _bilinear_square(tm: TwoModeMoments, form: np.ndarray, normally_ordered: bool) -> complex:
    total = 0j
    terms = _bilinear_terms(form)
    for k1, ops1 in terms:
        for k2, ops2 in terms:
            ops = ops1 + ops2
            if normally_ordered:
                ops = normal_order(ops)
            total += k1 * k2 * wick_moment(tm, ops)
    return total


@dataclass(frozen=True)
class StokesMoments:
    """Stokes 파라미터 1차/2차 모멘트 (_no = 정규 순서)"""
    s0_mean: float
    sx_mean: float
    sy_mean: float
    sz_mean: float
    sx2_no: float
    sy2_no: float
    sz2_no: float
    sx2: float
    sy2: float
    sz2: float


def stokes_moments(tm: TwoModeMoments) -> StokesMoments:
    """두 모드 2차 모멘트로부터 Stokes 모멘트 전체 (Wick 정리)"""
    tm.validate()
    means = {name: _bilinear_mean(tm, _stokes_form(name)).real for name in "0xyz"}
    normal = {name: _bilinear_square(tm, _stokes_form(name), True).real for name in "xyz"}
    symmetric = {name: _bilinear_square(tm, _stokes_form(name), False).real for name in "xyz"}
    return StokesMoments(
        s0_mean=means["0"],
        sx_mean=means["x"],
        sy_mean=means["y"],
        sz_mean=means["z"],
        sx2_no=normal["x"],
        sy2_no=normal["y"],
        sz2_no=normal["z"],
        sx2=symmetric["x"],
        sy2=symmetric["y"],
        sz2=symmetric["z"],
    )


def witness_from_stokes(sm: StokesMoments) -> float:
    """
    정규 순서 Stokes 모멘트로 표현한 증인

        <W> = 1/2 - <:S_x²:> / (<:S_x²:> + <:S_y²:> + <:S_z²:>)

    대칭 순서 표현(-1/2<S₀>, -3/2<S₀> 보정)도 함께 계산해 일치 여부를 확인한다.
    """
    normal_total = sm.sx2_no + sm.sy2_no + sm.sz2_no
    if normal_total <= DEGENERATE_TOL:
        raise DegenerateInputError("정규 순서 Stokes 분모가 0")
    w_normal = 0.5 - sm.sx2_no / normal_total

    symmetric_total = sm.sx2 + sm.sy2 + sm.sz2 - 1.5 * sm.s0_mean
    if symmetric_total <= DEGENERATE_TOL:
        raise InconsistentMomentsError(f"대칭 순서 분모가 양수가 아님: {symmetric_total}")
    w_symmetric = 0.5 - (sm.sx2 - 0.5 * sm.s0_mean) / symmetric_total

    if abs(w_normal - w_symmetric) > STOKES_AGREEMENT_TOL * max(1.0, abs(w_normal)):
        raise InconsistentMomentsError(
            f"정규/대칭 순서 증인 불일치: {w_normal} vs {w_symmetric}"
        )
    return w_normal


def stokes_inequality_check(sm: StokesMoments) -> tuple[bool, bool]:
    """
    얽힘 부등식 (정규 순서, 대칭 순서)

        <:S_x²:> > <:S_y²:> + <:S_z²:>
        <S_x²> > <S_y²> + <S_z²> - <S₀>/2
    """
    normal = sm.sx2_no > sm.sy2_no + sm.sz2_no + INEQUALITY_MARGIN
    symmetric = sm.sx2 > sm.sy2 + sm.sz2 - 0.5 * sm.s0_mean + INEQUALITY_MARGIN
    return normal, symmetric


# ==================== 변위된 모드의 Stokes 통계 ====================

class StokesStatistics(NamedTuple):
    mean: float
    variance: float
    lo_variance: float  # |α|² 차수 항 (강한 국부 발진기 근사)


def stokes_statistics(
    tm: TwoModeMoments,
    component: str,
    alpha_c: complex = 0j,
    alpha_d: complex = 0j,
) -> StokesStatistics:
    """
    c̃ = c + α_c, d̃ = d + α_d 로 변위된 모드의 Stokes 평균/분산

    S̃ = S + L + const, L = Σ K_ij (α_j x_i† + α_i* x_j).
    평균 0 가우시안에서 3차 모멘트가 0이므로 Var(S̃) = Var(S) + <L²>.
    """
    form = _stokes_form(component)
    alphas = (complex(alpha_c), complex(alpha_d))

    mean0 = _bilinear_mean(tm, form).real
    var0 = _bilinear_square(tm, form, False).real - mean0 ** 2

    linear: list[tuple[complex, Ladder]] = []
    constant = 0j
    for i in range(2):
        for j in range(2):
            k = complex(form[i, j])
            if k == 0:
                continue
            linear.append((k * alphas[j], _MODES[i][1]))
            linear.append((k * alphas[i].conjugate(), _MODES[j][0]))
            constant += k * alphas[i].conjugate() * alphas[j]

    lo_var = sum(
        k1 * k2 * pair_moment(tm, op1, op2)
        for k1, op1 in linear
        for k2, op2 in linear
    )
    lo_var = float(np.real(lo_var))
    return StokesStatistics(mean0 + constant.real, var0 + lo_var, lo_var)


def stokes_uncertainty_product(tm: TwoModeMoments, lo: "LocalOscillator | None" = None) -> float:
    """
    (ΔS_y)²(ΔS_z)² - |<S_x>|²/4  (>= 0, [S_y, S_z] = iS_x 의 Robertson 관계)

    lo가 주어지면 두 모드를 α만큼 변위한 상태에서 계산.
    EPR 계열(<S_x> = 0)에서는 ((n̄(n̄+1))² - m⁴)/4 이고 순수 경계에서 0.
    """
    tm.validate()
    alpha = lo.alpha if lo is not None else 0j
    sy = stokes_statistics(tm, "y", alpha, alpha)
    sz = stokes_statistics(tm, "z", alpha, alpha)
    sx = stokes_statistics(tm, "x", alpha, alpha)
    return sy.variance * sz.variance - 0.25 * abs(sx.mean) ** 2
