"""가우시안 상태 - 2차 모멘트 표현, 물리성 조건, 빔 스플리터, (n̄, m) 위상도

규약: X = (a + a†)/√2, P = (a - a†)/(√2 i), 진공 분산 1/2.
한 모드 상태는 <a†a> = n̄, <a²> = -m 으로 요약한다.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, UnphysicalStateError

PHYSICAL_TOL = 1e-12  # |m| <= sqrt(n̄(n̄+1)) 판정
REGION_TOL = 1e-9  # 위상도 경계 / 엄격 부등호 판정
COVARIANCE_TOL = 1e-10  # 공분산 행렬 양정치성 / 심플렉틱 조건

# 심플렉틱 형식 (X_c, P_c, X_d, P_d)
OMEGA = np.array([
    [0.0, 1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
])

# 부분 전치 = 모드 d의 운동량 부호 반전
_PARTIAL_TRANSPOSE = np.diag([1.0, 1.0, 1.0, -1.0])


class RegionLabel(str, Enum):
    """(n̄, m >= 0) 위상도 영역"""
    UNPHYSICAL = "Unphysical"
    PURE_BOUNDARY = "PureBoundary"
    ENTANGLED = "Entangled"
    SEPARABLE_BOUNDARY = "SeparableBoundary"
    SEPARABLE = "Separable"


class PhysicalityVerdict(NamedTuple):
    physical: bool
    margin: float  # sqrt(n̄(n̄+1)) - |m|


class SymplecticPair(NamedTuple):
    nu_minus: float
    nu_plus: float

    @property
    def entangled(self) -> bool:
        return self.nu_minus < 0.5 - REGION_TOL


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name}가 유한하지 않음: {value}")
    return value


# ==================== 한 모드 ====================

@dataclass(frozen=True)
class ModeMoments:
    """한 모드 가우시안 상태 (<a†a> = nbar, <a²> = -m)"""
    nbar: float
    m: float

    @property
    def sq(self) -> complex:
        """<a²>"""
        return complex(-self.m)


def validate_mode(mode: ModeMoments) -> PhysicalityVerdict:
    """물리성 판정: |m| <= sqrt(n̄(n̄+1))"""
    nbar = _finite("nbar", mode.nbar)
    m = _finite("m", mode.m)
    if nbar < 0:
        raise DomainError(f"nbar는 0 이상이어야 함: {nbar}")
    margin = math.sqrt(nbar * (nbar + 1)) - abs(m)
    return PhysicalityVerdict(margin >= -PHYSICAL_TOL, margin)


def _require_physical(mode: ModeMoments) -> None:
    verdict = validate_mode(mode)
    if not verdict.physical:
        raise UnphysicalStateError(
            f"비물리적 모드: nbar={mode.nbar}, m={mode.m} (margin {verdict.margin:.3e})"
        )


def quadrature_stddevs(mode: ModeMoments) -> tuple[float, float]:
    """(ΔX₁, ΔX₂) = (sqrt(n̄ + 1/2 - m), sqrt(n̄ + 1/2 + m))"""
    _require_physical(mode)
    radicands = (mode.nbar + 0.5 - mode.m, mode.nbar + 0.5 + mode.m)
    for r in radicands:
        if r < -PHYSICAL_TOL:
            raise UnphysicalStateError(f"음수 분산: {r}")
    return tuple(math.sqrt(max(r, 0.0)) for r in radicands)


def heisenberg_product(mode: ModeMoments) -> float:
    """ΔX₁ΔX₂ = sqrt((n̄ + 1/2)² - m²) >= 1/2"""
    _require_physical(mode)
    return math.sqrt(max((mode.nbar + 0.5) ** 2 - mode.m ** 2, 0.0))


def is_squeezed(mode: ModeMoments) -> bool:
    """진공 잡음 이하 요동: n̄ < |m|"""
    _require_physical(mode)
    return abs(mode.m) > mode.nbar + REGION_TOL


def bose_einstein_pn(nbar: float, n: int) -> float:
    """Bose-Einstein 분포 p_n = n̄^n / (1 + n̄)^(n+1)"""
    nbar = _finite("nbar", nbar)
    if nbar < 0:
        raise DomainError(f"nbar는 0 이상이어야 함: {nbar}")
    if n < 0:
        raise DomainError(f"광자수는 0 이상이어야 함: {n}")
    if nbar == 0:
        return 1.0 if n == 0 else 0.0
    return (nbar / (1 + nbar)) ** n / (1 + nbar)


# ==================== 두 모드 ====================

@dataclass(frozen=True)
class TwoModeMoments:
    """출력 모드 c, d의 2차 모멘트 (평균 0 가우시안)"""
    nbar_c: float
    nbar_d: float
    corr_cd: complex = 0j  # <cd>
    coh_cd: complex = 0j  # <c†d>
    sq_c: complex = 0j  # <c²>
    sq_d: complex = 0j  # <d²>

    @classmethod
    def epr(cls, nbar: float, m: float) -> "TwoModeMoments":
        """EPR 혼합 상태: <c†c> = <d†d> = n̄, <cd> = -m"""
        return cls(nbar_c=float(nbar), nbar_d=float(nbar), corr_cd=complex(-m))

    @classmethod
    def vacuum(cls) -> "TwoModeMoments":
        return cls(nbar_c=0.0, nbar_d=0.0)

    def validate(self) -> None:
        """음수 광자수 / 심플렉틱 조건 위반 시 예외"""
        for name in ("nbar_c", "nbar_d"):
            value = _finite(name, getattr(self, name))
            if value < 0:
                raise DomainError(f"{name}는 0 이상이어야 함: {value}")
        for name in ("corr_cd", "coh_cd", "sq_c", "sq_d"):
            value = complex(getattr(self, name))
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise DomainError(f"{name}가 유한하지 않음: {value}")
        cov = covariance_matrix(self)
        if not cov.is_physical():
            raise UnphysicalStateError(
                f"심플렉틱 조건 위반 (최소 고유값 {cov.heisenberg_eigenvalues().min():.3e})"
            )


@dataclass(frozen=True)
class QuadratureCovariance:
    """(X_c, P_c, X_d, P_d) 대칭 공분산 행렬, 진공 = I/2"""
    sigma: np.ndarray

    def heisenberg_eigenvalues(self) -> np.ndarray:
        """sigma + (i/2)Ω 의 고유값 (모두 >= 0 이어야 물리적)"""
        return np.linalg.eigvalsh(self.sigma + 0.5j * OMEGA)

    def is_physical(self, tol: float = COVARIANCE_TOL) -> bool:
        if not np.allclose(self.sigma, self.sigma.T, atol=tol):
            return False
        return bool(self.heisenberg_eigenvalues().min() >= -tol)


def beam_splitter(mode_a: ModeMoments, mode_b: ModeMoments) -> TwoModeMoments:
    """
    50/50 빔 스플리터: c = (a + b)/√2, d = (a - b)/√2

    입력은 서로 독립인 평균 0 상태로 가정.
    (n̄, m)_a ⊗ (n̄, -m)_b -> <c†c> = <d†d> = n̄, <cd> = -m
    """
    _require_physical(mode_a)
    _require_physical(mode_b)
    nbar = (mode_a.nbar + mode_b.nbar) / 2
    sq = (mode_a.sq + mode_b.sq) / 2
    return TwoModeMoments(
        nbar_c=nbar,
        nbar_d=nbar,
        corr_cd=(mode_a.sq - mode_b.sq) / 2,
        coh_cd=complex((mode_a.nbar - mode_b.nbar) / 2),
        sq_c=sq,
        sq_d=sq,
    )


def inverse_beam_splitter(tm: TwoModeMoments) -> tuple[ModeMoments, ModeMoments]:
    """역변환 a = (c + d)/√2, b = (c - d)/√2 (한 모드 모멘트만 복원)"""
    mean = (tm.nbar_c + tm.nbar_d) / 2
    sq_a = (tm.sq_c + tm.sq_d + 2 * tm.corr_cd) / 2
    sq_b = (tm.sq_c + tm.sq_d - 2 * tm.corr_cd) / 2
    return (
        ModeMoments(mean + tm.coh_cd.real, -sq_a.real),
        ModeMoments(mean - tm.coh_cd.real, -sq_b.real),
    )


def covariance_matrix(tm: TwoModeMoments) -> QuadratureCovariance:
    """모드 모멘트 -> 직교 성분 공분산 (대칭화된 <{R_i, R_j}>/2)"""
    def block(nbar: float, sq: complex) -> np.ndarray:
        return np.array([
            [nbar + 0.5 + sq.real, sq.imag],
            [sq.imag, nbar + 0.5 - sq.real],
        ])

    corr, coh = complex(tm.corr_cd), complex(tm.coh_cd)
    cross = np.array([
        [corr.real + coh.real, corr.imag + coh.imag],
        [corr.imag - coh.imag, -corr.real + coh.real],
    ])
    sigma = np.zeros((4, 4))
    sigma[:2, :2] = block(tm.nbar_c, complex(tm.sq_c))
    sigma[2:, 2:] = block(tm.nbar_d, complex(tm.sq_d))
    sigma[:2, 2:] = cross
    sigma[2:, :2] = cross.T
    return QuadratureCovariance(sigma)


def ppt_symplectic_eigenvalues(cov: QuadratureCovariance) -> SymplecticPair:
    """
    부분 전치 공분산의 심플렉틱 고유값 (ν̃₋, ν̃₊)

    ν̃₋ < 1/2 이면 얽힘 (1×1 모드 가우시안 상태에서 필요충분).
    EPR 계열에서 ν̃₋ = n̄ + 1/2 - m.
    """
    sigma = np.asarray(cov.sigma, dtype=float)
    if sigma.shape != (4, 4) or not np.all(np.isfinite(sigma)):
        raise DomainError(f"4×4 유한 공분산 행렬이 아님: shape {sigma.shape}")
    if np.linalg.eigvalsh((sigma + sigma.T) / 2).min() <= 0:
        raise DomainError("공분산 행렬이 양정치가 아님")

    pt = _PARTIAL_TRANSPOSE @ sigma @ _PARTIAL_TRANSPOSE
    spectrum = np.sort(np.abs(np.linalg.eigvals(1j * OMEGA @ pt)))
    return SymplecticPair(float(spectrum[0]), float(spectrum[-1]))


# ==================== 위상도 ====================

def pure_boundary_nbar(m: float) -> float:
    """순수 상태 곡선 n̄ = (-1 + sqrt(1 + 4m²))/2"""
    m2 = float(m) ** 2
    # 작은 m에서 상쇄 오차 방지
    return 2 * m2 / (1 + math.sqrt(1 + 4 * m2))


def classify_region(nbar: float, m: float) -> RegionLabel:
    """(n̄, m) 위상도 분류 - 경계 허용치 1e-9"""
    nbar = _finite("nbar", nbar)
    m = abs(_finite("m", m))
    curve = pure_boundary_nbar(m)

    if nbar < curve - REGION_TOL:
        return RegionLabel.UNPHYSICAL
    if abs(nbar - curve) <= REGION_TOL:
        return RegionLabel.PURE_BOUNDARY
    if m > nbar + REGION_TOL:
        return RegionLabel.ENTANGLED
    if abs(m - nbar) <= REGION_TOL:
        return RegionLabel.SEPARABLE_BOUNDARY
    return RegionLabel.SEPARABLE


# ==================== Wick 정리 ====================

class Ladder(NamedTuple):
    """사다리 연산자 (mode: "c" | "d", dagger: 생성 연산자 여부)"""
    mode: str
    dagger: bool


C = Ladder("c", False)
C_DAG = Ladder("c", True)
D = Ladder("d", False)
D_DAG = Ladder("d", True)


def pair_moment(tm: TwoModeMoments, x: Ladder, y: Ladder) -> complex:
    """순서를 유지한 2점 모멘트 <xy>"""
    if x.mode == y.mode:
        nbar = tm.nbar_c if x.mode == "c" else tm.nbar_d
        sq = complex(tm.sq_c if x.mode == "c" else tm.sq_d)
        if x.dagger and y.dagger:
            return sq.conjugate()
        if not x.dagger and not y.dagger:
            return sq
        # <a†a> = n̄, <aa†> = n̄ + 1
        return complex(nbar) if x.dagger else complex(nbar + 1)

    # 서로 다른 모드는 교환 가능
    c_op, d_op = (x, y) if x.mode == "c" else (y, x)
    corr, coh = complex(tm.corr_cd), complex(tm.coh_cd)
    if c_op.dagger and d_op.dagger:
        return corr.conjugate()
    if not c_op.dagger and not d_op.dagger:
        return corr
    return coh if c_op.dagger else coh.conjugate()


def wick_moment(tm: TwoModeMoments, ops: Sequence[Ladder]) -> complex:
    """
    평균 0 가우시안 상태에서 사다리 연산자 곱의 기댓값

    모든 짝짓기의 합, 각 짝은 원래 순서를 유지한다.
    """
    ops = tuple(ops)
    if not ops:
        return 1 + 0j
    if len(ops) % 2:
        return 0j

    first, rest = ops[0], ops[1:]
    total = 0j
    for j, partner in enumerate(rest):
        remaining = rest[:j] + rest[j + 1:]
        total += pair_moment(tm, first, partner) * wick_moment(tm, remaining)
    return total


def normal_order(ops: Sequence[Ladder]) -> tuple[Ladder, ...]:
    """생성 연산자를 왼쪽으로 (같은 종류끼리 순서 유지)"""
    return tuple(sorted(ops, key=lambda op: not op.dagger))
