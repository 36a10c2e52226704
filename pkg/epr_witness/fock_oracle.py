"""Fock 기저 오라클 - 잘린 광자수 기저에서 밀도 행렬을 직접 만들고 trace로 기댓값 계산

두 모드 인덱스는 i·cutoff + j (i = 모드 c/a 광자수, j = 모드 d/b 광자수).
"""

import csv
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Sequence, TextIO

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from .errors import (
    ConvergenceError,
    DegenerateInputError,
    DimensionMismatchError,
    DomainError,
    TruncationError,
    UnphysicalStateError,
)
from .gaussian_core import PHYSICAL_TOL, Ladder, ModeMoments, bose_einstein_pn, normal_order, validate_mode
from .witness import STOKES_FORMS, StokesMoments

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
EIGEN_TOL = 1e-10
DEFAULT_TRUNCATION_EPS = 1e-6
DEFAULT_CEILING = 256
DISPLACEMENT_RATIO = 10  # |α|² <= cutoff / 10
DEGENERATE_TOL = 1e-15


# ==================== 밀도 행렬 ====================

@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """잘린 Fock 기저 밀도 행렬 (modes = 1 또는 2)"""
    matrix: np.ndarray
    cutoff: int
    modes: int = 1

    def __post_init__(self):
        if self.modes not in (1, 2):
            raise DomainError(f"modes는 1 또는 2: {self.modes}")
        if self.cutoff < 1:
            raise DomainError(f"cutoff는 1 이상: {self.cutoff}")
        dim = self.cutoff ** self.modes
        if self.matrix.shape != (dim, dim):
            raise DimensionMismatchError(
                f"행렬 크기 {self.matrix.shape} != ({dim}, {dim}) (cutoff={self.cutoff}, modes={self.modes})"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def trace_deficit(self) -> float:
        return 1.0 - self.trace()

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=tol))

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """원시 고유값 (clamp 하지 않음)"""
        return np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)

    def is_physical(self, tol: float = EIGEN_TOL) -> bool:
        """에르미트 + 고유값 >= -tol (-tol 이내 음수는 반올림 오차로 보고 통과)"""
        if not self.is_hermitian():
            return False
        lowest = float(self.eigenvalues.min())
        if lowest < -tol:
            return False
        if lowest < 0:
            logger.debug("음수 고유값 %.3e 를 0으로 간주", lowest)
        return True

    def as_tensor(self) -> np.ndarray:
        """두 모드 행렬 -> T[i, j, k, l] = ρ[(i, j), (k, l)]"""
        if self.modes != 2:
            raise DimensionMismatchError("두 모드 상태가 아님")
        d = self.cutoff
        return self.matrix.reshape(d, d, d, d)

    def dump_csv(self, fp: TextIO, threshold: float = 0.0) -> int:
        """0이 아닌 원소를 row,col,re,im 으로 기록 (디버그용)"""
        writer = csv.writer(fp, lineterminator="\r\n")
        writer.writerow(("row", "col", "re", "im"))
        rows, cols = np.nonzero(np.abs(self.matrix) > threshold)
        for r, c in zip(rows, cols):
            value = self.matrix[r, c]
            writer.writerow((int(r), int(c), repr(float(value.real)), repr(float(value.imag))))
        return len(rows)


# ==================== 한 모드 상태 ====================

@dataclass(frozen=True)
class SqueezedThermalParams:
    """ρ = S ρ_th(ν) S†, S = exp[(-sign·r/2)(a†² - a²)]"""
    nu: float
    r: float
    sign: int = 1


def squeezed_thermal_params(nbar: float, m: float) -> SqueezedThermalParams:
    """
    (n̄, m) -> (ν, r)

        (ν + 1/2) cosh 2r = n̄ + 1/2
        (ν + 1/2) sinh 2r = |m|
    """
    verdict = validate_mode(ModeMoments(nbar, m))
    if not verdict.physical:
        raise UnphysicalStateError(f"비물리적 모드: nbar={nbar}, m={m}")
    s = nbar + 0.5
    m_abs = min(abs(m), math.sqrt(nbar * (nbar + 1)))
    nu = max(math.sqrt(max(s * s - m_abs * m_abs, 0.0)) - 0.5, 0.0)
    if nu < PHYSICAL_TOL:
        nu = 0.0
    r = 0.5 * math.atanh(m_abs / s)
    return SqueezedThermalParams(nu=nu, r=r, sign=-1 if m < 0 else 1)


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def _padded_dim(cutoff: int) -> int:
    return max(2 * cutoff, cutoff + 40)


def _single_mode_matrix(nbar: float, m: float, cutoff: int) -> np.ndarray:
    """여유 차원에서 만든 뒤 잘라낸 한 모드 ρ (결손 검사 없음)"""
    params = squeezed_thermal_params(nbar, m)
    dim = _padded_dim(cutoff)
    thermal = np.array([bose_einstein_pn(params.nu, n) for n in range(dim)])

    if params.r == 0:
        rho = np.diag(thermal).astype(complex)
    else:
        a = _annihilation(dim)
        generator = a.T @ a.T - a @ a
        squeeze = expm((-params.sign * params.r / 2) * generator)
        rho = (squeeze * thermal) @ squeeze.T
        rho = rho.astype(complex)
    return rho[:cutoff, :cutoff]


def build_single_mode_state(
    nbar: float,
    m: float,
    cutoff: int,
    eps: float = DEFAULT_TRUNCATION_EPS,
) -> FockDensityMatrix:
    """
    <a†a> = n̄, <a²> = -m 인 한 모드 가우시안 상태

    Args:
        nbar: 평균 광자수
        m: 스퀴징 파라미터
        cutoff: 기저 상태 수
        eps: 허용 trace 결손 (초과 시 TruncationError)
    """
    if int(cutoff) < 1:
        raise DomainError(f"cutoff는 1 이상: {cutoff}")
    state = FockDensityMatrix(_single_mode_matrix(nbar, m, int(cutoff)), int(cutoff), 1)
    if state.trace_deficit > eps:
        raise TruncationError(
            f"cutoff {cutoff}에서 trace 결손 {state.trace_deficit:.3e} > {eps:.1e} (nbar={nbar}, m={m})"
        )
    return state


def tensor_product(rho_a: FockDensityMatrix, rho_b: FockDensityMatrix) -> FockDensityMatrix:
    if rho_a.modes != 1 or rho_b.modes != 1:
        raise DimensionMismatchError("한 모드 상태끼리만 곱할 수 있음")
    if rho_a.cutoff != rho_b.cutoff:
        raise DimensionMismatchError(f"cutoff 불일치: {rho_a.cutoff} != {rho_b.cutoff}")
    return FockDensityMatrix(np.kron(rho_a.matrix, rho_b.matrix), rho_a.cutoff, 2)


# ==================== 빔 스플리터 ====================

@lru_cache(maxsize=512)
def _bs_block(n: int) -> np.ndarray:
    """
    광자수 n 블록의 빔 스플리터, 기저 |p, n-p> (p = 0..n)

    exp[(π/4)(a†b - ab†)] 뒤에 (-1)^{n_d} 위상을 붙여 d = (a - b)/√2 가 되도록 한다.
    """
    p = np.arange(n)
    coupling = np.sqrt((p + 1) * (n - p), dtype=float)
    generator = np.diag(coupling, -1) - np.diag(coupling, 1)
    parity = (-1.0) ** (n - np.arange(n + 1))
    block = parity[:, None] * expm((math.pi / 4) * generator)
    block.setflags(write=False)
    return block


BlockFn = Callable[[int, np.ndarray, int, np.ndarray], np.ndarray]


def _block_range(n: int, dim: int) -> np.ndarray:
    """두 모드 모두 dim 미만인 |p, n-p> 의 p"""
    return np.arange(max(0, n - dim + 1), min(n, dim - 1) + 1)


def _output_blocks(block: BlockFn, d_in: int, cutoff: int, diagonal_only: bool = False):
    """
    광자수 블록 (N, N') 별 출력 B_N M B_N'^T 를 차례로 생성

    block(N, p, N', r) 은 입력 원소 <p, N-p| ρ |r, N'-r> 블록을 돌려준다.
    yield: (N, N', 출력 c 광자수 배열 N 쪽, N' 쪽, 블록)
    """
    n_max = 2 * cutoff - 2
    layout = {}
    for n in range(n_max + 1):
        inputs = _block_range(n, d_in)
        outputs = _block_range(n, cutoff)
        layout[n] = (inputs, outputs, _bs_block(n)[np.ix_(outputs, inputs)])

    for n, (p_in, p_out, rot_n) in layout.items():
        partners = (n,) if diagonal_only else range(n_max + 1)
        for n2 in partners:
            r_in, r_out, rot_n2 = layout[n2]
            m = block(n, p_in, n2, r_in)
            if not m.any():
                continue
            yield n, n2, p_out, r_out, rot_n @ m @ rot_n2.T


def _beam_splitter_kernel(block: BlockFn, d_in: int, cutoff: int, diagonal_only: bool = False) -> np.ndarray:
    """블록을 dense 출력 행렬 (cutoff², cutoff²) 에 배치"""
    out = np.zeros((cutoff * cutoff, cutoff * cutoff), dtype=complex)
    for n, n2, p_out, r_out, values in _output_blocks(block, d_in, cutoff, diagonal_only):
        rows = p_out * cutoff + (n - p_out)
        cols = r_out * cutoff + (n2 - r_out)
        out[np.ix_(rows, cols)] = values
    return out


def _padded(matrix: np.ndarray, dim: int) -> np.ndarray:
    if matrix.shape[0] >= dim:
        return matrix
    padded = np.zeros((dim, dim), dtype=complex)
    padded[: matrix.shape[0], : matrix.shape[1]] = matrix
    return padded


def beam_splitter_output(
    rho_a: FockDensityMatrix,
    rho_b: FockDensityMatrix,
    cutoff: int,
    number_diagonal: bool = False,
) -> FockDensityMatrix:
    """
    곱 상태 ρ_a ⊗ ρ_b 의 빔 스플리터 출력 (입력 곱을 만들지 않고 블록별 계산)

    입력 cutoff >= 2·cutoff - 1 이면 남기는 출력 원소는 잘림 오차가 없다.
    number_diagonal=True 면 총 광자수가 같은 블록만 남긴다 (광자수 보존 관측량에 충분).
    """
    if rho_a.modes != 1 or rho_b.modes != 1:
        raise DimensionMismatchError("한 모드 입력이 필요함")
    d_in = max(rho_a.cutoff, rho_b.cutoff, 2 * cutoff - 1)
    a = _padded(rho_a.matrix, d_in)
    b = _padded(rho_b.matrix, d_in)

    def block(n, p, n2, r):
        return a[np.ix_(p, r)] * b[np.ix_(n - p, n2 - r)]

    return FockDensityMatrix(_beam_splitter_kernel(block, d_in, cutoff, number_diagonal), cutoff, 2)


def apply_beam_splitter(rho_ab: FockDensityMatrix, eps: float = DEFAULT_TRUNCATION_EPS) -> FockDensityMatrix:
    """U ρ U† (광자수 보존 블록 단위), 잘림으로 잃은 trace가 eps를 넘으면 TruncationError"""
    tensor = rho_ab.as_tensor()
    d = rho_ab.cutoff

    def block(n, p, n2, r):
        return tensor[p[:, None], (n - p)[:, None], r[None, :], (n2 - r)[None, :]]

    out = FockDensityMatrix(_beam_splitter_kernel(block, d, d), d, 2)
    lost = rho_ab.trace() - out.trace()
    if lost > eps:
        raise TruncationError(f"빔 스플리터 후 trace 손실 {lost:.3e} > {eps:.1e} (cutoff {d})")
    return out


def beam_splitter_unitary(cutoff: int) -> np.ndarray:
    """잘린 기저로 제한한 빔 스플리터 행렬 (광자수 블록 구조 확인용)"""
    u = np.zeros((cutoff * cutoff, cutoff * cutoff))
    for n in range(2 * cutoff - 1):
        p = _block_range(n, cutoff)
        idx = p * cutoff + (n - p)
        u[np.ix_(idx, idx)] = _bs_block(n)[np.ix_(p, p)]
    return u


def epr_state(
    nbar: float,
    m: float,
    cutoff: int,
    eps: float = DEFAULT_TRUNCATION_EPS,
    number_diagonal: bool = False,
) -> FockDensityMatrix:
    """(n̄, m) ⊗ (n̄, -m) 입력의 빔 스플리터 출력 ρ_cd"""
    d_in = 2 * cutoff - 1
    rho_a = FockDensityMatrix(_single_mode_matrix(nbar, m, d_in), d_in, 1)
    rho_b = FockDensityMatrix(_single_mode_matrix(nbar, -m, d_in), d_in, 1)
    logger.debug("EPR 상태 생성: nbar=%s, m=%s, cutoff=%d (dim %d)", nbar, m, cutoff, cutoff ** 2)
    state = beam_splitter_output(rho_a, rho_b, cutoff, number_diagonal)
    if state.trace_deficit > eps:
        raise TruncationError(
            f"cutoff {cutoff}에서 trace 결손 {state.trace_deficit:.3e} > {eps:.1e} (nbar={nbar}, m={m})"
        )
    return state


# ==================== 변위 ====================

def _displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    dim = 2 * cutoff + 32
    a = _annihilation(dim)
    return expm(alpha * a.T - np.conj(alpha) * a)[:cutoff, :cutoff]


def apply_displacement(rho: FockDensityMatrix, alpha: complex, mode: int = 0) -> FockDensityMatrix:
    """
    D(α) ρ D(α)†, D = exp(αa† - α*a)

    Args:
        rho: 한 모드 또는 두 모드 상태
        alpha: 변위 (|α|² <= cutoff/10)
        mode: 두 모드 상태에서 변위할 모드 (0 = c, 1 = d)
    """
    alpha = complex(alpha)
    if abs(alpha) ** 2 > rho.cutoff / DISPLACEMENT_RATIO:
        raise TruncationError(f"|α|² = {abs(alpha) ** 2:.3g} 가 cutoff {rho.cutoff} 에 비해 큼")
    if mode not in range(rho.modes):
        raise DimensionMismatchError(f"모드 인덱스 {mode} (modes={rho.modes})")
    if alpha == 0:
        return FockDensityMatrix(rho.matrix.copy(), rho.cutoff, rho.modes)

    disp = _displacement_matrix(alpha, rho.cutoff)
    if rho.modes == 1:
        return FockDensityMatrix(disp @ rho.matrix @ disp.conj().T, rho.cutoff, 1)

    tensor = rho.as_tensor()
    if mode == 0:
        out = np.einsum("ai,ijkl,bk->ajbl", disp, tensor, disp.conj(), optimize=True)
    else:
        out = np.einsum("bj,ijkl,dl->ibkd", disp, tensor, disp.conj(), optimize=True)
    d = rho.cutoff
    return FockDensityMatrix(out.reshape(d * d, d * d), d, 2)


# ==================== 연산자 / 기댓값 ====================

def ladder(cutoff: int) -> sparse.csr_matrix:
    """잘린 소멸 연산자 a"""
    return sparse.diags(np.sqrt(np.arange(1, cutoff, dtype=float)), 1, format="csr")


class ModeOperators:
    """두 모드 (c, d) 사다리 연산자와 여기서 만든 관측량 (scipy.sparse)"""

    def __init__(self, cutoff: int):
        self.cutoff = cutoff
        a = ladder(cutoff)
        eye = sparse.identity(cutoff, format="csr")
        self.c = sparse.kron(a, eye, format="csr")
        self.d = sparse.kron(eye, a, format="csr")
        self.identity = sparse.identity(cutoff * cutoff, format="csr", dtype=complex)

    def op(self, x: Ladder) -> sparse.csr_matrix:
        base = self.c if x.mode == "c" else self.d
        return base.T.tocsr() if x.dagger else base

    def product(self, ops: Sequence[Ladder]) -> sparse.csr_matrix:
        result = self.identity
        for x in ops:
            result = result @ self.op(x)
        return result.tocsr()

    @property
    def n_c(self):
        return (self.c.T @ self.c).tocsr()

    @property
    def n_d(self):
        return (self.d.T @ self.d).tocsr()

    def quadrature(self, mode: str, phi: float = 0.0):
        """X(φ) = (a e^{-iφ} + a† e^{iφ})/√2"""
        a = self.c if mode == "c" else self.d
        phase = complex(math.cos(phi), math.sin(phi))
        return ((a * phase.conjugate() + a.T * phase) / math.sqrt(2)).tocsr()

    @staticmethod
    def _form_terms(name: str) -> list[tuple[complex, tuple[Ladder, Ladder]]]:
        form = STOKES_FORMS[name]
        return [
            (complex(form[i, j]), (Ladder("cd"[i], True), Ladder("cd"[j], False)))
            for i in range(2)
            for j in range(2)
            if form[i, j] != 0
        ]

    def stokes(self, name: str):
        """S = Σ K_ij x_i† x_j"""
        total = sparse.csr_matrix(self.identity.shape, dtype=complex)
        for k, ops in self._form_terms(name):
            total = total + k * self.product(ops)
        return total.tocsr()

    def stokes_square_normal(self, name: str):
        """:S²: (생성 연산자를 왼쪽으로)"""
        total = sparse.csr_matrix(self.identity.shape, dtype=complex)
        terms = self._form_terms(name)
        for k1, ops1 in terms:
            for k2, ops2 in terms:
                total = total + k1 * k2 * self.product(normal_order(ops1 + ops2))
        return total.tocsr()

    def hbt_numerator(self):
        """2c†d†cd + d†²c² + c†²d²"""
        c, d = self.c, self.d
        cd, cdag, ddag = c @ d, c.T, d.T
        return (2 * (cdag @ ddag @ cd) + ddag @ ddag @ c @ c + cdag @ cdag @ d @ d).tocsr()

    def hbt_denominator(self):
        """<:(I_c + I_d)²:> = c†²c² + d†²d² + 2c†d†cd"""
        c, d = self.c, self.d
        cdag, ddag = c.T, d.T
        return (cdag @ cdag @ c @ c + ddag @ ddag @ d @ d + 2 * (cdag @ ddag @ c @ d)).tocsr()


@lru_cache(maxsize=8)
def mode_operators(cutoff: int) -> ModeOperators:
    return ModeOperators(cutoff)


def expect(rho: FockDensityMatrix, operator) -> complex:
    """tr(ρ O) - O는 dense 또는 scipy.sparse"""
    if operator.shape != rho.matrix.shape:
        raise DimensionMismatchError(f"연산자 {operator.shape} 와 상태 {rho.matrix.shape} 크기 불일치")
    if sparse.issparse(operator):
        coo = operator.tocoo()
        return complex(np.sum(coo.data * rho.matrix[coo.col, coo.row]))
    return complex(np.einsum("ij,ji->", rho.matrix, np.asarray(operator)))


def _normalized(rho: FockDensityMatrix, operator) -> complex:
    return expect(rho, operator) / rho.trace()


def variance(rho: FockDensityMatrix, operator) -> float:
    """<O²> - <O>² (trace로 정규화)"""
    mean = _normalized(rho, operator)
    square = _normalized(rho, operator @ operator)
    return float((square - mean ** 2).real)


def witness_expectation(rho: FockDensityMatrix) -> float:
    """<W> = 1/2 - <:HBT 분자:> / <:(I_c + I_d)²:>"""
    ops = mode_operators(rho.cutoff)
    numerator = expect(rho, ops.hbt_numerator()).real
    denominator = expect(rho, ops.hbt_denominator()).real
    if denominator <= DEGENERATE_TOL:
        raise DegenerateInputError("<:(I_c + I_d)²:> = 0")
    return 0.5 - numerator / denominator


def stokes_moments_oracle(rho: FockDensityMatrix) -> StokesMoments:
    ops = mode_operators(rho.cutoff)
    s = {name: ops.stokes(name) for name in STOKES_FORMS}

    def mean(op):
        return _normalized(rho, op).real

    return StokesMoments(
        s0_mean=mean(s["0"]),
        sx_mean=mean(s["x"]),
        sy_mean=mean(s["y"]),
        sz_mean=mean(s["z"]),
        sx2_no=mean(ops.stokes_square_normal("x")),
        sy2_no=mean(ops.stokes_square_normal("y")),
        sz2_no=mean(ops.stokes_square_normal("z")),
        sx2=mean(s["x"] @ s["x"]),
        sy2=mean(s["y"] @ s["y"]),
        sz2=mean(s["z"] @ s["z"]),
    )


def nopa_state(nbar: float, cutoff: int) -> np.ndarray:
    """
    순수 두 모드 스퀴즈드 상태 Σ (-1)^n sqrt(p_n) |n, n>

    <cd> = -m < 0 에 맞춘 부호, 잘림 후 재정규화.
    """
    if not (math.isfinite(nbar) and nbar >= 0):
        raise DomainError(f"nbar는 0 이상: {nbar}")
    psi = np.zeros(cutoff * cutoff, dtype=complex)
    for n in range(cutoff):
        psi[n * cutoff + n] = (-1) ** n * math.sqrt(bose_einstein_pn(nbar, n))
    return psi / np.linalg.norm(psi)


def state_fidelity(rho: FockDensityMatrix, psi: np.ndarray) -> float:
    """<ψ|ρ|ψ> / tr ρ"""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (rho.dim,):
        raise DimensionMismatchError(f"상태 벡터 {psi.shape} 와 밀도 행렬 {rho.matrix.shape} 불일치")
    psi = psi / np.linalg.norm(psi)
    return float((psi.conj() @ rho.matrix @ psi).real / rho.trace())


# ==================== 수렴 ====================

def _diagonal_block_summary(nbar: float, m: float, cutoff: int) -> tuple[float, float | None]:
    """광자수 대각 블록만으로 (trace 결손, 증인) 계산"""
    d_in = 2 * cutoff - 1
    a = _single_mode_matrix(nbar, m, d_in)
    b = _single_mode_matrix(nbar, -m, d_in)

    def block(n, p, n2, r):
        return a[np.ix_(p, r)] * b[np.ix_(n - p, n2 - r)]

    trace = numerator = denominator = 0.0
    for n, _, p, _, values in _output_blocks(block, d_in, cutoff, diagonal_only=True):
        populations = np.diag(values).real
        trace += populations.sum()
        numerator += 2 * np.sum(populations * p * (n - p))
        denominator += populations.sum() * n * (n - 1)
        # <c†²d²> + <d†²c²> = 2 Re <p+2, n-p-2| ρ |p, n-p> · 계수
        if len(p) > 2:
            q = p[:-2]
            coef = np.sqrt((q + 1) * (q + 2) * (n - q) * (n - q - 1.0))
            numerator += 2 * np.sum(coef * np.diagonal(values, -2).real)

    if denominator <= DEGENERATE_TOL:
        return 1.0 - trace, None
    return 1.0 - trace, 0.5 - numerator / denominator


def convergence_check(
    nbar: float,
    m: float,
    tolerance: float = 1e-6,
    ceiling: int = DEFAULT_CEILING,
) -> int:
    """
    cutoff 1, 2, 4, ... 을 차례로 시도해 수렴한 가장 작은 cutoff 반환

    trace 결손 < tolerance 이고 증인 변화량 < tolerance (진공처럼 증인이
    정의되지 않으면 결손만 확인).
    """
    if not validate_mode(ModeMoments(nbar, m)).physical:
        raise UnphysicalStateError(f"비물리적 모드: nbar={nbar}, m={m}")
    previous = None
    cutoff = 1
    while cutoff <= ceiling:
        deficit, w = _diagonal_block_summary(nbar, m, cutoff)
        logger.debug("cutoff %d: 결손 %.3e, W=%s", cutoff, deficit, w)
        if deficit < tolerance:
            if w is None or (previous is not None and abs(w - previous) < tolerance):
                return cutoff
        previous = w
        cutoff *= 2
    raise ConvergenceError(f"cutoff {ceiling} 이하에서 수렴하지 않음 (nbar={nbar}, m={m}, tol={tolerance})")
