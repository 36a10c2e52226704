"""공통 예외 타입"""


class EprWitnessError(Exception):
    """패키지 전체 예외의 기본 클래스"""


class DomainError(EprWitnessError, ValueError):
    """입력값이 연산의 정의역을 벗어남 (음수 n̄, 범위 밖 v 등)"""


class UnphysicalStateError(DomainError):
    """물리적으로 불가능한 모멘트 (|m| > sqrt(n̄(n̄+1)), 심플렉틱 조건 위반)"""


class DegenerateInputError(DomainError):
    """0/0 형태 - 진공 입력 등"""


class DimensionMismatchError(DomainError):
    """cutoff 또는 모드 수 불일치"""


class TruncationError(EprWitnessError):
    """Fock 공간 절단 오차가 허용치 초과"""


class ConvergenceError(EprWitnessError):
    """상한 이하의 cutoff에서 수렴하지 않음"""


class InconsistentMomentsError(EprWitnessError):
    """서로 독립적으로 계산한 두 값이 일치하지 않음"""
