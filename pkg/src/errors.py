"""
예외 정의: 파싱/의미 오류, 빌드 한계 초과, 모델 체킹 오류
- 모든 예외는 KabToolkitError를 상속
- code 값은 CLI 종료 코드와 HTTP 오류 응답에 그대로 사용
"""
from typing import Optional


class KabToolkitError(Exception):
    """툴킷 공통 예외"""

    code = "INTERNAL_ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# ============================================================
# 입력 오류 (파서/검증)
# ============================================================

class KabSyntaxError(KabToolkitError):
    """위치 정보가 있는 구문 오류"""

    code = "PARSE_ERROR"

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class KabSemanticError(KabToolkitError):
    """구문은 맞지만 KAB 불변식을 위반"""

    code = "SEMANTIC_ERROR"


class OpenFormula(KabToolkitError):
    """자유 변수가 남아 있는 공식"""

    code = "OPEN_FORMULA"


class NonMonotoneFixpoint(KabToolkitError):
    """mu/nu 본문이 고정점 변수에 대해 단조가 아님"""

    code = "NON_MONOTONE"


# ============================================================
# 실행 오류
# ============================================================

class MissingCallBinding(KabToolkitError):
    """ground()에서 서비스 호출 값이 지정되지 않음"""

    code = "MISSING_CALL_BINDING"


class InconsistentInitialAbox(KabToolkitError):
    """초기 ABox가 TBox와 모순"""

    code = "INCONSISTENT_A0"


class LimitExceeded(KabToolkitError):
    """BuildLimits 한계 도달 (run-bounded가 아닐 가능성)"""

    code = "LIMIT_EXCEEDED"

    def __init__(self, kind: str, bound: int):
        super().__init__(f"{kind} limit of {bound} exceeded")
        self.kind = kind
        self.bound = bound


class DepthInsufficient(KabToolkitError):
    """chase가 max_depth에서 아직 진행 가능"""

    code = "DEPTH_INSUFFICIENT"


class TooLarge(KabToolkitError):
    """오라클 입력 크기 가드 초과"""

    code = "TOO_LARGE"
