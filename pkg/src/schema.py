"""
스키마 정의: BuildLimits, ChaseConfig, 내보내기(JSON) 구조, API 요청/응답
설정 검증 및 API 응답 구조화에 사용
"""
import os
from typing import List, Optional, Literal
from pydantic import BaseModel, ConfigDict, Field, field_validator


SemanticsName = Literal["standard", "b", "c", "eb", "ec", "it"]
QueryMode = Literal["certain", "cqa"]


def _env_int(name: str, default: int) -> int:
    """환경변수 정수값 (잘못된 값이면 기본값)"""
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


# 환경변수 설정
DEFAULT_MAX_STATES = _env_int("KAB_MAX_STATES", 100000)
DEFAULT_MAX_RUN_DOMAIN = _env_int("KAB_MAX_RUN_DOMAIN", 64)
DEFAULT_MAX_DEPTH = _env_int("KAB_MAX_DEPTH", 256)
LOG_LEVEL = os.environ.get("KAB_LOG_LEVEL", "WARNING")


# ============================================================
# 빌드/오라클 설정
# ============================================================

class BuildLimits(BaseModel):
    """전이 시스템 빌드 한계 (None이면 무제한)"""
    model_config = ConfigDict(frozen=True)

    max_states: Optional[int] = Field(DEFAULT_MAX_STATES, description="최대 상태 수")
    max_run_domain: Optional[int] = Field(DEFAULT_MAX_RUN_DOMAIN, description="상태당 최대 값 개수")
    max_depth: Optional[int] = Field(DEFAULT_MAX_DEPTH, description="초기 상태로부터 최대 BFS 깊이")

    @field_validator("max_states", "max_run_domain", "max_depth", mode="before")
    @classmethod
    def validate_positive(cls, v):
        if v is None:
            return v
        if int(v) <= 0:
            raise ValueError("limits must be positive")
        return int(v)


class ChaseConfig(BaseModel):
    """오라클 chase 설정"""
    model_config = ConfigDict(frozen=True)

    max_depth: Optional[int] = Field(None, description="chase 깊이 (None이면 2*|T_p|+2)")
    null_prefix: str = Field("_n", description="익명 개체 접두사")
    strict: bool = Field(True, description="깊이 부족 시 DepthInsufficient 발생 여부")

    @field_validator("max_depth", mode="before")
    @classmethod
    def validate_depth(cls, v):
        if v is None:
            return v
        if int(v) <= 0:
            raise ValueError("max_depth must be positive")
        return int(v)


# ============================================================
# 전이 시스템 JSON 내보내기
# ============================================================

class CallExport(BaseModel):
    """서비스 호출 맵 항목"""
    call: str = Field(..., description="호출 (예: f(a))")
    value: str = Field(..., description="반환 값")


class StateExport(BaseModel):
    """상태 하나"""
    id: int
    abox: List[str] = Field(default_factory=list, description="정렬된 ABox assertion")
    map: List[CallExport] = Field(default_factory=list, description="서비스 호출 맵")


class EdgeExport(BaseModel):
    """간선 하나"""
    src: int
    dst: int
    label: str


class TsExport(BaseModel):
    """전이 시스템 JSON 구조"""
    semantics: SemanticsName
    states: List[StateExport] = Field(default_factory=list)
    edges: List[EdgeExport] = Field(default_factory=list)
    initial: int = 0
    active_domain: List[str] = Field(default_factory=list)
    limits: BuildLimits = Field(default_factory=BuildLimits)


# ============================================================
# API 요청
# ============================================================

class KabRequest(BaseModel):
    """KAB 텍스트만 받는 요청"""
    kab: str = Field(..., description=".kab 문서 텍스트")


class BuildRequest(KabRequest):
    semantics: SemanticsName = Field("standard", description="실행 의미론")
    limits: Optional[BuildLimits] = None


class VerifyRequest(BuildRequest):
    properties: str = Field(..., description=".prop 문서 텍스트")
    query_mode: Optional[QueryMode] = Field(None, description="None이면 it는 cqa, 그 외 certain")
    require_it_fragment: bool = False


class RepairsRequest(KabRequest):
    abox: str = Field(..., description="ABOX { ... } 블록 텍스트")
    kind: Literal["b", "c"] = "b"


class TauRequest(BaseModel):
    properties: str = Field(..., description=".prop 문서 텍스트")


# ============================================================
# API 응답
# ============================================================

class PropertyResult(BaseModel):
    """속성 하나의 검증 결과"""
    name: str
    verdict: bool
    it_fragment: bool
    extension_size: int = 0


class VerifyResponse(BaseModel):
    semantics: SemanticsName
    query_mode: QueryMode
    states: int
    results: List[PropertyResult] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)


class ErrorDetail(BaseModel):
    """에러 상세"""
    code: str = Field(..., description="에러 코드")
    message: str = Field(..., description="에러 메시지")


class ErrorResponse(BaseModel):
    """에러 응답"""
    error: ErrorDetail


def create_error_response(code: str, message: str) -> dict:
    """에러 응답 생성 헬퍼"""
    return ErrorResponse(error=ErrorDetail(code=code, message=message)).model_dump()
