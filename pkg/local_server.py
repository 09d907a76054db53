"""
Local Development Server
- FastAPI 기반 로컬 검증 서버
- CLI와 동일한 로직 사용 (src.cli의 공용 함수)
"""
import logging
import os
import sys

# 프로젝트 루트 추가
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from src.analysis import dependency_graph, is_weakly_acyclic
from src.cli import translate_properties, verify_properties
from src.dllite import is_consistent
from src.errors import KabToolkitError, LimitExceeded
from src.export import dependency_graph_to_dot, ts_to_export
from src.parser import format_formula, labels_report, parse_abox, parse_kab, parse_properties
from src.repair import b_repairs, c_repair
from src.schema import (
    BuildRequest, KabRequest, RepairsRequest, TauRequest, VerifyRequest, create_error_response,
)
from src.ts import build_ts

logger = logging.getLogger(__name__)

VERSION = "1.0.0"

# FastAPI 앱
app = FastAPI(
    title="KAB Verification API",
    description="Knowledge and Action Base 검증 로컬 서버",
    version=VERSION,
)

# CORS 설정
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# ============================================================
# 에러 응답
# ============================================================

def error_response(e: Exception) -> JSONResponse:
    """예외 -> {"error": {code, message}} 응답"""
    if isinstance(e, LimitExceeded):
        status = 413
    elif isinstance(e, KabToolkitError):
        status = 400
    else:
        logger.exception("unexpected error")
        return JSONResponse(status_code=500, content=create_error_response("INTERNAL_ERROR", str(e)))
    return JSONResponse(status_code=status, content=create_error_response(e.code, e.message))


@app.exception_handler(RequestValidationError)
async def validation_handler(request: Request, exc: RequestValidationError):
    return JSONResponse(
        status_code=422,
        content=create_error_response("VALIDATION_ERROR", str(exc.errors())),
    )


# ============================================================
# API
# ============================================================

@app.post("/api/check")
async def check(request: KabRequest):
    """A0 일관성 및 TBox 레이블"""
    try:
        spec = parse_kab(request.kab, check_consistency=False)
        return {"consistent": is_consistent(spec.tbox, spec.a0), "labels": labels_report(spec)}
    except Exception as e:
        return error_response(e)


@app.post("/api/wa")
async def weak_acyclicity(request: KabRequest):
    try:
        graph = dependency_graph(parse_kab(request.kab))
        return {"weakly_acyclic": is_weakly_acyclic(graph), "dot": dependency_graph_to_dot(graph)}
    except Exception as e:
        return error_response(e)


@app.post("/api/build")
async def build(request: BuildRequest):
    """전이 시스템 JSON (CLI --json과 같은 스키마)"""
    try:
        spec = parse_kab(request.kab, check_consistency=False)
        ts = build_ts(spec, request.semantics, request.limits)
        return ts_to_export(ts).model_dump()
    except Exception as e:
        return error_response(e)


@app.post("/api/verify")
async def verify(request: VerifyRequest):
    try:
        spec = parse_kab(request.kab, check_consistency=False)
        properties = parse_properties(request.properties)
        response = verify_properties(
            spec, properties, request.semantics, request.query_mode,
            request.require_it_fragment, request.limits,
        )
        return response.model_dump()
    except Exception as e:
        return error_response(e)


@app.post("/api/repairs")
async def repairs(request: RepairsRequest):
    try:
        spec = parse_kab(request.kab, check_consistency=False)
        abox = parse_abox(request.abox)
        if request.kind == "b":
            found = b_repairs(abox, spec.tbox)
        else:
            found = (c_repair(abox, spec.tbox),)
        return {"repairs": [[str(a) for a in r.assertions] for r in found]}
    except Exception as e:
        return error_response(e)


@app.post("/api/translate-tau")
async def translate_tau(request: TauRequest):
    try:
        translated = translate_properties(parse_properties(request.properties))
        return {"formulas": [{"name": name, "formula": format_formula(phi)} for name, phi in translated]}
    except Exception as e:
        return error_response(e)


@app.get("/api/health")
async def health():
    """헬스 체크"""
    return {"status": "healthy", "version": VERSION}


# ============================================================
# 메인 실행
# ============================================================

if __name__ == "__main__":
    import uvicorn

    print("=" * 50)
    print("  KAB Verification - Local Server")
    print("=" * 50)
    print()
    print("API endpoints:")
    print("  http://localhost:8000/api/verify")
    print("  http://localhost:8000/docs")
    print()

    uvicorn.run(
        "local_server:app",
        host="0.0.0.0",
        port=8000,
        reload=True
    )
