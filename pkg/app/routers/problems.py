import logging
import uuid
from datetime import datetime
from typing import List, Optional

from fastapi import APIRouter, File, Form, HTTPException, UploadFile
from fastapi.concurrency import run_in_threadpool

from app.commands.base_command import EXIT_USAGE
from app.commands.dispatcher import Dispatcher, exit_code_for
from app.config import settings
from app.logic.errors import SoqeError
from app.logic.graphlib import PRESETS as CLASS_PRESETS
from app.logic.locality import PRESETS as THEORY_PRESETS
from app.models.command import CommandOptions, CommandRequest, CommandType
from app.models.report import Report
from app.services.redis_service import redis_service, report_key

logger = logging.getLogger(__name__)

router = APIRouter()

HISTORY_TTL = 2592000  # 30 days


async def _run(request: CommandRequest) -> Report:
    # traces are a CLI feature; the service never writes files
    request = request.model_copy(update={"options": request.options.model_copy(update={"trace_path": None})})
    key = report_key(request)
    cached = await redis_service.get(key)
    if cached:
        logger.info("serving %s from cache", key)
        return Report(**cached)

    dispatcher = Dispatcher(settings)
    try:
        report = await run_in_threadpool(dispatcher.execute, request)
    except SoqeError as e:
        status = 400 if exit_code_for(e) == EXIT_USAGE else 422
        raise HTTPException(status_code=status, detail=f"{type(e).__name__}: {e}")

    await redis_service.set(key, report.model_dump(), settings.CACHE_TTL_LONG)
    session_id = str(uuid.uuid4())
    await redis_service.set(f"history:{session_id}", {
        "id": session_id,
        "command": request.command.value,
        "arguments": request.arguments,
        "verdict": report.verdict,
        "exit_code": report.exit_code,
        "report": report.render(),
        "timestamp": datetime.now().isoformat(),
    }, HISTORY_TTL)
    return report


@router.post("/run", response_model=Report)
async def run_problem(request: CommandRequest):
    """Run a command on a problem given as text"""
    return await _run(request)


@router.post("/upload", response_model=Report)
async def upload_problem(
    file: UploadFile = File(...),
    command: CommandType = Form(...),
    arguments: Optional[str] = Form(None),
    params: Optional[str] = Form(None),
    theory: Optional[str] = Form(None),
):
    """Run a command on an uploaded problem file"""
    try:
        text = (await file.read()).decode("utf-8")
    except UnicodeDecodeError:
        raise HTTPException(status_code=400, detail=f"{file.filename} is not UTF-8 text")
    options = CommandOptions(
        theory=theory,
        params=[p.strip() for p in (params or "").split(",") if p.strip()],
    )
    request = CommandRequest(problem=text, command=command, arguments=(arguments or "").split(), options=options)
    return await _run(request)


@router.get("/presets")
async def list_presets():
    """Theory and class presets usable in problem files"""
    theories: List[dict] = [
        {"name": name, "axioms": list(axioms), "closure": psi.value}
        for name, (axioms, psi) in THEORY_PRESETS.items()
    ]
    return {"theories": theories, "classes": sorted(CLASS_PRESETS)}
