from typing import Optional

from fastapi import APIRouter, HTTPException
from app.services.redis_service import redis_service

router = APIRouter()

@router.get("/")
async def get_history(command: Optional[str] = None):
    """Get past runs, newest first, optionally only those of one command"""
    try:
        keys = await redis_service.keys("history:*")
        history = []

        for key in keys:
            run = await redis_service.get(key)
            if run and (command is None or run.get("command") == command):
                history.append(run)

        # Sort by timestamp descending
        history.sort(key=lambda x: x.get("timestamp", ""), reverse=True)

        return {"history": history}
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))

@router.get("/{run_id}")
async def get_run(run_id: str):
    """Get one stored run with its rendered report"""
    try:
        run = await redis_service.get(f"history:{run_id}")
        if not run:
            raise HTTPException(status_code=404, detail="Run not found")
        return run
    except HTTPException:
        raise
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))

@router.delete("/{run_id}")
async def delete_run(run_id: str):
    """Delete a stored run"""
    try:
        success = await redis_service.delete(f"history:{run_id}")
        if not success:
            raise HTTPException(status_code=404, detail="Run not found")
        return {"success": True}
    except HTTPException:
        raise
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))

@router.delete("/")
async def clear_history():
    """Clear all stored runs"""
    try:
        keys = await redis_service.keys("history:*")
        for key in keys:
            await redis_service.delete(key)
        return {"success": True, "deleted": len(keys)}
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
