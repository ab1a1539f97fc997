from fastapi import FastAPI, Depends, Header, HTTPException, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from typing import List, Literal
import os

from cli_reporting import (
    DEFAULT_TOL,
    ProblemFile,
    RunRecord,
    load_env_file,
    run_compare,
    run_solve,
    run_sweep,
)
from fuzzy_core import PossibilisticError

load_env_file()

# ---------- FastAPI ----------
app = FastAPI(title="Possibilistic coinsurance")

# ---------- Security ----------
API_KEY = os.getenv("API_KEY", "")

def require_key(x_api_key: str = Header(default="")):
    if not API_KEY or x_api_key != API_KEY:
        raise HTTPException(status_code=401, detail="Unauthorized")

@app.exception_handler(PossibilisticError)
def possibilistic_error_handler(request: Request, exc: PossibilisticError):
    return JSONResponse(status_code=422, content={"detail": str(exc), "error": type(exc).__name__})

# ---------- Schemas ----------
class SweepIn(BaseModel):
    problem: ProblemFile
    param: Literal["lambda", "c"]
    start: float
    stop: float
    steps: int = Field(ge=2)
    tol: float = Field(DEFAULT_TOL, gt=0)

class CompareIn(BaseModel):
    problem: ProblemFile
    operators: List[str] = Field(default_factory=lambda: ["t1", "t2"], min_length=2)
    tol: float = Field(DEFAULT_TOL, gt=0)

# ---------- Endpoints ----------
@app.get("/health")
def health():
    return {"ok": True}

@app.post("/solve", response_model=List[RunRecord], dependencies=[Depends(require_key)])
def solve(problem: ProblemFile, tol: float = Query(DEFAULT_TOL, gt=0)):
    """Exact and approximate optimal coinsurance rate for one problem"""
    return run_solve(problem, tol)

@app.post("/sweep", response_model=List[RunRecord], dependencies=[Depends(require_key)])
def sweep(body: SweepIn):
    """One record per grid point of lambda or of the mixture weight c"""
    return run_sweep(body.problem, body.param, body.start, body.stop, body.steps, body.tol)

@app.post("/compare", response_model=List[RunRecord], dependencies=[Depends(require_key)])
def compare(body: CompareIn):
    return run_compare(body.problem, body.operators, body.tol)
