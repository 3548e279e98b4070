"""HTTP front end over the same drivers as the command line.  Sources travel
in the request body; nothing touches the file system.

    uvicorn tfkernel.service:app
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from tfkernel import __version__, cli_io
from tfkernel.tf_check import DEFAULT_FUEL, SPAR_TWO


class Source(BaseModel):
    name: str
    text: str


class RunRequest(BaseModel):
    command: Literal[cli_io.COMMANDS]  # type: ignore[valid-type]
    files: list[Source] = Field(min_length=1)
    includes: list[Source] = []
    fuel: int = Field(DEFAULT_FUEL, ge=0)
    strict_unknown: bool = False
    dialect: Literal["tf", "tfk", "lf"] | None = None
    profile: Literal["spar2", "sparw"] | None = None
    to: Literal["tf", "tfk", "lf"] | None = None


class ReportLine(BaseModel):
    status: Literal["ok", "error", "unknown"]
    item: str
    detail: str


class RunResponse(BaseModel):
    exit_code: int
    lines: list[ReportLine]
    text: str
    output: str = ""


app = FastAPI(title="tfkernel", version=__version__)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/commands")
def commands() -> list[str]:
    return list(cli_io.COMMANDS)


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest) -> RunResponse:
    texts: dict[str, str] = {}
    for s in req.includes + req.files:
        if s.name in texts and texts[s.name] != s.text:
            raise HTTPException(422, f"two different sources named {s.name}")
        texts[s.name] = s.text
    flags = cli_io.Flags(
        fuel=req.fuel,
        strict_unknown=req.strict_unknown,
        includes=tuple(s.name for s in req.includes),
        dialect=req.dialect,
        profile=cli_io.PROFILES[req.profile] if req.profile else SPAR_TWO,
        target=req.to,
    )
    rep = cli_io.run_command(req.command, [s.name for s in req.files], flags, texts.__getitem__)
    lines = [ReportLine(status=ln.status, item=ln.item, detail=ln.detail) for ln in rep.lines]
    return RunResponse(exit_code=rep.exit_code, lines=lines, text=rep.text(), output=rep.output)
