"""
FastAPI app hosting chronochat chat rooms
"""

import os
import logging

from pathlib import Path
from contextlib import asynccontextmanager
from typing import Optional, Union

from fastapi import FastAPI, Header, Query, Request
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles
from prometheus_client import generate_latest, CONTENT_TYPE_LATEST
from pydantic import BaseModel

from chronochat.errors import (
    BadConfig,
    ChronochatError,
    EmptyText,
    InvalidToken,
    NoSuchRoom,
    RoomFull,
    TooFewUtterances,
    WrongPhase,
)
from chronochat.metrics import CHRONOCHAT_METRICS
from chronochat.service import DEFAULT_MIN_UTTERANCES, RoomConfig, RoomManager, RoomStore, TokenSigner
from chronochat.simulation.catalog import REFERENCE_POOL
from .logging_config import setup_logging

CONFIG_DIR = os.environ.get("CHRONOCHAT_CONFIG_DIR", "./config")
DATA_DIR = os.environ.get("CHRONOCHAT_DATA_DIR", "./data")
BIND_ADDR = os.environ.get("CHRONOCHAT_BIND_ADDR", "127.0.0.1:8000")
POOL_PATH = os.environ.get("CHRONOCHAT_POOL", str(REFERENCE_POOL))
POLL_WAIT = float(os.environ.get("CHRONOCHAT_POLL_WAIT", 25))
LOGGING_CONFIG = os.environ.get("CHRONOCHAT_LOGGING_CONFIG", CONFIG_DIR+"/logging.yaml")
UI_DIR = Path(os.environ.get("CHRONOCHAT_UI_DIR", Path(__file__).resolve().parent.parent / "chat_ui"))

STATUS_CODES = {
    NoSuchRoom: 404,
    RoomFull: 409,
    WrongPhase: 409,
    TooFewUtterances: 409,
    InvalidToken: 401,
    BadConfig: 400,
    EmptyText: 400,
}

logger = logging.getLogger(__name__)


class CreateRoomRequest(BaseModel):
    num_sessions: int = 5
    min_utterances: int = DEFAULT_MIN_UTTERANCES
    seed: int = 0


class JoinRequest(BaseModel):
    display_name: str = ''


class UtteranceRequest(BaseModel):
    text: str = ''
    token: Optional[str] = None


class TokenRequest(BaseModel):
    token: Optional[str] = None


def bearer(authorization: Optional[str], *fallbacks: Optional[str]) -> Optional[str]:
    """
    Token from an Authorization: Bearer header, else the first fallback given
    """
    if authorization and authorization.lower().startswith('bearer '):
        return authorization[7:].strip()
    return next((t for t in fallbacks if t), None)


def status_for(error: ChronochatError) -> int:
    for cls in type(error).__mro__:
        if cls in STATUS_CODES:
            return STATUS_CODES[cls]
    return 400


def create_app(data_dir: Union[str, Path] = DATA_DIR,
               pool_path: Union[str, Path] = POOL_PATH,
               poll_wait: float = POLL_WAIT,
               logging_config: Optional[str] = LOGGING_CONFIG) -> FastAPI:

    data_dir = Path(data_dir)
    manager = RoomManager(store=RoomStore(data_dir),
                          signer=TokenSigner.from_env(data_dir),
                          pool_path=pool_path)

    @asynccontextmanager
    async def lifespan(chronochat_app: FastAPI):
        setup_logging(logging_config)
        CHRONOCHAT_METRICS.init_metrics()
        logger.info("Serving chat rooms from %s with pool %s", data_dir, pool_path)

        logger.info("Registered routes:")
        for r in chronochat_app.routes:
            methods = getattr(r, "methods", None)
            logger.info("%-40s %s", r.path, methods)
        yield

    app = FastAPI(title="Chronochat", lifespan=lifespan)
    app.state.manager = manager

    @app.exception_handler(ChronochatError)
    async def domain_error(request: Request, exc: ChronochatError):
        status = status_for(exc)
        logger.info('%s %s rejected with %d: %s', request.method, request.url.path, status, exc)
        return JSONResponse(exc.to_dict(), status_code=status)

    @app.get("/health")
    def health():
        return PlainTextResponse("ok", status_code=200)

    @app.get("/metrics")
    def metrics():
        return Response(generate_latest(), media_type=CONTENT_TYPE_LATEST)

    @app.post("/rooms")
    async def create_room(body: CreateRoomRequest):
        config = RoomConfig(num_sessions=body.num_sessions, min_utterances=body.min_utterances, seed=body.seed)
        return await manager.create_room(config)

    @app.post("/rooms/{room_id}/join")
    async def join_room(room_id: str, body: Optional[JoinRequest] = None):
        return await manager.join(room_id, (body or JoinRequest()).display_name)

    @app.post("/rooms/{room_id}/utterances")
    async def post_utterance(room_id: str,
                             body: UtteranceRequest,
                             authorization: Optional[str] = Header(default=None),
                             token: Optional[str] = Query(default=None)):
        return await manager.post_utterance(room_id, bearer(authorization, body.token, token), body.text)

    @app.post("/rooms/{room_id}/end-session")
    async def end_session(room_id: str,
                          body: Optional[TokenRequest] = None,
                          authorization: Optional[str] = Header(default=None),
                          token: Optional[str] = Query(default=None)):
        return await manager.end_session(room_id, bearer(authorization, body.token if body else None, token))

    @app.post("/rooms/{room_id}/next-session")
    async def next_session(room_id: str,
                           body: Optional[TokenRequest] = None,
                           authorization: Optional[str] = Header(default=None),
                           token: Optional[str] = Query(default=None)):
        return await manager.start_next_session(room_id,
                                                bearer(authorization, body.token if body else None, token))

    @app.get("/rooms/{room_id}/state")
    async def room_state(room_id: str,
                         authorization: Optional[str] = Header(default=None),
                         token: Optional[str] = Query(default=None)):
        return await manager.state(room_id, bearer(authorization, token))

    @app.get("/rooms/{room_id}/events")
    async def poll_events(room_id: str,
                          since: int = 0,
                          wait: Optional[float] = None,
                          authorization: Optional[str] = Header(default=None),
                          token: Optional[str] = Query(default=None)):
        timeout = poll_wait if wait is None else min(max(wait, 0.0), poll_wait)
        events = await manager.poll_events(room_id, bearer(authorization, token), since, timeout)
        return {"events": events, "last_seq": events[-1]["seq"] if events else since}

    index_page = UI_DIR / "index.html"
    if (UI_DIR / "dist").is_dir():
        app.mount("/static", StaticFiles(directory=UI_DIR / "dist"), name="static")

    @app.get("/")
    def index():
        """ Chat room page, when the browser client is available """
        if not index_page.exists():
            return PlainTextResponse("chat UI is not installed", status_code=404)
        return HTMLResponse(index_page.read_text(encoding="utf-8"), status_code=200)

    return app


def serve(bind_addr: str = BIND_ADDR, **kwargs) -> None:
    import uvicorn

    host, _, port = bind_addr.rpartition(":")
    uvicorn.run(create_app(**kwargs), host=host or "127.0.0.1", port=int(port))
