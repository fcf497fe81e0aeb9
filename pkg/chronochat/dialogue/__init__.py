"""
Time-aware dialogue: model input layout, session memory and multi-session
self-chat.
"""
__version__ = "0.1.0"
__author__ = "chronochat contributors"

from .context import (
    DEFAULT_BUDGET,
    ContextBlock,
    ContextMode,
    build_context,
    parse_context,
    render_context,
)
from .memory import DEFAULT_TOP_K, SessionDocument, SessionMemory, retrieve_top_k, store_session_document
from .agents import ChatAgent, LlmChatAgent, MockChatAgent
from .selfchat import (
    CLOSING_EXCHANGE,
    SelfChatConfig,
    load_opening_scripts,
    plan_self_chat,
    run_batch,
    run_self_chat,
    run_whole_session_chat,
)

__all__ = [
    "CLOSING_EXCHANGE",
    "ChatAgent",
    "ContextBlock",
    "ContextMode",
    "DEFAULT_BUDGET",
    "DEFAULT_TOP_K",
    "LlmChatAgent",
    "MockChatAgent",
    "SelfChatConfig",
    "SessionDocument",
    "SessionMemory",
    "build_context",
    "load_opening_scripts",
    "parse_context",
    "plan_self_chat",
    "render_context",
    "retrieve_top_k",
    "run_batch",
    "run_self_chat",
    "run_whole_session_chat",
    "store_session_document",
]
