"""
Language-model gateway: prompt templates, chat-completion backends and
strict reply parsers.

Exports:
- TemplateLibrary, render_prompt
- BackendConfig, HttpBackend, MockBackend, complete
- extract_events, estimate_event_duration, generate_event_schedule
"""
__version__ = "0.1.0"
__author__ = "chronochat contributors"

from .specs import (
    BackendConfig,
    BackendMode,
    ExtractedEvent,
    ExtractionResult,
    ExtractionStyle,
    FixtureRecord,
    PromptTemplate,
)
from .templates import TemplateLibrary, default_library, render_messages, render_prompt
from .backend import (
    REFERENCE_FIXTURES,
    ChatBackend,
    HttpBackend,
    MockBackend,
    RateLimiter,
    complete,
    create_backend,
    dump_fixture_records,
    fixture_key,
    load_fixture_records,
    resolve_backend,
)
from .extraction import (
    author_life_event,
    estimate_event_duration,
    extract_events,
    generate_event_schedule,
    generate_session_transcript,
    parse_event_lines,
    parse_schedule_reply,
    parse_slot_filling,
    propose_life_events,
)

__all__ = [
    "BackendConfig",
    "BackendMode",
    "ChatBackend",
    "ExtractedEvent",
    "ExtractionResult",
    "ExtractionStyle",
    "FixtureRecord",
    "HttpBackend",
    "MockBackend",
    "PromptTemplate",
    "REFERENCE_FIXTURES",
    "RateLimiter",
    "TemplateLibrary",
    "author_life_event",
    "complete",
    "create_backend",
    "default_library",
    "dump_fixture_records",
    "estimate_event_duration",
    "extract_events",
    "fixture_key",
    "generate_event_schedule",
    "generate_session_transcript",
    "load_fixture_records",
    "resolve_backend",
    "parse_event_lines",
    "parse_schedule_reply",
    "parse_slot_filling",
    "propose_life_events",
    "render_messages",
    "render_prompt",
]
