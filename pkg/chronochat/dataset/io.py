"""
Line-delimited conversation files. One conversation per line:

  {"id": "...", "split": "train",
   "sessions": [{"index": 1, "gap_before": null,
                 "events_shown": {"A": [...], "B": [...]},
                 "utterances": [{"speaker": "A", "text": "..."}]}, ...],
   "metadata": {...}}
"""

import json
import logging

from pathlib import Path
from typing import Any, Dict, Iterable, List, Tuple, Union

from chronochat.errors import ChronochatError, InvariantViolation, MalformedDocument, MissingFile, UnparseableText
from chronochat.simulation.temporal import parse_duration

from .specs import (
    MAX_SESSIONS,
    MIN_SESSIONS,
    SPLITS,
    Conversation,
    ImportIssue,
    SessionRecord,
    Utterance,
)

logger = logging.getLogger(__name__)

SPEAKER_IDS = ('A', 'B')


def validate_conversation(conv: Conversation) -> None:
    """
    Raise InvariantViolation naming the first rule the conversation breaks.
    """
    if not MIN_SESSIONS <= len(conv.sessions) <= MAX_SESSIONS:
        raise InvariantViolation(conv.id, 'session-count',
                                 f'{conv.id}: {len(conv.sessions)} sessions, '
                                 f'{MIN_SESSIONS} to {MAX_SESSIONS} allowed')
    if conv.split not in SPLITS:
        raise InvariantViolation(conv.id, 'split', f'{conv.id}: unknown split {conv.split!r}')

    for position, session in enumerate(conv.sessions, start=1):
        if session.index != position:
            raise InvariantViolation(conv.id, 'session-index')
        if position == 1 and session.gap_before is not None:
            raise InvariantViolation(conv.id, 'first-session-gap')
        if position > 1 and (session.gap_before is None or session.gap_before.minutes < 1):
            raise InvariantViolation(conv.id, 'gap-required')
        for utterance in session.utterances:
            if utterance.speaker not in SPEAKER_IDS:
                raise InvariantViolation(conv.id, 'speaker')
            if not utterance.text.strip():
                raise InvariantViolation(conv.id, 'non-empty-utterance')


def export_conversation(conv: Conversation) -> str:
    validate_conversation(conv)
    return json.dumps(conv.to_dict(), ensure_ascii=False, separators=(',', ':'))


def conversation_from_dict(raw: Dict[str, Any]) -> Conversation:
    try:
        sessions = []
        for s in raw['sessions']:
            gap = s.get('gap_before')
            sessions.append(SessionRecord(
                index=int(s['index']),
                utterances=tuple(Utterance(speaker=str(u['speaker']), text=str(u['text']))
                                 for u in s.get('utterances') or []),
                gap_before=parse_duration(gap) if gap is not None else None,
                events_shown={str(k): tuple(str(d) for d in v)
                              for k, v in (s.get('events_shown') or {}).items()},
            ))
        conv = Conversation(id=str(raw['id']),
                            sessions=tuple(sessions),
                            split=str(raw.get('split', 'train')),
                            metadata=dict(raw.get('metadata') or {}))
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        if isinstance(e, ChronochatError):
            raise
        raise MalformedDocument(f'bad conversation record: {e!r}') from e
    validate_conversation(conv)
    return conv


def import_conversation(line: str) -> Conversation:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedDocument(f'invalid JSON: {e}') from e
    if not isinstance(raw, dict):
        raise MalformedDocument('a conversation record must be an object')
    return conversation_from_dict(raw)


def _decode_line(raw: bytes) -> str:
    try:
        return raw.decode('utf-8')
    except UnicodeDecodeError as e:
        raise UnparseableText(f'line is not valid UTF-8: {e}') from e


def import_conversations(path: Union[str, Path]) -> Tuple[List[Conversation], List[ImportIssue]]:
    """
    Parse every non-blank line; bad lines land in the report with their
    line numbers instead of stopping the import.
    """
    path = Path(path)
    if not path.exists():
        raise MissingFile(f'corpus file {path} does not exist')

    conversations: List[Conversation] = []
    report: List[ImportIssue] = []
    with open(path, 'rb') as f:
        for number, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            try:
                conversations.append(import_conversation(_decode_line(raw)))
            except ChronochatError as e:
                report.append(ImportIssue(line_number=number, error=type(e).__name__, detail=str(e)))

    if report:
        logger.warning('%s: %d malformed lines out of %d records',
                       path, len(report), len(report) + len(conversations))
    return conversations, report


def write_corpus(conversations: Iterable[Conversation], path: Union[str, Path], append: bool = False) -> int:
    lines = [export_conversation(c) for c in conversations]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'a' if append else 'w', encoding='utf-8') as f:
        for line in lines:
            f.write(line + '\n')
    logger.info('wrote %d conversations to %s', len(lines), path)
    return len(lines)
