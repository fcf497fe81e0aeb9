"""
Best-effort adapter from the public GapChat release into chronochat
conversations.

The release follows the MSC layout: one JSON object per dialogue with the
final session under "dialog" and earlier sessions under
"previous_dialogs", gaps given as "time_num"/"time_unit". Fields that have
no place in a Conversation end up in its metadata and are logged.
"""

import json
import logging

from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from chronochat.errors import MissingFile
from chronochat.simulation.temporal import Duration, parse_duration

from .io import validate_conversation
from .specs import Conversation, ImportIssue, SessionRecord, Utterance

logger = logging.getLogger(__name__)

SPEAKER_MAP = {'speaker 1': 'A', 'speaker 2': 'B', 'a': 'A', 'b': 'B', 'bot_0': 'A', 'bot_1': 'B'}

SESSION_FIELDS = {'dialog', 'time_num', 'time_unit', 'gap', 'time_back', 'events', 'personas'}
DIALOGUE_FIELDS = {'dialog', 'previous_dialogs', 'id', 'dialog_id', 'split', 'metadata'} | SESSION_FIELDS


def _records(path: Path) -> Iterator[Tuple[Path, int, Dict[str, Any]]]:
    text = path.read_text(encoding='utf-8')
    stripped = text.lstrip()
    if stripped.startswith('['):
        for i, raw in enumerate(json.loads(text), start=1):
            yield path, i, raw
        return
    for i, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield path, i, json.loads(line)


def _gap(raw: Dict[str, Any]) -> Optional[Duration]:
    if raw.get('time_num') is not None and raw.get('time_unit'):
        unit = str(raw['time_unit']).rstrip('s')
        return parse_duration(f'{int(raw["time_num"])} {unit}')
    for key in ('gap', 'time_back'):
        if raw.get(key):
            return parse_duration(str(raw[key]))
    return None


def _utterances(turns: List[Dict[str, Any]]) -> Tuple[Utterance, ...]:
    utterances = []
    for position, turn in enumerate(turns):
        name = str(turn.get('id', turn.get('speaker', ''))).strip().lower()
        speaker = SPEAKER_MAP.get(name, 'AB'[position % 2])
        text = str(turn.get('text', '')).strip()
        if text:
            utterances.append(Utterance(speaker=speaker, text=text))
    return tuple(utterances)


def _events(raw: Dict[str, Any]) -> Dict[str, Tuple[str, ...]]:
    events = raw.get('events') or {}
    if not isinstance(events, dict):
        return {}
    return {SPEAKER_MAP.get(str(k).lower(), str(k)): tuple(str(e) for e in v) for k, v in events.items()}


def convert_dialogue(raw: Dict[str, Any], fallback_id: str) -> Conversation:
    """
    Map one release record onto a Conversation. The previous session's
    gap field describes the time before the session that follows it.
    """
    previous = raw.get('previous_dialogs') or []
    raw_sessions = list(previous) + [raw]

    unmapped: Dict[str, Any] = {}
    for key in sorted(set(raw) - DIALOGUE_FIELDS):
        unmapped[key] = raw[key]
    for position, session in enumerate(previous, start=1):
        for key in sorted(set(session) - SESSION_FIELDS):
            unmapped[f'session{position}.{key}'] = session[key]

    sessions = []
    for index, session in enumerate(raw_sessions, start=1):
        gap = None
        if index > 1:
            gap = _gap(raw_sessions[index - 2]) or _gap(session)
        sessions.append(SessionRecord(index=index,
                                      utterances=_utterances(session.get('dialog') or []),
                                      gap_before=gap,
                                      events_shown=_events(session)))

    conv_id = str(raw.get('id') or raw.get('dialog_id') or fallback_id)
    if unmapped:
        logger.warning('%s: unmapped fields kept in metadata: %s', conv_id, ', '.join(unmapped))

    metadata = dict(raw.get('metadata') or {})
    metadata.update({'source': 'gapchat', 'unmapped': unmapped} if unmapped else {'source': 'gapchat'})
    conv = Conversation(id=conv_id,
                        sessions=tuple(sessions),
                        split=str(raw.get('split', 'train')),
                        metadata=metadata)
    validate_conversation(conv)
    return conv


def import_gapchat(directory: Union[str, Path]) -> Tuple[List[Conversation], List[ImportIssue]]:
    """
    Convert every .json/.jsonl file under directory. A file named after a
    split (train, valid, test) labels its dialogues with that split.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFile(f'GapChat directory {directory} does not exist')

    conversations: List[Conversation] = []
    report: List[ImportIssue] = []
    files = sorted(p for p in directory.rglob('*') if p.suffix in ('.json', '.jsonl'))
    for path in files:
        split = next((s for s in ('train', 'valid', 'test') if s in path.stem.lower()), None)
        try:
            records = list(_records(path))
        except (ValueError, UnicodeDecodeError) as e:
            logger.warning('%s: unreadable file: %s', path, e)
            report.append(ImportIssue(line_number=0, error='MalformedDocument', detail=f'{path}: {e}'))
            continue

        for _, number, raw in records:
            if not isinstance(raw, dict):
                report.append(ImportIssue(line_number=number, error='MalformedDocument',
                                          detail=f'{path.name}: record is not an object'))
                continue
            if split and 'split' not in raw:
                raw = dict(raw, split=split)
            try:
                conversations.append(convert_dialogue(raw, fallback_id=f'{path.stem}-{number}'))
            except (ValueError, TypeError, AttributeError) as e:
                report.append(ImportIssue(line_number=number, error=type(e).__name__,
                                          detail=f'{path.name}: {e}'))

    logger.info('imported %d GapChat dialogues from %d files, %d rejected',
                len(conversations), len(files), len(report))
    return conversations, report
