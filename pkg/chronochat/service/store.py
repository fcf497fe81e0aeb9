import json
import logging
import os
import re

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from chronochat.dataset.io import write_corpus
from chronochat.dataset.specs import CORPUS_SUFFIX, Conversation
from chronochat.errors import MalformedDocument, NoSuchRoom

from .specs import RoomEvent

logger = logging.getLogger(__name__)

ROOM_ID_RE = re.compile(r'^room-(\d{6})$')


class RoomStore:
    """
    One directory per room under data_dir/rooms:

      room.json      creation config, written once
      events.log     append-only, one JSON event per line
      snapshot.json  summary rewritten at session boundaries
    """
    path: Path

    def __init__(self, path: Union[str, Path]):
        self.path = path if isinstance(path, Path) else Path(path)
        self.rooms_path = self.path / 'rooms'

    @property
    def corpus_path(self) -> Path:
        return self.path / f'conversations{CORPUS_SUFFIX}'

    def room_path(self, room_id: str) -> Path:
        if not ROOM_ID_RE.match(room_id):
            raise NoSuchRoom(f'no room {room_id}')
        return self.rooms_path / room_id

    def room_ids(self) -> List[str]:
        if not self.rooms_path.exists():
            return []
        return sorted(p.name for p in self.rooms_path.iterdir()
                      if p.is_dir() and ROOM_ID_RE.match(p.name) and (p / 'room.json').exists())

    def next_room_id(self) -> str:
        numbers = [int(ROOM_ID_RE.match(r).group(1)) for r in self.room_ids()]
        return f'room-{max(numbers, default=0) + 1:06d}'

    def exists(self, room_id: str) -> bool:
        return (self.room_path(room_id) / 'room.json').exists()

    def create(self, room_id: str, config: Dict[str, Any]) -> None:
        path = self.room_path(room_id)
        path.mkdir(parents=True, exist_ok=False)
        (path / 'events.log').touch()
        (path / 'room.json').write_text(json.dumps(config, indent=2, sort_keys=True), encoding='utf-8')

    def load_config(self, room_id: str) -> Dict[str, Any]:
        path = self.room_path(room_id) / 'room.json'
        if not path.exists():
            raise NoSuchRoom(f'no room {room_id}')
        try:
            return json.loads(path.read_text(encoding='utf-8'))
        except ValueError as e:
            raise MalformedDocument(f'{path}: {e}') from e

    def append(self, room_id: str, event: RoomEvent, sync: bool = False) -> None:
        """
        Append one event; sync forces it to disk before returning.
        """
        with open(self.room_path(room_id) / 'events.log', 'a', encoding='utf-8') as f:
            f.write(json.dumps(event.to_dict(), sort_keys=True, separators=(',', ':')) + '\n')
            f.flush()
            if sync:
                os.fsync(f.fileno())

    def read_events(self, room_id: str) -> List[RoomEvent]:
        """
        Every committed event. A torn last line left by a crash is ignored.
        """
        path = self.room_path(room_id) / 'events.log'
        if not path.exists():
            return []
        lines = path.read_bytes().split(b'\n')
        events = []
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                events.append(RoomEvent.from_dict(json.loads(line.decode('utf-8'))))
            except (ValueError, KeyError, TypeError) as e:
                if number >= len(lines) - 1:
                    logger.warning('%s: ignoring torn last line %d: %s', path, number, e)
                    break
                raise MalformedDocument(f'{path}:{number}: {e}') from e
        return events

    def save_snapshot(self, room_id: str, snapshot: Dict[str, Any]) -> None:
        path = self.room_path(room_id) / 'snapshot.json'
        tmp = path.with_suffix('.tmp')
        tmp.write_text(json.dumps(snapshot, indent=2, sort_keys=True), encoding='utf-8')
        os.replace(tmp, path)

    def load_snapshot(self, room_id: str) -> Optional[Dict[str, Any]]:
        path = self.room_path(room_id) / 'snapshot.json'
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding='utf-8'))

    def save_conversation(self, conversation: Conversation) -> Path:
        write_corpus([conversation], self.corpus_path, append=True)
        return self.corpus_path
