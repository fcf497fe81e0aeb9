from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from chronochat.dataset.specs import MAX_SESSIONS, MIN_SESSIONS
from chronochat.errors import BadConfig

DEFAULT_MIN_UTTERANCES = 20


class Phase:
    WAITING_FOR_PARTNER = 'WaitingForPartner'
    IN_SESSION = 'InSession'
    BETWEEN_SESSIONS = 'BetweenSessions'
    COMPLETED = 'Completed'

    ALL = (WAITING_FOR_PARTNER, IN_SESSION, BETWEEN_SESSIONS, COMPLETED)


class RoomEventKind:
    JOINED = 'joined'
    UTTERANCE = 'utterance'
    SESSION_ENDED = 'session_ended'
    UPDATES_SHOWN = 'updates_shown'
    SESSION_STARTED = 'session_started'
    COMPLETED = 'completed'


@dataclass(frozen=True)
class RoomConfig:
    num_sessions: int = MAX_SESSIONS
    min_utterances: int = DEFAULT_MIN_UTTERANCES
    seed: int = 0
    pool_path: Optional[str] = None

    def validate(self) -> 'RoomConfig':
        if not MIN_SESSIONS <= self.num_sessions <= MAX_SESSIONS:
            raise BadConfig(f'num_sessions must be between {MIN_SESSIONS} and {MAX_SESSIONS}, '
                            f'got {self.num_sessions}')
        if self.min_utterances < 1:
            raise BadConfig('min_utterances must be at least 1')
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            'num_sessions': self.num_sessions,
            'min_utterances': self.min_utterances,
            'seed': self.seed,
            'pool_path': self.pool_path,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> 'RoomConfig':
        try:
            return cls(num_sessions=int(raw.get('num_sessions', MAX_SESSIONS)),
                       min_utterances=int(raw.get('min_utterances', DEFAULT_MIN_UTTERANCES)),
                       seed=int(raw.get('seed', 0)),
                       pool_path=raw.get('pool_path')).validate()
        except (TypeError, ValueError) as e:
            if isinstance(e, BadConfig):
                raise
            raise BadConfig(f'invalid room config: {e}') from e


@dataclass(frozen=True)
class RoomEvent:
    """
    One entry of a room's append-only log. speaker is the participant the
    event concerns; private holds what only that participant may see.
    """
    seq: int
    kind: str
    speaker: Optional[str] = None
    payload: Mapping[str, Any] = field(default_factory=dict)
    private: Mapping[str, Any] = field(default_factory=dict)

    def view(self, viewer: Optional[str]) -> Dict[str, Any]:
        payload = dict(self.payload)
        if viewer is not None and viewer == self.speaker:
            payload.update(self.private)
        return {'seq': self.seq, 'kind': self.kind, 'speaker': self.speaker, 'payload': payload}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seq': self.seq,
            'kind': self.kind,
            'speaker': self.speaker,
            'payload': dict(self.payload),
            'private': dict(self.private),
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> 'RoomEvent':
        return cls(seq=int(raw['seq']),
                   kind=str(raw['kind']),
                   speaker=raw.get('speaker'),
                   payload=dict(raw.get('payload') or {}),
                   private=dict(raw.get('private') or {}))
