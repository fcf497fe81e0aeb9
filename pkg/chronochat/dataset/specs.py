from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from chronochat.simulation.temporal import Duration

SPLITS = ('train', 'valid', 'test')
SPLIT_RATIOS: Dict[str, float] = {'train': 0.7, 'valid': 0.1, 'test': 0.2}

MIN_SESSIONS = 3
MAX_SESSIONS = 5

CORPUS_SUFFIX = '.chrono.jsonl'


@dataclass(frozen=True)
class Utterance:
    speaker: str
    text: str

    def to_dict(self) -> Dict[str, Any]:
        return {'speaker': self.speaker, 'text': self.text}


@dataclass(frozen=True)
class SessionRecord:
    """
    One session of a conversation. gap_before is the simulated time since
    the previous session and is absent for the first one.
    """
    index: int
    utterances: Tuple[Utterance, ...] = ()
    gap_before: Optional[Duration] = None
    events_shown: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'index': self.index,
            'gap_before': str(self.gap_before) if self.gap_before is not None else None,
            'events_shown': {speaker: list(self.events_shown[speaker]) for speaker in sorted(self.events_shown)},
            'utterances': [u.to_dict() for u in self.utterances],
        }


@dataclass(frozen=True)
class Conversation:
    id: str
    sessions: Tuple[SessionRecord, ...]
    split: str = 'train'
    metadata: Mapping[str, Any] = field(default_factory=dict)

    @property
    def utterance_count(self) -> int:
        return sum(len(s.utterances) for s in self.sessions)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'split': self.split,
            'sessions': [s.to_dict() for s in self.sessions],
            'metadata': {k: self.metadata[k] for k in sorted(self.metadata)},
        }


@dataclass(frozen=True)
class ImportIssue:
    line_number: int
    error: str
    detail: str

    def to_dict(self) -> Dict[str, Any]:
        return {'line': self.line_number, 'error': self.error, 'detail': self.detail}


@dataclass(frozen=True)
class CorpusStats:
    """
    Dialogue and utterance totals keyed by the number of sessions per
    dialogue, plus the number of dialogues in each split.
    """
    dialogues_by_sessions: Mapping[int, int] = field(default_factory=dict)
    utterances_by_sessions: Mapping[int, int] = field(default_factory=dict)
    split_counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def total_dialogues(self) -> int:
        return sum(self.dialogues_by_sessions.values())

    @property
    def total_utterances(self) -> int:
        return sum(self.utterances_by_sessions.values())

    def split_deviation(self) -> Dict[str, float]:
        """Distance of each split from its expected share, in conversations."""
        total = sum(self.split_counts.values())
        return {split: abs(self.split_counts.get(split, 0) - ratio * total)
                for split, ratio in SPLIT_RATIOS.items()}

    def split_within_tolerance(self, tolerance: float = 1.0) -> bool:
        return all(d <= tolerance for d in self.split_deviation().values())

    def __add__(self, other: 'CorpusStats') -> 'CorpusStats':
        if not isinstance(other, CorpusStats):
            return NotImplemented

        def merged(a: Mapping, b: Mapping) -> Dict:
            return {k: a.get(k, 0) + b.get(k, 0) for k in sorted(set(a) | set(b))}

        return CorpusStats(dialogues_by_sessions=merged(self.dialogues_by_sessions, other.dialogues_by_sessions),
                           utterances_by_sessions=merged(self.utterances_by_sessions, other.utterances_by_sessions),
                           split_counts=merged(self.split_counts, other.split_counts))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'rows': [{'sessions': n,
                      'dialogues': self.dialogues_by_sessions[n],
                      'utterances': self.utterances_by_sessions.get(n, 0)}
                     for n in sorted(self.dialogues_by_sessions)],
            'total': {'dialogues': self.total_dialogues, 'utterances': self.total_utterances},
            'splits': dict(self.split_counts),
            'split_within_tolerance': self.split_within_tolerance(),
        }
