from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

from chronochat.simulation.temporal import GapBucket


class Attribute:
    NATURALNESS = 'naturalness'
    INFORMATIVENESS = 'informativeness'
    RELEVANCE = 'relevance'
    TIME_AWARENESS = 'time_awareness'

    ALL = (NATURALNESS, INFORMATIVENESS, RELEVANCE, TIME_AWARENESS)


QUESTION_ATTRIBUTE: Dict[int, str] = {
    1: Attribute.NATURALNESS,
    2: Attribute.NATURALNESS,
    3: Attribute.NATURALNESS,
    4: Attribute.INFORMATIVENESS,
    5: Attribute.INFORMATIVENESS,
    6: Attribute.INFORMATIVENESS,
    7: Attribute.RELEVANCE,
    8: Attribute.RELEVANCE,
    9: Attribute.RELEVANCE,
    10: Attribute.TIME_AWARENESS,
    11: Attribute.TIME_AWARENESS,
}

QUESTIONS: Dict[int, str] = {
    1: 'Which dialogue do you think is more natural like two friends updating their daily life?',
    2: 'Which dialogue do you think is more like a dialogue between normal friends?',
    3: 'In which dialogue do you think the speaker B talks more naturally?',
    4: "Which dialogue do you think provide more information about the speakers' daily events?",
    5: 'In which dialogue do you think the speaker B asks annoying questions more frequently '
       'about events that have no significant progress?',
    6: "In which dialogue do you think the speaker B cares more about speaker A's daily events?",
    7: 'Does the speaker asks/talks about relevant events?',
    8: 'Which dialogue do you think sticks to the topics of updating events?',
    9: 'In which dialogue do you think the speaker chooses natural, relevant events to talk about?',
    10: 'In which dialogue do you think speaker B can identify a time gap?',
    11: 'In which dialogue do you think speaker B is aware of the progress of relevant events?',
}

# choosing a dialogue here counts against it
REVERSE_KEYED = frozenset({5})

# questions that ask for a written justification
JUSTIFIED_QUESTIONS = frozenset({3, 6, 9, 11})

CHOICES = ('left', 'right')


@dataclass(frozen=True)
class Judgment:
    """
    One annotator's answer to one question of a pairwise comparison task.
    transcript is the evaluated text, used to spot copied justifications.
    """
    task_id: str
    annotator_id: str
    question_id: int
    choice: str
    left_model: str
    right_model: str
    justification: str = ''
    work_seconds: float = 0.0
    gap_bucket: Optional[GapBucket] = None
    transcript: str = ''

    @property
    def attribute(self) -> str:
        return QUESTION_ATTRIBUTE[self.question_id]

    @property
    def chosen_model(self) -> str:
        return self.left_model if self.choice == 'left' else self.right_model

    @property
    def preferred_model(self) -> str:
        """The model this answer speaks for once reverse keying is applied."""
        if self.question_id in REVERSE_KEYED:
            return self.right_model if self.choice == 'left' else self.left_model
        return self.chosen_model

    def to_dict(self) -> Dict[str, Any]:
        return {
            'task_id': self.task_id,
            'annotator_id': self.annotator_id,
            'question_id': self.question_id,
            'choice': self.choice,
            'left_model': self.left_model,
            'right_model': self.right_model,
            'justification': self.justification,
            'work_seconds': self.work_seconds,
            'gap_bucket': self.gap_bucket.label if self.gap_bucket is not None else None,
        }


class DropReason:
    SHORT_WORK_TIME = 'short_work_time'
    TOO_FEW_CONTENT_TOKENS = 'too_few_content_tokens'
    REPETITIVE_JUSTIFICATION = 'repetitive_justification'
    COPIED_JUSTIFICATION = 'copied_justification'


@dataclass(frozen=True)
class DroppedJudgment:
    judgment: Judgment
    reason: str


@dataclass(frozen=True)
class ComparisonReport:
    """
    Net preference of model over baseline per attribute, in percent.
    Positive numbers favour the model.
    """
    model: str
    baseline: str
    scores: Mapping[str, float]
    total: float
    counts: Mapping[str, int] = field(default_factory=dict)
    kappa: Optional[float] = None
    retained: int = 0
    filtered: int = 0
    notes: Tuple[str, ...] = ()

    def row(self) -> List[Optional[float]]:
        return [self.scores.get(attribute) for attribute in Attribute.ALL] + [self.total]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'model': self.model,
            'baseline': self.baseline,
            'scores': {a: self.scores[a] for a in Attribute.ALL if a in self.scores},
            'total': self.total,
            'counts': dict(self.counts),
            'kappa': self.kappa,
            'retained': self.retained,
            'filtered': self.filtered,
            'notes': list(self.notes),
        }


@dataclass(frozen=True)
class BucketRow:
    bucket: GapBucket
    sessions: int
    judgments: int
    scores: Mapping[str, float]
    total: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'bucket': self.bucket.label,
            'sessions': self.sessions,
            'judgments': self.judgments,
            'scores': dict(self.scores),
            'total': self.total,
        }
