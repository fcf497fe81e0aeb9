from typing import Iterable, Sequence, Tuple

from chronochat.simulation.specs import ProgressLabel
from chronochat.utils import content_words

MENTION_SHARE = 0.5

SessionPair = Tuple[Sequence[Tuple[str, ProgressLabel]], Sequence[str]]


def mentions(description: str, utterance: str) -> bool:
    """
    True when at least half of the event's content words occur in the utterance.
    """
    wanted = set(content_words(description))
    if not wanted:
        return False
    found = wanted & set(content_words(utterance))
    return len(found) >= MENTION_SHARE * len(wanted)


def selects_correctly(labels: Sequence[Tuple[str, ProgressLabel]], follow_up: Sequence[str]) -> bool:
    stalled = [d for d, label in labels if label == ProgressLabel.NO_SIGNIFICANT_PROGRESS]
    return not any(mentions(d, u) for d in stalled for u in follow_up)


def count_correct_event_selection(session_pairs: Iterable[SessionPair]) -> int:
    """
    Number of follow-up sessions that never bring up an event which made
    no significant progress.
    """
    return sum(selects_correctly(labels, follow_up) for labels, follow_up in session_pairs)
