"""
Exception hierarchy shared by every chronochat subpackage.

All domain failures derive from ChronochatError, itself a ValueError, so
callers that only know about ValueError keep working.
"""

from typing import Any, Dict, List, Optional


class ChronochatError(ValueError):
    """Base class for every domain error raised by chronochat."""

    def to_dict(self) -> Dict[str, Any]:
        return {'error': type(self).__name__, 'detail': str(self)}


# temporal

class UnparseableText(ChronochatError):
    pass


class UnrecognizedUnit(ChronochatError):
    pass


class NonPositiveQuantity(ChronochatError):
    pass


class ZeroGap(ChronochatError):
    pass


# event catalog / timeline

class MissingFile(ChronochatError):
    pass


class MalformedDocument(ChronochatError):
    pass


class InvariantViolation(ChronochatError):
    """
    A document or record broke a named rule.
    subject_id identifies the offending event, conversation or record.
    """

    def __init__(self, subject_id: Any, rule: str, message: str = ''):
        self.subject_id = subject_id
        self.rule = rule
        super().__init__(message or f'{subject_id}: violates {rule}')

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result['subject_id'] = self.subject_id
        result['rule'] = self.rule
        return result


class NoSuchSchedule(ChronochatError):
    pass


class PoolExhausted(ChronochatError):
    pass


class HorizonTooShort(ChronochatError):
    pass


class BeyondHorizon(ChronochatError):
    pass


# progress

class ZeroDuration(ChronochatError):
    pass


class EmptyItems(ChronochatError):
    pass


# llm gateway

class UnknownTemplate(ChronochatError):
    pass


class MissingSlot(ChronochatError):

    def __init__(self, slot: str, template: str = ''):
        self.slot = slot
        self.template = template
        super().__init__(f'template {template!r} is missing slot {slot!r}')


class BackendError(ChronochatError):
    pass


class Timeout(BackendError):
    pass


class HttpError(BackendError):

    def __init__(self, status: int, body: str = ''):
        self.status = status
        self.body = body
        super().__init__(f'chat completion failed with status {status}: {body[:200]}')


class RateLimited(BackendError):
    pass


class MissingFixture(BackendError):

    def __init__(self, key: str):
        self.key = key
        super().__init__(f'no recorded reply for fixture key {key}')


class EmptyReply(ChronochatError):
    pass


class NoDurationInReply(ChronochatError):
    pass


class NoParsableSteps(ChronochatError):
    pass


# dialogue engine

class ModeSectionMismatch(ChronochatError):
    pass


class EmptyMemory(ChronochatError):
    pass


class SelfChatAborted(ChronochatError):
    """Raised when a backend fails mid-conversation; keeps what was generated."""

    def __init__(self, message: str, partial_sessions: Optional[List[Any]] = None):
        self.partial_sessions = partial_sessions or []
        super().__init__(message)


# dataset / evaluation

class EmptyCorpus(ChronochatError):
    pass


class NoJudgmentsForAttribute(ChronochatError):

    def __init__(self, attribute: str):
        self.attribute = attribute
        super().__init__(f'no judgments for attribute {attribute}')


class ComparisonMismatch(ChronochatError):
    pass


class DegenerateAgreement(ChronochatError):
    pass


# service

class BadConfig(ChronochatError):
    pass


class NoSuchRoom(ChronochatError):
    pass


class RoomFull(ChronochatError):
    pass


class WrongPhase(ChronochatError):
    pass


class InvalidToken(ChronochatError):
    pass


class EmptyText(ChronochatError):
    pass


class TooFewUtterances(ChronochatError):

    def __init__(self, remaining: int):
        self.remaining = remaining
        super().__init__(f'{remaining} more messages needed')

    def to_dict(self) -> Dict[str, Any]:
        result = super().to_dict()
        result['remaining'] = self.remaining
        return result
